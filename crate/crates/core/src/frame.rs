//! Selection frames: a finite meet-semilattice, a family of admissible
//! filters, and a selection function interpreting conditional implication.
//!
//! A frame is *full* when every filter is admissible, and *descriptive*
//! when it is well formed and the admissible family separates points.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{ConditionalLattice, Lattice};
use crate::semilattice::{DocError, FiniteSemilattice, Filter, SemilatticeDoc, SemilatticeViolation};
use crate::syntax::{ConsequencePair, Formula};

/// Default cap on the number of valuations `validates` may enumerate.
pub const DEFAULT_VALUATION_BUDGET: u64 = 10_000_000;

/// Intensional selection families provided as constructors.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionKind {
    /// `s(x, a) = {1}`.
    ConstantTop,
    /// `s(x, a) = a` for `x` below top, `{1}` at top.
    Identity,
    /// `s(x, a) = a ∩ ↑x`; requires a distributive base.
    PrincipalInt,
    /// `s(x, a) = ↑x`.
    PrincipalUp,
}

impl SelectionKind {
    pub const ALL: [SelectionKind; 4] = [
        SelectionKind::ConstantTop,
        SelectionKind::Identity,
        SelectionKind::PrincipalInt,
        SelectionKind::PrincipalUp,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SelectionKind::ConstantTop => "constant-top",
            SelectionKind::Identity => "identity",
            SelectionKind::PrincipalInt => "principal-int",
            SelectionKind::PrincipalUp => "principal-up",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("selection table shape does not match worlds x admissible family")]
    BadTableShape,
    #[error("admissible family must not be empty")]
    EmptyAdmissible,
    #[error("principal-int selection requires a distributive base; witness ({0}, {1}, {2})")]
    NotDistributive(usize, usize, usize),
    #[error("complex algebra needs the admissible family closed under the operations")]
    NotClosed,
}

/// A violated frame condition with a witness. Filters are reported as masks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FrameViolation {
    Base(SemilatticeViolation),
    AdmissibleNotFilter { a: Filter },
    MissingUniverse,
    MissingTopFilter,
    NotClosedUnderIntersection { a: Filter, b: Filter },
    NotClosedUnderJoin { a: Filter, b: Filter },
    NotClosedUnderCto { a: Filter, b: Filter },
    ValueNotFilter { x: usize, a: Filter },
    SelectionTop { a: Filter },
    SelectionAntitone { x: usize, y: usize, a: Filter },
    SelectionMeet { x: usize, y: usize, z: usize, a: Filter },
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::Base(v) => write!(f, "base semilattice: {v}"),
            FrameViolation::AdmissibleNotFilter { a } => {
                write!(f, "admissible set {:#x} is not a filter", a.mask())
            }
            FrameViolation::MissingUniverse => write!(f, "admissible family lacks the full set"),
            FrameViolation::MissingTopFilter => {
                write!(f, "admissible family lacks the top singleton")
            }
            FrameViolation::NotClosedUnderIntersection { a, b } => write!(
                f,
                "admissible family not closed under intersection at ({:#x}, {:#x})",
                a.mask(),
                b.mask()
            ),
            FrameViolation::NotClosedUnderJoin { a, b } => write!(
                f,
                "admissible family not closed under join at ({:#x}, {:#x})",
                a.mask(),
                b.mask()
            ),
            FrameViolation::NotClosedUnderCto { a, b } => write!(
                f,
                "admissible family not closed under the conditional at ({:#x}, {:#x})",
                a.mask(),
                b.mask()
            ),
            FrameViolation::ValueNotFilter { x, a } => {
                write!(f, "selection value at ({x}, {:#x}) is not a filter", a.mask())
            }
            FrameViolation::SelectionTop { a } => {
                write!(f, "selection at top is not the top singleton for {:#x}", a.mask())
            }
            FrameViolation::SelectionAntitone { x, y, a } => write!(
                f,
                "selection not antitone: {x} below {y} but values disagree at {:#x}",
                a.mask()
            ),
            FrameViolation::SelectionMeet { x, y, z, a } => write!(
                f,
                "selection meet condition fails at worlds ({x}, {y}), member {z}, filter {:#x}",
                a.mask()
            ),
        }
    }
}

/// A general selection frame.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneralFrame {
    base: FiniteSemilattice,
    admissible: Vec<Filter>,        // sorted by (len, mask), deduplicated
    selection: Vec<Vec<Filter>>,    // [admissible index][world]
}

impl GeneralFrame {
    /// Build from an explicit table indexed `(world, admissible filter)`.
    pub fn from_table(
        base: FiniteSemilattice,
        admissible: Vec<Filter>,
        table: impl Fn(usize, Filter) -> Filter,
    ) -> Result<Self, FrameError> {
        if admissible.is_empty() {
            return Err(FrameError::EmptyAdmissible);
        }
        let mut admissible = admissible;
        admissible.sort_unstable_by_key(|f| (f.len(), f.mask()));
        admissible.dedup();
        let n = base.n();
        let selection = admissible
            .iter()
            .map(|&a| (0..n).map(|x| table(x, a)).collect())
            .collect();
        Ok(GeneralFrame {
            base,
            admissible,
            selection,
        })
    }

    /// Frame with a named selection family over a given admissible family.
    pub fn with_named_selection(
        base: FiniteSemilattice,
        admissible: Vec<Filter>,
        kind: SelectionKind,
    ) -> Result<Self, FrameError> {
        if kind == SelectionKind::PrincipalInt {
            if let Some((x, y, z)) = base.distributivity_witness() {
                return Err(FrameError::NotDistributive(x, y, z));
            }
        }
        let top = base.top();
        let b = base.clone();
        GeneralFrame::from_table(base, admissible, move |x, a| match kind {
            SelectionKind::ConstantTop => Filter::singleton(top),
            SelectionKind::Identity => {
                if x == top {
                    Filter::singleton(top)
                } else {
                    a
                }
            }
            SelectionKind::PrincipalInt => a.intersect(b.principal_upset(x)),
            SelectionKind::PrincipalUp => b.principal_upset(x),
        })
    }

    /// Full frame (all filters admissible) with a named selection family.
    pub fn full_named(base: FiniteSemilattice, kind: SelectionKind) -> Result<Self, FrameError> {
        let admissible = base.enumerate_filters();
        GeneralFrame::with_named_selection(base, admissible, kind)
    }

    /// Full frame from explicit per-filter columns.
    pub fn full_from_table(
        base: FiniteSemilattice,
        table: impl Fn(usize, Filter) -> Filter,
    ) -> Result<Self, FrameError> {
        let admissible = base.enumerate_filters();
        GeneralFrame::from_table(base, admissible, table)
    }

    pub fn base(&self) -> &FiniteSemilattice {
        &self.base
    }

    pub fn admissible(&self) -> &[Filter] {
        &self.admissible
    }

    pub fn admissible_index(&self, a: Filter) -> Option<usize> {
        self.admissible.iter().position(|&f| f == a)
    }

    /// Selection value, defined only on admissible filters.
    pub fn s(&self, x: usize, a: Filter) -> Option<Filter> {
        self.admissible_index(a).map(|i| self.selection[i][x])
    }

    pub fn s_by_index(&self, x: usize, a_idx: usize) -> Filter {
        self.selection[a_idx][x]
    }

    pub fn is_full(&self) -> bool {
        self.admissible == self.base.enumerate_filters()
    }

    /// Well formed and the admissible family separates points.
    pub fn is_descriptive(&self) -> bool {
        self.validate().is_empty() && self.base.hms_check(&self.admissible)
    }

    /// `p ⊸̇ q = {x : s(x, p) ⊆ q}` for admissible `p`.
    pub fn dto(&self, p_idx: usize, q: Filter) -> Filter {
        Filter::from_elems(
            (0..self.base.n()).filter(|&x| self.selection[p_idx][x].is_subset(q)),
        )
    }

    /// Scan every frame condition and report all violations.
    pub fn validate(&self) -> Vec<FrameViolation> {
        let mut out: Vec<FrameViolation> = self
            .base
            .validate()
            .into_iter()
            .map(FrameViolation::Base)
            .collect();
        let n = self.base.n();

        for &a in &self.admissible {
            if !self.base.is_filter(a) {
                out.push(FrameViolation::AdmissibleNotFilter { a });
            }
        }
        if !self.admissible.contains(&self.base.universe()) {
            out.push(FrameViolation::MissingUniverse);
        }
        if !self.admissible.contains(&self.base.top_filter()) {
            out.push(FrameViolation::MissingTopFilter);
        }
        for (i, &a) in self.admissible.iter().enumerate() {
            for &b in &self.admissible {
                if !self.admissible.contains(&a.intersect(b)) {
                    out.push(FrameViolation::NotClosedUnderIntersection { a, b });
                }
                if !self.admissible.contains(&self.base.filter_join(a, b)) {
                    out.push(FrameViolation::NotClosedUnderJoin { a, b });
                }
                if !self.admissible.contains(&self.dto(i, b)) {
                    out.push(FrameViolation::NotClosedUnderCto { a, b });
                }
            }
        }

        for (i, &a) in self.admissible.iter().enumerate() {
            let col = &self.selection[i];
            for (x, &value) in col.iter().enumerate() {
                if !self.base.is_filter(value) {
                    out.push(FrameViolation::ValueNotFilter { x, a });
                }
            }
            if col[self.base.top()] != self.base.top_filter() {
                out.push(FrameViolation::SelectionTop { a });
            }
            for x in 0..n {
                for y in 0..n {
                    if self.base.leq(x, y) && !col[y].is_subset(col[x]) {
                        out.push(FrameViolation::SelectionAntitone { x, y, a });
                    }
                    let at_meet = col[self.base.meet(x, y)];
                    for z in at_meet.iter().take_while(|&z| z < n) {
                        let ok = col[x].iter().take_while(|&u| u < n).any(|u| {
                            col[y]
                                .iter()
                                .take_while(|&v| v < n)
                                .any(|v| self.base.leq(self.base.meet(u, v), z))
                        });
                        if !ok {
                            out.push(FrameViolation::SelectionMeet { x, y, z, a });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `s(x ⋏ y, a) = s(x, a) ▽ s(y, a)` everywhere; a consequence of the
    /// frame conditions, kept as an independent cross-check.
    pub fn check_s_genfil(&self) -> bool {
        let n = self.base.n();
        for col in &self.selection {
            for x in 0..n {
                for y in 0..n {
                    let lhs = col[self.base.meet(x, y)];
                    let rhs = self.base.filter_join(col[x], col[y]);
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The conditional lattice of admissible filters.
    pub fn complex_algebra(&self) -> Result<ConditionalLattice, FrameError> {
        let k = self.admissible.len();
        let idx = |f: Filter| -> Result<usize, FrameError> {
            self.admissible_index(f).ok_or(FrameError::NotClosed)
        };
        let names: Vec<String> = self
            .admissible
            .iter()
            .map(|&f| self.base.filter_label(f))
            .collect();
        let mut meet = vec![0usize; k * k];
        let mut join = vec![0usize; k * k];
        let mut cto = vec![0usize; k * k];
        for i in 0..k {
            for j in 0..k {
                meet[i * k + j] = idx(self.admissible[i].intersect(self.admissible[j]))?;
                join[i * k + j] =
                    idx(self.base.filter_join(self.admissible[i], self.admissible[j]))?;
                cto[i * k + j] = idx(self.dto(i, self.admissible[j]))?;
            }
        }
        let top = idx(self.base.universe())?;
        let bot = idx(self.base.top_filter())?;
        let lat = Lattice::new(names, top, bot, meet, join).expect("carrier shape");
        Ok(ConditionalLattice::new(lat, cto).expect("table shape"))
    }
}

/// Assignment of admissible filters to atoms.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Valuation(pub BTreeMap<String, Filter>);

impl Valuation {
    pub fn new(entries: impl IntoIterator<Item = (String, Filter)>) -> Self {
        Valuation(entries.into_iter().collect())
    }

    pub fn get(&self, atom: &str) -> Option<Filter> {
        self.0.get(atom).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("valuation of `{0}` is not an admissible filter")]
    NonAdmissibleValuation(String),
    #[error("truth set escaped the admissible family")]
    NonAdmissibleTruthSet,
}

/// A frame with a valuation.
#[derive(Clone, Debug)]
pub struct Model<'a> {
    pub frame: &'a GeneralFrame,
    pub valuation: Valuation,
}

impl<'a> Model<'a> {
    pub fn new(frame: &'a GeneralFrame, valuation: Valuation) -> Self {
        Model { frame, valuation }
    }

    /// Truth set of a formula, world by world.
    pub fn eval(&self, f: &Formula) -> Result<Filter, EvalError> {
        let base = self.frame.base();
        let n = base.n();
        match f {
            Formula::Prop(p) => {
                let v = self
                    .valuation
                    .get(p)
                    .ok_or_else(|| EvalError::UnknownAtom(p.clone()))?;
                if self.frame.admissible_index(v).is_none() {
                    return Err(EvalError::NonAdmissibleValuation(p.clone()));
                }
                Ok(v)
            }
            Formula::Top => Ok(base.universe()),
            Formula::Bot => Ok(base.top_filter()),
            Formula::And(l, r) => Ok(self.eval(l)?.intersect(self.eval(r)?)),
            Formula::Or(l, r) => {
                let lv = self.eval(l)?;
                let rv = self.eval(r)?;
                // x holds iff some y in the left set and z in the right set
                // have y ⋏ z below x
                let mut out = Filter::EMPTY;
                for x in 0..n {
                    let hit = lv.iter().take_while(|&y| y < n).any(|y| {
                        rv.iter()
                            .take_while(|&z| z < n)
                            .any(|z| base.leq(base.meet(y, z), x))
                    });
                    if hit {
                        out = out.with(x);
                    }
                }
                Ok(out)
            }
            Formula::Cto(l, r) => {
                let lv = self.eval(l)?;
                let rv = self.eval(r)?;
                let idx = self
                    .frame
                    .admissible_index(lv)
                    .ok_or(EvalError::NonAdmissibleTruthSet)?;
                let mut out = Filter::EMPTY;
                for x in 0..n {
                    if self.frame.s_by_index(x, idx).is_subset(rv) {
                        out = out.with(x);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn satisfies(&self, world: usize, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.eval(f)?.contains(world))
    }
}

/// Outcome of an exhaustive validity check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Validity {
    Valid,
    Refuted { valuation: Valuation, world: usize },
}

impl Validity {
    pub fn holds(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidityError {
    #[error("valuation space of size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Exhaustively check a consequence pair over all admissible valuations of
/// the atoms occurring in it.
pub fn validates(
    frame: &GeneralFrame,
    pair: &ConsequencePair,
    budget: u64,
) -> Result<Validity, ValidityError> {
    let atoms: Vec<String> = pair.atoms().into_iter().collect();
    let k = frame.admissible().len() as u64;
    let mut size: u64 = 1;
    for _ in &atoms {
        size = size
            .checked_mul(k)
            .ok_or(ValidityError::BudgetExceeded { size: u64::MAX, budget })?;
        if size > budget {
            return Err(ValidityError::BudgetExceeded { size, budget });
        }
    }
    let mut indices = vec![0usize; atoms.len()];
    loop {
        let valuation = Valuation::new(
            atoms
                .iter()
                .zip(&indices)
                .map(|(a, &i)| (a.clone(), frame.admissible()[i])),
        );
        let model = Model::new(frame, valuation.clone());
        let lhs = model.eval(&pair.lhs)?;
        let rhs = model.eval(&pair.rhs)?;
        if !lhs.is_subset(rhs) {
            let world = lhs
                .iter()
                .find(|&x| !rhs.contains(x))
                .expect("non-subset has a witness");
            return Ok(Validity::Refuted { valuation, world });
        }
        // odometer over admissible indices
        let mut pos = 0;
        loop {
            if pos == indices.len() {
                return Ok(Validity::Valid);
            }
            indices[pos] += 1;
            if indices[pos] < frame.admissible().len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

/// A violated morphism condition with a witness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MorphismViolation {
    /// `f(x ⋏ y) != f(x) ⋏' f(y)`.
    NotMeetHom { x: usize, y: usize },
    /// `f(x) = 1'` but `x != 1`, or the other way around.
    TopCondition { x: usize },
    /// `y' ⋏' z' ≼' f(x)` with no covering pair below `x`.
    ZigZag { x: usize, y2: usize, z2: usize },
    /// Preimage of an admissible filter is not admissible.
    Preimage { a2: Filter },
    /// Forward selection condition fails.
    Forward { x: usize, a2: Filter, y: usize },
    /// Backward selection condition fails.
    Backward { x: usize, a2: Filter, y2: usize },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::NotMeetHom { x, y } => {
                write!(f, "does not commute with meets at ({x}, {y})")
            }
            MorphismViolation::TopCondition { x } => {
                write!(f, "top condition fails at world {x}")
            }
            MorphismViolation::ZigZag { x, y2, z2 } => {
                write!(f, "zig-zag condition fails at world {x} against ({y2}, {z2})")
            }
            MorphismViolation::Preimage { a2 } => {
                write!(f, "preimage of {:#x} is not admissible", a2.mask())
            }
            MorphismViolation::Forward { x, a2, y } => write!(
                f,
                "forward condition fails at world {x}, filter {:#x}, member {y}",
                a2.mask()
            ),
            MorphismViolation::Backward { x, a2, y2 } => write!(
                f,
                "backward condition fails at world {x}, filter {:#x}, target member {y2}",
                a2.mask()
            ),
        }
    }
}

fn preimage(map: &[usize], target: Filter) -> Filter {
    Filter::from_elems((0..map.len()).filter(|&x| target.contains(map[x])))
}

/// Check that `map` is a selection morphism from `g` to `h`.
pub fn check_selection_morphism(
    map: &[usize],
    g: &GeneralFrame,
    h: &GeneralFrame,
) -> Vec<MorphismViolation> {
    let mut out = Vec::new();
    let (sb, tb) = (g.base(), h.base());
    let n = sb.n();

    for x in 0..n {
        for y in 0..n {
            if map[sb.meet(x, y)] != tb.meet(map[x], map[y]) {
                out.push(MorphismViolation::NotMeetHom { x, y });
            }
        }
        if (map[x] == tb.top()) != (x == sb.top()) {
            out.push(MorphismViolation::TopCondition { x });
        }
        for y2 in 0..tb.n() {
            for z2 in 0..tb.n() {
                if !tb.leq(tb.meet(y2, z2), map[x]) {
                    continue;
                }
                let ok = (0..n).any(|y| {
                    tb.leq(y2, map[y])
                        && (0..n).any(|z| tb.leq(z2, map[z]) && sb.leq(sb.meet(y, z), x))
                });
                if !ok {
                    out.push(MorphismViolation::ZigZag { x, y2, z2 });
                }
            }
        }
    }

    for &a2 in h.admissible() {
        let pre = preimage(map, a2);
        let Some(pre_idx) = g.admissible_index(pre) else {
            out.push(MorphismViolation::Preimage { a2 });
            continue;
        };
        let a2_idx = h.admissible_index(a2).expect("own admissible");
        for x in 0..n {
            let src = g.s_by_index(x, pre_idx);
            let tgt = h.s_by_index(map[x], a2_idx);
            for y in src.iter().take_while(|&y| y < n) {
                if !tgt.contains(map[y]) {
                    out.push(MorphismViolation::Forward { x, a2, y });
                }
            }
            for y2 in tgt.iter().take_while(|&y2| y2 < tb.n()) {
                let ok = src
                    .iter()
                    .take_while(|&y| y < n)
                    .any(|y| tb.leq(map[y], y2));
                if !ok {
                    out.push(MorphismViolation::Backward { x, a2, y2 });
                }
            }
        }
    }
    out
}

/// First formula (up to the given depth, over the shared atoms) whose truth
/// is not preserved and reflected by `map`, or `Ok` if none exists.
pub fn truth_preservation(
    map: &[usize],
    m: &Model<'_>,
    m2: &Model<'_>,
    depth: usize,
) -> Result<Result<(), Formula>, EvalError> {
    let shared: Vec<&String> = m
        .valuation
        .0
        .keys()
        .filter(|k| m2.valuation.0.contains_key(*k))
        .collect();
    let mut layer: Vec<Formula> = vec![Formula::Top, Formula::Bot];
    layer.extend(shared.iter().map(|a| Formula::Prop((*a).clone())));

    // Semantic pairs reached so far; formulas whose pair of truth sets was
    // already seen cannot produce new pairs and are pruned.
    let mut seen: Vec<(Filter, Filter)> = Vec::new();
    let mut frontier: Vec<(Formula, Filter, Filter)> = Vec::new();
    for f in layer {
        let a = m.eval(&f)?;
        let b = m2.eval(&f)?;
        if a != preimage(map, b) {
            return Ok(Err(f));
        }
        if !seen.contains(&(a, b)) {
            seen.push((a, b));
            frontier.push((f, a, b));
        }
    }
    let mut all = frontier.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (fl, la, lb) in &all {
            for (fr, ra, rb) in &all {
                for op in 0..3 {
                    let (f, a, b) = match op {
                        0 => (
                            Formula::and(fl.clone(), fr.clone()),
                            la.intersect(*ra),
                            lb.intersect(*rb),
                        ),
                        1 => (
                            Formula::or(fl.clone(), fr.clone()),
                            m.frame.base().filter_join(*la, *ra),
                            m2.frame.base().filter_join(*lb, *rb),
                        ),
                        _ => {
                            let f = Formula::cto(fl.clone(), fr.clone());
                            let ia = m
                                .frame
                                .admissible_index(*la)
                                .ok_or(EvalError::NonAdmissibleTruthSet)?;
                            let ib = m2
                                .frame
                                .admissible_index(*lb)
                                .ok_or(EvalError::NonAdmissibleTruthSet)?;
                            (f, m.frame.dto(ia, *ra), m2.frame.dto(ib, *rb))
                        }
                    };
                    if a != preimage(map, b) {
                        return Ok(Err(f));
                    }
                    if !seen.contains(&(a, b)) {
                        seen.push((a, b));
                        next.push((f, a, b));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        all.extend(next);
    }
    Ok(Ok(()))
}

/// Admissible family in a JSON frame document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdmissibleDoc {
    All(String),
    Families(Vec<Vec<String>>),
}

/// Selection part of a JSON frame document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SelectionDoc {
    Table { entries: Vec<SelectionEntry> },
    ConstantTop,
    Identity,
    PrincipalInt,
    PrincipalUp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub at: String,
    pub filter: Vec<String>,
    pub value: Vec<String>,
}

/// JSON document form of a general frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameDoc {
    #[serde(flatten)]
    pub semilattice: SemilatticeDoc,
    pub admissible: AdmissibleDoc,
    pub selection: SelectionDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameDocError {
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("admissible must be \"all\" or a list of filters, got `{0}`")]
    BadAdmissibleTag(String),
    #[error("selection entry for world `{0}` and filter {1:?} is missing")]
    MissingEntry(String, Vec<String>),
    #[error("selection entry for world `{0}` and filter {1:?} listed twice")]
    DuplicateEntry(String, Vec<String>),
    #[error("selection entry refers to filter {0:?} outside the admissible family")]
    UnknownFilter(Vec<String>),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

impl FrameDoc {
    pub fn to_frame(&self) -> Result<GeneralFrame, FrameDocError> {
        let base = self.semilattice.to_semilattice()?;
        let named = |names: &[String]| -> Result<Filter, FrameDocError> {
            let mut f = Filter::EMPTY;
            for n in names {
                let i = base
                    .index_of(n)
                    .ok_or_else(|| DocError::UnknownElement(n.clone()))?;
                f = f.with(i);
            }
            Ok(f)
        };
        let admissible: Vec<Filter> = match &self.admissible {
            AdmissibleDoc::All(tag) if tag == "all" => base.enumerate_filters(),
            AdmissibleDoc::All(tag) => {
                return Err(FrameDocError::BadAdmissibleTag(tag.clone()))
            }
            AdmissibleDoc::Families(fams) => fams
                .iter()
                .map(|f| named(f))
                .collect::<Result<Vec<_>, _>>()?,
        };

        match &self.selection {
            SelectionDoc::ConstantTop => Ok(GeneralFrame::with_named_selection(
                base,
                admissible,
                SelectionKind::ConstantTop,
            )?),
            SelectionDoc::Identity => Ok(GeneralFrame::with_named_selection(
                base,
                admissible,
                SelectionKind::Identity,
            )?),
            SelectionDoc::PrincipalInt => Ok(GeneralFrame::with_named_selection(
                base,
                admissible,
                SelectionKind::PrincipalInt,
            )?),
            SelectionDoc::PrincipalUp => Ok(GeneralFrame::with_named_selection(
                base,
                admissible,
                SelectionKind::PrincipalUp,
            )?),
            SelectionDoc::Table { entries } => {
                let mut sorted_adm = admissible.clone();
                sorted_adm.sort_unstable_by_key(|f| (f.len(), f.mask()));
                sorted_adm.dedup();
                let mut table: BTreeMap<(usize, Filter), Filter> = BTreeMap::new();
                for e in entries {
                    let x = base
                        .index_of(&e.at)
                        .ok_or_else(|| DocError::UnknownElement(e.at.clone()))?;
                    let a = named(&e.filter)?;
                    if !sorted_adm.contains(&a) {
                        return Err(FrameDocError::UnknownFilter(e.filter.clone()));
                    }
                    let v = named(&e.value)?;
                    if table.insert((x, a), v).is_some() {
                        return Err(FrameDocError::DuplicateEntry(
                            e.at.clone(),
                            e.filter.clone(),
                        ));
                    }
                }
                for &a in &sorted_adm {
                    for x in 0..base.n() {
                        if !table.contains_key(&(x, a)) {
                            return Err(FrameDocError::MissingEntry(
                                base.name(x).to_owned(),
                                base.filter_names(a),
                            ));
                        }
                    }
                }
                Ok(GeneralFrame::from_table(base, sorted_adm, |x, a| {
                    table[&(x, a)]
                })?)
            }
        }
    }

    pub fn from_frame(frame: &GeneralFrame) -> FrameDoc {
        let base = frame.base();
        let all = frame.is_full();
        let admissible = if all {
            AdmissibleDoc::All("all".to_owned())
        } else {
            AdmissibleDoc::Families(
                frame
                    .admissible()
                    .iter()
                    .map(|&a| base.filter_names(a))
                    .collect(),
            )
        };
        let mut entries = Vec::new();
        for (i, &a) in frame.admissible().iter().enumerate() {
            for x in 0..base.n() {
                entries.push(SelectionEntry {
                    at: base.name(x).to_owned(),
                    filter: base.filter_names(a),
                    value: base.filter_names(frame.s_by_index(x, i)),
                });
            }
        }
        FrameDoc {
            semilattice: SemilatticeDoc::from_semilattice(base),
            admissible,
            selection: SelectionDoc::Table { entries },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::{parse_formula, parse_pair};

    #[test]
    fn constant_top_frame_is_valid() {
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::ConstantTop).unwrap();
        assert!(g.validate().is_empty());
        assert!(g.is_full());
        assert!(g.is_descriptive());
    }

    #[test]
    fn selection_top_violation_is_reported() {
        let d4 = fixtures::diamond();
        let ua = d4.principal_upset(d4.index_of("a").unwrap());
        let g = GeneralFrame::full_from_table(d4.clone(), |_, a| {
            if a == ua {
                ua
            } else {
                d4.top_filter()
            }
        })
        .unwrap();
        let report = g.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, FrameViolation::SelectionTop { a } if *a == ua)));
    }

    #[test]
    fn canonical_selection_on_diamond_is_valid() {
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::PrincipalInt).unwrap();
        assert!(g.validate().is_empty());
        assert!(g.check_s_genfil());
    }

    #[test]
    fn principal_int_requires_distributive() {
        let err = GeneralFrame::full_named(fixtures::m3(), SelectionKind::PrincipalInt)
            .unwrap_err();
        assert!(matches!(err, FrameError::NotDistributive(_, _, _)));
    }

    #[test]
    fn named_families_are_valid_on_every_fixture() {
        for base in [
            fixtures::point(),
            fixtures::two_chain(),
            fixtures::three_chain(),
            fixtures::diamond(),
            fixtures::m3(),
            fixtures::n5(),
        ] {
            for kind in SelectionKind::ALL {
                match GeneralFrame::full_named(base.clone(), kind) {
                    Ok(g) => {
                        assert!(g.validate().is_empty(), "{kind:?} on {:?}", base.names());
                        assert!(g.check_s_genfil());
                    }
                    Err(FrameError::NotDistributive(..)) => {
                        assert_eq!(kind, SelectionKind::PrincipalInt);
                        assert!(!base.is_distributive());
                    }
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn disjunction_can_hold_without_either_disjunct() {
        let d4 = fixtures::diamond();
        let g = GeneralFrame::full_named(d4.clone(), SelectionKind::ConstantTop).unwrap();
        let v = Valuation::new([
            ("p".to_owned(), d4.principal_upset(d4.index_of("a").unwrap())),
            ("q".to_owned(), d4.principal_upset(d4.index_of("b").unwrap())),
        ]);
        let m = Model::new(&g, v);
        let or = m.eval(&parse_formula("p \\/ q").unwrap()).unwrap();
        assert_eq!(or, d4.universe());
        let zero = d4.index_of("0").unwrap();
        assert!(!m.eval(&parse_formula("p").unwrap()).unwrap().contains(zero));
        assert!(!m.eval(&parse_formula("q").unwrap()).unwrap().contains(zero));
        assert!(or.contains(zero));
    }

    #[test]
    fn bot_evaluates_to_top_singleton() {
        let g = GeneralFrame::full_named(fixtures::m3(), SelectionKind::Identity).unwrap();
        let m = Model::new(&g, Valuation::default());
        assert_eq!(
            m.eval(&Formula::Bot).unwrap(),
            g.base().top_filter()
        );
    }

    #[test]
    fn reflexive_conditional_on_canonical_selection() {
        let d4 = fixtures::diamond();
        let g = GeneralFrame::full_named(d4.clone(), SelectionKind::PrincipalInt).unwrap();
        let v = Valuation::new([(
            "p".to_owned(),
            d4.principal_upset(d4.index_of("a").unwrap()),
        )]);
        let m = Model::new(&g, v);
        assert_eq!(
            m.eval(&parse_formula("p ~> p").unwrap()).unwrap(),
            d4.universe()
        );
    }

    #[test]
    fn distribution_fails_on_m3() {
        let m3 = fixtures::m3();
        let g = GeneralFrame::full_named(m3.clone(), SelectionKind::ConstantTop).unwrap();
        let pair = parse_pair("p /\\ (q \\/ r) |- (p /\\ q) \\/ (p /\\ r)").unwrap();
        match validates(&g, &pair, DEFAULT_VALUATION_BUDGET).unwrap() {
            Validity::Refuted { .. } => {}
            Validity::Valid => panic!("distribution should fail on m3"),
        }
        // the specific witness
        let v = Valuation::new([
            ("p".to_owned(), m3.principal_upset(m3.index_of("a").unwrap())),
            ("q".to_owned(), m3.principal_upset(m3.index_of("b").unwrap())),
            ("r".to_owned(), m3.principal_upset(m3.index_of("c").unwrap())),
        ]);
        let m = Model::new(&g, v);
        let lhs = m.eval(&pair.lhs).unwrap();
        let rhs = m.eval(&pair.rhs).unwrap();
        let a = m3.index_of("a").unwrap();
        assert!(lhs.contains(a) && !rhs.contains(a));
    }

    #[test]
    fn trivial_validities() {
        for kind in [SelectionKind::ConstantTop, SelectionKind::PrincipalUp] {
            let g = GeneralFrame::full_named(fixtures::m3(), kind).unwrap();
            let pair = parse_pair("p |- T").unwrap();
            assert!(validates(&g, &pair, DEFAULT_VALUATION_BUDGET)
                .unwrap()
                .holds());
        }
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::PrincipalInt).unwrap();
        let pair = parse_pair("T |- p ~> p").unwrap();
        assert!(validates(&g, &pair, DEFAULT_VALUATION_BUDGET)
            .unwrap()
            .holds());
    }

    #[test]
    fn validates_budget_guard() {
        let g = GeneralFrame::full_named(fixtures::m3(), SelectionKind::ConstantTop).unwrap();
        let pair = parse_pair("p /\\ q |- q \\/ r").unwrap();
        let err = validates(&g, &pair, 10).unwrap_err();
        assert!(matches!(err, ValidityError::BudgetExceeded { .. }));
    }

    #[test]
    fn complex_algebra_of_m3_is_nondistributive_with_5_elements() {
        let g = GeneralFrame::full_named(fixtures::m3(), SelectionKind::ConstantTop).unwrap();
        let alg = g.complex_algebra().unwrap();
        assert_eq!(alg.n(), 5);
        assert!(alg.validate().is_empty());
        assert!(alg.heyting_residual().is_none());
        // constant-top selection gives the constantly-top conditional
        for a in 0..5 {
            for b in 0..5 {
                if b == alg.top() {
                    assert_eq!(alg.cto(a, b), alg.top());
                }
            }
            assert_eq!(alg.cto(a, alg.top()), alg.top());
        }
    }

    #[test]
    fn genfil_identity_holds_on_valid_frames() {
        for kind in SelectionKind::ALL {
            if kind == SelectionKind::PrincipalInt {
                continue;
            }
            let g = GeneralFrame::full_named(fixtures::m3(), kind).unwrap();
            assert!(g.check_s_genfil());
        }
    }

    #[test]
    fn identity_map_is_a_selection_morphism() {
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::Identity).unwrap();
        let id: Vec<usize> = (0..4).collect();
        assert!(check_selection_morphism(&id, &g, &g).is_empty());
    }

    #[test]
    fn preimage_condition_catches_proper_families() {
        let chain = fixtures::three_chain();
        let adm = vec![chain.top_filter(), chain.universe()];
        let g = GeneralFrame::with_named_selection(chain.clone(), adm, SelectionKind::ConstantTop)
            .unwrap();
        let h = GeneralFrame::full_named(chain, SelectionKind::ConstantTop).unwrap();
        let id: Vec<usize> = (0..3).collect();
        let report = check_selection_morphism(&id, &g, &h);
        assert!(report
            .iter()
            .any(|v| matches!(v, MorphismViolation::Preimage { .. })));
    }

    #[test]
    fn chain_embedding_into_diamond_fails_the_zigzag() {
        let g = GeneralFrame::full_named(fixtures::three_chain(), SelectionKind::ConstantTop)
            .unwrap();
        let h = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::ConstantTop).unwrap();
        // 1 -> 1, a -> a, 0 -> 0: the bottom's image sits below a ⋏ b,
        // but nothing in the chain covers b
        let map = vec![0usize, 1, 3];
        let report = check_selection_morphism(&map, &g, &h);
        assert!(report
            .iter()
            .any(|v| matches!(v, MorphismViolation::ZigZag { .. })));
    }

    #[test]
    fn complex_algebras_of_sampled_frames_are_conditional_lattices() {
        use crate::search::generate::sample_tables;
        for base in [fixtures::three_chain(), fixtures::diamond(), fixtures::m3()] {
            let admissible = base.enumerate_filters();
            for table in sample_tables(&base, &admissible, 17, 50) {
                let g = GeneralFrame::from_table(base.clone(), admissible.clone(), |x, a| {
                    table[&(x, a)]
                })
                .unwrap();
                let algebra = g.complex_algebra().unwrap();
                assert!(algebra.validate().is_empty());
            }
        }
    }

    #[test]
    fn collapse_to_point_violates_top_condition() {
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::ConstantTop).unwrap();
        let h = GeneralFrame::full_named(fixtures::point(), SelectionKind::ConstantTop).unwrap();
        let map = vec![0usize; 4];
        let report = check_selection_morphism(&map, &g, &h);
        assert!(report
            .iter()
            .any(|v| matches!(v, MorphismViolation::TopCondition { .. })));
    }

    #[test]
    fn truth_preservation_for_identity() {
        let d4 = fixtures::diamond();
        let g = GeneralFrame::full_named(d4.clone(), SelectionKind::PrincipalUp).unwrap();
        let v = Valuation::new([
            ("p".to_owned(), d4.principal_upset(1)),
            ("q".to_owned(), d4.principal_upset(2)),
        ]);
        let m1 = Model::new(&g, v.clone());
        let m2 = Model::new(&g, v);
        let id: Vec<usize> = (0..4).collect();
        assert!(truth_preservation(&id, &m1, &m2, 3).unwrap().is_ok());
    }

    #[test]
    fn forward_condition_failure_surfaces_as_a_conditional_formula() {
        // identical two-chain bases, different selections: the source
        // sends the free world to the universe, the target to the top
        // singleton; the identity map then violates the forward condition
        // and some conditional formula must change truth value
        let c2 = fixtures::two_chain();
        let src = GeneralFrame::full_from_table(c2.clone(), |x, _| {
            if x == c2.top() {
                c2.top_filter()
            } else {
                c2.universe()
            }
        })
        .unwrap();
        let tgt = GeneralFrame::full_named(c2.clone(), SelectionKind::ConstantTop).unwrap();
        assert!(src.validate().is_empty());
        let id: Vec<usize> = (0..2).collect();
        let report = check_selection_morphism(&id, &src, &tgt);
        assert!(report
            .iter()
            .any(|v| matches!(v, MorphismViolation::Forward { .. })));

        let v = Valuation::new([("p".to_owned(), c2.top_filter())]);
        let m1 = Model::new(&src, v.clone());
        let m2 = Model::new(&tgt, v);
        let out = truth_preservation(&id, &m1, &m2, 2).unwrap();
        match out {
            Err(Formula::Cto(_, _)) => {}
            other => panic!("expected a conditional counterexample, got {other:?}"),
        }
    }

    #[test]
    fn truth_preservation_detects_broken_valuation() {
        let d4 = fixtures::diamond();
        let g = GeneralFrame::full_named(d4.clone(), SelectionKind::PrincipalUp).unwrap();
        let m1 = Model::new(
            &g,
            Valuation::new([("p".to_owned(), d4.principal_upset(1))]),
        );
        let m2 = Model::new(
            &g,
            Valuation::new([("p".to_owned(), d4.principal_upset(2))]),
        );
        let id: Vec<usize> = (0..4).collect();
        let out = truth_preservation(&id, &m1, &m2, 2).unwrap();
        assert_eq!(out, Err(Formula::prop("p")));
    }

    #[test]
    fn eval_agrees_with_complex_algebra() {
        use crate::syntax::parse_formula;
        let formulas = [
            "p /\\ (q \\/ r)",
            "(p ~> q) /\\ (p ~> r)",
            "p ~> (q \\/ (r /\\ p))",
            "F \\/ (T ~> p)",
        ];
        for kind in [SelectionKind::ConstantTop, SelectionKind::Identity, SelectionKind::PrincipalUp] {
            let g = GeneralFrame::full_named(fixtures::m3(), kind).unwrap();
            let alg = g.complex_algebra().unwrap();
            let filters = g.admissible().to_vec();
            for (i, &fp) in filters.iter().enumerate() {
                for (j, &fq) in filters.iter().enumerate() {
                    for (k, &fr) in filters.iter().enumerate() {
                        let v = Valuation::new([
                            ("p".to_owned(), fp),
                            ("q".to_owned(), fq),
                            ("r".to_owned(), fr),
                        ]);
                        let m = Model::new(&g, v);
                        let assignment: BTreeMap<String, usize> = [
                            ("p".to_owned(), i),
                            ("q".to_owned(), j),
                            ("r".to_owned(), k),
                        ]
                        .into_iter()
                        .collect();
                        for f in &formulas {
                            let f = parse_formula(f).unwrap();
                            let via_model = m.eval(&f).unwrap();
                            let via_algebra = alg.eval_assignment(&f, &assignment).unwrap();
                            assert_eq!(via_model, filters[via_algebra]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn one_world_frame_validates_everything() {
        let g = GeneralFrame::full_named(fixtures::point(), SelectionKind::Identity).unwrap();
        for s in ["p |- q", "T |- F", "p ~> q |- F"] {
            let pair = parse_pair(s).unwrap();
            assert!(validates(&g, &pair, DEFAULT_VALUATION_BUDGET)
                .unwrap()
                .holds());
        }
    }

    #[test]
    fn proper_admissible_family_frame() {
        let chain = fixtures::three_chain();
        let adm = vec![chain.top_filter(), chain.universe()];
        let g = GeneralFrame::with_named_selection(chain.clone(), adm, SelectionKind::Identity)
            .unwrap();
        assert!(g.validate().is_empty());
        assert!(!g.is_full());
        assert!(!g.is_descriptive());
        // the non-admissible filter is invisible to the frame
        let ua = chain.principal_upset(chain.index_of("a").unwrap());
        assert!(g.s(0, ua).is_none());
    }

    #[test]
    fn frame_doc_round_trip() {
        let g = GeneralFrame::full_named(fixtures::diamond(), SelectionKind::PrincipalUp).unwrap();
        let doc = FrameDoc::from_frame(&g);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: FrameDoc = serde_json::from_str(&json).unwrap();
        let back = parsed.to_frame().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn frame_doc_named_selection_and_errors() {
        let json = r#"{
            "elements": ["1", "a", "0"],
            "top": "1",
            "meet": [["1","a","a"], ["1","0","0"], ["a","0","0"]],
            "admissible": "all",
            "selection": {"kind": "principal-up"}
        }"#;
        let doc: FrameDoc = serde_json::from_str(json).unwrap();
        let g = doc.to_frame().unwrap();
        assert!(g.is_full());
        assert_eq!(g.admissible().len(), 3);

        let missing = r#"{
            "elements": ["1", "0"],
            "top": "1",
            "meet": [["1","0","0"]],
            "admissible": "all",
            "selection": {"kind": "table", "entries": [
                {"at": "1", "filter": ["1"], "value": ["1"]}
            ]}
        }"#;
        let doc: FrameDoc = serde_json::from_str(missing).unwrap();
        assert!(matches!(
            doc.to_frame(),
            Err(FrameDocError::MissingEntry(_, _))
        ));
    }
}
