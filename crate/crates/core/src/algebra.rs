//! Finite conditional lattices: bounded lattices with a binary operator
//! whose second argument preserves finite meets and top.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semilattice::{DocError, FiniteSemilattice, StructureError};
use crate::syntax::{ConsequencePair, Formula};

/// Exhaustive conditional-table enumeration is provided up to this carrier
/// size; beyond it, sample instead.
pub const CTO_ENUM_LIMIT: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LatticeViolation {
    MeetNotCommutative { x: usize, y: usize },
    MeetNotAssociative { x: usize, y: usize, z: usize },
    MeetNotIdempotent { x: usize },
    JoinNotCommutative { x: usize, y: usize },
    JoinNotAssociative { x: usize, y: usize, z: usize },
    JoinNotIdempotent { x: usize },
    AbsorptionFails { x: usize, y: usize },
    TopNotGreatest { x: usize },
    BotNotLeast { x: usize },
    CtoTopLaw { a: usize },
    CtoMeetLaw { a: usize, b: usize, c: usize },
}

impl fmt::Display for LatticeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LatticeViolation::*;
        match self {
            MeetNotCommutative { x, y } => write!(f, "meet commutativity fails at ({x}, {y})"),
            MeetNotAssociative { x, y, z } => {
                write!(f, "meet associativity fails at ({x}, {y}, {z})")
            }
            MeetNotIdempotent { x } => write!(f, "meet idempotence fails at {x}"),
            JoinNotCommutative { x, y } => write!(f, "join commutativity fails at ({x}, {y})"),
            JoinNotAssociative { x, y, z } => {
                write!(f, "join associativity fails at ({x}, {y}, {z})")
            }
            JoinNotIdempotent { x } => write!(f, "join idempotence fails at {x}"),
            AbsorptionFails { x, y } => write!(f, "absorption fails at ({x}, {y})"),
            TopNotGreatest { x } => write!(f, "top is not greatest at {x}"),
            BotNotLeast { x } => write!(f, "bottom is not least at {x}"),
            CtoTopLaw { a } => write!(f, "first conditional law fails at {a}"),
            CtoMeetLaw { a, b, c } => {
                write!(f, "second conditional law fails at ({a}, {b}, {c})")
            }
        }
    }
}

/// A bounded lattice given by explicit meet and join tables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lattice {
    names: Vec<String>,
    top: usize,
    bot: usize,
    meet: Vec<usize>,
    join: Vec<usize>,
}

impl Lattice {
    pub fn new(
        names: Vec<String>,
        top: usize,
        bot: usize,
        meet: Vec<usize>,
        join: Vec<usize>,
    ) -> Result<Self, StructureError> {
        let n = names.len();
        if n == 0 {
            return Err(StructureError::Empty);
        }
        if n > 64 {
            return Err(StructureError::TooLarge(n));
        }
        for table in [&meet, &join] {
            if table.len() != n * n {
                return Err(StructureError::BadTableShape {
                    expected: n * n,
                    got: table.len(),
                });
            }
            if let Some(&bad) = table.iter().find(|&&v| v >= n) {
                return Err(StructureError::IndexOutOfRange(bad));
            }
        }
        if top >= n {
            return Err(StructureError::IndexOutOfRange(top));
        }
        if bot >= n {
            return Err(StructureError::IndexOutOfRange(bot));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(StructureError::DuplicateName(name.clone()));
            }
        }
        Ok(Lattice {
            names,
            top,
            bot,
            meet,
            join,
        })
    }

    /// Lattice structure of a finite meet-semilattice with top: joins are
    /// meets of common upper bounds.
    pub fn from_semilattice(s: &FiniteSemilattice) -> Lattice {
        let n = s.n();
        let mut meet = Vec::with_capacity(n * n);
        let mut join = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                meet.push(s.meet(x, y));
                join.push(s.lub(x, y));
            }
        }
        Lattice {
            names: s.names().to_vec(),
            top: s.top(),
            bot: s.bottom(),
            meet,
            join,
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n() + y]
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.n() + y]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.meet(x, y) == x
    }

    /// The meet-semilattice reduct.
    pub fn meet_reduct(&self) -> FiniteSemilattice {
        FiniteSemilattice::new(self.names.clone(), self.top, self.meet.clone())
            .expect("reduct shape")
    }

    pub fn validate(&self) -> Vec<LatticeViolation> {
        use LatticeViolation::*;
        let n = self.n();
        let mut out = Vec::new();
        for x in 0..n {
            if self.meet(x, x) != x {
                out.push(MeetNotIdempotent { x });
            }
            if self.join(x, x) != x {
                out.push(JoinNotIdempotent { x });
            }
            if self.meet(x, self.top) != x {
                out.push(TopNotGreatest { x });
            }
            if self.join(x, self.bot) != x {
                out.push(BotNotLeast { x });
            }
            for y in 0..n {
                if self.meet(x, y) != self.meet(y, x) {
                    out.push(MeetNotCommutative { x, y });
                }
                if self.join(x, y) != self.join(y, x) {
                    out.push(JoinNotCommutative { x, y });
                }
                if self.meet(x, self.join(x, y)) != x || self.join(x, self.meet(x, y)) != x {
                    out.push(AbsorptionFails { x, y });
                }
                for z in 0..n {
                    if self.meet(self.meet(x, y), z) != self.meet(x, self.meet(y, z)) {
                        out.push(MeetNotAssociative { x, y, z });
                    }
                    if self.join(self.join(x, y), z) != self.join(x, self.join(y, z)) {
                        out.push(JoinNotAssociative { x, y, z });
                    }
                }
            }
        }
        out
    }

    /// All maps `A -> A` fixing top and commuting with binary meets; these
    /// are exactly the legal rows of a conditional table.
    pub fn meet_preserving_maps(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut maps = Vec::new();
        let mut current = vec![0usize; n];
        current[self.top] = self.top;
        let free: Vec<usize> = (0..n).filter(|&i| i != self.top).collect();
        let mut stack = vec![0usize; free.len()];
        'outer: loop {
            for (slot, &elem) in free.iter().enumerate() {
                current[elem] = stack[slot];
            }
            if (0..n).all(|x| (0..n).all(|y| {
                current[self.meet(x, y)] == self.meet(current[x], current[y])
            })) {
                maps.push(current.clone());
            }
            let mut pos = 0;
            loop {
                if pos == stack.len() {
                    break 'outer;
                }
                stack[pos] += 1;
                if stack[pos] < n {
                    break;
                }
                stack[pos] = 0;
                pos += 1;
            }
        }
        maps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("carrier of size {0} is too large for exhaustive table enumeration")]
    TooLargeForEnumeration(usize),
    #[error("assignment space of size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

/// A lattice with a conditional operator satisfying
/// `a ⊸ ⊤ = ⊤` and `(a ⊸ b) ⋀ (a ⊸ c) = a ⊸ (b ⋀ c)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConditionalLattice {
    lat: Lattice,
    cto: Vec<usize>,
}

impl ConditionalLattice {
    pub fn new(lat: Lattice, cto: Vec<usize>) -> Result<Self, AlgebraError> {
        let n = lat.n();
        if cto.len() != n * n {
            return Err(StructureError::BadTableShape {
                expected: n * n,
                got: cto.len(),
            }
            .into());
        }
        if let Some(&bad) = cto.iter().find(|&&v| v >= n) {
            return Err(StructureError::IndexOutOfRange(bad).into());
        }
        Ok(ConditionalLattice { lat, cto })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn n(&self) -> usize {
        self.lat.n()
    }

    pub fn name(&self, i: usize) -> &str {
        self.lat.name(i)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lat.index_of(name)
    }

    pub fn top(&self) -> usize {
        self.lat.top()
    }

    pub fn bot(&self) -> usize {
        self.lat.bot()
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.lat.meet(x, y)
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.lat.join(x, y)
    }

    pub fn cto(&self, x: usize, y: usize) -> usize {
        self.cto[x * self.n() + y]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.lat.leq(x, y)
    }

    pub fn validate(&self) -> Vec<LatticeViolation> {
        let mut out = self.lat.validate();
        let n = self.n();
        for a in 0..n {
            if self.cto(a, self.top()) != self.top() {
                out.push(LatticeViolation::CtoTopLaw { a });
            }
            for b in 0..n {
                for c in 0..n {
                    if self.meet(self.cto(a, b), self.cto(a, c)) != self.cto(a, self.meet(b, c)) {
                        out.push(LatticeViolation::CtoMeetLaw { a, b, c });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Interpret a formula under an assignment of atoms to elements.
    pub fn eval_assignment(
        &self,
        f: &Formula,
        assignment: &BTreeMap<String, usize>,
    ) -> Result<usize, AlgebraError> {
        match f {
            Formula::Prop(p) => assignment
                .get(p)
                .copied()
                .ok_or_else(|| AlgebraError::UnknownAtom(p.clone())),
            Formula::Top => Ok(self.top()),
            Formula::Bot => Ok(self.bot()),
            Formula::And(l, r) => {
                Ok(self.meet(self.eval_assignment(l, assignment)?, self.eval_assignment(r, assignment)?))
            }
            Formula::Or(l, r) => {
                Ok(self.join(self.eval_assignment(l, assignment)?, self.eval_assignment(r, assignment)?))
            }
            Formula::Cto(l, r) => {
                Ok(self.cto(self.eval_assignment(l, assignment)?, self.eval_assignment(r, assignment)?))
            }
        }
    }

    /// Exhaustively check a consequence pair over all assignments.
    pub fn validates(
        &self,
        pair: &ConsequencePair,
        budget: u64,
    ) -> Result<AlgebraValidity, AlgebraError> {
        let atoms: Vec<String> = pair.atoms().into_iter().collect();
        let k = self.n() as u64;
        let mut size: u64 = 1;
        for _ in &atoms {
            size = size
                .checked_mul(k)
                .ok_or(AlgebraError::BudgetExceeded { size: u64::MAX, budget })?;
            if size > budget {
                return Err(AlgebraError::BudgetExceeded { size, budget });
            }
        }
        let mut indices = vec![0usize; atoms.len()];
        loop {
            let assignment: BTreeMap<String, usize> = atoms
                .iter()
                .cloned()
                .zip(indices.iter().copied())
                .collect();
            let lhs = self.eval_assignment(&pair.lhs, &assignment)?;
            let rhs = self.eval_assignment(&pair.rhs, &assignment)?;
            if !self.leq(lhs, rhs) {
                return Ok(AlgebraValidity::Refuted { assignment });
            }
            let mut pos = 0;
            loop {
                if pos == indices.len() {
                    return Ok(AlgebraValidity::Valid);
                }
                indices[pos] += 1;
                if indices[pos] < self.n() {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Relative pseudocomplement table `x -> y = max { z : z ⋀ x ≤ y }`,
    /// when every pair has one.
    pub fn heyting_residual(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut table = vec![0usize; n * n];
        for x in 0..n {
            for y in 0..n {
                let candidates: Vec<usize> =
                    (0..n).filter(|&z| self.leq(self.meet(z, x), y)).collect();
                let max = candidates
                    .iter()
                    .copied()
                    .find(|&m| candidates.iter().all(|&z| self.leq(z, m)))?;
                table[x * n + y] = max;
            }
        }
        Some(table)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AlgebraValidity {
    Valid,
    Refuted { assignment: BTreeMap<String, usize> },
}

impl AlgebraValidity {
    pub fn holds(&self) -> bool {
        matches!(self, AlgebraValidity::Valid)
    }
}

/// Check that `map` preserves bounds, meet, join and the conditional.
pub fn is_homomorphism(map: &[usize], a: &ConditionalLattice, b: &ConditionalLattice) -> bool {
    homomorphism_violation(map, a, b).is_none()
}

/// First violated homomorphism equation, as a short description.
pub fn homomorphism_violation(
    map: &[usize],
    a: &ConditionalLattice,
    b: &ConditionalLattice,
) -> Option<String> {
    if map.len() != a.n() {
        return Some("map has wrong domain size".to_owned());
    }
    if map.iter().any(|&v| v >= b.n()) {
        return Some("map has a value out of range".to_owned());
    }
    if map[a.top()] != b.top() {
        return Some("top not preserved".to_owned());
    }
    if map[a.bot()] != b.bot() {
        return Some("bottom not preserved".to_owned());
    }
    for x in 0..a.n() {
        for y in 0..a.n() {
            if map[a.meet(x, y)] != b.meet(map[x], map[y]) {
                return Some(format!("meet not preserved at ({x}, {y})"));
            }
            if map[a.join(x, y)] != b.join(map[x], map[y]) {
                return Some(format!("join not preserved at ({x}, {y})"));
            }
            if map[a.cto(x, y)] != b.cto(map[x], map[y]) {
                return Some(format!("conditional not preserved at ({x}, {y})"));
            }
        }
    }
    None
}

/// Every conditional table over the lattice, as the row-wise product of
/// meet-preserving maps. Guarded by [`CTO_ENUM_LIMIT`].
pub fn enumerate_cto_tables(lat: &Lattice) -> Result<Vec<Vec<usize>>, AlgebraError> {
    let n = lat.n();
    if n > CTO_ENUM_LIMIT {
        return Err(AlgebraError::TooLargeForEnumeration(n));
    }
    let rows = lat.meet_preserving_maps();
    let mut tables = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            table.extend_from_slice(&rows[choice[a]]);
        }
        tables.push(table);
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(tables);
            }
            choice[pos] += 1;
            if choice[pos] < rows.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Seeded sample of conditional tables drawn from the same row family the
/// exhaustive enumeration uses.
pub fn sample_cto_tables(lat: &Lattice, seed: u64, count: usize) -> Vec<Vec<usize>> {
    let rows = lat.meet_preserving_maps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lat.n();
    (0..count)
        .map(|_| {
            let mut table = Vec::with_capacity(n * n);
            for _ in 0..n {
                table.extend_from_slice(rows.choose(&mut rng).expect("rows nonempty"));
            }
            table
        })
        .collect()
}

/// JSON document form of a conditional lattice. The `meet` and `join`
/// entries follow the semilattice conventions (unordered pairs, implied
/// diagonal); `cto` lists every ordered pair exactly once.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub elements: Vec<String>,
    pub top: String,
    pub bot: String,
    pub meet: Vec<[String; 3]>,
    pub join: Vec<[String; 3]>,
    pub cto: Vec<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeDocError {
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("cto entry ({0}, {1}) listed more than once")]
    DuplicateCto(String, String),
    #[error("cto entry ({0}, {1}) is missing")]
    MissingCto(String, String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl LatticeDoc {
    pub fn to_lattice(&self) -> Result<ConditionalLattice, LatticeDocError> {
        let n = self.elements.len();
        for (i, name) in self.elements.iter().enumerate() {
            if self.elements[..i].contains(name) {
                return Err(DocError::DuplicateElement(name.clone()).into());
            }
        }
        let idx = |name: &str| -> Result<usize, LatticeDocError> {
            self.elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| DocError::UnknownElement(name.to_owned()).into())
        };
        let decode_sym = |entries: &Vec<[String; 3]>| -> Result<Vec<usize>, LatticeDocError> {
            let mut table = vec![usize::MAX; n * n];
            for i in 0..n {
                table[i * n + i] = i;
            }
            for [a, b, c] in entries {
                let (x, y, z) = (idx(a)?, idx(b)?, idx(c)?);
                if x == y {
                    if z != x {
                        return Err(DocError::BadDiagonal(a.clone()).into());
                    }
                    continue;
                }
                if table[x * n + y] != usize::MAX {
                    return Err(DocError::DuplicatePair(a.clone(), b.clone()).into());
                }
                table[x * n + y] = z;
                table[y * n + x] = z;
            }
            for x in 0..n {
                for y in (x + 1)..n {
                    if table[x * n + y] == usize::MAX {
                        return Err(DocError::MissingPair(
                            self.elements[x].clone(),
                            self.elements[y].clone(),
                        )
                        .into());
                    }
                }
            }
            Ok(table)
        };
        let meet = decode_sym(&self.meet)?;
        let join = decode_sym(&self.join)?;
        let mut cto = vec![usize::MAX; n * n];
        for [a, b, c] in &self.cto {
            let (x, y, z) = (idx(a)?, idx(b)?, idx(c)?);
            if cto[x * n + y] != usize::MAX {
                return Err(LatticeDocError::DuplicateCto(a.clone(), b.clone()));
            }
            cto[x * n + y] = z;
        }
        for x in 0..n {
            for y in 0..n {
                if cto[x * n + y] == usize::MAX {
                    return Err(LatticeDocError::MissingCto(
                        self.elements[x].clone(),
                        self.elements[y].clone(),
                    ));
                }
            }
        }
        let top = idx(&self.top)?;
        let bot = idx(&self.bot)?;
        let lat = Lattice::new(self.elements.clone(), top, bot, meet, join)
            .map_err(AlgebraError::from)?;
        Ok(ConditionalLattice::new(lat, cto)?)
    }

    pub fn from_lattice(cl: &ConditionalLattice) -> LatticeDoc {
        let n = cl.n();
        let sym = |f: &dyn Fn(usize, usize) -> usize| -> Vec<[String; 3]> {
            let mut out = Vec::new();
            for x in 0..n {
                for y in (x + 1)..n {
                    out.push([
                        cl.name(x).to_owned(),
                        cl.name(y).to_owned(),
                        cl.name(f(x, y)).to_owned(),
                    ]);
                }
            }
            out
        };
        let mut cto = Vec::new();
        for x in 0..n {
            for y in 0..n {
                cto.push([
                    cl.name(x).to_owned(),
                    cl.name(y).to_owned(),
                    cl.name(cl.cto(x, y)).to_owned(),
                ]);
            }
        }
        LatticeDoc {
            elements: cl.lattice().names().to_vec(),
            top: cl.name(cl.top()).to_owned(),
            bot: cl.name(cl.bot()).to_owned(),
            meet: sym(&|x, y| cl.meet(x, y)),
            join: sym(&|x, y| cl.join(x, y)),
            cto,
        }
    }
}

/// The constantly-top conditional over any lattice.
pub fn constant_top_cto(lat: &Lattice) -> Vec<usize> {
    vec![lat.top(); lat.n() * lat.n()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_pair;

    fn two_chain_classical() -> ConditionalLattice {
        let lat = Lattice::from_semilattice(&fixtures::two_chain());
        // classical implication on {1, 0}: only 1 ~> 0 is 0
        let top = lat.top();
        let bot = lat.bot();
        let n = lat.n();
        let mut cto = vec![top; n * n];
        cto[top * n + bot] = bot;
        ConditionalLattice::new(lat, cto).unwrap()
    }

    fn m3_constant_top() -> ConditionalLattice {
        let lat = Lattice::from_semilattice(&fixtures::m3());
        let cto = constant_top_cto(&lat);
        ConditionalLattice::new(lat, cto).unwrap()
    }

    #[test]
    fn constant_top_tables_are_valid() {
        for s in [fixtures::two_chain(), fixtures::m3(), fixtures::n5()] {
            let lat = Lattice::from_semilattice(&s);
            let cto = constant_top_cto(&lat);
            let cl = ConditionalLattice::new(lat, cto).unwrap();
            assert!(cl.validate().is_empty());
        }
    }

    #[test]
    fn first_law_violation_is_reported() {
        let lat = Lattice::from_semilattice(&fixtures::two_chain());
        let n = lat.n();
        let top = lat.top();
        let bot = lat.bot();
        let mut cto = vec![top; n * n];
        cto[bot * n + top] = bot; // a ~> T must be T
        let cl = ConditionalLattice::new(lat, cto).unwrap();
        assert!(cl
            .validate()
            .iter()
            .any(|v| matches!(v, LatticeViolation::CtoTopLaw { .. })));
    }

    #[test]
    fn m3_with_constant_top_is_valid_but_nondistributive_carrier() {
        let cl = m3_constant_top();
        assert!(cl.validate().is_empty());
        assert!(!cl.lattice().meet_reduct().is_distributive());
    }

    #[test]
    fn distribution_pair_fails_on_m3() {
        let cl = m3_constant_top();
        let pair = parse_pair("p /\\ (q \\/ r) |- (p /\\ q) \\/ (p /\\ r)").unwrap();
        match cl.validates(&pair, 1_000_000).unwrap() {
            AlgebraValidity::Refuted { assignment } => {
                assert_eq!(assignment.len(), 3);
            }
            AlgebraValidity::Valid => panic!("m3 should refute distribution"),
        }
    }

    #[test]
    fn bottom_entails_everything() {
        for cl in [two_chain_classical(), m3_constant_top()] {
            let pair = parse_pair("F |- p").unwrap();
            assert!(cl.validates(&pair, 1_000_000).unwrap().holds());
        }
    }

    #[test]
    fn second_law_pair_is_valid_on_any_conditional_lattice() {
        let pair = parse_pair("(p ~> q) /\\ (p ~> r) |- p ~> (q /\\ r)").unwrap();
        for cl in [two_chain_classical(), m3_constant_top()] {
            assert!(cl.validates(&pair, 1_000_000).unwrap().holds());
        }
    }

    #[test]
    fn identity_is_a_homomorphism() {
        let cl = m3_constant_top();
        let id: Vec<usize> = (0..cl.n()).collect();
        assert!(is_homomorphism(&id, &cl, &cl));
    }

    #[test]
    fn constant_map_is_not_a_homomorphism() {
        let a = m3_constant_top();
        let b = two_chain_classical();
        let map = vec![b.top(); a.n()];
        assert!(!is_homomorphism(&map, &a, &b));
    }

    #[test]
    fn residual_exists_exactly_on_distributive_carriers() {
        let c2 = two_chain_classical();
        let table = c2.heyting_residual().unwrap();
        // classical implication: 1 -> 0 = 0 and everything else 1
        let n = c2.n();
        let (t, b) = (c2.top(), c2.bot());
        assert_eq!(table[t * n + b], b);
        assert_eq!(table[b * n + b], t);
        assert_eq!(table[b * n + t], t);
        assert_eq!(table[t * n + t], t);

        assert!(m3_constant_top().heyting_residual().is_none());

        let d4 = Lattice::from_semilattice(&fixtures::diamond());
        let cto = constant_top_cto(&d4);
        let cl = ConditionalLattice::new(d4, cto).unwrap();
        assert!(cl.heyting_residual().is_some());
    }

    #[test]
    fn meet_preserving_maps_on_chains_are_the_monotone_top_fixing_maps() {
        let c3 = Lattice::from_semilattice(&fixtures::three_chain());
        let maps = c3.meet_preserving_maps();
        // chain order is by index reversal: meet = max index; monotone maps
        // from the 2-element tail into the 3-chain fixing top
        for m in &maps {
            assert_eq!(m[c3.top()], c3.top());
            for x in 0..3 {
                for y in 0..3 {
                    assert_eq!(m[c3.meet(x, y)], c3.meet(m[x], m[y]));
                }
            }
        }
        // candidates with m(1)=1: pairs (m(a), m(0)) with max(...) law
        // exactly the monotone pairs: m(a) above m(0)
        assert_eq!(maps.len(), 6);
    }

    #[test]
    fn cto_enumeration_matches_row_product_and_all_pass_laws() {
        let c2 = Lattice::from_semilattice(&fixtures::two_chain());
        let tables = enumerate_cto_tables(&c2).unwrap();
        let rows = c2.meet_preserving_maps();
        assert_eq!(tables.len(), rows.len().pow(2));
        for t in &tables {
            let cl = ConditionalLattice::new(c2.clone(), t.clone()).unwrap();
            assert!(cl.validate().is_empty());
        }
        // brute-force oracle: filter all 2^(n*n) candidate tables by laws
        let n = c2.n();
        let mut count = 0;
        for bits in 0u32..(1 << (n * n)) {
            let table: Vec<usize> = (0..n * n).map(|i| ((bits >> i) & 1) as usize).collect();
            let cl = ConditionalLattice::new(c2.clone(), table).unwrap();
            if cl.validate().is_empty() {
                count += 1;
            }
        }
        assert_eq!(tables.len(), count);
    }

    #[test]
    fn sampled_cto_tables_pass_laws() {
        let m3 = Lattice::from_semilattice(&fixtures::m3());
        for t in sample_cto_tables(&m3, 7, 50) {
            let cl = ConditionalLattice::new(m3.clone(), t).unwrap();
            assert!(cl.validate().is_empty());
        }
    }

    #[test]
    fn algebraic_validity_agrees_with_frame_validity() {
        use crate::frame::{validates, GeneralFrame, SelectionKind, DEFAULT_VALUATION_BUDGET};
        let pairs = [
            "p /\\ (q \\/ r) |- (p /\\ q) \\/ (p /\\ r)",
            "T |- p ~> p",
            "p /\\ (p ~> q) |- q",
            "p |- q ~> p",
            "T ~> p |- p",
        ];
        for base in [fixtures::three_chain(), fixtures::diamond(), fixtures::m3()] {
            for kind in SelectionKind::ALL {
                let Ok(g) = GeneralFrame::full_named(base.clone(), kind) else {
                    continue;
                };
                let algebra = g.complex_algebra().unwrap();
                for text in pairs {
                    let pair = parse_pair(text).unwrap();
                    let on_frame = validates(&g, &pair, DEFAULT_VALUATION_BUDGET)
                        .unwrap()
                        .holds();
                    let on_algebra = algebra.validates(&pair, 1_000_000).unwrap().holds();
                    assert_eq!(on_frame, on_algebra, "{text} with {kind:?} on {:?}", base.names());
                }
            }
        }
    }

    #[test]
    fn cto_enumeration_is_guarded() {
        let m3 = Lattice::from_semilattice(&fixtures::m3());
        assert!(matches!(
            enumerate_cto_tables(&m3),
            Err(AlgebraError::TooLargeForEnumeration(5))
        ));
    }

    #[test]
    fn lattice_doc_round_trip() {
        let cl = two_chain_classical();
        let doc = LatticeDoc::from_lattice(&cl);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: LatticeDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_lattice().unwrap(), cl);
    }

    #[test]
    fn lattice_doc_missing_cto_entry() {
        let cl = two_chain_classical();
        let mut doc = LatticeDoc::from_lattice(&cl);
        doc.cto.pop();
        assert!(matches!(
            doc.to_lattice(),
            Err(LatticeDocError::MissingCto(_, _))
        ));
    }
}
