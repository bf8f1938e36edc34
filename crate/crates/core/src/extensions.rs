//! The axiom catalog, frame-condition checkers, fill-ins from admissible
//! filters to all filters, persistence testing, and the semilattice
//! semantics of intuitionistic implication.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frame::{
    validates, FrameError, GeneralFrame, SelectionKind, Validity, ValidityError, Valuation,
    DEFAULT_VALUATION_BUDGET,
};
use crate::search::generate::{admissible_subfamilies, sample_tables};
use crate::semilattice::{FiniteSemilattice, Filter};
use crate::syntax::{parse_pair, ConsequencePair};

/// Named axioms, each denoting a fixed consequence pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AxiomId {
    Refl,
    Cond,
    Veq,
    Cs,
    Det,
    Expl,
    Pnp,
    Mp,
    Tr,
    Cm,
    Dist,
    Custom(ConsequencePair),
}

impl AxiomId {
    /// The ten named axioms, in catalog order.
    pub const NAMED: [AxiomId; 11] = [
        AxiomId::Refl,
        AxiomId::Cond,
        AxiomId::Veq,
        AxiomId::Cs,
        AxiomId::Det,
        AxiomId::Expl,
        AxiomId::Pnp,
        AxiomId::Mp,
        AxiomId::Tr,
        AxiomId::Cm,
        AxiomId::Dist,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            AxiomId::Refl => "refl",
            AxiomId::Cond => "cond",
            AxiomId::Veq => "veq",
            AxiomId::Cs => "cs",
            AxiomId::Det => "det",
            AxiomId::Expl => "expl",
            AxiomId::Pnp => "pnp",
            AxiomId::Mp => "mp",
            AxiomId::Tr => "tr",
            AxiomId::Cm => "cm",
            AxiomId::Dist => "dist",
            AxiomId::Custom(_) => "custom",
        }
    }

    pub fn from_token(tok: &str) -> Option<AxiomId> {
        AxiomId::NAMED.into_iter().find(|a| a.token() == tok)
    }

    /// The consequence pair the axiom denotes.
    pub fn pair(&self) -> ConsequencePair {
        let text = match self {
            AxiomId::Refl => "T |- p ~> p",
            AxiomId::Cond => "p |- T ~> p",
            AxiomId::Veq => "p |- q ~> p",
            AxiomId::Cs => "p /\\ q |- p ~> q",
            AxiomId::Det => "T ~> p |- p",
            AxiomId::Expl => "T |- F ~> p",
            AxiomId::Pnp => "p /\\ (p ~> F) |- F",
            AxiomId::Mp => "p /\\ (p ~> q) |- q",
            AxiomId::Tr => "(p ~> q) /\\ (q ~> r) |- p ~> r",
            AxiomId::Cm => "(p ~> q) /\\ (p ~> r) |- (p /\\ q) ~> r",
            AxiomId::Dist => "p /\\ (q \\/ r) |- (p /\\ q) \\/ (p /\\ r)",
            AxiomId::Custom(cp) => return cp.clone(),
        };
        parse_pair(text).expect("axiom table parses")
    }
}

/// Plain conditions hold on every general frame; primed ones are the
/// sharper forms available on full or descriptive frames.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CorrVariant {
    Plain,
    Primed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrError {
    #[error("axiom `{0}` has no frame correspondence")]
    NoCorrespondence(String),
    #[error("axiom `{0}` has no primed correspondence form")]
    NoPrimedVariant(String),
    #[error("primed conditions require a full or descriptive frame")]
    PrimedRequiresFullOrDescriptive,
}

/// Evaluate the frame condition corresponding to an axiom, exhaustively
/// over worlds and admissible filters.
pub fn corr_check(
    g: &GeneralFrame,
    ax: &AxiomId,
    variant: CorrVariant,
) -> Result<bool, CorrError> {
    if variant == CorrVariant::Primed {
        match ax {
            AxiomId::Veq | AxiomId::Cs | AxiomId::Det | AxiomId::Mp => {}
            AxiomId::Refl | AxiomId::Cond | AxiomId::Expl | AxiomId::Pnp => {
                return Err(CorrError::NoPrimedVariant(ax.token().to_owned()))
            }
            _ => return Err(CorrError::NoCorrespondence(ax.token().to_owned())),
        }
        if !(g.is_full() || g.is_descriptive()) {
            return Err(CorrError::PrimedRequiresFullOrDescriptive);
        }
    }
    let base = g.base();
    let n = base.n();
    let adm = g.admissible();
    let universe = base.universe();
    let top_filter = base.top_filter();
    let top = base.top();
    let s = |x: usize, a: Filter| g.s(x, a).expect("admissible");

    let ok = match (ax, variant) {
        (AxiomId::Refl, CorrVariant::Plain) => adm
            .iter()
            .all(|&a| (0..n).all(|x| s(x, a).is_subset(a))),
        (AxiomId::Cond, CorrVariant::Plain) => adm.iter().all(|&a| {
            (0..n).all(|x| !a.contains(x) || s(x, universe).is_subset(a))
        }),
        (AxiomId::Veq, CorrVariant::Plain) => adm.iter().all(|&a| {
            adm.iter().all(|&b| {
                (0..n).all(|x| !a.contains(x) || s(x, b).is_subset(a))
            })
        }),
        (AxiomId::Veq, CorrVariant::Primed) => adm.iter().all(|&a| {
            (0..n).all(|x| s(x, a).is_subset(base.principal_upset(x)))
        }),
        (AxiomId::Cs, CorrVariant::Plain) => adm.iter().all(|&a| {
            adm.iter().all(|&b| {
                (0..n).all(|x| !a.intersect(b).contains(x) || s(x, a).is_subset(b))
            })
        }),
        (AxiomId::Cs, CorrVariant::Primed) => adm.iter().all(|&a| {
            (0..n).all(|x| !a.contains(x) || s(x, a).is_subset(base.principal_upset(x)))
        }),
        (AxiomId::Det, CorrVariant::Plain) => adm.iter().all(|&a| {
            (0..n).all(|x| !s(x, universe).is_subset(a) || a.contains(x))
        }),
        (AxiomId::Det, CorrVariant::Primed) => (0..n).all(|x| s(x, universe).contains(x)),
        (AxiomId::Expl, CorrVariant::Plain) => (0..n).all(|x| s(x, top_filter) == top_filter),
        (AxiomId::Pnp, CorrVariant::Plain) => adm.iter().all(|&a| {
            (0..n).all(|x| !(a.contains(x) && s(x, a) == top_filter) || x == top)
        }),
        (AxiomId::Mp, CorrVariant::Plain) => adm.iter().all(|&a| {
            adm.iter().all(|&b| {
                (0..n).all(|x| !(a.contains(x) && s(x, a).is_subset(b)) || b.contains(x))
            })
        }),
        (AxiomId::Mp, CorrVariant::Primed) => adm.iter().all(|&a| {
            (0..n).all(|x| !a.contains(x) || s(x, a).contains(x))
        }),
        _ => return Err(CorrError::NoCorrespondence(ax.token().to_owned())),
    };
    Ok(ok)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error(transparent)]
    Validity(#[from] ValidityError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Compare validity of the axiom with its frame condition; the two agree
/// on every well-formed frame, so a `false` here is a bug trap.
pub fn correspondence_equivalence(
    g: &GeneralFrame,
    ax: &AxiomId,
) -> Result<bool, ExtensionError> {
    let semantic = validates(g, &ax.pair(), DEFAULT_VALUATION_BUDGET)?.holds();
    let condition = corr_check(g, ax, CorrVariant::Plain)?;
    Ok(semantic == condition)
}

/// As above but against the primed condition; meaningful on full or
/// descriptive frames only.
pub fn correspondence_equivalence_primed(
    g: &GeneralFrame,
    ax: &AxiomId,
) -> Result<bool, ExtensionError> {
    let semantic = validates(g, &ax.pair(), DEFAULT_VALUATION_BUDGET)?.holds();
    let condition = corr_check(g, ax, CorrVariant::Primed)?;
    Ok(semantic == condition)
}

/// Ways to extend a selection function from the admissible filters to all
/// filters of the base.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FillInKind {
    /// Value `{1}` outside the admissible family.
    KappaTop,
    /// Value `↑x` outside the admissible family.
    KappaPrincipal,
    /// Value `a` itself outside the admissible family (`{1}` at the top
    /// world, as every selection function requires).
    KappaIdentity,
}

impl FillInKind {
    pub const ALL: [FillInKind; 3] = [
        FillInKind::KappaTop,
        FillInKind::KappaPrincipal,
        FillInKind::KappaIdentity,
    ];

    pub fn token(self) -> &'static str {
        match self {
            FillInKind::KappaTop => "k1",
            FillInKind::KappaPrincipal => "kup",
            FillInKind::KappaIdentity => "kr",
        }
    }

    pub fn from_token(tok: &str) -> Option<FillInKind> {
        FillInKind::ALL.into_iter().find(|k| k.token() == tok)
    }
}

/// Extend the selection to every filter, keeping the original values on
/// the admissible family. The result is a full frame.
pub fn fill_in(g: &GeneralFrame, kind: FillInKind) -> GeneralFrame {
    let base = g.base().clone();
    let top = base.top();
    let b = base.clone();
    let g2 = g.clone();
    GeneralFrame::full_from_table(base, move |x, q| match g2.s(x, q) {
        Some(v) => v,
        None => match kind {
            FillInKind::KappaTop => Filter::singleton(top),
            FillInKind::KappaPrincipal => b.principal_upset(x),
            FillInKind::KappaIdentity => {
                if x == top {
                    Filter::singleton(top)
                } else {
                    q
                }
            }
        },
    })
    .expect("full admissible family is nonempty")
}

/// `validates(g, ax)` implies `validates(fill_in(g, kind), ax)`.
pub fn persistence_test(
    g: &GeneralFrame,
    ax: &AxiomId,
    kind: FillInKind,
) -> Result<bool, ValidityError> {
    let before = validates(g, &ax.pair(), DEFAULT_VALUATION_BUDGET)?.holds();
    if !before {
        return Ok(true);
    }
    let filled = fill_in(g, kind);
    Ok(validates(&filled, &ax.pair(), DEFAULT_VALUATION_BUDGET)?.holds())
}

/// Search bounds for [`find_persistence_failure`].
#[derive(Clone, Copy, Debug)]
pub struct PersistenceSearchBounds {
    pub max_n: usize,
    pub tables_per_family: usize,
    pub seed: u64,
}

impl Default for PersistenceSearchBounds {
    fn default() -> Self {
        PersistenceSearchBounds {
            max_n: 4,
            tables_per_family: 50,
            seed: 0,
        }
    }
}

/// A frame validating the axiom whose fill-in does not, found by seeded
/// search over general frames with proper admissible families.
pub struct PersistenceFailure {
    pub frame: GeneralFrame,
    pub valuation: Valuation,
    pub world: usize,
}

/// Search general frames with proper admissible families for a
/// persistence failure; returns the first hit in generation order.
///
/// At finite scale any admissible family that separates points already
/// contains every filter, so the search necessarily ranges over frames
/// whose families do not separate; an empty result is evidence at the
/// stated bounds, not a theorem.
pub fn find_persistence_failure(
    ax: &AxiomId,
    kind: FillInKind,
    bounds: PersistenceSearchBounds,
) -> Result<Option<PersistenceFailure>, ValidityError> {
    let pair = ax.pair();
    for n in 1..=bounds.max_n {
        for base in crate::search::generate::enumerate_semilattices(n, true)
            .expect("enumeration within cap")
        {
            for family in admissible_subfamilies(&base, true) {
                let tables = sample_tables(
                    &base,
                    &family,
                    bounds.seed,
                    bounds.tables_per_family,
                );
                for table in tables {
                    let g = match GeneralFrame::from_table(base.clone(), family.clone(), |x, a| {
                        table[&(x, a)]
                    }) {
                        Ok(g) => g,
                        Err(_) => continue,
                    };
                    if !g.validate().is_empty() {
                        continue;
                    }
                    if !validates(&g, &pair, DEFAULT_VALUATION_BUDGET)?.holds() {
                        continue;
                    }
                    let filled = fill_in(&g, kind);
                    if let Validity::Refuted { valuation, world } =
                        validates(&filled, &pair, DEFAULT_VALUATION_BUDGET)?
                    {
                        return Ok(Some(PersistenceFailure {
                            frame: g,
                            valuation,
                            world,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntError {
    #[error("base is not distributive; witness ({0}, {1}, {2})")]
    NotDistributive(usize, usize, usize),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("valuation of `{0}` is not a filter")]
    NotAFilter(String),
}

/// The full frame with selection `s(x, a) = a ∩ ↑x`, defined exactly on
/// distributive bases.
pub fn canonical_int_frame(base: &FiniteSemilattice) -> Result<GeneralFrame, IntError> {
    if let Some((x, y, z)) = base.distributivity_witness() {
        return Err(IntError::NotDistributive(x, y, z));
    }
    Ok(GeneralFrame::full_named(base.clone(), SelectionKind::PrincipalInt)
        .expect("distributivity checked"))
}

/// Intuitionistic evaluation over a distributive base: implication reads
/// "every world above satisfying the antecedent satisfies the consequent";
/// no selection function is involved.
pub fn int_eval(
    base: &FiniteSemilattice,
    valuation: &BTreeMap<String, Filter>,
    f: &crate::syntax::Formula,
) -> Result<Filter, IntError> {
    if let Some((x, y, z)) = base.distributivity_witness() {
        return Err(IntError::NotDistributive(x, y, z));
    }
    for (atom, &v) in valuation {
        if !base.is_filter(v) {
            return Err(IntError::NotAFilter(atom.clone()));
        }
    }
    int_eval_rec(base, valuation, f)
}

fn int_eval_rec(
    base: &FiniteSemilattice,
    valuation: &BTreeMap<String, Filter>,
    f: &crate::syntax::Formula,
) -> Result<Filter, IntError> {
    use crate::syntax::Formula;
    let n = base.n();
    match f {
        Formula::Prop(p) => valuation
            .get(p)
            .copied()
            .ok_or_else(|| IntError::UnknownAtom(p.clone())),
        Formula::Top => Ok(base.universe()),
        Formula::Bot => Ok(base.top_filter()),
        Formula::And(l, r) => {
            Ok(int_eval_rec(base, valuation, l)?.intersect(int_eval_rec(base, valuation, r)?))
        }
        Formula::Or(l, r) => {
            let lv = int_eval_rec(base, valuation, l)?;
            let rv = int_eval_rec(base, valuation, r)?;
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
            let lv = int_eval_rec(base, valuation, l)?;
            let rv = int_eval_rec(base, valuation, r)?;
            let mut out = Filter::EMPTY;
            for x in 0..n {
                let ok = (0..n)
                    .filter(|&y| base.leq(x, y))
                    .all(|y| !lv.contains(y) || rv.contains(y));
                if ok {
                    out = out.with(x);
                }
            }
            Ok(out)
        }
    }
}

/// The joint pointwise condition `s(x, a) = a ∩ ↑x` over the admissible
/// family.
pub fn joint_int_condition(g: &GeneralFrame) -> bool {
    let base = g.base();
    g.admissible().iter().all(|&a| {
        (0..base.n()).all(|x| {
            g.s(x, a).expect("admissible") == a.intersect(base.principal_upset(x))
        })
    })
}
