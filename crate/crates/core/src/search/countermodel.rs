//! Countermodel search over generated full frames and the combined
//! three-valued decision loop.

use std::time::Instant;

use serde::Serialize;

use crate::frame::{validates, GeneralFrame, Validity, ValidityError, Valuation};
use crate::syntax::{ConsequencePair, TheoryGamma};

use super::generate::{enumerate_semilattices, generate_selections, SelectionStrategy};
use super::proof::{derive, ProofTree};

/// Which selection tables the countermodel search draws per frame.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum TableStrategy {
    /// The intensional families followed by seeded samples.
    #[default]
    NamedThenSampled,
    Named,
    Sampled,
    /// Every valid table; gives up on a frame whose table space exceeds
    /// the per-frame cap.
    Exhaustive,
}

impl TableStrategy {
    pub fn token(self) -> &'static str {
        match self {
            TableStrategy::NamedThenSampled => "both",
            TableStrategy::Named => "named",
            TableStrategy::Sampled => "sampled",
            TableStrategy::Exhaustive => "exhaustive",
        }
    }

    pub fn from_token(tok: &str) -> Option<TableStrategy> {
        [
            TableStrategy::NamedThenSampled,
            TableStrategy::Named,
            TableStrategy::Sampled,
            TableStrategy::Exhaustive,
        ]
        .into_iter()
        .find(|s| s.token() == tok)
    }
}

/// Search limits. Structural bounds make results reproducible; the wall
/// clock is a safety valve and the only machine-dependent part.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_frame_size: usize,
    pub max_depth: usize,
    pub max_tables_per_frame: usize,
    pub strategy: TableStrategy,
    pub wall_ms: Option<u64>,
    pub valuation_budget: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_frame_size: 4,
            max_depth: 6,
            max_tables_per_frame: 64,
            strategy: TableStrategy::NamedThenSampled,
            wall_ms: None,
            valuation_budget: crate::frame::DEFAULT_VALUATION_BUDGET,
        }
    }
}

/// A full frame refuting a consequence pair, with the witnessing
/// valuation and world.
#[derive(Clone, Debug)]
pub struct Countermodel {
    pub frame: GeneralFrame,
    pub valuation: Valuation,
    pub world: usize,
}

/// What was exhausted when the loop gives up.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct BudgetReport {
    pub depth_tried: usize,
    pub frame_size_tried: usize,
    pub wall_exhausted: bool,
}

/// Three-valued outcome of the decision loop.
pub enum Verdict {
    Derivable(ProofTree),
    Refuted(Countermodel),
    Unknown(BudgetReport),
}

struct Clock {
    start: Instant,
    wall_ms: Option<u64>,
}

impl Clock {
    fn new(wall_ms: Option<u64>) -> Self {
        Clock {
            start: Instant::now(),
            wall_ms,
        }
    }

    fn expired(&self) -> bool {
        match self.wall_ms {
            Some(ms) => self.start.elapsed().as_millis() as u64 >= ms,
            None => false,
        }
    }
}

fn search_frames_of_size(
    n: usize,
    pair: &ConsequencePair,
    gamma: &TheoryGamma,
    budget: &Budget,
    seed: u64,
    clock: &Clock,
) -> Result<Option<Countermodel>, ValidityError> {
    let bases = match enumerate_semilattices(n, true) {
        Ok(b) => b,
        Err(_) => return Ok(None), // beyond the enumeration cap
    };
    for base in bases {
        if clock.expired() {
            return Ok(None);
        }
        let admissible = base.enumerate_filters();
        let named = || {
            generate_selections(&base, &admissible, SelectionStrategy::Named)
                .expect("named mode has no budget")
        };
        let sampled = |count: usize| {
            generate_selections(&base, &admissible, SelectionStrategy::Sampled { seed, count })
                .expect("sampling has no budget")
        };
        let tables = match budget.strategy {
            TableStrategy::Named => named(),
            TableStrategy::Sampled => sampled(budget.max_tables_per_frame),
            TableStrategy::NamedThenSampled => {
                let mut ts = named();
                let rest = budget.max_tables_per_frame.saturating_sub(ts.len());
                ts.extend(sampled(rest));
                ts
            }
            TableStrategy::Exhaustive => generate_selections(
                &base,
                &admissible,
                SelectionStrategy::Exhaustive {
                    budget: budget.max_tables_per_frame as u64,
                },
            )
            .unwrap_or_default(),
        };
        for table in tables {
            if clock.expired() {
                return Ok(None);
            }
            let g = GeneralFrame::from_table(base.clone(), admissible.clone(), |x, a| {
                table[&(x, a)]
            })
            .expect("full family is nonempty");
            if !g.validate().is_empty() {
                continue;
            }
            let mut all_gamma_hold = true;
            for hyp in gamma.pairs() {
                if !validates(&g, hyp, budget.valuation_budget)?.holds() {
                    all_gamma_hold = false;
                    break;
                }
            }
            if !all_gamma_hold {
                continue;
            }
            if let Validity::Refuted { valuation, world } =
                validates(&g, pair, budget.valuation_budget)?
            {
                return Ok(Some(Countermodel {
                    frame: g,
                    valuation,
                    world,
                }));
            }
        }
    }
    Ok(None)
}

/// First full frame (in generation order) that validates the theory and
/// refutes the pair.
pub fn find_countermodel(
    pair: &ConsequencePair,
    gamma: &TheoryGamma,
    budget: &Budget,
    seed: u64,
) -> Result<Option<Countermodel>, ValidityError> {
    let clock = Clock::new(budget.wall_ms);
    for n in 1..=budget.max_frame_size {
        if clock.expired() {
            return Ok(None);
        }
        if let Some(cm) = search_frames_of_size(n, pair, gamma, budget, seed, &clock)? {
            return Ok(Some(cm));
        }
    }
    Ok(None)
}

/// Interleave bounded derivation with countermodel search; never returns
/// both answers, and identical inputs give identical verdicts whenever
/// the wall clock is not the binding constraint.
pub fn decide(
    pair: &ConsequencePair,
    gamma: &TheoryGamma,
    budget: &Budget,
    seed: u64,
) -> Result<Verdict, ValidityError> {
    let clock = Clock::new(budget.wall_ms);
    let rounds = budget.max_depth.max(budget.max_frame_size);
    let mut report = BudgetReport::default();
    for round in 1..=rounds {
        if clock.expired() {
            report.wall_exhausted = true;
            return Ok(Verdict::Unknown(report));
        }
        if round <= budget.max_depth {
            report.depth_tried = round;
            if let Some(tree) = derive(pair, gamma, round) {
                return Ok(Verdict::Derivable(tree));
            }
        }
        if clock.expired() {
            report.wall_exhausted = true;
            return Ok(Verdict::Unknown(report));
        }
        if round <= budget.max_frame_size {
            report.frame_size_tried = round;
            if let Some(cm) = search_frames_of_size(round, pair, gamma, budget, seed, &clock)? {
                return Ok(Verdict::Refuted(cm));
            }
        }
    }
    Ok(Verdict::Unknown(report))
}
