//! Bounded backward derivation for the consequence-pair calculus and an
//! independent proof-tree checker.
//!
//! The search keeps both sides of every subgoal inside the subformula
//! universe of the goal and the theory. Substitution makes the calculus
//! infinite, so a failed search never certifies non-derivability; the
//! caller pairs it with countermodel search.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{ConsequencePair, Formula, TheoryGamma};

/// Axiom schemas of the calculus; leaves match these up to substitution.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AxiomSchema {
    Top,
    Bottom,
    Reflexivity,
    AndElimLeft,
    AndElimRight,
    OrIntroLeft,
    OrIntroRight,
    ModalTop,
    Monotonicity,
    Normality,
}

impl AxiomSchema {
    pub const ALL: [AxiomSchema; 10] = [
        AxiomSchema::Reflexivity,
        AxiomSchema::Top,
        AxiomSchema::Bottom,
        AxiomSchema::AndElimLeft,
        AxiomSchema::AndElimRight,
        AxiomSchema::OrIntroLeft,
        AxiomSchema::OrIntroRight,
        AxiomSchema::ModalTop,
        AxiomSchema::Monotonicity,
        AxiomSchema::Normality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomSchema::Top => "top",
            AxiomSchema::Bottom => "bottom",
            AxiomSchema::Reflexivity => "reflexivity",
            AxiomSchema::AndElimLeft => "and-elim-left",
            AxiomSchema::AndElimRight => "and-elim-right",
            AxiomSchema::OrIntroLeft => "or-intro-left",
            AxiomSchema::OrIntroRight => "or-intro-right",
            AxiomSchema::ModalTop => "modal-top",
            AxiomSchema::Monotonicity => "monotonicity",
            AxiomSchema::Normality => "normality",
        }
    }

    /// The schema as a pair over the pattern atoms `p`, `q`, `r`.
    pub fn pattern(self) -> ConsequencePair {
        let p = || Formula::prop("p");
        let q = || Formula::prop("q");
        let r = || Formula::prop("r");
        let (lhs, rhs) = match self {
            AxiomSchema::Top => (p(), Formula::Top),
            AxiomSchema::Bottom => (Formula::Bot, p()),
            AxiomSchema::Reflexivity => (p(), p()),
            AxiomSchema::AndElimLeft => (Formula::and(p(), q()), p()),
            AxiomSchema::AndElimRight => (Formula::and(p(), q()), q()),
            AxiomSchema::OrIntroLeft => (p(), Formula::or(p(), q())),
            AxiomSchema::OrIntroRight => (q(), Formula::or(p(), q())),
            AxiomSchema::ModalTop => (Formula::Top, Formula::cto(p(), Formula::Top)),
            AxiomSchema::Monotonicity => (
                Formula::cto(p(), Formula::and(q(), r())),
                Formula::and(Formula::cto(p(), q()), Formula::cto(p(), r())),
            ),
            AxiomSchema::Normality => (
                Formula::and(Formula::cto(p(), q()), Formula::cto(p(), r())),
                Formula::cto(p(), Formula::and(q(), r())),
            ),
        };
        ConsequencePair::new(lhs, rhs)
    }
}

/// How a node's conclusion follows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RuleApp {
    Axiom {
        schema: AxiomSchema,
        subst: BTreeMap<String, Formula>,
    },
    Hypothesis {
        index: usize,
        subst: BTreeMap<String, Formula>,
    },
    Transitivity,
    AndIntro,
    OrElim,
    CongLeft,
    CongRight,
}

impl RuleApp {
    pub fn name(&self) -> &'static str {
        match self {
            RuleApp::Axiom { schema, .. } => schema.name(),
            RuleApp::Hypothesis { .. } => "hypothesis",
            RuleApp::Transitivity => "transitivity",
            RuleApp::AndIntro => "and-intro",
            RuleApp::OrElim => "or-elim",
            RuleApp::CongLeft => "cong-left",
            RuleApp::CongRight => "cong-right",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofTree {
    pub conclusion: ConsequencePair,
    pub rule: RuleApp,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn height(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(ProofTree::height)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }
}

/// Serializable rendering of a proof tree.
#[derive(Clone, Debug, Serialize)]
pub struct ProofTreeDoc {
    pub conclusion: String,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subst: Option<BTreeMap<String, String>>,
    pub premises: Vec<ProofTreeDoc>,
}

impl From<&ProofTree> for ProofTreeDoc {
    fn from(t: &ProofTree) -> ProofTreeDoc {
        let (hypothesis, subst) = match &t.rule {
            RuleApp::Axiom { subst, .. } => (
                None,
                Some(
                    subst
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string()))
                        .collect(),
                ),
            ),
            RuleApp::Hypothesis { index, subst } => (
                Some(*index),
                Some(
                    subst
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string()))
                        .collect(),
                ),
            ),
            _ => (None, None),
        };
        ProofTreeDoc {
            conclusion: t.conclusion.to_string(),
            rule: t.rule.name().to_owned(),
            hypothesis,
            subst,
            premises: t.premises.iter().map(ProofTreeDoc::from).collect(),
        }
    }
}

fn match_formula(
    pattern: &Formula,
    target: &Formula,
    binding: &mut BTreeMap<String, Formula>,
) -> bool {
    match (pattern, target) {
        (Formula::Prop(v), t) => match binding.get(v) {
            Some(bound) => bound == t,
            None => {
                binding.insert(v.clone(), t.clone());
                true
            }
        },
        (Formula::Top, Formula::Top) | (Formula::Bot, Formula::Bot) => true,
        (Formula::And(pl, pr), Formula::And(tl, tr))
        | (Formula::Or(pl, pr), Formula::Or(tl, tr))
        | (Formula::Cto(pl, pr), Formula::Cto(tl, tr)) => {
            match_formula(pl, tl, binding) && match_formula(pr, tr, binding)
        }
        _ => false,
    }
}

/// Match a goal against a schema pair, returning the substitution.
pub fn match_pair(
    pattern: &ConsequencePair,
    goal: &ConsequencePair,
) -> Option<BTreeMap<String, Formula>> {
    let mut binding = BTreeMap::new();
    if match_formula(&pattern.lhs, &goal.lhs, &mut binding)
        && match_formula(&pattern.rhs, &goal.rhs, &mut binding)
    {
        Some(binding)
    } else {
        None
    }
}

struct Searcher<'a> {
    gamma: &'a TheoryGamma,
    universe: Vec<Formula>,
    proved: HashMap<ConsequencePair, ProofTree>,
    // failures are cached only when no ancestor cut was involved
    failed_at: HashMap<ConsequencePair, usize>,
    path: HashSet<ConsequencePair>,
}

impl<'a> Searcher<'a> {
    fn leaf(&self, goal: &ConsequencePair) -> Option<ProofTree> {
        for schema in AxiomSchema::ALL {
            if let Some(subst) = match_pair(&schema.pattern(), goal) {
                return Some(ProofTree {
                    conclusion: goal.clone(),
                    rule: RuleApp::Axiom { schema, subst },
                    premises: Vec::new(),
                });
            }
        }
        for (index, hyp) in self.gamma.pairs().iter().enumerate() {
            if let Some(subst) = match_pair(hyp, goal) {
                return Some(ProofTree {
                    conclusion: goal.clone(),
                    rule: RuleApp::Hypothesis { index, subst },
                    premises: Vec::new(),
                });
            }
        }
        None
    }

    /// Returns the proof and whether the failure (if any) depended on the
    /// current path.
    fn search(&mut self, goal: &ConsequencePair, depth: usize) -> (Option<ProofTree>, bool) {
        if let Some(t) = self.proved.get(goal) {
            return (Some(t.clone()), false);
        }
        if depth == 0 {
            return (None, true); // might succeed with more depth; do not cache
        }
        if let Some(&d) = self.failed_at.get(goal) {
            if d >= depth {
                return (None, false);
            }
        }
        if self.path.contains(goal) {
            return (None, true);
        }
        if let Some(t) = self.leaf(goal) {
            self.proved.insert(goal.clone(), t.clone());
            return (Some(t), false);
        }

        self.path.insert(goal.clone());
        let mut pruned = false;
        let result = self.expand(goal, depth, &mut pruned);
        self.path.remove(goal);

        match &result {
            Some(t) => {
                self.proved.insert(goal.clone(), t.clone());
            }
            None if !pruned => {
                let entry = self.failed_at.entry(goal.clone()).or_insert(0);
                *entry = (*entry).max(depth);
            }
            None => {}
        }
        (result, pruned)
    }

    fn pair_of(&mut self, l: &Formula, r: &Formula) -> ConsequencePair {
        ConsequencePair::new(l.clone(), r.clone())
    }

    fn expand(
        &mut self,
        goal: &ConsequencePair,
        depth: usize,
        pruned: &mut bool,
    ) -> Option<ProofTree> {
        // decompose on the right conjunction
        if let Formula::And(a, b) = &goal.rhs {
            let g1 = self.pair_of(&goal.lhs, a);
            let g2 = self.pair_of(&goal.lhs, b);
            let (t1, p1) = self.search(&g1, depth - 1);
            *pruned |= p1;
            if let Some(t1) = t1 {
                let (t2, p2) = self.search(&g2, depth - 1);
                *pruned |= p2;
                if let Some(t2) = t2 {
                    return Some(ProofTree {
                        conclusion: goal.clone(),
                        rule: RuleApp::AndIntro,
                        premises: vec![t1, t2],
                    });
                }
            }
        }
        // decompose on the left disjunction
        if let Formula::Or(a, b) = &goal.lhs {
            let g1 = self.pair_of(a, &goal.rhs);
            let g2 = self.pair_of(b, &goal.rhs);
            let (t1, p1) = self.search(&g1, depth - 1);
            *pruned |= p1;
            if let Some(t1) = t1 {
                let (t2, p2) = self.search(&g2, depth - 1);
                *pruned |= p2;
                if let Some(t2) = t2 {
                    return Some(ProofTree {
                        conclusion: goal.clone(),
                        rule: RuleApp::OrElim,
                        premises: vec![t1, t2],
                    });
                }
            }
        }
        // congruence on either argument of the conditional
        if let (Formula::Cto(a, c), Formula::Cto(b, d)) = (&goal.lhs, &goal.rhs) {
            if c == d {
                let fwd = self.pair_of(a, b);
                let bwd = self.pair_of(b, a);
                let (t1, p1) = self.search(&fwd, depth - 1);
                *pruned |= p1;
                if let Some(t1) = t1 {
                    let (t2, p2) = self.search(&bwd, depth - 1);
                    *pruned |= p2;
                    if let Some(t2) = t2 {
                        return Some(ProofTree {
                            conclusion: goal.clone(),
                            rule: RuleApp::CongLeft,
                            premises: vec![t1, t2],
                        });
                    }
                }
            }
            if a == b {
                let fwd = self.pair_of(c, d);
                let bwd = self.pair_of(d, c);
                let (t1, p1) = self.search(&fwd, depth - 1);
                *pruned |= p1;
                if let Some(t1) = t1 {
                    let (t2, p2) = self.search(&bwd, depth - 1);
                    *pruned |= p2;
                    if let Some(t2) = t2 {
                        return Some(ProofTree {
                            conclusion: goal.clone(),
                            rule: RuleApp::CongRight,
                            premises: vec![t1, t2],
                        });
                    }
                }
            }
        }
        // cut through an interpolant from the restricted universe
        for mid in self.universe.clone() {
            if mid == goal.lhs || mid == goal.rhs {
                continue;
            }
            let g1 = self.pair_of(&goal.lhs, &mid);
            let g2 = self.pair_of(&mid, &goal.rhs);
            let (t1, p1) = self.search(&g1, depth - 1);
            *pruned |= p1;
            if let Some(t1) = t1 {
                let (t2, p2) = self.search(&g2, depth - 1);
                *pruned |= p2;
                if let Some(t2) = t2 {
                    return Some(ProofTree {
                        conclusion: goal.clone(),
                        rule: RuleApp::Transitivity,
                        premises: vec![t1, t2],
                    });
                }
            }
        }
        None
    }
}

/// Goal-directed backward search, bounded by tree height.
pub fn derive(
    goal: &ConsequencePair,
    gamma: &TheoryGamma,
    max_depth: usize,
) -> Option<ProofTree> {
    let mut universe: Vec<Formula> = goal
        .subformulas()
        .into_iter()
        .chain(gamma.subformulas())
        .chain([Formula::Top, Formula::Bot])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    universe.sort_by_key(|f| (f.depth(), f.to_string()));
    let mut searcher = Searcher {
        gamma,
        universe,
        proved: HashMap::new(),
        failed_at: HashMap::new(),
        path: HashSet::new(),
    };
    searcher.search(goal, max_depth).0
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("axiom leaf `{0}` does not match its conclusion")]
    BadAxiomInstance(String),
    #[error("hypothesis index {0} out of range")]
    BadHypothesisIndex(usize),
    #[error("hypothesis leaf {0} does not match its conclusion")]
    BadHypothesisInstance(usize),
    #[error("rule `{rule}` applied with {got} premises, expected {expected}")]
    WrongArity {
        rule: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("rule `{0}` premises do not support the conclusion")]
    BadInference(&'static str),
}

/// Verify every node of a proof tree locally.
pub fn check_proof(tree: &ProofTree, gamma: &TheoryGamma) -> Result<(), ProofError> {
    let arity = |rule: &'static str, expected: usize| -> Result<(), ProofError> {
        if tree.premises.len() != expected {
            Err(ProofError::WrongArity {
                rule,
                got: tree.premises.len(),
                expected,
            })
        } else {
            Ok(())
        }
    };
    match &tree.rule {
        RuleApp::Axiom { schema, subst } => {
            arity(schema.name(), 0)?;
            let pat = schema.pattern();
            let instance =
                ConsequencePair::new(pat.lhs.substitute(subst), pat.rhs.substitute(subst));
            if instance != tree.conclusion {
                return Err(ProofError::BadAxiomInstance(schema.name().to_owned()));
            }
        }
        RuleApp::Hypothesis { index, subst } => {
            arity("hypothesis", 0)?;
            let hyp = gamma
                .pairs()
                .get(*index)
                .ok_or(ProofError::BadHypothesisIndex(*index))?;
            let instance =
                ConsequencePair::new(hyp.lhs.substitute(subst), hyp.rhs.substitute(subst));
            if instance != tree.conclusion {
                return Err(ProofError::BadHypothesisInstance(*index));
            }
        }
        RuleApp::Transitivity => {
            arity("transitivity", 2)?;
            let (a, b) = (&tree.premises[0].conclusion, &tree.premises[1].conclusion);
            if a.lhs != tree.conclusion.lhs || b.rhs != tree.conclusion.rhs || a.rhs != b.lhs {
                return Err(ProofError::BadInference("transitivity"));
            }
        }
        RuleApp::AndIntro => {
            arity("and-intro", 2)?;
            let (a, b) = (&tree.premises[0].conclusion, &tree.premises[1].conclusion);
            let expected = Formula::and(a.rhs.clone(), b.rhs.clone());
            if a.lhs != tree.conclusion.lhs
                || b.lhs != tree.conclusion.lhs
                || tree.conclusion.rhs != expected
            {
                return Err(ProofError::BadInference("and-intro"));
            }
        }
        RuleApp::OrElim => {
            arity("or-elim", 2)?;
            let (a, b) = (&tree.premises[0].conclusion, &tree.premises[1].conclusion);
            let expected = Formula::or(a.lhs.clone(), b.lhs.clone());
            if a.rhs != tree.conclusion.rhs
                || b.rhs != tree.conclusion.rhs
                || tree.conclusion.lhs != expected
            {
                return Err(ProofError::BadInference("or-elim"));
            }
        }
        RuleApp::CongLeft => {
            arity("cong-left", 2)?;
            let (fwd, bwd) = (&tree.premises[0].conclusion, &tree.premises[1].conclusion);
            let ok = match (&tree.conclusion.lhs, &tree.conclusion.rhs) {
                (Formula::Cto(a, c), Formula::Cto(b, d)) => {
                    c == d
                        && fwd == &ConsequencePair::new((**a).clone(), (**b).clone())
                        && bwd == &ConsequencePair::new((**b).clone(), (**a).clone())
                }
                _ => false,
            };
            if !ok {
                return Err(ProofError::BadInference("cong-left"));
            }
        }
        RuleApp::CongRight => {
            arity("cong-right", 2)?;
            let (fwd, bwd) = (&tree.premises[0].conclusion, &tree.premises[1].conclusion);
            let ok = match (&tree.conclusion.lhs, &tree.conclusion.rhs) {
                (Formula::Cto(a, c), Formula::Cto(b, d)) => {
                    a == b
                        && fwd == &ConsequencePair::new((**c).clone(), (**d).clone())
                        && bwd == &ConsequencePair::new((**d).clone(), (**c).clone())
                }
                _ => false,
            };
            if !ok {
                return Err(ProofError::BadInference("cong-right"));
            }
        }
    }
    for premise in &tree.premises {
        check_proof(premise, gamma)?;
    }
    Ok(())
}
