//! Finite meet-semilattices with an explicit top element, their filters,
//! and the join operation on filters.
//!
//! Elements are dense indices `0..n` with a name table. Filters are
//! canonical ascending index sets encoded as bitmasks, so at most 64
//! elements are supported; everything here is desk-scale and exhaustive.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subset scan limit for filter enumeration; above this the enumerator
/// switches to closing the principal upsets under meets and joins.
pub const FILTER_SCAN_LIMIT: usize = 20;

/// A set of semilattice elements, encoded as a bitmask over indices.
///
/// Whether the set actually satisfies the filter laws is a property of a
/// particular semilattice; see [`FiniteSemilattice::is_filter`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Filter(u64);

impl Filter {
    pub const EMPTY: Filter = Filter(0);

    pub fn from_mask(mask: u64) -> Filter {
        Filter(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Filter {
        Filter(1 << i)
    }

    /// All elements `0..n`.
    pub fn full(n: usize) -> Filter {
        if n >= 64 {
            Filter(u64::MAX)
        } else {
            Filter((1u64 << n) - 1)
        }
    }

    pub fn from_elems(elems: impl IntoIterator<Item = usize>) -> Filter {
        let mut mask = 0;
        for e in elems {
            mask |= 1 << e;
        }
        Filter(mask)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Filter {
        Filter(self.0 | (1 << i))
    }

    pub fn union(self, other: Filter) -> Filter {
        Filter(self.0 | other.0)
    }

    pub fn intersect(self, other: Filter) -> Filter {
        Filter(self.0 & other.0)
    }

    pub fn is_subset(self, other: Filter) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..64).filter(move |i| mask & (1 << i) != 0)
    }
}

/// A violated semilattice law together with a witness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SemilatticeViolation {
    NotCommutative { x: usize, y: usize },
    NotAssociative { x: usize, y: usize, z: usize },
    NotIdempotent { x: usize },
    TopNotGreatest { x: usize },
}

impl fmt::Display for SemilatticeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemilatticeViolation::NotCommutative { x, y } => {
                write!(f, "commutativity fails at ({x}, {y})")
            }
            SemilatticeViolation::NotAssociative { x, y, z } => {
                write!(f, "associativity fails at ({x}, {y}, {z})")
            }
            SemilatticeViolation::NotIdempotent { x } => write!(f, "idempotence fails at {x}"),
            SemilatticeViolation::TopNotGreatest { x } => {
                write!(f, "top is not greatest: meet({x}, top) != {x}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("semilattice must have at least one element")]
    Empty,
    #[error("at most 64 elements are supported, got {0}")]
    TooLarge(usize),
    #[error("meet table has wrong shape: expected {expected} entries, got {got}")]
    BadTableShape { expected: usize, got: usize },
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
}

/// A finite meet-semilattice: named elements, a designated top, and an
/// explicit meet table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteSemilattice {
    names: Vec<String>,
    top: usize,
    meet: Vec<usize>, // row-major n*n
}

impl FiniteSemilattice {
    pub fn new(
        names: Vec<String>,
        top: usize,
        meet: Vec<usize>,
    ) -> Result<Self, StructureError> {
        let n = names.len();
        if n == 0 {
            return Err(StructureError::Empty);
        }
        if n > 64 {
            return Err(StructureError::TooLarge(n));
        }
        if meet.len() != n * n {
            return Err(StructureError::BadTableShape {
                expected: n * n,
                got: meet.len(),
            });
        }
        if top >= n {
            return Err(StructureError::IndexOutOfRange(top));
        }
        if let Some(&bad) = meet.iter().find(|&&v| v >= n) {
            return Err(StructureError::IndexOutOfRange(bad));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(StructureError::DuplicateName(name.clone()));
            }
        }
        Ok(FiniteSemilattice { names, top, meet })
    }

    /// Build from a meet function; handy for fixtures and generated tables.
    pub fn from_fn(
        names: Vec<String>,
        top: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, StructureError> {
        let n = names.len();
        let mut meet = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                meet.push(f(x, y));
            }
        }
        FiniteSemilattice::new(names, top, meet)
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

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.n() + y]
    }

    /// `x ≼ y` iff `meet(x, y) = x`.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.meet(x, y) == x
    }

    /// Least element: the meet of everything.
    pub fn bottom(&self) -> usize {
        (0..self.n()).fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// Least upper bound, which exists in any finite meet-semilattice with
    /// top: the meet of all common upper bounds.
    pub fn lub(&self, x: usize, y: usize) -> usize {
        (0..self.n())
            .filter(|&z| self.leq(x, z) && self.leq(y, z))
            .fold(self.top, |acc, z| self.meet(acc, z))
    }

    /// Scan every law and report all violations with witnesses.
    pub fn validate(&self) -> Vec<SemilatticeViolation> {
        let n = self.n();
        let mut out = Vec::new();
        for x in 0..n {
            if self.meet(x, x) != x {
                out.push(SemilatticeViolation::NotIdempotent { x });
            }
            if self.meet(x, self.top) != x {
                out.push(SemilatticeViolation::TopNotGreatest { x });
            }
            for y in 0..n {
                if self.meet(x, y) != self.meet(y, x) {
                    out.push(SemilatticeViolation::NotCommutative { x, y });
                }
                for z in 0..n {
                    if self.meet(self.meet(x, y), z) != self.meet(x, self.meet(y, z)) {
                        out.push(SemilatticeViolation::NotAssociative { x, y, z });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn universe(&self) -> Filter {
        Filter::full(self.n())
    }

    /// The least filter `{top}`.
    pub fn top_filter(&self) -> Filter {
        Filter::singleton(self.top)
    }

    /// `↑x = {y : x ≼ y}`.
    pub fn principal_upset(&self, x: usize) -> Filter {
        Filter::from_elems((0..self.n()).filter(|&y| self.leq(x, y)))
    }

    /// Upward closure of an arbitrary element set.
    pub fn upward_closure(&self, set: Filter) -> Filter {
        let mut out = Filter::EMPTY;
        for x in set.iter().take_while(|&x| x < self.n()) {
            out = out.union(self.principal_upset(x));
        }
        out
    }

    /// Contains top, upward closed, and closed under meets.
    pub fn is_filter(&self, f: Filter) -> bool {
        if !f.is_subset(self.universe()) || !f.contains(self.top) {
            return false;
        }
        let members: Vec<usize> = f.iter().take_while(|&x| x < self.n()).collect();
        for &x in &members {
            for y in 0..self.n() {
                if self.leq(x, y) && !f.contains(y) {
                    return false;
                }
            }
            for &y in &members {
                if !f.contains(self.meet(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// All filters in a deterministic order (by size, then by mask).
    ///
    /// Small carriers get a brute-force subset scan; larger ones take the
    /// principal upsets and close them under intersections and joins.
    pub fn enumerate_filters(&self) -> Vec<Filter> {
        let n = self.n();
        let mut filters: Vec<Filter> = if n <= FILTER_SCAN_LIMIT {
            (0u64..(1u64 << n))
                .map(Filter::from_mask)
                .filter(|&f| self.is_filter(f))
                .collect()
        } else {
            let mut set: Vec<Filter> = (0..n).map(|x| self.principal_upset(x)).collect();
            set.sort_unstable();
            set.dedup();
            loop {
                let mut added = false;
                let snapshot = set.clone();
                for &p in &snapshot {
                    for &q in &snapshot {
                        for cand in [p.intersect(q), self.filter_join(p, q)] {
                            if !set.contains(&cand) {
                                set.push(cand);
                                added = true;
                            }
                        }
                    }
                }
                if !added {
                    break;
                }
            }
            set
        };
        filters.sort_unstable_by_key(|f| (f.len(), f.mask()));
        filters
    }

    /// `p ▽ q`: the least filter containing both, namely the upward closure
    /// of all meets `x ⋏ y` with `x ∈ p`, `y ∈ q`.
    pub fn filter_join(&self, p: Filter, q: Filter) -> Filter {
        debug_assert!(self.is_filter(p) && self.is_filter(q));
        let mut meets = Filter::EMPTY;
        for x in p.iter().take_while(|&x| x < self.n()) {
            for y in q.iter().take_while(|&y| y < self.n()) {
                meets = meets.with(self.meet(x, y));
            }
        }
        self.upward_closure(meets)
    }

    /// `▽ Q` for a finite family; the empty join is `{top}`.
    pub fn filter_join_all(&self, family: impl IntoIterator<Item = Filter>) -> Filter {
        family
            .into_iter()
            .fold(self.top_filter(), |acc, f| self.filter_join(acc, f))
    }

    /// Whenever `x ⋏ y ≼ z` there are `u ≽ x`, `v ≽ y` with `z = u ⋏ v`.
    pub fn is_distributive(&self) -> bool {
        self.distributivity_witness().is_none()
    }

    /// A triple violating the distributivity condition, if any.
    pub fn distributivity_witness(&self) -> Option<(usize, usize, usize)> {
        let n = self.n();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !self.leq(self.meet(x, y), z) {
                        continue;
                    }
                    let ok = (0..n).any(|u| {
                        self.leq(x, u)
                            && (0..n).any(|v| self.leq(y, v) && self.meet(u, v) == z)
                    });
                    if !ok {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Separation: whenever `x ⋠ y` some member of the family contains `x`
    /// but not `y`.
    pub fn hms_check(&self, family: &[Filter]) -> bool {
        self.hms_witness(family).is_none()
    }

    /// A pair `(x, y)` with `x ⋠ y` that no family member separates.
    pub fn hms_witness(&self, family: &[Filter]) -> Option<(usize, usize)> {
        let n = self.n();
        for x in 0..n {
            for y in 0..n {
                if self.leq(x, y) {
                    continue;
                }
                if !family.iter().any(|a| a.contains(x) && !a.contains(y)) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Render a filter as sorted element names.
    pub fn filter_names(&self, f: Filter) -> Vec<String> {
        f.iter()
            .take_while(|&x| x < self.n())
            .map(|x| self.names[x].clone())
            .collect()
    }

    pub fn filter_label(&self, f: Filter) -> String {
        format!("{{{}}}", self.filter_names(f).join(","))
    }
}

/// JSON document form of a semilattice.
///
/// Every unordered pair of distinct elements must be listed exactly once in
/// either orientation; the symmetric entry and the diagonal are implied.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemilatticeDoc {
    pub elements: Vec<String>,
    pub top: String,
    pub meet: Vec<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("pair ({0}, {1}) listed more than once")]
    DuplicatePair(String, String),
    #[error("pair ({0}, {1}) is missing a meet entry")]
    MissingPair(String, String),
    #[error("diagonal entry for `{0}` must equal `{0}`")]
    BadDiagonal(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

impl SemilatticeDoc {
    pub fn to_semilattice(&self) -> Result<FiniteSemilattice, DocError> {
        let n = self.elements.len();
        for (i, name) in self.elements.iter().enumerate() {
            if self.elements[..i].contains(name) {
                return Err(DocError::DuplicateElement(name.clone()));
            }
        }
        let idx = |name: &str| -> Result<usize, DocError> {
            self.elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| DocError::UnknownElement(name.to_owned()))
        };
        let top = idx(&self.top)?;
        let mut table = vec![usize::MAX; n * n];
        for i in 0..n {
            table[i * n + i] = i;
        }
        for [a, b, c] in &self.meet {
            let (x, y, z) = (idx(a)?, idx(b)?, idx(c)?);
            if x == y {
                if z != x {
                    return Err(DocError::BadDiagonal(a.clone()));
                }
                continue;
            }
            if table[x * n + y] != usize::MAX {
                return Err(DocError::DuplicatePair(a.clone(), b.clone()));
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
                    ));
                }
            }
        }
        Ok(FiniteSemilattice::new(self.elements.clone(), top, table)?)
    }

    pub fn from_semilattice(s: &FiniteSemilattice) -> SemilatticeDoc {
        let n = s.n();
        let mut meet = Vec::new();
        for x in 0..n {
            for y in (x + 1)..n {
                meet.push([
                    s.name(x).to_owned(),
                    s.name(y).to_owned(),
                    s.name(s.meet(x, y)).to_owned(),
                ]);
            }
        }
        SemilatticeDoc {
            elements: s.names().to_vec(),
            top: s.name(s.top()).to_owned(),
            meet,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn two_chain_is_valid() {
        assert!(fixtures::two_chain().validate().is_empty());
    }

    #[test]
    fn m3_is_valid() {
        assert!(fixtures::m3().validate().is_empty());
    }

    #[test]
    fn broken_commutativity_is_reported() {
        // three elements, meet(a, b) != meet(b, a)
        let s = FiniteSemilattice::new(
            vec!["1".into(), "a".into(), "b".into()],
            0,
            vec![0, 1, 2, 1, 1, 1, 2, 2, 2],
        )
        .unwrap();
        let report = s.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, SemilatticeViolation::NotCommutative { x: 1, y: 2 })));
    }

    #[test]
    fn leq_matches_meet_table() {
        let c2 = fixtures::two_chain();
        assert!(c2.leq(1, 0)); // 0 index is top "1"
        assert!(!c2.leq(0, 1));
        let m3 = fixtures::m3();
        let a = m3.index_of("a").unwrap();
        let b = m3.index_of("b").unwrap();
        assert!(!m3.leq(a, b));
    }

    #[test]
    fn filters_of_small_fixtures() {
        let c2 = fixtures::two_chain();
        assert_eq!(
            c2.enumerate_filters(),
            vec![Filter::from_elems([0]), Filter::from_elems([0, 1])]
        );

        let m3 = fixtures::m3();
        let filters = m3.enumerate_filters();
        let expected: Vec<Filter> = vec![
            m3.top_filter(),
            m3.principal_upset(m3.index_of("a").unwrap()),
            m3.principal_upset(m3.index_of("b").unwrap()),
            m3.principal_upset(m3.index_of("c").unwrap()),
            m3.universe(),
        ];
        assert_eq!(filters, expected);

        let one = fixtures::point();
        assert_eq!(one.enumerate_filters(), vec![Filter::from_elems([0])]);
    }

    #[test]
    fn principal_upsets() {
        let c2 = fixtures::two_chain();
        assert_eq!(c2.principal_upset(1), c2.universe());
        let m3 = fixtures::m3();
        let a = m3.index_of("a").unwrap();
        assert_eq!(m3.principal_upset(a), Filter::from_elems([0, a]));
        assert_eq!(m3.principal_upset(m3.top()), m3.top_filter());
    }

    #[test]
    fn filter_join_on_diamond() {
        let d4 = fixtures::diamond();
        let a = d4.index_of("a").unwrap();
        let b = d4.index_of("b").unwrap();
        let ua = d4.principal_upset(a);
        let ub = d4.principal_upset(b);
        assert_eq!(d4.filter_join(ua, ub), d4.universe());
        assert_eq!(d4.filter_join(ua, d4.top_filter()), ua);
        assert_eq!(d4.filter_join(ua, ua), ua);
    }

    #[test]
    fn filter_join_all_cases() {
        let m3 = fixtures::m3();
        assert_eq!(m3.filter_join_all([]), m3.top_filter());
        let ua = m3.principal_upset(m3.index_of("a").unwrap());
        assert_eq!(m3.filter_join_all([ua]), ua);
        let ub = m3.principal_upset(m3.index_of("b").unwrap());
        let uc = m3.principal_upset(m3.index_of("c").unwrap());
        assert_eq!(m3.filter_join_all([ua, ub, uc]), m3.universe());
    }

    #[test]
    fn distributivity_of_fixtures() {
        assert!(fixtures::diamond().is_distributive());
        assert!(fixtures::three_chain().is_distributive());
        assert!(!fixtures::m3().is_distributive());
        assert!(!fixtures::n5().is_distributive());
        let m3 = fixtures::m3();
        let (x, y, z) = m3.distributivity_witness().unwrap();
        assert!(m3.leq(m3.meet(x, y), z));
    }

    #[test]
    fn hms_separation() {
        let c2 = fixtures::two_chain();
        assert!(c2.hms_check(&c2.enumerate_filters()));

        let m3 = fixtures::m3();
        assert!(!m3.hms_check(&[m3.universe()]));
        assert!(m3.hms_check(&m3.enumerate_filters()));
    }

    #[test]
    fn rejects_empty_and_oversized() {
        assert!(matches!(
            FiniteSemilattice::new(vec![], 0, vec![]),
            Err(StructureError::Empty)
        ));
        let names: Vec<String> = (0..65).map(|i| format!("e{i}")).collect();
        assert!(matches!(
            FiniteSemilattice::new(names, 0, vec![0; 65 * 65]),
            Err(StructureError::TooLarge(65))
        ));
    }

    #[test]
    fn doc_round_trip_and_errors() {
        let m3 = fixtures::m3();
        let doc = SemilatticeDoc::from_semilattice(&m3);
        let back = doc.to_semilattice().unwrap();
        assert_eq!(back, m3);

        let json = r#"{"elements":["1","0"],"top":"1","meet":[["0","1","0"]]}"#;
        let doc: SemilatticeDoc = serde_json::from_str(json).unwrap();
        let s = doc.to_semilattice().unwrap();
        assert!(s.is_valid());
        assert_eq!(s.top(), 0);

        let missing = r#"{"elements":["1","a","0"],"top":"1","meet":[["a","1","a"]]}"#;
        let doc: SemilatticeDoc = serde_json::from_str(missing).unwrap();
        assert!(matches!(doc.to_semilattice(), Err(DocError::MissingPair(_, _))));

        let dup = r#"{"elements":["1","0"],"top":"1","meet":[["0","1","0"],["1","0","0"]]}"#;
        let doc: SemilatticeDoc = serde_json::from_str(dup).unwrap();
        assert!(matches!(doc.to_semilattice(), Err(DocError::DuplicatePair(_, _))));
    }

    fn pool() -> Vec<FiniteSemilattice> {
        vec![
            fixtures::point(),
            fixtures::two_chain(),
            fixtures::three_chain(),
            fixtures::diamond(),
            fixtures::m3(),
            fixtures::n5(),
        ]
    }

    proptest! {
        #[test]
        fn filter_join_is_least_upper_bound(which in 0usize..6, i in any::<usize>(), j in any::<usize>()) {
            let s = pool().swap_remove(which);
            let filters = s.enumerate_filters();
            let p = filters[i % filters.len()];
            let q = filters[j % filters.len()];
            let join = s.filter_join(p, q);
            prop_assert!(s.is_filter(join));
            prop_assert!(p.is_subset(join) && q.is_subset(join));
            // least among all filters containing both
            let min = filters
                .iter()
                .copied()
                .filter(|f| p.is_subset(*f) && q.is_subset(*f))
                .min_by_key(|f| f.len())
                .unwrap();
            prop_assert_eq!(join.len(), min.len());
            for f in &filters {
                if p.is_subset(*f) && q.is_subset(*f) {
                    prop_assert!(join.is_subset(*f));
                }
            }
        }

        #[test]
        fn filter_family_closed_under_meet_and_join(which in 0usize..6) {
            let s = pool().swap_remove(which);
            let filters = s.enumerate_filters();
            for &p in &filters {
                for &q in &filters {
                    prop_assert!(filters.contains(&p.intersect(q)));
                    prop_assert!(filters.contains(&s.filter_join(p, q)));
                }
            }
        }

        #[test]
        fn distributive_base_gives_distributive_filter_family(which in 0usize..6) {
            let s = pool().swap_remove(which);
            if s.is_distributive() {
                let filters = s.enumerate_filters();
                for &p in &filters {
                    for &q in &filters {
                        for &r in &filters {
                            let lhs = p.intersect(s.filter_join(q, r));
                            let rhs = s.filter_join(p.intersect(q), p.intersect(r));
                            prop_assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }
}
