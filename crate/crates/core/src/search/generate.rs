//! Seeded and exhaustive generation of semilattices, admissible families,
//! and selection tables.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frame::SelectionKind;
use crate::semilattice::{FiniteSemilattice, Filter};

/// Exhaustive semilattice enumeration is capped here; the cell space grows
/// as `(n-1 choose 2)` base-`(n-1)` digits.
pub const SEMILATTICE_ENUM_LIMIT: usize = 6;

/// How many redraws the sampled column generator attempts before falling
/// back to the constantly-top column.
const COLUMN_RETRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("semilattice enumeration is capped at {max} elements, asked for {n}")]
    EnumerationTooLarge { n: usize, max: usize },
    #[error("exhaustive selection space of size {size} exceeds budget {budget}")]
    SelectionSpaceTooLarge { size: u64, budget: u64 },
}

/// An extensional selection table keyed by `(world, admissible filter)`.
pub type TableMap = BTreeMap<(usize, Filter), Filter>;

fn element_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| if i == 0 { "1".to_owned() } else { format!("x{i}") })
        .collect()
}

/// All meet-semilattices on `n` elements with the top at index 0, in a
/// deterministic stream; with `up_to_iso` only the representative whose
/// table is permutation-minimal survives.
pub fn enumerate_semilattices(
    n: usize,
    up_to_iso: bool,
) -> Result<Vec<FiniteSemilattice>, GenerateError> {
    if n > SEMILATTICE_ENUM_LIMIT {
        return Err(GenerateError::EnumerationTooLarge {
            n,
            max: SEMILATTICE_ENUM_LIMIT,
        });
    }
    let names = element_names(n);
    if n == 1 {
        let one = FiniteSemilattice::new(names, 0, vec![0]).expect("one element");
        return Ok(vec![one]);
    }

    // free cells: unordered pairs of distinct non-top elements; the top row
    // and the diagonal are forced, and meets never equal the top
    let cells: Vec<(usize, usize)> = (1..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut choice = vec![1usize; cells.len()];
    let mut out = Vec::new();
    loop {
        let mut table = vec![0usize; n * n];
        for x in 0..n {
            table[x * n + x] = x;
            table[x] = x; // top row
            table[x * n] = x; // top column
        }
        for (ci, &(i, j)) in cells.iter().enumerate() {
            table[i * n + j] = choice[ci];
            table[j * n + i] = choice[ci];
        }
        let s = FiniteSemilattice::new(names.clone(), 0, table).expect("shape");
        if s.is_valid() && (!up_to_iso || is_canonical(&s)) {
            out.push(s);
        }
        // odometer over non-top values
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < n {
                break;
            }
            choice[pos] = 1;
            pos += 1;
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(slot, k - 1);
            out.push(p);
        }
    }
    out
}

/// Serialize the meet table under a relabeling that fixes the top.
fn relabeled_key(s: &FiniteSemilattice, perm: &[usize]) -> Vec<usize> {
    // perm maps old non-top index (i-1) to new non-top index
    let n = s.n();
    let map = |x: usize| if x == 0 { 0 } else { perm[x - 1] + 1 };
    let mut table = vec![0usize; n * n];
    for x in 0..n {
        for y in 0..n {
            table[map(x) * n + map(y)] = map(s.meet(x, y));
        }
    }
    table
}

fn is_canonical(s: &FiniteSemilattice) -> bool {
    let id: Vec<usize> = (0..s.n() - 1).collect();
    let own = relabeled_key(s, &id);
    permutations(s.n() - 1)
        .iter()
        .all(|perm| relabeled_key(s, perm) >= own)
}

/// All maps from worlds to filters that are legal as the selection column
/// of one admissible filter: `{1}` at the top and the value at a meet of
/// worlds is the join of the individual values.
pub fn valid_columns(base: &FiniteSemilattice) -> Vec<Vec<Filter>> {
    let n = base.n();
    let filters = base.enumerate_filters();
    let top = base.top();
    let free: Vec<usize> = (0..n).filter(|&x| x != top).collect();
    let mut choice = vec![0usize; free.len()];
    let mut out = Vec::new();
    loop {
        let mut col = vec![base.top_filter(); n];
        for (slot, &world) in free.iter().enumerate() {
            col[world] = filters[choice[slot]];
        }
        if column_is_valid(base, &col) {
            out.push(col);
        }
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return out;
            }
            choice[pos] += 1;
            if choice[pos] < filters.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn column_is_valid(base: &FiniteSemilattice, col: &[Filter]) -> bool {
    let n = base.n();
    if col[base.top()] != base.top_filter() {
        return false;
    }
    for x in 0..n {
        if !base.is_filter(col[x]) {
            return false;
        }
        for y in 0..n {
            if col[base.meet(x, y)] != base.filter_join(col[x], col[y]) {
                return false;
            }
        }
    }
    true
}

/// How selection tables are produced.
#[derive(Clone, Copy, Debug)]
pub enum SelectionStrategy {
    /// Every valid table; errors when the column space power exceeds the
    /// budget.
    Exhaustive { budget: u64 },
    /// `count` seeded tables via rejection and repair.
    Sampled { seed: u64, count: usize },
    /// The intensional families (`principal-int` only on distributive
    /// bases).
    Named,
}

/// Produce selection tables over the given admissible family.
pub fn generate_selections(
    base: &FiniteSemilattice,
    admissible: &[Filter],
    strategy: SelectionStrategy,
) -> Result<Vec<TableMap>, GenerateError> {
    match strategy {
        SelectionStrategy::Exhaustive { budget } => {
            let columns = valid_columns(base);
            let mut size: u64 = 1;
            for _ in admissible {
                size = size.checked_mul(columns.len() as u64).ok_or(
                    GenerateError::SelectionSpaceTooLarge {
                        size: u64::MAX,
                        budget,
                    },
                )?;
                if size > budget {
                    return Err(GenerateError::SelectionSpaceTooLarge { size, budget });
                }
            }
            let mut choice = vec![0usize; admissible.len()];
            let mut out = Vec::new();
            loop {
                let mut table = TableMap::new();
                for (ai, &a) in admissible.iter().enumerate() {
                    for (x, &v) in columns[choice[ai]].iter().enumerate() {
                        table.insert((x, a), v);
                    }
                }
                out.push(table);
                let mut pos = 0;
                loop {
                    if pos == choice.len() {
                        return Ok(out);
                    }
                    choice[pos] += 1;
                    if choice[pos] < columns.len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
            }
        }
        SelectionStrategy::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let filters = base.enumerate_filters();
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut table = TableMap::new();
                for &a in admissible {
                    let col = sample_column(base, &filters, &mut rng);
                    for (x, &v) in col.iter().enumerate() {
                        table.insert((x, a), v);
                    }
                }
                out.push(table);
            }
            Ok(out)
        }
        SelectionStrategy::Named => {
            let mut out = Vec::new();
            for kind in SelectionKind::ALL {
                if kind == SelectionKind::PrincipalInt && !base.is_distributive() {
                    continue;
                }
                let mut table = TableMap::new();
                for &a in admissible {
                    for x in 0..base.n() {
                        let v = match kind {
                            SelectionKind::ConstantTop => base.top_filter(),
                            SelectionKind::Identity => {
                                if x == base.top() {
                                    base.top_filter()
                                } else {
                                    a
                                }
                            }
                            SelectionKind::PrincipalInt => {
                                a.intersect(base.principal_upset(x))
                            }
                            SelectionKind::PrincipalUp => base.principal_upset(x),
                        };
                        table.insert((x, a), v);
                    }
                }
                out.push(table);
            }
            Ok(out)
        }
    }
}

/// Draw a raw column, force `{1}` at the top, close antitonicity by
/// joining along the order, and keep it only if the meet condition holds;
/// after too many redraws fall back to the constantly-top column.
fn sample_column(
    base: &FiniteSemilattice,
    filters: &[Filter],
    rng: &mut ChaCha8Rng,
) -> Vec<Filter> {
    let n = base.n();
    for _ in 0..COLUMN_RETRIES {
        let raw: Vec<Filter> = (0..n)
            .map(|x| {
                if x == base.top() {
                    base.top_filter()
                } else {
                    filters[rng.gen_range(0..filters.len())]
                }
            })
            .collect();
        let closed: Vec<Filter> = (0..n)
            .map(|x| {
                base.filter_join_all(
                    (0..n).filter(|&y| base.leq(x, y)).map(|y| raw[y]),
                )
            })
            .collect();
        if column_is_valid(base, &closed) {
            return closed;
        }
    }
    vec![base.top_filter(); n]
}

/// Convenience wrapper used by the persistence search.
pub fn sample_tables(
    base: &FiniteSemilattice,
    admissible: &[Filter],
    seed: u64,
    count: usize,
) -> Vec<TableMap> {
    generate_selections(base, admissible, SelectionStrategy::Sampled { seed, count })
        .expect("sampling has no budget")
}

/// All subsets of the filter family that contain the top singleton and the
/// universe and are closed under intersections and joins; with
/// `proper_only` the full family itself is dropped.
pub fn admissible_subfamilies(base: &FiniteSemilattice, proper_only: bool) -> Vec<Vec<Filter>> {
    let filters = base.enumerate_filters();
    let required = [base.top_filter(), base.universe()];
    let optional: Vec<Filter> = filters
        .iter()
        .copied()
        .filter(|f| !required.contains(f))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << optional.len()) {
        let mut family: Vec<Filter> = required.to_vec();
        for (i, &f) in optional.iter().enumerate() {
            if mask & (1 << i) != 0 {
                family.push(f);
            }
        }
        family.sort_unstable_by_key(|f| (f.len(), f.mask()));
        family.dedup();
        if proper_only && family.len() == filters.len() {
            continue;
        }
        let closed = family.iter().all(|&a| {
            family.iter().all(|&b| {
                family.contains(&a.intersect(b))
                    && family.contains(&base.filter_join(a, b))
            })
        });
        if closed {
            out.push(family);
        }
    }
    out
}
