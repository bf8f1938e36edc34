//! Small standard semilattices used throughout the tests and docs.
//!
//! Index 0 is always the top element, named `"1"`.

use crate::semilattice::FiniteSemilattice;

fn build(names: &[&str], meet: impl Fn(usize, usize) -> usize) -> FiniteSemilattice {
    FiniteSemilattice::from_fn(names.iter().map(|s| s.to_string()).collect(), 0, meet)
        .expect("fixture shape")
}

/// The one-element semilattice.
pub fn point() -> FiniteSemilattice {
    build(&["1"], |_, _| 0)
}

/// The two-element chain `1 > 0`.
pub fn two_chain() -> FiniteSemilattice {
    build(&["1", "0"], |x, y| x.max(y))
}

/// The three-element chain `1 > a > 0`.
pub fn three_chain() -> FiniteSemilattice {
    build(&["1", "a", "0"], |x, y| x.max(y))
}

/// The four-element chain `1 > a > b > 0`.
pub fn four_chain() -> FiniteSemilattice {
    build(&["1", "a", "b", "0"], |x, y| x.max(y))
}

/// The diamond: `1` on top, incomparable `a`, `b`, bottom `0`.
pub fn diamond() -> FiniteSemilattice {
    build(&["1", "a", "b", "0"], |x, y| {
        if x == y {
            x
        } else if x == 0 {
            y
        } else if y == 0 {
            x
        } else {
            3
        }
    })
}

/// Three pairwise-incomparable atoms `a`, `b`, `c` between bounds; the
/// standard non-distributive five-element example.
pub fn m3() -> FiniteSemilattice {
    build(&["1", "a", "b", "c", "0"], |x, y| {
        if x == y {
            x
        } else if x == 0 {
            y
        } else if y == 0 {
            x
        } else {
            4
        }
    })
}

/// The pentagon: `0 < a < 1` and `0 < b < c < 1` with `a` incomparable to
/// both `b` and `c`.
pub fn n5() -> FiniteSemilattice {
    // indices: 0 = "1", 1 = "a", 2 = "b", 3 = "c", 4 = "0"
    build(&["1", "a", "b", "c", "0"], |x, y| {
        if x == y {
            return x;
        }
        let (lo, hi) = (x.min(y), x.max(y));
        match (lo, hi) {
            (0, z) => z,
            (_, 4) => 4,
            (2, 3) => 2, // b < c, so b ⋏ c = b
            _ => 4,      // a against b or c
        }
    })
}
