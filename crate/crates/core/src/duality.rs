//! The finite duality between conditional lattices and selection frames:
//! the filter frame of a lattice, the unit maps in both directions, and
//! duals of homomorphisms.
//!
//! At finite scale the admissible family of a filter frame already
//! separates points, so descriptive frames stand in for the topologised
//! frames of the infinite theory and no separate topology is kept.

use thiserror::Error;

use crate::algebra::{homomorphism_violation, ConditionalLattice, Lattice};
use crate::frame::{check_selection_morphism, GeneralFrame, MorphismViolation};
use crate::semilattice::{FiniteSemilattice, Filter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DualityError {
    #[error("source conditional lattice is not valid: {0}")]
    InvalidSource(String),
    #[error("frame is not valid: {0}")]
    InvalidFrame(String),
    #[error("frame is not descriptive; worlds {x} and {y} are not separated")]
    NotDescriptive { x: usize, y: usize },
}

/// The frame of filters of a conditional lattice.
///
/// Worlds are the filters of the lattice (including the whole carrier),
/// ordered by inclusion with intersection as meet. The admissible family
/// is the image of the element map, and the selection sends a world `p`
/// and element filter for `a` to the worlds containing
/// `{b : a ⊸ b ∈ p}`.
#[derive(Clone, Debug)]
pub struct FilterFrame {
    pub frame: GeneralFrame,
    /// Worlds: filters of the source lattice, as element masks, in the
    /// frame's world order.
    pub worlds: Vec<Filter>,
    /// Element map: for each source element, the set of worlds containing
    /// it (an admissible filter of the frame).
    pub element_map: Vec<Filter>,
}

impl FilterFrame {
    pub fn world_index(&self, p: Filter) -> Option<usize> {
        self.worlds.iter().position(|&w| w == p)
    }
}

/// Build the filter frame of a valid conditional lattice.
pub fn filter_frame(cl: &ConditionalLattice) -> Result<FilterFrame, DualityError> {
    if let Some(v) = cl.validate().first() {
        return Err(DualityError::InvalidSource(v.to_string()));
    }
    let reduct = cl.lattice().meet_reduct();
    let worlds = reduct.enumerate_filters();
    let k = worlds.len();
    let n = cl.n();

    let world_names: Vec<String> = worlds.iter().map(|&w| reduct.filter_label(w)).collect();
    let top_world = worlds
        .iter()
        .position(|&w| w == reduct.universe())
        .expect("improper filter is a world");
    let world_meet = |i: usize, j: usize| -> usize {
        let m = worlds[i].intersect(worlds[j]);
        worlds.iter().position(|&w| w == m).expect("filters meet-closed")
    };
    let base = FiniteSemilattice::from_fn(world_names, top_world, world_meet)
        .expect("world semilattice shape");

    // element map: source element -> set of worlds containing it
    let element_map: Vec<Filter> = (0..n)
        .map(|e| Filter::from_elems((0..k).filter(|&w| worlds[w].contains(e))))
        .collect();
    let admissible: Vec<Filter> = element_map.clone();

    // selection: worlds above {b : a ⊸ b ∈ p}
    let selection = |p_idx: usize, e: usize| -> Filter {
        let p = worlds[p_idx];
        let core = Filter::from_elems((0..n).filter(|&b| p.contains(cl.cto(e, b))));
        Filter::from_elems((0..k).filter(|&w| core.is_subset(worlds[w])))
    };
    let frame = GeneralFrame::from_table(base, admissible, |x, a| {
        let e = element_map
            .iter()
            .position(|&m| m == a)
            .expect("admissible is the element-map image");
        selection(x, e)
    })
    .expect("nonempty admissible family");

    Ok(FilterFrame {
        frame,
        worlds,
        element_map,
    })
}

/// Outcome of checking that the element map is an isomorphism onto the
/// complex algebra of the filter frame.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaFailure {
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("element map is not injective")]
    NotInjective,
    #[error("element map is not onto the admissible family")]
    NotSurjective,
    #[error("element map is not a homomorphism: {0}")]
    NotHomomorphism(String),
}

/// Check that the element map of `filter_frame(cl)` is a bijective
/// conditional-lattice homomorphism onto the frame's complex algebra.
pub fn theta_check(cl: &ConditionalLattice) -> Result<FilterFrame, ThetaFailure> {
    let ff = filter_frame(cl)?;
    let algebra = ff
        .frame
        .complex_algebra()
        .map_err(|e| ThetaFailure::Duality(DualityError::InvalidSource(e.to_string())))?;
    let n = cl.n();
    let mut map = Vec::with_capacity(n);
    for e in 0..n {
        let target = ff
            .frame
            .admissible_index(ff.element_map[e])
            .ok_or(ThetaFailure::NotSurjective)?;
        map.push(target);
    }
    let mut seen = vec![false; algebra.n()];
    for &t in &map {
        if seen[t] {
            return Err(ThetaFailure::NotInjective);
        }
        seen[t] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(ThetaFailure::NotSurjective);
    }
    if let Some(why) = homomorphism_violation(&map, cl, &algebra) {
        return Err(ThetaFailure::NotHomomorphism(why));
    }
    Ok(ff)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtaFailure {
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("world map is not injective")]
    NotInjective,
    #[error("world map is not surjective")]
    NotSurjective,
    #[error("world map violates a morphism condition: {0}")]
    NotMorphism(MorphismViolation),
}

/// The double-dual world map of a descriptive frame, together with its
/// target filter frame.
#[derive(Clone, Debug)]
pub struct EtaResult {
    pub target: FilterFrame,
    /// For each world of the source, the target world index.
    pub map: Vec<usize>,
}

/// Send each world to the set of admissible filters containing it, viewed
/// as a world of the filter frame of the complex algebra.
pub fn eta(g: &GeneralFrame) -> Result<EtaResult, DualityError> {
    if let Some(v) = g.validate().first() {
        return Err(DualityError::InvalidFrame(v.to_string()));
    }
    if let Some((x, y)) = g.base().hms_witness(g.admissible()) {
        return Err(DualityError::NotDescriptive { x, y });
    }
    let algebra = g
        .complex_algebra()
        .map_err(|e| DualityError::InvalidFrame(e.to_string()))?;
    let cl = algebra;
    let target = filter_frame(&cl).expect("complex algebra is valid");
    let adm_count = g.admissible().len();
    let mut map = Vec::with_capacity(g.base().n());
    for x in 0..g.base().n() {
        let image = Filter::from_elems(
            (0..adm_count).filter(|&i| g.admissible()[i].contains(x)),
        );
        let idx = target
            .world_index(image)
            .expect("image of a world is a filter of the complex algebra");
        map.push(idx);
    }
    Ok(EtaResult { target, map })
}

/// Check that the double-dual map is a bijective selection morphism.
pub fn eta_check(g: &GeneralFrame) -> Result<EtaResult, EtaFailure> {
    let res = eta(g)?;
    let n = g.base().n();
    let k = res.target.frame.base().n();
    if n == k {
        let mut seen = vec![false; k];
        for &t in &res.map {
            if seen[t] {
                return Err(EtaFailure::NotInjective);
            }
            seen[t] = true;
        }
    } else {
        return Err(if n < k {
            EtaFailure::NotSurjective
        } else {
            EtaFailure::NotInjective
        });
    }
    let report = check_selection_morphism(&res.map, g, &res.target.frame);
    if let Some(first) = report.into_iter().next() {
        return Err(EtaFailure::NotMorphism(first));
    }
    Ok(res)
}

/// Dual of a homomorphism `h : a -> b`: the preimage map between filter
/// frames, sending a world of `filter_frame(b)` to its `h`-preimage.
pub fn dual_hom(
    h: &[usize],
    a: &ConditionalLattice,
    b: &ConditionalLattice,
) -> Result<Vec<usize>, DualityError> {
    let fa = filter_frame(a)?;
    let fb = filter_frame(b)?;
    let mut map = Vec::with_capacity(fb.worlds.len());
    for &p in &fb.worlds {
        let pre = Filter::from_elems((0..a.n()).filter(|&e| p.contains(h[e])));
        let idx = fa
            .world_index(pre)
            .expect("preimage of a filter under a homomorphism is a filter");
        map.push(idx);
    }
    Ok(map)
}

/// `Fclp(eta) ∘ theta = id` on the complex algebra of a descriptive frame:
/// pulling each admissible filter through the double dual gives it back.
pub fn triangle_eta_holds(g: &GeneralFrame) -> Result<bool, DualityError> {
    let res = eta(g)?;
    let adm = g.admissible();
    for (i, &a) in adm.iter().enumerate() {
        // the element map of the target picks out worlds containing the
        // i-th admissible filter; pull back along eta
        let theta_a = res.target.element_map[i];
        let pulled = Filter::from_elems(
            (0..g.base().n()).filter(|&x| theta_a.contains(res.map[x])),
        );
        if pulled != a {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Ftop(theta) ∘ eta = id` on the filter frame of a lattice: mapping each
/// world through the double dual and pulling back along the element map
/// gives it back.
pub fn triangle_theta_holds(cl: &ConditionalLattice) -> Result<bool, DualityError> {
    let ff = filter_frame(cl)?;
    let double = eta(&ff.frame)?;
    for (w_idx, &w) in ff.worlds.iter().enumerate() {
        // the image world is a filter of the complex algebra; pull it back
        // element by element through the element map
        let image_world = double.target.worlds[double.map[w_idx]];
        let pulled = Filter::from_elems((0..cl.n()).filter(|&e| {
            let adm_idx = ff
                .frame
                .admissible_index(ff.element_map[e])
                .expect("element map lands in admissibles");
            image_world.contains(adm_idx)
        }));
        if pulled != w {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Convenience: the complex-algebra index order matches the admissible
/// order of the frame, so expose the carrier lattice of a frame directly.
pub fn carrier_lattice(g: &GeneralFrame) -> Result<Lattice, DualityError> {
    g.complex_algebra()
        .map(|cl| cl.lattice().clone())
        .map_err(|e| DualityError::InvalidFrame(e.to_string()))
}
