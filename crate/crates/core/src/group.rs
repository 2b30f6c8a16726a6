//! Elements of the plane symmetry groups used throughout this crate.
//!
//! Every group element is stored in the semidirect-product form `(c, d, r)`:
//! an integer translation `(c, d)` composed with an optional reflection `r`
//! in the horizontal axis.  The three supported groups are subgroups of the
//! same ambient group, so a single element type serves all of them:
//!
//! * [`GroupTag::Z2`] — translations only (`r` always false),
//! * [`GroupTag::Cs`] — the two-element reflection group (`c = d = 0`),
//! * [`GroupTag::Z2xCs`] — the full semidirect product.
//!
//! The reflection axis is the x-axis, so the linear part of `(c, d, true)`
//! sends `(x, y)` to `(x, -y)`.  All maps here are isometries of every
//! `lq` norm and of the polyhedral `l-infinity` norm, because the norms'
//! unit balls are symmetric in the axis and translation invariant.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A plane isometry `x -> sigma(x) + (c, d)`, where `sigma` reflects in the
/// x-axis when `r` is true and is the identity otherwise.
///
/// Serialized as the triple `[c, d, r]` with `r` in `{0, 1}` to match the
/// graph file format.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(i64, i64, u8)", into = "(i64, i64, u8)")]
pub struct GroupElement {
    /// Horizontal translation component.
    pub c: i64,
    /// Vertical translation component.
    pub d: i64,
    /// True when the linear part reflects in the x-axis.
    pub r: bool,
}

impl From<(i64, i64, u8)> for GroupElement {
    fn from((c, d, r): (i64, i64, u8)) -> Self {
        GroupElement { c, d, r: r != 0 }
    }
}

impl From<GroupElement> for (i64, i64, u8) {
    fn from(g: GroupElement) -> Self {
        (g.c, g.d, u8::from(g.r))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.c, self.d, if self.r { "s" } else { "id" })
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl GroupElement {
    /// The identity isometry `(0, 0, id)`.
    pub const IDENTITY: GroupElement = GroupElement { c: 0, d: 0, r: false };

    /// A pure translation by `(c, d)`.
    pub const fn translation(c: i64, d: i64) -> Self {
        GroupElement { c, d, r: false }
    }

    /// Reflection in the x-axis composed with a translation by `(c, d)`.
    pub const fn reflection(c: i64, d: i64) -> Self {
        GroupElement { c, d, r: true }
    }

    /// Short constructor used pervasively in tests and examples.
    pub const fn new(c: i64, d: i64, r: bool) -> Self {
        GroupElement { c, d, r }
    }

    /// Whether this element is the identity.
    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Whether the linear part is trivial, i.e. the element is a pure
    /// translation (possibly the identity).
    pub fn is_translation(&self) -> bool {
        !self.r
    }

    /// Apply the isometry to a point: reflect first, then translate.
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = self.linear_apply(p);
        [x + self.c as f64, y + self.d as f64]
    }

    /// Apply only the linear part (the translation is dropped).  This is the
    /// derivative of [`GroupElement::apply`] and acts on velocity vectors.
    pub fn linear_apply(&self, v: [f64; 2]) -> [f64; 2] {
        if self.r {
            [v[0], -v[1]]
        } else {
            v
        }
    }

    /// Group composition: `self.compose(h)` is the isometry "first `h`,
    /// then `self`", so `compose(g, h).apply(x) == g.apply(h.apply(x))`.
    pub fn compose(&self, h: &GroupElement) -> GroupElement {
        GroupElement {
            c: self.c + h.c,
            d: self.d + if self.r { -h.d } else { h.d },
            r: self.r ^ h.r,
        }
    }

    /// The inverse isometry.
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            c: -self.c,
            d: if self.r { self.d } else { -self.d },
            r: self.r,
        }
    }
}

/// Which of the three supported symmetry groups a gain graph is labelled by.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTag {
    /// Periodic: the lattice of integer translations.
    Z2,
    /// Reflective: the order-two group generated by the x-axis reflection.
    Cs,
    /// Periodic with reflections: the full semidirect product.
    Z2xCs,
}

impl GroupTag {
    /// Membership test for the subgroup this tag names.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            GroupTag::Z2 => !g.r,
            GroupTag::Cs => g.c == 0 && g.d == 0,
            GroupTag::Z2xCs => true,
        }
    }

    /// True when the group contains elements with a reflective linear part.
    pub fn has_reflections(&self) -> bool {
        !matches!(self, GroupTag::Z2)
    }

    /// Dimension of the space of trivial (fully symmetric) motions of a
    /// framework with this symmetry: both translations for `Z2`, only the
    /// horizontal translation once a reflection in the x-axis is enforced.
    pub fn trivial_motion_dim(&self) -> usize {
        match self {
            GroupTag::Z2 => 2,
            GroupTag::Cs | GroupTag::Z2xCs => 1,
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GroupTag::Z2 => "Z2",
            GroupTag::Cs => "Cs",
            GroupTag::Z2xCs => "Z2xCs",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for GroupTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Z2" | "z2" => Ok(GroupTag::Z2),
            "Cs" | "cs" => Ok(GroupTag::Cs),
            "Z2xCs" | "z2xcs" | "z2cs" => Ok(GroupTag::Z2xCs),
            other => Err(format!("unknown group '{other}' (expected Z2, Cs or Z2xCs)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn id() -> GroupElement {
        GroupElement::IDENTITY
    }

    #[test]
    fn identity_fixes_points() {
        assert_eq!(id().apply([2.0, 5.0]), [2.0, 5.0]);
        assert!(id().is_identity());
        assert!(id().is_translation());
    }

    #[test]
    fn apply_reflects_then_translates() {
        // Oracle: two explicit steps.  sigma(2,5) = (2,-5); + (1,0) = (3,-5).
        let g = GroupElement::new(1, 0, true);
        assert_eq!(g.apply([2.0, 5.0]), [3.0, -5.0]);
    }

    #[test]
    fn reflection_with_vertical_shift_is_an_involution() {
        // Oracle: apply twice to sample points and land back where we started.
        let g = GroupElement::new(0, 1, true);
        for p in [[0.3, -2.0], [1.0, 1.0], [-4.5, 0.25], [7.0, -0.5], [0.0, 0.0]] {
            assert_eq!(g.apply(g.apply(p)), p);
        }
        assert_eq!(g.compose(&g), id());
    }

    #[test]
    fn inverse_of_a_glide_like_element() {
        // Oracle frozen by searching small translations for the two-sided
        // inverse of (3,1,s): the unique answer is (-3,1,s).
        let g = GroupElement::new(3, 1, true);
        let inv = g.inverse();
        assert_eq!(inv, GroupElement::new(-3, 1, true));
        assert_eq!(g.compose(&inv), id());
        assert_eq!(inv.compose(&g), id());
    }

    #[test]
    fn inverse_found_by_exhaustive_search_matches_formula() {
        // Independent oracle: for every element in a small window, search the
        // window for its two-sided inverse and compare with `inverse`.
        let window = 4i64;
        for c in -window..=window {
            for d in -window..=window {
                for r in [false, true] {
                    let g = GroupElement::new(c, d, r);
                    let mut found = None;
                    for c2 in -window..=window {
                        for d2 in -window..=window {
                            for r2 in [false, true] {
                                let h = GroupElement::new(c2, d2, r2);
                                if g.compose(&h) == id() && h.compose(&g) == id() {
                                    found = Some(h);
                                }
                            }
                        }
                    }
                    assert_eq!(found, Some(g.inverse()), "inverse of {g:?}");
                }
            }
        }
    }

    fn random_element(rng: &mut ChaCha8Rng) -> GroupElement {
        GroupElement::new(rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen())
    }

    #[test]
    fn composition_is_associative_and_matches_function_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (g, h, k) = (
                random_element(&mut rng),
                random_element(&mut rng),
                random_element(&mut rng),
            );
            assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));

            let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let via_compose = g.compose(&h).apply(p);
            let via_apply = g.apply(h.apply(p));
            // Translation sums associate differently, so allow an ulp.
            assert!((via_compose[0] - via_apply[0]).abs() < 1e-12);
            assert!((via_compose[1] - via_apply[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn every_element_is_an_isometry_of_lq_and_linf_norms() {
        let lq = |v: [f64; 2], q: f64| (v[0].abs().powf(q) + v[1].abs().powf(q)).powf(1.0 / q);
        let linf = |v: [f64; 2]| v[0].abs().max(v[1].abs());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let g = random_element(&mut rng);
            let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let (gp, gx) = (g.apply(p), g.apply(x));
            let diff = [p[0] - x[0], p[1] - x[1]];
            let gdiff = [gp[0] - gx[0], gp[1] - gx[1]];
            for q in [1.5, 3.0] {
                assert!((lq(diff, q) - lq(gdiff, q)).abs() < 1e-12);
            }
            assert!((linf(diff) - linf(gdiff)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_part_is_the_derivative_of_apply() {
        // Finite differences of `apply` recover `linear_apply` to first order.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let eps = 1e-6;
        for _ in 0..100 {
            let g = random_element(&mut rng);
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let plus = g.apply([p[0] + eps * v[0], p[1] + eps * v[1]]);
            let base = g.apply(p);
            let fd = [(plus[0] - base[0]) / eps, (plus[1] - base[1]) / eps];
            let lin = g.linear_apply(v);
            assert!((fd[0] - lin[0]).abs() < 1e-8 && (fd[1] - lin[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn tag_membership() {
        let t = GroupElement::translation(2, -1);
        let s = GroupElement::new(0, 0, true);
        let g = GroupElement::new(1, 1, true);
        assert!(GroupTag::Z2.contains(&t) && !GroupTag::Z2.contains(&s));
        assert!(GroupTag::Cs.contains(&s) && !GroupTag::Cs.contains(&t));
        assert!(GroupTag::Z2xCs.contains(&g));
        assert_eq!(GroupTag::Z2.trivial_motion_dim(), 2);
        assert_eq!(GroupTag::Cs.trivial_motion_dim(), 1);
        assert_eq!(GroupTag::Z2xCs.trivial_motion_dim(), 1);
    }
}
