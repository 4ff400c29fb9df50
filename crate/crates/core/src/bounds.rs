//! Minimum-projection value `L` and the right-hand sides of the two
//! alignment-free inequalities.
//!
//! For three linearly independent unit vectors `e1, e2, e3` the function
//! `F(v) = |e1·v| + |e2·v| + |e3·v|` attains its minimum over the sphere at a
//! normalized pairwise cross product, which gives
//!
//! ```text
//! L = |e1·(e2×e3)| / max(|e1×e2|, |e2×e3|, |e3×e1|)
//! ```
//!
//! The same value can be written purely in terms of the pairwise angles, see
//! [`min_abs_projection_angle_form`].
//!
//! Category I settings pair every Alice direction with two Bob directions
//! `(b_i, b2_i)` and bound `(1/3) Σ |<A_i B_i> + <A_i B2_i>|` by
//! `2 − (2/3) sin(β*/2) L_n`. Category II settings use three Bob directions
//! cyclically and bound `(1/3) Σ |<A_i B_i> − <A_i B_{i+1}>|` by
//! `2 − (2/3) cos(δ*/2) L_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angle_between, difference_direction, norm, sum_direction, triple_product, UnitVec3,
};

/// Below this `|e1·(e2×e3)|` the triple counts as linearly dependent.
pub const DEPENDENCE_TOL: f64 = 1e-9;

/// Radicands in `[-RADICAND_SLACK, 0)` are rounding noise and clamp to zero.
pub const RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    I,
    II,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Category::I => f.write_str("I"),
            Category::II => f.write_str("II"),
        }
    }
}

/// Three Alice directions and Bob's three `(b_i, b2_i)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingsCategoryI {
    pub a: [UnitVec3; 3],
    pub b: [UnitVec3; 3],
    pub b2: [UnitVec3; 3],
}

/// Three Alice directions and three Bob directions used cyclically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingsCategoryII {
    pub a: [UnitVec3; 3],
    pub b: [UnitVec3; 3],
}

/// Either setting bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settings {
    I(SettingsCategoryI),
    II(SettingsCategoryII),
}

impl Settings {
    pub fn category(&self) -> Category {
        match self {
            Settings::I(_) => Category::I,
            Settings::II(_) => Category::II,
        }
    }

    pub fn bound(&self) -> Result<BoundReport> {
        match self {
            Settings::I(s) => bound_category_i(s),
            Settings::II(s) => bound_category_ii(s),
        }
    }

    /// Every vector of the bundle, Alice's first.
    pub fn vectors(&self) -> Vec<UnitVec3> {
        match self {
            Settings::I(s) => s.a.iter().chain(&s.b).chain(&s.b2).copied().collect(),
            Settings::II(s) => s.a.iter().chain(&s.b).copied().collect(),
        }
    }

    /// Applies `f` to every vector, preserving the bundle layout.
    pub fn map(&self, mut f: impl FnMut(&UnitVec3) -> UnitVec3) -> Settings {
        let mut apply = |v: &[UnitVec3; 3]| [f(&v[0]), f(&v[1]), f(&v[2])];
        match self {
            Settings::I(s) => Settings::I(SettingsCategoryI {
                a: apply(&s.a),
                b: apply(&s.b),
                b2: apply(&s.b2),
            }),
            Settings::II(s) => Settings::II(SettingsCategoryII {
                a: apply(&s.a),
                b: apply(&s.b),
            }),
        }
    }
}

impl From<SettingsCategoryI> for Settings {
    fn from(s: SettingsCategoryI) -> Self {
        Settings::I(s)
    }
}

impl From<SettingsCategoryII> for Settings {
    fn from(s: SettingsCategoryII) -> Self {
        Settings::II(s)
    }
}

/// An evaluated right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// Minimum-projection value of the derived directions (`L_n` or `L_m`).
    #[serde(rename = "L")]
    pub l: f64,
    /// `β*` (category I) or `δ*` (category II), radians.
    pub extremal_angle: f64,
    pub bound: f64,
    pub degenerate: bool,
    pub per_pair_angles: [f64; 3],
}

/// Closed-form minimum of `Σ|e_i·v|` over the unit sphere. Returns 0 for
/// linearly dependent triples.
pub fn min_abs_projection_closed_form(e1: &UnitVec3, e2: &UnitVec3, e3: &UnitVec3) -> f64 {
    let det = triple_product(e1, e2, e3).abs();
    if det < DEPENDENCE_TOL {
        return 0.0;
    }
    let denom = norm(e1.cross(e2))
        .max(norm(e2.cross(e3)))
        .max(norm(e3.cross(e1)));
    // |det| ≤ every |e_i × e_j| since the third vector is a unit vector.
    (det / denom).min(1.0)
}

/// The minimum-projection value expressed through the pairwise angles
/// `α12, α23, α31 ∈ (0, π)`:
///
/// ```text
/// L = sqrt(1 − Σ cos²α + 2 Π cos α) / max sin α
/// ```
///
/// The radicand is the Gram determinant, i.e. the squared triple product.
pub fn min_abs_projection_angle_form(alpha12: f64, alpha23: f64, alpha31: f64) -> Result<f64> {
    let angles = [alpha12, alpha23, alpha31];
    for (what, a) in ["alpha12", "alpha23", "alpha31"].into_iter().zip(angles) {
        crate::error::check_range(what, a, a > 0.0 && a < std::f64::consts::PI, "(0, pi)")?;
    }
    let [c12, c23, c31] = angles.map(f64::cos);
    let radicand = 1.0 - (c12 * c12 + c23 * c23 + c31 * c31) + 2.0 * c12 * c23 * c31;
    if radicand < -RADICAND_SLACK {
        return Err(Error::UnrealizableAngles(alpha12, alpha23, alpha31));
    }
    let denom = angles.map(f64::sin).into_iter().fold(0.0, f64::max);
    Ok((radicand.max(0.0).sqrt() / denom).min(1.0))
}

fn report(
    dirs: [UnitVec3; 3],
    angles: [f64; 3],
    extremal_angle: f64,
    trig_factor: f64,
) -> BoundReport {
    let det = triple_product(&dirs[0], &dirs[1], &dirs[2]).abs();
    if det < DEPENDENCE_TOL {
        return BoundReport {
            l: 0.0,
            extremal_angle,
            bound: 2.0,
            degenerate: true,
            per_pair_angles: angles,
        };
    }
    let l = min_abs_projection_closed_form(&dirs[0], &dirs[1], &dirs[2]);
    BoundReport {
        l,
        extremal_angle,
        bound: 2.0 - 2.0 / 3.0 * trig_factor * l,
        degenerate: false,
        per_pair_angles: angles,
    }
}

/// Right-hand side `2 − (2/3) sin(β*/2) L_n` with `β* = min β_i` and
/// `n_i = dir(b_i − b2_i)`. Alice's directions do not enter.
pub fn bound_category_i(s: &SettingsCategoryI) -> Result<BoundReport> {
    let mut dirs = [UnitVec3::X; 3];
    let mut betas = [0.0; 3];
    for i in 0..3 {
        let (n, beta) = difference_direction(&s.b[i], &s.b2[i]).map_err(|_| {
            Error::DegenerateSettings {
                index: i,
                reason: "coincident (b, b2)",
            }
        })?;
        dirs[i] = n;
        betas[i] = beta;
    }
    let beta_star = betas.into_iter().fold(f64::INFINITY, f64::min);
    Ok(report(dirs, betas, beta_star, (beta_star / 2.0).sin()))
}

/// Right-hand side `2 − (2/3) cos(δ*/2) L_m` with `δ* = max δ_i` and
/// `m_i = dir(b_i + b_{i+1})`, indices mod 3.
pub fn bound_category_ii(s: &SettingsCategoryII) -> Result<BoundReport> {
    let mut dirs = [UnitVec3::X; 3];
    let mut deltas = [0.0; 3];
    for i in 0..3 {
        let (m, delta) = sum_direction(&s.b[i], &s.b[(i + 1) % 3]).map_err(|_| {
            Error::DegenerateSettings {
                index: i,
                reason: "antipodal (b_i, b_i+1)",
            }
        })?;
        dirs[i] = m;
        deltas[i] = delta;
    }
    let delta_star = deltas.into_iter().fold(0.0, f64::max);
    Ok(report(dirs, deltas, delta_star, (delta_star / 2.0).cos()))
}

/// Pairwise angles `(α12, α23, α31)` of a triple.
pub fn pairwise_angles(e1: &UnitVec3, e2: &UnitVec3, e3: &UnitVec3) -> [f64; 3] {
    [
        angle_between(e1, e2),
        angle_between(e2, e3),
        angle_between(e3, e1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::symmetric_cone_triple;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn sixty_degree_triple() -> [UnitVec3; 3] {
        // Pairwise dots all 1/2.
        [
            UnitVec3::X,
            UnitVec3::new(0.5, 3f64.sqrt() / 2.0, 0.0).unwrap(),
            UnitVec3::new(0.5, 1.0 / (2.0 * 3f64.sqrt()), (2.0f64 / 3.0).sqrt()).unwrap(),
        ]
    }

    /// Bob pair at half-angle `beta/2` about `p`, differing along `n`.
    fn pair(p: UnitVec3, n: UnitVec3, beta: f64) -> (UnitVec3, UnitVec3) {
        let (s, c) = (beta / 2.0).sin_cos();
        let b = UnitVec3::new(
            c * p.x() + s * n.x(),
            c * p.y() + s * n.y(),
            c * p.z() + s * n.z(),
        )
        .unwrap();
        let b2 = UnitVec3::new(
            c * p.x() - s * n.x(),
            c * p.y() - s * n.y(),
            c * p.z() - s * n.z(),
        )
        .unwrap();
        (b, b2)
    }

    fn category_i(betas: [f64; 3]) -> SettingsCategoryI {
        let n = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
        let p = [UnitVec3::Y, UnitVec3::Z, UnitVec3::X];
        let mut b = [UnitVec3::X; 3];
        let mut b2 = [UnitVec3::X; 3];
        for i in 0..3 {
            (b[i], b2[i]) = pair(p[i], n[i], betas[i]);
        }
        SettingsCategoryI { a: p, b, b2 }
    }

    #[test]
    fn closed_form_examples() {
        let [x, y, z] = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
        assert_eq!(min_abs_projection_closed_form(&x, &y, &z), 1.0);
        let d = UnitVec3::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(min_abs_projection_closed_form(&x, &y, &d), 0.0);
        let [a, b, c] = sixty_degree_triple();
        // (1/√2) / (√3/2) = √(2/3); the oracle module confirms it by search.
        assert_abs_diff_eq!(
            min_abs_projection_closed_form(&a, &b, &c),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn angle_form_examples() {
        assert_abs_diff_eq!(
            min_abs_projection_angle_form(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let l = min_abs_projection_angle_form(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3).unwrap();
        assert_abs_diff_eq!(l, 0.5f64.sqrt() / FRAC_PI_3.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(l, 0.816_50, epsilon = 1e-5);
    }

    #[test]
    fn angle_form_limit_is_zero() {
        for eps in [1e-3f64, 1e-5, 1e-7] {
            let e1 = UnitVec3::X;
            let e2 = UnitVec3::new(eps.cos(), eps.sin(), 0.0).unwrap();
            let e3 = UnitVec3::new(0.3, 0.4, 0.5).unwrap();
            let [a, b, c] = pairwise_angles(&e1, &e2, &e3);
            let l = min_abs_projection_angle_form(a, b, c).unwrap();
            assert!(l < 2.0 * eps, "eps={eps} l={l}");
        }
    }

    #[test]
    fn angle_form_rejects_unrealizable() {
        // Two small angles cannot coexist with a large third.
        let r = min_abs_projection_angle_form(0.1, 0.1, 2.0);
        assert!(matches!(r, Err(Error::UnrealizableAngles(..))));
        assert!(min_abs_projection_angle_form(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn category_i_appendix_optimum() {
        let beta = 36.87_f64.to_radians();
        let r = bound_category_i(&category_i([beta; 3])).unwrap();
        assert!(!r.degenerate);
        assert_abs_diff_eq!(r.l, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 1.789_18, epsilon = 1e-5);
        assert_abs_diff_eq!(r.bound, 2.0 - 2.0 / 3.0 * (beta / 2.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn category_i_min_selection() {
        let r = bound_category_i(&category_i([
            10f64.to_radians(),
            FRAC_PI_2,
            FRAC_PI_2,
        ]))
        .unwrap();
        assert_abs_diff_eq!(r.extremal_angle, 10f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 1.941_89, epsilon = 1e-5);
    }

    #[test]
    fn category_i_coplanar_is_degenerate() {
        // All n_i in the xy-plane.
        let n = [
            UnitVec3::X,
            UnitVec3::Y,
            UnitVec3::new(1.0, 1.0, 0.0).unwrap(),
        ];
        let mut b = [UnitVec3::X; 3];
        let mut b2 = [UnitVec3::X; 3];
        for i in 0..3 {
            (b[i], b2[i]) = pair(UnitVec3::Z, n[i], 1.0);
        }
        let r = bound_category_i(&SettingsCategoryI { a: b, b, b2 }).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.l, 0.0);
        assert_eq!(r.bound, 2.0);
    }

    #[test]
    fn category_i_coincident_pair_errors() {
        let mut s = category_i([1.0; 3]);
        s.b2[1] = s.b[1];
        assert_eq!(
            bound_category_i(&s),
            Err(Error::DegenerateSettings {
                index: 1,
                reason: "coincident (b, b2)"
            })
        );
    }

    #[test]
    fn category_ii_symmetric_cone() {
        let b = symmetric_cone_triple(112.63_f64.to_radians()).unwrap();
        let r = bound_category_ii(&SettingsCategoryII { a: b, b }).unwrap();
        // Independent evaluation of the same chain in numpy gives
        // L_m = 0.98184577, bound = 1.63696148.
        assert_abs_diff_eq!(r.l, 0.981_845_77, epsilon = 1e-8);
        assert_abs_diff_eq!(r.bound, 1.636_961_48, epsilon = 1e-8);
    }

    #[test]
    fn category_ii_orthonormal() {
        let b = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
        let r = bound_category_ii(&SettingsCategoryII { a: b, b }).unwrap();
        assert_abs_diff_eq!(r.l, (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.extremal_angle, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 1.615_10, epsilon = 1e-5);
    }

    #[test]
    fn category_ii_coplanar_and_antipodal() {
        let t = 2.0 * FRAC_PI_3;
        let b = [
            UnitVec3::X,
            UnitVec3::new(t.cos(), t.sin(), 0.0).unwrap(),
            UnitVec3::new(t.cos(), -t.sin(), 0.0).unwrap(),
        ];
        let r = bound_category_ii(&SettingsCategoryII { a: b, b }).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.bound, 2.0);

        let b = [UnitVec3::X, -UnitVec3::X, UnitVec3::Z];
        assert!(matches!(
            bound_category_ii(&SettingsCategoryII { a: b, b }),
            Err(Error::DegenerateSettings { index: 0, .. })
        ));
    }

    #[test]
    fn settings_map_preserves_layout() {
        let s = Settings::I(category_i([1.0, 1.1, 1.2]));
        let mapped = s.map(|v| *v);
        assert_eq!(mapped, s);
        assert_eq!(s.vectors().len(), 9);
        assert_eq!(s.category(), Category::I);
    }
}
