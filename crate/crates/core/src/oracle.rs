//! Brute-force minimization of `F(v) = Σ|e_i·v|` over the sphere.
//!
//! The search knows nothing about cross products or vertices: it samples a
//! latitude–longitude grid and then zooms in with two rounds of local tangent
//! grids, each ten times finer than the last. It serves as the independent
//! check on [`crate::bounds::min_abs_projection_closed_form`].

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::DEPENDENCE_TOL;
use crate::error::{check_range, Error, Result};
use crate::geometry::{cross, norm, triple_product, UnitVec3};

pub const DEFAULT_COARSE_STEP: f64 = 0.02;
pub const REFINEMENT_ROUNDS: usize = 2;
pub const REFINEMENT_FACTOR: f64 = 10.0;
/// Agreement threshold between the grid search and the vertex minimum.
pub const AGREEMENT_TOL: f64 = 5e-3;

/// Number of well-separated coarse cells refined. The function has up to six
/// vertex basins, whose values can differ by less than the coarse-grid error.
const CANDIDATES: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// Smallest sampled value of `F`.
    pub l_est: f64,
    pub argmin: UnitVec3,
    /// Grid spacing of the last round, radians.
    pub resolution: f64,
    pub refined: bool,
    /// Best value after the coarse pass and after each refinement round.
    pub round_best: Vec<f64>,
}

/// `Σ |e_i · v|`
pub fn objective(e: &[UnitVec3; 3], v: &UnitVec3) -> f64 {
    e.iter().map(|ei| ei.dot(v).abs()).sum()
}

fn coarse_grid(step: f64) -> Vec<UnitVec3> {
    let n_theta = (PI / step).ceil() as usize;
    (0..=n_theta)
        .into_par_iter()
        .flat_map_iter(|k| {
            let theta = PI * k as f64 / n_theta as f64;
            let ring = theta.sin() * 2.0 * PI;
            let n_phi = if k == 0 || k == n_theta {
                1
            } else {
                ((ring / step).ceil() as usize).max(1)
            };
            (0..n_phi).map(move |j| {
                let phi = PI - 2.0 * PI * j as f64 / n_phi as f64;
                UnitVec3::from_spherical(theta, phi).expect("grid angles are in range")
            })
        })
        .collect()
}

/// Orthonormal tangent basis at `c`.
fn tangent_basis(c: &UnitVec3) -> ([f64; 3], [f64; 3]) {
    let helper = if c.x().abs() < 0.9 { UnitVec3::X } else { UnitVec3::Y };
    let t1 = cross(c.to_array(), helper.to_array());
    let n1 = norm(t1);
    let t1 = [t1[0] / n1, t1[1] / n1, t1[2] / n1];
    let t2 = cross(c.to_array(), t1);
    (t1, t2)
}

/// Best point of a `(2·half + 1)²` tangent grid with spacing `h` centred on
/// `c`. The centre itself is always a candidate.
fn local_refine(e: &[UnitVec3; 3], c: &UnitVec3, f_c: f64, h: f64) -> (f64, UnitVec3) {
    let half = REFINEMENT_FACTOR as i64;
    let (t1, t2) = tangent_basis(c);
    let p = c.to_array();
    let mut best = (f_c, *c);
    for i in -half..=half {
        for j in -half..=half {
            if i == 0 && j == 0 {
                continue;
            }
            let (x, y) = (i as f64 * h, j as f64 * h);
            let v = UnitVec3::new(
                p[0] + x * t1[0] + y * t2[0],
                p[1] + x * t1[1] + y * t2[1],
                p[2] + x * t1[2] + y * t2[2],
            )
            .expect("tangent offset of a unit vector is nonzero");
            let f = objective(e, &v);
            if f < best.0 {
                best = (f, v);
            }
        }
    }
    best
}

/// Grid-search estimate of `min_v Σ|e_i·v|`. `coarse_step` must lie in
/// `[1e-3, 0.1]` radians.
pub fn sphere_min_bruteforce(
    e1: &UnitVec3,
    e2: &UnitVec3,
    e3: &UnitVec3,
    coarse_step: f64,
) -> Result<OracleResult> {
    check_range(
        "coarse_step",
        coarse_step,
        (1e-3..=0.1).contains(&coarse_step),
        "[1e-3, 0.1]",
    )?;
    let e = [*e1, *e2, *e3];
    let grid = coarse_grid(coarse_step);
    let values: Vec<f64> = grid.par_iter().map(|v| objective(&e, v)).collect();

    // Greedy selection of the best cells, at most one per neighbourhood.
    let min_sep = (3.0 * coarse_step).cos();
    let mut cands: Vec<(f64, UnitVec3)> = Vec::with_capacity(CANDIDATES + 1);
    for (v, &f) in grid.iter().zip(&values) {
        if let Some(near) = cands.iter_mut().find(|(_, c)| c.dot(v) > min_sep) {
            if f < near.0 {
                *near = (f, *v);
            }
            continue;
        }
        if cands.len() < CANDIDATES {
            cands.push((f, *v));
        } else if let Some(worst) = cands.iter_mut().max_by(|a, b| a.0.total_cmp(&b.0)) {
            if f < worst.0 {
                *worst = (f, *v);
            }
        }
    }
    let pick_best = |c: &[(f64, UnitVec3)]| {
        c.iter()
            .copied()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("candidate list is nonempty")
    };

    let mut round_best = vec![pick_best(&cands).0];
    let mut h = coarse_step;
    for _ in 0..REFINEMENT_ROUNDS {
        h /= REFINEMENT_FACTOR;
        for c in cands.iter_mut() {
            *c = local_refine(&e, &c.1, c.0, h);
        }
        round_best.push(pick_best(&cands).0);
    }
    let (l_est, argmin) = pick_best(&cands);
    Ok(OracleResult {
        l_est,
        argmin,
        resolution: h,
        refined: REFINEMENT_ROUNDS > 0,
        round_best,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexCheck {
    /// Minimum of `F` over the six normalized pairwise cross products.
    pub vertex_min: f64,
    /// Grid-search minimum.
    pub global_min: f64,
    pub agrees: bool,
}

/// Compares the minimum over the candidate vertices `±(e_j×e_k)/|e_j×e_k|`
/// with the grid-search minimum.
pub fn vertex_minimum_check(e1: &UnitVec3, e2: &UnitVec3, e3: &UnitVec3) -> Result<VertexCheck> {
    let det = triple_product(e1, e2, e3).abs();
    if det < DEPENDENCE_TOL {
        return Err(Error::LinearlyDependent(det));
    }
    let e = [*e1, *e2, *e3];
    let vertex_min = [(1, 2), (2, 0), (0, 1)]
        .into_iter()
        .flat_map(|(j, k)| {
            let c = e[j].cross(&e[k]);
            let v = UnitVec3::from_array(c).expect("independent vectors have nonzero cross product");
            [v, -v]
        })
        .map(|v| objective(&e, &v))
        .fold(f64::INFINITY, f64::min);
    let global_min = sphere_min_bruteforce(e1, e2, e3, DEFAULT_COARSE_STEP)?.l_est;
    Ok(VertexCheck {
        vertex_min,
        global_min,
        agrees: (vertex_min - global_min).abs() <= AGREEMENT_TOL,
    })
}

/// Uniformly distributed point on the sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVec3 {
    let v: [f64; 3] = UnitSphere.sample(rng);
    UnitVec3::from_array(v).expect("UnitSphere samples are unit vectors")
}

/// Three independent uniform points, redrawn until `|e1·(e2×e3)| > min_abs_triple`.
pub fn random_independent_triple<R: Rng + ?Sized>(rng: &mut R, min_abs_triple: f64) -> [UnitVec3; 3] {
    loop {
        let t = [
            random_unit_vector(rng),
            random_unit_vector(rng),
            random_unit_vector(rng),
        ];
        if triple_product(&t[0], &t[1], &t[2]).abs() > min_abs_triple {
            return t;
        }
    }
}
