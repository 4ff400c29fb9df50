//! Optimal settings, the symmetric category II scan, threshold visibilities
//! and robustness of a violation against setting imprecision.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{Settings, SettingsCategoryI, SettingsCategoryII};
use crate::error::{check_range, Error, Result};
use crate::geometry::{symmetric_cone_triple, UnitVec3};
use crate::oracle::random_unit_vector;
use crate::quantum::{CorrelationModel, ViolationReport, LHS_FLOOR};

/// Default scan step, 0.25°.
pub const DEFAULT_SCAN_STEP: f64 = 0.25 * PI / 180.0;
/// Width below which a window endpoint is considered located.
pub const BISECTION_TOL: f64 = 1e-4;
/// `|S|` at a located window endpoint.
pub const ENDPOINT_S_TOL: f64 = 1e-6;
/// Radius and acceptance threshold of the local optimality check.
pub const LOCAL_CHECK_RADIUS: f64 = 0.01;
pub const LOCAL_CHECK_GAIN: f64 = 1e-6;
const LOCAL_CHECK_TRIALS: u64 = 512;
const LOCAL_CHECK_SEED: u64 = 0x4c4e_525f_6f70_7431;
pub const MAX_ROBUSTNESS_EPSILON: f64 = 0.2;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    // The midpoint is not guaranteed to beat the interior probes.
    [(x1, f1), (x2, f2), (x, fx)]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three candidates")
}

/// Root of `f` between `lo` and `hi`, which must bracket a sign change.
/// Stops once the bracket is narrower than `xtol` and `|f| ≤ ftol`.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> f64 {
    let mut f_lo = f(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (hi - lo <= xtol && f_mid.abs() <= ftol) || mid == lo || mid == hi {
            return mid;
        }
        if (f_mid <= 0.0) == (f_lo <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// Category I family in a canonical frame: `n_i` along the coordinate axes,
/// every pair opening `beta`, and Alice along `b_i + b2_i`.
pub fn optimal_category_i_settings(beta: f64) -> SettingsCategoryI {
    let n = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
    let p = [UnitVec3::Y, UnitVec3::Z, UnitVec3::X];
    let (s, c) = (beta / 2.0).sin_cos();
    let combine = |p: &UnitVec3, n: &UnitVec3, sign: f64| {
        UnitVec3::new(
            c * p.x() + sign * s * n.x(),
            c * p.y() + sign * s * n.y(),
            c * p.z() + sign * s * n.z(),
        )
        .expect("orthogonal combination is a unit vector")
    };
    SettingsCategoryI {
        a: p,
        b: [0, 1, 2].map(|i| combine(&p[i], &n[i], 1.0)),
        b2: [0, 1, 2].map(|i| combine(&p[i], &n[i], -1.0)),
    }
}

/// Bob on a symmetric cone with pairwise angle `delta`, Alice along
/// `b_i − b_{i+1}`.
pub fn symmetric_category_ii_settings(delta: f64) -> Result<SettingsCategoryII> {
    let b = symmetric_cone_triple(delta)?;
    let a = [0, 1, 2].map(|i| {
        let (u, v) = (b[i], b[(i + 1) % 3]);
        UnitVec3::new(u.x() - v.x(), u.y() - v.y(), u.z() - v.z())
    });
    let [a0, a1, a2] = a;
    Ok(SettingsCategoryII {
        a: [a0?, a1?, a2?],
        b,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryIOptimum {
    #[serde(skip)]
    pub settings: SettingsCategoryI,
    /// Common opening angle of Bob's pairs, radians.
    pub beta: f64,
    pub report: ViolationReport,
    /// Largest increase of `S` seen under random perturbations of all nine
    /// vectors within [`LOCAL_CHECK_RADIUS`].
    pub perturbation_gain: f64,
    pub locally_optimal: bool,
}

/// Maximizes `S` for category I settings at the given visibility.
///
/// The search runs over the family of [`optimal_category_i_settings`] (one
/// parameter) and is then confirmed against unstructured perturbations.
pub fn optimize_category_i(model: &CorrelationModel) -> Result<CategoryIOptimum> {
    let v = model.visibility();
    if v <= 2.0 / 3.0 {
        return Err(Error::NoViolationPossible(v));
    }
    let s_of = |beta: f64| {
        model
            .evaluate_violation(&Settings::I(optimal_category_i_settings(beta)))
            .map(|r| r.s)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (beta, _) = golden_section_max(s_of, 1e-6, PI - 1e-6, 1e-12);
    let settings = optimal_category_i_settings(beta);
    let report = model.evaluate_violation(&Settings::I(settings))?;

    let nominal = Settings::I(settings);
    let perturbation_gain = (0..LOCAL_CHECK_TRIALS)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(LOCAL_CHECK_SEED, k);
            let trial = perturb(&nominal, LOCAL_CHECK_RADIUS, &mut rng);
            model
                .evaluate_violation(&trial)
                .map(|r| r.s - report.s)
                .unwrap_or(f64::NEG_INFINITY)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    Ok(CategoryIOptimum {
        settings,
        beta,
        report,
        perturbation_gain,
        locally_optimal: perturbation_gain <= LOCAL_CHECK_GAIN,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub delta: f64,
    pub lhs: f64,
    pub bound: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// `(lo, hi)` in radians; `None` if no angle in range violates.
    pub violation_window: Option<(f64, f64)>,
    pub argmax_delta: f64,
    pub max_s: f64,
    /// `bound / lhs` at `argmax_delta`.
    pub argmax_ratio: f64,
}

fn symmetric_ii_row(model: &CorrelationModel, delta: f64) -> Result<ScanRow> {
    let settings = Settings::II(symmetric_category_ii_settings(delta)?);
    let r = model.evaluate_violation(&settings)?;
    Ok(ScanRow {
        delta,
        lhs: r.lhs,
        bound: r.bound,
        s: r.s,
    })
}

/// Evaluates the symmetric category II family for `delta` from `delta_lo` to
/// `delta_hi` in steps of `step` (radians) and locates the violation window
/// and the maximum of `S`.
pub fn scan_symmetric_ii(
    model: &CorrelationModel,
    delta_lo: f64,
    delta_hi: f64,
    step: f64,
) -> Result<ScanResult> {
    let max = 2.0 * PI / 3.0;
    check_range("delta_lo", delta_lo, delta_lo > 0.0 && delta_lo < max, "(0, 2pi/3)")?;
    check_range(
        "delta_hi",
        delta_hi,
        delta_hi > delta_lo && delta_hi < max,
        "(delta_lo, 2pi/3)",
    )?;
    check_range("step", step, step > 0.0, "(0, inf)")?;

    let n = ((delta_hi - delta_lo) / step + 1e-9).floor() as usize;
    let mut deltas: Vec<f64> = (0..=n).map(|k| delta_lo + k as f64 * step).collect();
    if delta_hi - deltas[n] > 1e-12 {
        deltas.push(delta_hi);
    }
    let rows = deltas
        .par_iter()
        .map(|&d| symmetric_ii_row(model, d))
        .collect::<Result<Vec<_>>>()?;

    let s_at = |d: f64| symmetric_ii_row(model, d).map(|r| r.s).unwrap_or(f64::NEG_INFINITY);
    let k = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.s.total_cmp(&b.1.s))
        .map(|(i, _)| i)
        .expect("scan has at least one row");
    let lo = rows[k.saturating_sub(1)].delta;
    let hi = rows[(k + 1).min(rows.len() - 1)].delta;
    let (argmax_delta, max_s) = if hi > lo {
        let (x, fx) = golden_section_max(s_at, lo, hi, 1e-10);
        if fx >= rows[k].s {
            (x, fx)
        } else {
            (rows[k].delta, rows[k].s)
        }
    } else {
        (rows[k].delta, rows[k].s)
    };

    let violation_window = (max_s > 0.0).then(|| {
        let left = (0..=k).rev().find(|&j| rows[j].s <= 0.0).map(|j| {
            let pos = if j < k && rows[j + 1].s > 0.0 && rows[j + 1].delta <= argmax_delta {
                rows[j + 1].delta
            } else {
                argmax_delta
            };
            bisect_root(s_at, rows[j].delta, pos, BISECTION_TOL, ENDPOINT_S_TOL)
        });
        let right = (k..rows.len()).find(|&j| rows[j].s <= 0.0).map(|j| {
            let pos = if j > k && rows[j - 1].s > 0.0 && rows[j - 1].delta >= argmax_delta {
                rows[j - 1].delta
            } else {
                argmax_delta
            };
            bisect_root(s_at, pos, rows[j].delta, BISECTION_TOL, ENDPOINT_S_TOL)
        });
        (left.unwrap_or(rows[0].delta), right.unwrap_or(rows[rows.len() - 1].delta))
    });

    let peak = symmetric_ii_row(model, argmax_delta)?;
    Ok(ScanResult {
        rows,
        violation_window,
        argmax_delta,
        max_s,
        argmax_ratio: peak.bound / peak.lhs,
    })
}

/// Visibility at which `S` crosses zero: `bound / lhs(V = 1)`, capped at 1.
pub fn threshold_visibility(settings: &Settings) -> Result<f64> {
    let r = CorrelationModel::pure().evaluate_violation(settings)?;
    if r.lhs <= LHS_FLOOR {
        return Err(Error::UndefinedThreshold);
    }
    Ok((r.bound / r.lhs).min(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    #[serde(rename = "nominal_S")]
    pub nominal_s: f64,
    pub nominal_bound: f64,
    pub nominal_lhs: f64,
    pub sup_bound: f64,
    pub inf_lhs: f64,
    /// `inf_lhs − sup_bound`; positive means the violation survives every
    /// sampled imprecision.
    pub conclusive_margin: f64,
    pub epsilon: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Independent stream `k` of the generator seeded with `seed`.
fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Random unit vector orthogonal to `v`.
fn random_orthogonal<R: Rng + ?Sized>(v: &UnitVec3, rng: &mut R) -> UnitVec3 {
    loop {
        let u = random_unit_vector(rng);
        let d = u.dot(v);
        if let Ok(w) = UnitVec3::new(u.x() - d * v.x(), u.y() - d * v.y(), u.z() - d * v.z()) {
            if d.abs() < 0.999 {
                return w;
            }
        }
    }
}

/// Rotates every vector of `settings` independently by an angle uniform in
/// `[0, epsilon]` about a random axis orthogonal to it.
pub fn perturb<R: Rng + ?Sized>(settings: &Settings, epsilon: f64, rng: &mut R) -> Settings {
    settings.map(|v| {
        let axis = random_orthogonal(v, rng);
        let angle = epsilon * rng.gen::<f64>();
        v.rotated(&axis, angle)
    })
}

/// Supremum of the bound and infimum of the left-hand side over `n_samples`
/// perturbed copies of `settings` plus the nominal settings.
///
/// Sample `k` draws from its own generator stream, so the result depends
/// only on `seed` and not on evaluation order. Perturbed bundles that make a
/// pair degenerate count as bound 2.
pub fn robustness_sweep(
    settings: &Settings,
    model: &CorrelationModel,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    check_range(
        "epsilon",
        epsilon,
        (0.0..=MAX_ROBUSTNESS_EPSILON).contains(&epsilon),
        "[0, 0.2]",
    )?;
    if n_samples == 0 {
        return Err(Error::Range {
            what: "n_samples",
            value: 0.0,
            range: ">= 1",
        });
    }
    let nominal = model.evaluate_violation(settings)?;
    let (sup_bound, inf_lhs) = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k);
            let trial = perturb(settings, epsilon, &mut rng);
            let bound = trial.bound().map(|b| b.bound).unwrap_or(2.0);
            (bound, model.lhs(&trial))
        })
        .reduce(
            || (nominal.bound, nominal.lhs),
            |a, b| (a.0.max(b.0), a.1.min(b.1)),
        );
    Ok(RobustnessReport {
        nominal_s: nominal.s,
        nominal_bound: nominal.bound,
        nominal_lhs: nominal.lhs,
        sup_bound,
        inf_lhs,
        conclusive_margin: inf_lhs - sup_bound,
        epsilon,
        n_samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(fx, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 1e-12);
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-11);
        let r = bisect_root(|x| 1.0 - x, 0.0, 3.0, 1e-12, 1e-12);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn optimum_at_full_visibility() {
        let opt = optimize_category_i(&CorrelationModel::pure()).unwrap();
        assert_abs_diff_eq!((opt.beta / 2.0).tan(), 1.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(opt.beta.to_degrees(), 36.87, epsilon = 0.01);
        // max_β 2cos(β/2) + (2/3) sin(β/2) − 2 = √(4 + 4/9) − 2
        assert_abs_diff_eq!(opt.report.s, (40.0f64 / 9.0).sqrt() - 2.0, epsilon = 1e-12);
        assert!(opt.locally_optimal, "gain {}", opt.perturbation_gain);
    }

    #[test]
    fn optimum_reoptimizes_at_lower_visibility() {
        let opt = optimize_category_i(&CorrelationModel::new(0.95).unwrap()).unwrap();
        // Fixed V = 1 geometry gives 0.95·1.89737 − 1.78918 ≈ 0.01332; moving
        // β to tan(β/2) = 1/(3V) lifts it to √(4V² + 4/9) − 2.
        let analytic = (4.0 * 0.95f64 * 0.95 + 4.0 / 9.0).sqrt() - 2.0;
        assert_abs_diff_eq!(opt.report.s, analytic, epsilon = 1e-12);
        assert!(opt.report.s >= 0.013_32);
        assert_abs_diff_eq!((opt.beta / 2.0).tan(), 1.0 / (3.0 * 0.95), epsilon = 1e-6);
    }

    #[test]
    fn optimum_requires_visibility_above_two_thirds() {
        let r = optimize_category_i(&CorrelationModel::new(0.6).unwrap());
        assert!(matches!(r, Err(Error::NoViolationPossible(_))));
        let below = optimize_category_i(&CorrelationModel::new(0.9).unwrap()).unwrap();
        assert!(below.report.s < 0.0);
    }

    #[test]
    fn scan_finds_window() {
        let d = |x: f64| x.to_radians();
        let r = scan_symmetric_ii(&CorrelationModel::pure(), d(90.0), d(119.0), DEFAULT_SCAN_STEP).unwrap();
        let (lo, hi) = r.violation_window.unwrap();
        assert_abs_diff_eq!(lo.to_degrees(), 106.8, epsilon = 0.3);
        assert_abs_diff_eq!(hi.to_degrees(), 116.5, epsilon = 0.3);
        assert_abs_diff_eq!(r.argmax_delta.to_degrees(), 112.63, epsilon = 0.1);
        assert_abs_diff_eq!(r.argmax_ratio, 0.9836, epsilon = 5e-4);
        for e in [lo, hi] {
            assert!(symmetric_ii_row(&CorrelationModel::pure(), e).unwrap().s.abs() <= ENDPOINT_S_TOL);
        }
        assert!(r.rows.windows(2).all(|w| w[0].delta < w[1].delta));
    }

    #[test]
    fn scan_below_threshold_has_no_window() {
        let d = |x: f64| x.to_radians();
        let r = scan_symmetric_ii(&CorrelationModel::new(0.97).unwrap(), d(90.0), d(119.0), DEFAULT_SCAN_STEP)
            .unwrap();
        assert!(r.violation_window.is_none());
        assert!(r.max_s < 0.0);
    }

    #[test]
    fn scan_range_errors() {
        let m = CorrelationModel::pure();
        assert!(scan_symmetric_ii(&m, 0.0, 1.0, 0.01).is_err());
        assert!(scan_symmetric_ii(&m, 1.0, 0.5, 0.01).is_err());
        assert!(scan_symmetric_ii(&m, 1.0, 2.2, 0.01).is_err());
        assert!(scan_symmetric_ii(&m, 1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn scan_includes_upper_endpoint() {
        let r = scan_symmetric_ii(&CorrelationModel::pure(), 1.0, 1.05, 0.02).unwrap();
        let deltas: Vec<f64> = r.rows.iter().map(|r| r.delta).collect();
        assert_eq!(deltas.len(), 4);
        assert_eq!(*deltas.last().unwrap(), 1.05);
    }

    #[test]
    fn thresholds() {
        let beta = 2.0 * (1.0f64 / 3.0).atan();
        let t = threshold_visibility(&Settings::I(optimal_category_i_settings(beta))).unwrap();
        assert_abs_diff_eq!(t, 0.9430, epsilon = 5e-4);

        let s = Settings::II(symmetric_category_ii_settings(112.63f64.to_radians()).unwrap());
        assert_abs_diff_eq!(threshold_visibility(&s).unwrap(), 0.9836, epsilon = 5e-4);

        // Orthonormal Bob settings never violate.
        let b = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
        let a = symmetric_category_ii_settings(1.0).unwrap().a;
        assert_eq!(threshold_visibility(&Settings::II(SettingsCategoryII { a, b })).unwrap(), 1.0);

        let zero = SettingsCategoryII { a: [UnitVec3::Z; 3], b: symmetric_cone_triple(1.0).unwrap() };
        assert_eq!(threshold_visibility(&Settings::II(zero)), Err(Error::UndefinedThreshold));
    }

    #[test]
    fn perturbation_respects_radius() {
        let s = Settings::I(optimal_category_i_settings(0.6));
        let mut rng = sample_rng(5, 0);
        for _ in 0..100 {
            let p = perturb(&s, 0.05, &mut rng);
            for (u, v) in s.vectors().iter().zip(p.vectors()) {
                assert!(crate::geometry::angle_between(u, &v) <= 0.05 + 1e-12);
            }
        }
    }

    #[test]
    fn robustness_zero_epsilon_is_nominal() {
        let s = Settings::I(optimal_category_i_settings(0.6435));
        let m = CorrelationModel::pure();
        let r = robustness_sweep(&s, &m, 0.0, 50, 9).unwrap();
        let n = m.evaluate_violation(&s).unwrap();
        assert_abs_diff_eq!(r.sup_bound, n.bound, epsilon = 1e-12);
        assert_abs_diff_eq!(r.inf_lhs, n.lhs, epsilon = 1e-12);
        assert_abs_diff_eq!(r.conclusive_margin, n.s, epsilon = 1e-12);
    }

    #[test]
    fn robustness_is_deterministic() {
        let s = Settings::I(optimal_category_i_settings(0.6435));
        let m = CorrelationModel::pure();
        let a = robustness_sweep(&s, &m, 0.05, 300, 42).unwrap();
        let b = robustness_sweep(&s, &m, 0.05, 300, 42).unwrap();
        assert_eq!(a.conclusive_margin, b.conclusive_margin);
        assert!(robustness_sweep(&s, &m, 0.3, 10, 1).is_err());
        assert!(robustness_sweep(&s, &m, 0.1, 0, 1).is_err());
    }
}
