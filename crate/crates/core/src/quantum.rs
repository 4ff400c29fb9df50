//! Singlet-state predictions with finite visibility.

use serde::Serialize;

use crate::bounds::{Settings, SettingsCategoryI, SettingsCategoryII};
use crate::error::{check_range, Result};
use crate::geometry::UnitVec3;

/// LHS values at or below this are treated as zero when forming ratios.
pub const LHS_FLOOR: f64 = 1e-12;

/// Polarization-entangled singlet with visibility `V`, `<AB> = −V a·b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    visibility: f64,
}

impl CorrelationModel {
    pub fn new(visibility: f64) -> Result<Self> {
        check_range(
            "visibility",
            visibility,
            (0.0..=1.0).contains(&visibility),
            "[0, 1]",
        )?;
        Ok(CorrelationModel { visibility })
    }

    pub fn pure() -> Self {
        CorrelationModel { visibility: 1.0 }
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn correlation(&self, a: &UnitVec3, b: &UnitVec3) -> f64 {
        -self.visibility * a.dot(b)
    }

    /// `(1/3) Σ |<A_i B_i> + <A_i B2_i>|`
    pub fn lhs_category_i(&self, s: &SettingsCategoryI) -> f64 {
        (0..3)
            .map(|i| (self.correlation(&s.a[i], &s.b[i]) + self.correlation(&s.a[i], &s.b2[i])).abs())
            .sum::<f64>()
            / 3.0
    }

    /// `(1/3) Σ |<A_i B_i> − <A_i B_{i+1}>|`
    pub fn lhs_category_ii(&self, s: &SettingsCategoryII) -> f64 {
        (0..3)
            .map(|i| {
                (self.correlation(&s.a[i], &s.b[i]) - self.correlation(&s.a[i], &s.b[(i + 1) % 3]))
                    .abs()
            })
            .sum::<f64>()
            / 3.0
    }

    pub fn lhs(&self, settings: &Settings) -> f64 {
        match settings {
            Settings::I(s) => self.lhs_category_i(s),
            Settings::II(s) => self.lhs_category_ii(s),
        }
    }

    /// Left-hand side, bound and `S = lhs − bound` for a setting bundle.
    pub fn evaluate_violation(&self, settings: &Settings) -> Result<ViolationReport> {
        let bound = settings.bound()?;
        let lhs = self.lhs(settings);
        Ok(ViolationReport {
            lhs,
            bound: bound.bound,
            s: lhs - bound.bound,
            ratio: (lhs > LHS_FLOOR).then(|| bound.bound / lhs),
            l: bound.l,
            extremal_angle: bound.extremal_angle,
            degenerate: bound.degenerate,
        })
    }
}

impl Default for CorrelationModel {
    fn default() -> Self {
        Self::pure()
    }
}

/// Quantum left-hand side against the nonlocal-realist bound. `S > 0` is a
/// violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationReport {
    pub lhs: f64,
    pub bound: f64,
    #[serde(rename = "S")]
    pub s: f64,
    /// `bound / lhs`; `None` when the left-hand side vanishes.
    pub ratio: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub extremal_angle: f64,
    pub degenerate: bool,
}

impl ViolationReport {
    pub fn violated(&self) -> bool {
        self.s > 0.0
    }
}
