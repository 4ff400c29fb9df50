//! Checks of the algebraic steps that precede the final bounds, evaluated on
//! finite weighted tables of ±1 outcomes.
//!
//! Each row of an [`OutcomeTable`] is one hidden-variable value with its
//! probability and the outcomes `A`, `B`, `B2` it assigns. Averages over the
//! table stand in for subensemble averages.

use std::io::Read;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on every inequality check.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub weight: f64,
    #[serde(rename = "A")]
    pub a: i8,
    #[serde(rename = "B")]
    pub b: i8,
    #[serde(rename = "B2")]
    pub b2: i8,
}

/// A validated weighted outcome table.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    entries: Vec<Outcome>,
}

fn is_sign(x: i8) -> bool {
    x == 1 || x == -1
}

impl OutcomeTable {
    pub fn new(entries: Vec<Outcome>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("table is empty".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::Domain(format!("row {i}: weight {} is not positive", e.weight)));
            }
            if !(is_sign(e.a) && is_sign(e.b) && is_sign(e.b2)) {
                return Err(Error::Domain(format!("row {i}: outcomes must be +1 or -1")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(OutcomeTable { entries })
    }

    /// Reads CSV with header `weight,A,B,B2`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Domain(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["weight", "A", "B", "B2"] {
            return Err(Error::Domain(format!(
                "expected header weight,A,B,B2, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let entries = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<Outcome>, _>>()
            .map_err(|e| Error::Domain(e.to_string()))?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[Outcome] {
        &self.entries
    }

    fn mean(&self, f: impl Fn(&Outcome) -> f64) -> f64 {
        self.entries.iter().map(|e| e.weight * f(e)).sum()
    }

    /// Random table of at most `max_rows` rows with normalized exponential
    /// weights and independent random signs.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_rows: usize) -> Self {
        let n = rng.gen_range(1..=max_rows.max(1));
        let sign = |rng: &mut R| if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut entries: Vec<Outcome> = (0..n)
            .map(|_| Outcome {
                // Exponential deviates normalize to a flat Dirichlet draw.
                weight: -(1.0 - rng.gen::<f64>()).ln() + 1e-9,
                a: sign(rng),
                b: sign(rng),
                b2: sign(rng),
            })
            .collect();
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        for e in &mut entries {
            e.weight /= total;
        }
        // Push the rounding residue onto the largest weight.
        let residue = 1.0 - entries.iter().map(|e| e.weight).sum::<f64>();
        if let Some(big) = entries.iter_mut().max_by(|x, y| x.weight.total_cmp(&y.weight)) {
            big.weight += residue;
        }
        OutcomeTable::new(entries).expect("generated table is valid")
    }
}

/// `−1 + |A + B| = AB = 1 − |A − B|` for outcomes in `{−1, +1}`.
pub fn check_pointwise_identity(a: i8, b: i8) -> Result<bool> {
    if !(is_sign(a) && is_sign(b)) {
        return Err(Error::Domain(format!("outcomes ({a}, {b}) must be +1 or -1")));
    }
    let (a, b) = (a as i32, b as i32);
    let ab = a * b;
    Ok(-1 + (a + b).abs() == ab && ab == 1 - (a - b).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubensembleReport {
    /// `|Ā + B̄|`
    pub lhs_plus: f64,
    /// `|Ā − B̄|`
    pub lhs_minus: f64,
    /// `1 + mean(AB)`
    pub rhs_plus: f64,
    /// `1 − mean(AB)`
    pub rhs_minus: f64,
    pub holds: bool,
}

/// `|Ā ± B̄| ≤ 1 ± mean(AB)`, both signs.
pub fn check_subensemble_inequality(t: &OutcomeTable) -> SubensembleReport {
    let a = t.mean(|e| e.a as f64);
    let b = t.mean(|e| e.b as f64);
    let ab = t.mean(|e| (e.a * e.b) as f64);
    let lhs_plus = (a + b).abs();
    let lhs_minus = (a - b).abs();
    let rhs_plus = 1.0 + ab;
    let rhs_minus = 1.0 - ab;
    SubensembleReport {
        lhs_plus,
        lhs_minus,
        rhs_plus,
        rhs_minus,
        holds: lhs_plus <= rhs_plus + SLACK && lhs_minus <= rhs_minus + SLACK,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleReport {
    /// `|mean(AB) + mean(AB2)|`
    pub lhs_plus: f64,
    /// `2 − |B̄ − B̄2|`
    pub rhs_plus: f64,
    /// `|mean(AB) − mean(AB2)|`
    pub lhs_minus: f64,
    /// `2 − |B̄ + B̄2|`
    pub rhs_minus: f64,
    pub holds: bool,
}

/// `|mean(AB) ± mean(AB2)| ≤ 2 − |B̄ ∓ B̄2|`, both signs.
pub fn check_triangle_step(t: &OutcomeTable) -> TriangleReport {
    let ab = t.mean(|e| (e.a * e.b) as f64);
    let ab2 = t.mean(|e| (e.a * e.b2) as f64);
    let b = t.mean(|e| e.b as f64);
    let b2 = t.mean(|e| e.b2 as f64);
    let lhs_plus = (ab + ab2).abs();
    let rhs_plus = 2.0 - (b - b2).abs();
    let lhs_minus = (ab - ab2).abs();
    let rhs_minus = 2.0 - (b + b2).abs();
    TriangleReport {
        lhs_plus,
        rhs_plus,
        lhs_minus,
        rhs_minus,
        holds: lhs_plus <= rhs_plus + SLACK && lhs_minus <= rhs_minus + SLACK,
    }
}
