//! Fermi level and kinetic energy per unit volume `ω³ᵈ(b, ρ)` of the 3d
//! electron gas in a field `(0, 0, b)`.
//!
//! The authoritative value is the bathtub integral
//! `(b/8π²) ∑_n ∫ (ε_n + k²) 1{ε_n + k² < δ} dk`. Two closed forms of the type
//! `δρ/6 + C ∑ ε_n (δ − ε_n)₊^{1/2}` circulate, with `C = b²/6π²` or
//! `C = b/6π²`; both are available as [`ClosedFormVariant`]s and
//! [`adjudicate_variants`] decides which one reproduces the integral.
//! Only `C = b/6π²` does, see [`CANONICAL_VARIANT`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, non_negative, positive, Error, Result};
use crate::numerics::{adaptive_simpson, bisect_increasing, compensated_sum};

/// Default relative tolerance of the Fermi-level solver.
pub const DEFAULT_FERMI_TOL: f64 = 1e-12;

/// Largest number of Landau levels a single evaluation may visit.
const MAX_LEVELS: f64 = 1e8;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiLevelSolution {
    pub delta: f64,
    /// Number of levels with `ε_n < δ`.
    pub occupied_levels: usize,
    /// `|g(δ) − 2π²ρ/b|`.
    pub residual: f64,
}

fn level(b: f64, n: usize) -> f64 {
    b * (2 * n + 1) as f64
}

/// Number of `n` with `b(2n+1) < δ`.
pub fn count_levels_below(b: f64, delta: f64) -> usize {
    if delta <= b {
        return 0;
    }
    let mut n = ((delta / b - 1.0) / 2.0).ceil().max(0.0) as usize;
    while n > 0 && level(b, n - 1) >= delta {
        n -= 1;
    }
    while level(b, n) < delta {
        n += 1;
    }
    n
}

/// `g(δ) = ∑_n (δ − b(2n+1))₊^{1/2}`, strictly increasing for `δ > b`.
pub fn level_sum(b: f64, delta: f64) -> f64 {
    let count = count_levels_below(b, delta);
    compensated_sum((0..count).map(|n| (delta - level(b, n)).sqrt()))
}

/// Solves `g(δ) = 2π²ρ/b` by bisection.
///
/// The bracket is `[b, b + min((2π²ρ/b)², (6π²ρ)^{2/3})]`: both upper ends
/// are admissible since `g(δ) ≥ (δ − b)^{1/2}` and
/// `g(δ) ≥ (δ − b)^{3/2}/(3b)`, and the second keeps the number of visited
/// levels bounded as `b → 0`.
pub fn fermi_level(b: f64, rho: f64, tol: f64) -> Result<FermiLevelSolution> {
    positive("b", b)?;
    non_negative("rho", rho)?;
    positive("tol", tol)?;
    if rho == 0.0 {
        return Ok(FermiLevelSolution {
            delta: b,
            occupied_levels: 0,
            residual: 0.0,
        });
    }
    let target = 2.0 * PI * PI * rho / b;
    let width = (target * target).min((6.0 * PI * PI * rho).powf(2.0 / 3.0));
    let mut hi = b + width;
    if hi <= b {
        return Err(domain(
            "rho",
            format!("density {rho} too small to resolve above the lowest level b = {b}"),
        ));
    }
    if (hi / b - 1.0) / 2.0 > MAX_LEVELS {
        return Err(domain(
            "b",
            format!("field {b} too small: more than {MAX_LEVELS:e} occupied levels at rho = {rho}"),
        ));
    }
    // guard the bracket against rounding in the bound
    while level_sum(b, hi) < target {
        hi = b + 2.0 * (hi - b);
    }
    let (lo, hi) = bisect_increasing(|d| level_sum(b, d), target, b, hi, MAX_BISECTIONS);
    let r_lo = (level_sum(b, lo) - target).abs();
    let r_hi = (level_sum(b, hi) - target).abs();
    let (delta, residual) = if r_lo < r_hi { (lo, r_lo) } else { (hi, r_hi) };
    let collapsed = 0.5 * (lo + hi) <= lo || 0.5 * (lo + hi) >= hi;
    if residual > tol * target && !collapsed {
        return Err(Error::NoConvergence(format!(
            "Fermi level bisection stopped with residual {residual:e} (target {target})"
        )));
    }
    Ok(FermiLevelSolution {
        delta,
        occupied_levels: count_levels_below(b, delta),
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormVariant {
    /// Prefactor `C = b²/6π²`.
    PropForm,
    /// Prefactor `C = b/6π²`.
    ProofForm,
}

impl ClosedFormVariant {
    pub const ALL: [ClosedFormVariant; 2] = [ClosedFormVariant::PropForm, ClosedFormVariant::ProofForm];

    pub fn prefactor(self, b: f64) -> f64 {
        match self {
            ClosedFormVariant::PropForm => b * b / (6.0 * PI * PI),
            ClosedFormVariant::ProofForm => b / (6.0 * PI * PI),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClosedFormVariant::PropForm => "prop_form",
            ClosedFormVariant::ProofForm => "proof_form",
        }
    }
}

/// The closed form that reproduces the bathtub integral (confirmed by
/// [`adjudicate_variants`] in the test suites).
pub const CANONICAL_VARIANT: ClosedFormVariant = ClosedFormVariant::ProofForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Omega3dMethod {
    Oracle,
    Closed(ClosedFormVariant),
}

impl Omega3dMethod {
    pub fn label(self) -> &'static str {
        match self {
            Omega3dMethod::Oracle => "oracle",
            Omega3dMethod::Closed(v) => v.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kinetic3dResult {
    pub omega: f64,
    pub fermi: FermiLevelSolution,
    pub method: Omega3dMethod,
    /// Contribution of each occupied level. For the closed forms these are
    /// the terms `C ε_n (δ − ε_n)^{1/2}`, without the common `δρ/6`.
    pub per_level_contributions: Vec<f64>,
}

/// `∫_{−s}^{s} (ε + k²) dk = 2εs + (2/3)s³`.
fn level_integral(eps: f64, s: f64) -> f64 {
    2.0 * eps * s + 2.0 / 3.0 * s * s * s
}

const CROSS_CHECK_TOL: f64 = 1e-10;

/// Bathtub-integral value of `ω³ᵈ(b, ρ)`.
///
/// Each level integral is evaluated both from its antiderivative and by
/// adaptive quadrature; a disagreement beyond `1e-10` relative is reported
/// as [`Error::CrossCheck`].
pub fn omega3d_oracle(b: f64, rho: f64) -> Result<Kinetic3dResult> {
    let fermi = fermi_level(b, rho, DEFAULT_FERMI_TOL)?;
    let scale = b / (8.0 * PI * PI);
    let mut contributions = Vec::with_capacity(fermi.occupied_levels);
    for n in 0..fermi.occupied_levels {
        let eps = level(b, n);
        let s = (fermi.delta - eps).sqrt();
        let exact = level_integral(eps, s);
        let quad = adaptive_simpson(|k| eps + k * k, -s, s, 1e-13).ok_or_else(|| {
            Error::CrossCheck(format!("quadrature of level {n} did not converge"))
        })?;
        if (quad - exact).abs() > CROSS_CHECK_TOL * exact.abs() {
            return Err(Error::CrossCheck(format!(
                "level {n}: antiderivative {exact} vs quadrature {quad}"
            )));
        }
        contributions.push(scale * exact);
    }
    Ok(Kinetic3dResult {
        omega: compensated_sum(contributions.iter().copied()),
        fermi,
        method: Omega3dMethod::Oracle,
        per_level_contributions: contributions,
    })
}

/// `δρ/6 + C ∑ ε_n (δ − ε_n)₊^{1/2}` for the chosen prefactor `C`.
pub fn omega3d_closed(b: f64, rho: f64, variant: ClosedFormVariant) -> Result<Kinetic3dResult> {
    let fermi = fermi_level(b, rho, DEFAULT_FERMI_TOL)?;
    let c = variant.prefactor(b);
    let contributions: Vec<f64> = (0..fermi.occupied_levels)
        .map(|n| {
            let eps = level(b, n);
            c * eps * (fermi.delta - eps).sqrt()
        })
        .collect();
    let omega = if rho == 0.0 {
        0.0
    } else {
        fermi.delta * rho / 6.0 + compensated_sum(contributions.iter().copied())
    };
    Ok(Kinetic3dResult {
        omega,
        fermi,
        method: Omega3dMethod::Closed(variant),
        per_level_contributions: contributions,
    })
}

pub fn omega3d(b: f64, rho: f64, method: Omega3dMethod) -> Result<Kinetic3dResult> {
    match method {
        Omega3dMethod::Oracle => omega3d_oracle(b, rho),
        Omega3dMethod::Closed(v) => omega3d_closed(b, rho, v),
    }
}

/// `ω³ᵈ(b, ρ)` in the canonical closed form.
pub fn omega3d_canonical(b: f64, rho: f64) -> Result<f64> {
    Ok(omega3d_closed(b, rho, CANONICAL_VARIANT)?.omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantAgreement {
    pub variant: ClosedFormVariant,
    /// Largest `|closed − oracle| / |oracle|` over the test points.
    pub max_relative_deviation: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjudicationReport {
    pub points: usize,
    pub tolerance: f64,
    pub variants: Vec<VariantAgreement>,
    /// The unique matching variant, if exactly one matches on all points.
    pub canonical: Option<ClosedFormVariant>,
}

/// Compares both closed forms with the oracle on `points = [(b, ρ)]`.
pub fn adjudicate_variants(points: &[(f64, f64)], tolerance: f64) -> Result<AdjudicationReport> {
    if points.is_empty() {
        return Err(domain("points", "need at least one (b, rho) point"));
    }
    let mut worst = [0.0_f64; 2];
    for &(b, rho) in points {
        let oracle = omega3d_oracle(b, rho)?.omega;
        for (i, v) in ClosedFormVariant::ALL.iter().enumerate() {
            let closed = omega3d_closed(b, rho, *v)?.omega;
            let dev = (closed - oracle).abs();
            let rel = if oracle == 0.0 {
                if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                dev / oracle.abs()
            };
            worst[i] = worst[i].max(rel);
        }
    }
    let variants: Vec<VariantAgreement> = ClosedFormVariant::ALL
        .iter()
        .zip(worst)
        .map(|(&variant, w)| VariantAgreement {
            variant,
            max_relative_deviation: w,
            matches: w <= tolerance,
        })
        .collect();
    let matching: Vec<_> = variants.iter().filter(|v| v.matches).collect();
    let canonical = if matching.len() == 1 {
        Some(matching[0].variant)
    } else {
        None
    };
    Ok(AdjudicationReport {
        points: points.len(),
        tolerance,
        variants,
        canonical,
    })
}

/// Lower end `(2π⁴ρ²)^{1/3}` of the single-level regime.
pub fn single_level_threshold(rho: f64) -> f64 {
    (2.0 * PI.powi(4) * rho * rho).cbrt()
}

/// Closed form in the regime `b > (2π⁴ρ²)^{1/3}` where only the lowest
/// level is occupied: `δ = b + (2π²ρ/b)²`, `ω = δρ/6 + C·b·(2π²ρ/b)` with the
/// canonical prefactor.
pub fn omega3d_largeb(b: f64, rho: f64) -> Result<Kinetic3dResult> {
    positive("b", b)?;
    non_negative("rho", rho)?;
    let threshold = single_level_threshold(rho);
    if b <= threshold {
        return Err(Error::Precondition(format!(
            "single-level regime needs b > (2π⁴ρ²)^(1/3) = {threshold} at rho = {rho}, got b = {b}"
        )));
    }
    if rho == 0.0 {
        return omega3d_closed(b, rho, CANONICAL_VARIANT);
    }
    let s = 2.0 * PI * PI * rho / b;
    let delta = b + s * s;
    let contribution = CANONICAL_VARIANT.prefactor(b) * b * s;
    Ok(Kinetic3dResult {
        omega: delta * rho / 6.0 + contribution,
        fermi: FermiLevelSolution {
            delta,
            occupied_levels: count_levels_below(b, delta),
            residual: ((delta - b).sqrt() - s).abs(),
        },
        method: Omega3dMethod::Closed(CANONICAL_VARIANT),
        per_level_contributions: vec![contribution],
    })
}

/// Candidate values for `lim_{b→0} ω³ᵈ(b, ρ)/ρ^{5/3}`.
pub fn small_field_candidates() -> [(&'static str, f64); 3] {
    [
        ("(3π²)^(2/3)/3", (3.0 * PI * PI).powf(2.0 / 3.0) / 3.0),
        ("π^(4/3)/6^(1/3)", PI.powf(4.0 / 3.0) / 6f64.cbrt()),
        ("(3/10)(6π²)^(2/3)", 0.3 * (6.0 * PI * PI).powf(2.0 / 3.0)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallFieldEstimate {
    pub b: f64,
    /// `ω³ᵈ(b, ρ)/ρ^{5/3}` from the oracle.
    pub ratio: f64,
    /// `δρ/6`.
    pub fermi_term: f64,
    /// `(b/6π²) ∑ ε_n (δ − ε_n)^{1/2}`, the remainder under the canonical prefactor.
    pub remainder_canonical: f64,
    /// The same sum with prefactor `b²/6π²`.
    pub remainder_prop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateDistance {
    pub label: &'static str,
    pub value: f64,
    pub relative_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallFieldReport {
    pub rho: f64,
    pub estimates: Vec<SmallFieldEstimate>,
    /// Estimate at the smallest field.
    pub constant: f64,
    /// Relative change between the last two estimates.
    pub last_relative_change: f64,
    pub candidates: Vec<CandidateDistance>,
    /// The unique candidate within `match_tolerance`, if any.
    pub matched: Option<&'static str>,
    pub match_tolerance: f64,
}

/// Evaluates the oracle along a strictly decreasing field sequence and
/// compares the last ratio `ω/ρ^{5/3}` with the candidate constants.
pub fn omega3d_smallb_limit(rho: f64, b_sequence: &[f64]) -> Result<SmallFieldReport> {
    positive("rho", rho)?;
    if b_sequence.len() < 2 {
        return Err(domain("b_sequence", "need at least two field values"));
    }
    for &b in b_sequence {
        positive("b_sequence", b)?;
    }
    if b_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("b_sequence", "field values must be strictly decreasing"));
    }
    let scale = rho.powf(5.0 / 3.0);
    let mut estimates = Vec::with_capacity(b_sequence.len());
    for &b in b_sequence {
        let r = omega3d_oracle(b, rho)?;
        let fermi_term = r.fermi.delta * rho / 6.0;
        let sum = compensated_sum((0..r.fermi.occupied_levels).map(|n| {
            let eps = level(b, n);
            eps * (r.fermi.delta - eps).sqrt()
        }));
        estimates.push(SmallFieldEstimate {
            b,
            ratio: r.omega / scale,
            fermi_term,
            remainder_canonical: b / (6.0 * PI * PI) * sum,
            remainder_prop: b * b / (6.0 * PI * PI) * sum,
        });
    }
    let k = estimates.len();
    let constant = estimates[k - 1].ratio;
    let last_relative_change = (constant - estimates[k - 2].ratio).abs() / constant.abs();
    let match_tolerance = 0.01;
    let candidates: Vec<CandidateDistance> = small_field_candidates()
        .iter()
        .map(|&(label, value)| CandidateDistance {
            label,
            value,
            relative_distance: (constant - value).abs() / value,
        })
        .collect();
    let close: Vec<_> = candidates
        .iter()
        .filter(|c| c.relative_distance <= match_tolerance)
        .collect();
    let matched = if close.len() == 1 { Some(close[0].label) } else { None };
    Ok(SmallFieldReport {
        rho,
        estimates,
        constant,
        last_relative_change,
        candidates,
        matched,
        match_tolerance,
    })
}
