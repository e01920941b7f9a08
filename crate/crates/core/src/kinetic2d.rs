//! Kinetic energy per unit surface `ω²ᵈ(b, ρ)` of the 2d electron gas in a
//! perpendicular field `b`.

use std::f64::consts::PI;

use crate::error::{non_negative, positive, Result};
use crate::occupation::bathtub_energy;

const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinetic2dResult {
    pub omega: f64,
    pub b: f64,
    pub rho: f64,
    /// `⌊2πρ/b⌋`, the number of completely filled Landau levels.
    pub filled_levels: u64,
    /// `{2πρ/b}`, the filling of the partially occupied level.
    pub fractional_occupation: f64,
}

/// Splits `x ≥ 0` into `(⌊x⌋, x − ⌊x⌋)`, snapping fractional parts within
/// `1e-12` of 0 or 1 onto the integer.
pub fn fractional_part(x: f64) -> (u64, f64) {
    let whole = x.floor();
    let frac = x - whole;
    if frac < SNAP {
        (whole as u64, 0.0)
    } else if frac > 1.0 - SNAP {
        (whole as u64 + 1, 0.0)
    } else {
        (whole as u64, frac)
    }
}

/// Filling factor `t = 2πρ/b` (number of occupied levels, counting fractions).
pub fn filling_factor(b: f64, rho: f64) -> f64 {
    2.0 * PI * rho / b
}

fn check(b: f64, rho: f64) -> Result<()> {
    positive("b", b)?;
    non_negative("rho", rho)?;
    Ok(())
}

/// `πρ² + (b²/4π)·{t}(1 − {t})` without input validation.
pub(crate) fn omega2d_unchecked(b: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let (_, f) = fractional_part(filling_factor(b, rho));
    PI * rho * rho + b * b / (4.0 * PI) * f * (1.0 - f)
}

/// Right derivative `∂ω²ᵈ/∂ρ = (b/2)(2m + 1)` on segment `m = ⌊2πρ/b⌋`.
pub(crate) fn omega2d_slope_unchecked(b: f64, rho: f64) -> f64 {
    let (m, _) = fractional_part(filling_factor(b, rho));
    0.5 * b * (2 * m + 1) as f64
}

/// Closed form `ω²ᵈ(b,ρ) = πρ² + (b²/4π){2πρ/b}(1 − {2πρ/b})`.
pub fn omega2d_closed(b: f64, rho: f64) -> Result<Kinetic2dResult> {
    check(b, rho)?;
    let (filled_levels, fractional_occupation) = fractional_part(filling_factor(b, rho));
    Ok(Kinetic2dResult {
        omega: omega2d_unchecked(b, rho),
        b,
        rho,
        filled_levels,
        fractional_occupation,
    })
}

/// `(b/4π)·∑ ε_n m*(n)` with `ε_n = b(2n+1)` and the bathtub filling of mass
/// `2πρ/b`: the defining minimization, evaluated level by level.
pub fn omega2d_bathtub_oracle(b: f64, rho: f64) -> Result<f64> {
    check(b, rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let t = filling_factor(b, rho);
    let count = t.ceil() as usize + 1;
    let levels: Vec<f64> = (0..count).map(|n| b * (2 * n + 1) as f64).collect();
    Ok(b / (4.0 * PI) * bathtub_energy(&levels, t)?)
}

/// Affine representation of `ω²ᵈ(b,·)` on one linear segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseSegment {
    /// Segment index `m = ⌊2πρ/b⌋`.
    pub segment: u64,
    /// `∂ω/∂ρ = (b/2)(2m+1)`.
    pub slope: f64,
    /// `ω` at `ρ = 0` of the extended line, `−(b²/4π)m(m+1)`.
    pub intercept: f64,
    /// Slope with respect to the filling factor, `(2m+1)b²/4π`.
    pub slope_in_filling: f64,
}

impl PiecewiseSegment {
    pub fn evaluate(&self, rho: f64) -> f64 {
        self.slope * rho + self.intercept
    }
}

/// The segment containing `ρ`; at a kink the upper segment is returned.
pub fn omega2d_piecewise_form(b: f64, rho: f64) -> Result<PiecewiseSegment> {
    check(b, rho)?;
    let (m, _) = fractional_part(filling_factor(b, rho));
    Ok(segment(b, m))
}

/// Segment `m` of `ω²ᵈ(b,·)`, valid for `2πρ/b ∈ [m, m+1]`.
pub fn segment(b: f64, m: u64) -> PiecewiseSegment {
    let mf = m as f64;
    PiecewiseSegment {
        segment: m,
        slope: 0.5 * b * (2.0 * mf + 1.0),
        intercept: -b * b / (4.0 * PI) * mf * (mf + 1.0),
        slope_in_filling: (2.0 * mf + 1.0) * b * b / (4.0 * PI),
    }
}
