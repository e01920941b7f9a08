//! Translation-invariant relaxation for constant densities.
//!
//! A translation-invariant kernel is a symbol `m(k) ≥ 0` and the reduced
//! energy per length becomes
//! `(1/2π)∫ [κ k² m(k) + σ ω²ᵈ(b3, m(k))] dk` with `(1/2π)∫ m = ρ`.
//! Because `ω²ᵈ(b3, ·)` is piecewise linear with slopes `b3(2n+1)/2` on
//! pieces of width `b3/2π`, the pointwise Lagrangian problem is a bathtub
//! over items `(k, n)` of cost `κk² + |B|(2n+1)/2`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{check_field, ReductionFactors};
use crate::error::{domain, finite, positive, Result};
use crate::kinetic3d::{fermi_level, DEFAULT_FERMI_TOL};
use crate::landau::MagneticField;
use crate::numerics::{bisect_increasing, compensated_sum};

pub const DEFAULT_K_NODES: usize = 4001;
const KMAX_MARGIN: f64 = 1.25;

/// Uniform momentum nodes on `[−kmax, kmax]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl KGrid {
    pub fn uniform(kmax: f64, n: usize) -> Result<Self> {
        positive("kmax", kmax)?;
        if n < 3 {
            return Err(domain("n", "need at least 3 momentum nodes"));
        }
        let step = 2.0 * kmax / (n - 1) as f64;
        let nodes = (0..n).map(|i| -kmax + step * i as f64).collect();
        let weights = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * step } else { step })
            .collect();
        Ok(KGrid { nodes, weights })
    }

    /// Grid wide enough to hold every occupied momentum of the constant
    /// density `rho` with a 25% margin.
    pub fn auto(field: &MagneticField, rho: f64) -> Result<Self> {
        check_field(field)?;
        positive("rho", rho)?;
        let b = field.magnitude();
        let delta = fermi_level(b, rho, DEFAULT_FERMI_TOL)?.delta;
        let kmax = KMAX_MARGIN * (b / field.b3()) * delta.sqrt();
        KGrid::uniform(kmax, DEFAULT_K_NODES)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kmax(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxationResult {
    pub energy_per_length: f64,
    /// Lagrange multiplier of the density constraint (the bathtub threshold).
    pub multiplier: f64,
    pub rho: f64,
    /// Highest Landau index carrying any occupation.
    pub highest_level: usize,
    pub k_nodes: usize,
}

struct Items<'a> {
    grid: &'a KGrid,
    kinetic: f64,
    spacing: f64,
    /// Mass carried by one Landau piece per unit weight: `(1/2π)(b3/2π)`.
    unit: f64,
}

impl Items<'_> {
    fn base(&self, k: f64) -> f64 {
        self.kinetic * k * k + 0.5 * self.spacing
    }

    /// Number of pieces at momentum `k` with cost strictly below `lambda`.
    fn below(&self, k: f64, lambda: f64) -> usize {
        let x = (lambda - self.base(k)) / self.spacing;
        if x <= 0.0 {
            0
        } else {
            x.ceil() as usize
        }
    }

    fn mass_below(&self, lambda: f64) -> f64 {
        compensated_sum(
            self.grid
                .nodes
                .iter()
                .zip(&self.grid.weights)
                .map(|(&k, &w)| w * self.unit * self.below(k, lambda) as f64),
        )
    }
}

/// Minimizes the translation-invariant reduced energy for the constant
/// density `rho` (every entry must agree) on `k_grid`, or on
/// [`KGrid::auto`] when none is given.
pub fn multiplier_relaxation(
    rho: &[f64],
    field: &MagneticField,
    k_grid: Option<KGrid>,
) -> Result<RelaxationResult> {
    check_field(field)?;
    let first = *rho.first().ok_or_else(|| domain("rho", "empty density"))?;
    for &r in rho {
        finite("rho", r)?;
        if (r - first).abs() > 1e-12 * first.abs().max(f64::MIN_POSITIVE) {
            return Err(domain("rho", "density is not constant"));
        }
    }
    if first < 0.0 {
        return Err(domain("rho", "density is negative"));
    }
    let b = field.magnitude();
    let factors = ReductionFactors::from_field(field)?;
    if first == 0.0 {
        return Ok(RelaxationResult {
            energy_per_length: 0.0,
            multiplier: 0.5 * b,
            rho: 0.0,
            highest_level: 0,
            k_nodes: k_grid.map_or(0, |g| g.nodes.len()),
        });
    }
    let grid = match k_grid {
        Some(g) => g,
        None => KGrid::auto(field, first)?,
    };
    let items = Items {
        grid: &grid,
        kinetic: factors.kinetic,
        spacing: b,
        unit: field.b3() / (4.0 * PI * PI),
    };
    let cap = items.base(grid.kmax());
    if items.mass_below(cap) < first {
        return Err(domain("k_grid", "momentum range too narrow for this density"));
    }
    let (lo, hi) = bisect_increasing(|l| items.mass_below(l), first, 0.5 * b, cap, 200);
    // fully occupied pieces below `lo`, the remaining mass spread over ties
    let full = items.mass_below(lo);
    let tied = items.mass_below(hi) - full;
    let fraction = if tied > 0.0 { ((first - full) / tied).clamp(0.0, 1.0) } else { 0.0 };
    let mut terms = Vec::new();
    let mut highest = 0;
    for (&k, &w) in grid.nodes.iter().zip(&grid.weights) {
        let base = items.base(k);
        let n_full = items.below(k, lo);
        let n_hi = items.below(k, hi);
        for n in 0..n_hi {
            let occ = if n < n_full { 1.0 } else { fraction };
            if occ > 0.0 {
                terms.push(w * items.unit * occ * (base + b * n as f64));
                highest = highest.max(n);
            }
        }
    }
    Ok(RelaxationResult {
        energy_per_length: compensated_sum(terms),
        multiplier: 0.5 * (lo + hi),
        rho: first,
        highest_level: highest,
        k_nodes: grid.nodes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic3d::omega3d_canonical;

    #[test]
    fn matches_three_dimensional_energy() {
        for &(b3, rho) in &[(1.0, 0.2), (1.0, 1.0), (2.5, 0.7)] {
            let field = MagneticField::perpendicular(b3).unwrap();
            let r = multiplier_relaxation(&[rho; 4], &field, None).unwrap();
            let want = omega3d_canonical(b3, rho).unwrap();
            assert!((r.energy_per_length - want).abs() < 1e-3 * want, "{b3} {rho}");
        }
    }

    #[test]
    fn tilted_field_uses_the_magnitude() {
        let field = MagneticField::new(0.0, 0.6, 0.8).unwrap();
        let r = multiplier_relaxation(&[0.5], &field, None).unwrap();
        let want = omega3d_canonical(1.0, 0.5).unwrap();
        assert!((r.energy_per_length - want).abs() < 1e-3 * want);
    }

    #[test]
    fn dilute_limit_is_linear() {
        let field = MagneticField::perpendicular(1.5).unwrap();
        let rho = 1e-4;
        let r = multiplier_relaxation(&[rho], &field, None).unwrap();
        assert!((r.energy_per_length / rho - 0.75).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonconstant_and_narrow_grids() {
        let field = MagneticField::perpendicular(1.0).unwrap();
        assert!(multiplier_relaxation(&[1.0, 1.1], &field, None).is_err());
        assert!(multiplier_relaxation(&[], &field, None).is_err());
        let tiny = KGrid::uniform(0.1, 11).unwrap();
        assert!(multiplier_relaxation(&[1.0], &field, Some(tiny)).is_err());
    }
}
