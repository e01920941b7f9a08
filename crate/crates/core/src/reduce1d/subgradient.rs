//! Projected subgradient descent.
//!
//! Each step moves along `−(κL + σ U diag(ω′(μ)) Uᵀ)` with length `c/√t`
//! and projects back onto `{G ⪰ 0} ∩ {diag G = hρ}` by Dykstra's alternating
//! projections (eigenvalue clipping and diagonal overwrite).

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Algorithm, MinimizeOptions, Problem, SolverReport};
use crate::error::Result;
use crate::kinetic2d::omega2d_slope_unchecked;

const DYKSTRA_SWEEPS: usize = 50;
const WINDOW: usize = 25;

fn project_psd(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

fn project_diagonal(g: &DMatrix<f64>, target: &[f64]) -> DMatrix<f64> {
    let mut out = g.clone();
    for (i, &t) in target.iter().enumerate() {
        out[(i, i)] = t;
    }
    out
}

/// Dykstra's algorithm for the nearest point of `{G ⪰ 0} ∩ {diag G = hρ}`.
fn project_feasible(p: &Problem, y: &DMatrix<f64>) -> DMatrix<f64> {
    let m = y.nrows();
    let mut x = y.clone();
    let mut pa = DMatrix::zeros(m, m);
    let mut pb = DMatrix::zeros(m, m);
    let scale = p.mass().max(f64::MIN_POSITIVE);
    for _ in 0..DYKSTRA_SWEEPS {
        let a = project_psd(&(&x + &pa));
        pa = &x + &pa - &a;
        let next = project_diagonal(&(&a + &pb), &p.target);
        pb = &a + &pb - &next;
        let moved = (&next - &a).norm();
        x = next;
        if moved <= 1e-10 * scale {
            break;
        }
    }
    // exact feasibility: PSD part with the diagonal rescaled onto hρ
    p.fix_diagonal(&project_psd(&x))
}

fn subgradient(p: &Problem, g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let slopes = eig
        .eigenvalues
        .map(|mu| p.factors.spectral * omega2d_slope_unchecked(p.b3, mu.max(0.0)));
    &p.kinetic + &eig.eigenvectors * DMatrix::from_diagonal(&slopes) * eig.eigenvectors.transpose()
}

pub(super) fn solve(p: &Problem, opts: &MinimizeOptions) -> Result<(DMatrix<f64>, SolverReport)> {
    // rank-one state built on √ρ
    let w: Vec<f64> = p.target.iter().map(|t| t.sqrt()).collect();
    let m = w.len();
    let mut g = DMatrix::from_fn(m, m, |i, j| w[i] * w[j]);
    let (k, s) = p.energy(&g);
    let mut best = (k + s, g.clone());
    let mut history = vec![best.0];
    let mut iterations = 0;
    let mut converged = false;
    for t in 1..=opts.max_iter {
        let sub = subgradient(p, &g);
        let sn = sub.norm();
        if sn == 0.0 {
            converged = true;
            break;
        }
        let step = opts.step_scale / (t as f64).sqrt() * g.norm().max(p.mass()) / sn;
        g = project_feasible(p, &(&g - sub * step));
        iterations = t;
        let (k, s) = p.energy(&g);
        if k + s < best.0 {
            best = (k + s, g.clone());
        }
        history.push(best.0);
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            if (old - best.0).abs() <= opts.tol * best.0.abs() {
                converged = true;
                break;
            }
        }
    }
    Ok((
        best.1,
        SolverReport {
            algorithm: Algorithm::ProjectedSubgradient,
            iterations,
            converged,
            best_energy_history: history,
            lower_bound: None,
            relative_gap: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce1d::{laplacian, BoundaryCondition, ReductionFactors};

    #[test]
    fn dykstra_lands_in_both_sets() {
        let m = 6;
        let target = vec![0.1, 0.2, 0.3, 0.2, 0.1, 0.05];
        let p = Problem {
            b3: 1.0,
            factors: ReductionFactors { kinetic: 0.5, spectral: 1.0 },
            support: (0..m).collect(),
            target: target.clone(),
            kinetic: laplacian(m, 1.0, BoundaryCondition::Dirichlet) * 0.5,
        };
        let y = DMatrix::from_fn(m, m, |i, j| if i == j { -0.2 } else { 0.1 * ((i + j) as f64).sin() });
        let y = (&y + y.transpose()) * 0.5;
        let x = project_feasible(&p, &y);
        for i in 0..m {
            assert!((x[(i, i)] - target[i]).abs() < 1e-15);
        }
        let min = SymmetricEigen::new(x).eigenvalues.min();
        assert!(min >= -1e-12);
    }
}
