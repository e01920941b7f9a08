//! Dual ascent on the diagonal multiplier.
//!
//! For a multiplier `v` the Lagrangian minimum over `G ⪰ 0` is attained on
//! the eigenvectors `u_p` of `H(v) = κL − diag(v)` and equals
//! `D(v) = (b3/2π) ∑_p ∑_n min(0, e_p + σ b3 (2n+1)/2) + ∑_i v_i hρ_i`,
//! a concave lower bound of the primal infimum. Replacing `min(0, x)` by
//! `−T ln(1 + e^{−x/T})` gives a smooth minorant `D_T` whose gradient is
//! `hρ_i − G_T(v)_{ii}` with `G_T = (b3/2π) ∑_p n_p u_p u_pᵀ` and Fermi–Dirac
//! occupations `n_p`. `D_T` is maximized by L-BFGS while `T` is lowered;
//! primal iterates are `G_T` rescaled to the exact diagonal.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Algorithm, MinimizeOptions, Problem, SolverReport};
use crate::error::Result;

const MEMORY: usize = 12;
const COOLING: f64 = 0.2;
/// Lowest temperature, relative to the level spacing `σ b3`.
const FINAL_TEMPERATURE: f64 = 1e-7;
/// Occupations of states more than this many `T` above threshold are dropped.
const CUTOFF: f64 = 40.0;
/// Relative gradient accuracy per unit of `T/(σ b3)` required in each stage.
const STAGE_ACCURACY: f64 = 0.05;

struct Evaluation {
    smooth: f64,
    sharp: f64,
    gradient: Vec<f64>,
    vectors: DMatrix<f64>,
    occupations: Vec<f64>,
}

fn fermi(x: f64, t: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x / t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + (x / t).exp())
    }
}

/// `−T ln(1 + e^{−x/T})`, a smooth lower approximation of `min(0, x)`.
fn soft_min(x: f64, t: f64) -> f64 {
    x.min(0.0) - t * (-x.abs() / t).exp().ln_1p()
}

fn evaluate(p: &Problem, v: &[f64], t: f64) -> Evaluation {
    let m = v.len();
    let mut h = p.kinetic.clone();
    for i in 0..m {
        h[(i, i)] -= v[i];
    }
    let eig = SymmetricEigen::new(h);
    let half = 0.5 * p.factors.spectral * p.b3;
    let pref = p.b3 / (2.0 * PI);
    let mut smooth = 0.0;
    let mut sharp = 0.0;
    let mut occupations = Vec::with_capacity(m);
    for &e in eig.eigenvalues.iter() {
        let mut occ = 0.0;
        let mut n = 0usize;
        loop {
            let x = e + half * (2 * n + 1) as f64;
            if x > CUTOFF * t {
                break;
            }
            occ += fermi(x, t);
            smooth += soft_min(x, t);
            sharp += x.min(0.0);
            n += 1;
        }
        occupations.push(occ);
    }
    let linear: f64 = v.iter().zip(&p.target).map(|(a, b)| a * b).sum();
    let mut gradient = p.target.clone();
    for (q, &occ) in occupations.iter().enumerate() {
        if occ == 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(q);
        for i in 0..m {
            gradient[i] -= pref * occ * col[i] * col[i];
        }
    }
    Evaluation {
        smooth: pref * smooth + linear,
        sharp: pref * sharp + linear,
        gradient,
        vectors: eig.eigenvectors,
        occupations,
    }
}

fn primal(p: &Problem, ev: &Evaluation) -> DMatrix<f64> {
    let pref = p.b3 / (2.0 * PI);
    let scaled = DMatrix::from_fn(ev.vectors.nrows(), ev.vectors.ncols(), |i, q| {
        ev.vectors[(i, q)] * (pref * ev.occupations[q]).sqrt()
    });
    &scaled * scaled.transpose()
}

/// Constant multiplier `c` with `Tr G_T(c·1) = mass`.
fn initial_shift(p: &Problem, t: f64) -> f64 {
    let m = p.target.len();
    let lam = SymmetricEigen::new(p.kinetic.clone()).eigenvalues;
    let half = 0.5 * p.factors.spectral * p.b3;
    let pref = p.b3 / (2.0 * PI);
    let mass = p.mass();
    let trace = |c: f64| -> f64 {
        let mut acc = 0.0;
        for &l in lam.iter() {
            let mut n = 0usize;
            loop {
                let x = l - c + half * (2 * n + 1) as f64;
                if x > CUTOFF * t {
                    break;
                }
                acc += fermi(x, t);
                n += 1;
            }
        }
        pref * acc
    };
    let lmin = lam.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = lmin + half - CUTOFF * t - (m as f64).ln() * t;
    let mut step = half.max(t);
    let mut hi = lo + step;
    while trace(hi) < mass {
        lo = hi;
        step *= 2.0;
        hi += step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if trace(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted(a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    a.iter().zip(b).zip(d).map(|((x, y), w)| x * y * w).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// L-BFGS ascent on `D_T` from `v`; returns the final evaluation.
fn ascend(p: &Problem, v: &mut Vec<f64>, t: f64, budget: usize, iterations: &mut usize) -> Evaluation {
    // coarse stages only need a rough multiplier
    let spacing = p.factors.spectral * p.b3;
    let gtol = (STAGE_ACCURACY * t / spacing).max(1e-10) * max_abs(&p.target);
    let mut cur = evaluate(p, v, t);
    let peak = max_abs(&p.target);
    let scale: Vec<f64> = p.target.iter().map(|&x| peak / x.max(1e-300)).collect();
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut used = 0;
    while used < budget && max_abs(&cur.gradient) > gtol {
        // two-loop recursion on φ = −D_T, gradient −g; direction = H·g
        let mut q = cur.gradient.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, r) in memory.iter().rev() {
            let a = r * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        // diagonal preconditioner: the gradient entries scale like hρ_i
        let gamma = match memory.back() {
            Some((s, y, _)) => dot(s, y) / weighted(y, y, &scale),
            None => t / max_abs(&cur.gradient),
        };
        q.iter_mut().zip(&scale).for_each(|(qi, di)| *qi *= gamma * di);
        for ((s, y, r), a) in memory.iter().zip(alphas.iter().rev()) {
            let bta = r * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - bta) * si);
        }
        let mut d = q;
        let mut slope = dot(&cur.gradient, &d);
        if !(slope > 0.0) {
            memory.clear();
            let s = t / max_abs(&cur.gradient);
            d = cur.gradient.iter().map(|g| g * s).collect();
            slope = dot(&cur.gradient, &d);
        }
        // keep moves within a few level spacings
        let cap = 4.0 * p.factors.spectral * p.b3;
        let len = max_abs(&d);
        if len > cap {
            let s = cap / len;
            d.iter_mut().for_each(|x| *x *= s);
            slope *= s;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let ev = evaluate(p, &trial, t);
            used += 1;
            if ev.smooth >= cur.smooth + 1e-4 * step * slope {
                accepted = Some((trial, ev));
                break;
            }
            step *= 0.5;
        }
        *iterations += 1;
        let Some((trial, ev)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let s: Vec<f64> = trial.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
        // curvature pair of φ = −D_T
        let y: Vec<f64> = cur.gradient.iter().zip(&ev.gradient).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        *v = trial;
        cur = ev;
    }
    cur
}

pub(super) fn solve(p: &Problem, opts: &MinimizeOptions) -> Result<(DMatrix<f64>, SolverReport)> {
    let spacing = p.factors.spectral * p.b3;
    let mut t = 0.5 * spacing;
    let t_min = FINAL_TEMPERATURE * spacing;
    let stages = ((t / t_min).ln() / (1.0 / COOLING).ln()).ceil() as usize + 1;
    let stage_budget = (opts.max_iter / stages).max(20);
    let c = initial_shift(p, t);
    let mut v = vec![c; p.target.len()];
    let mut iterations = 0;
    // the rank-one state on √ρ is feasible and seeds the primal side
    let w: Vec<f64> = p.target.iter().map(|t| t.sqrt()).collect();
    let seed = DMatrix::from_fn(w.len(), w.len(), |i, j| w[i] * w[j]);
    let (kin, spec) = p.energy(&seed);
    let mut best = Some((kin + spec, seed));
    let mut lower = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut converged = false;
    let mut gap;
    loop {
        let ev = ascend(p, &mut v, t, stage_budget, &mut iterations);
        lower = lower.max(ev.sharp);
        let g = p.fix_diagonal(&primal(p, &ev));
        let (kin, spec) = p.energy(&g);
        let e = kin + spec;
        if best.as_ref().map_or(true, |(b, _)| e < *b) {
            best = Some((e, g));
        }
        let best_e = best.as_ref().unwrap().0;
        history.push(best_e);
        gap = (best_e - lower) / best_e.abs().max(f64::MIN_POSITIVE);
        if gap <= opts.gap_tol {
            converged = true;
            break;
        }
        if t <= t_min || iterations >= opts.max_iter {
            break;
        }
        t = (t * COOLING).max(t_min);
    }
    let (_, g) = best.unwrap();
    Ok((
        g,
        SolverReport {
            algorithm: Algorithm::Dual,
            iterations,
            converged,
            best_energy_history: history,
            lower_bound: Some(lower),
            relative_gap: Some(gap),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_minorant() {
        for &t in &[1e-3, 0.1, 1.0] {
            for &x in &[-5.0, -0.01, 0.0, 0.02, 3.0] {
                let s = soft_min(x, t);
                assert!(s <= x.min(0.0));
                assert!(s >= x.min(0.0) - t * 2f64.ln() - 1e-15);
            }
        }
        assert!((fermi(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(fermi(1e3, 1e-3), 0.0);
        assert_eq!(fermi(-1e3, 1e-3), 1.0);
        // derivative of soft_min is the Fermi occupation
        let (x, t, e) = (0.3, 0.2, 1e-6);
        let num = (soft_min(x + e, t) - soft_min(x - e, t)) / (2.0 * e);
        assert!((num - fermi(x, t)).abs() < 1e-8);
    }
}
