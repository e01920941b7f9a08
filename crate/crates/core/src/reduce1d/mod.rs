//! The one-dimensional reduced problem: minimize
//! `E(G) = ½(b3²/|B|²) Tr(−ΔG) + (|B|/b3) ∑_j ω²ᵈ(b3, μ_j)` over positive
//! semidefinite density matrices `G` with prescribed density `ρ_G = ρ`.
//!
//! Kernels are stored as operator matrices in the orthonormal grid basis,
//! `G[i][j] = h·G(x_i, x_j)`, so the eigenvalues `μ_j` are occupation
//! numbers independent of the grid spacing and `ρ_G(x_i) = G[i][i]/h`.

mod dual;
mod relaxation;
mod subgradient;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;
use crate::kinetic2d::omega2d_unchecked;
use crate::landau::MagneticField;
use crate::numerics::compensated_sum;

pub use relaxation::{multiplier_relaxation, KGrid, RelaxationResult, DEFAULT_K_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Zero beyond both ends of the grid.
    Dirichlet,
    Periodic,
}

/// Three-point matrix of `−d²/dx²`, `tridiag(−1, 2, −1)/h²`.
pub fn laplacian(n: usize, h: f64, bc: BoundaryCondition) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    let c = 1.0 / (h * h);
    for i in 0..n {
        l[(i, i)] = 2.0 * c;
        if i + 1 < n {
            l[(i, i + 1)] = -c;
            l[(i + 1, i)] = -c;
        }
    }
    if bc == BoundaryCondition::Periodic && n > 2 {
        l[(0, n - 1)] = -c;
        l[(n - 1, 0)] = -c;
    }
    l
}

/// The two scalar factors through which the field enters the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionFactors {
    /// `½ b3²/|B|²`.
    pub kinetic: f64,
    /// `|B|/b3`.
    pub spectral: f64,
}

impl ReductionFactors {
    pub fn from_field(field: &MagneticField) -> Result<Self> {
        check_field(field)?;
        let r = field.b3() / field.magnitude();
        Ok(ReductionFactors {
            kinetic: 0.5 * r * r,
            spectral: 1.0 / r,
        })
    }
}

fn check_field(field: &MagneticField) -> Result<()> {
    if field.b1() != 0.0 {
        return Err(Error::Unsupported(format!(
            "the reduction needs b1 = 0, got b1 = {}",
            field.b1()
        )));
    }
    if field.b3() <= 0.0 {
        return Err(Error::Unsupported(format!(
            "the reduction needs b3 > 0, got b3 = {}",
            field.b3()
        )));
    }
    Ok(())
}

/// A positive semidefinite kernel on a 1d grid with its eigen-data.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix1D {
    grid: GridSpec,
    kernel: DMatrix<f64>,
    /// Descending.
    eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    eigenvectors: DMatrix<f64>,
}

impl DensityMatrix1D {
    /// Validates symmetry (to `1e-12` of the largest entry) and positivity
    /// (smallest eigenvalue `≥ −1e-10‖G‖`).
    pub fn from_kernel(grid: GridSpec, kernel: DMatrix<f64>) -> Result<Self> {
        let n = grid.len();
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(domain(
                "kernel",
                format!("expected a {n}×{n} matrix, got {}×{}", kernel.nrows(), kernel.ncols()),
            ));
        }
        if kernel.iter().any(|v| !v.is_finite()) {
            return Err(domain("kernel", "non-finite entry"));
        }
        let scale = kernel.amax();
        let asym = (&kernel - kernel.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(domain("kernel", format!("not symmetric (deviation {asym:e})")));
        }
        let sym = (&kernel + kernel.transpose()) * 0.5;
        let dm = Self::from_symmetric(grid, sym);
        let norm = dm.operator_norm();
        let min = dm.min_eigenvalue();
        if min < -1e-10 * norm {
            return Err(domain(
                "kernel",
                format!("not positive semidefinite (eigenvalue {min:e})"),
            ));
        }
        Ok(dm)
    }

    pub(crate) fn from_symmetric(grid: GridSpec, kernel: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(kernel.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(kernel.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        DensityMatrix1D {
            grid,
            kernel,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self::from_symmetric(grid, DMatrix::zeros(grid.len(), grid.len()))
    }

    /// `G = M|g⟩⟨g|` for a profile `g`, normalized internally to `h∑g² = 1`.
    pub fn rank_one(grid: GridSpec, profile: &[f64], mass: f64) -> Result<Self> {
        crate::error::non_negative("mass", mass)?;
        if profile.len() != grid.len() {
            return Err(domain("profile", "length differs from the grid"));
        }
        let norm2: f64 = grid.step() * profile.iter().map(|v| v * v).sum::<f64>();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(domain("profile", "profile must be nonzero and finite"));
        }
        let h = grid.step();
        let kernel = DMatrix::from_fn(grid.len(), grid.len(), |i, j| {
            h * mass * profile[i] * profile[j] / norm2
        });
        Ok(Self::from_symmetric(grid, kernel))
    }

    /// Diagonal kernel with density `ρ`.
    pub fn diagonal(grid: GridSpec, rho: &[f64]) -> Result<Self> {
        check_density(&grid, rho)?;
        let h = grid.step();
        let kernel = DMatrix::from_fn(grid.len(), grid.len(), |i, j| if i == j { h * rho[i] } else { 0.0 });
        Ok(Self::from_symmetric(grid, kernel))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// Eigenvalues `μ_j`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenfunction `g_j` normalized by `h∑|g_j(x_i)|² = 1`.
    pub fn eigenfunction(&self, j: usize) -> Vec<f64> {
        let s = 1.0 / self.grid.step().sqrt();
        self.eigenvectors.column(j).iter().map(|v| v * s).collect()
    }

    /// `ρ_G(x_i) = G[i][i]/h`.
    pub fn density(&self) -> Vec<f64> {
        let h = self.grid.step();
        (0..self.grid.len()).map(|i| self.kernel[(i, i)] / h).collect()
    }

    /// `Tr G`.
    pub fn mass(&self) -> f64 {
        compensated_sum((0..self.grid.len()).map(|i| self.kernel[(i, i)]))
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn check_density(grid: &GridSpec, rho: &[f64]) -> Result<()> {
    if rho.len() != grid.len() {
        return Err(domain(
            "rho",
            format!("expected {} density samples, got {}", grid.len(), rho.len()),
        ));
    }
    if let Some(v) = rho.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(domain("rho", format!("density must be finite and >= 0, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedEnergy {
    pub kinetic: f64,
    pub spectral: f64,
    pub total: f64,
    /// `max_i |ρ_G(x_i) − ρ(x_i)|` against the target density (0 when no
    /// target was given).
    pub constraint_violation: f64,
}

/// `Σ_j ω²ᵈ(b3, μ_j)` with eigenvalues below zero clipped.
pub(crate) fn spectral_sum(b3: f64, mu: impl IntoIterator<Item = f64>) -> f64 {
    compensated_sum(mu.into_iter().map(|m| omega2d_unchecked(b3, m.max(0.0))))
}

/// `Tr(L G)` for symmetric `L` and `G`.
pub(crate) fn trace_product(l: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    l.dot(g)
}

/// Energy with explicit factors.
pub fn energy_with_factors(
    g: &DensityMatrix1D,
    b3: f64,
    factors: ReductionFactors,
    bc: BoundaryCondition,
) -> Result<ReducedEnergy> {
    crate::error::positive("b3", b3)?;
    let norm = g.operator_norm();
    if g.min_eigenvalue() < -1e-10 * norm {
        return Err(domain(
            "G",
            format!("kernel has eigenvalue {:e} below tolerance", g.min_eigenvalue()),
        ));
    }
    let l = laplacian(g.grid.len(), g.grid.step(), bc);
    let kinetic = factors.kinetic * trace_product(&l, &g.kernel);
    let spectral = factors.spectral * spectral_sum(b3, g.eigenvalues.iter().copied());
    Ok(ReducedEnergy {
        kinetic,
        spectral,
        total: kinetic + spectral,
        constraint_violation: 0.0,
    })
}

/// `E(G)` for the field `(0, b2, b3)`.
pub fn energy(g: &DensityMatrix1D, field: &MagneticField, bc: BoundaryCondition) -> Result<ReducedEnergy> {
    let factors = ReductionFactors::from_field(field)?;
    energy_with_factors(g, field.b3(), factors, bc)
}

/// `max_i |ρ_G(x_i) − ρ(x_i)|`.
pub fn constraint_violation(g: &DensityMatrix1D, rho: &[f64]) -> Result<f64> {
    check_density(&g.grid, rho)?;
    Ok(g.density()
        .iter()
        .zip(rho)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Smoothed dual ascent on the diagonal multiplier with annealed
    /// temperature; returns a primal iterate and a certified lower bound.
    Dual,
    /// Projected subgradient descent with Dykstra projection onto
    /// `{G ⪰ 0} ∩ {diag G = hρ}`.
    ProjectedSubgradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub algorithm: Algorithm,
    /// Iteration budget (dual ascent steps or subgradient steps).
    pub max_iter: usize,
    /// Relative energy change over 25 iterations that stops the subgradient method.
    pub tol: f64,
    /// Largest accepted `max_i |ρ_G − ρ|`.
    pub feas_tol: f64,
    /// Relative duality gap that stops the dual method.
    pub gap_tol: f64,
    /// Step scale `c` of the subgradient steps `c/√t`.
    pub step_scale: f64,
    /// Replaces the factors derived from the field.
    pub factors: Option<ReductionFactors>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            algorithm: Algorithm::Dual,
            max_iter: 4000,
            tol: 1e-7,
            feas_tol: 1e-8,
            gap_tol: 1e-5,
            step_scale: 0.2,
            factors: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub converged: bool,
    /// Best energy found so far, recorded once per outer step; nonincreasing.
    pub best_energy_history: Vec<f64>,
    /// A proven lower bound on the infimum (dual method only).
    pub lower_bound: Option<f64>,
    /// `(E − lower_bound)/|E|` (dual method only).
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimization {
    pub density_matrix: DensityMatrix1D,
    pub energy: ReducedEnergy,
    pub report: SolverReport,
}

/// The problem restricted to the support of `ρ`.
pub(crate) struct Problem {
    pub b3: f64,
    pub factors: ReductionFactors,
    /// Grid indices carrying density.
    pub support: Vec<usize>,
    /// `hρ_i` on the support.
    pub target: Vec<f64>,
    /// `κ·L` restricted to the support.
    pub kinetic: DMatrix<f64>,
}

impl Problem {
    pub fn mass(&self) -> f64 {
        compensated_sum(self.target.iter().copied())
    }

    /// `κ Tr(L G) + σ Σ ω²ᵈ(b3, μ_j)` for a kernel on the support.
    pub fn energy(&self, g: &DMatrix<f64>) -> (f64, f64) {
        let kinetic = trace_product(&self.kinetic, g);
        let eig = SymmetricEigen::new(g.clone());
        let spectral = self.factors.spectral * spectral_sum(self.b3, eig.eigenvalues.iter().copied());
        (kinetic, spectral)
    }

    /// Rescales `G ↦ DGD` so that `diag G = hρ` exactly; rows with a
    /// vanishing diagonal receive `hρ_i` on the diagonal instead.
    pub fn fix_diagonal(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.target.len();
        let d: Vec<f64> = (0..m)
            .map(|i| {
                let gi = g[(i, i)];
                if gi > 1e-300 {
                    (self.target[i] / gi).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = DMatrix::from_fn(m, m, |i, j| d[i] * g[(i, j)] * d[j]);
        for i in 0..m {
            out[(i, i)] = self.target[i];
        }
        out
    }

    pub fn embed(&self, n: usize, g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut full = DMatrix::zeros(n, n);
        for (a, &i) in self.support.iter().enumerate() {
            for (c, &j) in self.support.iter().enumerate() {
                full[(i, j)] = g[(a, c)];
            }
        }
        full
    }
}

/// Approximate minimizer of `E` over `{G ⪰ 0, ρ_G = ρ}`.
///
/// Densities below `1e-13` of the maximum are treated as zero. The result is
/// the best iterate found; `report.converged` tells whether the stopping
/// rule was met within the budget.
pub fn minimize(
    rho: &[f64],
    grid: GridSpec,
    field: &MagneticField,
    bc: BoundaryCondition,
    opts: &MinimizeOptions,
) -> Result<Minimization> {
    check_density(&grid, rho)?;
    check_field(field)?;
    let factors = match opts.factors {
        Some(f) => f,
        None => ReductionFactors::from_field(field)?,
    };
    let h = grid.step();
    let peak = rho.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..grid.len()).filter(|&i| rho[i] > 1e-13 * peak && rho[i] > 0.0).collect();
    if support.is_empty() {
        let g = DensityMatrix1D::zero(grid);
        let e = energy_with_factors(&g, field.b3(), factors, bc)?;
        return Ok(Minimization {
            density_matrix: g,
            energy: e,
            report: SolverReport {
                algorithm: opts.algorithm,
                iterations: 0,
                converged: true,
                best_energy_history: vec![0.0],
                lower_bound: Some(0.0),
                relative_gap: Some(0.0),
            },
        });
    }
    let full_l = laplacian(grid.len(), h, bc);
    let m = support.len();
    let kinetic = DMatrix::from_fn(m, m, |a, c| factors.kinetic * full_l[(support[a], support[c])]);
    let problem = Problem {
        b3: field.b3(),
        factors,
        target: support.iter().map(|&i| h * rho[i]).collect(),
        support,
        kinetic,
    };
    let (g_support, report) = match opts.algorithm {
        Algorithm::Dual => dual::solve(&problem, opts)?,
        Algorithm::ProjectedSubgradient => subgradient::solve(&problem, opts)?,
    };
    let g = DensityMatrix1D::from_symmetric(grid, problem.embed(grid.len(), &g_support));
    let mut e = energy_with_factors(&g, field.b3(), factors, bc)?;
    e.constraint_violation = constraint_violation(&g, rho)?;
    let mut report = report;
    if e.constraint_violation > opts.feas_tol {
        report.converged = false;
    }
    Ok(Minimization {
        density_matrix: g,
        energy: e,
        report,
    })
}
