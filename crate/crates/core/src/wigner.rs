//! Discretized Wigner-type transforms, magnetic translations and window
//! projectors.
//!
//! The transform of a window `f` and a payload `g` is
//! `W_b(f,g)(x1,x2) = (2π)^{−1/2} ∫ f(x1 − k/b) conj(g(k)) e^{−i k x2} dk`.
//! It is evaluated by the trapezoidal rule over the nodes of `g`'s grid, with
//! `f` interpolated at the shifted points.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, positive, Error, Result};
use crate::grid::{GridFunction1D, GridFunction2D, GridFunction3D, GridSpec};

/// Tail mass used to delimit the effective support of inputs.
const SUPPORT_TAIL: f64 = 1e-16;

/// Largest tolerated fraction of `‖f‖²‖g‖²` falling outside the output grid.
const SUPPORT_LOSS_TOL: f64 = 1e-8;

/// Output points per axis of the default transform grids.
pub const DEFAULT_OUTPUT_POINTS: usize = 256;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default grid for windows and payloads: 2048 nodes on `[−12, 12]`.
pub fn default_window_grid() -> GridSpec {
    GridSpec::centered(2048, 24.0).unwrap()
}

/// Output grid `(x1, x2)` of a transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGrid {
    pub x1: GridSpec,
    pub x2: GridSpec,
}

impl WignerGrid {
    pub fn new(x1: GridSpec, x2: GridSpec) -> Self {
        WignerGrid { x1, x2 }
    }

    /// A `points × points` grid carrying the transforms of all `pairs`.
    ///
    /// In `x1` the image of `(f, g)` lives on `supp f + supp g / b`; in `x2`
    /// on `−(supp ĝ + supp f̂ / b)`. Supports are taken at a `1e-16` tail and
    /// widened by 10 %.
    pub fn covering(b: f64, pairs: &[(&GridFunction1D, &GridFunction1D)], points: usize) -> Result<Self> {
        positive("b", b)?;
        if pairs.is_empty() {
            return Err(domain("pairs", "need at least one (window, payload) pair"));
        }
        let mut x1 = (f64::INFINITY, f64::NEG_INFINITY);
        let mut x2 = (f64::INFINITY, f64::NEG_INFINITY);
        for (f, g) in pairs {
            let (fl, fh) = f.effective_support(SUPPORT_TAIL);
            let (gl, gh) = g.effective_support(SUPPORT_TAIL);
            let (pfl, pfh) = f.momentum_support(SUPPORT_TAIL);
            let (pgl, pgh) = g.momentum_support(SUPPORT_TAIL);
            x1 = (x1.0.min(fl + gl / b), x1.1.max(fh + gh / b));
            x2 = (x2.0.min(-(pgh + pfh / b)), x2.1.max(-(pgl + pfl / b)));
        }
        let widen = |(lo, hi): (f64, f64)| {
            let pad = 0.05 * (hi - lo) + 0.5;
            (lo - pad, hi + pad)
        };
        let (a, c) = widen(x1);
        let (d, e) = widen(x2);
        Ok(WignerGrid {
            x1: GridSpec::spanning(points, a, c)?,
            x2: GridSpec::spanning(points, d, e)?,
        })
    }
}

/// Precomputed payload data for repeated transforms with the same `g`, `b`
/// and output grid.
#[derive(Debug, Clone)]
pub struct WignerPlan {
    b: f64,
    grid: WignerGrid,
    /// Payload nodes `k_j` that carry weight.
    k: Vec<f64>,
    /// `conj(g(k_j))·h/√(2π)`.
    weights: Vec<Complex64>,
    /// `|g(k_j)|²·h`.
    payload_mass: Vec<f64>,
    payload_norm_sq: f64,
    /// `e^{−i k_j x2_l}`, stored with `j` outermost.
    phases: Vec<Complex64>,
}

impl WignerPlan {
    pub fn new(g: &GridFunction1D, b: f64, grid: WignerGrid) -> Result<Self> {
        positive("b", b)?;
        let h = g.grid().step();
        let peak = g.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut k = Vec::new();
        let mut weights = Vec::new();
        let mut payload_mass = Vec::new();
        for (j, z) in g.samples().iter().enumerate() {
            if z.norm() > 1e-16 * peak {
                k.push(g.grid().node(j));
                weights.push(z.conj() * (h / (2.0 * PI).sqrt()));
                payload_mass.push(z.norm_sqr() * h);
            }
        }
        let x2: Vec<f64> = grid.x2.nodes().collect();
        let mut phases = Vec::with_capacity(k.len() * x2.len());
        for &kj in &k {
            phases.extend(x2.iter().map(|&y| Complex64::from_polar(1.0, -kj * y)));
        }
        Ok(WignerPlan {
            b,
            grid,
            k,
            weights,
            payload_mass,
            payload_norm_sq: g.norm() * g.norm(),
            phases,
        })
    }

    pub fn grid(&self) -> &WignerGrid {
        &self.grid
    }

    /// Transform of the window `f`; fails if more than `1e-8` of
    /// `‖f‖²‖g‖²` would land outside the output `x1` range.
    pub fn apply(&self, f: &GridFunction1D) -> Result<GridFunction2D> {
        let (image, lost) = self.apply_with_loss(f);
        let total = f.norm() * f.norm() * self.payload_norm_sq;
        if total > 0.0 && lost > SUPPORT_LOSS_TOL * total {
            return Err(self.support_error(lost / total));
        }
        Ok(image)
    }

    fn support_error(&self, fraction: f64) -> Error {
        Error::Support(format!(
            "output range x1 ∈ [{}, {}] misses a fraction {fraction:e} of the transform at b = {}",
            self.grid.x1.lower(),
            self.grid.x1.upper(),
            self.b
        ))
    }

    /// The image together with the absolute mass `∫∫|f(y)|²|g(k)|²` over
    /// pairs with `y + k/b` outside the output `x1` range.
    fn apply_with_loss(&self, f: &GridFunction1D) -> (GridFunction2D, f64) {
        let (n1, n2) = (self.grid.x1.len(), self.grid.x2.len());
        let mut out = vec![ZERO; n1 * n2];
        for (i, x1) in self.grid.x1.nodes().enumerate() {
            let row = &mut out[i * n2..(i + 1) * n2];
            for (j, (&kj, &w)) in self.k.iter().zip(&self.weights).enumerate() {
                let fv = f.interpolate(x1 - kj / self.b);
                if fv == ZERO {
                    continue;
                }
                let v = fv * w;
                let e = &self.phases[j * n2..(j + 1) * n2];
                for (r, p) in row.iter_mut().zip(e) {
                    *r += v * p;
                }
            }
        }
        let image = GridFunction2D::new(self.grid.x1, self.grid.x2, out).unwrap();
        (image, self.lost_mass(f))
    }

    fn lost_mass(&self, f: &GridFunction1D) -> f64 {
        let fg = f.grid();
        let h = fg.step();
        // prefix[i] = h·∑_{i' < i} |f_i'|²
        let mut prefix = Vec::with_capacity(fg.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for z in f.samples() {
            acc += z.norm_sqr() * h;
            prefix.push(acc);
        }
        let (lo, hi) = (self.grid.x1.lower(), self.grid.x1.upper());
        let index = |y: f64| -> usize {
            let s = ((y - fg.node(0)) / h).ceil();
            s.clamp(0.0, fg.len() as f64) as usize
        };
        let mut lost = 0.0;
        for (&kj, &m) in self.k.iter().zip(&self.payload_mass) {
            // window nodes y with lo ≤ y + k/b ≤ hi stay inside
            let a = index(lo - kj / self.b);
            let c = index(hi - kj / self.b + 1e-12 * h).max(a);
            let inside = prefix[c] - prefix[a];
            lost += m * (acc - inside).max(0.0);
        }
        lost
    }
}

/// `W_b(f, g)` on the output grid.
pub fn wigner2d(f: &GridFunction1D, g: &GridFunction1D, b: f64, out: &WignerGrid) -> Result<GridFunction2D> {
    WignerPlan::new(g, b, *out)?.apply(f)
}

/// `W_b(f, g)` on the default `256²` grid covering the pair.
pub fn wigner2d_default(f: &GridFunction1D, g: &GridFunction1D, b: f64) -> Result<GridFunction2D> {
    let grid = WignerGrid::covering(b, &[(f, g)], DEFAULT_OUTPUT_POINTS)?;
    wigner2d(f, g, b, &grid)
}

/// Three-dimensional transform `(x1, x2, x3) ↦ W_b(f(·, x3), g)(x1, x2)` of
/// a window `f(x1, x3)` (first axis `x1`, second axis `x3`). The result has
/// axes `[x1, x2, x3]`.
pub fn wigner3d(f: &GridFunction2D, g: &GridFunction1D, b: f64, out: &WignerGrid) -> Result<GridFunction3D> {
    let plan = WignerPlan::new(g, b, *out)?;
    let (_, x3) = f.axes();
    let (n1, n2, n3) = (out.x1.len(), out.x2.len(), x3.len());
    let mut samples = vec![ZERO; n1 * n2 * n3];
    let mut lost = 0.0;
    for l in 0..n3 {
        let slice = f.column(l);
        if slice.norm() == 0.0 {
            continue;
        }
        let (image, slice_lost) = plan.apply_with_loss(&slice);
        lost += slice_lost * x3.step();
        for i in 0..n1 {
            for j in 0..n2 {
                samples[(i * n2 + j) * n3 + l] = image.at(i, j);
            }
        }
    }
    let total = f.norm() * f.norm() * g.norm() * g.norm();
    if total > 0.0 && lost > SUPPORT_LOSS_TOL * total {
        return Err(plan.support_error(lost / total));
    }
    GridFunction3D::new([out.x1, out.x2, *x3], samples)
}

/// Default output grid for [`wigner3d`], covering every `x3` slice of `f`
/// that carries more than `1e-12` of its mass.
pub fn wigner3d_grid(f: &GridFunction2D, g: &GridFunction1D, b: f64, points: usize) -> Result<WignerGrid> {
    let (_, x3) = f.axes();
    let total = f.norm() * f.norm();
    let slices: Vec<GridFunction1D> = (0..x3.len())
        .map(|l| f.column(l))
        .filter(|s| s.norm() * s.norm() * x3.step() > 1e-12 * total)
        .collect();
    if slices.is_empty() {
        return WignerGrid::covering(b, &[(&f.column(0), g)], points);
    }
    let pairs: Vec<_> = slices.iter().map(|s| (s, g)).collect();
    WignerGrid::covering(b, &pairs, points)
}

/// Magnetic translation `(m_R f)(x) = e^{−i b R1 x2} f(x − R)` on the grid
/// of `f`, whose first axis is `x1`. `R` must be a lattice vector of the
/// grid; values shifted off the grid are dropped and fail the call if they
/// carry more than `1e-8` of the mass.
pub fn magnetic_translate(f: &GridFunction2D, r: (f64, f64), b: f64) -> Result<GridFunction2D> {
    crate::error::finite("b", b)?;
    let (a1, a2) = f.axes();
    let s1 = a1
        .lattice_steps(r.0)
        .ok_or_else(|| domain("R", format!("R1 = {} is not a multiple of the spacing {}", r.0, a1.step())))?;
    let s2 = a2
        .lattice_steps(r.1)
        .ok_or_else(|| domain("R", format!("R2 = {} is not a multiple of the spacing {}", r.1, a2.step())))?;
    let (n1, n2) = (a1.len() as i64, a2.len() as i64);
    let phases: Vec<Complex64> = a2.nodes().map(|x2| Complex64::from_polar(1.0, -b * r.0 * x2)).collect();
    let mut out = vec![ZERO; (n1 * n2) as usize];
    for i in 0..n1 {
        let si = i - s1;
        if si < 0 || si >= n1 {
            continue;
        }
        for j in 0..n2 {
            let sj = j - s2;
            if sj < 0 || sj >= n2 {
                continue;
            }
            out[(i * n2 + j) as usize] = phases[j as usize] * f.at(si as usize, sj as usize);
        }
    }
    let moved = GridFunction2D::new(*a1, *a2, out)?;
    let before = f.norm() * f.norm();
    let after = moved.norm() * moved.norm();
    if before - after > 1e-8 * before {
        return Err(Error::Support(format!(
            "translation by ({}, {}) pushes a fraction {:e} of the mass off the grid",
            r.0,
            r.1,
            (before - after) / before
        )));
    }
    Ok(moved)
}

/// A transform `W_b(f, g)` held in window coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPair {
    pub f: GridFunction1D,
    pub g: GridFunction1D,
}

impl WindowPair {
    pub fn new(f: GridFunction1D, g: GridFunction1D) -> Self {
        WindowPair { f, g }
    }

    pub fn image(&self, b: f64, grid: &WignerGrid) -> Result<GridFunction2D> {
        wigner2d(&self.f, &self.g, b, grid)
    }
}

/// `⟨W_b(f1,g1), W_b(f2,g2)⟩ = ⟨f1,f2⟩·⟨g2,g1⟩`.
pub fn moyal_inner(p: &WindowPair, q: &WindowPair) -> Result<Complex64> {
    Ok(p.f.inner(&q.f)? * q.g.inner(&p.g)?)
}

fn check_unit(param: &'static str, w: &GridFunction1D) -> Result<()> {
    if (w.norm() - 1.0).abs() > 1e-10 {
        return Err(domain(param, format!("window must have unit norm, got {}", w.norm())));
    }
    Ok(())
}

/// Orthogonal projector onto the span of `{W_b(ψ, g)}` for a unit window `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowProjector {
    window: GridFunction1D,
    b: f64,
}

impl WindowProjector {
    pub fn new(window: GridFunction1D, b: f64) -> Result<Self> {
        positive("b", b)?;
        check_unit("window", &window)?;
        let norm = window.norm();
        Ok(WindowProjector {
            window: window.scale(Complex64::new(1.0 / norm, 0.0)),
            b,
        })
    }

    pub fn window(&self) -> &GridFunction1D {
        &self.window
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(f, g) ↦ (⟨f, ψ⟩ψ, g)`.
    pub fn apply(&self, pair: &WindowPair) -> Result<WindowPair> {
        let c = pair.f.inner(&self.window)?;
        Ok(WindowPair::new(self.window.scale(c), pair.g.clone()))
    }
}

pub fn projector_apply(k: &WindowProjector, pair: &WindowPair) -> Result<WindowPair> {
    k.apply(pair)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceDensity {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest imaginary part met (zero up to quadrature error).
    pub max_imaginary: f64,
    pub mean: f64,
    pub std_dev: f64,
    /// `(b/2π)|⟨ψ, ψ̃⟩|²`.
    pub expected: f64,
}

/// Density of `K_ψ K_ψ̃` per unit surface at the points `x_samples`:
/// `⟨ψ,ψ̃⟩ (1/2π) ∫ ψ̃(x1 − k/b) conj(ψ(x1 − k/b)) dk`.
///
/// The `k` integral runs over a fixed grid not aligned with the window
/// grid, so that independence of `x1` is a genuine check. Fails with
/// [`Error::CrossCheck`] if the values spread by more than `1e-8·b/2π`.
pub fn projector_trace_density(
    psi: &GridFunction1D,
    psi_tilde: &GridFunction1D,
    b: f64,
    x_samples: &[f64],
) -> Result<TraceDensity> {
    positive("b", b)?;
    check_unit("psi", psi)?;
    check_unit("psi_tilde", psi_tilde)?;
    if x_samples.is_empty() {
        return Err(domain("x_samples", "need at least one sample point"));
    }
    let overlap = psi.inner(psi_tilde)?;
    let wg = psi.grid();
    let xmin = x_samples.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = x_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k_lo = b * (xmin - wg.upper());
    let k_hi = b * (xmax - wg.lower());
    let dk = 0.73 * b * wg.step();
    let count = ((k_hi - k_lo) / dk).ceil() as usize + 1;
    let k_grid = GridSpec::spanning(count, k_lo, k_hi)?;
    let mut values = Vec::with_capacity(x_samples.len());
    let mut max_imaginary: f64 = 0.0;
    for &x1 in x_samples {
        let mut acc = ZERO;
        for k in k_grid.nodes() {
            let y = x1 - k / b;
            let a = psi_tilde.interpolate(y);
            if a == ZERO {
                continue;
            }
            acc += a * psi.interpolate(y).conj();
        }
        let v = overlap * acc * (k_grid.step() / (2.0 * PI));
        max_imaginary = max_imaginary.max(v.im.abs());
        values.push(v.re);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_dev = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let scale = b / (2.0 * PI);
    if std_dev > 1e-8 * scale {
        return Err(Error::CrossCheck(format!(
            "trace density varies with x1: std {std_dev:e} exceeds {:e}",
            1e-8 * scale
        )));
    }
    Ok(TraceDensity {
        x: x_samples.to_vec(),
        values,
        max_imaginary,
        mean,
        std_dev,
        expected: scale * overlap.norm_sqr(),
    })
}

/// Tolerance on `‖K_ψK_ψ̃F − K_ψ̃K_ψF‖` below which the projectors count as
/// commuting.
pub const COMMUTATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub commute: bool,
    /// Largest `‖K_ψK_ψ̃F − K_ψ̃K_ψF‖` over the test pairs.
    pub max_deviation: f64,
    /// Index of the test pair attaining the maximum.
    pub witness: usize,
    /// `⟨ψ, ψ̃⟩`.
    pub overlap: Complex64,
}

/// Compares `K_ψK_ψ̃F` with `K_ψ̃K_ψF` on the test pairs, with norms of
/// differences of transforms obtained from the Moyal identity.
pub fn commutator_check(
    psi: &GridFunction1D,
    psi_tilde: &GridFunction1D,
    b: f64,
    test_pairs: &[WindowPair],
) -> Result<CommutatorReport> {
    if test_pairs.is_empty() {
        return Err(domain("test_pairs", "need at least one test pair"));
    }
    let k = WindowProjector::new(psi.clone(), b)?;
    let kt = WindowProjector::new(psi_tilde.clone(), b)?;
    let mut max_deviation: f64 = 0.0;
    let mut witness = 0;
    for (idx, pair) in test_pairs.iter().enumerate() {
        let left = k.apply(&kt.apply(pair)?)?;
        let right = kt.apply(&k.apply(pair)?)?;
        // both share the payload g, so the difference is W_b(a − c, g)
        let diff = left.f.combine(Complex64::new(1.0, 0.0), &right.f, Complex64::new(-1.0, 0.0))?;
        let dev = diff.norm() * pair.g.norm();
        if dev > max_deviation {
            max_deviation = dev;
            witness = idx;
        }
    }
    Ok(CommutatorReport {
        commute: max_deviation <= COMMUTATOR_TOL,
        max_deviation,
        witness,
        overlap: k.window().inner(kt.window())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landau::sample_hermite_gauss;

    fn small_grid() -> GridSpec {
        GridSpec::centered(512, 24.0).unwrap()
    }

    fn phi(n: usize) -> GridFunction1D {
        sample_hermite_gauss(n, 1.0, small_grid()).unwrap()
    }

    fn mix(a: &GridFunction1D, b: &GridFunction1D) -> GridFunction1D {
        let s = Complex64::new(0.5f64.sqrt(), 0.0);
        a.combine(s, b, s).unwrap()
    }

    #[test]
    fn ground_state_image_is_unit() {
        let g = WignerGrid::covering(1.0, &[(&phi(0), &phi(0))], 96).unwrap();
        let w = wigner2d(&phi(0), &phi(0), 1.0, &g).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-6, "{}", w.norm());
    }

    #[test]
    fn ground_state_image_closed_form() {
        // W_1(φ0, φ0)(x1, x2) = (1/√(2π))·π^{-1/2}∫ e^{-(x1-k)²/2 - k²/2 - ikx2} dk
        //                     = (1/√(2π)) e^{-x1²/4 - x2²/4 - i x1 x2 / 2}
        let g = WignerGrid::covering(1.0, &[(&phi(0), &phi(0))], 64).unwrap();
        let w = wigner2d(&phi(0), &phi(0), 1.0, &g).unwrap();
        for (i, x1) in g.x1.nodes().enumerate().step_by(7) {
            for (j, x2) in g.x2.nodes().enumerate().step_by(5) {
                let exact = Complex64::from_polar(
                    (-(x1 * x1 + x2 * x2) / 4.0).exp() / (2.0 * PI).sqrt(),
                    -x1 * x2 / 2.0,
                );
                assert!((w.at(i, j) - exact).norm() < 1e-9, "({x1}, {x2})");
            }
        }
    }

    #[test]
    fn moyal_for_small_set() {
        let b = 2.0;
        let fs: Vec<_> = (0..2).map(phi).collect();
        let pairs: Vec<_> = fs.iter().flat_map(|f| fs.iter().map(move |g| (f, g))).collect();
        let grid = WignerGrid::covering(b, &pairs, 128).unwrap();
        let images: Vec<_> = pairs.iter().map(|(f, g)| wigner2d(f, g, b, &grid).unwrap()).collect();
        for (p, wp) in pairs.iter().zip(&images) {
            for (q, wq) in pairs.iter().zip(&images) {
                let lhs = wp.inner(wq).unwrap();
                let rhs = moyal_inner(
                    &WindowPair::new(p.0.clone(), p.1.clone()),
                    &WindowPair::new(q.0.clone(), q.1.clone()),
                )
                .unwrap();
                assert!((lhs - rhs).norm() < 1e-6, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn zero_payload_gives_zero() {
        let g = WignerGrid::covering(1.0, &[(&phi(0), &phi(0))], 32).unwrap();
        let w = wigner2d(&phi(0), &GridFunction1D::zeros(small_grid()), 1.0, &g).unwrap();
        assert_eq!(w.norm(), 0.0);
    }

    #[test]
    fn narrow_output_grid_is_a_support_violation() {
        let grid = WignerGrid::new(
            GridSpec::centered(64, 4.0).unwrap(),
            GridSpec::centered(64, 20.0).unwrap(),
        );
        let r = wigner2d(&phi(0), &phi(0), 1.0, &grid);
        assert!(matches!(r, Err(Error::Support(_))), "{r:?}");
    }

    #[test]
    fn transform_3d_of_separable_window() {
        let wg = GridSpec::centered(256, 24.0).unwrap();
        let x3 = GridSpec::centered(32, 16.0).unwrap();
        let p0 = sample_hermite_gauss(0, 1.0, wg).unwrap();
        let g = sample_hermite_gauss(1, 1.0, wg).unwrap();
        let f = GridFunction2D::from_fn(wg, x3, |a, c| {
            Complex64::new(crate::landau::hermite_gauss_unit(0, a) * crate::landau::hermite_gauss_unit(0, c), 0.0)
        });
        let out = wigner3d_grid(&f, &g, 1.5, 48).unwrap();
        let w3 = wigner3d(&f, &g, 1.5, &out).unwrap();
        let w2 = wigner2d(&p0, &g, 1.5, &out).unwrap();
        for l in [3, 16, 25] {
            let c = crate::landau::hermite_gauss_unit(0, x3.node(l));
            for i in (0..48).step_by(5) {
                for j in (0..48).step_by(3) {
                    assert!((w3.at(i, j, l) - w2.at(i, j) * c).norm() < 1e-10);
                }
            }
        }
        assert!((w3.norm() - f.norm() * g.norm()).abs() < 1e-6);
    }

    #[test]
    fn translations() {
        let ax = GridSpec::centered(64, 16.0).unwrap();
        let f = GridFunction2D::from_fn(ax, ax, |a, c| Complex64::new((-(a * a + c * c)).exp(), a * (-(a * a + c * c)).exp()));
        let h = ax.step();
        let b = 1.3;
        let plain = magnetic_translate(&f, (0.0, 3.0 * h), b).unwrap();
        for i in 0..64 {
            for j in 3..64 {
                assert_eq!(plain.at(i, j), f.at(i, j - 3));
            }
        }
        let r = (4.0 * h, -2.0 * h);
        let rt = (-3.0 * h, 5.0 * h);
        let m = magnetic_translate(&f, r, b).unwrap();
        assert!((m.norm() - f.norm()).abs() < 1e-12);
        let two = magnetic_translate(&magnetic_translate(&f, rt, b).unwrap(), r, b).unwrap();
        let one = magnetic_translate(&f, (r.0 + rt.0, r.1 + rt.1), b).unwrap();
        let phase = Complex64::from_polar(1.0, b * r.1 * rt.0);
        for (x, y) in two.samples().iter().zip(one.samples()) {
            assert!((x - phase * y).norm() < 1e-12);
        }
        assert!(magnetic_translate(&f, (0.3 * h, 0.0), b).is_err());
        assert!(matches!(magnetic_translate(&f, (12.0, 0.0), b), Err(Error::Support(_))));
    }

    #[test]
    fn projector_algebra() {
        let psi = phi(0);
        let k = WindowProjector::new(psi.clone(), 1.0).unwrap();
        let pair = WindowPair::new(phi(2).combine(Complex64::new(0.3, 0.1), &psi, Complex64::new(0.7, 0.0)).unwrap(), phi(1));
        let once = k.apply(&pair).unwrap();
        let twice = k.apply(&once).unwrap();
        for (a, c) in once.f.samples().iter().zip(twice.f.samples()) {
            assert!((a - c).norm() < 1e-14);
        }
        let same = k.apply(&WindowPair::new(psi.clone(), phi(3))).unwrap();
        assert!(same.f.combine(Complex64::new(1.0, 0.0), &psi, Complex64::new(-1.0, 0.0)).unwrap().norm() < 1e-12);
        let orth = k.apply(&WindowPair::new(phi(1), phi(3))).unwrap();
        assert!(orth.f.norm() < 1e-14);
        // self-adjointness ⟨KF1, F2⟩ = ⟨F1, KF2⟩
        let other = WindowPair::new(mix(&phi(0), &phi(3)), phi(2).scale(Complex64::new(0.0, 1.0)));
        let lhs = moyal_inner(&k.apply(&pair).unwrap(), &other).unwrap();
        let rhs = moyal_inner(&pair, &k.apply(&other).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
        assert!(WindowProjector::new(phi(0).scale(Complex64::new(2.0, 0.0)), 1.0).is_err());
    }

    #[test]
    fn trace_density_cases() {
        let xs = [-2.0, -0.7, 0.0, 0.45, 1.9];
        let b = 1.7;
        let scale = b / (2.0 * PI);
        let same = projector_trace_density(&phi(0), &phi(0), b, &xs).unwrap();
        assert!((same.mean - scale).abs() < 1e-8);
        let orth = projector_trace_density(&phi(0), &phi(1), b, &xs).unwrap();
        assert!(orth.mean.abs() < 1e-8);
        let half = projector_trace_density(&phi(0), &mix(&phi(0), &phi(1)), b, &xs).unwrap();
        assert!((half.mean - 0.5 * scale).abs() < 1e-6);
        assert!((half.expected - 0.5 * scale).abs() < 1e-12);
    }

    #[test]
    fn commutation_criterion() {
        let f0 = phi(1);
        let tests = vec![
            WindowPair::new(phi(0), phi(2)),
            WindowPair::new(f0.clone(), phi(0)),
            WindowPair::new(mix(&phi(2), &phi(1)), phi(3)),
        ];
        assert!(commutator_check(&phi(0), &phi(1), 1.0, &tests).unwrap().commute);
        assert!(commutator_check(&phi(0), &phi(0), 1.0, &tests).unwrap().commute);
        let neg = phi(0).scale(Complex64::new(-1.0, 0.0));
        assert!(commutator_check(&phi(0), &neg, 1.0, &tests).unwrap().commute);
        let rep = commutator_check(&phi(0), &mix(&phi(0), &phi(1)), 1.0, &tests).unwrap();
        assert!(!rep.commute);
        assert!(rep.max_deviation > 0.1);
        assert!(commutator_check(&phi(0), &phi(1), 1.0, &[]).is_err());
    }
}
