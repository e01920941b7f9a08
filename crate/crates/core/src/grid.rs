//! Uniform grids and complex functions sampled on them.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{domain, positive, Result};

/// A uniform one-dimensional grid of `n` nodes with spacing `h`.
///
/// Nodes are cell centred: `x_i = start + i·h`, and the grid covers the
/// interval `[start − h/2, start + (n − ½)h]` of length `n·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    start: f64,
    step: f64,
}

impl GridSpec {
    /// Grid of `n` cell-centred nodes covering `[−L/2, L/2]`.
    pub fn centered(n: usize, length: f64) -> Result<Self> {
        positive("length", length)?;
        if n < 2 {
            return Err(domain("n", format!("need at least 2 grid points, got {n}")));
        }
        let step = length / n as f64;
        Ok(GridSpec {
            n,
            start: -0.5 * length + 0.5 * step,
            step,
        })
    }

    /// Grid of `n` cell-centred nodes covering `[lower, upper]`.
    pub fn spanning(n: usize, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(domain(
                "extent",
                format!("need finite lower < upper, got [{lower}, {upper}]"),
            ));
        }
        let mut g = GridSpec::centered(n, upper - lower)?;
        g.start += 0.5 * (lower + upper);
        Ok(g)
    }

    /// Recovers the grid from a list of equally spaced nodes.
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(domain("x", "need at least 2 nodes"));
        }
        let step = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
        if !(step.is_finite() && step > 0.0) {
            return Err(domain("x", "nodes must be strictly increasing"));
        }
        for (i, &x) in nodes.iter().enumerate() {
            let expected = nodes[0] + i as f64 * step;
            if (x - expected).abs() > 1e-6 * step {
                return Err(domain(
                    "x",
                    format!("nodes are not uniformly spaced near index {i} (x = {x})"),
                ));
            }
        }
        Ok(GridSpec {
            n: nodes.len(),
            start: nodes[0],
            step,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn length(&self) -> f64 {
        self.step * self.n as f64
    }

    /// Left end of the covered interval.
    pub fn lower(&self) -> f64 {
        self.start - 0.5 * self.step
    }

    /// Right end of the covered interval.
    pub fn upper(&self) -> f64 {
        self.start + (self.n as f64 - 0.5) * self.step
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Quadrature weight of every node (midpoint/trapezoidal rule for
    /// functions that vanish at the ends).
    pub fn weight(&self) -> f64 {
        self.step
    }

    /// Whether `shift` is an integer multiple of the spacing; returns that integer.
    pub fn lattice_steps(&self, shift: f64) -> Option<i64> {
        let k = (shift / self.step).round();
        if (shift - k * self.step).abs() <= 1e-9 * self.step {
            Some(k as i64)
        } else {
            None
        }
    }
}

/// Six-point Lagrange interpolation of uniformly sampled data, with the
/// samples extended by zero outside the grid.
fn lagrange6(grid: &GridSpec, samples: &[Complex64], x: f64) -> Complex64 {
    const DENOM: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let s = (x - grid.start) / grid.step;
    if !s.is_finite() || s < -3.0 || s > grid.n as f64 + 2.0 {
        return Complex64::new(0.0, 0.0);
    }
    let base = s.floor();
    let t = s - base;
    let base = base as i64;
    if t == 0.0 {
        return sample_or_zero(samples, base);
    }
    // nodes base-2 .. base+3, local coordinates u = t + 2 - k
    let mut out = Complex64::new(0.0, 0.0);
    for k in 0..6 {
        let v = sample_or_zero(samples, base - 2 + k as i64);
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut num = 1.0;
        for j in 0..6 {
            if j != k {
                num *= t + 2.0 - j as f64;
            }
        }
        out += v * (num / DENOM[k]);
    }
    out
}

fn sample_or_zero(samples: &[Complex64], i: i64) -> Complex64 {
    if i < 0 || i as usize >= samples.len() {
        Complex64::new(0.0, 0.0)
    } else {
        samples[i as usize]
    }
}

/// Complex samples of a function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    grid: GridSpec,
    samples: Vec<Complex64>,
    norm: f64,
}

impl GridFunction1D {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(domain(
                "samples",
                format!("expected {} samples, got {}", grid.len(), samples.len()),
            ));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(domain("samples", "non-finite sample"));
        }
        let norm = (grid.weight() * samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        Ok(GridFunction1D {
            grid,
            samples,
            norm,
        })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: GridSpec, f: F) -> Self {
        let samples: Vec<_> = grid.nodes().map(f).collect();
        Self::new(grid, samples).expect("sampled function must be finite")
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: GridSpec, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.len()]).unwrap()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// L² norm by quadrature (cached).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `⟨self, other⟩ = ∫ self · conj(other)`, linear in the first slot.
    pub fn inner(&self, other: &GridFunction1D) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.weight())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.grid, self.samples.iter().map(|z| z * c).collect()).unwrap()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &GridFunction1D, b: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    /// Value at an arbitrary point by six-point Lagrange interpolation
    /// (zero outside the grid).
    pub fn interpolate(&self, x: f64) -> Complex64 {
        lagrange6(&self.grid, &self.samples, x)
    }

    /// Smallest interval `[lo, hi]` of nodes outside which the squared
    /// modulus carries at most `tail` of the total mass.
    pub fn effective_support(&self, tail: f64) -> (f64, f64) {
        let total: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            let c = 0.5 * (self.grid.lower() + self.grid.upper());
            return (c, c);
        }
        let cut = 0.5 * tail * total;
        let mut acc = 0.0;
        let mut lo = 0;
        for (i, z) in self.samples.iter().enumerate() {
            acc += z.norm_sqr();
            if acc > cut {
                lo = i;
                break;
            }
        }
        acc = 0.0;
        let mut hi = self.samples.len() - 1;
        for (i, z) in self.samples.iter().enumerate().rev() {
            acc += z.norm_sqr();
            if acc > cut {
                hi = i;
                break;
            }
        }
        (self.grid.node(lo), self.grid.node(hi))
    }

    /// Momentum interval `[p_lo, p_hi]` outside which `|f̂(p)|²` carries at
    /// most `tail` of the total, from a direct DFT on the grid's momentum
    /// lattice `p_m = 2πm/(N h)`, `−N/2 ≤ m < N/2`.
    pub fn momentum_support(&self, tail: f64) -> (f64, f64) {
        let n = self.samples.len();
        let h = self.grid.step();
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * h);
        let half = (n / 2) as i64;
        let power: Vec<f64> = (-half..n as i64 - half)
            .map(|m| {
                let p = m as f64 * dp;
                let step = Complex64::from_polar(1.0, -p * h);
                let mut phase = Complex64::from_polar(1.0, -p * self.grid.node(0));
                let mut acc = Complex64::new(0.0, 0.0);
                for z in &self.samples {
                    acc += z * phase;
                    phase *= step;
                }
                acc.norm_sqr()
            })
            .collect();
        let total: f64 = power.iter().sum();
        if total == 0.0 {
            return (0.0, 0.0);
        }
        let cut = 0.5 * tail * total;
        let mut acc = 0.0;
        let mut lo = 0;
        for (i, w) in power.iter().enumerate() {
            acc += w;
            if acc > cut {
                lo = i;
                break;
            }
        }
        acc = 0.0;
        let mut hi = power.len() - 1;
        for (i, w) in power.iter().enumerate().rev() {
            acc += w;
            if acc > cut {
                hi = i;
                break;
            }
        }
        ((lo as i64 - half) as f64 * dp, (hi as i64 - half) as f64 * dp)
    }

    fn check_same_grid(&self, other: &GridFunction1D) -> Result<()> {
        if self.grid != other.grid {
            return Err(domain("grid", "functions live on different grids"));
        }
        Ok(())
    }
}

/// Complex samples of a function of two variables, stored row-major with
/// the first axis outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    axis0: GridSpec,
    axis1: GridSpec,
    samples: Vec<Complex64>,
    norm: f64,
}

impl GridFunction2D {
    pub fn new(axis0: GridSpec, axis1: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != axis0.len() * axis1.len() {
            return Err(domain(
                "samples",
                format!(
                    "expected {} samples, got {}",
                    axis0.len() * axis1.len(),
                    samples.len()
                ),
            ));
        }
        let w = axis0.weight() * axis1.weight();
        let norm = (w * samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        Ok(GridFunction2D {
            axis0,
            axis1,
            samples,
            norm,
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(axis0: GridSpec, axis1: GridSpec, f: F) -> Self {
        let mut samples = Vec::with_capacity(axis0.len() * axis1.len());
        for x in axis0.nodes() {
            for y in axis1.nodes() {
                samples.push(f(x, y));
            }
        }
        Self::new(axis0, axis1, samples).unwrap()
    }

    pub fn axes(&self) -> (&GridSpec, &GridSpec) {
        (&self.axis0, &self.axis1)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.axis1.len() + j]
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `⟨self, other⟩` by two-dimensional quadrature.
    pub fn inner(&self, other: &GridFunction2D) -> Result<Complex64> {
        if self.axis0 != other.axis0 || self.axis1 != other.axis1 {
            return Err(domain("grid", "functions live on different grids"));
        }
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.axis0.weight() * self.axis1.weight())
    }

    /// Slice along the second axis at first-axis index `i`.
    pub fn row(&self, i: usize) -> GridFunction1D {
        let m = self.axis1.len();
        GridFunction1D::new(self.axis1, self.samples[i * m..(i + 1) * m].to_vec()).unwrap()
    }

    /// Slice along the first axis at second-axis index `j`.
    pub fn column(&self, j: usize) -> GridFunction1D {
        let m = self.axis1.len();
        GridFunction1D::new(
            self.axis0,
            (0..self.axis0.len()).map(|i| self.samples[i * m + j]).collect(),
        )
        .unwrap()
    }

    /// Writes `x1,x2,re,im` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x1,x2,re,im")?;
        for (i, x) in self.axis0.nodes().enumerate() {
            for (j, y) in self.axis1.nodes().enumerate() {
                let z = self.at(i, j);
                writeln!(out, "{x:.12e},{y:.12e},{:.12e},{:.12e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Complex samples of a function of three variables `(x1, x2, x3)`,
/// stored with `x1` outermost and `x3` innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction3D {
    axes: [GridSpec; 3],
    samples: Vec<Complex64>,
    norm: f64,
}

impl GridFunction3D {
    pub fn new(axes: [GridSpec; 3], samples: Vec<Complex64>) -> Result<Self> {
        let count = axes.iter().map(|a| a.len()).product::<usize>();
        if samples.len() != count {
            return Err(domain(
                "samples",
                format!("expected {count} samples, got {}", samples.len()),
            ));
        }
        let w: f64 = axes.iter().map(|a| a.weight()).product();
        let norm = (w * samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        Ok(GridFunction3D {
            axes,
            samples,
            norm,
        })
    }

    pub fn axes(&self) -> &[GridSpec; 3] {
        &self.axes
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize, l: usize) -> Complex64 {
        let (n2, n3) = (self.axes[1].len(), self.axes[2].len());
        self.samples[(i * n2 + j) * n3 + l]
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centered_grid_geometry() {
        let g = GridSpec::centered(8, 4.0).unwrap();
        assert_eq!(g.step(), 0.5);
        assert!((g.length() - 4.0).abs() < 1e-15);
        assert!((g.lower() + 2.0).abs() < 1e-15);
        assert!((g.upper() - 2.0).abs() < 1e-15);
        assert!((g.node(0) + 1.75).abs() < 1e-15);
        assert!((g.node(3) + g.node(4)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_quadrature_is_exact_to_1e10() {
        // unit-norm gaussian with sigma = 1, box of 24 sigma
        let g = GridSpec::centered(512, 24.0).unwrap();
        let f = GridFunction1D::from_real_fn(g, |x| (-x * x / 2.0).exp() / PI.powf(0.25));
        assert!((f.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn from_nodes_rejects_irregular_spacing() {
        assert!(GridSpec::from_nodes(&[0.0, 1.0, 2.5]).is_err());
        let g = GridSpec::from_nodes(&[1.0, 1.5, 2.0, 2.5]).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g.length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_accurate_for_smooth_data() {
        let g = GridSpec::centered(256, 20.0).unwrap();
        let f = GridFunction1D::from_real_fn(g, |x| (-x * x / 2.0).exp() * x.cos());
        for &x in &[0.0123, -1.37, 2.9, 4.44] {
            let exact = (-x * x / 2.0_f64).exp() * x.cos();
            assert!((f.interpolate(x).re - exact).abs() < 1e-7, "x = {x}");
        }
        assert_eq!(f.interpolate(100.0), Complex64::new(0.0, 0.0));
        // nodes are reproduced exactly
        assert_eq!(f.interpolate(g.node(17)), f.samples()[17]);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric() {
        let g = GridSpec::centered(128, 16.0).unwrap();
        let a = GridFunction1D::from_fn(g, |x| Complex64::new(x.cos(), x.sin()) * (-x * x).exp());
        let b = GridFunction1D::from_fn(g, |x| Complex64::new(1.0, x) * (-x * x / 3.0).exp());
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        assert!(a.inner(&a).unwrap().re >= 0.0);
    }

    #[test]
    fn momentum_support_of_modulated_gaussian() {
        let g = GridSpec::centered(512, 24.0).unwrap();
        let f = GridFunction1D::from_fn(g, |x| Complex64::from_polar((-x * x / 2.0).exp(), 3.0 * x));
        let (lo, hi) = f.momentum_support(1e-16);
        // |f̂(p)|² ∝ exp(−(p − 3)²), tails of 1e-16 end near 3 ± 6.1
        assert!(lo > 3.0 - 7.0 && lo < 3.0 - 5.0, "{lo}");
        assert!(hi > 3.0 + 5.0 && hi < 3.0 + 7.0, "{hi}");
        let (xl, xh) = f.effective_support(1e-16);
        assert!(xl < -5.0 && xh > 5.0 && xh < 7.0);
    }

    #[test]
    fn lattice_steps_detects_alignment() {
        let g = GridSpec::centered(100, 10.0).unwrap();
        assert_eq!(g.lattice_steps(0.3), Some(3));
        assert_eq!(g.lattice_steps(-0.7), Some(-7));
        assert_eq!(g.lattice_steps(0.35), None);
    }
}
