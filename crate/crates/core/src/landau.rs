//! Magnetic field data, Landau-level spectra and Hermite–Gauss functions.

use std::f64::consts::PI;

use crate::error::{domain, finite, positive, Error, Result};
use crate::grid::{GridFunction1D, GridSpec};

/// A uniform magnetic field `B = (b1, b2, b3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticField {
    b1: f64,
    b2: f64,
    b3: f64,
    magnitude: f64,
}

impl MagneticField {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        finite("b1", b1)?;
        finite("b2", b2)?;
        finite("b3", b3)?;
        Ok(MagneticField {
            b1,
            b2,
            b3,
            magnitude: b1.hypot(b2).hypot(b3),
        })
    }

    /// Field `(0, 0, b)` orthogonal to the `(x1, x2)` plane.
    pub fn perpendicular(b: f64) -> Result<Self> {
        Self::new(0.0, 0.0, b)
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn b3(&self) -> f64 {
        self.b3
    }

    /// `|B|`.
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

/// Spectrum of the one-dimensional oscillator `−d²/dx² + α²x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpectrum {
    alpha: f64,
}

impl OscillatorSpectrum {
    pub fn new(alpha: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(OscillatorSpectrum { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(2n + 1)·α`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        (2 * n + 1) as f64 * self.alpha
    }

    /// Normalized eigenfunction `α^{1/4} φ_n(√α x)`.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        self.alpha.powf(0.25) * hermite_gauss_unit(n, self.alpha.sqrt() * x)
    }
}

/// `(2n + 1)·α`, the n-th eigenvalue of `−d²/dx² + α²x²`.
pub fn oscillator_eigenvalue(n: usize, alpha: f64) -> Result<f64> {
    Ok(OscillatorSpectrum::new(alpha)?.eigenvalue(n))
}

/// Normalized Hermite–Gauss function `φ_n` at unit frequency.
///
/// Runs the three-term recurrence on the normalized functions themselves,
/// `φ_{k+1} = √(2/(k+1))·x·φ_k − √(k/(k+1))·φ_{k−1}`, which stays finite for
/// large `n` where the explicit polynomial would overflow.
pub fn hermite_gauss_unit(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = (-0.5 * x * x).exp() / PI.powf(0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `φ_0 … φ_{nmax}` at `x` in one recurrence pass.
pub fn hermite_gauss_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let mut prev = 0.0;
    let mut cur = (-0.5 * x * x).exp() / PI.powf(0.25);
    out.push(cur);
    for k in 0..nmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `α^{1/4} φ_n(√α·x)`, the n-th normalized eigenfunction at frequency α.
pub fn hermite_gauss(n: usize, alpha: f64, x: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    finite("x", x)?;
    Ok(alpha.powf(0.25) * hermite_gauss_unit(n, alpha.sqrt() * x))
}

/// `α^{1/4} φ_n(√α·x)` sampled on the nodes of `grid`.
pub fn sample_hermite_gauss(n: usize, alpha: f64, grid: GridSpec) -> Result<GridFunction1D> {
    let spectrum = OscillatorSpectrum::new(alpha)?;
    Ok(GridFunction1D::from_real_fn(grid, |x| spectrum.eigenfunction(n, x)))
}

/// Band structure `ε_n(k) = |B|(2n+1) + (1 − b2²/|B|²)k²` of the Landau
/// operator for a field with `b1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicDispersion {
    field: MagneticField,
    kinetic_coefficient: f64,
}

impl AnisotropicDispersion {
    pub fn new(field: MagneticField) -> Result<Self> {
        if field.b1() != 0.0 {
            return Err(Error::Unsupported(format!(
                "dispersion needs b1 = 0, got b1 = {}",
                field.b1()
            )));
        }
        if field.magnitude() <= 0.0 {
            return Err(domain("field", "|B| must be positive"));
        }
        let ratio = field.b2() / field.magnitude();
        Ok(AnisotropicDispersion {
            field,
            kinetic_coefficient: 1.0 - ratio * ratio,
        })
    }

    pub fn field(&self) -> &MagneticField {
        &self.field
    }

    /// The `k²` coefficient `1 − b2²/|B|²` (exactly 1 when `b2 = 0`).
    pub fn kinetic_coefficient(&self) -> f64 {
        self.kinetic_coefficient
    }

    /// Band bottom `|B|(2n + 1)`.
    pub fn level(&self, n: usize) -> f64 {
        (2 * n + 1) as f64 * self.field.magnitude()
    }

    pub fn value(&self, n: usize, k: f64) -> f64 {
        self.level(n) + self.kinetic_coefficient * k * k
    }
}

pub fn anisotropic_dispersion(field: &MagneticField, n: usize, k: f64) -> Result<f64> {
    finite("k", k)?;
    Ok(AnisotropicDispersion::new(*field)?.value(n, k))
}

/// Relative residual `‖(H − ε_n)φ_n‖ / ‖φ_n‖` of the sampled eigenfunction
/// under the three-point finite-difference oscillator with Dirichlet ends.
pub fn oscillator_eigen_residual(n: usize, alpha: f64, grid: &GridSpec) -> Result<f64> {
    let spectrum = OscillatorSpectrum::new(alpha)?;
    let h = grid.step();
    let phi: Vec<f64> = grid.nodes().map(|x| spectrum.eigenfunction(n, x)).collect();
    let mass = h * phi.iter().map(|v| v * v).sum::<f64>();
    if (1.0 - mass).abs() > 1e-8 {
        return Err(domain(
            "grid",
            format!(
                "grid [{}, {}] truncates the eigenfunction (captured mass {mass})",
                grid.lower(),
                grid.upper()
            ),
        ));
    }
    let eps = spectrum.eigenvalue(n);
    let a2 = alpha * alpha;
    let m = phi.len();
    let mut num = 0.0;
    for i in 0..m {
        let left = if i == 0 { 0.0 } else { phi[i - 1] };
        let right = if i + 1 == m { 0.0 } else { phi[i + 1] };
        let x = grid.node(i);
        let hphi = (2.0 * phi[i] - left - right) / (h * h) + a2 * x * x * phi[i];
        let r = hphi - eps * phi[i];
        num += r * r;
    }
    Ok((num * h).sqrt() / mass.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_h5(alpha: f64, x: f64) -> f64 {
        let y = alpha.sqrt() * x;
        let h5 = 32.0 * y.powi(5) - 160.0 * y.powi(3) + 120.0 * y;
        let norm = 1.0 / (32.0_f64 * 120.0).sqrt() / PI.powf(0.25);
        alpha.powf(0.25) * norm * (-0.5 * y * y).exp() * h5
    }

    #[test]
    fn ground_state_at_origin() {
        let v = hermite_gauss(0, 1.0, 0.0).unwrap();
        assert!((v - PI.powf(-0.25)).abs() < 1e-15);
        assert!((v - 0.7511255).abs() < 1e-7);
        assert_eq!(hermite_gauss(1, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn recurrence_matches_explicit_h5() {
        let r = hermite_gauss(5, 2.0, 0.7).unwrap();
        let e = explicit_h5(2.0, 0.7);
        assert!(((r - e) / e).abs() < 1e-12, "{r} vs {e}");
    }

    #[test]
    fn nonpositive_alpha_is_rejected() {
        assert!(matches!(hermite_gauss(0, -1.0, 0.0), Err(Error::Domain { .. })));
        assert!(hermite_gauss(0, 0.0, 0.0).is_err());
        assert!(oscillator_eigenvalue(0, -2.0).is_err());
    }

    #[test]
    fn recurrence_is_finite_for_high_levels() {
        let v = hermite_gauss_unit(300, 5.0);
        assert!(v.is_finite() && v.abs() < 1.0);
    }

    #[test]
    fn all_levels_agree_with_single_evaluation() {
        let all = hermite_gauss_all(12, 1.3);
        for (n, v) in all.iter().enumerate() {
            assert_eq!(*v, hermite_gauss_unit(n, 1.3));
        }
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(oscillator_eigenvalue(0, 4.0).unwrap(), 4.0);
        assert_eq!(oscillator_eigenvalue(3, 2.5).unwrap(), 17.5);
        let s = OscillatorSpectrum::new(0.7).unwrap();
        for n in 0..20 {
            assert!((s.eigenvalue(n + 1) - s.eigenvalue(n) - 1.4).abs() < 1e-12);
        }
    }

    #[test]
    fn dispersion_examples() {
        let f = MagneticField::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(anisotropic_dispersion(&f, 0, 2.0).unwrap(), 5.0);
        let f = MagneticField::new(0.0, 0.8, 0.8).unwrap();
        let v = anisotropic_dispersion(&f, 0, 1.0).unwrap();
        assert!((v - (2f64.sqrt() * 0.8 + 0.5)).abs() < 1e-14);
        let f = MagneticField::new(0.0, 3.0, 4.0).unwrap();
        assert!((anisotropic_dispersion(&f, 1, 5.0).unwrap() - 31.0).abs() < 1e-12);
        // independent evaluation of the same formula
        let (b2, b3, n, k) = (3.0_f64, 4.0_f64, 1.0_f64, 5.0_f64);
        let m = (b2 * b2 + b3 * b3).sqrt();
        assert!((m * (2.0 * n + 1.0) + (b3 * b3 / (m * m)) * k * k - 31.0).abs() < 1e-12);
    }

    #[test]
    fn dispersion_rejects_tilted_b1() {
        let f = MagneticField::new(0.5, 0.0, 1.0).unwrap();
        assert!(matches!(anisotropic_dispersion(&f, 0, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn residual_small_and_second_order() {
        let g = GridSpec::centered(2048, 20.0).unwrap();
        let r1 = oscillator_eigen_residual(0, 1.0, &g).unwrap();
        assert!(r1 < 1e-4, "{r1}");
        let g2 = GridSpec::centered(4096, 20.0).unwrap();
        let r2 = oscillator_eigen_residual(0, 1.0, &g2).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn residual_for_excited_level() {
        let g = GridSpec::centered(8192, 24.0).unwrap();
        let r = oscillator_eigen_residual(10, 1.0, &g).unwrap();
        assert!(r < 1e-3, "{r}");
    }

    #[test]
    fn discrete_orthonormality() {
        for alpha in [0.5f64, 1.0, 3.0] {
            let g = GridSpec::centered(4096, 24.0 / alpha.sqrt()).unwrap();
            let phi: Vec<_> = (0..=12)
                .map(|n| sample_hermite_gauss(n, alpha, g).unwrap())
                .collect();
            for m in 0..=12 {
                for n in 0..=12 {
                    let ip = phi[m].inner(&phi[n]).unwrap();
                    let expected = if m == n { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-8 && ip.im.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn scaling_covariance() {
        for n in [0, 3, 9] {
            for x in [-2.0, 0.3, 1.7] {
                let a = 2.7_f64;
                let lhs = hermite_gauss(n, a, x).unwrap();
                let rhs = a.powf(0.25) * hermite_gauss(n, 1.0, a.sqrt() * x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-15 * (1.0 + lhs.abs()));
            }
        }
    }

    #[test]
    fn dispersion_lower_bound() {
        for (b2, b3) in [(0.0, 1.0), (2.0, 0.5), (-1.0, 3.0)] {
            let f = MagneticField::new(0.0, b2, b3).unwrap();
            let d = AnisotropicDispersion::new(f).unwrap();
            if b2 == 0.0 {
                assert_eq!(d.kinetic_coefficient(), 1.0);
            }
            for n in 0..5 {
                for k in [-3.0, 0.0, 0.5, 7.0] {
                    assert!(d.value(n, k) >= f.magnitude());
                }
            }
        }
    }

    #[test]
    fn residual_rejects_small_box() {
        let g = GridSpec::centered(256, 4.0).unwrap();
        assert!(oscillator_eigen_residual(3, 1.0, &g).is_err());
    }
}
