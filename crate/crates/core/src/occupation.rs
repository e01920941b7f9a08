//! Bathtub fillings of ordered Landau levels and of the `(level, momentum)` continuum.

use crate::error::{domain, non_negative, Error, Result};
use crate::landau::AnisotropicDispersion;
use crate::numerics::compensated_sum;

/// Optimal occupation numbers `m*(n)` for a fixed total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationFilling {
    occupations: Vec<f64>,
    fractional_level: Option<usize>,
    mass: f64,
}

impl OccupationFilling {
    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    /// The single level with `0 < m(n) < 1`, if any.
    pub fn fractional_level(&self) -> Option<usize> {
        self.fractional_level
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Number of completely filled levels, `⌊mass⌋`.
    pub fn filled_levels(&self) -> usize {
        self.occupations.iter().take_while(|&&m| m == 1.0).count()
    }

    /// `∑ ε_n m(n)` for the given level energies.
    pub fn energy(&self, levels: &[f64]) -> f64 {
        compensated_sum(
            self.occupations
                .iter()
                .zip(levels)
                .filter(|(m, _)| **m > 0.0)
                .map(|(m, e)| m * e),
        )
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(domain("levels", "level energies must be finite"));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("levels", "level energies must be sorted ascending"));
    }
    Ok(())
}

/// Fills `levels` (ascending) in energy order with total occupation `mass`,
/// each level holding at most 1.
///
/// The first `⌊mass⌋` levels are full and level `⌊mass⌋` carries the
/// fractional part `mass − ⌊mass⌋`. Fails with [`Error::Capacity`] when
/// `mass` exceeds the number of supplied levels.
pub fn bathtub_fill(levels: &[f64], mass: f64) -> Result<OccupationFilling> {
    non_negative("mass", mass)?;
    check_levels(levels)?;
    if mass > levels.len() as f64 {
        return Err(Error::Capacity {
            mass,
            supplied: levels.len(),
        });
    }
    let whole = mass.floor();
    let frac = mass - whole;
    let whole = whole as usize;
    let mut occupations = vec![0.0; levels.len()];
    occupations[..whole].iter_mut().for_each(|m| *m = 1.0);
    let fractional_level = if frac > 0.0 {
        occupations[whole] = frac;
        Some(whole)
    } else {
        None
    };
    Ok(OccupationFilling {
        occupations,
        fractional_level,
        mass,
    })
}

/// Minimal `∑ ε_n m(n)` over `0 ≤ m ≤ 1`, `∑ m = mass`.
pub fn bathtub_energy(levels: &[f64], mass: f64) -> Result<f64> {
    Ok(bathtub_fill(levels, mass)?.energy(levels))
}

/// The indicator filling `m*(n,k) = 1{ε_n(k) < δ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumFilling {
    delta: f64,
    dispersion: AnisotropicDispersion,
}

impl ContinuumFilling {
    pub fn new(dispersion: AnisotropicDispersion, delta: f64) -> Result<Self> {
        crate::error::finite("delta", delta)?;
        Ok(ContinuumFilling { delta, dispersion })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dispersion(&self) -> &AnisotropicDispersion {
        &self.dispersion
    }

    pub fn occupation(&self, n: usize, k: f64) -> f64 {
        if self.dispersion.value(n, k) < self.delta {
            1.0
        } else {
            0.0
        }
    }

    /// Occupied momentum interval `(−k_n, k_n)` of level `n`, or `None` if empty.
    pub fn interval(&self, n: usize) -> Option<(f64, f64)> {
        let gap = self.delta - self.dispersion.level(n);
        if gap <= 0.0 {
            return None;
        }
        let k = (gap / self.dispersion.kinetic_coefficient()).sqrt();
        Some((-k, k))
    }

    /// Number of levels with nonempty momentum interval.
    pub fn occupied_levels(&self) -> usize {
        let b = self.dispersion.level(0);
        if self.delta <= b {
            return 0;
        }
        // ε_n < δ  ⇔  n < (δ/|B| − 1)/2
        let bound = (self.delta / b - 1.0) / 2.0;
        let mut n = bound.ceil().max(0.0) as usize;
        while n > 0 && self.dispersion.level(n - 1) >= self.delta {
            n -= 1;
        }
        while self.dispersion.level(n) < self.delta {
            n += 1;
        }
        n
    }
}

/// Length of `{k : ε_n(k) < δ}`, i.e. `2·((δ − ε_n)₊ / c)^{1/2}` with `c` the
/// `k²` coefficient of the dispersion (`c = 1` for `b2 = 0`).
pub fn continuum_fill_measure(dispersion: &AnisotropicDispersion, delta: f64, n: usize) -> f64 {
    let gap = delta - dispersion.level(n);
    if gap <= 0.0 {
        return 0.0;
    }
    2.0 * (gap / dispersion.kinetic_coefficient()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landau::MagneticField;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn landau_levels(b: f64, count: usize) -> Vec<f64> {
        (0..count).map(|n| b * (2 * n + 1) as f64).collect()
    }

    #[test]
    fn fractional_fill() {
        let f = bathtub_fill(&landau_levels(1.0, 6), 2.5).unwrap();
        assert_eq!(f.occupations(), &[1.0, 1.0, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(f.fractional_level(), Some(2));
        assert_eq!(f.filled_levels(), 2);
    }

    #[test]
    fn zero_and_integer_fill() {
        let f = bathtub_fill(&landau_levels(1.0, 4), 0.0).unwrap();
        assert!(f.occupations().iter().all(|&m| m == 0.0));
        let f = bathtub_fill(&landau_levels(1.0, 5), 3.0).unwrap();
        assert_eq!(f.occupations(), &[1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.fractional_level(), None);
    }

    #[test]
    fn energy_examples() {
        let b = 4.0 * std::f64::consts::PI;
        let e = bathtub_energy(&landau_levels(b, 3), 0.5).unwrap();
        assert!((e - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(bathtub_energy(&landau_levels(2.5, 3), 1.0).unwrap(), 2.5);
    }

    #[test]
    fn capacity_and_ordering_errors() {
        assert!(matches!(
            bathtub_fill(&[1.0, 3.0], 2.5),
            Err(Error::Capacity { supplied: 2, .. })
        ));
        assert!(bathtub_fill(&[1.0, 3.0], 2.0).is_ok());
        assert!(bathtub_fill(&[3.0, 1.0], 0.5).is_err());
        assert!(bathtub_fill(&[1.0], -0.1).is_err());
    }

    #[test]
    fn randomized_minimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let count = 8;
            let mut levels: Vec<f64> = (0..count).map(|_| rng.gen_range(-5.0..20.0)).collect();
            levels.sort_by(f64::total_cmp);
            let mass = rng.gen_range(0.0..6.0);
            let best = bathtub_energy(&levels, mass).unwrap();
            for _ in 0..100 {
                // random admissible filling: water-fill random weights
                let mut m: Vec<f64> = (0..count).map(|_| rng.gen::<f64>()).collect();
                let mut remaining = mass;
                for _ in 0..50 {
                    let s: f64 = m.iter().sum();
                    let scale = if s > 0.0 { (s + remaining) / s } else { 1.0 };
                    m.iter_mut().for_each(|v| *v = (*v * scale).min(1.0));
                    remaining = mass - m.iter().sum::<f64>();
                    if remaining.abs() < 1e-13 {
                        break;
                    }
                }
                if remaining.abs() > 1e-9 {
                    continue;
                }
                let e: f64 = m.iter().zip(&levels).map(|(a, b)| a * b).sum();
                assert!(best <= e + 1e-9, "bathtub {best} > random {e}");
            }
        }
    }

    #[test]
    fn continuum_measure_examples() {
        let d = AnisotropicDispersion::new(MagneticField::perpendicular(1.0).unwrap()).unwrap();
        assert!((continuum_fill_measure(&d, 4.0, 0) - 2.0 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(continuum_fill_measure(&d, 3.0, 1), 0.0);
        assert_eq!(continuum_fill_measure(&d, 4.0, 1), 2.0);
        let c = ContinuumFilling::new(d, 4.0).unwrap();
        assert_eq!(c.occupied_levels(), 2);
        assert_eq!(c.occupation(0, 1.7), 1.0);
        assert_eq!(c.occupation(0, 1.8), 0.0);
        let c = ContinuumFilling::new(d, 5.0).unwrap();
        assert_eq!(c.occupied_levels(), 2);
        let c = ContinuumFilling::new(d, 5.0 + 1e-12).unwrap();
        assert_eq!(c.occupied_levels(), 3);
    }

    proptest! {
        #[test]
        fn fill_structure(mass in 0.0..30.0f64, b in 0.1..10.0f64) {
            let levels = landau_levels(b, 32);
            let f = bathtub_fill(&levels, mass).unwrap();
            let total = compensated_sum(f.occupations().iter().copied());
            prop_assert!((total - mass).abs() <= 1e-14 * mass.max(1.0));
            let fl = mass.floor() as usize;
            for (n, &m) in f.occupations().iter().enumerate() {
                prop_assert!((0.0..=1.0).contains(&m));
                if n < fl { prop_assert_eq!(m, 1.0); }
                if n > fl { prop_assert_eq!(m, 0.0); }
            }
            prop_assert!(f.occupations().iter().filter(|&&m| m > 0.0 && m < 1.0).count() <= 1);
        }

        #[test]
        fn moving_mass_upward_costs(mass in 0.5..10.0f64, dm in 1e-3..0.5f64) {
            let levels = landau_levels(1.0, 16);
            let f = bathtub_fill(&levels, mass).unwrap();
            let e0 = f.energy(&levels);
            let mut m = f.occupations().to_vec();
            let from = (0..16).rev().find(|&n| m[n] > 0.0).unwrap();
            let to = (from + 1..16).find(|&n| m[n] < 1.0).unwrap();
            let d = dm.min(m[from]).min(1.0 - m[to]);
            m[from] -= d;
            m[to] += d;
            let e1: f64 = m.iter().zip(&levels).map(|(a, b)| a * b).sum();
            prop_assert!(e1 > e0);
        }
    }
}
