use std::f64::consts::PI;

use magkin::kinetic2d::{omega2d_bathtub_oracle, omega2d_closed, omega2d_piecewise_form};
use magkin::kinetic3d::{
    fermi_level, omega3d, omega3d_canonical, omega3d_oracle, ClosedFormVariant, Omega3dMethod, DEFAULT_FERMI_TOL,
};
use magkin::landau::{AnisotropicDispersion, MagneticField};
use magkin::occupation::{bathtub_energy, bathtub_fill};
use proptest::prelude::*;

/// Landau levels `b(2n+1)/2` of the 2d gas as a bathtub: each holds `b/2π`.
fn omega2d_by_levels(b: f64, rho: f64) -> f64 {
    let capacity = b / (2.0 * PI);
    let count = (rho / capacity).ceil() as usize + 1;
    let levels: Vec<f64> = (0..count).map(|n| 0.5 * b * (2 * n + 1) as f64).collect();
    capacity * bathtub_energy(&levels, rho / capacity).unwrap()
}

#[test]
fn omega2d_agrees_with_generic_bathtub() {
    for &(b, rho) in &[(1.0, 0.3), (2.0, 1.7), (0.4, 3.3), (7.0, 0.01), (PI, 2.0)] {
        let w = omega2d_closed(b, rho).unwrap().omega;
        assert!((w - omega2d_by_levels(b, rho)).abs() < 1e-12 * w.max(1.0));
    }
}

#[test]
fn omega3d_methods_and_zero_density() {
    let oracle = omega3d(1.3, 0.8, Omega3dMethod::Oracle).unwrap().omega;
    let proof = omega3d(1.3, 0.8, Omega3dMethod::Closed(ClosedFormVariant::ProofForm)).unwrap().omega;
    let prop = omega3d(1.3, 0.8, Omega3dMethod::Closed(ClosedFormVariant::PropForm)).unwrap().omega;
    assert!((oracle - proof).abs() < 1e-12 * oracle);
    assert!((oracle - prop).abs() > 1e-3 * oracle);
    assert_eq!(omega3d_canonical(2.0, 0.0).unwrap(), 0.0);
    assert!(omega3d_oracle(0.0, 1.0).is_err());
}

#[test]
fn continuum_fill_reproduces_omega3d_for_tilted_fields() {
    // rotating the field leaves the 3d gas invariant: integrate the
    // anisotropic dispersion ε_n(k) over its occupied set and compare
    let field = MagneticField::new(0.0, 0.6, 0.8).unwrap();
    let disp = AnisotropicDispersion::new(field).unwrap();
    let rho = 0.9;
    let delta = fermi_level(1.0, rho, DEFAULT_FERMI_TOL).unwrap().delta;
    let c = disp.kinetic_coefficient();
    let mut energy = 0.0;
    let mut count = 0.0;
    let mut n = 0;
    while disp.level(n) < delta {
        let kmax = ((delta - disp.level(n)) / c).sqrt();
        let steps = 4000;
        let dk = 2.0 * kmax / steps as f64;
        for i in 0..steps {
            let k = -kmax + (i as f64 + 0.5) * dk;
            energy += disp.value(n, k) * dk;
        }
        count += 2.0 * kmax;
        n += 1;
    }
    // the momentum along x3 carries the measure (b3/2π)(1/2π) dk
    let measure = field.b3() / (4.0 * PI * PI);
    assert!((measure * count - rho).abs() < 1e-10 * rho);
    let per_volume = 0.5 * measure * energy;
    let want = omega3d_canonical(1.0, rho).unwrap();
    assert!((per_volume - want).abs() < 1e-4 * want, "{per_volume} vs {want}");
}

proptest! {
    #[test]
    fn omega2d_is_convex_and_piecewise_linear(b in 0.1f64..20.0, rho in 0.0f64..8.0, d in 1e-4f64..0.5) {
        let w = |r: f64| omega2d_closed(b, r).unwrap().omega;
        let lo = (rho - d).max(0.0);
        let hi = rho + d;
        prop_assert!(w(rho) <= 0.5 * (w(lo) + w(hi)) + 1e-9 * w(hi).max(1.0) || lo == 0.0);
        let seg = omega2d_piecewise_form(b, rho).unwrap();
        prop_assert!((seg.evaluate(rho) - w(rho)).abs() <= 1e-10 * w(rho).max(1.0));
        prop_assert!((omega2d_bathtub_oracle(b, rho).unwrap() - w(rho)).abs() <= 1e-12 * w(rho).max(1.0));
    }

    #[test]
    fn fermi_level_increases_with_density(b in 0.05f64..10.0, rho in 0.01f64..5.0, f in 1.01f64..3.0) {
        let d1 = fermi_level(b, rho, DEFAULT_FERMI_TOL).unwrap().delta;
        let d2 = fermi_level(b, f * rho, DEFAULT_FERMI_TOL).unwrap().delta;
        prop_assert!(d2 > d1);
        prop_assert!(d1 > b);
    }

    #[test]
    fn omega3d_is_increasing_and_above_free_gas_scale(b in 0.05f64..10.0, rho in 0.01f64..5.0) {
        let w = omega3d_canonical(b, rho).unwrap();
        let w2 = omega3d_canonical(b, 1.05 * rho).unwrap();
        prop_assert!(w2 > w);
        // the field-free value (3/10)(6π²)^{2/3} ρ^{5/3} is a lower bound
        let free = 0.3 * (6.0 * PI * PI).powf(2.0 / 3.0) * rho.powf(5.0 / 3.0);
        prop_assert!(w >= free * (1.0 - 1e-12));
    }

    #[test]
    fn bathtub_beats_random_feasible_occupations(
        gaps in prop::collection::vec(0.0f64..2.0, 2..12),
        frac in 0.0f64..1.0,
        weights in prop::collection::vec(0.0f64..1.0, 12),
    ) {
        let mut levels = Vec::with_capacity(gaps.len());
        let mut acc = 0.0;
        for g in &gaps {
            acc += g;
            levels.push(acc);
        }
        let mass = frac * levels.len() as f64;
        let fill = bathtub_fill(&levels, mass).unwrap();
        prop_assert!((fill.mass() - mass).abs() < 1e-12 * levels.len() as f64);
        // any other admissible occupation: scale weights into [0,1] with the same mass
        let w: Vec<f64> = weights[..levels.len()].to_vec();
        let total: f64 = w.iter().sum();
        if total > 0.0 && mass > 0.0 {
            let occ: Vec<f64> = w.iter().map(|x| x * mass / total).collect();
            if occ.iter().all(|&o| o <= 1.0) {
                let other: f64 = occ.iter().zip(&levels).map(|(o, l)| o * l).sum();
                prop_assert!(fill.energy(&levels) <= other + 1e-12);
            }
        }
    }
}
