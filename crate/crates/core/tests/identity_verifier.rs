mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use quasires::identities::{
    dtn_positivity, flux_balance, morawetz_check, morawetz_residual, radiation_boundary_functional,
    wronskian_check, Domain, MorawetzParams, PolarField, PolarSample,
};
use quasires::modal::MediumConfig;
use quasires::Error;
use rand::Rng;

use common::cases::identity_cases;

const K2: f64 = 2.19476917403094;

#[test]
fn morawetz_seeded_configurations() {
    for (i, c) in identity_cases(1).iter().enumerate() {
        let cfg = c.medium();
        for (domain, n_const) in [(Domain::Disk, c.n_i), (Domain::Annulus { outer: c.outer }, 1.0)] {
            let p = MorawetzParams { alpha: c.alpha, beta: c.beta, h: 1.0 / c.k, n_const, domain, n_r: 64, n_theta: 256 };
            let rep = morawetz_residual(c.k, &cfg, &p).unwrap_or_else(|e| panic!("config {i}: {e}"));
            assert!(rep.pass, "config {i} {domain:?}: {rep:?}");
            assert!(rep.relative <= 1e-8);
        }
    }
}

#[test]
fn morawetz_standard_choices_at_quasi_resonance() {
    let k = 0.992772133752486;
    let cfg = MediumConfig::new(100.0, Complex64::new(0.0, 0.0), PI / 6.0).unwrap();
    let disk = MorawetzParams::standard(k, &cfg, Domain::Disk, 1.0);
    assert_eq!((disk.alpha, disk.n_r, disk.n_theta, disk.n_const), (0.5, 64, 256, 100.0));
    assert!(morawetz_residual(k, &cfg, &disk).unwrap().pass);
    let ann = MorawetzParams::standard(k, &cfg, Domain::Annulus { outer: 2.0 }, 2.0);
    assert_eq!(ann.n_const, 1.0);
    assert!(morawetz_residual(k, &cfg, &ann).unwrap().pass);
}

/// `v = x^2 + i y + 3`, in polar form, with exact derivatives. It solves no
/// Helmholtz equation, so every term of the identity is exercised.
struct Polynomial {
    h: f64,
}

impl PolarField for Polynomial {
    fn ring(&self, r: f64, thetas: &[f64]) -> quasires::Result<Vec<PolarSample>> {
        Ok(thetas
            .iter()
            .map(|&t| {
                let (s, c) = t.sin_cos();
                let i = Complex64::i();
                PolarSample {
                    v: r * r * c * c + i * r * s + 3.0,
                    v_r: 2.0 * r * c * c + i * s,
                    v_theta: -2.0 * r * r * c * s + i * r * c,
                    h2_lap: Complex64::new(2.0 * self.h * self.h, 0.0),
                }
            })
            .collect())
    }
    fn bandwidth(&self) -> usize {
        2
    }
    fn radial_wavenumber(&self) -> f64 {
        1.0
    }
}

#[test]
fn morawetz_polynomial_field() {
    let mut r = common::rng(2);
    for _ in 0..10 {
        let h = r.gen_range(0.05..1.0);
        for domain in [Domain::Disk, Domain::Annulus { outer: r.gen_range(1.1..4.0) }] {
            let p = MorawetzParams {
                alpha: r.gen_range(-1.0..2.0),
                beta: r.gen_range(-2.0..4.0),
                h,
                n_const: r.gen_range(0.1..50.0),
                domain,
                n_r: 32,
                n_theta: 128,
            };
            let rep = morawetz_check(&Polynomial { h }, &p).unwrap();
            assert!(rep.pass, "{p:?}: {rep:?}");
            assert!(rep.lhs.abs() > 1e-3, "identity should not be trivially zero");
        }
    }
}

#[test]
fn morawetz_inputs_checked() {
    let cfg = MediumConfig::new(2.0, Complex64::new(0.0, 0.0), 0.0).unwrap();
    let mut p = MorawetzParams::standard(1.0, &cfg, Domain::Disk, 1.0);
    p.n_r = 16;
    assert!(matches!(morawetz_residual(1.0, &cfg, &p), Err(Error::InvalidParameter(_))));
    let p = MorawetzParams::standard(1.0, &cfg, Domain::Annulus { outer: 1.0 }, 1.0);
    assert!(matches!(morawetz_residual(1.0, &cfg, &p), Err(Error::InvalidParameter(_))));
    let lossy = cfg.with_z(Complex64::new(0.0, 0.01));
    let p = MorawetzParams::standard(1.0, &lossy, Domain::Disk, 1.0);
    assert!(matches!(morawetz_residual(1.0, &lossy, &p), Err(Error::InvalidParameter(_))));
}

#[test]
fn radiation_seeded_configurations() {
    for (i, c) in identity_cases(3).iter().enumerate() {
        let cfg = c.medium();
        for radius in [1.5, 2.0, 4.0] {
            let rep = radiation_boundary_functional(c.k, &cfg, radius).unwrap();
            assert!(rep.pass, "config {i}, R = {radius}: {rep:?}");
        }
    }
}

#[test]
fn radiation_examples() {
    // no scatterer, no scattered field
    let free = MediumConfig::new(1.0, Complex64::new(0.0, 0.0), 0.3).unwrap();
    let rep = radiation_boundary_functional(2.0, &free, 2.0).unwrap();
    assert_eq!(rep.lhs, 0.0);
    assert!(rep.pass);

    let cfg = MediumConfig::new(100.0, Complex64::new(0.0, 0.0), PI / 6.0).unwrap();
    let r2 = radiation_boundary_functional(K2, &cfg, 2.0).unwrap();
    let r4 = radiation_boundary_functional(K2, &cfg, 4.0).unwrap();
    assert!(r2.lhs <= 0.0 && r4.lhs <= 0.0);
    assert!(r4.lhs.abs() < r2.lhs.abs());
    assert!(matches!(radiation_boundary_functional(K2, &cfg, 1.0), Err(Error::InvalidParameter(_))));
}

#[test]
fn dtn_full_range() {
    let xs: Vec<f64> = (1..=100).map(|i| 0.5 * i as f64).collect();
    let rep = dtn_positivity(0..=100, &xs).unwrap();
    assert!(rep.pass, "{rep:?}");
    let one = dtn_positivity(0..=0, &[1.0]).unwrap();
    assert!((one.lhs - 2.0 / PI).abs() <= 1e-10 * 2.0 / PI);
    let fifty = dtn_positivity(50..=50, &[3.0]).unwrap();
    assert!((fifty.lhs - 2.0 / (3.0 * PI)).abs() <= 1e-10 * 2.0 / (3.0 * PI));
    assert!(matches!(dtn_positivity(0..=3, &[0.0]), Err(Error::InvalidParameter(_))));
}

#[test]
fn wronskian_on_complex_arguments() {
    let args: Vec<Complex64> = (0..12)
        .map(|i| Complex64::from_polar(0.3 + 2.5 * i as f64, 0.1 * i as f64))
        .collect();
    assert!(wronskian_check(60, &args).unwrap().pass);
}

#[test]
fn flux_balance_absorbing() {
    let mut r = common::rng(4);
    for _ in 0..12 {
        let im = 10f64.powf(r.gen_range(-3.0..-1.0));
        let k = r.gen_range(0.5..6.0);
        let n_i = [0.5, 2.0, 100.0][r.gen_range(0..3)];
        let cfg = MediumConfig::new(n_i, Complex64::new(r.gen_range(-0.1..0.1), im), 0.7).unwrap();
        let rep = flux_balance(k, &cfg, r.gen_range(1.2..3.0)).unwrap();
        assert!(rep.pass && rep.relative <= 1e-6, "k = {k}, n_i = {n_i}, Im z = {im}: {rep:?}");
        // absorption: net inward flux
        assert!(rep.lhs <= 0.0);
    }
    let cfg = MediumConfig::new(100.0, Complex64::new(0.0, 0.01), PI / 6.0).unwrap();
    assert!(flux_balance(1.0, &cfg, 2.0).unwrap().pass);
}

#[test]
fn flux_vanishes_for_real_z() {
    for (k, n_i, z) in [(1.0, 100.0, 0.0), (3.3, 2.0, 0.05), (K2, 100.0, 0.0)] {
        let cfg = MediumConfig::new(n_i, Complex64::new(z, 0.0), 0.2).unwrap();
        let rep = flux_balance(k, &cfg, 2.0).unwrap();
        assert_eq!(rep.rhs, 0.0);
        assert!(rep.pass && rep.relative <= 1e-10, "{rep:?}");
    }
}
