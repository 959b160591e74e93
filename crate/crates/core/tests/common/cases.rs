//! Seeded configurations shared by the unit suites and the acceptance run.

use std::f64::consts::PI;

use num_complex::Complex64;
use quasires::modal::MediumConfig;
use rand::Rng;

use super::bessel_oracle::RationalArg;
use super::{rng, uniform};

pub fn seeded_rational_points(count: usize) -> Vec<(u32, RationalArg)> {
    let mut r = rng(1);
    let den = 32;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let modulus = uniform(&mut r, 0.1, 16.0);
        let angle = uniform(&mut r, -0.95 * PI, 0.95 * PI);
        let re_num = (modulus * angle.cos() * den as f64).round() as i64;
        let im_num = (modulus * angle.sin() * den as f64).round() as i64;
        if re_num == 0 && im_num == 0 {
            continue;
        }
        let n = r.gen_range(0..=24);
        out.push((n, RationalArg { re_num, im_num, den }));
    }
    out
}

/// Lattice `|w| in [0.1, 500]`, `|arg w| <= 3pi/4`, `|Im w| <= 20`.
pub fn wronskian_lattice() -> Vec<Complex64> {
    let mut out = Vec::new();
    let moduli: Vec<f64> = (0..=24).map(|i| 0.1 * 5000f64.powf(i as f64 / 24.0)).collect();
    for &r in &moduli {
        for a in 0..=12 {
            let angle = -0.75 * PI + 1.5 * PI * a as f64 / 12.0;
            let w = Complex64::from_polar(r, angle);
            if w.im.abs() <= 20.0 {
                out.push(w);
            }
        }
    }
    out
}

/// Random admissible transmission configuration.
pub fn random_case(r: &mut rand_chacha::ChaCha8Rng) -> (f64, MediumConfig) {
    let n_i = [0.5, 2.0, 9.0, 100.0][r.gen_range(0..4)];
    let z = Complex64::new(uniform(r, -0.2, 0.2), uniform(r, 0.0, 0.05));
    let k = uniform(r, 0.3, 6.0);
    (k, MediumConfig::new(n_i, z, uniform(r, -PI, PI)).unwrap())
}

pub struct IdentityCase {
    pub k: f64,
    pub n_i: f64,
    pub z: f64,
    pub angle: f64,
    pub alpha: f64,
    pub beta: f64,
    pub outer: f64,
}

impl IdentityCase {
    pub fn medium(&self) -> MediumConfig {
        MediumConfig::new(self.n_i, Complex64::new(self.z, 0.0), self.angle).unwrap()
    }
}

/// Twenty real-`z` configurations for the energy identities.
pub fn identity_cases(stream: u64) -> Vec<IdentityCase> {
    let mut r = rng(stream);
    (0..20)
        .map(|i| IdentityCase {
            k: r.gen_range(0.5..10.0),
            n_i: [0.5, 2.0, 100.0][i % 3],
            z: r.gen_range(-0.2..0.2),
            angle: r.gen_range(0.0..2.0 * PI),
            alpha: r.gen_range(-1.0..2.0),
            beta: r.gen_range(0.0..4.0),
            outer: r.gen_range(1.2..3.0),
        })
        .collect()
}
