//! Exact rational power-series oracle for `J_n` and `Y_n` at rational arguments.
//!
//! The series are accumulated in exact complex rational arithmetic until the
//! terms drop below `1e-30` of the partial sum; only the final logarithm and
//! the division by pi are done in floating point, after all cancellation has
//! happened exactly.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Debug)]
struct CQ {
    re: BigRational,
    im: BigRational,
}

impl CQ {
    fn zero() -> Self {
        CQ { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn real(r: BigRational) -> Self {
        CQ { re: r, im: BigRational::zero() }
    }
    fn add(&self, o: &CQ) -> CQ {
        CQ { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn mul(&self, o: &CQ) -> CQ {
        CQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn scale(&self, s: &BigRational) -> CQ {
        CQ { re: &self.re * s, im: &self.im * s }
    }
    fn inv(&self) -> CQ {
        let d = &self.re * &self.re + &self.im * &self.im;
        CQ { re: &self.re / &d, im: -(&self.im / &d) }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
    fn approx_norm(&self) -> f64 {
        let re = self.re.abs().to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.abs().to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Argument `(re_num + i im_num) / den` held exactly.
#[derive(Clone, Copy, Debug)]
pub struct RationalArg {
    pub re_num: i64,
    pub im_num: i64,
    pub den: i64,
}

impl RationalArg {
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re_num as f64 / self.den as f64, self.im_num as f64 / self.den as f64)
    }
    fn half(self) -> CQ {
        CQ { re: q(self.re_num, 2 * self.den), im: q(self.im_num, 2 * self.den) }
    }
}

/// Exact `sum_k c_k (-w^2/4)^k (w/2)^n / (k! (n+k)!)` with weights `c_k`.
fn weighted_series(n: u32, w: RationalArg, weight: impl Fn(u32) -> BigRational) -> CQ {
    let half = w.half();
    let minus_q = half.mul(&half).scale(&q(-1, 1));
    let mut lead = CQ::real(BigRational::one());
    for i in 1..=n {
        lead = lead.mul(&half).scale(&q(1, i as i64));
    }
    let mut term = lead;
    let mut sum = term.scale(&weight(0));
    let modulus = w.to_c64().norm();
    let mut k = 1u32;
    loop {
        term = term.mul(&minus_q).scale(&q(1, (k as i64) * ((n + k) as i64)));
        let contribution = term.scale(&weight(k));
        sum = sum.add(&contribution);
        if (k as f64) > modulus
            && contribution.approx_norm() <= 1e-30 * sum.approx_norm().max(1e-300)
        {
            break;
        }
        k += 1;
    }
    sum
}

pub fn bessel_j(n: u32, w: RationalArg) -> Complex64 {
    weighted_series(n, w, |_| BigRational::one()).to_c64()
}

fn harmonic(k: u32) -> BigRational {
    (1..=k as i64).fold(BigRational::zero(), |acc, i| acc + q(1, i))
}

/// `Y_n = (2/pi)(ln(w/2) + gamma) J_n - (1/pi)[S_1 + S_2]`, principal branch.
pub fn bessel_y(n: u32, w: RationalArg) -> Complex64 {
    let j = bessel_j(n, w);
    let half = w.half();
    let inv_half = half.inv();
    // S_1 = sum_{k<n} (n-k-1)!/k! (w/2)^{2k-n}
    let mut s1 = CQ::zero();
    for k in 0..n {
        let mut coeff = BigRational::one();
        for i in 1..=(n - k - 1) as i64 {
            coeff *= q(i, 1);
        }
        for i in 1..=k as i64 {
            coeff /= q(i, 1);
        }
        let power = 2 * k as i64 - n as i64;
        let mut p = CQ::real(BigRational::one());
        let base = if power >= 0 { &half } else { &inv_half };
        for _ in 0..power.unsigned_abs() {
            p = p.mul(base);
        }
        s1 = s1.add(&p.scale(&coeff));
    }
    let hn = harmonic(n);
    let s2 = weighted_series(n, w, |k| {
        let mut hk_n = hn.clone();
        for i in (n + 1)..=(n + k) {
            hk_n += q(1, i as i64);
        }
        harmonic(k) + hk_n
    });
    let total = s1.add(&s2).to_c64();
    let z = w.to_c64();
    let pi = std::f64::consts::PI;
    (2.0 / pi) * ((z * 0.5).ln() + EULER_GAMMA) * j - total / pi
}
