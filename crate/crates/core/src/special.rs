//! Cylinder functions `J_m`, `Y_m`, `H_m^(1)` of nonnegative integer order and
//! complex argument, with first derivatives.
//!
//! Three regimes are used for arguments in the closed right half-plane:
//!
//! * `|w| <= max(2, m/2)`: ascending power series for `J_m` (further out the
//!   alternating terms cancel and cost digits);
//! * otherwise: Miller backward recurrence for `J_m`, normalised with the
//!   generating-function sum `e^{-iw} = J_0 + 2 sum (-i)^k J_k` (or its
//!   conjugate form for `Im w < 0`, so the sum never cancels);
//! * `Y_0`, `Y_1` from the Neumann series in the `J_{2k}` below `|w| = 40`
//!   and from the Hankel asymptotic expansion above it, then forward
//!   recurrence for `Y_m`, which is the dominant solution.
//!
//! Left half-plane arguments are reflected: `J_m(-w) = (-1)^m J_m(w)` and
//! `Y_m(w) = (-1)^m (Y_m(-w) +- 2i J_m(-w))` with the sign of `Im w`.
//! Values are not exponentially scaled; anything that would overflow is
//! reported as [`Error::Overflow`].

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 1000;
/// Largest supported `|w|`.
pub const MAX_MODULUS: f64 = 1.0e4;
/// Largest supported `|Im w|`.
pub const MAX_IMAG: f64 = 50.0;

const TAYLOR_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 40.0;
const HANKEL_SWITCH_IM: f64 = 3.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_LIMIT: f64 = 1.0e200;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `J`, `Y`, `H^(1)` and their first derivatives for one order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylValue {
    pub order: u32,
    pub arg: Complex64,
    pub j: Complex64,
    pub jp: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
    pub h1: Complex64,
    pub h1p: Complex64,
}

/// `J_m` and `Y_m` for consecutive orders `0..=max_order + 1` at one argument.
///
/// The extra order makes derivatives available up to `max_order`.
#[derive(Debug, Clone)]
pub struct CylSeq {
    arg: Complex64,
    j: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl CylSeq {
    pub fn arg(&self) -> Complex64 {
        self.arg
    }

    /// Highest order whose derivative is available.
    pub fn max_order(&self) -> u32 {
        (self.j.len() - 2) as u32
    }

    pub fn j(&self, m: u32) -> Complex64 {
        self.j[m as usize]
    }

    pub fn y(&self, m: u32) -> Complex64 {
        self.y[m as usize]
    }

    pub fn h1(&self, m: u32) -> Complex64 {
        self.j(m) + I * self.y(m)
    }

    pub fn jp(&self, m: u32) -> Complex64 {
        derivative(&self.j, m as usize)
    }

    pub fn yp(&self, m: u32) -> Complex64 {
        derivative(&self.y, m as usize)
    }

    pub fn h1p(&self, m: u32) -> Complex64 {
        self.jp(m) + I * self.yp(m)
    }

    pub fn value(&self, m: u32) -> CylValue {
        let (j, jp, y, yp) = (self.j(m), self.jp(m), self.y(m), self.yp(m));
        CylValue {
            order: m,
            arg: self.arg,
            j,
            jp,
            y,
            yp,
            h1: j + I * y,
            h1p: jp + I * yp,
        }
    }
}

/// `J_m` for consecutive orders `0..=max_order + 1` (no second kind).
#[derive(Debug, Clone)]
pub struct BesselJSeq {
    arg: Complex64,
    j: Vec<Complex64>,
}

impl BesselJSeq {
    pub fn arg(&self) -> Complex64 {
        self.arg
    }

    pub fn max_order(&self) -> u32 {
        (self.j.len() - 2) as u32
    }

    pub fn j(&self, m: u32) -> Complex64 {
        self.j[m as usize]
    }

    pub fn jp(&self, m: u32) -> Complex64 {
        derivative(&self.j, m as usize)
    }

    /// Second derivative from Bessel's equation,
    /// `J'' = -J'/w - (1 - m^2/w^2) J`.
    pub fn jpp(&self, m: u32) -> Complex64 {
        second_derivative(m, self.arg, self.j(m), self.jp(m))
    }
}

/// Second derivative of any cylinder function of order `m` from its value and slope.
pub fn second_derivative(m: u32, w: Complex64, c: Complex64, cp: Complex64) -> Complex64 {
    let mf = m as f64;
    -cp / w - (ONE - mf * mf / (w * w)) * c
}

fn derivative(c: &[Complex64], m: usize) -> Complex64 {
    if m == 0 {
        -c[1]
    } else {
        (c[m - 1] - c[m + 1]) * 0.5
    }
}

fn check_domain(order: u32, w: Complex64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Domain(format!("order {order} > {MAX_ORDER}")));
    }
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {w}")));
    }
    if w.norm() > MAX_MODULUS {
        return Err(Error::Domain(format!("|w| = {} > {MAX_MODULUS}", w.norm())));
    }
    if w.im.abs() > MAX_IMAG {
        return Err(Error::Domain(format!("|Im w| = {} > {MAX_IMAG}", w.im.abs())));
    }
    Ok(())
}

fn check_branch(w: Complex64) -> Result<()> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::Domain(format!(
            "argument {w} on the branch cut (-inf, 0] of Y_m"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_m(w)`.
pub fn cyl_j(m: u32, w: Complex64) -> Result<Complex64> {
    check_domain(m, w)?;
    if w.norm() <= TAYLOR_RADIUS.max(m as f64 / 2.0) {
        return Ok(j_taylor(m as usize, w));
    }
    Ok(j_values(m as usize, w, 0)?[m as usize])
}

/// Bessel function of the second kind `Y_m(w)`, principal branch.
pub fn cyl_y(m: u32, w: Complex64) -> Result<Complex64> {
    Ok(cyl_seq(m, w)?.y(m))
}

/// All six values `J, J', Y, Y', H^(1), H^(1)'` at order `m`.
pub fn cyl_all(m: u32, w: Complex64) -> Result<CylValue> {
    Ok(cyl_seq(m, w)?.value(m))
}

/// `J` for orders `0..=max_order + 1`.
pub fn j_seq(max_order: u32, w: Complex64) -> Result<BesselJSeq> {
    check_domain(max_order, w)?;
    let j = j_values(max_order as usize + 1, w, 0)?;
    Ok(BesselJSeq { arg: w, j })
}

/// `J` and `Y` for orders `0..=max_order + 1`, Wronskian-checked.
pub fn cyl_seq(max_order: u32, w: Complex64) -> Result<CylSeq> {
    check_domain(max_order, w)?;
    check_branch(w)?;
    let top = max_order as usize + 1;
    let mut last_residual = f64::NAN;
    for attempt in 0..3 {
        let (j, y) = jy_any(top, w, attempt)?;
        last_residual = wronskian_defect(w, &j, &y);
        if last_residual <= 1.0e-10 {
            return Ok(CylSeq { arg: w, j, y });
        }
        if w.norm() <= TAYLOR_RADIUS {
            break;
        }
    }
    Err(Error::Accuracy(format!(
        "Wronskian defect {last_residual:e} at w = {w}, max order {max_order}"
    )))
}

/// `J` and `Y` anywhere off the cut, by conjugation and reflection onto the
/// closed first quadrant.
fn jy_any(top: usize, w: Complex64, attempt: u32) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if w.im < 0.0 {
        let (mut j, mut y) = jy_any(top, w.conj(), attempt)?;
        for x in j.iter_mut().chain(y.iter_mut()) {
            *x = x.conj();
        }
        return Ok((j, y));
    }
    if w.re < 0.0 {
        // Y_m(-z) = (-1)^m (Y_m(z) + 2i J_m(z)) for Im z < 0
        let (mut j, mut y) = jy_any(top, -w, attempt)?;
        for (m, (a, b)) in j.iter_mut().zip(y.iter_mut()).enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *b = (*b + 2.0 * I * *a) * sign;
            *a *= sign;
        }
        return Ok((j, y));
    }
    jy_right(top, w, attempt)
}

/// Largest scaled Wronskian defect over orders with normal-range `J`.
fn wronskian_defect(w: Complex64, j: &[Complex64], y: &[Complex64]) -> f64 {
    let target = FRAC_2_PI / w;
    let mut worst: f64 = 0.0;
    if !(j[0].norm() > 0.0 && j[0].norm().is_finite()) {
        return f64::INFINITY;
    }
    for n in 0..j.len() - 1 {
        if j[n].norm() < 1.0e-280 || j[n + 1].norm() < 1.0e-280 {
            continue;
        }
        let a = j[n + 1] * y[n];
        let b = j[n] * y[n + 1];
        let defect = (a - b - target).norm() / (1.0 + a.norm() + b.norm());
        worst = worst.max(defect);
    }
    worst
}

/// `J` and `Y` in the closed first quadrant.
///
/// For small `Im w` the forward recurrence runs on `Y` itself. Higher up, the
/// part of `Y` that dominates at large order is exponentially small against
/// `|Y_0|`, so the recurrence runs on `H^(1)` instead and `Y = -i (H^(1) - J)`.
fn jy_right(top: usize, w: Complex64, attempt: u32) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let modulus = w.norm();
    let hankel = w.im >= HANKEL_SWITCH_IM;
    let need = if modulus >= ASYMPTOTIC_RADIUS || hankel {
        top.max(1)
    } else {
        top.max(neumann_top(modulus))
    };
    let mut j = j_values_right(need, w, attempt)?;
    let (s0, s1) = if modulus >= ASYMPTOTIC_RADIUS {
        if hankel {
            (hankel_h1(0, w), hankel_h1(1, w))
        } else {
            (hankel_asymptotic(0, w).1, hankel_asymptotic(1, w).1)
        }
    } else if hankel {
        h1_integral(w)
    } else {
        neumann_y01(w, &j)
    };
    let mut seq = Vec::with_capacity(top + 1);
    seq.push(s0);
    if top >= 1 {
        seq.push(s1);
    }
    let two_over_w = 2.0 / w;
    for n in 1..top {
        let next = (n as f64) * two_over_w * seq[n] - seq[n - 1];
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::Overflow(format!("Y_{} ({w})", n + 1)));
        }
        seq.push(next);
    }
    j.truncate(top + 1);
    if hankel {
        for (h, jn) in seq.iter_mut().zip(&j) {
            *h = -I * (*h - *jn);
        }
    }
    Ok((j, seq))
}

/// `H^(1)_0, H^(1)_1` for `Im w > 0` from `H^(1)_n(w) = 2 K_n(-iw) / (pi i^{n+1})`
/// and `K_n(z) = int_0^inf exp(-z cosh t) cosh(nt) dt`, trapezoidal rule.
///
/// The integrand is analytic in the strip `|Im t| < arg w`, which sets the step.
fn h1_integral(w: Complex64) -> (Complex64, Complex64) {
    let z = -I * w;
    let step = (PI * w.arg() / 40.0).min(0.1);
    let decay = w.im;
    let mut k0 = 0.5 * ONE;
    let mut k1 = 0.5 * ONE;
    let mut i = 1usize;
    loop {
        let t = i as f64 * step;
        let ch = t.cosh();
        if decay * (ch - 1.0) - t > 45.0 {
            break;
        }
        let f = (-z * (ch - 1.0)).exp();
        k0 += f;
        k1 += f * ch;
        i += 1;
    }
    // common factor exp(-z) pulled out of both integrals
    let common = (-z).exp() * step * 2.0 / PI;
    (common * k0 / I, -common * k1)
}

/// `J_n` for `0..=top`, any half-plane.
fn j_values(top: usize, w: Complex64, attempt: u32) -> Result<Vec<Complex64>> {
    if w.re < 0.0 {
        let mut v = j_values_right(top, -w, attempt)?;
        for x in v.iter_mut().skip(1).step_by(2) {
            *x = -*x;
        }
        return Ok(v);
    }
    j_values_right(top, w, attempt)
}

fn j_values_right(top: usize, w: Complex64, attempt: u32) -> Result<Vec<Complex64>> {
    let modulus = w.norm();
    if modulus == 0.0 {
        let mut v = vec![ZERO; top + 1];
        v[0] = ONE;
        return Ok(v);
    }
    if modulus <= TAYLOR_RADIUS {
        return Ok((0..=top).map(|n| j_taylor(n, w)).collect());
    }
    let start = miller_start(top, modulus) << attempt;
    Ok(j_miller(top, w, start))
}

/// Ascending series `J_n(w) = (w/2)^n / n! * sum_k (-w^2/4)^k / (k! (n+1)_k)`.
fn j_taylor(n: usize, w: Complex64) -> Complex64 {
    let half = w * 0.5;
    let hm = half.norm();
    if hm == 0.0 {
        return if n == 0 { ONE } else { ZERO };
    }
    if n as f64 * hm.ln() - ln_factorial(n) < -740.0 {
        return ZERO;
    }
    let mut lead = ONE;
    for i in 1..=n {
        lead *= half / i as f64;
    }
    let q = -(half * half);
    let mut term = ONE;
    let mut sum = ONE;
    let mut k = 1usize;
    loop {
        term *= q / ((k * (n + k)) as f64);
        sum += term;
        if (k as f64) > hm && term.norm() <= 1.0e-17 * sum.norm() {
            break;
        }
        if k > 1000 {
            break;
        }
        k += 1;
    }
    lead * sum
}

/// Backward-recurrence start order.
///
/// At least `top + 15 + ceil|w|`, and far enough past the turning point that
/// `|J_N / Y_N|` is `e^{-40}` below `|J_top / Y_top|`.
fn miller_start(top: usize, modulus: f64) -> usize {
    let floor = top + 15 + modulus.ceil() as usize;
    let log_ratio = |n: usize| -> f64 {
        let n = n.max(1);
        let v = PI.ln() + 2.0 * n as f64 * (modulus / 2.0).ln()
            - ln_factorial(n)
            - ln_factorial(n - 1);
        v.min(0.0)
    };
    let target = log_ratio(top) - 40.0;
    let mut n = top.max(modulus.ceil() as usize) + 1;
    while log_ratio(n) > target {
        n += 1;
    }
    floor.max(n + 5).max(neumann_top(modulus))
}

/// Order beyond which `|J_n(w)|` is below `1e-18` of the leading orders.
fn neumann_top(modulus: f64) -> usize {
    let half = (modulus / 2.0).max(1.0e-300);
    let mut n = (modulus.ceil() as usize).max(2);
    while n as f64 * half.ln() - ln_factorial(n) > -41.5 {
        n += 1;
    }
    n + 2
}

fn j_miller(top: usize, w: Complex64, start: usize) -> Vec<Complex64> {
    let mut p = vec![ZERO; start + 2];
    p[start] = Complex64::new(1.0e-30, 0.0);
    let two_over_w = 2.0 / w;
    for n in (1..=start).rev() {
        let prev = (n as f64) * two_over_w * p[n] - p[n + 1];
        p[n - 1] = prev;
        if prev.norm() > RESCALE_LIMIT {
            let s = 1.0 / RESCALE_LIMIT;
            for x in &mut p[n - 1..] {
                *x *= s;
            }
        }
    }
    // e^{-iw} = J_0 + 2 sum (-i)^k J_k for Im w >= 0; conjugate phases otherwise.
    let upper = w.im >= 0.0;
    let mut sum = p[0];
    for (k, x) in p.iter().enumerate().take(start + 1).skip(1) {
        let phase = match (k % 4, upper) {
            (0, _) => ONE,
            (2, _) => -ONE,
            (1, true) | (3, false) => -I,
            _ => I,
        };
        sum += 2.0 * phase * *x;
    }
    let target = if upper { (-I * w).exp() } else { (I * w).exp() };
    let mut scale = cdiv(target, sum);
    if w.im == 0.0 {
        // real argument, real result
        scale.im = 0.0;
    }
    p.truncate(top + 1);
    for x in &mut p {
        *x *= scale;
    }
    p
}

/// `Y_0`, `Y_1` from Neumann series in `J_n`.
///
/// `Y_0 = (2/pi)(ln(w/2) + gamma) J_0 - (4/pi) sum (-1)^k J_{2k}/k` and its
/// negated derivative for `Y_1`.
fn neumann_y01(w: Complex64, j: &[Complex64]) -> (Complex64, Complex64) {
    let lg = (w * 0.5).ln() + EULER_GAMMA;
    let mut s0 = ZERO;
    let mut s1 = ZERO;
    let mut k = 1usize;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += j[2 * k] * (sign / kf);
        s1 += (j[2 * k - 1] - j[2 * k + 1]) * (sign / kf);
        k += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = FRAC_2_PI * (lg * j[1] - j[0] / w) + FRAC_2_PI * s1;
    (y0, y1)
}

/// Hankel large-argument expansion, returns `(J_m, Y_m)` for `Re w >= 0`.
fn hankel_asymptotic(m: u32, w: Complex64) -> (Complex64, Complex64) {
    let (p, q) = hankel_pq(m, w);
    let chi = w - (m as f64 / 2.0 + 0.25) * PI;
    let pref = (FRAC_2_PI / w).sqrt();
    let (c, s) = (chi.cos(), chi.sin());
    (pref * (p * c - q * s), pref * (p * s + q * c))
}

/// The `P`, `Q` series, summed until the terms start to grow.
fn hankel_pq(m: u32, w: Complex64) -> (Complex64, Complex64) {
    let mu = 4.0 * (m as f64) * (m as f64);
    let inv = 1.0 / w;
    let mut p = ONE;
    let mut q = ZERO;
    let mut term = ONE;
    let mut prev = f64::INFINITY;
    for k in 1..400usize {
        let odd = (2 * k - 1) as f64;
        let next = term * ((mu - odd * odd) / (8.0 * k as f64)) * inv;
        let mag = next.norm();
        if mag > prev {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1.0e-18 {
            break;
        }
        prev = mag;
    }
    (p, q)
}

/// `H^(1)_m` from the large-argument expansion, accurate where it is small.
fn hankel_h1(m: u32, w: Complex64) -> Complex64 {
    let (p, q) = hankel_pq(m, w);
    let chi = w - (m as f64 / 2.0 + 0.25) * PI;
    (FRAC_2_PI / w).sqrt() * (p + I * q) * (I * chi).exp()
}

/// `a / b` without forming `|b|^2`.
pub(crate) fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let r = b.norm();
    (a / r) * (b.conj() / r)
}

/// `ln n!`, exact summation for small `n`, Stirling series above.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    let x2 = x * x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}
