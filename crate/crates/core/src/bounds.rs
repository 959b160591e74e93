//! Exponent bookkeeping for the real-`z` bound and the semiclassical maximum
//! principle, evaluated in log space so small `h` never under- or overflows.

use crate::probe::SweepResult;
use crate::{Error, Result};

/// Largest log-magnitude accepted before reporting overflow.
pub const LOG_LIMIT: f64 = 1.0e6;
/// Relative slack on the log-space comparison, to absorb rounding at equality.
const LOG_SLACK: f64 = 1.0e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmpInput {
    pub w: f64,
    /// Half-width `a(h)`.
    pub a: f64,
    /// `delta(h)`, strictly between 0 and 1.
    pub delta: f64,
    pub l: f64,
    pub c: f64,
    /// `b(h) >= 1`.
    pub b: f64,
}

impl ScmpInput {
    fn validate(&self, h: f64) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("a must be positive");
        }
        if !(self.b >= 1.0 && self.b.is_finite()) {
            return bad("b must be at least 1");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("L must be positive");
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return bad("C must be nonnegative");
        }
        if !(h > 0.0 && h.is_finite()) || !self.w.is_finite() {
            return bad("h must be positive and w finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    /// `a^2 >= C h^{-3L} delta^2`.
    pub valid: bool,
    /// `2 ln a - ln(C h^{-3L} delta^2)`; nonnegative when valid.
    pub log_margin: f64,
    pub interval: (f64, f64),
    /// `ln(b delta^{-1} e^{C+1})`.
    pub log_bound: f64,
    /// `exp(log_bound)`, infinite if that exceeds the double range.
    pub bound_value: f64,
}

fn check_log(x: f64) -> Result<f64> {
    if x.abs() > LOG_LIMIT || x.is_nan() {
        return Err(Error::LogOverflow(x));
    }
    Ok(x)
}

/// Maximum-principle bound on `[w - a, w + a]` and whether the width
/// condition holds at `h`.
pub fn scmp_certificate(input: &ScmpInput, h: f64) -> Result<BoundCertificate> {
    input.validate(h)?;
    let lh = h.ln();
    let lhs = 2.0 * input.a.ln();
    let rhs = if input.c == 0.0 {
        f64::NEG_INFINITY
    } else {
        check_log(input.c.ln() - 3.0 * input.l * lh + 2.0 * input.delta.ln())?
    };
    let log_margin = lhs - rhs;
    let slack = LOG_SLACK * (lhs.abs() + if rhs.is_finite() { rhs.abs() } else { 0.0 });
    let log_bound = check_log(input.b.ln() - input.delta.ln() + input.c + 1.0)?;
    Ok(BoundCertificate {
        valid: log_margin >= -slack,
        log_margin,
        interval: (input.w - input.a, input.w + input.a),
        log_bound,
        bound_value: log_bound.exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Smooth,
    Penetrable,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Smooth => "smooth",
            Case::Penetrable => "penetrable",
        }
    }
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Case::Smooth),
            "penetrable" => Ok(Case::Penetrable),
            _ => Err(Error::InvalidParameter(format!("unknown case '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPlan {
    pub d: u32,
    pub n: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub case: Case,
    /// Exponent feeding the width and `delta` choices.
    pub m: f64,
    /// Exponent of the polynomial pole count.
    pub pole_exponent: f64,
    /// `L = M + eps'`.
    pub l: f64,
    /// `a(h) ~ h^{M+N}`.
    pub a_exponent: f64,
    /// `delta(h) ~ h^{5M/2 + N + 3 eps'/2}`.
    pub delta_exponent: f64,
    /// `k` power of the bound before absorbing `eps'` (and `eps` in `M`).
    pub raw_exponent: f64,
    /// `k` power as stated: `5(d+1)/2 + N + eps` or `2 + 5(d+3)/2 + N + eps`.
    pub final_exponent: f64,
}

pub fn exponent_plan(d: u32, n: f64, eps: f64, eps_prime: f64, case: Case) -> Result<ExponentPlan> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(n >= 0.0 && n.is_finite()) || !(eps > 0.0 && eps.is_finite()) || !(eps_prime > 0.0 && eps_prime.is_finite()) {
        return Err(Error::InvalidParameter("need N >= 0 and eps, eps' > 0".into()));
    }
    let df = d as f64;
    let (m, pole_exponent, extra, stated) = match case {
        Case::Smooth => (df + 1.0 + eps, df + 1.0 + eps, 0.0, 2.5 * (df + 1.0)),
        // the width argument runs with one more power than the pole count,
        // and the upper-edge bound carries an extra h^{-2}
        Case::Penetrable => (df + 3.0, df + 2.0, 2.0, 2.0 + 2.5 * (df + 3.0)),
    };
    let delta_exponent = 2.5 * m + n + 1.5 * eps_prime;
    Ok(ExponentPlan {
        d,
        n,
        eps,
        eps_prime,
        case,
        m,
        pole_exponent,
        l: m + eps_prime,
        a_exponent: m + n,
        delta_exponent,
        raw_exponent: extra + delta_exponent,
        final_exponent: stated + n + eps,
    })
}

/// Below which `h` the choices `a = C' dt h^{M+N}`, `delta = C'' dt h^{...}`,
/// `L = M + eps'` satisfy the maximum principle hypotheses with constant `C`.
/// The powers of `h` cancel in the width condition, which therefore reduces to
/// `C'^2 >= C C''^2`; `None` when that fails. Otherwise the bound is from
/// `delta < 1`, capped at 1.
pub fn width_threshold(plan: &ExponentPlan, c_prime: f64, c_dprime: f64, delta_tilde: f64, c: f64) -> Result<Option<f64>> {
    for (name, v) in [("C'", c_prime), ("C''", c_dprime), ("delta_tilde", delta_tilde)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive")));
        }
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter("C must be nonnegative".into()));
    }
    if c > 0.0 && 2.0 * c_prime.ln() < c.ln() + 2.0 * c_dprime.ln() {
        return Ok(None);
    }
    let scale = check_log((c_dprime * delta_tilde).ln())?;
    let h0 = if scale <= 0.0 { 1.0 } else { (-scale / plan.delta_exponent).exp() };
    Ok(Some(h0.min(1.0)))
}

/// The maximum-principle input of the width argument at a given `h`.
pub fn width_input(plan: &ExponentPlan, c_prime: f64, c_dprime: f64, delta_tilde: f64, c: f64, b: f64, h: f64) -> Result<ScmpInput> {
    let lh = h.ln();
    let a = check_log(c_prime.ln() + delta_tilde.ln() + plan.a_exponent * lh)?.exp();
    let delta = check_log(c_dprime.ln() + delta_tilde.ln() + plan.delta_exponent * lh)?.exp();
    Ok(ScmpInput { w: 0.0, a, delta, l: plan.l, c, b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalReport {
    /// Smallest `C_2` with `amp <= (C_2 / dt) k^{final}` off the excluded set.
    pub c2: f64,
    /// `C_2 / dt * k^{final}`, the largest amplification kept.
    pub kept_max: f64,
    pub allowed_measure: f64,
    pub excluded_measure: f64,
    pub excluded_samples: usize,
    /// Even excluding the allowed measure leaves a `+inf` sample.
    pub infeasible: bool,
    /// The allowed measure covers the whole sweep.
    pub degenerate: bool,
}

/// Fit the constant of the real-`z` bound to a sweep, excluding at most
/// `dt k^{-N}` of measure, taken from the largest samples.
pub fn empirical_vs_certified(sweep: &SweepResult, plan: &ExponentPlan, delta_tilde: f64) -> Result<EmpiricalReport> {
    if !(delta_tilde > 0.0 && delta_tilde.is_finite()) {
        return Err(Error::InvalidParameter("delta_tilde must be positive".into()));
    }
    let n = sweep.samples.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let cell = 2.0 * sweep.rho / n as f64;
    let log_k = sweep.k.ln();
    let allowed_measure = check_log(delta_tilde.ln() - plan.n * log_k)?.exp();
    let budget = (allowed_measure / cell * (1.0 + 1e-12)).floor();
    let mut amps: Vec<f64> = sweep.samples.iter().map(|s| s.amp).collect();
    amps.sort_by(|a, b| b.total_cmp(a));
    if budget >= n as f64 {
        return Ok(EmpiricalReport {
            c2: 0.0,
            kept_max: 0.0,
            allowed_measure,
            excluded_measure: 2.0 * sweep.rho,
            excluded_samples: n,
            infeasible: false,
            degenerate: true,
        });
    }
    let q = budget as usize;
    let kept_max = amps[q];
    let excluded_samples = amps.iter().take_while(|&&a| a > kept_max).count();
    let c2 = if kept_max.is_finite() {
        check_log(kept_max.ln() + delta_tilde.ln() - plan.final_exponent * log_k)?.exp()
    } else {
        f64::INFINITY
    };
    Ok(EmpiricalReport {
        c2,
        kept_max,
        allowed_measure,
        excluded_measure: excluded_samples as f64 * cell,
        excluded_samples,
        infeasible: !kept_max.is_finite(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_value_arithmetic() {
        let input = ScmpInput { w: 0.0, a: 1.0, delta: 0.5, l: 1.0, c: 0.0, b: 1.0 };
        let cert = scmp_certificate(&input, 0.1).unwrap();
        assert!((cert.bound_value - 2.0 * std::f64::consts::E).abs() < 1e-14);
        assert!(cert.valid);
    }

    #[test]
    fn stated_exponents() {
        let p = exponent_plan(2, 0.0, 0.1, 0.1, Case::Penetrable).unwrap();
        assert!((p.final_exponent - 14.6).abs() < 1e-12);
        let s = exponent_plan(2, 0.0, 0.1, 0.1, Case::Smooth).unwrap();
        assert!((s.final_exponent - 7.6).abs() < 1e-12);
    }

    #[test]
    fn log_overflow_is_reported() {
        let input = ScmpInput { w: 0.0, a: 1.0, delta: 0.5, l: 1.0e6, c: 1.0, b: 1.0 };
        assert!(matches!(scmp_certificate(&input, 0.1), Err(Error::LogOverflow(_))));
    }
}
