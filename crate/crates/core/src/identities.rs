//! Quadrature checks of the integrated Morawetz identity, the outgoing
//! boundary inequality, Dirichlet-to-Neumann positivity and the flux balance,
//! all evaluated on exact series solutions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::modal::{i_pow, MediumConfig, ModalExpansion, Piece, DEFAULT_TAIL_TOL};
use crate::quadrature::composite_gauss_legendre;
use crate::special::cyl_seq;
use crate::{Error, Result};

/// Spatial dimension of every check here.
const DIM: f64 = 2.0;
pub const MORAWETZ_TOL: f64 = 1.0e-8;
pub const BUDGET_TOL: f64 = 1.0e-9;
pub const RADIATION_TOL: f64 = 1.0e-10;
pub const DTN_TOL: f64 = 1.0e-10;
pub const FLUX_TOL: f64 = 1.0e-6;
/// Radial phase allowed per Gauss-Legendre panel.
const PANEL_SPAN: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// The unit disk, `n` is the interior constant.
    Disk,
    /// `1 < r < outer`, free space.
    Annulus { outer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzParams {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub n_const: f64,
    pub domain: Domain,
    /// Gauss-Legendre nodes per radial panel.
    pub n_r: usize,
    /// Uniform angular nodes; raised automatically to resolve the mode count.
    pub n_theta: usize,
}

impl MorawetzParams {
    /// `alpha = (d-1)/2`, `h = 1/k`, `n` matching the domain piece.
    pub fn standard(k: f64, cfg: &MediumConfig, domain: Domain, beta: f64) -> Self {
        let n_const = match domain {
            Domain::Disk => cfg.n_i,
            Domain::Annulus { .. } => 1.0,
        };
        MorawetzParams { alpha: 0.5 * (DIM - 1.0), beta, h: 1.0 / k, n_const, domain, n_r: 64, n_theta: 256 }
    }

    fn validate(&self) -> Result<()> {
        if self.n_r < 32 || self.n_theta < 128 {
            return Err(Error::InvalidParameter(format!(
                "need n_r >= 32 and n_theta >= 128, got {} and {}",
                self.n_r, self.n_theta
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {}", self.h)));
        }
        if let Domain::Annulus { outer } = self.domain {
            if !(outer > 1.0 && outer.is_finite()) {
                return Err(Error::InvalidParameter(format!("annulus needs R > 1, got {outer}")));
            }
        }
        Ok(())
    }
}

/// Both sides of a checked relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl QuadReport {
    fn compare(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        let relative = residual / lhs.abs().max(rhs.abs()).max(1.0);
        QuadReport { lhs, rhs, residual, relative, tolerance, pass: relative <= tolerance }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Field data at one point: value, `d/dr`, `d/dtheta` and `h^2 Laplacian`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub v: Complex64,
    pub v_r: Complex64,
    pub v_theta: Complex64,
    pub h2_lap: Complex64,
}

/// Anything that can be sampled on circles.
pub trait PolarField: Sync {
    fn ring(&self, r: f64, thetas: &[f64]) -> Result<Vec<PolarSample>>;
    /// Angular bandwidth; the trapezoid rule needs more than twice this.
    fn bandwidth(&self) -> usize;
    /// Radial wavenumber, used to size quadrature panels.
    fn radial_wavenumber(&self) -> f64;
}

/// One piece of a series solution with `h^2 Lap v = -lambda (h k)^2 v`.
pub struct SeriesField<'a> {
    pub expansion: &'a ModalExpansion,
    pub piece: Piece,
    pub h: f64,
}

impl SeriesField<'_> {
    fn lambda(&self) -> Complex64 {
        match self.piece {
            Piece::Interior => self.expansion.cfg.nbar().powi(2),
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

impl PolarField for SeriesField<'_> {
    fn ring(&self, r: f64, thetas: &[f64]) -> Result<Vec<PolarSample>> {
        let radial = self.expansion.radial(self.piece, r)?;
        let t0 = self.expansion.cfg.incidence_angle;
        let hk = self.h * self.expansion.k;
        let lap = -self.lambda() * hk * hk;
        Ok(thetas
            .iter()
            .map(|&theta| {
                let phi = theta - t0;
                let mut s = PolarSample {
                    v: Complex64::new(0.0, 0.0),
                    v_r: Complex64::new(0.0, 0.0),
                    v_theta: Complex64::new(0.0, 0.0),
                    h2_lap: Complex64::new(0.0, 0.0),
                };
                for (m, &(g, gp)) in radial.iter().enumerate() {
                    let w = if m == 0 { 1.0 } else { 2.0 } * i_pow(m as u32);
                    let (sin, cos) = (m as f64 * phi).sin_cos();
                    s.v += w * cos * g;
                    s.v_r += w * cos * gp;
                    s.v_theta -= w * (m as f64 * sin) * g;
                }
                s.h2_lap = lap * s.v;
                s
            })
            .collect())
    }

    fn bandwidth(&self) -> usize {
        self.expansion.order as usize
    }

    fn radial_wavenumber(&self) -> f64 {
        match self.piece {
            Piece::Interior => self.expansion.cfg.nbar().norm() * self.expansion.k,
            _ => self.expansion.k,
        }
    }
}

fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

fn angular_nodes(requested: usize, bandwidth: usize) -> usize {
    requested.max(4 * bandwidth + 16)
}

/// Result of one quadrature pass: the two sides plus the integral of the
/// absolute integrands, which sets the scale for the refinement check.
struct Sides {
    lhs: f64,
    rhs: f64,
    scale: f64,
}

fn morawetz_sides(field: &dyn PolarField, p: &MorawetzParams, n_r: usize, n_theta: usize) -> Result<Sides> {
    let (inner, outer) = match p.domain {
        Domain::Disk => (0.0, 1.0),
        Domain::Annulus { outer } => (1.0, outer),
    };
    let h = p.h;
    let n = p.n_const;
    let (alpha, beta) = (p.alpha, p.beta);
    let shift = Complex64::new(alpha, -beta / h);
    let thetas = angles(n_theta);
    let dtheta = 2.0 * PI / n_theta as f64;
    let panels = ((field.radial_wavenumber() * (outer - inner)) / PANEL_SPAN).ceil().max(1.0) as usize;
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for (r, w) in composite_gauss_legendre(n_r, panels, inner, outer)? {
        let ring = field.ring(r, &thetas)?;
        let mut acc = 0.0;
        let mut acc_abs = 0.0;
        for s in &ring {
            let mv = r * s.v_r + shift * s.v;
            let lv = s.h2_lap + n * s.v;
            let grad2 = s.v_r.norm_sqr() + s.v_theta.norm_sqr() / (r * r);
            let t1 = 2.0 * (mv.conj() * lv).re;
            let t2 = (2.0 * alpha - DIM + 2.0) * h * h * grad2;
            let t3 = (DIM - 2.0 * alpha) * n * s.v.norm_sqr();
            acc += t1 + t2 + t3;
            acc_abs += t1.abs() + t2.abs() + t3.abs();
        }
        lhs += w * r * dtheta * acc;
        scale += w * r * dtheta * acc_abs;
    }
    let mut circles = vec![(outer, 1.0)];
    if inner > 0.0 {
        circles.push((inner, -1.0));
    }
    let coef = Complex64::new(alpha, beta / h);
    let mut rhs = 0.0;
    for (rho, sigma) in circles {
        let ring = field.ring(rho, &thetas)?;
        let mut acc = 0.0;
        let mut acc_abs = 0.0;
        for s in &ring {
            let dn = sigma * s.v_r;
            let a = sigma * rho * (h * h * dn.norm_sqr() - h * h * s.v_theta.norm_sqr() / (rho * rho) + n * s.v.norm_sqr());
            let b = 2.0 * h * (coef * s.v.conj() * h * dn).re;
            acc += a + b;
            acc_abs += a.abs() + b.abs();
        }
        rhs += rho * dtheta * acc;
        scale += rho * dtheta * acc_abs;
    }
    Ok(Sides { lhs, rhs, scale })
}

/// Checks the integrated Morawetz identity for an arbitrary field on the
/// chosen domain piece, refining once to confirm the quadrature has settled.
pub fn morawetz_check(field: &dyn PolarField, params: &MorawetzParams) -> Result<QuadReport> {
    params.validate()?;
    let n_theta = angular_nodes(params.n_theta, field.bandwidth());
    let coarse = morawetz_sides(field, params, params.n_r, n_theta)?;
    let fine = morawetz_sides(field, params, 2 * params.n_r, 2 * n_theta)?;
    settled(&coarse, &fine)?;
    Ok(QuadReport::compare(fine.lhs, fine.rhs, MORAWETZ_TOL))
}

fn settled(coarse: &Sides, fine: &Sides) -> Result<()> {
    let scale = fine.scale.max(1.0);
    let dl = (coarse.lhs - fine.lhs).abs() / scale;
    let dr = (coarse.rhs - fine.rhs).abs() / scale;
    if dl > BUDGET_TOL || dr > BUDGET_TOL {
        return Err(Error::QuadratureBudget(format!(
            "doubling nodes moved the sides by {dl:.3e} and {dr:.3e} relative"
        )));
    }
    Ok(())
}

/// Morawetz identity for the series solution: the interior field on the disk,
/// or incident plus scattered on the annulus. `z` must be real.
pub fn morawetz_residual(k: f64, cfg: &MediumConfig, params: &MorawetzParams) -> Result<QuadReport> {
    if cfg.z.im != 0.0 {
        return Err(Error::InvalidParameter("the Morawetz check needs real z".into()));
    }
    let piece = match params.domain {
        Domain::Disk => Piece::Interior,
        Domain::Annulus { .. } => Piece::Exterior,
    };
    let r_max = match params.domain {
        Domain::Disk => 1.0,
        Domain::Annulus { outer } => outer,
    };
    let expansion = ModalExpansion::for_radius(k, cfg, DEFAULT_TAIL_TOL, r_max)?;
    morawetz_check(&SeriesField { expansion: &expansion, piece, h: params.h }, params)
}

/// Circle integrals `int |u_r|^2`, `int |u_theta / R|^2`, `int |u|^2` and
/// `int conj(u) u_r` over `|x| = R` with arclength measure.
struct CircleIntegrals {
    radial: f64,
    tangential: f64,
    mass: f64,
    cross: Complex64,
}

fn circle_integrals(field: &dyn PolarField, radius: f64, n_theta: usize) -> Result<CircleIntegrals> {
    let ring = field.ring(radius, &angles(n_theta))?;
    let ds = radius * 2.0 * PI / n_theta as f64;
    let mut out = CircleIntegrals { radial: 0.0, tangential: 0.0, mass: 0.0, cross: Complex64::new(0.0, 0.0) };
    for s in &ring {
        out.radial += ds * s.v_r.norm_sqr();
        out.tangential += ds * s.v_theta.norm_sqr() / (radius * radius);
        out.mass += ds * s.v.norm_sqr();
        out.cross += ds * s.v.conj() * s.v_r;
    }
    Ok(out)
}

/// Left side of the outgoing boundary inequality on `|x| = R` for the
/// scattered field, with `h = 1/k`. PASS when it is `<= 1e-10` times the
/// size of its terms.
pub fn radiation_boundary_functional(k: f64, cfg: &MediumConfig, radius: f64) -> Result<QuadReport> {
    if !(radius > 1.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must exceed 1, got {radius}")));
    }
    let h = 1.0 / k;
    let expansion = ModalExpansion::for_radius(k, cfg, DEFAULT_TAIL_TOL, radius)?;
    let field = SeriesField { expansion: &expansion, piece: Piece::Scattered, h };
    let n_theta = angular_nodes(256, field.bandwidth());
    let c = circle_integrals(&field, radius, n_theta)?;
    let value = radius * (h * h * c.radial - h * h * c.tangential + c.mass) - 2.0 * radius * (h * c.cross).im
        + (DIM - 1.0) * h * (h * c.cross).re;
    let scale = radius * (h * h * (c.radial + c.tangential) + c.mass) + (2.0 * radius + DIM - 1.0) * h * c.cross.norm();
    let residual = value.max(0.0);
    let relative = residual / scale.max(f64::MIN_POSITIVE);
    Ok(QuadReport {
        lhs: value,
        rhs: 0.0,
        residual,
        relative,
        tolerance: RADIATION_TOL,
        pass: value <= RADIATION_TOL * scale,
    })
}

/// `Im(H_m'(x) conj(H_m(x))) = 2/(pi x)` for every `m` in `m_range` and `x`
/// in `xs`. The report holds the worst point.
pub fn dtn_positivity(m_range: std::ops::RangeInclusive<u32>, xs: &[f64]) -> Result<QuadReport> {
    if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("arguments must be positive".into()));
    }
    let top = *m_range.end();
    let mut worst = QuadReport::compare(0.0, 0.0, DTN_TOL);
    worst.relative = -1.0;
    for &x in xs {
        let s = cyl_seq(top, Complex64::new(x, 0.0))?;
        let exact = 2.0 / (PI * x);
        for m in m_range.clone() {
            let got = (s.h1p(m) * s.h1(m).conj()).im;
            let residual = (got - exact).abs();
            let relative = residual / exact;
            if relative > worst.relative {
                worst = QuadReport { lhs: got, rhs: exact, residual, relative, tolerance: DTN_TOL, pass: true };
            }
        }
    }
    worst.pass = worst.relative <= DTN_TOL;
    Ok(worst)
}

/// `J_{m+1} Y_m - J_m Y_{m+1} = 2/(pi w)` for `m` up to `max_order` at each
/// argument, scaled by `1 + |J_{m+1} Y_m| + |J_m Y_{m+1}|`. Arguments where
/// the sequence overflows are skipped. The report holds the worst point.
pub fn wronskian_check(max_order: u32, args: &[Complex64]) -> Result<QuadReport> {
    let mut worst = QuadReport { lhs: 0.0, rhs: 0.0, residual: 0.0, relative: 0.0, tolerance: DTN_TOL, pass: true };
    let mut checked = 0usize;
    for &w in args {
        let seq = match cyl_seq(max_order, w) {
            Ok(s) => s,
            Err(Error::Overflow(_)) => continue,
            Err(e) => return Err(e),
        };
        let exact = 2.0 / (PI * w);
        for m in 0..=max_order {
            let a = seq.j(m + 1) * seq.y(m);
            let b = seq.j(m) * seq.y(m + 1);
            let residual = (a - b - exact).norm();
            let relative = residual / (1.0 + a.norm() + b.norm());
            checked += 1;
            if relative > worst.relative {
                worst = QuadReport { lhs: (a - b).norm(), rhs: exact.norm(), residual, relative, tolerance: DTN_TOL, pass: true };
            }
        }
    }
    if checked == 0 {
        return Err(Error::InvalidParameter("no argument could be checked".into()));
    }
    worst.pass = worst.relative <= DTN_TOL;
    Ok(worst)
}

/// `L^2` mass of `field` on the disk `r < radius`.
fn disk_mass(field: &dyn PolarField, radius: f64, n_r: usize, n_theta: usize) -> Result<f64> {
    let thetas = angles(n_theta);
    let dtheta = 2.0 * PI / n_theta as f64;
    let panels = ((field.radial_wavenumber() * radius) / PANEL_SPAN).ceil().max(1.0) as usize;
    let mut mass = 0.0;
    for (r, w) in composite_gauss_legendre(n_r, panels, 0.0, radius)? {
        let ring = field.ring(r, &thetas)?;
        mass += w * r * dtheta * ring.iter().map(|s| s.v.norm_sqr()).sum::<f64>();
    }
    Ok(mass)
}

/// Green's identity for the total field: `Im int_{|x|=R} conj(u) u_r` against
/// `-k^2 Im z int_{|x|<1} |u|^2`.
pub fn flux_balance(k: f64, cfg: &MediumConfig, radius: f64) -> Result<QuadReport> {
    if !(radius > 1.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must exceed 1, got {radius}")));
    }
    cfg.validate()?;
    let h = 1.0 / k;
    let expansion = ModalExpansion::for_radius(k, cfg, DEFAULT_TAIL_TOL, radius)?;
    let outside = SeriesField { expansion: &expansion, piece: Piece::Exterior, h };
    let inside = SeriesField { expansion: &expansion, piece: Piece::Interior, h };
    let n_theta = angular_nodes(256, outside.bandwidth());
    let flux = |nt: usize| -> Result<f64> { Ok(circle_integrals(&outside, radius, nt)?.cross.im) };
    let coarse = Sides { lhs: flux(n_theta)?, rhs: -k * k * cfg.z.im * disk_mass(&inside, 1.0, 64, n_theta)?, scale: 0.0 };
    let mass = disk_mass(&inside, 1.0, 128, 2 * n_theta)?;
    let fine = Sides {
        lhs: flux(2 * n_theta)?,
        rhs: -k * k * cfg.z.im * mass,
        scale: circle_integrals(&outside, radius, 2 * n_theta)?.cross.norm() + k * k * cfg.z.im.abs() * mass,
    };
    settled(&coarse, &fine)?;
    let mut report = QuadReport::compare(fine.lhs, fine.rhs, FLUX_TOL);
    // with real z both sides vanish; judge against the size of the flux integrand
    if cfg.z.im == 0.0 {
        report.relative = report.residual / fine.scale.max(f64::MIN_POSITIVE);
        report.pass = report.relative <= RADIATION_TOL;
    }
    Ok(report)
}
