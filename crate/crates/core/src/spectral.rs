//! Zeros of the transmission determinants: resonances in `k` at fixed `z`,
//! and poles in `z` at fixed `k`.
//!
//! Pole counting uses the argument principle on `G_m(z) = D_m(k, z) (nbar/sqrt n_i)^{-m}`.
//! `D_m` is `nbar^m` times an entire function of `nbar^2`, so `G_m` is entire in
//! `z` and has exactly the zeros of `D_m`, whatever square-root branch is used.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::modal::{
    determinant_from_tables, determinant_scale, ExteriorTable, InteriorTable, MediumConfig,
};
use crate::special::{cdiv, MAX_ORDER};
use crate::{Error, Result};

/// Relative floor for `min |f|` on a contour.
const CONTOUR_FLOOR: f64 = 1.0e-14;
const INITIAL_SAMPLES: usize = 64;
const DEFAULT_MAX_REFINE: u32 = 20;
/// Squares this small that still hold several zeros are reported as one multiple zero.
const MIN_SQUARE: f64 = 1.0e-10;
const NEWTON_ITERS: usize = 80;
const CERTIFIED_TAIL: u32 = 5;
/// Normalized contour minimum the certified tail modes must stay above.
const TAIL_MIN_NORMALIZED: f64 = 1.0e-3;

/// Outcome of one contour integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    pub samples: usize,
    pub min_abs: f64,
    pub max_abs: f64,
}

/// Winding number of `f` around the circle `|z - center| = radius`.
pub fn winding_number<F>(f: F, center: Complex64, radius: f64, max_refine: u32) -> Result<i64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    Ok(circle_winding(f, center, radius, max_refine)?.winding)
}

/// [`winding_number`] with sampling statistics.
pub fn circle_winding<F>(f: F, center: Complex64, radius: f64, max_refine: u32) -> Result<WindingReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    path_winding(f, |t| center + Complex64::from_polar(radius, TAU * t), INITIAL_SAMPLES, max_refine)
}

/// Winding number of `f` along the boundary of the axis-aligned square with
/// the given centre and half-side, counter-clockwise.
pub fn square_winding<F>(f: F, center: Complex64, half: f64, max_refine: u32) -> Result<WindingReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let path = move |t: f64| {
        let s = 4.0 * t;
        let side = (s.floor() as i64).clamp(0, 3);
        let u = 2.0 * (s - side as f64) - 1.0;
        let (x, y) = match side {
            0 => (u, -1.0),
            1 => (1.0, u),
            2 => (-u, 1.0),
            _ => (-1.0, -u),
        };
        center + half * Complex64::new(x, y)
    };
    path_winding(f, path, INITIAL_SAMPLES, max_refine)
}

/// Phase tracking along a closed path `t in [0, 1)`; any interval whose phase
/// increment is not below `pi/2` is bisected, at most `max_refine` times.
fn path_winding<F, P>(mut f: F, path: P, initial: usize, max_refine: u32) -> Result<WindingReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
    P: Fn(f64) -> Complex64,
{
    let mut eval = |t: f64| -> Result<Complex64> {
        let v = f(path(t))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow(format!("non-finite value on contour at {}", path(t))));
        }
        Ok(v)
    };
    let mut samples = 0usize;
    let mut min_abs = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut total = 0.0;
    let first = eval(0.0)?;
    samples += 1;
    let track = |v: Complex64, samples: &mut usize, lo: &mut f64, hi: &mut f64| {
        *samples += 1;
        *lo = lo.min(v.norm());
        *hi = hi.max(v.norm());
    };
    min_abs = min_abs.min(first.norm());
    max_abs = max_abs.max(first.norm());
    let mut prev = first;
    for i in 0..initial {
        let t0 = i as f64 / initial as f64;
        let t1 = (i + 1) as f64 / initial as f64;
        let end = if i + 1 == initial { first } else { eval(t1)? };
        if i + 1 != initial {
            track(end, &mut samples, &mut min_abs, &mut max_abs);
        }
        // explicit stack of (t0, t1, f(t0), f(t1), depth)
        let mut stack = vec![(t0, t1, prev, end, 0u32)];
        while let Some((a, b, fa, fb, depth)) = stack.pop() {
            if fa.norm() == 0.0 || fb.norm() == 0.0 {
                return Err(Error::ZeroOnContour);
            }
            let jump = phase_step(fa, fb);
            if jump.abs() < FRAC_PI_2 {
                total += jump;
                continue;
            }
            if depth >= max_refine {
                return Err(Error::RefinementBudget);
            }
            let mid = 0.5 * (a + b);
            let fm = eval(mid)?;
            track(fm, &mut samples, &mut min_abs, &mut max_abs);
            // second half pushed first so the first half is summed first
            stack.push((mid, b, fm, fb, depth + 1));
            stack.push((a, mid, fa, fm, depth + 1));
        }
        prev = end;
    }
    if !(min_abs > CONTOUR_FLOOR * max_abs) {
        return Err(Error::ZeroOnContour);
    }
    Ok(WindingReport {
        winding: (total / TAU).round() as i64,
        samples,
        min_abs,
        max_abs,
    })
}

/// `arg(fb/fa)` in `(-pi, pi]` without forming the quotient.
fn phase_step(fa: Complex64, fb: Complex64) -> f64 {
    let d = fb.arg() - fa.arg();
    if d > std::f64::consts::PI {
        d - TAU
    } else if d <= -std::f64::consts::PI {
        d + TAU
    } else {
        d
    }
}

/// `G_m(z)` and `G_m'(z)` for one mode at fixed `k`, plus `D_m` and its scale.
#[derive(Debug, Clone)]
pub struct ModeFunction {
    pub m: u32,
    pub n_i: f64,
    ext: ExteriorTable,
}

#[derive(Debug, Clone, Copy)]
pub struct ModeValue {
    pub g: Complex64,
    pub dg: Complex64,
    pub d: Complex64,
    pub scale: f64,
}

impl ModeFunction {
    pub fn new(m: u32, k: f64, n_i: f64) -> Result<Self> {
        Ok(ModeFunction { m, n_i, ext: ExteriorTable::new(m, k)? })
    }

    fn with_table(m: u32, n_i: f64, ext: ExteriorTable) -> Self {
        ModeFunction { m, n_i, ext }
    }

    pub fn eval(&self, z: Complex64) -> Result<ModeValue> {
        let nbar = (self.n_i + z).sqrt();
        let int = InteriorTable::at_complex(self.m, self.ext.k(), nbar)?;
        let der = determinant_from_tables(self.m, &self.ext, &int);
        let ratio = nbar / self.n_i.sqrt();
        let norm = ratio.powi(-(self.m as i32));
        let m = self.m as f64;
        let dd = der.d_dz(nbar) - m * der.d / (2.0 * nbar * nbar);
        Ok(ModeValue {
            g: der.d * norm,
            dg: dd * norm,
            d: der.d,
            scale: determinant_scale(self.m, &self.ext, &int),
        })
    }

    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(z)?.g)
    }
}

/// One located zero of `D_m` in the `z`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub z: Complex64,
    pub m: u32,
    pub multiplicity: u32,
    /// `|D_m|` at `z` divided by its product scale.
    pub residual: f64,
}

/// Per-mode evidence for a pole search.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCertificate {
    pub m: u32,
    pub winding: i64,
    /// Contour radius actually used (nudged off a zero if needed).
    pub radius: f64,
    pub nudged: bool,
    /// Smallest `|D_m|/scale` sampled on the contour.
    pub contour_min: f64,
    /// Zeros kept inside the contour, with multiplicity.
    pub found: i64,
    /// Quadrisection steps whose child windings did not add up to the parent.
    pub inconsistent_splits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub k: f64,
    pub rho: f64,
    pub poles: Vec<Pole>,
    pub mode_cutoff: u32,
    /// Modes `0..=mode_cutoff`.
    pub certificates: Vec<ModeCertificate>,
    /// The certified zero-winding modes just above the cutoff.
    pub tail: Vec<ModeCertificate>,
}

impl PoleSet {
    pub fn total_count(&self) -> usize {
        self.poles.len()
    }

    pub fn total_with_multiplicity(&self) -> u64 {
        self.poles.iter().map(|p| p.multiplicity as u64).sum()
    }

    /// Every mode found exactly as many zeros as its winding number.
    pub fn consistent(&self) -> bool {
        self.certificates
            .iter()
            .all(|c| c.found == c.winding && c.inconsistent_splits == 0)
    }
}

fn check_pole_inputs(k: f64, rho: f64, cfg: &MediumConfig) -> Result<()> {
    cfg.validate()?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    if !(rho.is_finite() && rho >= 0.0 && rho < cfg.n_i) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [0, n_i) = [0, {}), got {rho}",
            cfg.n_i
        )));
    }
    Ok(())
}

/// Winding and contour minimum on `|z| = rho`, nudging the radius by
/// `1e-6` relative if a zero sits on it.
fn disk_certificate(f: &ModeFunction, rho: f64) -> Result<ModeCertificate> {
    let mut last = Error::ZeroOnContour;
    for (radius, nudged) in [(rho, false), (rho * (1.0 + 1e-6), true), (rho * (1.0 - 1e-6), true)] {
        let mut contour_min = f64::INFINITY;
        let result = circle_winding(
            |z| {
                let v = f.eval(z)?;
                contour_min = contour_min.min(v.d.norm() / v.scale);
                Ok(v.g)
            },
            Complex64::new(0.0, 0.0),
            radius,
            DEFAULT_MAX_REFINE,
        );
        match result {
            Ok(rep) => {
                return Ok(ModeCertificate {
                    m: f.m,
                    winding: rep.winding,
                    radius,
                    nudged,
                    contour_min,
                    found: 0,
                    inconsistent_splits: 0,
                })
            }
            Err(e @ (Error::ZeroOnContour | Error::RefinementBudget)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `ceil(sqrt(n_i + rho) k) + 12`, pushed up until the next five modes have no
/// zero inside `|z| = rho` and stay clear of it.
pub fn mode_cutoff(k: f64, rho: f64, cfg_base: &MediumConfig) -> Result<u32> {
    Ok(mode_cutoff_certified(k, rho, cfg_base)?.0)
}

/// [`mode_cutoff`] with the certificates of the tail modes.
pub fn mode_cutoff_certified(k: f64, rho: f64, cfg_base: &MediumConfig) -> Result<(u32, Vec<ModeCertificate>)> {
    check_pole_inputs(k, rho, cfg_base)?;
    let floor = ((cfg_base.n_i + rho).sqrt() * k).ceil() as u32 + 12;
    let mut cutoff = floor;
    loop {
        if cutoff + CERTIFIED_TAIL > MAX_ORDER {
            return Err(Error::CapExceeded { cap: MAX_ORDER });
        }
        let ext = ExteriorTable::new(cutoff + CERTIFIED_TAIL, k)?;
        let tail: Vec<ModeCertificate> = (cutoff + 1..=cutoff + CERTIFIED_TAIL)
            .map(|m| {
                let f = ModeFunction::with_table(m, cfg_base.n_i, ext.clone());
                if rho == 0.0 {
                    return Ok(ModeCertificate {
                        m,
                        winding: 0,
                        radius: 0.0,
                        nudged: false,
                        contour_min: f64::INFINITY,
                        found: 0,
                        inconsistent_splits: 0,
                    });
                }
                disk_certificate(&f, rho)
            })
            .collect::<Result<_>>()?;
        match tail
            .iter()
            .rev()
            .find(|c| c.winding != 0 || c.contour_min < TAIL_MIN_NORMALIZED)
        {
            None => return Ok((cutoff, tail)),
            Some(c) => cutoff = c.m,
        }
    }
}

struct SquareSearch<'a> {
    f: &'a ModeFunction,
    poles: Vec<(Complex64, u32)>,
    inconsistent: u32,
}

impl SquareSearch<'_> {
    fn winding(&self, center: Complex64, half: f64) -> Result<i64> {
        Ok(square_winding(|z| self.f.g(z), center, half, DEFAULT_MAX_REFINE)?.winding)
    }

    fn newton(&self, start: Complex64, center: Complex64, half: f64) -> Option<Complex64> {
        let mut z = start;
        for _ in 0..NEWTON_ITERS {
            let v = self.f.eval(z).ok()?;
            if v.g.norm() == 0.0 {
                break;
            }
            let step = cdiv(v.g, v.dg);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            z -= step;
            if step.norm() <= 1e-15 * z.norm().max(1e-3) {
                break;
            }
        }
        let slack = half * 1e-6 + 1e-14;
        let inside = (z.re - center.re).abs() <= half + slack && (z.im - center.im).abs() <= half + slack;
        inside.then_some(z)
    }

    /// Child windings of a square split at `center + shift`.
    fn split(&self, center: Complex64, half: f64) -> Result<Vec<(Complex64, f64, i64)>> {
        let q = 0.5 * half;
        let offsets = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
        let children: Vec<(Complex64, f64)> = offsets
            .iter()
            .map(|&(sx, sy)| (center + Complex64::new(sx * q, sy * q), q))
            .collect();
        let mut out = Vec::with_capacity(4);
        for (c, h) in children {
            out.push((c, h, self.winding(c, h)?));
        }
        Ok(out)
    }

    fn search(&mut self, center: Complex64, half: f64, winding: i64) -> Result<()> {
        if winding <= 0 {
            return Ok(());
        }
        if winding == 1 {
            if let Some(z) = self.newton(center, center, half) {
                self.poles.push((z, 1));
                return Ok(());
            }
        }
        if half < MIN_SQUARE {
            let z = self.newton(center, center, half).unwrap_or(center);
            self.poles.push((z, winding as u32));
            return Ok(());
        }
        // a zero on an inner edge fails the split; move the split slightly
        let mut children = None;
        let mut last = Error::ZeroOnContour;
        for shift in [0.0, 1.3e-3, -2.9e-3, 7.1e-3] {
            let c = center + Complex64::new(shift * half, -0.7 * shift * half);
            match self.split_shifted(center, half, c) {
                Ok(ch) => {
                    children = Some(ch);
                    break;
                }
                Err(e @ (Error::ZeroOnContour | Error::RefinementBudget)) => last = e,
                Err(e) => return Err(e),
            }
        }
        let children = children.ok_or(last)?;
        let sum: i64 = children.iter().map(|c| c.2).sum();
        if sum != winding {
            self.inconsistent += 1;
        }
        for (c, h, w) in children {
            self.search_rect(c, h, w)?;
        }
        Ok(())
    }

    /// Split with the four children meeting at `pivot` instead of the centre.
    /// Children are rectangles; each is covered by its own square search below.
    fn split_shifted(&self, center: Complex64, half: f64, pivot: Complex64) -> Result<Vec<(Rect, f64, i64)>> {
        if pivot == center {
            return Ok(self
                .split(center, half)?
                .into_iter()
                .map(|(c, h, w)| (Rect::square(c, h), h, w))
                .collect());
        }
        let (x0, x1) = (center.re - half, center.re + half);
        let (y0, y1) = (center.im - half, center.im + half);
        let rects = [
            Rect { x0, x1: pivot.re, y0, y1: pivot.im },
            Rect { x0: pivot.re, x1, y0, y1: pivot.im },
            Rect { x0, x1: pivot.re, y0: pivot.im, y1 },
            Rect { x0: pivot.re, x1, y0: pivot.im, y1 },
        ];
        let mut out = Vec::with_capacity(4);
        for r in rects {
            let w = rect_winding(|z| self.f.g(z), &r, DEFAULT_MAX_REFINE)?.winding;
            out.push((r, r.half_max(), w));
        }
        Ok(out)
    }

    fn search_rect(&mut self, rect: Rect, _half: f64, winding: i64) -> Result<()> {
        if winding <= 0 {
            return Ok(());
        }
        if rect.is_square() {
            return self.search(rect.center(), rect.half_max(), winding);
        }
        // rectangle from a shifted split: enclose it in its bounding square only
        // for Newton, and keep splitting as a rectangle otherwise
        if winding == 1 {
            if let Some(z) = self.newton(rect.center(), rect.center(), rect.half_max()) {
                if rect.contains(z, 1e-12) {
                    self.poles.push((z, 1));
                    return Ok(());
                }
            }
        }
        if rect.half_max() < MIN_SQUARE {
            self.poles.push((rect.center(), winding as u32));
            return Ok(());
        }
        let c = rect.center();
        let quads = [
            Rect { x0: rect.x0, x1: c.re, y0: rect.y0, y1: c.im },
            Rect { x0: c.re, x1: rect.x1, y0: rect.y0, y1: c.im },
            Rect { x0: rect.x0, x1: c.re, y0: c.im, y1: rect.y1 },
            Rect { x0: c.re, x1: rect.x1, y0: c.im, y1: rect.y1 },
        ];
        let mut kids = Vec::with_capacity(4);
        for q in quads {
            kids.push((q, rect_winding(|z| self.f.g(z), &q, DEFAULT_MAX_REFINE)?.winding));
        }
        if kids.iter().map(|k| k.1).sum::<i64>() != winding {
            self.inconsistent += 1;
        }
        for (q, w) in kids {
            self.search_rect(q, q.half_max(), w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn square(c: Complex64, h: f64) -> Self {
        Rect { x0: c.re - h, x1: c.re + h, y0: c.im - h, y1: c.im + h }
    }
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
    fn half_max(&self) -> f64 {
        0.5 * (self.x1 - self.x0).max(self.y1 - self.y0)
    }
    fn is_square(&self) -> bool {
        ((self.x1 - self.x0) - (self.y1 - self.y0)).abs() <= 1e-15 * (self.x1 - self.x0)
    }
    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.x0 - slack && z.re <= self.x1 + slack && z.im >= self.y0 - slack && z.im <= self.y1 + slack
    }
}

fn rect_winding<F>(f: F, r: &Rect, max_refine: u32) -> Result<WindingReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let r = *r;
    let (w, h) = (r.x1 - r.x0, r.y1 - r.y0);
    let perimeter = 2.0 * (w + h);
    let path = move |t: f64| {
        let mut s = t * perimeter;
        if s < w {
            return Complex64::new(r.x0 + s, r.y0);
        }
        s -= w;
        if s < h {
            return Complex64::new(r.x1, r.y0 + s);
        }
        s -= h;
        if s < w {
            return Complex64::new(r.x1 - s, r.y1);
        }
        s -= w;
        Complex64::new(r.x0, r.y1 - s)
    };
    path_winding(f, path, INITIAL_SAMPLES, max_refine)
}

/// Zeros of one mode inside `|z| < rho`.
fn mode_poles(f: &ModeFunction, rho: f64) -> Result<(Vec<Pole>, ModeCertificate)> {
    let mut cert = disk_certificate(f, rho)?;
    if cert.winding <= 0 {
        return Ok((Vec::new(), cert));
    }
    let mut search = SquareSearch { f, poles: Vec::new(), inconsistent: 0 };
    // bounding square, slightly enlarged and moved off any zero on its edge
    let mut done = false;
    let mut last = Error::ZeroOnContour;
    for grow in [1.0 + 1e-3, 1.0 + 3.7e-3, 1.0 + 1.1e-2] {
        let half = cert.radius * grow;
        match search.winding(Complex64::new(0.0, 0.0), half) {
            Ok(w) => {
                search.search(Complex64::new(0.0, 0.0), half, w)?;
                done = true;
                break;
            }
            Err(e @ (Error::ZeroOnContour | Error::RefinementBudget)) => last = e,
            Err(e) => return Err(e),
        }
    }
    if !done {
        return Err(last);
    }
    let mut poles = Vec::new();
    for (z, mult) in search.poles {
        if z.norm() < cert.radius {
            let v = f.eval(z)?;
            poles.push(Pole { z, m: f.m, multiplicity: mult, residual: v.d.norm() / v.scale });
        }
    }
    cert.found = poles.iter().map(|p| p.multiplicity as i64).sum();
    cert.inconsistent_splits = search.inconsistent;
    Ok((poles, cert))
}

/// All zeros of `z -> D_m(k, z)` in `|z| < rho` for `m <= mode_cutoff`.
/// Modes run in parallel; the result is sorted by `(m, Re z, Im z)`.
pub fn find_z_poles(k: f64, rho: f64, cfg_base: &MediumConfig) -> Result<PoleSet> {
    let (cutoff, tail) = mode_cutoff_certified(k, rho, cfg_base)?;
    if rho == 0.0 {
        return Ok(PoleSet { k, rho, poles: Vec::new(), mode_cutoff: cutoff, certificates: Vec::new(), tail });
    }
    let ext = ExteriorTable::new(cutoff, k)?;
    let per_mode: Vec<(Vec<Pole>, ModeCertificate)> = (0..=cutoff)
        .into_par_iter()
        .map(|m| mode_poles(&ModeFunction::with_table(m, cfg_base.n_i, ext.clone()), rho))
        .collect::<Result<_>>()?;
    let mut poles = Vec::new();
    let mut certificates = Vec::with_capacity(per_mode.len());
    for (p, c) in per_mode {
        poles.extend(p);
        certificates.push(c);
    }
    poles.sort_by(|a, b| {
        (a.m, a.z.re, a.z.im)
            .partial_cmp(&(b.m, b.z.re, b.z.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(PoleSet { k, rho, poles, mode_cutoff: cutoff, certificates, tail })
}

/// Pole counts over several frequencies and the least-squares slope of
/// `log count` against `log k` (frequencies with no poles are left out of the fit).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub slope: Option<f64>,
    pub max_count_over_k4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub k: f64,
    pub count: usize,
    pub count_with_multiplicity: u64,
    pub poles: PoleSet,
}

pub fn pole_count_scaling(k_list: &[f64], rho: f64, cfg_base: &MediumConfig) -> Result<ScalingTable> {
    if k_list.len() < 3 || k_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("k_list must be ascending with at least 3 entries".into()));
    }
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let poles = find_z_poles(k, rho, cfg_base)?;
        rows.push(ScalingRow {
            k,
            count: poles.total_count(),
            count_with_multiplicity: poles.total_with_multiplicity(),
            poles,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.count > 0)
        .map(|r| (r.k.ln(), (r.count as f64).ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let max_count_over_k4 = rows.iter().map(|r| r.count as f64 / r.k.powi(4)).fold(0.0, f64::max);
    Ok(ScalingTable { rows, slope, max_count_over_k4 })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Distance from the real point `z0` to the nearest pole; `+inf` without poles.
pub fn holomorphy_radius(z0: f64, poles: &PoleSet) -> f64 {
    let z0 = Complex64::new(z0, 0.0);
    poles
        .poles
        .iter()
        .map(|p| (p.z - z0).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Holomorphy radii at uniform random `z0 in (-rho, rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphyStats {
    pub k: f64,
    pub samples: usize,
    /// Distance exceeded by 95% of the samples.
    pub q05: f64,
    /// `q05 k^4`, the constant in a `c k^{-4}` lower envelope.
    pub c_fit: f64,
}

pub fn holomorphy_statistics(poles: &PoleSet, samples: usize, seed: u64) -> HolomorphyStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d: Vec<f64> = (0..samples)
        .map(|_| holomorphy_radius(rng.gen_range(-poles.rho..poles.rho), poles))
        .collect();
    d.sort_by(f64::total_cmp);
    let q05 = if d.is_empty() { f64::INFINITY } else { d[(0.05 * d.len() as f64).floor() as usize] };
    HolomorphyStats { k: poles.k, samples, q05, c_fit: q05 * poles.k.powi(4) }
}

/// A complex resonance `k_qr - i width` of mode `m_dom`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiResonance {
    pub k_qr: f64,
    pub width: f64,
    pub m_dom: u32,
    /// `|D_m|/scale` at the refined zero.
    pub residual: f64,
}

/// A scan minimum whose Newton refinement did not give an admissible zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonFailure {
    pub m: u32,
    pub k_start: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    pub resonances: Vec<QuasiResonance>,
    pub failures: Vec<NewtonFailure>,
    pub step: f64,
}

/// Normalized-determinant minima below this are refined.
pub const PROMINENCE: f64 = 0.05;

/// Scan `|D_m(k)|/scale` on a real grid of step at most `1e-3`, take its local
/// minima below [`PROMINENCE`] in each mode, and Newton-refine each one to a
/// complex zero with `Im k <= 0`.
pub fn find_quasi_resonances(cfg: &MediumConfig, k_min: f64, k_max: f64, m_max: u32) -> Result<ResonanceScan> {
    scan_resonances(cfg, k_min, k_max, m_max, 1.0e-3)
}

pub fn scan_resonances(cfg: &MediumConfig, k_min: f64, k_max: f64, m_max: u32, max_step: f64) -> Result<ResonanceScan> {
    cfg.validate()?;
    if cfg.z != Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("resonance scan expects z = 0".into()));
    }
    if !(k_min > 0.0 && k_min < k_max && k_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < k_min < k_max, got {k_min}, {k_max}")));
    }
    let needed = (cfg.n_i.sqrt() * k_max).ceil() as u32;
    if m_max < needed {
        return Err(Error::InvalidParameter(format!("m_max must be at least {needed}")));
    }
    if m_max > MAX_ORDER {
        return Err(Error::CapExceeded { cap: MAX_ORDER });
    }
    let intervals = ((k_max - k_min) / max_step).ceil() as usize;
    let step = (k_max - k_min) / intervals as f64;
    let nbar = cfg.nbar();
    let grid: Vec<f64> = (0..=intervals).map(|i| k_min + step * i as f64).collect();
    let table: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&k| {
            let ext = ExteriorTable::new(m_max, k)?;
            let int = InteriorTable::new(m_max, k, nbar)?;
            Ok((0..=m_max)
                .map(|m| determinant_from_tables(m, &ext, &int).d.norm() / determinant_scale(m, &ext, &int))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut starts = Vec::new();
    for m in 0..=m_max as usize {
        for i in 0..grid.len() {
            let v = table[i][m];
            let left = if i > 0 { table[i - 1][m] } else { f64::INFINITY };
            let right = if i + 1 < grid.len() { table[i + 1][m] } else { f64::INFINITY };
            if v < PROMINENCE && v < left && v <= right {
                starts.push((m as u32, grid[i]));
            }
        }
    }
    let refined: Vec<std::result::Result<QuasiResonance, NewtonFailure>> = starts
        .par_iter()
        .map(|&(m, k0)| refine_resonance(m, k0, nbar, k_min - step, k_max + step))
        .collect();
    let mut resonances = Vec::new();
    let mut failures = Vec::new();
    for r in refined {
        match r {
            Ok(q) if q.k_qr >= k_min && q.k_qr <= k_max => resonances.push(q),
            Ok(_) => {}
            Err(f) => failures.push(f),
        }
    }
    resonances.sort_by(|a, b| (a.k_qr, a.m_dom).partial_cmp(&(b.k_qr, b.m_dom)).unwrap());
    let mut deduped: Vec<QuasiResonance> = Vec::with_capacity(resonances.len());
    for q in resonances {
        match deduped.last() {
            Some(p) if (p.k_qr - q.k_qr).abs() <= 1e-8 && (p.width - q.width).abs() <= 1e-8 => {
                if q.m_dom < p.m_dom {
                    *deduped.last_mut().unwrap() = q;
                }
            }
            _ => deduped.push(q),
        }
    }
    Ok(ResonanceScan { resonances: deduped, failures, step })
}

/// Complex Newton on `k -> D_m(k)` at fixed `nbar`.
pub fn refine_resonance(
    m: u32,
    k0: f64,
    nbar: Complex64,
    lo: f64,
    hi: f64,
) -> std::result::Result<QuasiResonance, NewtonFailure> {
    let fail = |reason: String| NewtonFailure { m, k_start: k0, reason };
    let eval = |k: Complex64| -> Result<(Complex64, Complex64, f64)> {
        let ext = ExteriorTable::at_complex(m, k)?;
        let int = InteriorTable::at_complex(m, k, nbar)?;
        let d = determinant_from_tables(m, &ext, &int);
        Ok((d.d, d.d_dk, determinant_scale(m, &ext, &int)))
    };
    let mut k = Complex64::new(k0, 0.0);
    let mut converged = false;
    for _ in 0..NEWTON_ITERS {
        let (d, dd, _) = eval(k).map_err(|e| fail(e.to_string()))?;
        if d.norm() == 0.0 {
            converged = true;
            break;
        }
        let step = cdiv(d, dd);
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(fail("non-finite Newton step".into()));
        }
        k -= step;
        if !(k.re > lo && k.re < hi) || k.im.abs() > 1.0 {
            return Err(fail(format!("left the search window at k = {k}")));
        }
        if step.norm() <= 1e-15 * k.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail("no convergence".into()));
    }
    let (d, _, scale) = eval(k).map_err(|e| fail(e.to_string()))?;
    let residual = d.norm() / scale;
    if residual > 1e-9 {
        return Err(fail(format!("residual {residual:e} at k = {k}")));
    }
    if k.im > 1e-12 * k.re {
        return Err(fail(format!("zero in the upper half-plane at k = {k}")));
    }
    Ok(QuasiResonance { k_qr: k.re, width: (-k.im).max(0.0), m_dom: m, residual })
}
