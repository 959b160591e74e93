//! Modal amplification: how much more `L^2` mass a mode carries on the probe
//! disk than the incident plane wave carries in the same mode. It blows up
//! at the `z`-poles and is the quantity swept over real `z`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::modal::{
    coefficients_from_tables, truncation_order, ExteriorTable, InteriorTable, MediumConfig,
};
use crate::quadrature::composite_gauss_legendre;
use crate::special::{cyl_seq, j_seq};
use crate::{Error, Result};

/// Tail tolerance for the default mode limit.
pub const PROBE_TAIL_TOL: f64 = 1.0e-12;

/// Radial phase change allowed per quadrature panel.
const PANEL_SPAN: f64 = 16.0;

/// Probe disk and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    /// Radius of the disk the mass is measured on; 1 is the scatterer itself.
    pub probe_radius: f64,
    /// Gauss-Legendre nodes per radial panel.
    pub nodes: usize,
    /// Highest mode; `None` means the truncation order at the sample.
    pub mode_limit: Option<u32>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { probe_radius: 1.0, nodes: 48, mode_limit: None }
    }
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.probe_radius >= 1.0 && self.probe_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "probe_radius must be >= 1, got {}",
                self.probe_radius
            )));
        }
        if self.nodes < 32 {
            return Err(Error::InvalidParameter(format!("need at least 32 nodes, got {}", self.nodes)));
        }
        Ok(())
    }
}

/// Panels of a composite rule on `[a, b]` for an integrand oscillating at
/// wavenumber `kappa`.
fn radial_rule(nodes: usize, a: f64, b: f64, kappa: f64) -> Result<Vec<(f64, f64)>> {
    let panels = ((kappa * (b - a)) / PANEL_SPAN).ceil().max(1.0) as usize;
    composite_gauss_legendre(nodes, panels, a, b)
}

/// Per-mode masses `int |g_m|^2 r dr` of the field and of the incident wave.
struct ModeMasses {
    field: Vec<f64>,
    incident: Vec<f64>,
    singular: Vec<bool>,
}

fn mode_masses(max_m: u32, k: f64, cfg: &MediumConfig, spec: &ProbeSpec) -> Result<ModeMasses> {
    spec.validate()?;
    cfg.validate()?;
    let nbar = cfg.nbar();
    let ext = ExteriorTable::new(max_m, k)?;
    let int = InteriorTable::new(max_m, k, nbar)?;
    let count = max_m as usize + 1;
    let mut a = vec![Complex64::new(0.0, 0.0); count];
    let mut b = vec![Complex64::new(0.0, 0.0); count];
    let mut singular = vec![false; count];
    for m in 0..=max_m {
        match coefficients_from_tables(m, &ext, &int, 0.0) {
            Ok(s) => {
                a[m as usize] = s.a;
                b[m as usize] = s.b;
            }
            Err(Error::NearSingular { .. }) => singular[m as usize] = true,
            Err(e) => return Err(e),
        }
    }
    let mut field = vec![0.0; count];
    let mut incident = vec![0.0; count];
    let nk = nbar * k;
    for (r, w) in radial_rule(spec.nodes, 0.0, 1.0, nk.norm().max(k))? {
        let inner = j_seq(max_m, nk * r)?;
        let free = j_seq(max_m, Complex64::new(k * r, 0.0))?;
        for m in 0..count {
            field[m] += w * r * (a[m] * inner.j(m as u32)).norm_sqr();
            incident[m] += w * r * free.j(m as u32).norm_sqr();
        }
    }
    if spec.probe_radius > 1.0 {
        for (r, w) in radial_rule(spec.nodes, 1.0, spec.probe_radius, k)? {
            let s = cyl_seq(max_m, Complex64::new(k * r, 0.0))?;
            for m in 0..count {
                let mm = m as u32;
                // exterior mode relative to c_m
                let c = crate::modal::incident_weight(mm, 0.0);
                let g = c * s.j(mm) + b[m] * s.h1(mm);
                field[m] += w * r * g.norm_sqr();
                incident[m] += w * r * s.j(mm).norm_sqr();
            }
        }
    }
    Ok(ModeMasses { field, incident, singular })
}

/// Amplification of mode `m`; `+inf` exactly at a pole.
pub fn modal_amplification(m: u32, k: f64, cfg: &MediumConfig, spec: &ProbeSpec) -> Result<f64> {
    let masses = mode_masses(table_top(m, k, cfg)?, k, cfg, spec)?;
    Ok(ratio(&masses, m as usize))
}

/// Bessel tables always reach the truncation order, so a mode's value does
/// not depend on how many other modes are asked for.
fn table_top(m: u32, k: f64, cfg: &MediumConfig) -> Result<u32> {
    Ok(m.max(truncation_order(k, cfg, PROBE_TAIL_TOL)?))
}

fn ratio(masses: &ModeMasses, m: usize) -> f64 {
    if masses.singular[m] {
        return f64::INFINITY;
    }
    (masses.field[m] / masses.incident[m]).sqrt()
}

/// Largest modal amplification, with the mode attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplification {
    pub value: f64,
    pub mode: u32,
    pub mode_limit: u32,
    /// Some mode sat on a pole (value is the `+inf` sentinel).
    pub singular: bool,
}

pub fn amplification_detail(k: f64, cfg: &MediumConfig, spec: &ProbeSpec) -> Result<Amplification> {
    let limit = match spec.mode_limit {
        Some(l) => l,
        None => truncation_order(k, cfg, PROBE_TAIL_TOL)?,
    };
    let masses = mode_masses(table_top(limit, k, cfg)?, k, cfg, spec)?;
    let mut best = Amplification { value: 0.0, mode: 0, mode_limit: limit, singular: false };
    for m in 0..=limit as usize {
        let v = ratio(&masses, m);
        if v > best.value {
            best.value = v;
            best.mode = m as u32;
        }
        best.singular |= masses.singular[m];
    }
    Ok(best)
}

/// `max_{m <= mode_limit}` of [`modal_amplification`].
pub fn amplification(k: f64, cfg: &MediumConfig, spec: &ProbeSpec) -> Result<f64> {
    Ok(amplification_detail(k, cfg, spec)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub z: f64,
    pub amp: f64,
    pub mode: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub k: f64,
    pub rho: f64,
    pub samples: Vec<SweepSample>,
    pub spec: ProbeSpec,
    /// Largest mode limit used over the sweep.
    pub truncation: u32,
}

impl SweepResult {
    pub fn amp_at_zero(&self) -> f64 {
        self.samples[self.samples.len() / 2].amp
    }

    pub fn median_amp(&self) -> f64 {
        let mut v: Vec<f64> = self.samples.iter().map(|s| s.amp).collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    pub fn max_amp(&self) -> f64 {
        self.samples.iter().map(|s| s.amp).fold(0.0, f64::max)
    }
}

/// Sample `z_i = -rho + (i + 1/2) 2 rho / n`, `i < n`. For odd `n` the middle sample is `z = 0`.
pub fn sweep_grid(rho: f64, n_samples: usize) -> Vec<f64> {
    let h = 2.0 * rho / n_samples as f64;
    (0..n_samples)
        .map(|i| {
            if 2 * i + 1 == n_samples {
                0.0
            } else {
                -rho + (i as f64 + 0.5) * h
            }
        })
        .collect()
}

/// `n_re x n_im` points with `Re z` evenly spaced on `[-re_half, re_half]` and
/// `Im z` evenly spaced on `[im_lo, im_hi]`, row by row in `Im z`.
pub fn halfplane_grid(re_half: f64, n_re: usize, im_lo: f64, im_hi: f64, n_im: usize) -> Vec<Complex64> {
    let step = |lo: f64, hi: f64, n: usize, i: usize| if n > 1 { lo + (hi - lo) * i as f64 / (n - 1) as f64 } else { lo };
    (0..n_im)
        .flat_map(|j| (0..n_re).map(move |i| Complex64::new(step(-re_half, re_half, n_re, i), step(im_lo, im_hi, n_im, j))))
        .collect()
}

/// Amplification over real `z in (-rho, rho)`. Samples are independent and
/// evaluated in parallel, then assembled by index.
pub fn sweep_z(k: f64, rho: f64, n_samples: usize, cfg_base: &MediumConfig, spec: &ProbeSpec) -> Result<SweepResult> {
    if n_samples < 101 || n_samples % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample count must be odd and at least 101, got {n_samples}"
        )));
    }
    if !(rho > 0.0 && rho < cfg_base.n_i) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, n_i), got {rho}")));
    }
    spec.validate()?;
    let grid = sweep_grid(rho, n_samples);
    let results: Vec<Amplification> = grid
        .par_iter()
        .map(|&z| amplification_detail(k, &cfg_base.with_z(Complex64::new(z, 0.0)), spec))
        .collect::<Result<_>>()?;
    let truncation = results.iter().map(|a| a.mode_limit).max().unwrap_or(0);
    let samples = grid
        .iter()
        .zip(&results)
        .map(|(&z, a)| SweepSample { z, amp: a.value, mode: a.mode })
        .collect();
    Ok(SweepResult { k, rho, samples, spec: *spec, truncation })
}

/// Riemann-sum measure of `{amp > threshold}`: fraction of samples above it times `2 rho`.
pub fn excluded_set_measure(sweep: &SweepResult, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
    }
    let above = sweep.samples.iter().filter(|s| s.amp > threshold).count();
    Ok(above as f64 / sweep.samples.len() as f64 * 2.0 * sweep.rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneReport {
    /// `(z, amp, amp Im z / (k^2 (1 + |z|^2)))` per sample.
    pub samples: Vec<(Complex64, f64, f64)>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub pass: bool,
}

/// `amp Im z / (k^2 (1 + |z|^2))` over `z` with `Im z > 0`; passes when the
/// maximum is within ten times the median.
pub fn upper_halfplane_check(k: f64, z_grid: &[Complex64], cfg_base: &MediumConfig, spec: &ProbeSpec) -> Result<HalfPlaneReport> {
    if z_grid.is_empty() || z_grid.iter().any(|z| !(z.im > 0.0)) {
        return Err(Error::InvalidParameter("every grid point needs Im z > 0".into()));
    }
    let amps: Vec<f64> = z_grid
        .par_iter()
        .map(|&z| amplification(k, &cfg_base.with_z(z), spec))
        .collect::<Result<_>>()?;
    let samples: Vec<(Complex64, f64, f64)> = z_grid
        .iter()
        .zip(&amps)
        .map(|(&z, &a)| (z, a, a * z.im / (k * k * (1.0 + z.norm_sqr()))))
        .collect();
    let mut r: Vec<f64> = samples.iter().map(|s| s.2).collect();
    r.sort_by(f64::total_cmp);
    let max_ratio = *r.last().unwrap();
    let median_ratio = r[r.len() / 2];
    Ok(HalfPlaneReport { samples, max_ratio, median_ratio, pass: max_ratio <= 10.0 * median_ratio })
}
