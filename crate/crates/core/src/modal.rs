//! Separated-variables solution of the transmission problem for the unit disk.
//!
//! Inside the disk the index is `n_i + z`, outside it is 1. A plane wave
//! `exp(ik(x cos t + y sin t))` hits the disk; per angular mode `m` the field is
//! `a_m J_m(nbar k r)` inside and `c_m J_m(kr) + b_m H_m(kr)` outside with
//! `c_m = i^m e^{-imt}`, and continuity of `u`, `d_r u` at `r = 1` fixes
//! `a_m`, `b_m`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::special::{cdiv, cyl_seq, j_seq, second_derivative, BesselJSeq, CylSeq, MAX_ORDER};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Determinant magnitude below which the coefficients are refused.
pub const SINGULAR_DET: f64 = 1.0e-30;

/// Tail tolerance used when a caller does not choose one.
pub const DEFAULT_TAIL_TOL: f64 = 1.0e-15;

/// Scatterer: unit disk with index `n_i + z`, plane wave from angle `incidence_angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumConfig {
    pub n_i: f64,
    pub z: Complex64,
    pub incidence_angle: f64,
}

/// Principal square root of `n_i + z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractionRoot {
    pub nbar: Complex64,
}

impl MediumConfig {
    pub fn new(n_i: f64, z: Complex64, incidence_angle: f64) -> Result<Self> {
        let cfg = MediumConfig { n_i, z, incidence_angle };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_i.is_finite() && self.n_i > 0.0) {
            return Err(Error::InvalidParameter(format!("n_i must be positive, got {}", self.n_i)));
        }
        if !(self.z.re.is_finite() && self.z.im.is_finite()) || self.z.norm() >= self.n_i {
            return Err(Error::InvalidParameter(format!(
                "|z| must be below n_i = {}, got z = {}",
                self.n_i, self.z
            )));
        }
        if !self.incidence_angle.is_finite() {
            return Err(Error::InvalidParameter("incidence angle must be finite".into()));
        }
        Ok(())
    }

    /// Same medium with a different perturbation.
    pub fn with_z(&self, z: Complex64) -> Self {
        MediumConfig { z, ..*self }
    }

    pub fn refraction_root(&self) -> RefractionRoot {
        RefractionRoot { nbar: (self.n_i + self.z).sqrt() }
    }

    pub fn nbar(&self) -> Complex64 {
        self.refraction_root().nbar
    }
}

/// Incident modal weight `c_m = i^m e^{-i m t}`.
pub fn incident_weight(m: u32, incidence_angle: f64) -> Complex64 {
    i_pow(m) * Complex64::from_polar(1.0, -(m as f64) * incidence_angle)
}

pub(crate) fn i_pow(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Coefficients of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalSolution {
    pub m: u32,
    pub k: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub d: Complex64,
}

/// `D_m` with its partial derivatives in `k` (at fixed `nbar`) and in `nbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantDerivs {
    pub d: Complex64,
    pub d_dk: Complex64,
    pub d_dnbar: Complex64,
}

impl DeterminantDerivs {
    /// `dD/dz` through `dnbar/dz = 1/(2 nbar)`.
    pub fn d_dz(&self, nbar: Complex64) -> Complex64 {
        self.d_dnbar / (2.0 * nbar)
    }
}

/// `H^(1)_m(k)`, its first and second derivatives, `J_m(k)`, `J_m'(k)` for all
/// modes up to `max_order`. Shared by every `z` at the same `k`.
#[derive(Debug, Clone)]
pub struct ExteriorTable {
    k: Complex64,
    seq: CylSeq,
}

impl ExteriorTable {
    pub fn new(max_order: u32, k: f64) -> Result<Self> {
        check_k(k)?;
        Self::at_complex(max_order, Complex64::new(k, 0.0))
    }

    /// Same at a complex frequency, for resonance refinement.
    pub fn at_complex(max_order: u32, k: Complex64) -> Result<Self> {
        Ok(ExteriorTable { k, seq: cyl_seq(max_order, k)? })
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn max_order(&self) -> u32 {
        self.seq.max_order()
    }

    fn h(&self, m: u32) -> (Complex64, Complex64, Complex64) {
        let h = self.seq.h1(m);
        let hp = self.seq.h1p(m);
        (h, hp, second_derivative(m, self.k, h, hp))
    }

    fn j(&self, m: u32) -> (Complex64, Complex64) {
        (self.seq.j(m), self.seq.jp(m))
    }
}

/// Interior `J_m(nbar k)` for all modes up to `max_order`.
#[derive(Debug, Clone)]
pub struct InteriorTable {
    nbar: Complex64,
    seq: BesselJSeq,
}

impl InteriorTable {
    pub fn new(max_order: u32, k: f64, nbar: Complex64) -> Result<Self> {
        Self::at_complex(max_order, Complex64::new(k, 0.0), nbar)
    }

    pub fn at_complex(max_order: u32, k: Complex64, nbar: Complex64) -> Result<Self> {
        Ok(InteriorTable { nbar, seq: j_seq(max_order, nbar * k)? })
    }

    pub fn nbar(&self) -> Complex64 {
        self.nbar
    }
}

/// `D_m = nbar J_m'(nbar k) H_m(k) - J_m(nbar k) H_m'(k)` and derivatives.
pub fn determinant_from_tables(m: u32, ext: &ExteriorTable, int: &InteriorTable) -> DeterminantDerivs {
    let k = ext.k;
    let nbar = int.nbar;
    let (h, hp, hpp) = ext.h(m);
    let (j, jp, jpp) = (int.seq.j(m), int.seq.jp(m), int.seq.jpp(m));
    DeterminantDerivs {
        d: nbar * jp * h - j * hp,
        d_dk: nbar * nbar * jpp * h - j * hpp,
        d_dnbar: (jp + nbar * k * jpp) * h - k * jp * hp,
    }
}

/// Coefficients from precomputed tables.
pub fn coefficients_from_tables(
    m: u32,
    ext: &ExteriorTable,
    int: &InteriorTable,
    incidence_angle: f64,
) -> Result<ModalSolution> {
    let k = ext.k;
    if k.im != 0.0 {
        return Err(Error::InvalidParameter("coefficients need a real frequency".into()));
    }
    let nbar = int.nbar;
    let d = determinant_from_tables(m, ext, int).d;
    if !(d.norm() >= SINGULAR_DET) {
        return Err(Error::NearSingular { mode: m, det_abs: d.norm() });
    }
    let c = incident_weight(m, incidence_angle);
    let (jk, jpk) = ext.j(m);
    let (jn, jpn) = (int.seq.j(m), int.seq.jp(m));
    // Cramer on [J(nk), -H; nbar J'(nk), -H'] (a, b) = c (J(k), J'(k)), using
    // J'(k) H(k) - J(k) H'(k) = -2i/(pi k)
    let a = cdiv(-2.0 * I * c, PI * k * d);
    let b = c * cdiv(jn * jpk - nbar * jpn * jk, d);
    Ok(ModalSolution { m, k: k.re, a, b, d })
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    Ok(())
}

/// The transmission determinant `D_m(k)` for `cfg`.
pub fn modal_determinant(m: u32, k: f64, cfg: &MediumConfig) -> Result<Complex64> {
    Ok(modal_determinant_derivs(m, k, cfg)?.d)
}

/// Scale of the two products in `D_m`, `|nbar J'(nbar k) H(k)| + |J(nbar k) H'(k)|`.
/// `|D_m|` divided by this is small only near a cancellation.
pub fn determinant_scale(m: u32, ext: &ExteriorTable, int: &InteriorTable) -> f64 {
    let (h, hp, _) = ext.h(m);
    (int.nbar * int.seq.jp(m) * h).norm() + (int.seq.j(m) * hp).norm()
}

/// `D_m` with analytic derivatives in `k` and `nbar`.
pub fn modal_determinant_derivs(m: u32, k: f64, cfg: &MediumConfig) -> Result<DeterminantDerivs> {
    cfg.validate()?;
    let ext = ExteriorTable::new(m, k)?;
    let int = InteriorTable::new(m, k, cfg.nbar())?;
    Ok(determinant_from_tables(m, &ext, &int))
}

/// `D_m` for every mode `0..=max_order` from one pair of sequences.
pub fn determinants(max_order: u32, k: f64, cfg: &MediumConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let ext = ExteriorTable::new(max_order, k)?;
    let int = InteriorTable::new(max_order, k, cfg.nbar())?;
    Ok((0..=max_order).map(|m| determinant_from_tables(m, &ext, &int).d).collect())
}

/// Interior and scattered coefficients of mode `m`.
pub fn modal_coefficients(m: u32, k: f64, cfg: &MediumConfig) -> Result<ModalSolution> {
    cfg.validate()?;
    let ext = ExteriorTable::new(m, k)?;
    let int = InteriorTable::new(m, k, cfg.nbar())?;
    coefficients_from_tables(m, &ext, &int, cfg.incidence_angle)
}

/// Smallest `M >= ceil(|nbar| k) + 8` whose interface contribution
/// `|a_M J_M(nbar k)| + |b_M H_M(k)|` is below `tail_tol` times the largest one
/// at or below `M`.
pub fn truncation_order(k: f64, cfg: &MediumConfig, tail_tol: f64) -> Result<u32> {
    cfg.validate()?;
    check_k(k)?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
    }
    let nbar = cfg.nbar();
    let floor = (nbar.norm() * k).ceil() as u32 + 8;
    if floor > MAX_ORDER {
        return Err(Error::CapExceeded { cap: MAX_ORDER });
    }
    let mut hi = (floor + 32).min(MAX_ORDER);
    loop {
        let ext = ExteriorTable::new(hi, k)?;
        let int = InteriorTable::new(hi, k, nbar)?;
        let mut largest: f64 = 0.0;
        for m in 0..=hi {
            let s = coefficients_from_tables(m, &ext, &int, 0.0)?;
            let size = (s.a * int.seq.j(m)).norm() + (s.b * ext.h(m).0).norm();
            largest = largest.max(size);
            if m >= floor && size < tail_tol * largest {
                return Ok(m);
            }
        }
        if hi == MAX_ORDER {
            return Err(Error::CapExceeded { cap: MAX_ORDER });
        }
        hi = (2 * hi).min(MAX_ORDER);
    }
}

/// Which part of the field to synthesize.
///
/// `Interior` is zero outside the disk and `Scattered` zero inside it;
/// `Incident` is the plane wave everywhere; `Total` is incident plus scattered
/// outside and interior inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Incident,
    Scattered,
    Interior,
    Total,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Incident => "incident",
            FieldKind::Scattered => "scattered",
            FieldKind::Interior => "interior",
            FieldKind::Total => "total",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incident" => Ok(FieldKind::Incident),
            "scattered" => Ok(FieldKind::Scattered),
            "interior" => Ok(FieldKind::Interior),
            "total" => Ok(FieldKind::Total),
            other => Err(Error::InvalidParameter(format!("unknown field kind {other:?}"))),
        }
    }
}

/// Square grid `[-extent, extent]^2` sampled at pixel centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub extent: f64,
    pub resolution: usize,
}

impl GridSpec {
    /// `(x, y)` of pixel `(row, col)`; rows run from `y = +extent` downwards.
    pub fn point(&self, row: usize, col: usize) -> (f64, f64) {
        let step = 2.0 * self.extent / self.resolution as f64;
        (
            -self.extent + (col as f64 + 0.5) * step,
            self.extent - (row as f64 + 0.5) * step,
        )
    }
}

/// Synthesized field values, row-major, first row at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub extent: f64,
    pub resolution: usize,
    pub kind: FieldKind,
    pub values: Vec<Complex64>,
}

/// Which radial factor of the expansion is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// `(a_m/c_m) J_m(nbar k r)`.
    Interior,
    /// `J_m(kr)`.
    Incident,
    /// `(b_m/c_m) H_m(kr)`.
    Scattered,
    /// `J_m(kr) + (b_m/c_m) H_m(kr)`.
    Exterior,
}

/// Truncated expansion `u = sum_m eps_m i^m g_m(r) cos(m (theta - t))`, with
/// `eps_0 = 1`, `eps_m = 2`, which folds the negative modes into the positive ones.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    pub k: f64,
    pub cfg: MediumConfig,
    pub order: u32,
    /// `a_m / c_m`
    pub interior: Vec<Complex64>,
    /// `b_m / c_m`
    pub scattered: Vec<Complex64>,
}

impl ModalExpansion {
    /// Expansion truncated by [`truncation_order`] at `tail_tol`.
    pub fn new(k: f64, cfg: &MediumConfig, tail_tol: f64) -> Result<Self> {
        let order = truncation_order(k, cfg, tail_tol)?;
        Self::with_order(k, cfg, order)
    }

    /// Like [`ModalExpansion::new`] but with enough modes for the incident
    /// wave to converge out to radius `r_max`.
    pub fn for_radius(k: f64, cfg: &MediumConfig, tail_tol: f64, r_max: f64) -> Result<Self> {
        let x = k * r_max.max(1.0);
        let plane = (x + 3.0 * x.cbrt() * (-tail_tol.ln()).sqrt() + 10.0).ceil() as u32;
        let order = truncation_order(k, cfg, tail_tol)?.max(plane);
        if order > MAX_ORDER {
            return Err(Error::CapExceeded { cap: MAX_ORDER });
        }
        Self::with_order(k, cfg, order)
    }

    pub fn with_order(k: f64, cfg: &MediumConfig, order: u32) -> Result<Self> {
        cfg.validate()?;
        let ext = ExteriorTable::new(order, k)?;
        let int = InteriorTable::new(order, k, cfg.nbar())?;
        let mut interior = Vec::with_capacity(order as usize + 1);
        let mut scattered = Vec::with_capacity(order as usize + 1);
        for m in 0..=order {
            let s = coefficients_from_tables(m, &ext, &int, 0.0)?;
            let c = i_pow(m).conj();
            interior.push(s.a * c);
            scattered.push(s.b * c);
        }
        Ok(ModalExpansion { k, cfg: *cfg, order, interior, scattered })
    }

    /// `(g_m(r), g_m'(r))` for every mode of `piece`. `r > 0`.
    pub fn radial(&self, piece: Piece, r: f64) -> Result<Vec<(Complex64, Complex64)>> {
        let k = self.k;
        let order = self.order;
        match piece {
            Piece::Interior => {
                let nk = self.cfg.nbar() * k;
                let s = j_seq(order, nk * r)?;
                Ok((0..=order)
                    .map(|m| {
                        let a = self.interior[m as usize];
                        (a * s.j(m), a * nk * s.jp(m))
                    })
                    .collect())
            }
            Piece::Incident => {
                let s = j_seq(order, Complex64::new(k * r, 0.0))?;
                Ok((0..=order).map(|m| (s.j(m), k * s.jp(m))).collect())
            }
            Piece::Scattered | Piece::Exterior => {
                let s = cyl_seq(order, Complex64::new(k * r, 0.0))?;
                let with_incident = piece == Piece::Exterior;
                Ok((0..=order)
                    .map(|m| {
                        let b = self.scattered[m as usize];
                        let mut g = b * s.h1(m);
                        let mut gp = b * k * s.h1p(m);
                        if with_incident {
                            g += s.j(m);
                            gp += k * s.jp(m);
                        }
                        (g, gp)
                    })
                    .collect())
            }
        }
    }

    /// Field value at polar point `(r, theta)` from precomputed radial factors.
    pub fn synthesize(&self, radial: &[(Complex64, Complex64)], theta: f64) -> Complex64 {
        let phi = theta - self.cfg.incidence_angle;
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, (g, _)) in radial.iter().enumerate() {
            let eps = if m == 0 { 1.0 } else { 2.0 };
            sum += eps * (m as f64 * phi).cos() * i_pow(m as u32) * *g;
        }
        sum
    }

    /// Value at `(x, y)` of the requested field kind.
    pub fn value_at(&self, kind: FieldKind, x: f64, y: f64) -> Result<Complex64> {
        let r = x.hypot(y);
        let inside = r < 1.0;
        let piece = match (kind, inside) {
            (FieldKind::Incident, _) => Piece::Incident,
            (FieldKind::Interior, true) | (FieldKind::Total, true) => Piece::Interior,
            (FieldKind::Scattered, false) => Piece::Scattered,
            (FieldKind::Total, false) => Piece::Exterior,
            (FieldKind::Interior, false) | (FieldKind::Scattered, true) => {
                return Ok(Complex64::new(0.0, 0.0))
            }
        };
        if r == 0.0 {
            // only m = 0 survives at the origin
            return Ok(match piece {
                Piece::Interior => self.interior[0],
                _ => Complex64::new(1.0, 0.0),
            });
        }
        let radial = self.radial(piece, r)?;
        Ok(self.synthesize(&radial, y.atan2(x)))
    }
}

/// Field on a square grid. Rows are computed in parallel; each pixel sums its
/// modes in a fixed order, so the result does not depend on the thread count.
pub fn evaluate_field(k: f64, cfg: &MediumConfig, grid: &GridSpec, kind: FieldKind) -> Result<FieldGrid> {
    if !(grid.extent >= 1.1 && grid.extent.is_finite()) {
        return Err(Error::InvalidParameter(format!("extent must be >= 1.1, got {}", grid.extent)));
    }
    if grid.resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let expansion = ModalExpansion::for_radius(k, cfg, DEFAULT_TAIL_TOL, grid.extent * SQRT_2)?;
    let res = grid.resolution;
    let rows: Vec<Vec<Complex64>> = (0..res)
        .into_par_iter()
        .map(|row| {
            (0..res)
                .map(|col| {
                    let (x, y) = grid.point(row, col);
                    expansion.value_at(kind, x, y)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldGrid {
        extent: grid.extent,
        resolution: res,
        kind,
        values: rows.into_iter().flatten().collect(),
    })
}
