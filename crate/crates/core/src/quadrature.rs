//! Gauss-Legendre rules mapped to intervals, and composite panels.

use gauss_quad::GaussLegendre;

use crate::{Error, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n)
        .map_err(|_| Error::InvalidParameter(format!("Gauss-Legendre rule needs n >= 2, got {n}")))?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect())
}

/// `panels` equal sub-intervals of `[a, b]`, each with an `n`-point rule.
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        out.extend(gauss_legendre(n, lo, hi)?);
    }
    Ok(out)
}
