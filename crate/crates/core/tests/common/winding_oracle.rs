//! Brute-force winding number: uniform phase tracking with a fixed, dense sample count.

use num_complex::Complex64;

/// Winding number of `f` around the circle `|z - center| = radius` from
/// `samples` equally spaced points, with the principal-branch phase jump
/// between neighbours. Returns `None` when a jump is ambiguous (>= pi/2).
pub fn circle_winding(
    f: impl Fn(Complex64) -> Complex64,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Option<i64> {
    let values: Vec<Complex64> = (0..samples)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / samples as f64;
            f(center + Complex64::from_polar(radius, t))
        })
        .collect();
    winding_of_samples(&values)
}

/// Same, when the samples are produced elsewhere (batched evaluation).
pub fn winding_of_samples(values: &[Complex64]) -> Option<i64> {
    let mut total = 0.0;
    for i in 0..values.len() {
        let a = values[i];
        let b = values[(i + 1) % values.len()];
        // unit phasors first: |a|^2 can overflow for high orders
        let jump = ((b / b.norm()) * (a / a.norm()).conj()).arg();
        if jump.abs() >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        total += jump;
    }
    Some((total / std::f64::consts::TAU).round() as i64)
}

/// `J_0..=J_top` at complex `w` by plain Miller recurrence normalized with
/// `J_0 + 2 sum J_{2k} = 1`. Adequate for `|Im w|` of order one.
pub fn miller_j(top: usize, w: Complex64) -> Vec<Complex64> {
    let start = top + 40 + (2.0 * w.norm()) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); top + 1];
    let mut next = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in (1..=start).rev() {
        let prev = cur * (2.0 * n as f64) / w - next;
        next = cur;
        cur = prev;
        let idx = n - 1;
        if idx <= top {
            out[idx] = cur;
        }
        if idx % 2 == 0 {
            sum += if idx == 0 { cur } else { 2.0 * cur };
        }
        if cur.norm() > 1.0e100 {
            let s = 1.0e-100;
            cur *= s;
            next *= s;
            sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    // num-complex divides through |sum|^2, so bring sum to unit size first
    let unit = sum / sum.norm();
    out.iter().map(|v| (v / sum.norm()) / unit).collect()
}

/// Winding numbers of `z -> D_m(k, z)` for `m = 0..=max_m`, each on its own
/// circle `|z| = radii[m]`, from `samples` points per circle. `D_m` is built
/// from `nbar = sqrt(n_i + z)`, Miller `J` at `nbar k` and the caller's
/// exterior values `(H_m(k), H_m'(k))`.
pub fn dense_mode_windings(
    k: f64,
    n_i: f64,
    radii: &[f64],
    exterior: &[(Complex64, Complex64)],
    samples: usize,
) -> Vec<Option<i64>> {
    let modes = radii.len();
    // group modes sharing a radius so each contour point needs one J sequence
    let mut order: Vec<usize> = (0..modes).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let mut result = vec![None; modes];
    let mut i = 0;
    while i < order.len() {
        let r = radii[order[i]];
        let mut group = vec![];
        while i < order.len() && radii[order[i]] == r {
            group.push(order[i]);
            i += 1;
        }
        let top = *group.iter().max().unwrap() + 1;
        let mut prev = vec![Complex64::new(0.0, 0.0); group.len()];
        let mut total = vec![0.0; group.len()];
        let mut bad = vec![false; group.len()];
        for s in 0..=samples {
            let t = std::f64::consts::TAU * (s % samples) as f64 / samples as f64;
            let z = Complex64::from_polar(r, t);
            let nbar = (n_i + z).sqrt();
            let w = nbar * k;
            let j = miller_j(top, w);
            for (g, &m) in group.iter().enumerate() {
                // J_m' = J_{m-1} - m J_m / w, with J_{-1} = -J_1
                let jm1 = if m == 0 { -j[1] } else { j[m - 1] };
                let jp = jm1 - j[m] * (m as f64) / w;
                let (h, hp) = exterior[m];
                let d = nbar * jp * h - j[m] * hp;
                if s > 0 {
                    let a = prev[g];
                    let jump = ((d / d.norm()) * (a / a.norm()).conj()).arg();
                    if jump.abs() >= std::f64::consts::FRAC_PI_2 {
                        bad[g] = true;
                    }
                    total[g] += jump;
                }
                prev[g] = d;
            }
        }
        for (g, &m) in group.iter().enumerate() {
            result[m] = (!bad[g]).then(|| (total[g] / std::f64::consts::TAU).round() as i64);
        }
    }
    result
}
