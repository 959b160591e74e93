//! `quasires`: quasi-resonances, fields, `z`-sweeps, pole searches, identity
//! checks and exponent plans for a penetrable disk.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric failure.

mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use quasires::bounds::{exponent_plan, Case, ExponentPlan};
use quasires::identities::{
    dtn_positivity, flux_balance, morawetz_residual, radiation_boundary_functional, wronskian_check, Domain,
    MorawetzParams, QuadReport,
};
use quasires::modal::{evaluate_field, FieldKind, GridSpec, MediumConfig};
use quasires::probe::{sweep_z, ProbeSpec};
use quasires::spectral::{find_quasi_resonances, find_z_poles, ModeCertificate};

use output::{num, percentile99, pgm, write_with_manifest, Csv, Json, Manifest};

/// Quasi-resonance closest to 1 for `n_i = 100`, used by the verification fixtures.
const FIXTURE_K1: f64 = 0.992772133752486;
const FIXTURE_K2: f64 = 2.19476917403094;

#[derive(Parser)]
#[command(name = "quasires", version, about = "Transmission scattering by a penetrable unit disk")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate quasi-resonances k_qr - i width of the unperturbed disk.
    Resonances(ResonanceArgs),
    /// Render |u| on a square grid as CSV and binary PGM.
    Field(FieldArgs),
    /// Sweep the modal amplification over real z in (-rho, rho).
    SweepZ(SweepArgs),
    /// Find every z-pole with |z| < rho.
    Poles(PoleArgs),
    /// Run the identity checks.
    Verify(VerifyArgs),
    /// Print the exponent plan of the real-z bound.
    Bound(BoundArgs),
}

#[derive(Args)]
struct ResonanceArgs {
    #[arg(long)]
    ni: f64,
    #[arg(long)]
    kmin: f64,
    #[arg(long)]
    kmax: f64,
    /// Highest mode scanned (default ceil(sqrt(ni) kmax) + 4).
    #[arg(long)]
    mmax: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    ni: f64,
    /// Real part of the perturbation z.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    z: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    z_im: f64,
    #[arg(long)]
    k: f64,
    /// Incidence angle in radians; the reference figure uses pi/6 = 0.5235987755982988.
    #[arg(long, default_value_t = PI / 6.0, allow_negative_numbers = true)]
    angle: f64,
    /// Half-width of the square window.
    #[arg(long, default_value_t = 3.0)]
    extent: f64,
    /// Pixels per side, at most 4096.
    #[arg(long, default_value_t = 512)]
    res: usize,
    /// incident, scattered, interior or total.
    #[arg(long, default_value = "total")]
    kind: String,
    #[arg(long)]
    out_pgm: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    ni: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 0.05)]
    rho: f64,
    /// Odd, at least 101.
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long, default_value_t = 48)]
    nodes: usize,
    #[arg(long, default_value_t = 1.0)]
    probe_radius: f64,
    #[arg(long)]
    mode_limit: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PoleArgs {
    #[arg(long)]
    ni: f64,
    #[arg(long)]
    k: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// wronskian, morawetz, radiation, dtn, flux or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Override every check's tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    d: u32,
    #[arg(long = "N", default_value_t = 0.0)]
    n: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    eps_prime: f64,
    /// smooth or penetrable.
    #[arg(long)]
    case: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numeric(String),
    Verification,
}

impl From<quasires::Error> for Failure {
    fn from(e: quasires::Error) -> Self {
        match e {
            quasires::Error::InvalidParameter(_) | quasires::Error::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Resonances(a) => resonances(a),
        Command::Field(a) => field(a),
        Command::SweepZ(a) => sweep(a),
        Command::Poles(a) => poles(a),
        Command::Verify(a) => verify(a),
        Command::Bound(a) => bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn medium(ni: f64, z: Complex64, angle: f64) -> Result<MediumConfig, Failure> {
    if !(ni > 0.0 && ni.is_finite()) {
        return Err(usage(format!("--ni must be positive, got {ni}")));
    }
    Ok(MediumConfig::new(ni, z, angle)?)
}

fn positive(name: &str, x: f64) -> Outcome {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {x}")))
    }
}

fn resonances(a: ResonanceArgs) -> Outcome {
    let start = Instant::now();
    positive("kmin", a.kmin)?;
    positive("kmax", a.kmax)?;
    if a.kmin >= a.kmax {
        return Err(usage(format!("--kmin ({}) must be below --kmax ({})", a.kmin, a.kmax)));
    }
    let cfg = medium(a.ni, Complex64::new(0.0, 0.0), 0.0)?;
    let mmax = a.mmax.unwrap_or((a.ni.sqrt() * a.kmax).ceil() as u32 + 4);
    let scan = find_quasi_resonances(&cfg, a.kmin, a.kmax, mmax)?;
    let mut csv = Csv::new(&["k_qr", "width", "m_dom", "residual"]);
    for r in &scan.resonances {
        csv.row(&[num(r.k_qr), num(r.width), r.m_dom.to_string(), num(r.residual)]);
    }
    for f in &scan.failures {
        eprintln!("warning: mode {} near k = {}: {}", f.m, f.k_start, f.reason);
    }
    let mut m = Manifest::new("resonances");
    m.param("ni", a.ni).param("kmin", a.kmin).param("kmax", a.kmax).param("mmax", mmax);
    m.note("scan_step", scan.step).note("count", scan.resonances.len()).note("newton_failures", scan.failures.len());
    write_with_manifest(&a.out, csv.into_string().as_bytes(), &m, start.elapsed().as_secs_f64())?;
    Ok(())
}

fn field(a: FieldArgs) -> Outcome {
    let start = Instant::now();
    positive("k", a.k)?;
    if a.res == 0 || a.res > 4096 {
        return Err(usage(format!("--res must lie in 1..=4096, got {}", a.res)));
    }
    if a.out_pgm.is_none() && a.out_csv.is_none() {
        return Err(usage("give --out-pgm, --out-csv or both"));
    }
    let kind: FieldKind = a.kind.parse()?;
    let cfg = medium(a.ni, Complex64::new(a.z, a.z_im), a.angle)?;
    let grid = evaluate_field(a.k, &cfg, &GridSpec { extent: a.extent, resolution: a.res }, kind)?;
    let mags: Vec<f64> = grid.values.iter().map(|u| u.norm()).collect();
    let p99 = percentile99(&mags);
    let max = mags.iter().copied().fold(0.0, f64::max);
    let mut m = Manifest::new("field");
    m.param("ni", a.ni)
        .param("z", a.z)
        .param("z_im", a.z_im)
        .param("k", a.k)
        .param("angle", a.angle)
        .param("extent", a.extent)
        .param("res", a.res)
        .param("kind", Json::str(kind.name()));
    m.note("p99", p99).note("max_abs", max);
    let secs = start.elapsed().as_secs_f64();
    if let Some(path) = &a.out_csv {
        let gs = GridSpec { extent: a.extent, resolution: a.res };
        let mut csv = Csv::new(&["row", "col", "x", "y", "abs_u"]);
        for row in 0..a.res {
            for col in 0..a.res {
                let (x, y) = gs.point(row, col);
                csv.row(&[row.to_string(), col.to_string(), num(x), num(y), num(mags[row * a.res + col])]);
            }
        }
        write_with_manifest(path, csv.into_string().as_bytes(), &m, secs)?;
    }
    if let Some(path) = &a.out_pgm {
        write_with_manifest(path, &pgm(a.res, a.res, &mags, p99), &m, secs)?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Outcome {
    let start = Instant::now();
    positive("k", a.k)?;
    positive("rho", a.rho)?;
    if a.samples < 101 || a.samples % 2 == 0 {
        return Err(usage(format!("--samples must be odd and at least 101, got {}", a.samples)));
    }
    let cfg = medium(a.ni, Complex64::new(0.0, 0.0), 0.0)?;
    let spec = ProbeSpec { probe_radius: a.probe_radius, nodes: a.nodes, mode_limit: a.mode_limit };
    let s = sweep_z(a.k, a.rho, a.samples, &cfg, &spec)?;
    let mut csv = Csv::new(&["z", "amp"]);
    for p in &s.samples {
        csv.row(&[num(p.z), num(p.amp)]);
    }
    let mut m = Manifest::new("sweep-z");
    m.param("ni", a.ni)
        .param("k", a.k)
        .param("rho", a.rho)
        .param("samples", a.samples)
        .param("nodes", a.nodes)
        .param("probe_radius", a.probe_radius)
        .param("mode_limit", a.mode_limit.map_or(Json::Null, Json::from));
    m.note("truncation", s.truncation)
        .note("amp_at_zero", s.amp_at_zero())
        .note("median_amp", s.median_amp())
        .note("max_amp", s.max_amp());
    write_with_manifest(&a.out, csv.into_string().as_bytes(), &m, start.elapsed().as_secs_f64())?;
    Ok(())
}

fn certificate_json(c: &ModeCertificate) -> Json {
    Json::obj([
        ("contour_min", c.contour_min.into()),
        ("found", c.found.into()),
        ("inconsistent_splits", c.inconsistent_splits.into()),
        ("m", c.m.into()),
        ("nudged", c.nudged.into()),
        ("radius", c.radius.into()),
        ("winding", c.winding.into()),
    ])
}

fn poles(a: PoleArgs) -> Outcome {
    let start = Instant::now();
    positive("k", a.k)?;
    positive("rho", a.rho)?;
    let cfg = medium(a.ni, Complex64::new(0.0, 0.0), 0.0)?;
    if a.rho >= a.ni {
        return Err(usage(format!("--rho must be below --ni, got {}", a.rho)));
    }
    let set = find_z_poles(a.k, a.rho, &cfg)?;
    let poles: Vec<Json> = set
        .poles
        .iter()
        .map(|p| {
            Json::obj([
                ("im", p.z.im.into()),
                ("m", p.m.into()),
                ("multiplicity", p.multiplicity.into()),
                ("re", p.z.re.into()),
                ("residual", p.residual.into()),
            ])
        })
        .collect();
    let doc = Json::obj([
        ("certificates", Json::Arr(set.certificates.iter().map(certificate_json).collect())),
        ("consistent", set.consistent().into()),
        ("k", set.k.into()),
        ("mode_cutoff", set.mode_cutoff.into()),
        ("poles", Json::Arr(poles)),
        ("rho", set.rho.into()),
        ("tail_certificates", Json::Arr(set.tail.iter().map(certificate_json).collect())),
        ("total_count", set.total_count().into()),
        ("total_with_multiplicity", (set.total_with_multiplicity() as i64).into()),
    ]);
    let mut m = Manifest::new("poles");
    m.param("ni", a.ni).param("k", a.k).param("rho", a.rho);
    m.note("total_count", set.total_count());
    write_with_manifest(&a.out, doc.render().as_bytes(), &m, start.elapsed().as_secs_f64())?;
    Ok(())
}

const SUITES: [&str; 5] = ["wronskian", "morawetz", "radiation", "dtn", "flux"];

fn run_suite(name: &str) -> Result<Vec<(String, QuadReport)>, Failure> {
    let fixture = MediumConfig::new(100.0, Complex64::new(0.0, 0.0), PI / 6.0)?;
    let mut out = Vec::new();
    match name {
        "wronskian" => {
            let mut args = Vec::new();
            for i in 0..=16 {
                let r = 0.1 * 5000f64.powf(i as f64 / 16.0);
                for j in 0..=8 {
                    let w = Complex64::from_polar(r, -0.75 * PI + 1.5 * PI * j as f64 / 8.0);
                    if w.im.abs() <= 20.0 {
                        args.push(w);
                    }
                }
            }
            out.push(("lattice".into(), wronskian_check(200, &args)?));
        }
        "morawetz" => {
            let beta = 2.0;
            for (label, domain) in [("disk", Domain::Disk), ("annulus", Domain::Annulus { outer: 2.0 })] {
                let p = MorawetzParams::standard(FIXTURE_K1, &fixture, domain, beta);
                out.push((label.into(), morawetz_residual(FIXTURE_K1, &fixture, &p)?));
            }
        }
        "radiation" => {
            for r in [1.5, 2.0, 4.0] {
                out.push((format!("R={r}"), radiation_boundary_functional(FIXTURE_K2, &fixture, r)?));
            }
        }
        "dtn" => {
            let xs: Vec<f64> = (1..=100).map(|i| 0.5 * i as f64).collect();
            out.push(("m<=100".into(), dtn_positivity(0..=100, &xs)?));
        }
        "flux" => {
            let absorbing = fixture.with_z(Complex64::new(0.0, 0.01));
            out.push(("z=0.01i".into(), flux_balance(1.0, &absorbing, 2.0)?));
            out.push(("z=0".into(), flux_balance(1.0, &fixture, 2.0)?));
        }
        _ => return Err(usage(format!("unknown suite '{name}'"))),
    }
    Ok(out)
}

fn report_json(r: &QuadReport, name: &str) -> Json {
    Json::obj([
        ("lhs", r.lhs.into()),
        ("name", Json::str(name)),
        ("pass", r.pass.into()),
        ("relative", r.relative.into()),
        ("residual", r.residual.into()),
        ("rhs", r.rhs.into()),
        ("tolerance", r.tolerance.into()),
    ])
}

fn verify(a: VerifyArgs) -> Outcome {
    let start = Instant::now();
    let selected: Vec<&str> = if a.suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(usage(format!("unknown suite '{}'", a.suite)));
    };
    if let Some(t) = a.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(usage("--tolerance must be nonnegative"));
        }
    }
    let mut all_pass = true;
    let mut suites = Vec::new();
    let mut text = String::new();
    for name in selected {
        let mut checks = Vec::new();
        let mut suite_pass = true;
        for (label, mut r) in run_suite(name)? {
            if let Some(t) = a.tolerance {
                r.tolerance = t;
                r.pass = r.relative <= t;
            }
            suite_pass &= r.pass;
            text.push_str(&format!("{name:<10} {label:<8} {} relative {}\n", r.verdict(), num(r.relative)));
            checks.push(report_json(&r, &label));
        }
        all_pass &= suite_pass;
        suites.push(Json::obj([("checks", Json::Arr(checks)), ("name", Json::str(name)), ("pass", suite_pass.into())]));
    }
    let doc = Json::obj([("pass", all_pass.into()), ("suites", Json::Arr(suites))]);
    if a.json {
        print!("{}", doc.render());
    } else {
        print!("{text}");
    }
    if let Some(path) = &a.out {
        let mut m = Manifest::new("verify");
        m.param("suite", Json::str(a.suite.clone())).param("tolerance", a.tolerance.map_or(Json::Null, Json::from));
        m.note("pass", all_pass);
        write_with_manifest(path, doc.render().as_bytes(), &m, start.elapsed().as_secs_f64())?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn plan_json(p: &ExponentPlan) -> Json {
    Json::obj([
        ("a_exponent", p.a_exponent.into()),
        ("case", Json::str(p.case.name())),
        ("d", p.d.into()),
        ("delta_exponent", p.delta_exponent.into()),
        ("eps", p.eps.into()),
        ("eps_prime", p.eps_prime.into()),
        ("final_exponent", p.final_exponent.into()),
        ("l", p.l.into()),
        ("m", p.m.into()),
        ("n", p.n.into()),
        ("pole_exponent", p.pole_exponent.into()),
        ("raw_exponent", p.raw_exponent.into()),
    ])
}

fn bound(a: BoundArgs) -> Outcome {
    let start = Instant::now();
    let case: Case = a.case.parse()?;
    let plan = exponent_plan(a.d, a.n, a.eps, a.eps_prime, case)?;
    let doc = plan_json(&plan).render();
    print!("{doc}");
    if let Some(path) = &a.out {
        let mut m = Manifest::new("bound");
        m.param("d", a.d).param("N", a.n).param("eps", a.eps).param("eps_prime", a.eps_prime).param("case", Json::str(case.name()));
        write_with_manifest(path, doc.as_bytes(), &m, start.elapsed().as_secs_f64())?;
    }
    Ok(())
}
