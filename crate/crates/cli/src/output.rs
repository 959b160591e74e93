//! Byte-stable writers: `%g`-style numbers, sorted-key JSON, CSV, binary PGM
//! and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const CSV_DIGITS: usize = 15;
pub const JSON_DIGITS: usize = 17;

/// C `printf("%.*g")` with `digits` significant digits, trailing zeros removed.
pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let p = digits.max(1);
    // exponent after rounding to p digits
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Minimal JSON tree whose objects serialize with sorted keys.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(BTreeMap<String, Json>),
}

impl Json {
    pub fn obj<const N: usize>(pairs: [(&str, Json); N]) -> Json {
        Json::Obj(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat(' ').take(2 * n));
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            // non-finite values have no JSON spelling
            Json::Num(x) if !x.is_finite() => out.push_str("null"),
            Json::Num(x) => out.push_str(&fmt_g(*x, JSON_DIGITS)),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string escaping")),
            Json::Arr(items) if items.is_empty() => out.push_str("[]"),
            Json::Arr(items) => {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(map) if map.is_empty() => out.push_str("{}"),
            Json::Obj(map) => {
                out.push_str("{\n");
                for (i, (k, v)) in map.iter().enumerate() {
                    pad(out, indent + 1);
                    out.push_str(&serde_json::to_string(k).expect("string escaping"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }

    /// Pretty-printed, newline-terminated.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0);
        s.push('\n');
        s
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Num(x)
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Self {
        Json::Bool(b)
    }
}

impl From<u32> for Json {
    fn from(i: u32) -> Self {
        Json::Int(i as i64)
    }
}

impl From<i64> for Json {
    fn from(i: i64) -> Self {
        Json::Int(i)
    }
}

impl From<usize> for Json {
    fn from(i: usize) -> Self {
        Json::Int(i as i64)
    }
}

/// CSV with one header row and `\n` line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(x: f64) -> String {
    fmt_g(x, CSV_DIGITS)
}

/// Nearest-rank 99th percentile.
pub fn percentile99(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((0.99 * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Binary PGM, `255 * clip(value / scale, 0, 1)` rounded; a zero scale gives black.
pub fn pgm(width: usize, height: usize, values: &[f64], scale: f64) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if !(scale > 0.0) {
            0
        } else if v.is_nan() {
            0
        } else {
            (255.0 * (v / scale).clamp(0.0, 1.0)).round() as u8
        }
    }));
    out
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub struct Manifest {
    pub command: &'static str,
    pub params: BTreeMap<String, Json>,
    pub extra: BTreeMap<String, Json>,
    pub seed: Option<u64>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest { command, params: BTreeMap::new(), extra: BTreeMap::new(), seed: None }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Json>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn note(&mut self, key: &str, value: impl Into<Json>) -> &mut Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self, output: &Path, seconds: f64) -> Json {
        Json::obj([
            ("command", Json::str(self.command)),
            ("output", Json::str(output.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())),
            ("parameters", Json::Obj(self.params.clone())),
            ("results", Json::Obj(self.extra.clone())),
            ("seed", self.seed.map_or(Json::Null, |s| Json::Int(s as i64))),
            ("version", Json::str(env!("CARGO_PKG_VERSION"))),
            ("wall_clock_seconds", Json::Num(seconds)),
        ])
    }
}

/// Writes `data` to `path` and the manifest beside it.
pub fn write_with_manifest(path: &Path, data: &[u8], manifest: &Manifest, seconds: f64) -> io::Result<()> {
    fs::write(path, data)?;
    fs::write(manifest_path(path), manifest.to_json(path, seconds).render())
}
