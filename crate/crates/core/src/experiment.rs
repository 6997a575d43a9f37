//! Config-driven sweep recipes that write CSV tables plus a JSON manifest.
//!
//! Spec files are flat `key = value` lines. `#` starts a comment. A value is
//! a comma-separated list whose items are numbers, numbers with a `dB`
//! suffix, or inclusive ranges `start:step:stop` (a `dB` suffix on any part
//! marks the whole range as dB). Every parameter with more than one value
//! becomes a sweep axis; rows are the Cartesian product with the first
//! canonical parameter of the kind outermost.
//!
//! ```text
//! kind   = rate-validation
//! M      = 32, 64
//! snr    = -20dB:5dB:0dB
//! trials = 2000
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bussgang::{estimate_quality, low_snr_quality, LmmseEstimator};
use crate::optimizer::{optimize_case1, optimize_case2, ConventionalModel, OneBitModel};
use crate::rate::{appendix_moments_mc, closed_form_rate, ergodic_rate_mc};
use crate::rng::point_seed;
use crate::system::{make_dft_pilots, SystemConfig};
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ONEBIT_MIMO_OUT_DIR";

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RateValidation,
    SeVsT,
    OptTauVsPower,
    OptTauVsT,
    MseSweep,
    MomentsCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::RateValidation,
        ExperimentKind::SeVsT,
        ExperimentKind::OptTauVsPower,
        ExperimentKind::OptTauVsT,
        ExperimentKind::MseSweep,
        ExperimentKind::MomentsCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RateValidation => "rate-validation",
            ExperimentKind::SeVsT => "se-vs-T",
            ExperimentKind::OptTauVsPower => "opt-tau-vs-power",
            ExperimentKind::OptTauVsT => "opt-tau-vs-T",
            ExperimentKind::MseSweep => "mse-sweep",
            ExperimentKind::MomentsCheck => "moments-check",
        }
    }

    /// Parameters the recipe reads, in sweep-nesting order, with defaults.
    fn defaults(self) -> Vec<(&'static str, &'static str)> {
        match self {
            ExperimentKind::RateValidation => vec![
                ("M", "32, 64, 128"),
                ("snr", "-20dB:5dB:0dB"),
                ("K", "8"),
                ("T", "200"),
                ("tau", "16"),
            ],
            ExperimentKind::SeVsT | ExperimentKind::OptTauVsT => vec![
                ("T", "50:50:500"),
                ("rho", "-10dB"),
                ("M", "128"),
                ("K", "8"),
            ],
            ExperimentKind::OptTauVsPower => vec![
                ("T", "100, 200"),
                ("rho", "-20dB:2dB:10dB"),
                ("M", "128"),
                ("K", "8"),
            ],
            ExperimentKind::MseSweep => vec![
                ("tau", "8:8:64"),
                ("rho_p", "-20dB:5dB:10dB"),
                ("M", "128"),
                ("K", "8"),
            ],
            ExperimentKind::MomentsCheck => vec![
                ("M", "64"),
                ("K", "8"),
                ("tau", "8"),
                ("rho_p", "0.1"),
                ("rho_d", "0.1"),
            ],
        }
    }

    fn default_trials(self) -> usize {
        match self {
            ExperimentKind::RateValidation => 1000,
            ExperimentKind::MomentsCheck => 10_000,
            _ => 1,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown experiment kind '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

const INTEGER_KEYS: [&str; 4] = ["M", "K", "T", "tau"];

/// One named parameter and its values (linear scale).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Every parameter the recipe reads, in nesting order.
    pub params: Vec<SweepAxis>,
    pub trials: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

fn parse_number(item: &str) -> std::result::Result<(f64, bool), String> {
    let item = item.trim();
    let (num, db) = match item.strip_suffix("dB").or_else(|| item.strip_suffix("db")) {
        Some(n) => (n.trim(), true),
        None => (item, false),
    };
    num.parse::<f64>()
        .map(|v| (v, db))
        .map_err(|_| format!("'{item}' is not a number"))
}

/// Parses a list value into linear-scale numbers.
pub fn parse_values(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err("empty list item".into());
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.len() {
            1 => {
                let (v, db) = parse_number(parts[0])?;
                out.push(if db { db_to_linear(v) } else { v });
            }
            3 => {
                let parsed: Vec<(f64, bool)> = parts.iter().map(|p| parse_number(p)).collect::<std::result::Result<_, _>>()?;
                let db = parsed.iter().any(|p| p.1);
                let (start, step, stop) = (parsed[0].0, parsed[1].0, parsed[2].0);
                if !(step > 0.0) || !(stop >= start) {
                    return Err(format!("range '{item}' needs step > 0 and stop >= start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                if n > 100_000 {
                    return Err(format!("range '{item}' has too many points"));
                }
                for i in 0..=n {
                    let v = start + i as f64 * step;
                    out.push(if db { db_to_linear(v) } else { v });
                }
            }
            _ => return Err(format!("'{item}' is neither a value nor a start:step:stop range")),
        }
    }
    if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
        return Err(format!("non-finite value {bad}"));
    }
    Ok(out)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl ExperimentSpec {
    /// The recipe's defaults with no overrides.
    pub fn with_defaults(kind: ExperimentKind) -> Self {
        let params = kind
            .defaults()
            .into_iter()
            .map(|(name, v)| SweepAxis {
                name: name.to_string(),
                values: parse_values(v).expect("built-in defaults parse"),
            })
            .collect();
        Self { kind, params, trials: kind.default_trials(), seed: DEFAULT_SEED, output_path: None }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse { line: line_no, msg: "empty key or value".into() });
            }
            if entries.insert(key.to_string(), (line_no, value.to_string())).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key '{key}'") });
            }
        }

        let (kind_line, kind_text) = entries
            .remove("kind")
            .ok_or_else(|| Error::Config("spec is missing 'kind'".into()))?;
        let kind = kind_text.parse::<ExperimentKind>().map_err(|e| Error::Parse {
            line: kind_line,
            msg: e.to_string(),
        })?;
        let mut spec = Self::with_defaults(kind);

        if let Some((line, v)) = entries.remove("trials") {
            spec.trials = v.parse().map_err(|_| Error::Parse { line, msg: format!("bad trial count '{v}'") })?;
        }
        if let Some((line, v)) = entries.remove("seed") {
            spec.seed = v.parse().map_err(|_| Error::Parse { line, msg: format!("bad seed '{v}'") })?;
        }
        if let Some((_, v)) = entries.remove("output") {
            spec.output_path = Some(PathBuf::from(v));
        }

        for (key, (line, value)) in entries {
            let axis = spec
                .params
                .iter_mut()
                .find(|a| a.name == key)
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("unknown key '{key}' for kind {kind}"),
                })?;
            axis.values = parse_values(&value).map_err(|msg| Error::Parse { line, msg })?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        for axis in &self.params {
            if axis.values.is_empty() {
                return Err(Error::Config(format!("'{}' has no values", axis.name)));
            }
            for &v in &axis.values {
                if !v.is_finite() {
                    return Err(Error::Config(format!("'{}' has non-finite value {v}", axis.name)));
                }
                if v < 0.0 {
                    return Err(Error::Config(format!("'{}' must be >= 0, got {v}", axis.name)));
                }
                if INTEGER_KEYS.contains(&axis.name.as_str()) && (v.fract() != 0.0 || v < 1.0) {
                    return Err(Error::Config(format!("'{}' must be a positive integer, got {v}", axis.name)));
                }
            }
        }
        if self.kind == ExperimentKind::MomentsCheck && self.trials < 1000 {
            return Err(Error::Config("moments-check needs trials >= 1000".into()));
        }
        Ok(())
    }

    /// Parameters that take more than one value.
    pub fn sweep(&self) -> Vec<&SweepAxis> {
        self.params.iter().filter(|a| a.values.len() > 1).collect()
    }

    /// All grid points in row order.
    pub fn points(&self) -> Vec<Point> {
        let mut points = vec![Point::default()];
        for axis in &self.params {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.values.insert(axis.name.clone(), v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// One grid point: parameter name to linear value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    values: BTreeMap<String, f64>,
}

impl Point {
    fn real(&self, key: &str) -> f64 {
        self.values[key]
    }

    fn int(&self, key: &str) -> usize {
        self.values[key] as usize
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => f.write_str(&format_significant(*v, 10)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// `%.{digits}g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn rate_validation_row(p: &Point, trials: usize, seed: u64) -> Result<Vec<Cell>> {
    let (m, k, t, tau) = (p.int("M"), p.int("K"), p.int("T"), p.int("tau"));
    let rho = p.real("snr");
    let cfg = SystemConfig::new(m, k, t, tau, rho, rho, seed)?;
    let mc = ergodic_rate_mc(&cfg, trials)?;
    let eta_sq = LmmseEstimator::new(&cfg.pilots()?, rho)?.eta_sq();
    let duty = (t - tau) as f64 / t as f64 * k as f64;
    let se_mc = duty * mc.mean;
    let se_closed = duty * closed_form_rate(m, k, rho, eta_sq)?;
    let se_low = duty * closed_form_rate(m, k, rho, low_snr_quality(tau, rho, k))?;
    Ok(vec![
        Cell::Real(linear_to_db(rho)),
        Cell::Int(m as i64),
        Cell::Int(k as i64),
        Cell::Int(t as i64),
        Cell::Int(tau as i64),
        Cell::Int(trials as i64),
        Cell::Real(eta_sq),
        Cell::Real(se_mc),
        Cell::Real(duty * mc.std_err),
        Cell::Real(se_closed),
        Cell::Real(se_low),
        Cell::Real(rel_gap(se_mc, se_closed)),
    ])
}

fn optimization_row(p: &Point) -> Result<Vec<Cell>> {
    let (m, k, t) = (p.int("M"), p.int("K"), p.int("T"));
    let rho = p.real("rho");
    let budget = rho * t as f64;
    let one_bit = OneBitModel { m, k };
    let conv = ConventionalModel { m, k };
    let ob1 = optimize_case1(&one_bit, t, budget)?;
    let ob2 = optimize_case2(&one_bit, t, rho)?;
    let cv1 = optimize_case1(&conv, t, budget)?;
    let cv2 = optimize_case2(&conv, t, rho)?;
    let gamma = |g: Option<f64>| Cell::Real(g.unwrap_or(f64::NAN));
    Ok(vec![
        Cell::Int(t as i64),
        Cell::Real(linear_to_db(rho)),
        Cell::Real(rho),
        Cell::Int(m as i64),
        Cell::Int(k as i64),
        Cell::Int(ob1.tau_star as i64),
        gamma(ob1.gamma_star),
        Cell::Real(ob1.se_star),
        Cell::Int(ob2.tau_star as i64),
        Cell::Real(ob2.se_star),
        Cell::Int(cv1.tau_star as i64),
        gamma(cv1.gamma_star),
        Cell::Real(cv1.se_star),
        Cell::Int(cv2.tau_star as i64),
        Cell::Real(cv2.se_star),
        Cell::Real((ob1.se_star - ob2.se_star) / ob1.se_star),
        Cell::Real((cv1.se_star - cv2.se_star) / cv1.se_star),
    ])
}

fn mse_row(p: &Point) -> Result<Vec<Cell>> {
    let (m, k, tau) = (p.int("M"), p.int("K"), p.int("tau"));
    let rho_p = p.real("rho_p");
    let q = estimate_quality(&make_dft_pilots(tau, k)?, rho_p, m)?;
    Ok(vec![
        Cell::Int(tau as i64),
        Cell::Real(rho_p),
        Cell::Real(linear_to_db(rho_p)),
        Cell::Int(m as i64),
        Cell::Int(k as i64),
        Cell::Real(q.eta_sq),
        Cell::Real(q.mse),
        Cell::Real(q.sigma_sq),
    ])
}

fn moments_rows(p: &Point, trials: usize, seed: u64) -> Result<Vec<Vec<Cell>>> {
    let (m, k, tau) = (p.int("M"), p.int("K"), p.int("tau"));
    let (rho_p, rho_d) = (p.real("rho_p"), p.real("rho_d"));
    // T only bounds tau here; the moments do not depend on it
    let cfg = SystemConfig::new(m, k, tau, tau, rho_p, rho_d, seed)?;
    let report = appendix_moments_mc(&cfg, trials)?;
    Ok(report
        .moments
        .iter()
        .map(|mc| {
            vec![
                Cell::Int(m as i64),
                Cell::Int(k as i64),
                Cell::Int(tau as i64),
                Cell::Real(rho_p),
                Cell::Real(rho_d),
                Cell::Int(trials as i64),
                Cell::Real(report.eta_sq),
                Cell::Text(mc.name.clone()),
                Cell::Real(mc.simulated),
                Cell::Real(mc.std_err),
                Cell::Real(mc.predicted),
                Cell::Real(mc.rel_err()),
            ]
        })
        .collect())
}

/// Evaluates every grid point of `spec`, in row order.
pub fn build_table(spec: &ExperimentSpec) -> Result<Table> {
    spec.validate()?;
    let points = spec.points();
    let seeds: Vec<u64> = (0..points.len() as u64).map(|i| point_seed(spec.seed, i)).collect();
    let trials = spec.trials;

    let (head, rows): (Vec<String>, Vec<Vec<Cell>>) = match spec.kind {
        ExperimentKind::RateValidation => (
            header(&[
                "snr_db", "M", "K", "T", "tau", "trials", "eta_sq", "se_mc", "se_mc_stderr", "se_closed", "se_low",
                "rel_gap",
            ]),
            points
                .par_iter()
                .zip(seeds.par_iter())
                .map(|(p, &s)| rate_validation_row(p, trials, s))
                .collect::<Result<_>>()?,
        ),
        ExperimentKind::SeVsT | ExperimentKind::OptTauVsPower | ExperimentKind::OptTauVsT => (
            header(&[
                "T",
                "rho_db",
                "rho",
                "M",
                "K",
                "onebit_case1_tau",
                "onebit_case1_gamma",
                "onebit_case1_se",
                "onebit_case2_tau",
                "onebit_case2_se",
                "conv_case1_tau",
                "conv_case1_gamma",
                "conv_case1_se",
                "conv_case2_tau",
                "conv_case2_se",
                "onebit_power_gap",
                "conv_power_gap",
            ]),
            points.par_iter().map(optimization_row).collect::<Result<_>>()?,
        ),
        ExperimentKind::MseSweep => (
            header(&["tau", "rho_p", "rho_p_db", "M", "K", "eta_sq", "mse", "sigma_sq"]),
            points.par_iter().map(mse_row).collect::<Result<_>>()?,
        ),
        ExperimentKind::MomentsCheck => {
            let nested: Vec<Vec<Vec<Cell>>> = points
                .par_iter()
                .zip(seeds.par_iter())
                .map(|(p, &s)| moments_rows(p, trials, s))
                .collect::<Result<_>>()?;
            (
                header(&[
                    "M", "K", "tau", "rho_p", "rho_d", "trials", "eta_sq", "moment", "simulated", "std_err",
                    "predicted", "rel_err",
                ]),
                nested.into_iter().flatten().collect(),
            )
        }
    };
    Ok(Table { header: head, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub library_version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    pub params: Vec<SweepAxis>,
    pub sweep: Vec<String>,
    pub rows: usize,
    pub output: PathBuf,
    pub wall_time_s: f64,
}

/// Where the CSV goes: explicit path, then the spec's `output`, then the
/// directory in [`OUT_DIR_ENV`], then the working directory.
pub fn resolve_output_path(spec: &ExperimentSpec, override_path: Option<&Path>) -> PathBuf {
    if let Some(p) = override_path {
        return p.to_path_buf();
    }
    if let Some(p) = &spec.output_path {
        return p.clone();
    }
    let file = format!("{}.csv", spec.kind.name());
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(file),
        _ => PathBuf::from(file),
    }
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Runs the recipe and writes the CSV and its JSON manifest.
pub fn run_experiment(spec: &ExperimentSpec, output: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let table = build_table(spec)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(output)?.write_all(table.to_csv().as_bytes())?;
    let manifest = RunManifest {
        library_version: crate::VERSION.to_string(),
        kind: spec.kind,
        seed: spec.seed,
        trials: spec.trials,
        params: spec.params.clone(),
        sweep: spec.sweep().iter().map(|a| a.name.clone()).collect(),
        rows: table.rows.len(),
        output: output.to_path_buf(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    fs::write(manifest_path(output), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}
