//! Validated experiment configurations and the report files they produce.
//!
//! Every file starts with a header naming the crate version and the full
//! configuration. Nothing time- or host-dependent is written, so equal
//! configurations give byte-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hecke::weyl_sum;
use crate::ideals::cache::{write_ideals_csv, CacheKey};
use crate::ideals::enumerate_prime_ideals;
use crate::realquad::{equidistribution_report_real, real_prime_ideals, write_ideals_csv as write_real_csv, Solver};
use crate::report::fmt_float;
use crate::sectors::{discrepancy, forbidden_region_check, sector_scan, ExpectedMode, ScanOptions};
use crate::smoothed::{variance_sweep, SweepOptions, Variant};
use crate::window::SmoothWindow;

pub const GENERATOR: &str = concat!("gaussian-sectors ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// CSV data table plus a JSON summary.
    #[default]
    Csv,
    /// One JSON document with summary and data.
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Experiment {
    Sieve { norm_min: u64, norm_max: u64 },
    Sectors { x: f64, rho: f64, grid_size: usize, deltas: Vec<f64>, mode: ExpectedMode, include_nonsplit: bool },
    Variance { xs: Vec<f64>, taus: Vec<f64>, eps: f64, grid_factor: usize, variant: Variant },
    Weyl { x: f64, k_max: u32 },
    Realquad { limit: u64, k_max: u32, solver: Solver },
    Forbidden { norm_max: u64 },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sieve { .. } => "sieve",
            Experiment::Sectors { .. } => "sectors",
            Experiment::Variance { .. } => "variance",
            Experiment::Weyl { .. } => "weyl",
            Experiment::Realquad { .. } => "realquad",
            Experiment::Forbidden { .. } => "forbidden",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Output path without extension; `.csv` / `.json` are appended.
    pub output: PathBuf,
    pub format: Format,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadInput(msg.into())
}

fn finite_at_least(name: &str, v: f64, min: f64) -> Result<()> {
    if !(v.is_finite() && v >= min) {
        return Err(bad(format!("{name} = {v} must be a finite number >= {min}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Checks every parameter against the preconditions of the dispatched operation.
    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::Sieve { norm_min, norm_max } => {
                if norm_min > norm_max {
                    return Err(bad(format!("norm range ({norm_min}, {norm_max}] is reversed")));
                }
            }
            Experiment::Sectors { x, rho, grid_size, deltas, mode, .. } => {
                finite_at_least("x", *x, 2.0)?;
                if !(0.0..1.0).contains(rho) {
                    return Err(bad(format!("rho = {rho} outside [0, 1)")));
                }
                if *grid_size == 0 {
                    return Err(bad("grid size must be positive"));
                }
                if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
                    return Err(bad(format!("delta = {d} must be a nonnegative number")));
                }
                if *mode == ExpectedMode::Pit && *x < 2.0 {
                    return Err(bad("pit mode needs x >= 2"));
                }
            }
            Experiment::Variance { xs, taus, eps, grid_factor, .. } => {
                if xs.is_empty() || taus.is_empty() {
                    return Err(bad("need at least one x and one tau"));
                }
                for &x in xs {
                    finite_at_least("x", x, 2.0)?;
                }
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad("x values must be strictly ascending"));
                }
                if let Some(t) = taus.iter().find(|t| !(0.0..1.0).contains(*t)) {
                    return Err(bad(format!("tau = {t} outside [0, 1)")));
                }
                if !(*eps > 0.0 && *eps < 0.5) {
                    return Err(Error::BadEps(*eps));
                }
                if *grid_factor < 4 {
                    return Err(bad(format!("grid factor {grid_factor} is below 4")));
                }
            }
            Experiment::Weyl { x, k_max } => {
                finite_at_least("x", *x, 2.0)?;
                if *k_max == 0 {
                    return Err(bad("kmax must be at least 1"));
                }
            }
            Experiment::Realquad { limit, .. } => {
                if *limit < 17 {
                    return Err(bad(format!("limit {limit} is below 17")));
                }
            }
            Experiment::Forbidden { norm_max } => {
                if *norm_max < 2 {
                    return Err(bad(format!("norm_max = {norm_max} must be at least 2")));
                }
            }
        }
        Ok(())
    }

    fn path(&self, ext: &str) -> PathBuf {
        let mut s = self.output.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    }

    fn config_json(&self) -> Value {
        serde_json::to_value(&self.experiment).expect("config serializes")
    }

    fn csv_header(&self) -> String {
        format!("# {GENERATOR}\n# config={}\n", self.config_json())
    }
}

fn open(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Output files: a CSV table (csv format only) and a JSON document.
struct Emitted {
    csv: Option<String>,
    summary: Value,
    rows: Value,
}

/// Runs a validated configuration and returns the paths written.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let emitted = compute(config)?;
    let mut written = Vec::new();
    let mut doc = json!({
        "generator": GENERATOR,
        "config": config.config_json(),
        "summary": emitted.summary,
    });
    match config.format {
        Format::Csv => {
            if let Some(csv) = emitted.csv {
                let path = config.path("csv");
                let mut w = open(&path)?;
                w.write_all(config.csv_header().as_bytes())?;
                w.write_all(csv.as_bytes())?;
                w.flush()?;
                written.push(path);
            }
        }
        Format::Json => {
            doc["rows"] = emitted.rows;
        }
    }
    let path = config.path("json");
    write_json(&path, &doc)?;
    written.push(path);
    Ok(written)
}

fn compute(config: &ExperimentConfig) -> Result<Emitted> {
    match &config.experiment {
        Experiment::Sieve { norm_min, norm_max } => {
            let ideals = enumerate_prime_ideals::<f64>(*norm_min, *norm_max);
            let mut buf = Vec::new();
            write_ideals_csv(&mut buf, CacheKey::new(*norm_min, *norm_max), &ideals)?;
            Ok(Emitted {
                csv: Some(String::from_utf8(buf).expect("utf-8")),
                summary: json!({ "norm_min": norm_min, "norm_max": norm_max, "count": ideals.len() }),
                rows: serde_json::to_value(&ideals).expect("ideals serialize"),
            })
        }
        Experiment::Sectors { x, rho, grid_size, deltas, mode, include_nonsplit } => {
            let opts = ScanOptions { mode: *mode, include_nonsplit: *include_nonsplit };
            let r = sector_scan(*x, *rho, *grid_size, deltas, opts)?;
            let mut csv = String::from("beta,count,expected,deviation\n");
            for (j, (&c, &d)) in r.counts.iter().zip(&r.deviations).enumerate() {
                csv += &format!("{},{c},{},{}\n", fmt_float(r.beta(j)), fmt_float(r.expected), fmt_float(d));
            }
            let rows: Vec<Value> = (0..r.grid_size)
                .map(|j| json!({ "beta": r.beta(j), "count": r.counts[j], "deviation": r.deviations[j] }))
                .collect();
            Ok(Emitted {
                csv: Some(csv),
                summary: json!({
                    "x": r.x,
                    "rho": r.rho,
                    "gamma": r.gamma,
                    "grid_size": r.grid_size,
                    "norm_min": r.norm_min,
                    "norm_max": r.norm_max,
                    "total": r.total,
                    "expected": r.expected,
                    "mode": r.mode,
                    "include_nonsplit": r.include_nonsplit,
                    "exceptional_fraction": r.exceptional_fraction
                        .iter()
                        .map(|(d, f)| json!({ "delta": d, "fraction": f }))
                        .collect::<Vec<_>>(),
                }),
                rows: Value::Array(rows),
            })
        }
        Experiment::Variance { xs, taus, eps, grid_factor, variant } => {
            let f = SmoothWindow::<f64>::mollifier();
            let phi = SmoothWindow::<f64>::norm_plus(*eps)?;
            let opts = SweepOptions { grid_factor: *grid_factor, variant: *variant };
            let reports = variance_sweep(taus, xs, &f, &phi, opts)?;
            // ratio matrix: one row per X, one column per tau
            let mut csv = String::from("x");
            for t in taus {
                csv += &format!(",tau_{}", fmt_float(*t));
            }
            csv.push('\n');
            for (i, x) in xs.iter().enumerate() {
                csv += &fmt_float(*x);
                for j in 0..taus.len() {
                    csv += &format!(",{}", fmt_float(reports[j * xs.len() + i].ratio));
                }
                csv.push('\n');
            }
            let cells = serde_json::to_value(&reports).expect("reports serialize");
            Ok(Emitted { csv: Some(csv), summary: json!({ "reports": cells }), rows: Value::Array(Vec::new()) })
        }
        Experiment::Weyl { x, k_max } => {
            let (lo, hi) = (x.floor() as u64, (2.0 * x).floor() as u64);
            let count = enumerate_prime_ideals::<f64>(lo, hi).len();
            let n = count.max(1) as f64;
            let sums = (1..=*k_max as i64).map(|k| weyl_sum::<f64>(k, lo, hi)).collect::<Result<Vec<_>>>()?;
            let d = discrepancy::<f64>(lo, hi)?;
            let mut csv = String::from("k,re,im,normalized_abs\n");
            let mut rows = Vec::new();
            for (k, z) in sums.iter().enumerate() {
                let k = k + 1;
                csv += &format!("{k},{},{},{}\n", fmt_float(z.re), fmt_float(z.im), fmt_float(z.norm() / n));
                rows.push(json!({ "k": k, "re": z.re, "im": z.im, "normalized_abs": z.norm() / n }));
            }
            Ok(Emitted {
                csv: Some(csv),
                summary: json!({ "norm_min": lo, "norm_max": hi, "count": count, "star_discrepancy": d }),
                rows: Value::Array(rows),
            })
        }
        Experiment::Realquad { limit, k_max, solver } => {
            let ideals = real_prime_ideals::<f64>(*limit, *solver)?;
            if let Some(bad_ideal) = ideals.iter().find(|i| !i.verify()) {
                return Err(bad(format!("norm check failed for {bad_ideal:?}")));
            }
            let report = equidistribution_report_real::<f64>(*limit, *k_max, *solver)?;
            let mut buf = Vec::new();
            write_real_csv(&mut buf, &ideals)?;
            Ok(Emitted {
                csv: Some(String::from_utf8(buf).expect("utf-8")),
                summary: serde_json::to_value(&report).expect("report serializes"),
                rows: serde_json::to_value(&ideals).expect("ideals serialize"),
            })
        }
        Experiment::Forbidden { norm_max } => {
            let r = forbidden_region_check::<f64>(*norm_max)?;
            Ok(Emitted {
                csv: None,
                summary: serde_json::to_value(&r).expect("report serializes"),
                rows: Value::Array(Vec::new()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(experiment: Experiment, dir: &Path, format: Format) -> ExperimentConfig {
        ExperimentConfig { experiment, output: dir.join("out"), format }
    }

    #[test]
    fn validation_rejects_out_of_range_parameters() {
        let dir = Path::new("unused");
        let bad_rho = Experiment::Sectors {
            x: 1e4,
            rho: 1.5,
            grid_size: 8,
            deltas: vec![0.5],
            mode: ExpectedMode::Empirical,
            include_nonsplit: true,
        };
        assert!(matches!(config(bad_rho, dir, Format::Csv).validate(), Err(Error::BadInput(_))));
        let bad_eps =
            Experiment::Variance { xs: vec![1e4], taus: vec![0.4], eps: 0.7, grid_factor: 4, variant: Variant::Powers };
        assert_eq!(config(bad_eps, dir, Format::Csv).validate(), Err(Error::BadEps(0.7)));
        let bad_grid = Experiment::Variance {
            xs: vec![1e4],
            taus: vec![0.4],
            eps: 0.05,
            grid_factor: 2,
            variant: Variant::Powers,
        };
        assert!(config(bad_grid, dir, Format::Csv).validate().is_err());
        let reversed = Experiment::Sieve { norm_min: 10, norm_max: 5 };
        assert!(config(reversed, dir, Format::Csv).validate().is_err());
    }

    #[test]
    fn sieve_csv_matches_cache_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(Experiment::Sieve { norm_min: 1, norm_max: 10 }, dir.path(), Format::Csv);
        let paths = run(&cfg).unwrap();
        assert_eq!(paths.len(), 2);
        let text = fs::read_to_string(&paths[0]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(format!("# {GENERATOR}").as_str()));
        assert!(lines.next().unwrap().starts_with("# config={\"command\":\"sieve\""));
        assert_eq!(lines.filter(|l| !l.starts_with('#')).count(), 1 + 4);
    }

    #[test]
    fn forbidden_writes_json_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(Experiment::Forbidden { norm_max: 1000 }, dir.path(), Format::Csv);
        let paths = run(&cfg).unwrap();
        assert_eq!(paths, vec![dir.path().join("out.json")]);
        let v: Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(v["summary"]["holds"], Value::Bool(true));
        assert_eq!(v["generator"], GENERATOR);
    }

    #[test]
    fn json_format_embeds_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(Experiment::Weyl { x: 1000.0, k_max: 3 }, dir.path(), Format::Json);
        let paths = run(&cfg).unwrap();
        assert_eq!(paths.len(), 1);
        let v: Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig {
            experiment: Experiment::Realquad { limit: 1000, k_max: 3, solver: Solver::Fast },
            output: PathBuf::from("x/y"),
            format: Format::Json,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }
}
