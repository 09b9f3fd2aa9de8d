//! CSV cache of enumerated prime ideals.
//!
//! Layout: two `#` header lines carrying the cache key, a column header, then
//! one row `p,a,b,norm,splitting,theta` per ideal with `theta` printed to 17
//! significant digits so it reads back bit-exactly.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numeric::{lit, Real};
use crate::report::fmt_float;

use super::{enumerate_prime_ideals, GaussianPrimeIdeal, Splitting};

pub const FORMAT_VERSION: u32 = 1;

const COLUMNS: &str = "p,a,b,norm,splitting,theta";

/// Identifies one cached enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub norm_min: u64,
    pub norm_max: u64,
    pub format_version: u32,
}

impl CacheKey {
    pub fn new(norm_min: u64, norm_max: u64) -> Self {
        Self { norm_min, norm_max, format_version: FORMAT_VERSION }
    }

    pub fn file_name(&self) -> String {
        format!("ideals_v{}_{}_{}.csv", self.format_version, self.norm_min, self.norm_max)
    }
}

pub fn write_ideals_csv<T: Real, W: Write>(out: &mut W, key: CacheKey, ideals: &[GaussianPrimeIdeal<T>]) -> Result<()> {
    writeln!(out, "# gaussian-sectors ideal cache")?;
    writeln!(out, "# format_version={} norm_min={} norm_max={}", key.format_version, key.norm_min, key.norm_max)?;
    writeln!(out, "{COLUMNS}")?;
    for id in ideals {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            id.p,
            id.a,
            id.b,
            id.norm,
            id.splitting,
            fmt_float(id.theta.to_f64().unwrap_or(f64::NAN))
        )?;
    }
    Ok(())
}

fn parse_key(line: &str) -> Result<CacheKey> {
    let mut key = CacheKey::new(0, 0);
    let body = line.trim_start_matches('#').trim();
    for field in body.split_whitespace() {
        let (name, value) =
            field.split_once('=').ok_or_else(|| Error::BadInput(format!("malformed cache header field {field:?}")))?;
        let bad = |_| Error::BadInput(format!("malformed cache header value {field:?}"));
        match name {
            "format_version" => key.format_version = value.parse().map_err(bad)?,
            "norm_min" => key.norm_min = value.parse().map_err(bad)?,
            "norm_max" => key.norm_max = value.parse().map_err(bad)?,
            _ => {}
        }
    }
    Ok(key)
}

pub fn read_ideals_csv<T: Real, R: BufRead>(input: R) -> Result<(CacheKey, Vec<GaussianPrimeIdeal<T>>)> {
    let mut lines = input.lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| Error::BadInput("truncated ideal cache".into()))?.map_err(Error::from)
    };
    let _title = next()?;
    let key = parse_key(&next()?)?;
    if next()? != COLUMNS {
        return Err(Error::BadInput("unexpected ideal cache columns".into()));
    }
    let mut ideals = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::BadInput(format!("bad cache row {line:?}")));
        }
        let bad = |what: &str| Error::BadInput(format!("bad {what} in cache row {line:?}"));
        let theta: f64 = f[5].parse().map_err(|_| bad("theta"))?;
        ideals.push(GaussianPrimeIdeal {
            p: f[0].parse().map_err(|_| bad("p"))?,
            a: f[1].parse().map_err(|_| bad("a"))?,
            b: f[2].parse().map_err(|_| bad("b"))?,
            norm: f[3].parse().map_err(|_| bad("norm"))?,
            splitting: f[4].parse::<Splitting>().map_err(|_| bad("splitting"))?,
            theta: lit(theta),
        });
    }
    Ok((key, ideals))
}

/// Directory of cached enumerations.
#[derive(Debug, Clone)]
pub struct IdealCache {
    dir: PathBuf,
}

impl IdealCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Reads the cached list for `(norm_min, norm_max]`, enumerating and
    /// storing it first when missing or stale.
    pub fn load_or_enumerate<T: Real>(&self, norm_min: u64, norm_max: u64) -> Result<Vec<GaussianPrimeIdeal<T>>> {
        let key = CacheKey::new(norm_min, norm_max);
        let path = self.path_for(key);
        if path.exists() {
            let (found, ideals) = read_ideals_csv(BufReader::new(fs::File::open(&path)?))?;
            if found == key {
                return Ok(ideals);
            }
        }
        let ideals = enumerate_prime_ideals::<T>(norm_min, norm_max);
        self.store(&path, key, &ideals)?;
        Ok(ideals)
    }

    fn store<T: Real>(&self, path: &Path, key: CacheKey, ideals: &[GaussianPrimeIdeal<T>]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_ideals_csv(&mut w, key, ideals)?;
        w.flush()?;
        Ok(())
    }
}
