//! Run configuration (TOML), time-series CSV, field snapshots, and run
//! directory naming.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{Field, Grid, GridError};
use crate::regime::{ModelParams, ParamError};
use crate::stepper::{Diagnostics, SchemeConfig, SchemeError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{key} must be {constraint}")]
    OutOfDomain {
        key: &'static str,
        constraint: &'static str,
    },
}

impl From<SchemeError> for ConfigError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Safety(_) => ConfigError::OutOfDomain {
                key: "cfl_safety",
                constraint: "in (0, 1]",
            },
            other => ConfigError::Syntax(other.to_string()),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spreading,
    Stability,
    Boundedness,
    Envelope,
}

fn one() -> f64 {
    1.0
}

fn default_safety() -> f64 {
    0.8
}

fn default_output_dt() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub chi1: f64,
    pub chi2: f64,
    #[serde(default = "one")]
    pub mu1: f64,
    #[serde(default = "one")]
    pub mu2: f64,
    #[serde(default = "one")]
    pub lam1: f64,
    #[serde(default = "one")]
    pub lam2: f64,
    pub a: f64,
    pub b: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_output_dt")]
    pub output_dt: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            cfl_safety: default_safety(),
            output_dt: default_output_dt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Kind,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub probes: Vec<f64>,
}

/// A parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    pub experiment: ExperimentSection,
}

impl Config {
    pub fn params(&self) -> ModelParams {
        let m = &self.model;
        ModelParams {
            chi1: m.chi1,
            chi2: m.chi2,
            mu1: m.mu1,
            mu2: m.mu2,
            lam1: m.lam1,
            lam2: m.lam2,
            a: m.a,
            b: m.b,
            dim: m.dim,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.model.dim, self.grid.n, self.grid.half_length).expect("validated at parse")
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            cfl_safety: self.scheme.cfl_safety,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.params().validate()?;
        if !self.grid.half_length.is_finite() {
            return Err(ConfigError::OutOfDomain {
                key: "half_length",
                constraint: "finite",
            });
        }
        Grid::new(self.model.dim, self.grid.n, self.grid.half_length)?;
        self.scheme().validate()?;
        let s = &self.scheme;
        if !(s.output_dt > 0.0 && s.output_dt.is_finite()) {
            return Err(ConfigError::OutOfDomain {
                key: "output_dt",
                constraint: "> 0",
            });
        }
        let e = &self.experiment;
        if !(e.t_end >= 0.0 && e.t_end.is_finite()) {
            return Err(ConfigError::OutOfDomain {
                key: "T",
                constraint: ">= 0",
            });
        }
        if !e.probes.iter().all(|c| *c > 0.0 && c.is_finite()) {
            return Err(ConfigError::OutOfDomain {
                key: "probes",
                constraint: "positive speeds",
            });
        }
        Ok(())
    }

    /// The configuration with every default written out; parses back to `self`.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the effective config, truncated to 16 characters.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.echo().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let c: Config =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::Syntax(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Environment variable that overrides the default output root.
pub const OUTPUT_ROOT_ENV: &str = "CHEMOSPREAD_OUTPUT_ROOT";

pub fn output_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// `<root>/<kind>-<hash>`, created if missing, with the effective config
/// written to `config.toml` inside it.
pub fn prepare_run_dir(root: &Path, cfg: &Config, label: &str) -> Result<PathBuf, IoError> {
    let dir = root.join(format!("{label}-{}", cfg.content_hash()));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join("config.toml");
    fs::write(&path, cfg.echo()).map_err(io_err(&path))?;
    Ok(dir)
}

pub const SERIES_HEADER: [&str; 7] = ["t", "sup_u", "inf_u", "front_radius", "e_u", "e_1", "e_2"];

/// 17 significant digits, so the text reads back to the same f64.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

pub fn write_series(path: &Path, rows: &[Diagnostics]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let csv_err = |e: csv::Error| format_err(path, e.to_string());
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for d in rows {
        w.write_record(
            [d.t, d.sup_u, d.inf_u, d.front_radius, d.e_u, d.e_1, d.e_2].map(format_real),
        )
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_series(path: &Path) -> Result<Vec<Diagnostics>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let header = r.headers().map_err(|e| format_err(path, e.to_string()))?;
    if header.iter().ne(SERIES_HEADER) {
        return Err(format_err(path, format!("unexpected header {:?}", header)));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(parse_real)
            .collect::<Option<_>>()
            .filter(|v: &Vec<f64>| v.len() == SERIES_HEADER.len())
            .ok_or_else(|| format_err(path, format!("bad row {}", line + 2)))?;
        rows.push(Diagnostics {
            t: vals[0],
            sup_u: vals[1],
            inf_u: vals[2],
            front_radius: vals[3],
            e_u: vals[4],
            e_1: vals[5],
            e_2: vals[6],
        });
    }
    Ok(rows)
}

const SNAPSHOT_MAGIC: &str = "# crfield v1";

/// Header line `# crfield v1 dim=<d> n=<n> X=<X> t=<t>`, then one value per
/// line in row-major order.
pub fn write_snapshot(path: &Path, field: &Field, t: f64) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let g = field.grid();
    writeln!(
        w,
        "{SNAPSHOT_MAGIC} dim={} n={} X={} t={}",
        g.dim(),
        g.n(),
        format_real(g.half_length()),
        format_real(t)
    )
    .map_err(io_err(path))?;
    for v in field.values() {
        writeln!(w, "{}", format_real(*v)).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64), IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(io_err(path))?
        .ok_or_else(|| format_err(path, "empty snapshot"))?;
    let rest = header
        .strip_prefix(SNAPSHOT_MAGIC)
        .ok_or_else(|| format_err(path, "missing snapshot header"))?;
    let mut dim = None;
    let mut n = None;
    let mut x = None;
    let mut t = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format_err(path, format!("bad header field {kv}")))?;
        match k {
            "dim" => dim = v.parse::<usize>().ok(),
            "n" => n = v.parse::<usize>().ok(),
            "X" => x = parse_real(v),
            "t" => t = parse_real(v),
            _ => return Err(format_err(path, format!("unknown header field {k}"))),
        }
    }
    let (Some(dim), Some(n), Some(x), Some(t)) = (dim, n, x, t) else {
        return Err(format_err(path, "incomplete snapshot header"));
    };
    let grid = Grid::new(dim, n, x).map_err(|e| format_err(path, e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        values.push(
            parse_real(&line)
                .ok_or_else(|| format_err(path, format!("bad value on line {}", i + 2)))?,
        );
    }
    let field = Field::from_values(grid, values).map_err(|e| format_err(path, e.to_string()))?;
    Ok((field, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FISHER: &str = r#"
[model]
chi1 = 0
chi2 = 0
a = 1
b = 1
dim = 1

[grid]
n = 4096
half_length = 200

[experiment]
kind = "spreading"
T = 80
"#;

    #[test]
    fn minimal_fisher_config() {
        let c = parse_config(FISHER).unwrap();
        assert_eq!(c.params(), ModelParams::fisher(1.0, 1.0, 1));
        assert_eq!(c.scheme, SchemeSection::default());
        assert_eq!(c.experiment.kind, Kind::Spreading);
        assert_eq!(c.experiment.t_end, 80.0);
        assert!(c.experiment.probes.is_empty());
    }

    #[test]
    fn domain_errors_name_the_key() {
        let text = FISHER.replace("b = 1", "b = 1\nlam1 = 0");
        assert_eq!(
            parse_config(&text).unwrap_err().to_string(),
            "lam1 must be > 0"
        );
        let text = FISHER.replace("chi1 = 0", "ch1 = 0");
        assert!(parse_config(&text).unwrap_err().to_string().contains("ch1"));
        let text = FISHER.replace("a = 1\n", "");
        assert!(parse_config(&text).unwrap_err().to_string().contains("`a`"));
        let text = FISHER.replace("[experiment]", "[scheme]\ncfl_safety = 1.5\n\n[experiment]");
        assert_eq!(
            parse_config(&text).unwrap_err().to_string(),
            "cfl_safety must be in (0, 1]"
        );
        let text = FISHER.replace("n = 4096", "n = 1000");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn echo_is_fixed_point() {
        let c = parse_config(FISHER).unwrap();
        let echo = c.echo();
        assert!(echo.contains("cfl_safety = 0.8"));
        assert!(echo.contains("mu1 = 1.0"));
        let again = parse_config(&echo).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.echo(), echo);
        assert_eq!(again.content_hash(), c.content_hash());
    }

    #[test]
    fn hash_tracks_content() {
        let c = parse_config(FISHER).unwrap();
        let d = parse_config(&FISHER.replace("T = 80", "T = 81")).unwrap();
        assert_ne!(c.content_hash(), d.content_hash());
        assert_eq!(c.content_hash().len(), 16);
    }

    #[test]
    fn series_roundtrip_with_nan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_series(&path, &[]).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "t,sup_u,inf_u,front_radius,e_u,e_1,e_2\n"
        );
        assert!(read_series(&path).unwrap().is_empty());

        let row = Diagnostics {
            t: 0.1,
            sup_u: 1.0 / 3.0,
            inf_u: 0.0,
            front_radius: f64::NAN,
            e_u: 1e-300,
            e_1: -2.5,
            e_2: 7.0,
        };
        write_series(&path, &[row]).unwrap();
        assert!(fs::read_to_string(&path).unwrap().contains(",nan,"));
        let back = read_series(&path).unwrap();
        assert!(back[0].front_radius.is_nan());
        assert_eq!(back[0].sup_u.to_bits(), row.sup_u.to_bits());
        assert_eq!(back[0].e_u, row.e_u);
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.txt");
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::from_fn(g, |x| (x[0] * 0.7).sin() + x[1] / 3.0);
        write_snapshot(&path, &f, 2.5).unwrap();
        let first = fs::read_to_string(&path).unwrap();
        assert!(first.starts_with("# crfield v1 dim=2 n=16 X="));
        let (back, t) = read_snapshot(&path).unwrap();
        assert_eq!(t, 2.5);
        assert_eq!(back, f);
    }

    #[test]
    fn io_errors_carry_path() {
        let e = read_series(Path::new("/nonexistent/dir/s.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/dir/s.csv"));
    }
}
