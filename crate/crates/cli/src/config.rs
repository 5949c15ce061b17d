//! Run configuration: built-in defaults, then an optional key/value file,
//! then command-line flags, each overriding the previous layer.
//!
//! The file holds one `key = value` pair per line; blank lines and anything
//! after `#` are ignored. Recognized keys:
//!
//! | key           | meaning                                          |
//! |---------------|--------------------------------------------------|
//! | `gap_tol`     | solver duality-gap tolerance                     |
//! | `feas_tol`    | solver feasibility tolerance                     |
//! | `max_iter`    | solver iteration cap                             |
//! | `output`      | artifact path (standard output when absent)      |
//! | `format`      | `json` or `csv`                                  |
//! | `tol`         | tolerance of the certificate grid checks         |
//! | `grid_points` | points per grid in the certificate checks        |

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use packbound_core::sdp::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => bail!("unknown format `{other}` (expected json or csv)"),
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverSettings,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Tolerance of the post-solve and certificate grid checks.
    pub tol: f64,
    /// `None` keeps each check's own default density.
    pub grid_points: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { solver: SolverSettings::default(), output: None, format: Format::Json, tol: 1e-6, grid_points: None }
    }
}

/// Values given explicitly on the command line or in a file; `None` means
/// "not set at this layer".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub grid_points: Option<usize>,
}

impl Overrides {
    /// Parses the key/value format described in the module documentation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = k + 1;
            let (key, value) = line.split_once('=').with_context(|| format!("line {lineno}: expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("line {lineno}: invalid value `{value}` for `{key}`");
            match key {
                "gap_tol" => o.gap_tol = Some(value.parse().with_context(bad)?),
                "feas_tol" => o.feas_tol = Some(value.parse().with_context(bad)?),
                "max_iter" => o.max_iter = Some(value.parse().with_context(bad)?),
                "output" => o.output = Some(PathBuf::from(value)),
                "format" => o.format = Some(value.parse().with_context(bad)?),
                "tol" => o.tol = Some(value.parse().with_context(bad)?),
                "grid_points" => o.grid_points = Some(value.parse().with_context(bad)?),
                other => bail!("line {lineno}: unknown key `{other}`"),
            }
        }
        Ok(o)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config file `{}`", path.display()))?;
        Self::parse(&text).with_context(|| format!("config file `{}`", path.display()))
    }

    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = self.gap_tol {
            c.solver.gap_tol = v;
        }
        if let Some(v) = self.feas_tol {
            c.solver.feas_tol = v;
        }
        if let Some(v) = self.max_iter {
            c.solver.max_iter = v;
        }
        if let Some(v) = &self.output {
            c.output = Some(v.clone());
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.grid_points {
            c.grid_points = Some(v);
        }
    }
}

impl RunConfig {
    /// Defaults, overridden by `file`, overridden by `flags`; then validated.
    pub fn resolve(file: Option<&Overrides>, flags: &Overrides) -> Result<Self> {
        let mut c = RunConfig::default();
        if let Some(f) = file {
            f.apply(&mut c);
        }
        flags.apply(&mut c);
        c.solver.validate()?;
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            bail!("tol must be positive and finite, got {}", c.tol);
        }
        if c.grid_points.is_some_and(|p| p < 2) {
            bail!("grid_points must be at least 2");
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_override_in_order() {
        let file = Overrides::parse("# run settings\ngap_tol = 1e-6\nmax_iter=50\nformat = csv # trailing\n\n").unwrap();
        let flags = Overrides { max_iter: Some(80), ..Overrides::default() };
        let c = RunConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!(c.solver.gap_tol, 1e-6);
        assert_eq!(c.solver.max_iter, 80);
        assert_eq!(c.solver.feas_tol, SolverSettings::default().feas_tol);
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn rejects_bad_files_and_values() {
        assert!(Overrides::parse("gap_tol 1e-6").is_err());
        assert!(Overrides::parse("colour = blue").is_err());
        assert!(Overrides::parse("max_iter = many").is_err());
        let zero = Overrides { max_iter: Some(0), ..Overrides::default() };
        assert!(RunConfig::resolve(None, &zero).is_err());
        let negative = Overrides { tol: Some(-1.0), ..Overrides::default() };
        assert!(RunConfig::resolve(None, &negative).is_err());
    }
}
