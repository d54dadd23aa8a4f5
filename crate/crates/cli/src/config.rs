use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "darboux", version, about = "Solvers for the Euler-Darboux equation with |α| = |β| = 1/2")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SolveCauchy,
    SolveDelta1s,
    Verify,
    Limits,
    QuadSelftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SolveCauchy => "solve-cauchy",
            Command::SolveDelta1s => "solve-delta1s",
            Command::Verify => "verify",
            Command::Limits => "limits",
            Command::QuadSelftest => "quad-selftest",
        }
    }
}

/// Every setting, as a flag or as a key of the `--config` file. Flags win.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// TOML file with any of the keys below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// c1, c2, c2-alt or c3
    #[arg(long)]
    pub case: Option<String>,
    /// diagonal trace τ(x)
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// diagonal trace ν(x)
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// boundary data U(0, y) = φ1(y), written in x
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: Option<String>,
    /// displaced boundary data φ2(x)
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<String>,
    /// field U(x, y) for `limits`
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
    /// exact solution U(x, y) to compare against in `verify`
    #[arg(long, allow_hyphen_values = true)]
    pub exact: Option<String>,

    /// domain end X
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x_end: Option<f64>,
    /// grid steps on [0, X]
    #[arg(long)]
    pub n: Option<usize>,
    /// quadrature nodes
    #[arg(long)]
    pub nodes: Option<usize>,
    /// first level of the finite-difference march
    #[arg(long)]
    pub eps: Option<f64>,
    /// largest ladder offset of the limit probe
    #[arg(long)]
    pub s0: Option<f64>,
    /// ladder levels of the limit probe
    #[arg(long)]
    pub levels: Option<usize>,
    /// admissible ladder fit residual
    #[arg(long)]
    pub limit_tol: Option<f64>,
    /// diagonal points for `limits`, comma separated
    #[arg(long)]
    pub points: Option<String>,

    /// tolerance on PDE, boundary and march residuals
    #[arg(long)]
    pub tol: Option<f64>,
    /// tolerance on recovered traces and conjugation defects
    #[arg(long)]
    pub trace_tol: Option<f64>,
    /// smallest acceptable error ratio under grid halving in `verify`
    #[arg(long)]
    pub min_ratio: Option<f64>,

    /// accept boundary data violating φ(0) = 0, φ ∈ C³
    #[arg(long = "override", num_args = 0, default_missing_value = "true")]
    #[serde(rename = "override")]
    pub override_data: Option<bool>,
    /// trace values at the origin for `solve-delta1s`
    #[arg(long, allow_hyphen_values = true)]
    pub start_tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_nu: Option<f64>,
    /// first nonzero node of a shifted trace grid {0} ∪ [start, X]
    #[arg(long)]
    pub grid_start: Option<f64>,

    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// file name prefix, defaults to the command name
    #[arg(long)]
    pub prefix: Option<String>,
    /// also write a plot script next to the CSV
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub plot: Option<bool>,
    /// record the wall-clock time in the report
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub timestamp: Option<bool>,
}

macro_rules! merge {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Opts { config: $a.config, $($f: $a.$f.or($b.$f)),* }
    };
}

impl Opts {
    /// Fills unset flags from the config file, if any.
    pub fn resolve(self) -> Result<Opts, String> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let file = load(&path)?;
        let me = self;
        Ok(merge!(
            me, file, case, tau, nu, phi1, phi2, field, exact, x_end, n, nodes, eps, s0, levels, limit_tol, points,
            tol, trace_tol, min_ratio, override_data, start_tau, start_nu, grid_start, out, prefix, plot, timestamp
        ))
    }

    /// `key = value` lines for every setting that is set.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut put = |k: &str, s: Option<String>| {
            if let Some(s) = s {
                v.push((format!("config.{k}"), s));
            }
        };
        let num = |x: Option<f64>| x.map(|x| format!("{x:e}"));
        put("case", self.case.clone());
        put("tau", self.tau.clone());
        put("nu", self.nu.clone());
        put("phi1", self.phi1.clone());
        put("phi2", self.phi2.clone());
        put("field", self.field.clone());
        put("exact", self.exact.clone());
        put("X", num(self.x_end));
        put("n", self.n.map(|n| n.to_string()));
        put("nodes", self.nodes.map(|n| n.to_string()));
        put("eps", num(self.eps));
        put("s0", num(self.s0));
        put("levels", self.levels.map(|n| n.to_string()));
        put("limit-tol", num(self.limit_tol));
        put("points", self.points.clone());
        put("tol", num(self.tol));
        put("trace-tol", num(self.trace_tol));
        put("min-ratio", num(self.min_ratio));
        put("override", self.override_data.map(|b| b.to_string()));
        put("start-tau", num(self.start_tau));
        put("start-nu", num(self.start_nu));
        put("grid-start", num(self.grid_start));
        v
    }
}

fn load(path: &Path) -> Result<Opts, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}
