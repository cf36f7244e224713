//! Flags, the flat `key = value` config file, and their merge into a
//! validated [`RunConfig`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dirac2b_core::assembly::check_size;
use dirac2b_core::suites::Suite;
use dirac2b_core::{admissible, GridSpec};

use crate::CliError;

pub const DEFAULT_OUT: &str = "./dirac2b-report.json";

#[derive(Debug, Parser)]
#[command(name = "dirac2b", version, about = "Two-body Dirac-Coulomb numerics: constants, kernels, spectra, verification suites")]
pub struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Report path.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    /// `json` or `csv`.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Herbst constants and coupling thresholds.
    Constants {
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<String>,
    },
    /// Truncated-kernel vs multiplier errors for the six kernels `K_ij`.
    Kernels {
        #[arg(long)]
        n: Option<String>,
        #[arg(long = "box", value_name = "L")]
        box_len: Option<String>,
        /// Comma list of radii, absolute or as multiples of `h` (`4h,2h,h`).
        #[arg(long)]
        eps_list: Option<String>,
        /// Width of the Gaussian test field.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Dense spectrum of the factorized relative operator.
    Spectrum {
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<String>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long = "box", value_name = "L")]
        box_len: Option<String>,
        /// Total momentum `x,y,z`; switches to the fiber operator.
        #[arg(long, allow_negative_numbers = true)]
        pvec: Option<String>,
        #[arg(long)]
        m1: Option<String>,
        #[arg(long)]
        m2: Option<String>,
        /// Write the eigenvector closest to zero as `<stem>.bin` + `<stem>.json`.
        #[arg(long, value_name = "STEM")]
        snapshot: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        /// clifford, symbols, kernels, schur, counterexamples or all.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Nullspace, antisymmetric-gap and triangle-inequality checks.
    Counterexample {
        /// nullspace, okaji, triangle or all.
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Constants,
    Kernels,
    Spectrum,
    Verify,
    Counterexample,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Constants => "constants",
            CommandKind::Kernels => "kernels",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Verify => "verify",
            CommandKind::Counterexample => "counterexample",
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            CommandKind::Constants => &["kappa", "gamma"],
            CommandKind::Kernels => &["n", "box", "eps-list", "sigma"],
            CommandKind::Spectrum => &["gamma", "kappa", "n", "box", "pvec", "m1", "m2", "snapshot"],
            CommandKind::Verify => &["suite", "seed"],
            CommandKind::Counterexample => &["which", "seed"],
        }
    }
}

const COMMON_KEYS: [&str; 2] = ["out", "format"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Nullspace,
    Okaji,
    Triangle,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which: Option<Which>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pvec: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
    pub out: String,
    pub format: Format,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `key = value` lines; `#` starts a comment. Keys are normalized to
/// the flag spelling (`eps_list` and `eps-list` are the same key).
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key `{key}`", no + 1)));
        }
    }
    Ok(map)
}

impl Cli {
    fn flags(&self) -> (CommandKind, Vec<(&'static str, Option<String>)>) {
        use CommandKind as K;
        let (kind, mut v) = match &self.command {
            Cmd::Constants { kappa, gamma } => (K::Constants, vec![("kappa", kappa.clone()), ("gamma", gamma.clone())]),
            Cmd::Kernels { n, box_len, eps_list, sigma } => (
                K::Kernels,
                vec![("n", n.clone()), ("box", box_len.clone()), ("eps-list", eps_list.clone()), ("sigma", sigma.clone())],
            ),
            Cmd::Spectrum { gamma, kappa, n, box_len, pvec, m1, m2, snapshot } => (
                K::Spectrum,
                vec![
                    ("gamma", gamma.clone()),
                    ("kappa", kappa.clone()),
                    ("n", n.clone()),
                    ("box", box_len.clone()),
                    ("pvec", pvec.clone()),
                    ("m1", m1.clone()),
                    ("m2", m2.clone()),
                    ("snapshot", snapshot.clone()),
                ],
            ),
            Cmd::Verify { suite, seed } => (K::Verify, vec![("suite", suite.clone()), ("seed", seed.clone())]),
            Cmd::Counterexample { which, seed } => (K::Counterexample, vec![("which", which.clone()), ("seed", seed.clone())]),
        };
        v.push(("out", self.out.clone()));
        v.push(("format", self.format.clone()));
        (kind, v)
    }
}

fn real(key: &str, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| usage(format!("--{key}: expected a finite number, got `{s}`")))
}

fn unsigned(key: &str, s: &str) -> Result<u64, CliError> {
    s.trim().parse::<u64>().map_err(|_| usage(format!("--{key}: expected an unsigned integer, got `{s}`")))
}

fn triple(key: &str, s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--{key}: expected x,y,z, got `{s}`")));
    }
    Ok([real(key, parts[0])?, real(key, parts[1])?, real(key, parts[2])?])
}

/// `4h,2h,h,0.5` with `h` the grid spacing.
pub fn parse_eps_list(s: &str, h: f64) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim) {
        let v = match tok.strip_suffix('h') {
            Some("") => h,
            Some(m) => real("eps-list", m)? * h,
            None => real("eps-list", tok)?,
        };
        if v < h * (1.0 - 1e-12) {
            return Err(usage(format!("--eps-list: radius {v} is below the grid spacing h = {h}")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(usage("--eps-list is empty"));
    }
    Ok(out)
}

fn kappa_of(map: &BTreeMap<&str, String>) -> Result<f64, CliError> {
    let k = map.get("kappa").map(|s| real("kappa", s)).transpose()?.unwrap_or(1.0);
    if !(k > 0.0 && k <= 1.0) {
        return Err(usage(format!("--kappa {k}: must lie in (0, 1]")));
    }
    Ok(k)
}

fn grid_of(map: &BTreeMap<&str, String>, n: usize, box_len: f64) -> Result<GridSpec, CliError> {
    let n = map.get("n").map(|s| unsigned("n", s)).transpose()?.map_or(n, |v| v as usize);
    let l = map.get("box").map(|s| real("box", s)).transpose()?.unwrap_or(box_len);
    GridSpec::new(n, l).map_err(|e| usage(e.to_string()))
}

/// Merges flags over the config file and validates the result.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (kind, flags) = cli.flags();
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("--config {}: {e}", p.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut map: BTreeMap<&str, String> = BTreeMap::new();
    for (key, value) in file {
        let known = kind.keys().iter().chain(COMMON_KEYS.iter()).find(|k| **k == key);
        match known {
            Some(k) => {
                map.insert(k, value);
            }
            None => return Err(usage(format!("config key `{key}` is not recognized for `{}`", kind.name()))),
        }
    }
    for (key, value) in flags {
        if let Some(v) = value {
            map.insert(key, v);
        }
    }
    resolve(kind, &map)
}

fn resolve(kind: CommandKind, map: &BTreeMap<&str, String>) -> Result<RunConfig, CliError> {
    let format = match map.get("format").map(String::as_str) {
        None | Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some(other) => return Err(usage(format!("--format: expected json or csv, got `{other}`"))),
    };
    let mut cfg = RunConfig {
        command: kind,
        grid: None,
        gamma: None,
        kappa: None,
        seed: None,
        suite: None,
        which: None,
        eps: None,
        sigma: None,
        pvec: None,
        m1: None,
        m2: None,
        snapshot: None,
        out: map.get("out").cloned().unwrap_or_else(|| DEFAULT_OUT.to_string()),
        format,
    };
    let seed = || map.get("seed").map(|s| unsigned("seed", s)).transpose().map(|s| s.unwrap_or(7));
    match kind {
        CommandKind::Constants => {
            cfg.kappa = Some(kappa_of(map)?);
            cfg.gamma = map.get("gamma").map(|s| real("gamma", s)).transpose()?;
        }
        CommandKind::Kernels => {
            let grid = grid_of(map, 64, 16.0)?;
            let eps = parse_eps_list(map.get("eps-list").map_or("4h,2h,h", String::as_str), grid.h())?;
            if let Some(bad) = eps.iter().find(|e| **e >= grid.box_len() / 2.0) {
                return Err(usage(format!("--eps-list: radius {bad} must stay below half the box")));
            }
            let sigma = map.get("sigma").map(|s| real("sigma", s)).transpose()?.unwrap_or(1.0);
            if sigma <= 0.0 {
                return Err(usage("--sigma must be positive"));
            }
            cfg.grid = Some(grid);
            cfg.eps = Some(eps);
            cfg.sigma = Some(sigma);
        }
        CommandKind::Spectrum => {
            let grid = grid_of(map, 4, 8.0)?;
            check_size(&grid).map_err(|e| usage(e.to_string()))?;
            let kappa = kappa_of(map)?;
            let gamma = map.get("gamma").map(|s| real("gamma", s)).transpose()?.unwrap_or(0.5);
            let (ok, report) = admissible(gamma, kappa).map_err(|e| usage(e.to_string()))?;
            if !ok {
                return Err(usage(format!(
                    "--gamma {gamma} is not admissible for kappa = {kappa}: need |gamma| < 1/M_(kappa/2)^2 = {:.6} \
                     (the threshold is 2/pi = {:.6} at kappa = 1)",
                    report.gamma_threshold,
                    2.0 / std::f64::consts::PI
                )));
            }
            cfg.grid = Some(grid);
            cfg.gamma = Some(gamma);
            cfg.kappa = Some(kappa);
            cfg.pvec = map.get("pvec").map(|s| triple("pvec", s)).transpose()?;
            for key in ["m1", "m2"] {
                let m = map.get(key).map(|s| real(key, s)).transpose()?;
                if m.is_some_and(|m| m < 0.0) {
                    return Err(usage(format!("--{key} must be non-negative")));
                }
                if m.is_some() && cfg.pvec.is_none() {
                    return Err(usage(format!("--{key} only applies together with --pvec")));
                }
                let m = m.or(cfg.pvec.map(|_| 0.0));
                if key == "m1" {
                    cfg.m1 = m;
                } else {
                    cfg.m2 = m;
                }
            }
            cfg.snapshot = map.get("snapshot").cloned();
        }
        CommandKind::Verify => {
            let suite = map.get("suite").map_or("all", String::as_str);
            cfg.suite = Some(suite.parse::<Suite>().map_err(|e| usage(format!("--suite: {e}")))?);
            cfg.seed = Some(seed()?);
        }
        CommandKind::Counterexample => {
            cfg.which = Some(match map.get("which").map_or("all", String::as_str) {
                "nullspace" => Which::Nullspace,
                "okaji" => Which::Okaji,
                "triangle" => Which::Triangle,
                "all" => Which::All,
                other => return Err(usage(format!("--which: expected nullspace, okaji, triangle or all, got `{other}`"))),
            });
            cfg.seed = Some(seed()?);
        }
    }
    Ok(cfg)
}
