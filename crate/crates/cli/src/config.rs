//! Run configuration: a flat `key = value` file, overridden by flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use critcouple::ParamSet;
use serde::Serialize;

/// Which minimizations `minimize` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Scalar,
    Vector,
    Both,
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Mode::Scalar),
            "vector" => Ok(Mode::Vector),
            "both" => Ok(Mode::Both),
            _ => bail!("mode must be scalar, vector or both, got {s:?}"),
        }
    }
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Scalar => "scalar",
            Mode::Vector => "vector",
            Mode::Both => "both",
        }
    }
}

/// `N,s,p,alpha` with `β = p* − α`, or all five of `N,s,p,alpha,beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsSpec(pub Vec<f64>);

impl FromStr for ParamsSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number {x:?} in params")))
            .collect::<Result<Vec<_>>>()?;
        if !(v.len() == 4 || v.len() == 5) {
            bail!("params takes 4 values (N,s,p,alpha) or 5 (N,s,p,alpha,beta), got {}", v.len());
        }
        Ok(ParamsSpec(v))
    }
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<ParamSet> {
        let v = &self.0;
        if v[0].fract() != 0.0 || v[0] < 1.0 || v[0] > u32::MAX as f64 {
            bail!("N = {} must be a positive integer", v[0]);
        }
        let n = v[0] as u32;
        let ps = match v.len() {
            4 => ParamSet::from_alpha(n, v[1], v[2], v[3])?,
            _ => ParamSet::new(n, v[1], v[2], v[3], v[4])?,
        };
        Ok(ps)
    }
}

/// Every setting a command may read. Unset optional values fall back to
/// the command's default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Option<ParamsSpec>,
    pub gamma: Option<f64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub grid_n: usize,
    pub half_width: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub mask_radius: Option<f64>,
    pub eps_shift: f64,
    pub filter: Option<String>,
    pub golden: Option<PathBuf>,
    pub scalar_constant: Option<f64>,
    pub mode: Mode,
    pub sweep: usize,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: None,
            gamma: None,
            gamma_grid: None,
            grid_n: critcouple::gagliardo::DEFAULT_N,
            half_width: critcouple::gagliardo::DEFAULT_HALF_WIDTH,
            tol: 1e-10,
            max_iter: 20_000,
            seed: critcouple::verify::VerifyConfig::default().seed,
            out: None,
            mask_radius: None,
            eps_shift: 0.0,
            filter: None,
            golden: None,
            scalar_constant: None,
            mode: Mode::Both,
            sweep: critcouple::verify::VerifyConfig::default().sweep,
            svg: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| anyhow!("{key} = {value:?}: {e}"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|x| parse(key, x.trim())).collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys use underscores or dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "params" => self.params = Some(value.parse()?),
            "gamma" => self.gamma = Some(parse(key, value)?),
            "gamma_grid" => self.gamma_grid = Some(parse_list(key, value)?),
            "grid_n" => self.grid_n = parse(key, value)?,
            "half_width" => self.half_width = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "mask_radius" => self.mask_radius = Some(parse(key, value)?),
            "eps_shift" => self.eps_shift = parse(key, value)?,
            "filter" => self.filter = Some(value.to_string()),
            "golden" => self.golden = Some(PathBuf::from(value)),
            "scalar_constant" => self.scalar_constant = Some(parse(key, value)?),
            "mode" => self.mode = value.parse()?,
            "sweep" => self.sweep = parse(key, value)?,
            "svg" => self.svg = parse(key, value)?,
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Parses the file format: one `key = value` per line, `#` comments,
    /// blank lines ignored, each key at most once.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", no + 1))?;
            let norm = key.trim().replace('-', "_");
            if !seen.insert(norm.clone()) {
                bail!("line {}: duplicate key {norm:?}", no + 1);
            }
            cfg.set(&norm, value).with_context(|| format!("line {}", no + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_str(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The file form; [`RunConfig::parse_str`] reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        if let Some(p) = &self.params {
            put("params", join(&p.0));
        }
        if let Some(g) = self.gamma {
            put("gamma", g.to_string());
        }
        if let Some(g) = &self.gamma_grid {
            put("gamma_grid", join(g));
        }
        put("grid_n", self.grid_n.to_string());
        put("half_width", self.half_width.to_string());
        put("tol", self.tol.to_string());
        put("max_iter", self.max_iter.to_string());
        put("seed", self.seed.to_string());
        if let Some(o) = &self.out {
            put("out", o.display().to_string());
        }
        if let Some(r) = self.mask_radius {
            put("mask_radius", r.to_string());
        }
        put("eps_shift", self.eps_shift.to_string());
        if let Some(f) = &self.filter {
            put("filter", f.clone());
        }
        if let Some(g) = &self.golden {
            put("golden", g.display().to_string());
        }
        if let Some(c) = self.scalar_constant {
            put("scalar_constant", c.to_string());
        }
        put("mode", self.mode.as_str().to_string());
        put("sweep", self.sweep.to_string());
        put("svg", self.svg.to_string());
        s
    }

    pub fn params(&self) -> Result<ParamSet> {
        self.params
            .as_ref()
            .ok_or_else(|| crate::Usage("--params is required".into()))?
            .resolve()
    }

    pub fn optimizer_options(&self) -> critcouple::gagliardo::OptimizerOptions {
        critcouple::gagliardo::OptimizerOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }
}
