//! Run configuration, its defaults and the flat `key = value` file format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dgpmg::multigrid::{CycleConfig, OverlapPolicy, SmootherPolicy};
use dgpmg::schwarz::{SchwarzMethod, SubdomainFamily, WeightingKind};
use dgpmg::DgParams;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Smoother acronym: subdomain family, iteration method and overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmootherKind {
    #[serde(rename = "em0")]
    Em0,
    #[serde(rename = "ea0")]
    Ea0,
    #[serde(rename = "em-l")]
    EmL,
    #[serde(rename = "ea-l")]
    EaL,
    #[serde(rename = "fm0")]
    Fm0,
    #[serde(rename = "fa0")]
    Fa0,
    #[serde(rename = "fm-l")]
    FmL,
    #[serde(rename = "fa-l")]
    FaL,
}

impl SmootherKind {
    pub const ALL: [SmootherKind; 8] = [
        SmootherKind::Em0,
        SmootherKind::Ea0,
        SmootherKind::EmL,
        SmootherKind::EaL,
        SmootherKind::Fm0,
        SmootherKind::Fa0,
        SmootherKind::FmL,
        SmootherKind::FaL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmootherKind::Em0 => "em0",
            SmootherKind::Ea0 => "ea0",
            SmootherKind::EmL => "em-l",
            SmootherKind::EaL => "ea-l",
            SmootherKind::Fm0 => "fm0",
            SmootherKind::Fa0 => "fa0",
            SmootherKind::FmL => "fm-l",
            SmootherKind::FaL => "fa-l",
        }
    }

    pub fn family(self) -> SubdomainFamily {
        match self {
            SmootherKind::Em0 | SmootherKind::Ea0 | SmootherKind::EmL | SmootherKind::EaL => {
                SubdomainFamily::ElementCentered
            }
            _ => SubdomainFamily::FaceCentered,
        }
    }

    pub fn method(self) -> SchwarzMethod {
        match self {
            SmootherKind::Em0 | SmootherKind::EmL | SmootherKind::Fm0 | SmootherKind::FmL => {
                SchwarzMethod::Multiplicative
            }
            _ => SchwarzMethod::Additive,
        }
    }

    pub fn level_dependent(self) -> bool {
        matches!(
            self,
            SmootherKind::EmL | SmootherKind::EaL | SmootherKind::FmL | SmootherKind::FaL
        )
    }
}

impl fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmootherKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = match key.as_str() {
            "eml" => "em-l",
            "eal" => "ea-l",
            "fml" => "fm-l",
            "fal" => "fa-l",
            k => k,
        };
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| format!("unknown smoother '{s}' (expected em0, ea0, em-l, ea-l, fm0, fa0, fm-l or fa-l)"))
    }
}

/// Rounding of `P_l / 8` in the level-dependent overlap `1 + P_l / 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapRule {
    Floor,
    Ceil,
}

impl OverlapRule {
    pub fn name(self) -> &'static str {
        match self {
            OverlapRule::Floor => "floor",
            OverlapRule::Ceil => "ceil",
        }
    }
}

impl FromStr for OverlapRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "floor" => Ok(OverlapRule::Floor),
            "ceil" => Ok(OverlapRule::Ceil),
            _ => Err(format!("unknown overlap rule '{s}' (expected floor or ceil)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    V,
    /// Smoothing steps double on every coarser level.
    Variable,
}

impl CycleKind {
    pub fn name(self) -> &'static str {
        match self {
            CycleKind::V => "v",
            CycleKind::Variable => "variable",
        }
    }

    pub fn config(self) -> CycleConfig {
        CycleConfig {
            variable: self == CycleKind::Variable,
            ..CycleConfig::default()
        }
    }
}

impl FromStr for CycleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v" => Ok(CycleKind::V),
            "variable" => Ok(CycleKind::Variable),
            _ => Err(format!("unknown cycle '{s}' (expected v or variable)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Mg,
    Mgcg,
    Cg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Mg => "mg",
            SolverKind::Mgcg => "mgcg",
            SolverKind::Cg => "cg",
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mg" => Ok(SolverKind::Mg),
            "mgcg" => Ok(SolverKind::Mgcg),
            "cg" => Ok(SolverKind::Cg),
            _ => Err(format!("unknown solver '{s}' (expected mg, mgcg or cg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

pub fn parse_weighting(s: &str) -> Result<WeightingKind, String> {
    s.trim().to_ascii_lowercase().parse().map_err(|e| format!("{e}"))
}

/// Parses `b` or `b1,b2`.
pub fn parse_beta(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| t.parse::<f64>().map_err(|_| format!("invalid beta component '{t}'"));
    match parts.as_slice() {
        [b] => {
            let b = parse(b)?;
            Ok([b, b])
        }
        [b1, b2] => Ok([parse(b1)?, parse(b2)?]),
        _ => Err(format!("beta must be one or two comma-separated numbers, got '{s}'")),
    }
}

/// Everything that determines one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub order: usize,
    pub nel: usize,
    /// Domain `(0, 2 AR) x (0, 2)`, so `dx1 / dx2 = AR`.
    pub aspect_ratio: f64,
    pub mu_star: f64,
    pub beta: [f64; 2],
    pub smoother: SmootherKind,
    #[serde(with = "weighting_name")]
    pub weighting: WeightingKind,
    pub overlap_rule: OverlapRule,
    pub cycle: CycleKind,
    pub solver: SolverKind,
    /// Target residual reduction in decades.
    pub decades: f64,
    /// Iteration cap; `None` picks a solver-dependent default.
    pub max_cycles: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            order: 16,
            nel: 16,
            aspect_ratio: 1.0,
            mu_star: 1.0,
            beta: [0.0, 0.0],
            smoother: SmootherKind::EaL,
            weighting: WeightingKind::Quintic,
            overlap_rule: OverlapRule::Ceil,
            cycle: CycleKind::V,
            solver: SolverKind::Mgcg,
            decades: 10.0,
            max_cycles: None,
            seed: 1,
        }
    }
}

pub const CONFIG_KEYS: [&str; 13] = [
    "order",
    "nel",
    "aspect-ratio",
    "mu-star",
    "beta",
    "smoother",
    "weighting",
    "overlap-rule",
    "cycle",
    "solver",
    "decades",
    "max-cycles",
    "seed",
];

impl RunConfig {
    pub fn effective_max_cycles(&self) -> usize {
        self.max_cycles.unwrap_or(match self.solver {
            SolverKind::Cg => 100_000,
            _ => 1000,
        })
    }

    pub fn params(&self) -> DgParams {
        DgParams {
            mu_star: self.mu_star,
            beta: self.beta,
            ..DgParams::default()
        }
    }

    pub fn overlap_policy(&self) -> OverlapPolicy {
        if !self.smoother.level_dependent() {
            OverlapPolicy::Fixed(0)
        } else {
            match self.overlap_rule {
                OverlapRule::Floor => OverlapPolicy::LevelDependent,
                OverlapRule::Ceil => OverlapPolicy::LevelDependentCeil,
            }
        }
    }

    pub fn smoother_policy(&self) -> SmootherPolicy {
        SmootherPolicy {
            method: self.smoother.method(),
            family: self.smoother.family(),
            overlap: self.overlap_policy(),
            weighting: self.weighting,
        }
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let key = key.trim().to_ascii_lowercase().replace('_', "-");
        let value = value.trim();
        let bad = |msg: String| HarnessError::Usage(format!("{key}: {msg}"));
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid number '{v}'"))
        }
        match key.as_str() {
            "order" | "p" => self.order = num(value).map_err(bad)?,
            "nel" => self.nel = num(value).map_err(bad)?,
            "aspect-ratio" | "ar" => self.aspect_ratio = num(value).map_err(bad)?,
            "mu-star" => self.mu_star = num(value).map_err(bad)?,
            "beta" => self.beta = parse_beta(value).map_err(bad)?,
            "smoother" => self.smoother = value.parse().map_err(bad)?,
            "weighting" => self.weighting = parse_weighting(value).map_err(bad)?,
            "overlap-rule" => self.overlap_rule = value.parse().map_err(bad)?,
            "cycle" => self.cycle = value.parse().map_err(bad)?,
            "solver" => self.solver = value.parse().map_err(bad)?,
            "decades" => self.decades = num(value).map_err(bad)?,
            "max-cycles" => self.max_cycles = Some(num(value).map_err(bad)?),
            "seed" => self.seed = num(value).map_err(bad)?,
            _ => return Err(HarnessError::Usage(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Usage(m));
        if self.solver == SolverKind::Cg {
            if self.order < 1 {
                return fail("order must be at least 1".into());
            }
        } else if self.order < 2 || !self.order.is_power_of_two() {
            return fail(format!(
                "order {} is not supported by multigrid (needs a power of two >= 2)",
                self.order
            ));
        }
        if self.nel < 2 {
            return fail(format!("nel must be at least 2, got {}", self.nel));
        }
        if self.solver != SolverKind::Cg {
            let policy = self.overlap_policy();
            let mut order = self.order;
            while order >= 1 {
                let (np, n_o) = (order + 1, policy.overlap(order));
                if np + 2 * n_o >= self.nel * np {
                    return fail(format!(
                        "nel {} is too small for overlap {n_o} at order {order}: subdomains would wrap around",
                        self.nel
                    ));
                }
                order /= 2;
            }
        }
        if !(self.aspect_ratio >= 1.0) || self.aspect_ratio.fract() != 0.0 {
            return fail(format!(
                "aspect ratio must be a positive integer so the exact solution is periodic, got {}",
                self.aspect_ratio
            ));
        }
        if !(self.decades > 0.0) || !self.decades.is_finite() {
            return fail(format!("decades must be positive, got {}", self.decades));
        }
        if self.max_cycles == Some(0) {
            return fail("max-cycles must be at least 1".into());
        }
        self.params().validate().map_err(|e| HarnessError::Usage(e.to_string()))
    }
}

mod weighting_name {
    use dgpmg::schwarz::WeightingKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &WeightingKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(w.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<WeightingKind, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run() {
        let c = RunConfig::default();
        assert_eq!((c.order, c.nel, c.aspect_ratio, c.mu_star), (16, 16, 1.0, 1.0));
        assert_eq!(c.smoother, SmootherKind::EaL);
        assert_eq!(c.weighting, WeightingKind::Quintic);
        assert_eq!((c.cycle, c.solver, c.decades, c.seed), (CycleKind::V, SolverKind::Mgcg, 10.0, 1));
        c.validate().unwrap();
    }

    #[test]
    fn smoother_names_round_trip() {
        for k in SmootherKind::ALL {
            assert_eq!(k.name().parse::<SmootherKind>().unwrap(), k);
        }
        assert_eq!("EAL".parse::<SmootherKind>().unwrap(), SmootherKind::EaL);
        assert!("ex0".parse::<SmootherKind>().is_err());
    }

    #[test]
    fn config_text() {
        let kv = parse_config_text("# c\norder = 8\n\nsmoother=fa0 # trailing\n").unwrap();
        assert_eq!(kv, vec![("order".into(), "8".into()), ("smoother".into(), "fa0".into())]);
        assert!(parse_config_text("order 8").is_err());
    }

    #[test]
    fn set_and_validate() {
        let mut c = RunConfig::default();
        c.set("mu_star", "2").unwrap();
        c.set("beta", "0.5,0").unwrap();
        assert_eq!((c.mu_star, c.beta), (2.0, [0.5, 0.0]));
        assert!(c.set("colour", "red").is_err());
        c.set("order", "6").unwrap();
        assert!(c.validate().is_err());
        c.set("solver", "cg").unwrap();
        c.validate().unwrap();
        c.set("beta", "0.7").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn level_overlap_rules() {
        let mut c = RunConfig::default();
        assert_eq!(c.overlap_policy(), OverlapPolicy::LevelDependentCeil);
        c.overlap_rule = OverlapRule::Floor;
        assert_eq!(c.overlap_policy(), OverlapPolicy::LevelDependent);
        c.smoother = SmootherKind::Fa0;
        assert_eq!(c.overlap_policy(), OverlapPolicy::Fixed(0));
    }
}
