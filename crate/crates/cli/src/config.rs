//! TOML run configuration with `section.key=value` overrides.

use anyhow::{anyhow, bail, Context, Result};
use radner_core::sde::SimConfig;
use radner_core::{EconomyParams, IntegratorConfig, ShootingParams};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub gamma: f64,
    pub sigma_d: f64,
    pub a: f64,
    /// only used by `solve-ode`
    pub xi: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { gamma: 0.5, sigma_d: 0.2, a: 2.5, xi: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub explosion_cap: f64,
    pub start_offset: f64,
    pub end_offset: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            min_step: c.min_step,
            explosion_cap: c.explosion_cap,
            start_offset: c.start_offset,
            end_offset: c.end_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingSection {
    pub xi_tol: f64,
}

impl Default for ShootingSection {
    fn default() -> Self {
        Self { xi_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconomySection {
    pub beta: f64,
    pub mu_d: f64,
    pub sigma_d: f64,
    pub gamma: f64,
    pub d0: f64,
    /// initial share of the unrestricted investor; calibrates y0
    pub theta2: Option<f64>,
    /// initial state, used when theta2 is absent
    pub y0: f64,
}

impl Default for EconomySection {
    fn default() -> Self {
        Self { beta: 0.025, mu_d: 0.02, sigma_d: 0.2, gamma: 0.5, d0: 1.0, theta2: None, y0: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub clamp_margin: f64,
    /// number of trajectories written to paths.csv
    pub dump_paths: usize,
    /// keep every k-th step of dumped trajectories
    pub record_every: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            dt: s.dt,
            horizon: s.horizon,
            n_paths: s.n_paths,
            seed: s.seed,
            clamp_margin: s.clamp_margin,
            dump_paths: 0,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub xis: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { xis: vec![0.15, 0.152, 0.1522, 0.15223, 0.152232] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableSection {
    pub y_min: f64,
    pub y_max: f64,
    pub n: usize,
}

impl Default for TableSection {
    fn default() -> Self {
        Self { y_min: 1e-3, y_max: 0.999, n: 999 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub integrator: IntegratorSection,
    pub shooting: ShootingSection,
    pub economy: EconomySection,
    pub simulation: SimulationSection,
    pub sweep: SweepSection,
    pub table: TableSection,
}

/// Parses `text`, then applies `overrides` of the form `section.key=value`.
/// Values are read as TOML and fall back to plain strings.
pub fn load(text: &str, overrides: &[String]) -> Result<RunConfig> {
    toml::from_str::<RunConfig>(text).map_err(|e| anyhow!("config: {e}"))?;
    let mut table: toml::Table = toml::from_str(text).map_err(|e| anyhow!("config: {e}"))?;
    for o in overrides {
        let (path, raw) = o.split_once('=').ok_or_else(|| anyhow!("--set {o}: expected section.key=value"))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .filter(|(s, k)| !s.is_empty() && !k.is_empty() && !k.contains('.'))
            .ok_or_else(|| anyhow!("--set {o}: key must be section.key"))?;
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("key just parsed"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let toml::Value::Table(sec) = entry else { bail!("--set {o}: {section} is not a section") };
        sec.insert(key.to_string(), value);
    }
    table.try_into::<RunConfig>().map_err(|e| anyhow!("--set: {e}"))
}

impl RunConfig {
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let s = &self.integrator;
        let c = IntegratorConfig {
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            min_step: s.min_step,
            explosion_cap: s.explosion_cap,
            start_offset: s.start_offset,
            end_offset: s.end_offset,
        };
        c.validate().context("[integrator]")?;
        Ok(c)
    }

    pub fn shooting(&self) -> Result<ShootingParams> {
        let m = &self.model;
        ShootingParams::new(m.gamma, m.sigma_d, m.a).context("[model]")
    }

    pub fn economy(&self) -> Result<EconomyParams> {
        let e = &self.economy;
        EconomyParams::new(e.beta, e.mu_d, e.sigma_d, e.gamma, e.d0).context("[economy]")
    }

    pub fn simulation(&self) -> Result<SimConfig> {
        let s = &self.simulation;
        let c = SimConfig {
            dt: s.dt,
            horizon: s.horizon,
            n_paths: s.n_paths,
            seed: s.seed,
            clamp_margin: s.clamp_margin,
            ..SimConfig::default()
        };
        c.validate().context("[simulation]")?;
        Ok(c)
    }
}
