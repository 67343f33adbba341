//! Scenario configuration and its flat key-value file format.
//!
//! ```toml
//! num_scbs = 5            # M
//! num_sues = 10           # N, one group per SUE
//! mues_per_group = 50     # n_i when no sweep is given
//! sweep = [50, 60, 70]    # n_i values to run
//! area_side = 100.0       # meters
//! path_loss_exponent = 4.0
//! tx_power_mue_mw = 100.0
//! tx_power_sue_mw = 200.0
//! noise_power_mw = 1e-6
//! bandwidth_hz = 1e6
//! min_distance_m = 1.0
//! ask_min = 0.0           # asks are uniform on (ask_min, ask_max]
//! ask_max = 1.0
//! demand_min = 1          # CPU cycles, inclusive
//! demand_max = 10
//! repetitions = 100
//! seed = 1
//! mechanisms = ["TARCO", "OPTB", "RND", "MWD", "VITA"]
//! ```
//!
//! Every key is optional; missing keys keep their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::RadioParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub num_scbs: usize,
    pub num_sues: usize,
    pub mues_per_group: usize,
    pub area_side: f64,
    pub radio: RadioParams,
    /// Asks are drawn uniformly from `(lo, hi]`.
    pub ask_range: (f64, f64),
    /// Inclusive range of per-bid CPU-cycle demand.
    pub demand_range: (u32, u32),
    pub repetitions: usize,
    pub seed: u64,
    pub mechanisms: Vec<Mechanism>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_scbs: 10,
            num_sues: 10,
            mues_per_group: 50,
            area_side: 100.0,
            radio: RadioParams::default(),
            ask_range: (0.0, 1.0),
            demand_range: (1, 10),
            repetitions: 100,
            seed: 1,
            mechanisms: Mechanism::ALL.to_vec(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_scbs == 0 || self.num_sues == 0 || self.mues_per_group == 0 {
            return Err(Error::Config(format!(
                "network sizes must be positive (M={}, N={}, n_i={})",
                self.num_scbs, self.num_sues, self.mues_per_group
            )));
        }
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return Err(Error::Config(format!("area_side must be > 0, got {}", self.area_side)));
        }
        self.radio.validate()?;
        let (lo, hi) = self.ask_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::Config(format!("ask range must satisfy 0 <= lo < hi, got ({lo}, {hi}]")));
        }
        let (dlo, dhi) = self.demand_range;
        if dlo == 0 || dlo > dhi {
            return Err(Error::Config(format!("demand range must satisfy 1 <= lo <= hi, got [{dlo}, {dhi}]")));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::Config("no mechanisms selected".into()));
        }
        Ok(())
    }

    pub fn with_group_size(&self, mues_per_group: usize) -> Self {
        ScenarioConfig {
            mues_per_group,
            ..self.clone()
        }
    }
}

/// A scenario plus the list of group sizes to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub scenario: ScenarioConfig,
    pub sweep: Vec<usize>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        ExperimentPlan {
            sweep: vec![scenario.mues_per_group],
            scenario,
        }
    }
}

impl ExperimentPlan {
    pub fn new(scenario: ScenarioConfig, sweep: Vec<usize>) -> Result<Self> {
        let plan = ExperimentPlan { scenario, sweep };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep list is empty".into()));
        }
        for &n in &self.sweep {
            self.scenario.with_group_size(n).validate()?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::ConfigParse { source, .. } => Error::ConfigParse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|source| Error::ConfigParse {
            path: "<config>".into(),
            source,
        })?;
        let mut plan = ExperimentPlan::default();
        file.apply(&mut plan)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// On-disk layout; all keys flat and optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    num_scbs: Option<usize>,
    num_sues: Option<usize>,
    mues_per_group: Option<usize>,
    sweep: Option<Vec<usize>>,
    area_side: Option<f64>,
    path_loss_exponent: Option<f64>,
    tx_power_mue_mw: Option<f64>,
    tx_power_sue_mw: Option<f64>,
    noise_power_mw: Option<f64>,
    bandwidth_hz: Option<f64>,
    min_distance_m: Option<f64>,
    ask_min: Option<f64>,
    ask_max: Option<f64>,
    demand_min: Option<u32>,
    demand_max: Option<u32>,
    repetitions: Option<usize>,
    seed: Option<u64>,
    mechanisms: Option<Vec<String>>,
}

impl ConfigFile {
    fn apply(self, plan: &mut ExperimentPlan) -> Result<()> {
        let s = &mut plan.scenario;
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$src { $dst = v; })*
            };
        }
        set! {
            num_scbs => s.num_scbs,
            num_sues => s.num_sues,
            mues_per_group => s.mues_per_group,
            area_side => s.area_side,
            path_loss_exponent => s.radio.path_loss_exponent,
            tx_power_mue_mw => s.radio.tx_power_mue,
            tx_power_sue_mw => s.radio.tx_power_sue,
            noise_power_mw => s.radio.noise_power,
            bandwidth_hz => s.radio.bandwidth,
            min_distance_m => s.radio.min_distance_clamp,
            ask_min => s.ask_range.0,
            ask_max => s.ask_range.1,
            demand_min => s.demand_range.0,
            demand_max => s.demand_range.1,
            repetitions => s.repetitions,
            seed => s.seed,
        }
        if let Some(tags) = self.mechanisms {
            s.mechanisms = tags.iter().map(|t| t.parse()).collect::<Result<_>>()?;
        }
        plan.sweep = self.sweep.unwrap_or_else(|| vec![s.mues_per_group]);
        Ok(())
    }
}
