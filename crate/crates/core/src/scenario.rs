//! Scenario configuration and the assess, recover, evaluate pipeline.

use std::collections::BTreeSet;

use scdm_kg::Graph;
use serde::{Deserialize, Serialize};

use crate::dmp::{assess, orchestrate, AssessmentReport, Policy, RecoveryOutcome};
use crate::error::{CoreError, Result};
use crate::generator::{generate_snapshot, DisruptionConfig, GenConfig};
use crate::metrics::{evaluate, ScenarioReport};
use crate::ontology::{emit_views, Snapshot};

pub const REFERENCE_SCENARIOS: &str = include_str!("../configs/reference_scenarios.toml");
pub const SCARCITY: &str = include_str!("../configs/scarcity.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Md,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    /// Format printed to standard output by `run` and `evaluate`.
    pub format: Format,
    /// Write each scenario's recovered store next to its action log.
    pub scenario_stores: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            format: Format::Csv,
            scenario_stores: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub generator: GenConfig,
    pub policy: Policy,
    pub output: OutputOptions,
    pub disruptions: Vec<DisruptionConfig>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CoreError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn reference() -> Self {
        Self::from_toml(REFERENCE_SCENARIOS).expect("bundled config is valid")
    }

    pub fn scarcity() -> Self {
        Self::from_toml(SCARCITY).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.policy.validate()?;
        let start = self.generator.start()?;
        let mut ids = BTreeSet::new();
        for d in &self.disruptions {
            if !ids.insert(d.id.as_str()) {
                return Err(CoreError::Config(format!("duplicate disruption id {}", d.id)));
            }
            d.to_disruption(start, self.generator.horizon_days, &self.policy.severity_factors)?;
        }
        Ok(())
    }

    /// Keeps only the named disruptions, in declaration order.
    pub fn select(&mut self, ids: &[String]) -> Result<()> {
        if ids.is_empty() {
            return Ok(());
        }
        for id in ids {
            if !self.disruptions.iter().any(|d| &d.id == id) {
                return Err(CoreError::NotFound(format!("scenario {id}")));
            }
        }
        self.disruptions.retain(|d| ids.contains(&d.id));
        Ok(())
    }
}

/// Generated network plus every configured disruption.
pub fn build_snapshot(cfg: &ScenarioConfig) -> Result<Snapshot> {
    let mut snap = generate_snapshot(&cfg.generator)?;
    let start = cfg.generator.start()?;
    for d in &cfg.disruptions {
        snap.disruptions
            .push(d.to_disruption(start, cfg.generator.horizon_days, &cfg.policy.severity_factors)?);
    }
    snap.sort();
    Ok(snap)
}

pub fn build_store(cfg: &ScenarioConfig) -> Result<Graph> {
    emit_views(&build_snapshot(cfg)?)
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub graph: Graph,
    pub assessment: AssessmentReport,
    pub outcome: RecoveryOutcome,
    pub report: ScenarioReport,
}

/// One disruption on a private copy of the base store.
pub fn run_scenario(base: &Graph, disruption: &str, policy: &Policy) -> Result<ScenarioRun> {
    let mut graph = base.clone();
    let assessment = assess(&mut graph, disruption)?;
    let outcome = orchestrate(&mut graph, disruption, policy)?;
    let report = evaluate(&graph, disruption)?;
    Ok(ScenarioRun {
        graph,
        assessment,
        outcome,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_disruption_fixtures;

    #[test]
    fn bundled_configs_load() {
        let p = ScenarioConfig::reference();
        assert_eq!(p.generator, GenConfig::default());
        assert_eq!(p.policy, Policy::default());
        assert_eq!(p.disruptions, build_disruption_fixtures(178).unwrap());
        assert!(!ScenarioConfig::scarcity().disruptions.is_empty());
    }

    #[test]
    fn empty_config_means_defaults_and_no_scenarios() {
        let c = ScenarioConfig::from_toml("").unwrap();
        assert!(c.disruptions.is_empty());
        assert_eq!(c.generator.num_orders, 400);
    }

    #[test]
    fn config_errors_are_reported() {
        for bad in [
            "[generator]\nhorizon_days = 0",
            "[policy]\nmax_delay_days = 0",
            "[policy.severity_factors]\nLow = 1.5\nMedium = 0.5\nHigh = 0.1",
            "unknown = 1",
            "[[disruptions]]\nid = \"D\"\ncause = \"internal\"\nscope = \"production\"\nseverity = \"Low\"\nbegin_day = 170\nduration_days = 20\nregion = { min_lon = 0.0, max_lon = 1.0, min_lat = 0.0, max_lat = 1.0 }",
            "[[disruptions]]\nid = \"D\"\ncause = \"internal\"\nscope = \"production\"\nseverity = \"Low\"\nbegin_day = 1\nduration_days = 2\nregion = { min_lon = 2.0, max_lon = 1.0, min_lat = 0.0, max_lat = 1.0 }",
        ] {
            assert!(matches!(ScenarioConfig::from_toml(bad), Err(CoreError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn unknown_scenario_filter_is_not_found() {
        let mut c = ScenarioConfig::reference();
        assert!(matches!(c.select(&["Nope".into()]), Err(CoreError::NotFound(_))));
        c.select(&["Disr2".into()]).unwrap();
        assert_eq!(c.disruptions.len(), 1);
    }
}
