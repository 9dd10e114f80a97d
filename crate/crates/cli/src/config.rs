//! Run configuration: strict JSON parsing, defaults and conversion into
//! core types.
//!
//! Every section has a default, so a config containing only `{}` is valid.
//! After parsing, the config is re-serialised with every default filled in
//! and written as the run manifest; feeding the manifest back reproduces the
//! run exactly.

use std::fmt;

use adoptlab_core::basins::SweepVariable;
use adoptlab_core::dynamics::BeliefGate;
use adoptlab_core::policy::{Intervention, InterventionKind, PolicyScenario, SeedSource};
use adoptlab_core::{
    model::apply_rho, Flags, FullState, IntegrationConfig, ModelParams, SimplexState, TrustParams,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Subcommands, also accepted as the optional `command` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Basins,
    Equilibria,
    SweepRho,
    Trust,
    Policy,
    VerifyAll,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Simulate => "simulate",
            Command::Basins => "basins",
            Command::Equilibria => "equilibria",
            Command::SweepRho => "sweep-rho",
            Command::Trust => "trust",
            Command::Policy => "policy",
            Command::VerifyAll => "verify-all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub trust: TrustConfig,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub flags: FlagsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub basins: BasinsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub rho: RhoConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    /// Written into manifests; ignored on input.
    #[serde(default, skip_serializing)]
    pub provenance: Option<serde_json::Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

/// Model parameters under their conventional short names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "d::c0")]
    pub c0: f64,
    #[serde(rename = "cP", default = "d::cp")]
    pub cp: f64,
    #[serde(rename = "bG", default = "d::bg")]
    pub bg: f64,
    #[serde(rename = "bP", default = "d::bp")]
    pub bp: f64,
    #[serde(rename = "B", default = "d::b")]
    pub b: f64,
    #[serde(default = "d::alpha")]
    pub alpha: f64,
    #[serde(default = "d::gamma")]
    pub gamma: f64,
    #[serde(rename = "eStar", default = "d::e_star")]
    pub e_star: f64,
    #[serde(default = "d::k")]
    pub k: f64,
    #[serde(default = "d::delta")]
    pub delta: f64,
    #[serde(rename = "deltaInd", default)]
    pub delta_ind: f64,
    #[serde(default = "d::lambda")]
    pub lambda: f64,
    #[serde(rename = "psiG", default)]
    pub psi_g: f64,
    #[serde(rename = "psiP", default)]
    pub psi_p: f64,
    #[serde(rename = "psiDev", default)]
    pub psi_dev: f64,
    #[serde(rename = "valueDecay", default = "d::one")]
    pub value_decay: f64,
    #[serde(default = "d::one")]
    pub n: f64,
    /// Technology type. When set, the fields above describe the ρ = 0
    /// baseline and the run uses the derived set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

/// Serde default providers.
mod d {
    use adoptlab_core::ModelParams;
    const R: ModelParams = ModelParams::reference();
    pub fn c0() -> f64 {
        R.genuine_cost
    }
    pub fn cp() -> f64 {
        R.partial_cost
    }
    pub fn bg() -> f64 {
        R.genuine_benefit
    }
    pub fn bp() -> f64 {
        R.partial_benefit
    }
    pub fn b() -> f64 {
        R.systemic_value
    }
    pub fn alpha() -> f64 {
        R.appropriability
    }
    pub fn gamma() -> f64 {
        R.partial_weight
    }
    pub fn e_star() -> f64 {
        R.threshold
    }
    pub fn k() -> f64 {
        R.steepness
    }
    pub fn delta() -> f64 {
        R.embedding_rate
    }
    pub fn lambda() -> f64 {
        R.belief_rate
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn yes() -> bool {
        true
    }
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self::from_model(&ModelParams::reference())
    }
}

impl ParamsConfig {
    pub fn from_model(p: &ModelParams) -> Self {
        ParamsConfig {
            c0: p.genuine_cost,
            cp: p.partial_cost,
            bg: p.genuine_benefit,
            bp: p.partial_benefit,
            b: p.systemic_value,
            alpha: p.appropriability,
            gamma: p.partial_weight,
            e_star: p.threshold,
            k: p.steepness,
            delta: p.embedding_rate,
            delta_ind: p.learning_rate,
            lambda: p.belief_rate,
            psi_g: p.peer_benefit,
            psi_p: p.norm_penalty,
            psi_dev: p.deviance_cost,
            value_decay: p.value_decay,
            n: p.population,
            rho: None,
        }
    }

    /// Baseline set as written, without the technology-type transform.
    pub fn base_model(&self) -> ModelParams {
        ModelParams {
            genuine_cost: self.c0,
            partial_cost: self.cp,
            genuine_benefit: self.bg,
            partial_benefit: self.bp,
            systemic_value: self.b,
            appropriability: self.alpha,
            partial_weight: self.gamma,
            threshold: self.e_star,
            steepness: self.k,
            embedding_rate: self.delta,
            learning_rate: self.delta_ind,
            belief_rate: self.lambda,
            peer_benefit: self.psi_g,
            norm_penalty: self.psi_p,
            deviance_cost: self.psi_dev,
            value_decay: self.value_decay,
            population: self.n,
        }
    }

    /// Validated baseline (strict ordering checks).
    pub fn validated_base(&self) -> Result<ModelParams, CliError> {
        Ok(self.base_model().validated()?)
    }

    /// Parameters the run actually uses.
    pub fn to_model(&self) -> Result<ModelParams, CliError> {
        let base = self.validated_base()?;
        match self.rho {
            None => Ok(base),
            Some(rho) => Ok(apply_rho(&base, rho)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct TrustConfig {
    /// Announced sharing `α̂`.
    pub announced: f64,
    /// Curvature `κ₂` of the reputational cost.
    pub kappa2: f64,
    /// Linear reputational cost `κ` of the repeated game.
    pub kappa: f64,
    /// Organisation's discount factor `β`.
    pub beta: f64,
    /// Realised gain `V`.
    pub gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_erosion: Option<f64>,
}

impl Default for TrustConfig {
    fn default() -> Self {
        let t = TrustParams::reference();
        TrustConfig {
            announced: t.announced,
            kappa2: t.curvature,
            kappa: t.linear_cost,
            beta: t.discount,
            gain: t.realised_gain,
            belief_erosion: t.belief_erosion,
        }
    }
}

impl TrustConfig {
    pub fn to_trust(&self) -> Result<TrustParams, CliError> {
        let t = TrustParams {
            announced: self.announced,
            curvature: self.kappa2,
            linear_cost: self.kappa,
            discount: self.beta,
            realised_gain: self.gain,
            belief_erosion: self.belief_erosion,
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct IntegrationSection {
    pub step: f64,
    pub t_max: f64,
    pub corner_tolerance: f64,
    pub event_tolerance: f64,
    pub renormalize: bool,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let c = IntegrationConfig::default();
        IntegrationSection {
            step: c.step,
            t_max: c.t_max,
            corner_tolerance: c.corner_tolerance,
            event_tolerance: c.event_tolerance,
            renormalize: c.renormalize,
        }
    }
}

impl IntegrationSection {
    pub fn to_config(&self) -> Result<IntegrationConfig, CliError> {
        let c = IntegrationConfig {
            step: self.step,
            t_max: self.t_max,
            corner_tolerance: self.corner_tolerance,
            event_tolerance: self.event_tolerance,
            renormalize: self.renormalize,
        };
        c.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum BeliefGateConfig {
    #[default]
    Excursion,
    AfterFirstGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct FlagsConfig {
    #[serde(default = "d::yes")]
    pub cost: bool,
    #[serde(default)]
    pub trust: bool,
    #[serde(default)]
    pub coordination: bool,
    #[serde(default)]
    pub belief_gate: BeliefGateConfig,
}

impl Default for FlagsConfig {
    fn default() -> Self {
        FlagsConfig { cost: true, trust: false, coordination: false, belief_gate: BeliefGateConfig::Excursion }
    }
}

impl FlagsConfig {
    pub fn to_flags(&self) -> Flags {
        Flags {
            cost: self.cost,
            trust: self.trust,
            coordination: self.coordination,
            belief_gate: match self.belief_gate {
                BeliefGateConfig::Excursion => BeliefGate::Excursion,
                BeliefGateConfig::AfterFirstGain => BeliefGate::AfterFirstGain,
            },
        }
    }
}

/// Starting state. Missing cost and belief default to `c0` and `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct InitialConfig {
    #[serde(rename = "xG")]
    pub x_g: f64,
    #[serde(rename = "xP")]
    pub x_p: f64,
    #[serde(rename = "xR")]
    pub x_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<f64>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig { x_g: 0.1, x_p: 0.8, x_r: 0.1, cost: None, belief: None }
    }
}

impl InitialConfig {
    pub fn to_state(&self, params: &ModelParams) -> Result<FullState, CliError> {
        let s = SimplexState::new(self.x_g, self.x_p, self.x_r)?;
        let mut st = FullState::initial(s, params);
        if let Some(c) = self.cost {
            st.cost = c;
        }
        if let Some(b) = self.belief {
            st.belief = b;
        }
        st.check(params)?;
        Ok(st)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct BasinsConfig {
    pub resolution: usize,
    /// Frozen cost; defaults to `c0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

impl Default for BasinsConfig {
    fn default() -> Self {
        BasinsConfig { resolution: 200, cost: None }
    }
}

/// Basin-measure sweep, used by `basins` when `variable` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn variable(&self) -> Result<Option<SweepVariable>, CliError> {
        match &self.variable {
            None => Ok(None),
            Some(name) => SweepVariable::from_name(name).map(Some).ok_or_else(|| {
                CliError::Validation(format!(
                    "sweep.variable `{name}` is not one of psiDev, psiG, psiP, alpha, B"
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct RhoConfig {
    pub step: f64,
    /// Fixed interior start for the value-adoption curve.
    #[serde(rename = "startXG")]
    pub start_x_g: f64,
    #[serde(rename = "startXP")]
    pub start_x_p: f64,
}

impl Default for RhoConfig {
    fn default() -> Self {
        RhoConfig { step: 0.01, start_x_g: 0.01, start_x_p: 0.98 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum SeedSourceConfig {
    #[default]
    Proportional,
    RejectersOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct InterventionConfig {
    pub kind: String,
    pub start: f64,
    #[serde(default)]
    pub duration: f64,
    pub magnitude: f64,
}

// `kind` is kept as a string so the error can name the offending value.
impl InterventionConfig {
    fn to_intervention(&self, index: usize) -> Result<Intervention, CliError> {
        let kind = InterventionKind::from_name(&self.kind).ok_or_else(|| {
            CliError::Validation(format!(
                "scenario.schedule[{index}].kind `{}` is not one of subsidy, seed, trustFix, culturePrep, embedSupport",
                self.kind
            ))
        })?;
        Ok(Intervention::new(kind, self.start, self.duration, self.magnitude))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ScenarioConfig {
    #[serde(default)]
    pub schedule: Vec<InterventionConfig>,
    #[serde(default)]
    pub seed_source: SeedSourceConfig,
}

impl RunConfig {
    pub fn scenario(&self) -> Result<PolicyScenario, CliError> {
        let params = self.params.to_model()?;
        let trust = if self.flags.trust { Some(self.trust.to_trust()?) } else { None };
        let schedule = self
            .scenario
            .schedule
            .iter()
            .enumerate()
            .map(|(i, iv)| iv.to_intervention(i))
            .collect::<Result<Vec<_>, _>>()?;
        let sc = PolicyScenario {
            params,
            trust,
            initial: self.initial.to_state(&params)?,
            schedule,
            coordination: self.flags.coordination,
            seed_source: match self.scenario.seed_source {
                SeedSourceConfig::Proportional => SeedSource::Proportional,
                SeedSourceConfig::RejectersOnly => SeedSource::RejectersOnly,
            },
        };
        sc.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(sc)
    }

    /// Check every section the command will use.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Validation(format!(
                    "config is for `{c}` but the `{command}` subcommand was invoked"
                )));
            }
        }
        let params = self.params.to_model()?;
        self.integration.to_config()?;
        self.trust.to_trust()?;
        match command {
            Command::Simulate => {
                self.initial.to_state(&params)?;
            }
            Command::Basins => {
                if self.basins.resolution == 0 {
                    return Err(CliError::Validation("basins.resolution must be positive".into()));
                }
                self.sweep.variable()?;
            }
            Command::SweepRho => {
                if !(self.rho.step > 0.0 && self.rho.step <= 1.0) {
                    return Err(CliError::Validation("rho.step must lie in (0, 1]".into()));
                }
                SimplexState::from_genuine_partial(self.rho.start_x_g, self.rho.start_x_p)?;
            }
            Command::Policy => {
                self.scenario()?;
            }
            Command::Equilibria | Command::Trust | Command::VerifyAll => {}
        }
        Ok(())
    }
}

/// Parse config text strictly: unknown keys and malformed JSON are errors
/// carrying the line and column.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gets_reference_defaults() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c.params.to_model().unwrap(), ModelParams::reference());
        assert_eq!(c.trust.to_trust().unwrap(), TrustParams::reference());
        assert_eq!(c.integration.to_config().unwrap(), IntegrationConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(r#"{"params": {"c0": 1.0, "gama": 0.3}}"#).unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
        let err = parse_config(r#"{"bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn cost_ordering_message() {
        let c = parse_config(r#"{"params": {"cP": 1.2, "bP": 1.5}}"#).unwrap();
        let err = c.params.to_model().unwrap_err();
        assert!(err.to_string().contains("c^{(R)} = 0 < c_P < c_G"), "{err}");
    }

    #[test]
    fn parse_errors_report_position() {
        let err = parse_config("{\n  \"params\": {\n    \"c0\": ,\n  }\n}").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialised_config_round_trips() {
        let c = parse_config(r#"{"params": {"rho": 0.4}, "sweep": {"variable": "psiDev", "values": [0, 0.1]}}"#).unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn command_mismatch_rejected() {
        let c = parse_config(r#"{"command": "basins"}"#).unwrap();
        assert!(c.validate(Command::Simulate).is_err());
        assert!(c.validate(Command::Basins).is_ok());
    }
}
