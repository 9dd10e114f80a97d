//! Policy instruments and the scenario engine.
//!
//! Interventions act on payoffs or parameters inside their time windows.
//! Seeding is the one exception: it moves population mass instantaneously.
//! The excursion hold in [`critical_excursion`] freezes the population
//! above threshold for a given time before releasing it.

use alloc::vec::Vec;

use crate::dynamics::{
    DynamicsError, Environment, Flags, Forcing, IntegrationConfig, Simulation, Trajectory,
};
use crate::equilibria::{rho_closed_form, tipping_point, Dominant, EquilibriumError};
use crate::model::{
    apply_rho, effective_adoption, systemic_benefit, FullState, ModelParams, ParamError,
    SimplexState, Strategy, TrustParams,
};
use crate::root::bisect_predicate;
use crate::trust::{trust_report, TrustReport};

/// Extra genuine-adopter mass added above the tipping point when seeding.
pub const DEFAULT_SEED_MARGIN: f64 = 0.02;
/// Bracket width for the critical hold duration.
pub const EXCURSION_TOLERANCE: f64 = 1e-3;
/// Hold durations are doubled up to this value before giving up.
pub const MAX_HOLD: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("no hold duration up to {max_hold} flips the run to genuine adoption")]
    NoCrossing { max_hold: f64 },
    #[error("excursion start has effective adoption {effective} <= threshold {threshold}")]
    NotAboveThreshold { effective: f64, threshold: f64 },
    #[error("intervention {index}: {reason}")]
    Schedule { index: usize, reason: &'static str },
    #[error("seed interventions {first} and {second} overlap")]
    OverlappingSeeds { first: usize, second: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Calibrated subsidy `max(0, (c − c_P) + (b_P − b_G) − αΦ(e))` that just
/// closes the payoff gap at effective adoption `e`.
pub fn subsidy(e: f64, params: &ModelParams, cost: f64) -> f64 {
    (params.adoption_gap(cost) - params.appropriability * systemic_benefit(e, params)).max(0.0)
}

/// Genuine-adopter share to seed on the G–P edge: the tipping point plus
/// `margin`, or zero when genuine adoption already dominates.
pub fn seeding_fraction(params: &ModelParams, cost: f64, margin: f64) -> Result<f64, EquilibriumError> {
    match tipping_point(params, cost) {
        Ok(t) => Ok((t.genuine + margin).min(1.0)),
        Err(EquilibriumError::NoRoot { dominant: Dominant::Genuine, .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Outcome of a hold-then-release run.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldOutcome {
    pub trajectory: Trajectory,
    /// Cost at the moment of release.
    pub released_cost: f64,
}

/// Freeze the population at `initial` for `hold` time units while the cost
/// ratchets, then integrate the free coupled dynamics to the horizon.
pub fn hold_and_release(
    initial: FullState,
    params: &ModelParams,
    hold: f64,
    config: &IntegrationConfig,
    record: bool,
) -> Result<HoldOutcome, DynamicsError> {
    let env = Environment::new(*params);
    let mut sim = Simulation::new(initial, &env, *config, Flags::default())?;
    if !record {
        sim = sim.without_samples();
    }
    sim.hold(&env, hold)?;
    let released_cost = sim.state().cost;
    sim.advance(&env, initial.time + hold + config.t_max, true)?;
    Ok(HoldOutcome { trajectory: sim.finish(params), released_cost })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExcursion {
    /// Smallest hold duration that leads to genuine adoption.
    pub duration: f64,
    /// Final bracket `(fails, succeeds)`.
    pub bracket: (f64, f64),
    pub released_cost: f64,
    /// `x_G(T*) − x_G*(c0·e^{−δT*})`. Nonzero in general, because the cost
    /// keeps falling after release while the state is still above threshold.
    pub tipping_residual: Option<f64>,
}

/// Default excursion start: just above threshold on the G–P edge.
pub fn default_excursion_state(params: &ModelParams) -> SimplexState {
    let g = params.partial_weight;
    let x = ((params.threshold + 1e-3 - g) / (1.0 - g)).clamp(0.0, 1.0);
    SimplexState::from_array_unchecked([x, 1.0 - x, 0.0])
}

/// Bisect the hold duration separating return to the partial corner from
/// lock-in at the genuine corner.
pub fn critical_excursion(
    initial: FullState,
    params: &ModelParams,
    config: &IntegrationConfig,
) -> Result<CriticalExcursion, PolicyError> {
    let effective = effective_adoption(&initial.simplex, params.partial_weight);
    if effective <= params.threshold {
        return Err(PolicyError::NotAboveThreshold { effective, threshold: params.threshold });
    }
    let mut failure = None;
    let mut succeeds = |hold: f64| -> bool {
        match hold_and_release(initial, params, hold, config, false) {
            Ok(o) => o.trajectory.converged_to == Some(Strategy::Genuine),
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    };
    let mut hi = 1.0;
    if succeeds(0.0) {
        hi = 0.0;
    } else {
        while !succeeds(hi) {
            hi *= 2.0;
            if hi > MAX_HOLD {
                return Err(PolicyError::NoCrossing { max_hold: MAX_HOLD });
            }
        }
    }
    let (lo, hi) = if hi == 0.0 {
        (0.0, 0.0)
    } else {
        bisect_predicate(&mut succeeds, 0.0, hi, EXCURSION_TOLERANCE)
    };
    if let Some(e) = failure {
        return Err(e.into());
    }
    let released_cost = crate::model::decayed_cost(params, initial.cost, true, hi);
    let tipping_residual = tipping_point(params, released_cost)
        .ok()
        .map(|t| initial.simplex.genuine() - t.genuine);
    Ok(CriticalExcursion { duration: hi, bracket: (lo, hi), released_cost, tipping_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterventionKind {
    /// Pays genuine adopters `magnitude` times the current shortfall
    /// `max(0, f_P − f_G)`.
    Subsidy,
    /// Moves `magnitude` of population mass into genuine adoption at the
    /// start time.
    Seed,
    /// Pins believed sharing at the announced value.
    TrustFix,
    /// Scales the deviance cost by `1 − magnitude`.
    CulturePrep,
    /// Scales the embedding rate by `1 + magnitude`.
    EmbedSupport,
}

impl InterventionKind {
    pub fn name(self) -> &'static str {
        match self {
            InterventionKind::Subsidy => "subsidy",
            InterventionKind::Seed => "seed",
            InterventionKind::TrustFix => "trustFix",
            InterventionKind::CulturePrep => "culturePrep",
            InterventionKind::EmbedSupport => "embedSupport",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            InterventionKind::Subsidy,
            InterventionKind::Seed,
            InterventionKind::TrustFix,
            InterventionKind::CulturePrep,
            InterventionKind::EmbedSupport,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intervention {
    pub kind: InterventionKind,
    pub start: f64,
    pub duration: f64,
    pub magnitude: f64,
}

impl Intervention {
    pub fn new(kind: InterventionKind, start: f64, duration: f64, magnitude: f64) -> Self {
        Intervention { kind, start, duration, magnitude }
    }

    fn end(&self) -> f64 {
        self.start + self.duration
    }

    fn active_at(&self, t: f64) -> bool {
        t >= self.start && t < self.end()
    }
}

/// Where seeded genuine adopters are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedSource {
    /// Proportionally from partial adopters and rejecters.
    #[default]
    Proportional,
    RejectersOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyScenario {
    pub params: ModelParams,
    /// Enables the trust game when present.
    pub trust: Option<TrustParams>,
    pub initial: FullState,
    pub schedule: Vec<Intervention>,
    pub coordination: bool,
    pub seed_source: SeedSource,
}

impl PolicyScenario {
    pub fn validate(&self) -> Result<(), PolicyError> {
        for (index, iv) in self.schedule.iter().enumerate() {
            let finite = iv.start.is_finite() && iv.duration.is_finite() && iv.magnitude.is_finite();
            if !finite {
                return Err(PolicyError::Schedule { index, reason: "non-finite field" });
            }
            if iv.start < 0.0 || iv.duration < 0.0 {
                return Err(PolicyError::Schedule { index, reason: "window must be non-negative" });
            }
            if iv.magnitude < 0.0 {
                return Err(PolicyError::Schedule { index, reason: "magnitude must be non-negative" });
            }
            if iv.kind == InterventionKind::Seed && iv.magnitude > 1.0 {
                return Err(PolicyError::Schedule { index, reason: "seed magnitude must lie in [0, 1]" });
            }
            if iv.kind == InterventionKind::CulturePrep && iv.magnitude > 1.0 {
                return Err(PolicyError::Schedule { index, reason: "culturePrep magnitude must lie in [0, 1]" });
            }
            if iv.kind == InterventionKind::TrustFix && self.trust.is_none() {
                return Err(PolicyError::Schedule { index, reason: "trustFix requires trust parameters" });
            }
        }
        let seeds: Vec<(usize, &Intervention)> = self
            .schedule
            .iter()
            .enumerate()
            .filter(|(_, iv)| iv.kind == InterventionKind::Seed)
            .collect();
        for (a, (i, x)) in seeds.iter().enumerate() {
            for (j, y) in &seeds[a + 1..] {
                let overlap = x.start == y.start || (x.start < y.end() && y.start < x.end());
                if overlap {
                    return Err(PolicyError::OverlappingSeeds { first: *i, second: *j });
                }
            }
        }
        Ok(())
    }

    fn flags(&self) -> Flags {
        Flags::default()
            .with_trust(self.trust.is_some())
            .with_coordination(self.coordination)
    }

    /// Environment with every intervention active at time `t` applied.
    fn environment_at(&self, t: f64) -> Environment {
        let mut p = self.params;
        let mut forcing = Forcing::default();
        for iv in self.schedule.iter().filter(|iv| iv.active_at(t)) {
            match iv.kind {
                InterventionKind::Subsidy => forcing.subsidy += iv.magnitude,
                InterventionKind::Seed => {}
                InterventionKind::TrustFix => {
                    forcing.pinned_belief = self.trust.map(|tp| tp.announced);
                }
                InterventionKind::CulturePrep => p.deviance_cost *= 1.0 - iv.magnitude,
                InterventionKind::EmbedSupport => p.embedding_rate *= 1.0 + iv.magnitude,
            }
        }
        let env = Environment::new(p).with_forcing(forcing);
        match &self.trust {
            Some(tp) => env.with_trust(tp),
            None => env,
        }
    }
}

/// Move `mass` into genuine adoption, capped by what the source holds.
pub fn seed(s: &SimplexState, mass: f64, source: SeedSource) -> SimplexState {
    let [g, p, r] = s.as_array();
    match source {
        SeedSource::Proportional => {
            let pool = p + r;
            if pool <= 0.0 {
                return *s;
            }
            let m = mass.min(pool);
            let keep = 1.0 - m / pool;
            SimplexState::from_array_unchecked([g + m, p * keep, r * keep])
        }
        SeedSource::RejectersOnly => {
            let m = mass.min(r);
            SimplexState::from_array_unchecked([g + m, p, r - m])
        }
    }
}

/// Per-doctor welfare loss of the partial trap and adoption metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    /// `αB + b_G − b_P + c_P`.
    pub delta_w: f64,
    /// `n·ΔW`.
    pub total_loss: f64,
    pub effective_adoption: f64,
    pub raw_adoption: f64,
    /// `B > n(c0 − b_G)`: full genuine adoption is socially optimal.
    pub premise_holds: bool,
}

pub fn welfare(params: &ModelParams, state: &SimplexState) -> WelfareReport {
    let p = params;
    let delta_w = p.appropriability * p.systemic_value + p.genuine_benefit - p.partial_benefit + p.partial_cost;
    WelfareReport {
        delta_w,
        total_loss: p.population * delta_w,
        effective_adoption: effective_adoption(state, p.partial_weight),
        raw_adoption: state.raw_adoption(),
        premise_holds: p.systemic_value > p.population * (p.genuine_cost - p.genuine_benefit),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub trajectory: Trajectory,
    pub welfare: WelfareReport,
    pub trust: Option<TrustReport>,
    /// Cost immediately before each seed intervention, in schedule time order.
    pub cost_before_seeds: Vec<f64>,
}

/// Integrate a scenario over `[t0, t0 + t_max]`. Corner convergence is only
/// checked after the last intervention boundary, so later interventions are
/// never skipped.
pub fn run_scenario(scenario: &PolicyScenario, config: &IntegrationConfig) -> Result<ScenarioOutcome, PolicyError> {
    scenario.validate()?;
    let t0 = scenario.initial.time;
    let t_end = t0 + config.t_max;
    let mut marks: Vec<f64> = scenario
        .schedule
        .iter()
        .flat_map(|iv| [t0 + iv.start, t0 + iv.end()])
        .filter(|&t| t > t0 && t < t_end)
        .collect();
    marks.push(t_end);
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let flags = scenario.flags();
    let rel = |t: f64| t - t0;
    let mut sim = Simulation::new(scenario.initial, &scenario.environment_at(0.0), *config, flags)?;
    let mut cost_before_seeds = Vec::new();
    let mut seeds: Vec<&Intervention> = scenario
        .schedule
        .iter()
        .filter(|iv| iv.kind == InterventionKind::Seed)
        .collect();
    seeds.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut next_seed = 0;
    let mut now = t0;
    for (k, &mark) in marks.iter().enumerate() {
        let env = scenario.environment_at(rel(now));
        while next_seed < seeds.len() && t0 + seeds[next_seed].start <= now {
            let st = sim.state();
            cost_before_seeds.push(st.cost);
            sim.set_simplex(seed(&st.simplex, seeds[next_seed].magnitude, scenario.seed_source));
            next_seed += 1;
        }
        if let Some(pinned) = env.forcing.pinned_belief {
            sim.set_belief(pinned);
        }
        let last = k + 1 == marks.len();
        let stopped = sim.advance(&env, mark, last)?;
        now = mark;
        if stopped.is_some() {
            break;
        }
    }
    let trajectory = sim.finish(&scenario.params);
    let welfare = welfare(&scenario.params, &trajectory.final_state.simplex);
    let trust = scenario
        .trust
        .map(|tp| trust_report(&scenario.params, &tp, scenario.initial.cost));
    Ok(ScenarioOutcome { trajectory, welfare, trust, cost_before_seeds })
}

/// `count` equally spaced seed interventions of size `mass`.
pub fn pilot_schedule(mass: f64, first: f64, period: f64, count: usize) -> Vec<Intervention> {
    (0..count)
        .map(|i| Intervention::new(InterventionKind::Seed, first + i as f64 * period, 0.0, mass))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueAdoptionRow {
    pub rho: f64,
    pub systemic_value: f64,
    pub final_state: SimplexState,
    pub converged_to: Option<Strategy>,
    pub effective_adoption: f64,
    pub raw_adoption: f64,
    pub delta_w: f64,
    pub total_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueAdoptionCurve {
    pub rows: Vec<ValueAdoptionRow>,
    pub rho_critical: f64,
    /// Pearson correlation between final effective adoption and `B(ρ)`.
    pub correlation: f64,
}

impl ValueAdoptionCurve {
    /// `n·ΔW` weakly decreasing over rows with `ρ < ρ_c`.
    pub fn loss_decreasing_below_critical(&self) -> bool {
        let below: Vec<&ValueAdoptionRow> = self.rows.iter().filter(|r| r.rho < self.rho_critical).collect();
        below.windows(2).all(|w| w[1].total_loss <= w[0].total_loss)
    }
}

/// Steady state of the coupled dynamics from a fixed start, for each
/// technology type on the grid. Rows whose derived parameters are invalid
/// are skipped.
pub fn value_adoption_curve(
    base: &ModelParams,
    rhos: &[f64],
    start: SimplexState,
    config: &IntegrationConfig,
) -> Result<ValueAdoptionCurve, PolicyError> {
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let p = match apply_rho(base, rho) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let env = Environment::new(p);
        let initial = FullState::initial(start, &p);
        let t = crate::dynamics::integrate_outcome(initial, &env, config, &Flags::default())?;
        let w = welfare(&p, &t.final_state.simplex);
        rows.push(ValueAdoptionRow {
            rho,
            systemic_value: p.systemic_value,
            final_state: t.final_state.simplex,
            converged_to: t.converged_to,
            effective_adoption: w.effective_adoption,
            raw_adoption: w.raw_adoption,
            delta_w: w.delta_w,
            total_loss: w.total_loss,
        });
    }
    let correlation = pearson(
        rows.iter().map(|r| r.effective_adoption),
        rows.iter().map(|r| r.systemic_value),
    );
    Ok(ValueAdoptionCurve { rows, rho_critical: rho_closed_form(base), correlation })
}

fn pearson<I: Iterator<Item = f64> + Clone, J: Iterator<Item = f64> + Clone>(xs: I, ys: J) -> f64 {
    let n = xs.clone().count() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.clone().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / libm::sqrt(sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TrajectoryType;

    #[test]
    fn subsidy_examples() {
        let p = ModelParams::reference();
        assert!((subsidy(0.6, &p, 1.0) - 0.5).abs() < 1e-12);
        assert!((subsidy(0.0, &p, 1.0) - 1.2).abs() < 1e-6);
        assert_eq!(subsidy(1.0, &p, 1.0), 0.0);
        assert!(subsidy(0.5, &p, 1.0) > subsidy(0.55, &p, 1.0));
    }

    #[test]
    fn seeding_reaches_genuine_and_below_fails() {
        let p = ModelParams::reference();
        let cfg = IntegrationConfig::default();
        let f = seeding_fraction(&p, 1.0, DEFAULT_SEED_MARGIN).unwrap();
        let tip = tipping_point(&p, 1.0).unwrap().genuine;
        assert!((f - tip - 0.02).abs() < 1e-12);
        let run = |x: f64| {
            let s = SimplexState::from_array_unchecked([x, 1.0 - x, 0.0]);
            let env = Environment::new(p);
            crate::dynamics::integrate(FullState::initial(s, &p), &env, &cfg, &Flags::frozen())
                .unwrap()
                .converged_to
        };
        assert_eq!(run(f), Some(Strategy::Genuine));
        assert_eq!(run(tip - 0.02), Some(Strategy::Partial));

        let mut mono = p;
        mono.appropriability = 0.99;
        mono.systemic_value = 50.0;
        mono.steepness = 1.0;
        assert_eq!(seeding_fraction(&mono, 1.0, 0.02).unwrap(), 0.0);
    }

    #[test]
    fn critical_excursion_brackets_types() {
        let p = ModelParams::reference();
        let cfg = IntegrationConfig::default();
        let start = FullState::initial(default_excursion_state(&p), &p);
        let ce = critical_excursion(start, &p, &cfg).unwrap();
        assert!(ce.duration > 0.0 && ce.duration < 10.0, "{ce:?}");
        let under = hold_and_release(start, &p, 0.9 * ce.duration, &cfg, true).unwrap();
        let over = hold_and_release(start, &p, 1.1 * ce.duration, &cfg, true).unwrap();
        assert_eq!(under.trajectory.classification, TrajectoryType::Type2);
        assert_eq!(over.trajectory.classification, TrajectoryType::Type3);

        let mut fast = p;
        fast.embedding_rate = 5.0;
        let quick = critical_excursion(start, &fast, &cfg).unwrap();
        assert!(quick.duration < ce.duration);
    }

    #[test]
    fn no_ratchet_means_no_crossing() {
        let mut p = ModelParams::reference();
        p.embedding_rate = 0.0;
        let cfg = IntegrationConfig { step: 0.05, t_max: 100.0, ..Default::default() };
        let start = FullState::initial(default_excursion_state(&p), &p);
        assert!(matches!(critical_excursion(start, &p, &cfg), Err(PolicyError::NoCrossing { .. })));
    }

    #[test]
    fn seeding_moves_mass() {
        let s = SimplexState::new(0.1, 0.6, 0.3).unwrap();
        let t = seed(&s, 0.45, SeedSource::Proportional).as_array();
        assert!((t[0] - 0.55).abs() < 1e-15);
        assert!((t[1] - 0.6 * (1.0 - 0.5)).abs() < 1e-15);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let t = seed(&s, 0.45, SeedSource::RejectersOnly).as_array();
        assert_eq!(t, [0.4, 0.6, 0.0]);
    }

    #[test]
    fn overlapping_seeds_rejected() {
        let p = ModelParams::reference();
        let sc = PolicyScenario {
            params: p,
            trust: None,
            initial: FullState::initial(SimplexState::corner(Strategy::Partial), &p),
            schedule: alloc::vec![
                Intervention::new(InterventionKind::Seed, 5.0, 2.0, 0.1),
                Intervention::new(InterventionKind::Seed, 6.0, 0.0, 0.1),
            ],
            coordination: false,
            seed_source: SeedSource::Proportional,
        };
        assert!(matches!(sc.validate(), Err(PolicyError::OverlappingSeeds { first: 0, second: 1 })));
        let mut bad = sc.clone();
        bad.schedule = alloc::vec![Intervention::new(InterventionKind::Seed, 0.0, 0.0, 1.5)];
        assert!(matches!(bad.validate(), Err(PolicyError::Schedule { .. })));
    }

    #[test]
    fn empty_schedule_stays_trapped() {
        let p = ModelParams::reference();
        let sc = PolicyScenario {
            params: p,
            trust: None,
            initial: FullState::initial(SimplexState::new(0.1, 0.8, 0.1).unwrap(), &p),
            schedule: Vec::new(),
            coordination: false,
            seed_source: SeedSource::Proportional,
        };
        let out = run_scenario(&sc, &IntegrationConfig::default()).unwrap();
        assert_eq!(out.trajectory.converged_to, Some(Strategy::Partial));
        assert!((out.welfare.delta_w - 1.2).abs() < 1e-12);
    }

    #[test]
    fn repeated_pilots_ratchet_cost_down() {
        let p = ModelParams::reference();
        let sc = PolicyScenario {
            params: p,
            trust: None,
            initial: FullState::initial(SimplexState::corner(Strategy::Partial), &p),
            schedule: pilot_schedule(0.45, 0.0, 15.0, 6),
            coordination: false,
            seed_source: SeedSource::Proportional,
        };
        let cfg = IntegrationConfig { t_max: 300.0, ..Default::default() };
        let out = run_scenario(&sc, &cfg).unwrap();
        let costs = &out.cost_before_seeds;
        assert!(costs.len() >= 2);
        for w in costs.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(out.trajectory.classification, TrajectoryType::Type4);
    }

    #[test]
    fn welfare_identity_and_premise() {
        let p = ModelParams::reference();
        let w = welfare(&p, &SimplexState::corner(Strategy::Partial));
        assert!((w.delta_w - 1.2).abs() < 1e-12);
        assert_eq!(w.raw_adoption, 1.0);
        assert!((w.effective_adoption - 0.3).abs() < 1e-15);
        assert!(w.premise_holds);
        let mut q = p;
        q.systemic_value = 0.0;
        q.genuine_benefit = 0.1;
        q.partial_benefit = 0.5;
        let w = welfare(&q, &SimplexState::corner(Strategy::Partial));
        assert!(w.delta_w < 0.0);
        assert!(!w.premise_holds);
    }

    #[test]
    fn value_curve_on_reference() {
        let p = ModelParams::reference();
        let rhos: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let start = SimplexState::new(0.01, 0.98, 0.01).unwrap();
        let cfg = IntegrationConfig { step: 0.02, ..Default::default() };
        let c = value_adoption_curve(&p, &rhos, start, &cfg).unwrap();
        assert!(c.loss_decreasing_below_critical());
        let first = c.rows[0];
        assert_eq!(first.converged_to, Some(Strategy::Partial));
        assert!((first.effective_adoption - p.partial_weight).abs() < 1e-5);
        assert!(first.raw_adoption > 0.98);
        assert!(c.correlation < 0.0);
    }
}
