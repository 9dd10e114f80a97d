//! Replicator, cost-ratchet and belief dynamics.
//!
//! The simplex is advanced with a classical fixed-step RK4 scheme. Cost and
//! belief follow linear ODEs whose rates only change when effective adoption
//! crosses the threshold, so on each side of a crossing they are evaluated in
//! closed form. Crossings are located by bisection on the sub-step length and
//! every step is split at the crossing time, which keeps the indicator in the
//! cost equation exact and makes the cost strictly non-increasing.

use alloc::vec::Vec;

use libm::exp;

use crate::model::{
    effective_adoption, mean_fitness, payoffs, FullState, ModelParams, SimplexState, StateError,
    Strategy, TrustParams,
};
use crate::trust;

/// Step size and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    /// Fixed step `h`.
    pub step: f64,
    /// Time horizon.
    pub t_max: f64,
    /// Distance and derivative bound for corner convergence.
    pub corner_tolerance: f64,
    /// Width to which threshold-crossing times are bisected.
    pub event_tolerance: f64,
    /// Clamp negative frequencies and divide by the sum after every step.
    pub renormalize: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            step: 0.01,
            t_max: 200.0,
            corner_tolerance: 1e-6,
            event_tolerance: 1e-9,
            renormalize: true,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.step) {
            return Err(DynamicsError::Config { field: "step", value: self.step });
        }
        if !ok(self.t_max) {
            return Err(DynamicsError::Config { field: "t_max", value: self.t_max });
        }
        if !ok(self.corner_tolerance) {
            return Err(DynamicsError::Config {
                field: "corner_tolerance",
                value: self.corner_tolerance,
            });
        }
        if !ok(self.event_tolerance) {
            return Err(DynamicsError::Config {
                field: "event_tolerance",
                value: self.event_tolerance,
            });
        }
        Ok(())
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }
}

/// When believed sharing is allowed to move toward the realised share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeliefGate {
    /// Only while effective adoption is above threshold, i.e. while gains are
    /// being realised and reneged upon.
    #[default]
    Excursion,
    /// Continuously from the first upward crossing onwards.
    AfterFirstGain,
}

/// Which sub-systems are coupled into the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    /// Cost ratchet on; when off the cost is frozen at its initial value.
    pub cost: bool,
    /// Payoffs use the believed sharing fraction, which updates per `belief_gate`.
    pub trust: bool,
    /// Add the coordination terms to the payoffs.
    pub coordination: bool,
    pub belief_gate: BeliefGate,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            cost: true,
            trust: false,
            coordination: false,
            belief_gate: BeliefGate::Excursion,
        }
    }
}

impl Flags {
    /// Frozen-cost replicator dynamics only.
    pub fn frozen() -> Self {
        Flags { cost: false, ..Flags::default() }
    }

    pub fn with_coordination(mut self, on: bool) -> Self {
        self.coordination = on;
        self
    }

    pub fn with_trust(mut self, on: bool) -> Self {
        self.trust = on;
        self
    }
}

/// Time-local policy modifications layered on top of the payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Forcing {
    /// Multiple of the calibrated subsidy `max(0, f_P − f_G)` paid to
    /// genuine adopters.
    pub subsidy: f64,
    /// Contractually fixed sharing fraction; freezes belief at this value.
    pub pinned_belief: Option<f64>,
}

/// Everything the right-hand side needs besides the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub params: ModelParams,
    /// Share actually paid out once gains are realised; `None` without a
    /// trust game.
    pub realised_share: Option<f64>,
    pub forcing: Forcing,
}

impl Environment {
    pub fn new(params: ModelParams) -> Self {
        Environment {
            params,
            realised_share: None,
            forcing: Forcing::default(),
        }
    }

    /// Attach the organisation's reneging decision.
    pub fn with_trust(mut self, tp: &TrustParams) -> Self {
        self.realised_share = Some(trust::optimal_reneging(tp).alpha_actual);
        self
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("state became non-finite at t = {time} (step {step}); reduce the step size")]
    NonFiniteState { time: f64, step: f64 },
    #[error("invalid integration setting `{field}` = {value}")]
    Config { field: &'static str, value: f64 },
    #[error("invalid state: {0}")]
    State(#[from] StateError),
    #[error("trust dynamics requested without trust parameters")]
    MissingTrust,
}

/// Direction of a threshold crossing of `e(x) − e*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Up,
    Down,
}

impl Crossing {
    pub fn as_str(self) -> &'static str {
        match self {
            Crossing::Up => "cross_up",
            Crossing::Down => "cross_down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEvent {
    pub time: f64,
    pub kind: Crossing,
}

/// Interval spent above threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excursion {
    pub start: f64,
    pub end: f64,
}

impl Excursion {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryType {
    /// Direct trap: no excursion, ends at the partial corner.
    Type1,
    /// Failed crossing: at least one excursion, ends at the partial corner
    /// with a permanently lowered cost.
    Type2,
    /// Successful embedding.
    Type3,
    /// Cost ratchet oscillation: repeated excursions, then embedding.
    Type4,
    Unclassified,
}

impl TrajectoryType {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryType::Type1 => "Type1",
            TrajectoryType::Type2 => "Type2",
            TrajectoryType::Type3 => "Type3",
            TrajectoryType::Type4 => "Type4",
            TrajectoryType::Unclassified => "Unclassified",
        }
    }
}

/// A recorded point and whether it lies inside an excursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: FullState,
    pub in_excursion: bool,
}

/// Numerical health of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Smallest frequency produced by a raw RK4 step, before clamping.
    pub min_raw_component: f64,
    /// Largest `|x_G + x_P + x_R − 1|` after post-processing.
    pub max_simplex_drift: f64,
    pub steps: u64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            min_raw_component: f64::INFINITY,
            max_simplex_drift: 0.0,
            steps: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<ThresholdEvent>,
    pub excursions: Vec<Excursion>,
    pub classification: TrajectoryType,
    pub final_state: FullState,
    /// Corner the run converged to, if any.
    pub converged_to: Option<Strategy>,
    pub convergence_time: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    /// `true` when the cost column never increases.
    pub fn cost_is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].state.cost <= w[0].state.cost)
    }
}

/// Replicator field `ẋ_i = x_i (f_i − f̄)`.
pub fn replicator_rhs(
    s: &SimplexState,
    cost: f64,
    appropriability: f64,
    params: &ModelParams,
    coordination: bool,
) -> [f64; 3] {
    let env = Environment::new(*params);
    simplex_field(&s.as_array(), cost, appropriability, &env, coordination)
}

#[inline]
fn simplex_field(x: &[f64; 3], cost: f64, alpha: f64, env: &Environment, coordination: bool) -> [f64; 3] {
    let s = SimplexState::from_array_unchecked(*x);
    let mut f = payoffs(&s, cost, alpha, &env.params, coordination);
    if env.forcing.subsidy > 0.0 {
        let shortfall = f.partial - f.genuine;
        if shortfall > 0.0 {
            f.genuine += env.forcing.subsidy * shortfall;
        }
    }
    let fbar = mean_fitness(&s, &f);
    [
        x[0] * (f.genuine - fbar),
        x[1] * (f.partial - fbar),
        x[2] * (f.reject - fbar),
    ]
}

/// Time derivative of the full state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub simplex: [f64; 3],
    pub cost: f64,
    pub belief: f64,
}

/// Instantaneous right-hand side of the coupled system. `gains_realised`
/// records whether an upward crossing has happened so far, which matters
/// only for [`BeliefGate::AfterFirstGain`].
pub fn full_rhs(state: &FullState, env: &Environment, flags: &Flags, gains_realised: bool) -> StateDerivative {
    let p = &env.params;
    let above = effective_adoption(&state.simplex, p.partial_weight) > p.threshold;
    let rates = Rates::new(env, flags, above, gains_realised || above);
    let alpha = belief_in_payoffs(state.belief, env, flags);
    StateDerivative {
        simplex: simplex_field(&state.simplex.as_array(), state.cost, alpha, env, flags.coordination),
        cost: -rates.cost * state.cost,
        belief: -rates.belief * (state.belief - rates.belief_target),
    }
}

#[inline]
fn belief_in_payoffs(belief: f64, env: &Environment, flags: &Flags) -> f64 {
    if flags.trust {
        env.forcing.pinned_belief.unwrap_or(belief)
    } else {
        env.params.appropriability
    }
}

/// Rates of the linear cost and belief equations on one side of the threshold.
#[derive(Debug, Clone, Copy)]
struct Rates {
    cost: f64,
    belief: f64,
    belief_target: f64,
}

impl Rates {
    fn new(env: &Environment, flags: &Flags, above: bool, gained: bool) -> Self {
        let p = &env.params;
        let cost = if flags.cost {
            p.learning_rate + if above { p.embedding_rate } else { 0.0 }
        } else {
            0.0
        };
        let gate = match flags.belief_gate {
            BeliefGate::Excursion => above,
            BeliefGate::AfterFirstGain => gained,
        };
        let (belief, belief_target) = match env.realised_share {
            Some(target) if flags.trust && gate && env.forcing.pinned_belief.is_none() => {
                (p.belief_rate, target)
            }
            _ => (0.0, 0.0),
        };
        Rates { cost, belief, belief_target }
    }

    #[inline]
    fn cost_at(&self, cost: f64, tau: f64) -> f64 {
        if self.cost == 0.0 {
            cost
        } else {
            cost * exp(-self.cost * tau)
        }
    }

    #[inline]
    fn belief_at(&self, belief: f64, tau: f64) -> f64 {
        if self.belief == 0.0 {
            belief
        } else {
            self.belief_target + (belief - self.belief_target) * exp(-self.belief * tau)
        }
    }
}

/// Incremental integrator. Drives the trajectory segment by segment so that
/// the scenario engine can change the environment between segments; use
/// [`integrate`] for a single run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: IntegrationConfig,
    flags: Flags,
    x: [f64; 3],
    cost: f64,
    belief: f64,
    t: f64,
    above: bool,
    gained: bool,
    record: bool,
    samples: Vec<Sample>,
    events: Vec<ThresholdEvent>,
    excursions: Vec<Excursion>,
    open_excursion: Option<f64>,
    diagnostics: Diagnostics,
    converged: Option<(Strategy, f64)>,
    last_env: Environment,
}

const MAX_CROSSINGS_PER_STEP: usize = 16;

impl Simulation {
    pub fn new(
        initial: FullState,
        env: &Environment,
        config: IntegrationConfig,
        flags: Flags,
    ) -> Result<Self, DynamicsError> {
        config.validate()?;
        let x = initial.simplex.as_array();
        SimplexState::new(x[0], x[1], x[2])?;
        if flags.trust && env.realised_share.is_none() {
            return Err(DynamicsError::MissingTrust);
        }
        let above = effective_adoption(&initial.simplex, env.params.partial_weight) > env.params.threshold;
        let mut sim = Simulation {
            config,
            flags,
            x,
            cost: initial.cost,
            belief: initial.belief,
            t: initial.time,
            above,
            gained: above,
            record: true,
            samples: Vec::new(),
            events: Vec::new(),
            excursions: Vec::new(),
            open_excursion: if above { Some(initial.time) } else { None },
            diagnostics: Diagnostics::default(),
            converged: None,
            last_env: *env,
        };
        sim.push_sample();
        Ok(sim)
    }

    /// Keep only events, excursions and the final state.
    pub fn without_samples(mut self) -> Self {
        self.record = false;
        self.samples.clear();
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> FullState {
        FullState {
            simplex: SimplexState::from_array_unchecked(self.x),
            cost: self.cost,
            belief: self.belief,
            time: self.t,
        }
    }

    pub fn is_above_threshold(&self) -> bool {
        self.above
    }

    pub fn excursion_count(&self) -> usize {
        self.excursions.len() + usize::from(self.open_excursion.is_some())
    }

    /// Integrate up to time `until`. With `stop_at_corner` the run halts as
    /// soon as the state is within the corner tolerance of a corner and all
    /// frequency derivatives are below it; the corner is returned.
    pub fn advance(
        &mut self,
        env: &Environment,
        until: f64,
        stop_at_corner: bool,
    ) -> Result<Option<Strategy>, DynamicsError> {
        self.last_env = *env;
        if let Some((corner, _)) = self.converged {
            return Ok(Some(corner));
        }
        let span = until - self.t;
        if span <= 0.0 {
            return Ok(if stop_at_corner { self.check_corner(env) } else { None });
        }
        let n = libm::ceil(span / self.config.step - 1e-9).max(1.0) as u64;
        let h = span / n as f64;
        let t0 = self.t;
        for i in 0..n {
            if stop_at_corner {
                if let Some(c) = self.check_corner(env) {
                    return Ok(Some(c));
                }
            }
            let target = if i + 1 == n { until } else { t0 + (i + 1) as f64 * h };
            self.step(env, target - self.t)?;
            self.t = target;
            if self.record {
                self.push_sample();
            }
        }
        Ok(if stop_at_corner { self.check_corner(env) } else { None })
    }

    /// Freeze the population for `duration` while cost and belief evolve at
    /// the rates of the current side of the threshold.
    pub fn hold(&mut self, env: &Environment, duration: f64) -> Result<(), DynamicsError> {
        self.last_env = *env;
        if duration <= 0.0 {
            return Ok(());
        }
        let n = libm::ceil(duration / self.config.step - 1e-9).max(1.0) as u64;
        let h = duration / n as f64;
        let t0 = self.t;
        let rates = Rates::new(env, &self.flags, self.above, self.gained);
        for i in 0..n {
            let target = if i + 1 == n { t0 + duration } else { t0 + (i + 1) as f64 * h };
            let dt = target - self.t;
            self.cost = rates.cost_at(self.cost, dt);
            self.belief = rates.belief_at(self.belief, dt);
            self.t = target;
            self.diagnostics.steps += 1;
            if self.record {
                self.push_sample();
            }
        }
        self.check_finite(h)
    }

    /// Replace the population state instantaneously (e.g. seeding).
    pub fn set_simplex(&mut self, s: SimplexState) {
        self.x = s.as_array();
        let p = &self.last_env.params;
        let above = effective_adoption(&s, p.partial_weight) > p.threshold;
        if above != self.above {
            self.flip(above);
        }
        self.converged = None;
        if self.record {
            self.push_sample();
        }
    }

    pub fn set_belief(&mut self, belief: f64) {
        self.belief = belief;
    }

    /// Close the run and classify it.
    pub fn finish(mut self, params: &ModelParams) -> Trajectory {
        if self.converged.is_none() {
            let env = self.last_env;
            self.check_corner(&env);
        }
        if let Some(start) = self.open_excursion.take() {
            self.excursions.push(Excursion { start, end: self.t });
        }
        if self.record {
            let last_t = self.samples.last().map(|s| s.state.time);
            if last_t != Some(self.t) {
                self.push_sample();
            }
        }
        let final_state = self.state();
        let mut traj = Trajectory {
            samples: self.samples,
            events: self.events,
            excursions: self.excursions,
            classification: TrajectoryType::Unclassified,
            final_state,
            converged_to: self.converged.map(|c| c.0),
            convergence_time: self.converged.map(|c| c.1),
            diagnostics: self.diagnostics,
        };
        traj.classification = classify_trajectory(&traj, params);
        traj
    }

    fn push_sample(&mut self) {
        let state = self.state();
        self.samples.push(Sample {
            state,
            in_excursion: self.above,
        });
    }

    fn flip(&mut self, above: bool) {
        self.above = above;
        if above {
            self.gained = true;
            self.events.push(ThresholdEvent { time: self.t, kind: Crossing::Up });
            self.open_excursion = Some(self.t);
        } else {
            self.events.push(ThresholdEvent { time: self.t, kind: Crossing::Down });
            if let Some(start) = self.open_excursion.take() {
                self.excursions.push(Excursion { start, end: self.t });
            }
        }
    }

    fn check_corner(&mut self, env: &Environment) -> Option<Strategy> {
        if let Some((c, _)) = self.converged {
            return Some(c);
        }
        let tol = self.config.corner_tolerance;
        let (mut best, mut val) = (Strategy::Genuine, self.x[0]);
        for s in [Strategy::Partial, Strategy::Reject] {
            if self.x[s.index()] > val {
                best = s;
                val = self.x[s.index()];
            }
        }
        if 1.0 - val > tol {
            return None;
        }
        let alpha = belief_in_payoffs(self.belief, env, &self.flags);
        let dx = simplex_field(&self.x, self.cost, alpha, env, self.flags.coordination);
        if dx.iter().all(|d| libm::fabs(*d) < tol) {
            self.converged = Some((best, self.t));
            Some(best)
        } else {
            None
        }
    }

    fn rk4(&self, env: &Environment, rates: &Rates, h: f64) -> [f64; 3] {
        let x = &self.x;
        let coord = self.flags.coordination;
        let a = |tau: f64| belief_in_payoffs(rates.belief_at(self.belief, tau), env, &self.flags);
        let c = |tau: f64| rates.cost_at(self.cost, tau);
        let half = 0.5 * h;
        let (c_half, c_full) = (c(half), c(h));
        let (a_half, a_full) = (a(half), a(h));
        let k1 = simplex_field(x, self.cost, a(0.0), env, coord);
        let x2 = [x[0] + half * k1[0], x[1] + half * k1[1], x[2] + half * k1[2]];
        let k2 = simplex_field(&x2, c_half, a_half, env, coord);
        let x3 = [x[0] + half * k2[0], x[1] + half * k2[1], x[2] + half * k2[2]];
        let k3 = simplex_field(&x3, c_half, a_half, env, coord);
        let x4 = [x[0] + h * k3[0], x[1] + h * k3[1], x[2] + h * k3[2]];
        let k4 = simplex_field(&x4, c_full, a_full, env, coord);
        let w = h / 6.0;
        [
            x[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            x[2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    }

    #[inline]
    fn is_above(&self, x: &[f64; 3], env: &Environment) -> bool {
        x[0] + env.params.partial_weight * x[1] > env.params.threshold
    }

    fn commit(&mut self, raw: [f64; 3], rates: &Rates, h: f64) {
        let mut x = raw;
        for v in &raw {
            self.diagnostics.min_raw_component = self.diagnostics.min_raw_component.min(*v);
        }
        if self.config.renormalize {
            for v in &mut x {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let sum = x[0] + x[1] + x[2];
            if sum > 0.0 {
                for v in &mut x {
                    *v /= sum;
                }
            }
        }
        let drift = libm::fabs(x[0] + x[1] + x[2] - 1.0);
        self.diagnostics.max_simplex_drift = self.diagnostics.max_simplex_drift.max(drift);
        self.x = x;
        self.cost = rates.cost_at(self.cost, h);
        self.belief = rates.belief_at(self.belief, h);
    }

    fn step(&mut self, env: &Environment, h: f64) -> Result<(), DynamicsError> {
        let t_end = self.t + h;
        let mut remaining = h;
        let mut crossings = 0;
        while remaining > 0.0 {
            let rates = Rates::new(env, &self.flags, self.above, self.gained);
            let trial = self.rk4(env, &rates, remaining);
            if !trial.iter().all(|v| v.is_finite()) {
                return Err(DynamicsError::NonFiniteState { time: self.t, step: h });
            }
            if self.is_above(&trial, env) == self.above || crossings >= MAX_CROSSINGS_PER_STEP {
                self.commit(trial, &rates, remaining);
                break;
            }
            let (mut lo, mut hi) = (0.0, remaining);
            let mut at_hi = trial;
            while hi - lo > self.config.event_tolerance {
                let mid = 0.5 * (lo + hi);
                let xm = self.rk4(env, &rates, mid);
                if self.is_above(&xm, env) == self.above {
                    lo = mid;
                } else {
                    hi = mid;
                    at_hi = xm;
                }
            }
            self.commit(at_hi, &rates, hi);
            self.t += hi;
            remaining -= hi;
            crossings += 1;
            let above = !self.above;
            self.flip(above);
            if self.record {
                self.push_sample();
            }
            if remaining <= self.config.event_tolerance * 1e-3 {
                break;
            }
        }
        self.t = t_end;
        self.diagnostics.steps += 1;
        self.check_finite(h)
    }

    fn check_finite(&self, h: f64) -> Result<(), DynamicsError> {
        if self.x.iter().all(|v| v.is_finite()) && self.cost.is_finite() && self.belief.is_finite() {
            Ok(())
        } else {
            Err(DynamicsError::NonFiniteState { time: self.t, step: h })
        }
    }
}

/// Integrate from `initial` until corner convergence or the horizon.
pub fn integrate(
    initial: FullState,
    env: &Environment,
    config: &IntegrationConfig,
    flags: &Flags,
) -> Result<Trajectory, DynamicsError> {
    let mut sim = Simulation::new(initial, env, *config, *flags)?;
    sim.advance(env, initial.time + config.t_max, true)?;
    Ok(sim.finish(&env.params))
}

/// Like [`integrate`] but keeps no samples; for labelling and bisection.
pub fn integrate_outcome(
    initial: FullState,
    env: &Environment,
    config: &IntegrationConfig,
    flags: &Flags,
) -> Result<Trajectory, DynamicsError> {
    let mut sim = Simulation::new(initial, env, *config, *flags)?.without_samples();
    sim.advance(env, initial.time + config.t_max, true)?;
    Ok(sim.finish(&env.params))
}

/// Assign Type 1–4 from the excursion record and final corner.
pub fn classify_trajectory(traj: &Trajectory, params: &ModelParams) -> TrajectoryType {
    let n = traj.excursions.len();
    match traj.converged_to {
        Some(Strategy::Genuine) if n >= 2 => TrajectoryType::Type4,
        Some(Strategy::Genuine) => TrajectoryType::Type3,
        Some(Strategy::Partial) if n == 0 => TrajectoryType::Type1,
        Some(Strategy::Partial) if traj.final_state.cost < params.genuine_cost => TrajectoryType::Type2,
        _ => TrajectoryType::Unclassified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SimplexState;

    fn reference_env() -> Environment {
        Environment::new(ModelParams::reference())
    }

    fn start(g: f64, p: f64) -> FullState {
        let params = ModelParams::reference();
        FullState::initial(SimplexState::from_genuine_partial(g, p).unwrap(), &params)
    }

    #[test]
    fn corners_are_fixed_points() {
        let p = ModelParams::reference();
        for s in Strategy::ALL {
            let d = replicator_rhs(&SimplexState::corner(s), 1.0, 0.7, &p, true);
            assert_eq!(d, [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn partial_invades_rejection_edge() {
        let p = ModelParams::reference();
        let s = SimplexState::new(0.0, 0.4, 0.6).unwrap();
        let d = replicator_rhs(&s, 1.0, 0.7, &p, false);
        assert!(d[1] > 0.0);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn genuine_grows_when_ahead_on_gp_edge() {
        let p = ModelParams::reference();
        let s = SimplexState::new(0.5, 0.5, 0.0).unwrap();
        let f = payoffs(&s, 0.2, 0.7, &p, false);
        assert!(f.genuine > f.partial);
        let d = replicator_rhs(&s, 0.2, 0.7, &p, false);
        assert!(d[0] > 0.0);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn full_rhs_cost_rates() {
        let env = reference_env();
        let flags = Flags::default();
        let below = start(0.1, 0.8);
        assert_eq!(full_rhs(&below, &env, &flags, false).cost, 0.0);
        let above = start(0.8, 0.2);
        let d = full_rhs(&above, &env, &flags, true);
        assert!((d.cost + 0.5 * above.cost).abs() < 1e-15);
        assert_eq!(d.belief, 0.0);
    }

    #[test]
    fn belief_moves_only_with_trust() {
        let p = ModelParams::reference();
        let tp = TrustParams::reference();
        let env = Environment::new(p).with_trust(&tp);
        let s = start(0.8, 0.2);
        let off = full_rhs(&s, &env, &Flags::default(), true);
        assert_eq!(off.belief, 0.0);
        let on = full_rhs(&s, &env, &Flags::default().with_trust(true), true);
        assert!(on.belief < 0.0);
    }

    #[test]
    fn partial_corner_stays_put() {
        let env = reference_env();
        let t = integrate(start(0.0, 1.0), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert_eq!(t.converged_to, Some(Strategy::Partial));
        assert_eq!(t.classification, TrajectoryType::Type1);
        assert_eq!(t.final_state.simplex.as_array(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn below_threshold_start_is_direct_trap() {
        let env = reference_env();
        let t = integrate(start(0.1, 0.8), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert_eq!(t.classification, TrajectoryType::Type1);
        assert!(t.events.is_empty());
        assert_eq!(t.final_state.cost.to_bits(), 1.0f64.to_bits());
    }

    #[test]
    fn failed_crossing_lowers_cost() {
        let env = reference_env();
        let t = integrate(start(0.45, 0.55), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert_eq!(t.classification, TrajectoryType::Type2);
        assert_eq!(t.excursions.len(), 1);
        let exc = t.excursions[0];
        let expected = (-0.5 * exc.duration()).exp();
        assert!((t.final_state.cost - expected).abs() < 1e-9);
        assert!(t.cost_is_monotone());
    }

    #[test]
    fn above_separatrix_embeds() {
        let env = reference_env();
        let t = integrate(start(0.6, 0.4), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert_eq!(t.classification, TrajectoryType::Type3);
        assert!(t.final_state.cost < 1e-2, "{}", t.final_state.cost);
    }

    #[test]
    fn events_alternate_and_excursions_are_ordered() {
        let env = reference_env();
        let t = integrate(start(0.45, 0.55), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert_eq!(t.events[0].kind, Crossing::Down);
        for w in t.events.windows(2) {
            assert_ne!(w[0].kind, w[1].kind);
        }
        for w in t.excursions.windows(2) {
            assert!(w[0].end <= w[1].start);
        }
    }

    #[test]
    fn gp_face_is_invariant() {
        let env = reference_env();
        let t = integrate(start(0.3, 0.7), &env, &IntegrationConfig::default(), &Flags::default()).unwrap();
        assert!(t.samples.iter().all(|s| s.state.simplex.reject() == 0.0));
    }

    #[test]
    fn huge_step_reports_non_finite() {
        let mut p = ModelParams::reference();
        p.systemic_value = 1e3;
        p.steepness = 200.0;
        let env = Environment::new(p);
        let cfg = IntegrationConfig { step: 50.0, renormalize: false, ..Default::default() };
        let r = integrate(start(0.3, 0.3), &env, &cfg, &Flags::default());
        assert!(matches!(r, Err(DynamicsError::NonFiniteState { .. })));
    }

    #[test]
    fn trust_without_params_is_rejected() {
        let env = reference_env();
        let r = Simulation::new(start(0.3, 0.3), &env, IntegrationConfig::default(), Flags::default().with_trust(true));
        assert!(matches!(r, Err(DynamicsError::MissingTrust)));
    }
}
