//! The acceptance checks behind `verify-all`.
//!
//! Each check is self-contained, uses fixed seeds and fixed parameter sets,
//! and carries its own wall-clock budget. A check passes only when its
//! numerical conditions hold and it finishes inside that budget.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use adoptlab_core::basins::{basin_measure_sweep, edge_separatrix, grid_cells, SweepVariable};
use adoptlab_core::dynamics::{integrate, Simulation};
use adoptlab_core::equilibria::{
    comparative_statics, corner_stability, gamma_profile, rho_critical, rho_grid, EquilibriumKind, Stability,
    DEFAULT_RELATIVE_STEP,
};
use adoptlab_core::model::Strategy;
use adoptlab_core::policy::{
    critical_excursion, default_excursion_state, hold_and_release, pilot_schedule, run_scenario,
    value_adoption_curve, Intervention, InterventionKind, PolicyScenario, SeedSource,
};
use adoptlab_core::trust::{beta_star, optimal_reneging, organisation_payoff, theta_star};
use adoptlab_core::{
    Environment, Flags, FullState, IntegrationConfig, ModelParams, SimplexState, TrajectoryType, TrustParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Command;
use crate::parallel::Parallel;

/// Wall-clock budgets, indexed by criterion number minus one.
pub const LIMITS: [Duration; 10] = [
    Duration::from_secs(10),
    Duration::from_secs(5),
    Duration::from_secs(10),
    Duration::from_secs(30),
    Duration::from_secs(5),
    Duration::from_secs(30),
    Duration::from_secs(120),
    Duration::from_secs(60),
    Duration::from_secs(30),
    Duration::from_secs(60),
];

/// Corner perturbation and observation window for the stability check.
pub const PERTURBATION: f64 = 1e-3;
pub const PERTURBATION_WINDOW: f64 = 1.0;
/// Random sets whose slowest corner eigenvalue is weaker than this are
/// redrawn, so that a sign comparison over one time unit is meaningful.
pub const MIN_EIGENVALUE: f64 = 0.1;
pub const RANDOM_SETS: usize = 50;
pub const TIPPING_RESIDUAL: f64 = 1e-10;
pub const SEPARATRIX_TOLERANCE: f64 = 1e-3;
pub const DENSE_SCAN_POINTS: usize = 10_000;
pub const DENSE_SCAN_TOLERANCE: f64 = 1e-9;
pub const TRUST_INSTANCES: usize = 100;
pub const RHO_TOLERANCE: f64 = 0.02;
pub const RHO_STEP: f64 = 0.005;
pub const SIMPLEX_DRIFT: f64 = 1e-9;
pub const STEP_HALVING: f64 = 1e-6;
/// Basin maps in the coordination check use this resolution and step.
pub const SWEEP_RESOLUTION: usize = 100;
pub const SWEEP_STEP: f64 = 0.05;

const SEED: u64 = 0x05ee_da11;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    /// Whether the numerical conditions held, ignoring time.
    pub conditions_hold: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.limit
    }

    pub fn passed(&self) -> bool {
        self.conditions_hold && self.within_budget()
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] C{} {}: {} ({:.2}s of {}s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

/// Conditions gathered while a check runs.
#[derive(Default)]
struct Checks {
    ok: bool,
    notes: String,
}

impl Checks {
    fn new() -> Self {
        Checks { ok: true, notes: String::new() }
    }

    fn check(&mut self, cond: bool, note: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        if !cond {
            self.notes.push_str("NOT ");
        }
        self.notes.push_str(note.as_ref());
        self.ok &= cond;
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce(&mut Checks)) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    body(&mut c);
    CriterionResult {
        id,
        name,
        conditions_hold: c.ok,
        detail: c.notes,
        elapsed: start.elapsed(),
        limit: LIMITS[id as usize - 1],
    }
}

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    Some(match id {
        1 => bistability(),
        2 => tipping(),
        3 => statics(),
        4 => ratchet(),
        5 => trust_game(),
        6 => trust_cost(),
        7 => coordination(),
        8 => technology_type(),
        9 => sequencing(),
        10 => hygiene(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=10).filter_map(run_criterion).collect()
}

/// Draw a parameter set satisfying the cost and benefit ordering.
fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let genuine_cost = rng.gen_range(0.5..1.5);
        let genuine_benefit = rng.gen_range(0.0..0.5);
        let partial_weight = rng.gen_range(0.05..0.5);
        let p = ModelParams {
            genuine_cost,
            partial_cost: genuine_cost * rng.gen_range(0.05..0.9),
            genuine_benefit,
            partial_benefit: genuine_benefit + rng.gen_range(0.05..0.8),
            systemic_value: rng.gen_range(0.5..3.0),
            appropriability: rng.gen_range(0.2..1.0),
            partial_weight,
            threshold: rng.gen_range(partial_weight + 0.05..0.95),
            steepness: rng.gen_range(5.0..40.0),
            ..ModelParams::reference()
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

fn smallest_eigenvalue(p: &ModelParams) -> f64 {
    corner_stability(p, p.genuine_cost, false)
        .iter()
        .flat_map(|r| r.eigenvalues)
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

/// Perturb every corner toward every other strategy and compare the sign of
/// growth over a short frozen-cost run with the reported eigenvalue.
fn perturbations_agree(p: &ModelParams) -> Result<usize, String> {
    let env = Environment::new(*p);
    let cfg = IntegrationConfig::default().with_t_max(PERTURBATION_WINDOW);
    let mut disagreements = 0;
    for report in corner_stability(p, p.genuine_cost, false) {
        let corner = match report.kind {
            EquilibriumKind::CornerG => Strategy::Genuine,
            EquilibriumKind::CornerP => Strategy::Partial,
            EquilibriumKind::CornerR => Strategy::Reject,
            EquilibriumKind::EdgeGpInterior => continue,
        };
        let others = Strategy::ALL.into_iter().filter(|s| *s != corner);
        for (k, other) in others.enumerate() {
            let mut x = [0.0; 3];
            x[corner.index()] = 1.0 - PERTURBATION;
            x[other.index()] = PERTURBATION;
            let start = SimplexState::new(x[0], x[1], x[2]).map_err(|e| e.to_string())?;
            let traj = integrate(FullState::initial(start, p), &env, &cfg, &Flags::frozen()).map_err(|e| e.to_string())?;
            let grew = traj.final_state.simplex.get(other) > PERTURBATION;
            if grew != (report.eigenvalues[k] > 0.0) {
                disagreements += 1;
            }
        }
    }
    Ok(disagreements)
}

pub fn bistability() -> CriterionResult {
    timed(1, "bistability", |c| {
        let p = ModelParams::reference();
        let corners = corner_stability(&p, p.genuine_cost, false);
        let stab = |k: EquilibriumKind| corners.iter().find(|r| r.kind == k).map(|r| r.stability);
        c.check(
            stab(EquilibriumKind::CornerG) == Some(Stability::Stable)
                && stab(EquilibriumKind::CornerP) == Some(Stability::Stable)
                && stab(EquilibriumKind::CornerR) == Some(Stability::Saddle),
            "reference: G stable, P stable, R saddle",
        );
        match perturbations_agree(&p) {
            Ok(n) => c.check(n == 0, format!("reference perturbations agree ({n} mismatches)")),
            Err(e) => c.check(false, format!("reference perturbation failed: {e}")),
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut mismatched = 0;
        let mut errors = 0;
        for _ in 0..RANDOM_SETS {
            let p = loop {
                let p = random_params(&mut rng);
                if smallest_eigenvalue(&p) >= MIN_EIGENVALUE {
                    break p;
                }
            };
            match perturbations_agree(&p) {
                Ok(0) => {}
                Ok(_) => mismatched += 1,
                Err(_) => errors += 1,
            }
        }
        c.check(
            mismatched == 0 && errors == 0,
            format!("{RANDOM_SETS} random sets agree ({mismatched} mismatched, {errors} failed)"),
        );
    })
}

pub fn tipping() -> CriterionResult {
    timed(2, "tipping point", |c| {
        let p = ModelParams::reference();
        let tip = match adoptlab_core::equilibria::tipping_point(&p, p.genuine_cost) {
            Ok(t) => t,
            Err(e) => return c.check(false, format!("no tipping point: {e}")),
        };
        c.check(
            tip.residual.abs() < TIPPING_RESIDUAL,
            format!("x_G* = {:.6}, residual {:.1e}", tip.genuine, tip.residual),
        );
        let cfg = IntegrationConfig::default();
        match edge_separatrix(&p, p.genuine_cost, &cfg, false, 1e-5) {
            Some(x) => c.check(
                (x - tip.genuine).abs() < SEPARATRIX_TOLERANCE,
                format!("simulated separatrix {x:.6} (gap {:.1e})", (x - tip.genuine).abs()),
            ),
            None => c.check(false, "simulated separatrix not bracketed"),
        }
    })
}

/// Parameter sets on which the `γ` profile of the tipping point is
/// searched for a turning point.
pub fn gamma_sets() -> Vec<(&'static str, ModelParams, bool)> {
    let r = ModelParams::reference();
    vec![
        ("reference", r, false),
        ("shallow threshold", ModelParams { steepness: 5.0, ..r }, false),
        (
            "coordination",
            ModelParams { peer_benefit: 0.3, norm_penalty: 0.3, deviance_cost: 0.3, ..r },
            true,
        ),
        ("high threshold", ModelParams { threshold: 0.8, ..r }, false),
    ]
}

pub fn gamma_grid() -> Vec<f64> {
    (0..=58).map(|i| i as f64 * 0.01).collect()
}

pub fn statics() -> CriterionResult {
    timed(3, "comparative statics", |c| {
        let p = ModelParams::reference();
        match comparative_statics(&p, p.genuine_cost, DEFAULT_RELATIVE_STEP) {
            Ok(cs) => c.check(
                cs.expected_signs_hold(),
                format!(
                    "signs (alpha, B, cost gap, benefit gap) = ({:+.3}, {:+.3}, {:+.3}, {:+.3})",
                    cs.d_appropriability, cs.d_value, cs.d_cost_gap, cs.d_benefit_gap
                ),
            ),
            Err(e) => c.check(false, format!("comparative statics failed: {e}")),
        }
        let gammas = gamma_grid();
        let mut found = Vec::new();
        for (name, set, coordination) in gamma_sets() {
            let prof = gamma_profile(&set, set.genuine_cost, &gammas, coordination);
            if !prof.is_monotone() {
                found.push(name);
            }
        }
        c.check(
            !found.is_empty(),
            format!(
                "gamma profile turning point over {} documented sets (found in {:?})",
                gamma_sets().len(),
                found
            ),
        );
    })
}

/// Repeated pilots from the partial corner with belief dynamics on. Used
/// by the ratchet and trust-cost checks.
pub fn pilot_scenario(belief_rate: f64) -> PolicyScenario {
    let params = ModelParams { belief_rate, ..ModelParams::reference() };
    PolicyScenario {
        params,
        trust: Some(TrustParams::reference()),
        initial: FullState::initial(SimplexState::corner(Strategy::Partial), &params),
        schedule: pilot_schedule(0.45, 0.0, 15.0, 8),
        coordination: false,
        seed_source: SeedSource::Proportional,
    }
}

pub const PILOT_T_MAX: f64 = 400.0;
/// Belief rates for the slow-learning (`δ/λ = 5`) and fast-learning
/// (`δ/λ = 0.1`) pilot scenarios.
pub const SLOW_BELIEF: f64 = 0.1;
pub const FAST_BELIEF: f64 = 5.0;

pub fn ratchet() -> CriterionResult {
    timed(4, "cost ratchet", |c| {
        let p = ModelParams::reference();
        let env = Environment::new(p);
        let cfg = IntegrationConfig::default();
        let mut non_monotone = 0;
        let mut failed = 0;
        for cell in grid_cells(10) {
            match integrate(FullState::initial(cell.centroid, &p), &env, &cfg, &Flags::default()) {
                Ok(t) if t.cost_is_monotone() => {}
                Ok(_) => non_monotone += 1,
                Err(_) => failed += 1,
            }
        }
        c.check(
            non_monotone == 0 && failed == 0,
            format!("cost non-increasing on 100 starts ({non_monotone} violations, {failed} failed)"),
        );

        let start = FullState::initial(default_excursion_state(&p), &p);
        let mut kinds = Vec::new();
        match critical_excursion(start, &p, &cfg) {
            Ok(ce) => {
                let t_star = ce.duration;
                let at = |factor: f64| {
                    hold_and_release(start, &p, factor * t_star, &cfg, false).map(|o| o.trajectory.classification)
                };
                let below = at(0.9);
                let above = at(1.1);
                c.check(
                    below == Ok(TrajectoryType::Type2) && above == Ok(TrajectoryType::Type3),
                    format!("T* = {t_star:.4}; 0.9T* -> {below:?}, 1.1T* -> {above:?}"),
                );
                if let Ok(t) = below {
                    kinds.push(t);
                }
                if let Ok(t) = above {
                    kinds.push(t);
                }
            }
            Err(e) => c.check(false, format!("critical excursion failed: {e}")),
        }
        let stay = SimplexState::new(0.1, 0.8, 0.1).expect("valid start");
        if let Ok(t) = integrate(FullState::initial(stay, &p), &env, &cfg, &Flags::default()) {
            kinds.push(t.classification);
        }
        let pilots = pilot_scenario(SLOW_BELIEF);
        if let Ok(o) = run_scenario(&pilots, &cfg.with_t_max(PILOT_T_MAX)) {
            kinds.push(o.trajectory.classification);
        }
        let all = [TrajectoryType::Type1, TrajectoryType::Type2, TrajectoryType::Type3, TrajectoryType::Type4];
        c.check(
            all.iter().all(|t| kinds.contains(t)),
            format!("trajectory types produced: {:?}", kinds.iter().map(|t| t.as_str()).collect::<Vec<_>>()),
        );
    })
}

fn random_trust(rng: &mut ChaCha8Rng) -> TrustParams {
    TrustParams {
        announced: rng.gen_range(0.05..1.0),
        curvature: rng.gen_range(0.2..10.0),
        realised_gain: rng.gen_range(0.0..5.0),
        ..TrustParams::reference()
    }
}

pub fn trust_game() -> CriterionResult {
    timed(5, "trust game", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..TRUST_INSTANCES {
            let tp = random_trust(&mut rng);
            let best = organisation_payoff(&tp, optimal_reneging(&tp).alpha_actual);
            let scan = (0..DENSE_SCAN_POINTS)
                .map(|i| tp.announced * i as f64 / (DENSE_SCAN_POINTS - 1) as f64)
                .map(|a| organisation_payoff(&tp, a))
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(scan - best);
        }
        c.check(
            worst <= DENSE_SCAN_TOLERANCE,
            format!("optimum beats dense scan on {TRUST_INSTANCES} instances (worst excess {worst:.1e})"),
        );
        let b = beta_star(1.0, 1.0);
        c.check(b == 0.5, format!("beta*(V=1, kappa=1) = {b}"));
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.25).collect();
        let mut monotone = true;
        for (i, &v) in grid.iter().enumerate() {
            for (j, &k) in grid.iter().enumerate() {
                if i > 0 {
                    monotone &= beta_star(v, k) > beta_star(grid[i - 1], k);
                }
                if j > 0 {
                    monotone &= beta_star(v, k) < beta_star(v, grid[j - 1]);
                }
            }
        }
        c.check(monotone, "beta* increasing in V and decreasing in kappa on a 20x20 grid");
    })
}

pub fn trust_cost() -> CriterionResult {
    timed(6, "trust-cost interaction", |c| {
        let cfg = IntegrationConfig::default().with_t_max(PILOT_T_MAX);
        let mut finals = Vec::new();
        for (label, rate, expect_above) in [("slow belief", SLOW_BELIEF, true), ("fast belief", FAST_BELIEF, false)] {
            let sc = pilot_scenario(rate);
            let tp = sc.trust.expect("trust set");
            match theta_star(&sc.params, &tp, sc.params.genuine_cost) {
                Ok(th) => c.check(
                    (th.decay_ratio > th.theta) == expect_above,
                    format!("{label}: delta/lambda = {:.3} vs theta* = {:.4}", th.decay_ratio, th.theta),
                ),
                Err(e) => c.check(false, format!("{label}: theta* failed: {e}")),
            }
            match run_scenario(&sc, &cfg) {
                Ok(o) => finals.push(o.trajectory.final_state.simplex.genuine()),
                Err(e) => c.check(false, format!("{label}: run failed: {e}")),
            }
        }
        if let [slow, fast] = finals[..] {
            c.check(slow > fast, format!("long-run x_G: slow belief {slow:.4} > fast belief {fast:.4}"));
        }
    })
}

/// Reference payoffs with coordination effects for the sweeps.
pub fn coordination_params() -> ModelParams {
    ModelParams { peer_benefit: 0.1, norm_penalty: 0.1, deviance_cost: 0.1, ..ModelParams::reference() }
}

pub const DEVIANCE_VALUES: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const PEER_VALUES: [f64; 3] = [0.0, 0.2, 0.4];

pub fn coordination() -> CriterionResult {
    timed(7, "coordination", |c| {
        let p = coordination_params();
        let cfg = IntegrationConfig::default().with_step(SWEEP_STEP);
        let sweep = |var: SweepVariable, values: &[f64]| {
            basin_measure_sweep(&Parallel, &p, p.genuine_cost, var, values, SWEEP_RESOLUTION, &cfg, true)
        };
        match sweep(SweepVariable::DevianceCost, &DEVIANCE_VALUES) {
            Ok(t) => {
                let m: Vec<String> = t.rows.iter().map(|r| format!("{:.4}", r.measure_genuine)).collect();
                c.check(
                    t.measure_genuine_non_increasing(),
                    format!("measureG over psiDev sweep [{}]", m.join(", ")),
                );
                c.check(
                    t.edge_partial_times_decreasing(),
                    "P-side convergence on the G-P edge speeds up with psiDev",
                );
            }
            Err(e) => c.check(false, format!("psiDev sweep failed: {e}")),
        }
        for (var, label) in [(SweepVariable::PeerBenefit, "psiG"), (SweepVariable::NormPenalty, "psiP")] {
            match sweep(var, &PEER_VALUES) {
                Ok(t) => {
                    let times: Vec<String> = t
                        .rows
                        .iter()
                        .map(|r| r.common_time_genuine.map(|v| format!("{v:.2}")).unwrap_or_default())
                        .collect();
                    c.check(
                        t.genuine_times_decreasing(),
                        format!("G-side convergence time over {label} [{}]", times.join(", ")),
                    );
                }
                Err(e) => c.check(false, format!("{label} sweep failed: {e}")),
            }
        }
    })
}

/// Technology-type family: reference with a near-step threshold and a small
/// partial weight, so the partial corner stays stable until the closed-form
/// critical type.
pub fn technology_base() -> ModelParams {
    ModelParams { partial_weight: 0.02, steepness: 100.0, ..ModelParams::reference() }
}

pub fn technology_type() -> CriterionResult {
    timed(8, "technology type", |c| {
        let base = technology_base();
        let crit = rho_critical(&base, RHO_STEP, false);
        match crit.detected {
            Some(d) => c.check(
                (d - crit.closed_form).abs() <= RHO_TOLERANCE,
                format!("P corner loses stability at rho = {d:.3}; closed form {:.4}", crit.closed_form),
            ),
            None => c.check(false, "P corner never loses stability"),
        }
        let start = SimplexState::from_genuine_partial(0.01, 0.98).expect("valid start");
        match value_adoption_curve(&base, &rho_grid(0.01), start, &IntegrationConfig::default()) {
            Ok(curve) => {
                c.check(curve.loss_decreasing_below_critical(), "n*dW decreasing in rho below rho_c");
                let at_p: Vec<_> = curve.rows.iter().filter(|r| r.converged_to == Some(Strategy::Partial)).collect();
                let raw_ok = at_p.iter().all(|r| (r.raw_adoption - 1.0).abs() < 1e-3);
                let eff_ok = at_p.iter().all(|r| (r.effective_adoption - base.partial_weight).abs() < 1e-3);
                c.check(
                    !at_p.is_empty() && raw_ok && eff_ok,
                    format!("{} P-corner rows with raw adoption ~1 and effective adoption ~gamma", at_p.len()),
                );
                c.check(true, format!("value-adoption correlation {:.3}", curve.correlation));
            }
            Err(e) => c.check(false, format!("value-adoption curve failed: {e}")),
        }
    })
}

/// Coordinated population stuck at the partial corner with low beliefs.
pub fn sequencing_scenario(schedule: Vec<Intervention>) -> PolicyScenario {
    let params = ModelParams { peer_benefit: 0.1, norm_penalty: 0.1, deviance_cost: 0.6, ..ModelParams::reference() };
    let start = SimplexState::new(0.02, 0.93, 0.05).expect("valid start");
    PolicyScenario {
        params,
        trust: Some(TrustParams::reference()),
        initial: FullState::initial(start, &params).with_belief(0.2),
        schedule,
        coordination: true,
        seed_source: SeedSource::Proportional,
    }
}

/// The four interventions in canonical order: trust first, culture second,
/// seeding third, embedding support last.
pub fn canonical_schedule() -> Vec<Intervention> {
    vec![
        Intervention::new(InterventionKind::TrustFix, 0.0, 400.0, 1.0),
        Intervention::new(InterventionKind::CulturePrep, 10.0, 400.0, 0.9),
        Intervention::new(InterventionKind::Seed, 20.0, 0.0, 0.6),
        Intervention::new(InterventionKind::EmbedSupport, 21.0, 20.0, 1.0),
    ]
}

/// Same interventions and magnitudes with the seed moved to the front.
pub fn seed_first_schedule() -> Vec<Intervention> {
    vec![
        Intervention::new(InterventionKind::Seed, 0.0, 0.0, 0.6),
        Intervention::new(InterventionKind::TrustFix, 10.0, 400.0, 1.0),
        Intervention::new(InterventionKind::CulturePrep, 20.0, 400.0, 0.9),
        Intervention::new(InterventionKind::EmbedSupport, 21.0, 20.0, 1.0),
    ]
}

pub fn sequencing() -> CriterionResult {
    timed(9, "sequencing", |c| {
        let cfg = IntegrationConfig::default().with_t_max(PILOT_T_MAX);
        for (label, schedule, target) in [
            ("canonical order", canonical_schedule(), Strategy::Genuine),
            ("seed first", seed_first_schedule(), Strategy::Partial),
        ] {
            match run_scenario(&sequencing_scenario(schedule), &cfg) {
                Ok(o) => c.check(
                    o.trajectory.converged_to == Some(target),
                    format!("{label} -> {:?}", o.trajectory.converged_to.map(|s| s.symbol())),
                ),
                Err(e) => c.check(false, format!("{label} failed: {e}")),
            }
        }
    })
}

fn final_at(start: SimplexState, until: f64, step: f64) -> Result<FullState, String> {
    let p = ModelParams::reference();
    let env = Environment::new(p);
    let cfg = IntegrationConfig::default().with_step(step);
    let mut sim = Simulation::new(FullState::initial(start, &p), &env, cfg, Flags::default()).map_err(|e| e.to_string())?;
    sim.advance(&env, until, false).map_err(|e| e.to_string())?;
    Ok(sim.state())
}

fn scratch_dir(tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    std::env::temp_dir().join(format!("adoptlab-{tag}-{}-{nanos}", std::process::id()))
}

/// Run `simulate`, feed its manifest back in, and compare every CSV.
pub fn manifest_round_trip(config_text: &str) -> Result<usize, String> {
    let root = scratch_dir("roundtrip");
    let result = (|| {
        std::fs::create_dir_all(&root).map_err(|e| e.to_string())?;
        let cfg_path = root.join("config.json");
        std::fs::write(&cfg_path, config_text).map_err(|e| e.to_string())?;
        let (a, b) = (root.join("first"), root.join("second"));
        let code = crate::run::run_with(Command::Simulate, Some(&cfg_path), Some(&a), false);
        if code != 0 {
            return Err(format!("first run exited {code}"));
        }
        let code = crate::run::run_with(Command::Simulate, Some(&a.join(crate::run::MANIFEST)), Some(&b), false);
        if code != 0 {
            return Err(format!("manifest rerun exited {code}"));
        }
        compare_csvs(&a, &b)
    })();
    let _ = std::fs::remove_dir_all(&root);
    result
}

fn compare_csvs(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err("no CSV outputs".into());
    }
    for n in &names {
        let x = std::fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{}: {e}", n.to_string_lossy()))?;
        if x != y {
            return Err(format!("{} differs", n.to_string_lossy()));
        }
    }
    Ok(names.len())
}

pub const ROUND_TRIP_CONFIG: &str = r#"{
  "params": { "lambda": 0.2 },
  "flags": { "trust": true },
  "initial": { "xG": 0.5, "xP": 0.45, "xR": 0.05 },
  "integration": { "tMax": 200.0 }
}"#;

pub fn hygiene() -> CriterionResult {
    timed(10, "numerical hygiene", |c| {
        let p = ModelParams::reference();
        let env = Environment::new(p);
        let starts = [
            SimplexState::new(0.1, 0.8, 0.1).expect("valid"),
            SimplexState::new(0.5, 0.45, 0.05).expect("valid"),
            SimplexState::new(0.3, 0.3, 0.4).expect("valid"),
        ];
        for renormalize in [true, false] {
            let cfg = IntegrationConfig { renormalize, ..IntegrationConfig::default() };
            let mut worst: f64 = 0.0;
            for s in starts {
                let traj = integrate(FullState::initial(s, &p), &env, &cfg, &Flags::default());
                match traj {
                    Ok(t) => worst = worst.max(t.diagnostics.max_simplex_drift),
                    Err(_) => worst = f64::INFINITY,
                }
            }
            c.check(
                worst <= SIMPLEX_DRIFT,
                format!("simplex drift {worst:.1e} over tMax=200 (renormalize {renormalize})"),
            );
        }
        let mut worst: f64 = 0.0;
        for s in starts {
            match (final_at(s, 20.0, 0.01), final_at(s, 20.0, 0.005)) {
                (Ok(a), Ok(b)) => {
                    let (x, y) = (a.simplex.as_array(), b.simplex.as_array());
                    let d = (0..3).map(|i| (x[i] - y[i]).abs()).fold((a.cost - b.cost).abs(), f64::max);
                    worst = worst.max(d);
                }
                _ => worst = f64::INFINITY,
            }
        }
        c.check(worst < STEP_HALVING, format!("step halving moves final state by {worst:.1e}"));
        match manifest_round_trip(ROUND_TRIP_CONFIG) {
            Ok(n) => c.check(true, format!("manifest round trip reproduces {n} CSV files")),
            Err(e) => c.check(false, format!("manifest round trip: {e}")),
        }
    })
}
