//! Command dispatch: one function per subcommand, each writing its CSV
//! tables into the output directory.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use adoptlab_core::basins::{basin_measure_sweep, map_basins_with};
use adoptlab_core::dynamics::{integrate, Trajectory};
use adoptlab_core::equilibria::{
    comparative_statics, edge_equilibrium, equilibria, gamma_profile, rho_critical, rho_grid, rho_sweep,
    tipping_point, DEFAULT_RELATIVE_STEP,
};
use adoptlab_core::model::effective_adoption;
use adoptlab_core::policy::{
    critical_excursion, default_excursion_state, run_scenario, seeding_fraction, subsidy, value_adoption_curve,
    DEFAULT_SEED_MARGIN,
};
use adoptlab_core::trust::{
    belief_erosion, detect_trust_trap, optimal_reneging, reneging_sensitivity, theta_star, trust_report,
};
use adoptlab_core::{Environment, FullState, SimplexState};
use serde_json::json;

use crate::config::{parse_config, Command, RunConfig};
use crate::error::CliError;
use crate::output::{flag, num, opt, OutputDir, Table};
use crate::parallel::Parallel;
use crate::verify;

pub const MANIFEST: &str = "manifest.json";
pub const FAILURE: &str = "failure.json";
pub const DEFAULT_OUT: &str = "out";

/// What a successful dispatch reports back.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Checks that ran but did not pass (verify-all only).
    pub failed_checks: usize,
    pub lines: Vec<String>,
}

/// Resolve the output directory: `--out`, then `outputDir`, then `out`.
pub fn output_dir(cfg: &RunConfig, cli_out: Option<&Path>) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Full run from a config path: parse, validate, dispatch, write outputs,
/// manifest and (on failure) a failure record. Returns the exit code.
pub fn run(command: Command, config_path: Option<&Path>, cli_out: Option<&Path>) -> i32 {
    run_with(command, config_path, cli_out, true)
}

/// As [`run`]; with `echo` off the per-command summary lines are not printed.
pub fn run_with(command: Command, config_path: Option<&Path>, cli_out: Option<&Path>, echo: bool) -> i32 {
    let cfg = match load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let dir = output_dir(&cfg, cli_out);
    let started = Instant::now();
    let mut out = match OutputDir::create(&dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = cfg.validate(command).and_then(|_| execute(command, &cfg, &mut out));
    let elapsed = started.elapsed().as_secs_f64();
    if let Err(e) = write_manifest(&mut out, command, &cfg, elapsed) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match result {
        Ok(outcome) => {
            if echo {
                for line in &outcome.lines {
                    println!("{line}");
                }
            }
            if outcome.failed_checks > 0 {
                eprintln!("{} check(s) failed", outcome.failed_checks);
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let record = json!({ "kind": e.kind(), "message": e.to_string(), "exitCode": e.exit_code() });
            if let Err(w) = out.json(FAILURE, &record) {
                eprintln!("error: {w}");
            }
            e.exit_code()
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config(&text)
        }
    }
}

/// The resolved config with every default, the command and provenance.
pub fn manifest_value(command: Command, cfg: &RunConfig, wall_clock: f64) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serialises");
    let map = v.as_object_mut().expect("config is an object");
    map.insert("command".into(), json!(command.to_string()));
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64() - wall_clock)
        .unwrap_or(0.0);
    map.insert(
        "provenance".into(),
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "startedUnixSeconds": started,
            "wallClockSeconds": wall_clock,
        }),
    );
    v
}

fn write_manifest(out: &mut OutputDir, command: Command, cfg: &RunConfig, wall_clock: f64) -> Result<(), CliError> {
    let v = manifest_value(command, cfg, wall_clock);
    out.json(MANIFEST, &v)
}

pub fn execute(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate => simulate(cfg, out),
        Command::Basins => basins(cfg, out),
        Command::Equilibria => equilibria_cmd(cfg, out),
        Command::SweepRho => sweep_rho(cfg, out),
        Command::Trust => trust(cfg, out),
        Command::Policy => policy(cfg, out),
        Command::VerifyAll => verify_all(out),
    }
}

fn trajectory_tables(traj: &Trajectory, partial_weight: f64) -> (Table, Table, Table) {
    let mut t = Table::new(&["t", "xG", "xP", "xR", "c", "alphaBelief", "e", "inExcursion"]);
    for s in &traj.samples {
        let x = s.state.simplex.as_array();
        t.push(vec![
            num(s.state.time),
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(s.state.cost),
            num(s.state.belief),
            num(effective_adoption(&s.state.simplex, partial_weight)),
            flag(s.in_excursion),
        ]);
    }
    let mut ev = Table::new(&["t", "kind"]);
    for e in &traj.events {
        ev.push(vec![num(e.time), e.kind.as_str().to_string()]);
    }
    let mut ex = Table::new(&["start", "end", "duration"]);
    for e in &traj.excursions {
        ex.push(vec![num(e.start), num(e.end), num(e.duration())]);
    }
    (t, ev, ex)
}

fn trajectory_summary(traj: &Trajectory) -> Vec<(&'static str, String)> {
    let f = traj.final_state;
    let x = f.simplex.as_array();
    vec![
        ("classification", traj.classification.as_str().to_string()),
        ("convergedTo", traj.converged_to.map(|s| s.symbol().to_string()).unwrap_or_default()),
        ("convergenceTime", opt(traj.convergence_time)),
        ("finalTime", num(f.time)),
        ("finalXG", num(x[0])),
        ("finalXP", num(x[1])),
        ("finalXR", num(x[2])),
        ("finalCost", num(f.cost)),
        ("finalBelief", num(f.belief)),
        ("excursions", traj.excursions.len().to_string()),
        ("costMonotone", flag(traj.cost_is_monotone())),
        ("maxSimplexDrift", num(traj.diagnostics.max_simplex_drift)),
        ("minRawComponent", num(traj.diagnostics.min_raw_component)),
        ("steps", traj.diagnostics.steps.to_string()),
    ]
}

fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let params = cfg.params.to_model()?;
    let initial = cfg.initial.to_state(&params)?;
    let config = cfg.integration.to_config()?;
    let flags = cfg.flags.to_flags();
    let mut env = Environment::new(params);
    if flags.trust {
        env = env.with_trust(&cfg.trust.to_trust()?);
    }
    let traj = integrate(initial, &env, &config, &flags)?;
    let (t, ev, ex) = trajectory_tables(&traj, params.partial_weight);
    out.table("trajectory.csv", &t)?;
    out.table("events.csv", &ev)?;
    out.table("excursions.csv", &ex)?;
    out.table("summary.csv", &Table::record(trajectory_summary(&traj)))?;
    Ok(Outcome {
        failed_checks: 0,
        lines: vec![format!(
            "simulate: {} ({} excursions), final state {:?}",
            traj.classification.as_str(),
            traj.excursions.len(),
            traj.final_state.simplex.as_array()
        )],
    })
}

fn basins(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let params = cfg.params.to_model()?;
    let config = cfg.integration.to_config()?;
    let cost = cfg.basins.cost.unwrap_or(params.genuine_cost);
    let coordination = cfg.flags.coordination;
    let res = cfg.basins.resolution;
    let map = map_basins_with(&Parallel, &params, cost, res, &config, coordination)?;

    let mut cells = Table::new(&["xG", "xP", "label", "timeToConverge"]);
    for (c, o) in map.cells.iter().zip(&map.outcomes) {
        cells.push(vec![
            num(c.centroid.genuine()),
            num(c.centroid.partial()),
            o.label.as_str().to_string(),
            opt(o.time),
        ]);
    }
    out.table("basins.csv", &cells)?;
    let mut sep = Table::new(&["xG", "xP", "xR"]);
    for s in &map.separatrix {
        sep.push(vec![num(s.genuine()), num(s.partial()), num(s.reject())]);
    }
    out.table("separatrix.csv", &sep)?;
    let tip = if coordination { edge_equilibrium(&params, cost) } else { tipping_point(&params, cost) };
    out.table(
        "basin_summary.csv",
        &Table::record(vec![
            ("resolution", res.to_string()),
            ("cost", num(cost)),
            ("measureG", num(map.measure_genuine())),
            ("measureP", num(map.measure_partial())),
            ("measureUnclassified", num(map.measure_unclassified())),
            ("unclassifiedCells", map.unclassified_count().to_string()),
            ("gpEdgeIntercept", opt(map.gp_edge_intercept())),
            ("tippingPoint", opt(tip.ok().map(|t| t.genuine))),
        ]),
    )?;
    let mut lines = vec![format!(
        "basins: measureG {} measureP {} unclassified {}",
        map.measure_genuine(),
        map.measure_partial(),
        map.unclassified_count()
    )];

    if let Some(var) = cfg.sweep.variable()? {
        let table = basin_measure_sweep(&Parallel, &params, cost, var, &cfg.sweep.values, res, &config, coordination)?;
        let mut t = Table::new(&[
            "value",
            "measureG",
            "measureP",
            "measureUnclassified",
            "unclassifiedCells",
            "meanTimeG",
            "meanTimeP",
            "commonTimeG",
            "commonTimeP",
            "edgeTimeG",
            "edgeTimeP",
        ]);
        for r in &table.rows {
            t.push(vec![
                num(r.value),
                num(r.measure_genuine),
                num(r.measure_partial),
                num(r.measure_unclassified),
                r.unclassified.to_string(),
                opt(r.mean_time_genuine),
                opt(r.mean_time_partial),
                opt(r.common_time_genuine),
                opt(r.common_time_partial),
                opt(r.edge_time_genuine),
                opt(r.edge_time_partial),
            ]);
        }
        out.table("basin_sweep.csv", &t)?;
        out.table(
            "basin_sweep_summary.csv",
            &Table::record(vec![
                ("variable", var.name().to_string()),
                ("measureGNonIncreasing", flag(table.measure_genuine_non_increasing())),
                ("commonTimeGDecreasing", flag(table.genuine_times_decreasing())),
                ("commonTimePDecreasing", flag(table.partial_times_decreasing())),
                ("edgeTimeGDecreasing", flag(table.edge_genuine_times_decreasing())),
                ("edgeTimePDecreasing", flag(table.edge_partial_times_decreasing())),
            ]),
        )?;
        lines.push(format!(
            "sweep {}: measureG non-increasing = {}",
            var.name(),
            table.measure_genuine_non_increasing()
        ));
    }
    Ok(Outcome { failed_checks: 0, lines })
}

fn equilibria_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let params = cfg.params.to_model()?;
    let cost = params.genuine_cost;
    let coordination = cfg.flags.coordination;
    let eqs = equilibria(&params, cost, coordination);
    let mut t = Table::new(&["kind", "xG", "xP", "xR", "eigenvalue1", "eigenvalue2", "stability"]);
    let mut conds = Table::new(&["kind", "condition", "holds"]);
    for e in &eqs {
        let x = e.location.as_array();
        t.push(vec![
            e.kind.as_str().to_string(),
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(e.eigenvalues[0]),
            num(e.eigenvalues[1]),
            e.stability.as_str().to_string(),
        ]);
        for c in &e.checks {
            conds.push(vec![e.kind.as_str().to_string(), c.name.to_string(), flag(c.holds)]);
        }
    }
    out.table("equilibria.csv", &t)?;
    out.table("conditions.csv", &conds)?;

    let mut tip = Vec::new();
    match tipping_point(&params, cost) {
        Ok(tp) => {
            tip.push(("status", "ok".to_string()));
            tip.push(("xGStar", num(tp.genuine)));
            tip.push(("effectiveAdoption", num(tp.effective)));
            tip.push(("residual", num(tp.residual)));
            let cs = comparative_statics(&params, cost, DEFAULT_RELATIVE_STEP)?;
            tip.push(("dAlpha", num(cs.d_appropriability)));
            tip.push(("dB", num(cs.d_value)));
            tip.push(("dCostGap", num(cs.d_cost_gap)));
            tip.push(("dBenefitGap", num(cs.d_benefit_gap)));
            tip.push(("dGamma", num(cs.d_partial_weight)));
            tip.push(("expectedSignsHold", flag(cs.expected_signs_hold())));
        }
        Err(e) => {
            tip.push(("status", "no_root".to_string()));
            tip.push(("message", e.to_string()));
        }
    }
    out.table("tipping_point.csv", &Table::record(tip))?;

    let gammas: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
    let prof = gamma_profile(&params, cost, &gammas, coordination);
    let mut g = Table::new(&["gamma", "xGStar"]);
    for (gamma, x) in &prof.points {
        g.push(vec![num(*gamma), opt(*x)]);
    }
    out.table("gamma_profile.csv", &g)?;
    let stable: Vec<&str> = eqs
        .iter()
        .map(|e| e.stability.as_str())
        .collect();
    Ok(Outcome {
        failed_checks: 0,
        lines: vec![format!(
            "equilibria: {} rows, stabilities {:?}, gamma turning points {}",
            eqs.len(),
            stable,
            prof.turning_points.len()
        )],
    })
}

fn sweep_rho(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let base = cfg.params.validated_base()?;
    let config = cfg.integration.to_config()?;
    let step = cfg.rho.step;
    let rhos = rho_grid(step);
    let rows = rho_sweep(&base, &rhos, cfg.flags.coordination);
    let mut t = Table::new(&[
        "rho", "eStar", "alpha", "bG", "c0", "B", "eigenPToG", "partialStable", "genuineStable",
    ]);
    for r in &rows {
        t.push(vec![
            num(r.rho),
            num(r.params.threshold),
            num(r.params.appropriability),
            num(r.params.genuine_benefit),
            num(r.params.genuine_cost),
            num(r.params.systemic_value),
            num(r.partial_to_genuine),
            flag(r.partial_stable),
            flag(r.genuine_stable),
        ]);
    }
    out.table("rho_sweep.csv", &t)?;

    let start = SimplexState::from_genuine_partial(cfg.rho.start_x_g, cfg.rho.start_x_p)?;
    let curve = value_adoption_curve(&base, &rhos, start, &config)?;
    let mut v = Table::new(&[
        "rho", "B", "xG", "xP", "xR", "effectiveAdoption", "rawAdoptionRate", "deltaW", "totalLoss", "convergedTo",
    ]);
    for r in &curve.rows {
        let x = r.final_state.as_array();
        v.push(vec![
            num(r.rho),
            num(r.systemic_value),
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(r.effective_adoption),
            num(r.raw_adoption),
            num(r.delta_w),
            num(r.total_loss),
            r.converged_to.map(|s| s.symbol().to_string()).unwrap_or_default(),
        ]);
    }
    out.table("value_adoption.csv", &v)?;
    let crit = rho_critical(&base, step, cfg.flags.coordination);
    out.table(
        "rho_summary.csv",
        &Table::record(vec![
            ("rhoClosedForm", num(crit.closed_form)),
            ("rhoDetected", opt(crit.detected)),
            ("step", num(step)),
            ("agreesWithinStep", flag(crit.agrees())),
            ("lossDecreasingBelowCritical", flag(curve.loss_decreasing_below_critical())),
            ("correlationEffectiveVsValue", num(curve.correlation)),
        ]),
    )?;
    Ok(Outcome {
        failed_checks: 0,
        lines: vec![format!(
            "sweep-rho: closed form {} detected {:?}, correlation {}",
            crit.closed_form, crit.detected, curve.correlation
        )],
    })
}

fn trust(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let params = cfg.params.to_model()?;
    let tp = cfg.trust.to_trust()?;
    let config = cfg.integration.to_config()?;
    let cost = params.genuine_cost;
    let report = trust_report(&params, &tp, cost);
    let theta = theta_star(&params, &tp, cost).ok();
    let initial = cfg.initial.to_state(&params)?;
    let trap = detect_trust_trap(initial, &params, &tp, &config)?;
    let rec = vec![
        ("deltaOpt", num(report.delta_opt)),
        ("alphaActual", num(report.alpha_actual)),
        ("dDeltaDV", opt(reneging_sensitivity(&tp).ok())),
        ("betaStar", num(report.beta_star)),
        ("willDefect", flag(report.will_defect)),
        ("beliefErosion", num(belief_erosion(&params, &tp))),
        ("thetaStar", opt(report.theta_star)),
        ("decayRatio", opt(theta.map(|t| t.decay_ratio))),
        ("ratchetBeneficial", report.ratchet_beneficial.map(flag).unwrap_or_default()),
        ("trustTrap", flag(trap)),
    ];
    out.table("trust.csv", &Table::record(rec))?;
    let r = optimal_reneging(&tp);
    Ok(Outcome {
        failed_checks: 0,
        lines: vec![format!(
            "trust: reneging {} (actual share {}), beta* {}, trust trap {}",
            r.delta, r.alpha_actual, report.beta_star, trap
        )],
    })
}

fn policy(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let scenario = cfg.scenario()?;
    let config = cfg.integration.to_config()?;
    let params = scenario.params;
    let outcome = run_scenario(&scenario, &config)?;
    let traj = &outcome.trajectory;
    let (t, ev, ex) = trajectory_tables(traj, params.partial_weight);
    out.table("trajectory.csv", &t)?;
    out.table("events.csv", &ev)?;
    out.table("excursions.csv", &ex)?;
    let w = outcome.welfare;
    out.table(
        "welfare.csv",
        &Table::record(vec![
            ("deltaW", num(w.delta_w)),
            ("totalLoss", num(w.total_loss)),
            ("effectiveAdoption", num(w.effective_adoption)),
            ("rawAdoptionRate", num(w.raw_adoption)),
            ("socialOptimumPremise", flag(w.premise_holds)),
        ]),
    )?;
    if let Some(r) = outcome.trust {
        out.table(
            "trust.csv",
            &Table::record(vec![
                ("deltaOpt", num(r.delta_opt)),
                ("alphaActual", num(r.alpha_actual)),
                ("betaStar", num(r.beta_star)),
                ("willDefect", flag(r.will_defect)),
                ("thetaStar", opt(r.theta_star)),
                ("ratchetBeneficial", r.ratchet_beneficial.map(flag).unwrap_or_default()),
            ]),
        )?;
    }
    let mut pilots = Table::new(&["seed", "costBefore"]);
    for (i, c) in outcome.cost_before_seeds.iter().enumerate() {
        pilots.push(vec![i.to_string(), num(*c)]);
    }
    out.table("seeds.csv", &pilots)?;

    let e0 = effective_adoption(&scenario.initial.simplex, params.partial_weight);
    let seeding = seeding_fraction(&params, scenario.initial.cost, DEFAULT_SEED_MARGIN);
    let excursion_start = FullState::initial(default_excursion_state(&params), &params);
    let critical = critical_excursion(excursion_start, &params, &config);
    let mut rec = trajectory_summary(traj);
    rec.push(("subsidyAtStart", num(subsidy(e0, &params, scenario.initial.cost))));
    rec.push(("seedingFraction", seeding.as_ref().ok().map(|v| num(*v)).unwrap_or_default()));
    rec.push(("seedingNote", seeding.err().map(|e| e.to_string()).unwrap_or_default()));
    rec.push(("criticalExcursion", critical.as_ref().ok().map(|c| num(c.duration)).unwrap_or_default()));
    rec.push(("criticalExcursionNote", critical.err().map(|e| e.to_string()).unwrap_or_default()));
    out.table("policy_summary.csv", &Table::record(rec))?;
    Ok(Outcome {
        failed_checks: 0,
        lines: vec![format!(
            "policy: {} converged to {:?}, deltaW {}",
            traj.classification.as_str(),
            traj.converged_to.map(|s| s.symbol()),
            w.delta_w
        )],
    })
}

fn verify_all(out: &mut OutputDir) -> Result<Outcome, CliError> {
    let results = verify::run_all();
    let mut t = Table::new(&["criterion", "name", "passed", "seconds", "limitSeconds", "detail"]);
    let mut lines = Vec::new();
    for r in &results {
        t.push(vec![
            r.id.to_string(),
            r.name.to_string(),
            flag(r.passed()),
            num(r.elapsed.as_secs_f64()),
            num(r.limit.as_secs_f64()),
            r.detail.clone(),
        ]);
        lines.push(r.line());
    }
    out.table("verify.csv", &t)?;
    Ok(Outcome { failed_checks: results.iter().filter(|r| !r.passed()).count(), lines })
}
