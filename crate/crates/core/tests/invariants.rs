use adoptlab_core::basins::{map_basins, Sequential};
use adoptlab_core::dynamics::{integrate, replicator_rhs};
use adoptlab_core::equilibria::tipping_point;
use adoptlab_core::model::{mean_fitness, payoffs, systemic_benefit};
use adoptlab_core::policy::{subsidy, welfare};
use adoptlab_core::trust::{beta_star, optimal_reneging, organisation_payoff};
use adoptlab_core::{Environment, Flags, FullState, IntegrationConfig, ModelParams, SimplexState, TrustParams};
use proptest::prelude::*;

fn simplex() -> impl Strategy<Value = SimplexState> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        SimplexState::new(lo, hi - lo, 1.0 - hi).unwrap_or(SimplexState::corner(adoptlab_core::Strategy::Partial))
    })
}

fn params() -> impl Strategy<Value = ModelParams> {
    (
        (0.3f64..2.0, 0.05f64..0.3, 0.0f64..0.3, 0.0f64..0.6),
        (0.5f64..4.0, 0.2f64..0.95, 0.0f64..0.6, 0.3f64..0.8, 5.0f64..40.0),
        (0.0f64..0.3, 0.0f64..0.3, 0.0f64..0.3),
    )
        .prop_filter_map("ordering", |((c0, cp, bg, extra), (b, a, g, th, k), (pg, pp, pd))| {
            let p = ModelParams {
                genuine_cost: c0,
                partial_cost: cp,
                genuine_benefit: bg,
                partial_benefit: cp + bg + extra + 0.01,
                systemic_value: b,
                appropriability: a,
                partial_weight: g,
                threshold: th,
                steepness: k,
                peer_benefit: pg,
                norm_penalty: pp,
                deviance_cost: pd,
                ..ModelParams::reference()
            };
            p.validated().ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn replicator_field_is_tangent(s in simplex(), p in params(), coord in any::<bool>()) {
        let d = replicator_rhs(&s, p.genuine_cost, p.appropriability, &p, coord);
        prop_assert!((d[0] + d[1] + d[2]).abs() < 1e-12);
        let f = payoffs(&s, p.genuine_cost, p.appropriability, &p, coord);
        let fbar = mean_fitness(&s, &f);
        let x = s.as_array();
        let weighted = x[0] * (f.genuine - fbar) + x[1] * (f.partial - fbar) + x[2] * (f.reject - fbar);
        prop_assert!(weighted.abs() < 1e-12);
    }

    #[test]
    fn benefit_is_monotone(p in params(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(systemic_benefit(lo, &p) <= systemic_benefit(hi, &p));
    }

    #[test]
    fn trajectories_stay_on_simplex_and_ratchet_down(s in simplex(), p in params()) {
        let cfg = IntegrationConfig { step: 0.05, t_max: 60.0, ..Default::default() };
        let env = Environment::new(p);
        let t = integrate(FullState::initial(s, &p), &env, &cfg, &Flags::default().with_coordination(true)).unwrap();
        prop_assert!(t.diagnostics.max_simplex_drift <= 1e-9);
        prop_assert!(t.cost_is_monotone());
        for smp in &t.samples {
            prop_assert!(smp.state.simplex.as_array().iter().all(|&v| v >= 0.0));
        }
        for w in t.events.windows(2) {
            prop_assert!(w[0].kind != w[1].kind);
            prop_assert!(w[0].time <= w[1].time);
        }
    }

    #[test]
    fn tipping_root_residual(p in params()) {
        if let Ok(t) = tipping_point(&p, p.genuine_cost) {
            prop_assert!(t.residual.abs() < 1e-10);
            prop_assert!(t.genuine > 0.0 && t.genuine < 1.0);
        }
    }

    #[test]
    fn reneging_beats_dense_scan(v in 0.0f64..5.0, k2 in 0.5f64..10.0, a in 0.05f64..1.0) {
        let tp = TrustParams { announced: a, curvature: k2, realised_gain: v, ..TrustParams::reference() };
        let best = optimal_reneging(&tp);
        let opt = organisation_payoff(&tp, best.alpha_actual);
        for i in 0..=2000 {
            let alpha = a * i as f64 / 2000.0;
            prop_assert!(organisation_payoff(&tp, alpha) <= opt + 1e-9);
        }
    }

    #[test]
    fn beta_star_monotone(v in 0.01f64..10.0, k in 0.01f64..10.0) {
        prop_assert!(beta_star(v * 1.01, k) > beta_star(v, k));
        prop_assert!(beta_star(v, k * 1.01) < beta_star(v, k));
    }

    #[test]
    fn welfare_identity(p in params(), s in simplex()) {
        let w = welfare(&p, &s);
        let expected = p.appropriability * p.systemic_value + p.genuine_benefit - p.partial_benefit + p.partial_cost;
        prop_assert!((w.delta_w - expected).abs() < 1e-12);
        prop_assert!((w.total_loss - p.population * expected).abs() < 1e-12);
    }

    #[test]
    fn subsidy_closes_the_gap(p in params(), s in simplex()) {
        let e = s.genuine() + p.partial_weight * s.partial();
        let f = payoffs(&s, p.genuine_cost, p.appropriability, &p, false);
        let sub = subsidy(e, &p, p.genuine_cost);
        prop_assert!(f.genuine + sub - f.partial >= -1e-9);
    }
}

#[test]
fn basin_maps_are_deterministic() {
    let p = ModelParams::reference();
    let cfg = IntegrationConfig { step: 0.05, ..Default::default() };
    let a = map_basins(&p, 1.0, 10, &cfg, false).unwrap();
    let b = adoptlab_core::basins::map_basins_with(&Sequential, &p, 1.0, 10, &cfg, false).unwrap();
    assert_eq!(a, b);
}

#[test]
fn doubling_resolution_is_area_consistent() {
    let p = ModelParams::reference();
    let cfg = IntegrationConfig { step: 0.05, ..Default::default() };
    let a = map_basins(&p, 1.0, 20, &cfg, false).unwrap();
    let b = map_basins(&p, 1.0, 40, &cfg, false).unwrap();
    assert!((a.measure_genuine() - b.measure_genuine()).abs() < 2.0 / 20.0);
}
