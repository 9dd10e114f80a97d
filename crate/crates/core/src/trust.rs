//! The organisation's trust game.
//!
//! After gains `V` are realised the organisation picks actual sharing
//! `α_actual ≤ α̂` to maximise `(1 − α_actual)V − κ(α̂ − α_actual)`. With the
//! quadratic reputational cost `κ(Δ) = ½κ₂Δ²` the first-order condition
//! `κ'(Δ) = V` gives `Δ = V/κ₂`, clipped to the feasible set `[0, α̂]`.

use crate::dynamics::{integrate, DynamicsError, Environment, Flags, IntegrationConfig};
use crate::equilibria::{comparative_statics, EquilibriumError, DEFAULT_RELATIVE_STEP};
use crate::model::{effective_adoption, FullState, ModelParams, Strategy, TrustParams};

/// Optimal reneging and the share actually paid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reneging {
    pub delta: f64,
    pub alpha_actual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TrustError {
    #[error("optimal reneging {delta} sits on the boundary of [0, {announced}]; derivative is zero there")]
    AtBoundary { delta: f64, announced: f64 },
}

pub fn optimal_reneging(tp: &TrustParams) -> Reneging {
    let delta = (tp.realised_gain / tp.curvature).clamp(0.0, tp.announced);
    Reneging {
        delta,
        alpha_actual: tp.announced - delta,
    }
}

/// Organisation payoff for a given actual sharing level.
pub fn organisation_payoff(tp: &TrustParams, alpha_actual: f64) -> f64 {
    (1.0 - alpha_actual) * tp.realised_gain - tp.reputational_cost(tp.announced - alpha_actual)
}

/// `dΔ/dV = 1/κ''(Δ)` at an interior optimum.
pub fn reneging_sensitivity(tp: &TrustParams) -> Result<f64, TrustError> {
    let raw = tp.realised_gain / tp.curvature;
    if raw <= 0.0 || raw >= tp.announced {
        let r = optimal_reneging(tp);
        return Err(TrustError::AtBoundary {
            delta: r.delta,
            announced: tp.announced,
        });
    }
    Ok(1.0 / tp.curvature)
}

/// Discount factor `β* = V / (V + κ)` above which the organisation keeps its
/// commitment in the repeated game.
pub fn beta_star(gain: f64, linear_cost: f64) -> f64 {
    gain / (gain + linear_cost)
}

/// Grim-trigger defection test: defects iff `β < β*`.
pub fn will_defect(gain: f64, linear_cost: f64, discount: f64) -> bool {
    discount < beta_star(gain, linear_cost)
}

/// Per-episode belief downgrade: the configured value, or `α̂ − α_actual`
/// evaluated at `V = B`.
pub fn belief_erosion(params: &ModelParams, tp: &TrustParams) -> f64 {
    tp.belief_erosion.unwrap_or_else(|| {
        let at_b = TrustParams {
            realised_gain: params.systemic_value,
            ..*tp
        };
        optimal_reneging(&at_b).delta
    })
}

/// Trust–cost threshold and its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaStar {
    pub theta: f64,
    /// `∂x_G*/∂α` (negative).
    pub d_appropriability: f64,
    /// `∂x_G*/∂c` (positive).
    pub d_cost: f64,
    pub belief_erosion: f64,
    /// `δ/λ`; infinite when beliefs never update.
    pub decay_ratio: f64,
    pub ratchet_beneficial: bool,
}

/// Ratio threshold above which repeated failed attempts help: compares the
/// tipping-point shift from one unit of cost decay with the shift from one
/// unit of belief erosion.
pub fn theta_star(params: &ModelParams, tp: &TrustParams, cost: f64) -> Result<ThetaStar, EquilibriumError> {
    let cs = comparative_statics(params, cost, DEFAULT_RELATIVE_STEP)?;
    let erosion = belief_erosion(params, tp);
    let theta = (cs.d_appropriability.abs() / cs.d_cost_gap) * (erosion / params.genuine_cost);
    let decay_ratio = if params.belief_rate == 0.0 {
        f64::INFINITY
    } else {
        params.embedding_rate / params.belief_rate
    };
    Ok(ThetaStar {
        theta,
        d_appropriability: cs.d_appropriability,
        d_cost: cs.d_cost_gap,
        belief_erosion: erosion,
        decay_ratio,
        ratchet_beneficial: decay_ratio > theta,
    })
}

/// Summary of the trust game at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustReport {
    pub delta_opt: f64,
    pub alpha_actual: f64,
    pub beta_star: f64,
    pub will_defect: bool,
    /// `None` outside the bistable regime, where the tipping point is undefined.
    pub theta_star: Option<f64>,
    pub ratchet_beneficial: Option<bool>,
}

pub fn trust_report(params: &ModelParams, tp: &TrustParams, cost: f64) -> TrustReport {
    let r = optimal_reneging(tp);
    let theta = theta_star(params, tp, cost).ok();
    TrustReport {
        delta_opt: r.delta,
        alpha_actual: r.alpha_actual,
        beta_star: beta_star(tp.realised_gain, tp.linear_cost),
        will_defect: will_defect(tp.realised_gain, tp.linear_cost, tp.discount),
        theta_star: theta.map(|t| t.theta),
        ratchet_beneficial: theta.map(|t| t.ratchet_beneficial),
    }
}

/// Self-confirming trust trap: beliefs are too low for genuine adoption to
/// ever beat partial adoption (`α·B ≤` cost gap), the run ends at the partial
/// corner without effective adoption ever reaching the threshold, and so the
/// belief is never revised.
pub fn detect_trust_trap(
    initial: FullState,
    params: &ModelParams,
    tp: &TrustParams,
    config: &IntegrationConfig,
) -> Result<bool, DynamicsError> {
    let low = initial.belief * params.systemic_value <= params.adoption_gap(initial.cost);
    if !low {
        return Ok(false);
    }
    if effective_adoption(&initial.simplex, params.partial_weight) > params.threshold {
        return Ok(false);
    }
    let env = Environment::new(*params).with_trust(tp);
    let flags = Flags::default().with_trust(true);
    let traj = integrate(initial, &env, config, &flags)?;
    Ok(traj.converged_to == Some(Strategy::Partial)
        && traj.events.is_empty()
        && traj.final_state.belief == initial.belief)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SimplexState;

    fn tp(v: f64, k2: f64, announced: f64) -> TrustParams {
        TrustParams {
            announced,
            curvature: k2,
            realised_gain: v,
            ..TrustParams::reference()
        }
    }

    #[test]
    fn reneging_examples() {
        let r = optimal_reneging(&tp(0.0, 4.0, 0.5));
        assert_eq!((r.delta, r.alpha_actual), (0.0, 0.5));
        let r = optimal_reneging(&tp(1.0, 4.0, 0.5));
        assert_eq!((r.delta, r.alpha_actual), (0.25, 0.25));
        let r = optimal_reneging(&tp(1e9, 4.0, 0.5));
        assert_eq!((r.delta, r.alpha_actual), (0.5, 0.0));
    }

    #[test]
    fn sensitivity_matches_finite_difference() {
        let t = tp(1.0, 4.0, 0.5);
        let s = reneging_sensitivity(&t).unwrap();
        assert_eq!(s, 0.25);
        let h = 1e-6;
        let fd = (optimal_reneging(&tp(1.0 + h, 4.0, 0.5)).delta - optimal_reneging(&tp(1.0 - h, 4.0, 0.5)).delta)
            / (2.0 * h);
        assert!((fd - s).abs() / s < 1e-6);
        assert!(matches!(
            reneging_sensitivity(&tp(10.0, 4.0, 0.5)),
            Err(TrustError::AtBoundary { .. })
        ));
    }

    #[test]
    fn beta_star_examples() {
        assert_eq!(beta_star(1.0, 1.0), 0.5);
        assert_eq!(beta_star(0.0, 1.0), 0.0);
        let (v, k, h) = (1.3, 0.7, 1e-6);
        let fd = (beta_star(v + h, k) - beta_star(v - h, k)) / (2.0 * h);
        assert!((fd - k / ((v + k) * (v + k))).abs() < 1e-8);
    }

    #[test]
    fn defection_examples() {
        assert!(!will_defect(1.0, 1.0, 0.6));
        assert!(will_defect(1.0, 1.0, 0.4));
        assert!(!will_defect(0.0, 1.0, 0.01));
        assert!(!will_defect(1.0, 1.0, 0.5));
    }

    #[test]
    fn theta_limits() {
        let mut p = ModelParams::reference();
        let t = TrustParams::reference();
        p.belief_rate = 0.0;
        assert!(theta_star(&p, &t, 1.0).unwrap().ratchet_beneficial);
        p.belief_rate = 0.1;
        p.embedding_rate = 1e-9;
        assert!(!theta_star(&p, &t, 1.0).unwrap().ratchet_beneficial);
    }

    #[test]
    fn trust_trap_cases() {
        let p = ModelParams::reference();
        let t = TrustParams::reference();
        let cfg = IntegrationConfig::default();
        let s = SimplexState::new(0.1, 0.8, 0.1).unwrap();
        let low = FullState::initial(s, &p).with_belief(0.05);
        assert!(detect_trust_trap(low, &p, &t, &cfg).unwrap());

        let fixed = FullState::initial(s, &p).with_belief(t.announced);
        assert!(!detect_trust_trap(fixed, &p, &t, &cfg).unwrap());

        let above = FullState::initial(SimplexState::new(0.7, 0.3, 0.0).unwrap(), &p).with_belief(0.7);
        assert!(!detect_trust_trap(above, &p, &t, &cfg).unwrap());
    }
}
