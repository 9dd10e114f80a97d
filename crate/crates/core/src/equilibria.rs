//! Equilibria, their linear stability and the tipping point.
//!
//! At a replicator corner `i` the transverse eigenvalue toward strategy `j`
//! is the payoff difference `f_j − f_i` evaluated at the corner, so corner
//! stability reduces to payoff comparisons.

use alloc::vec::Vec;

use crate::model::{
    apply_rho, payoffs, systemic_benefit, systemic_benefit_slope, ModelParams, ParamError,
    SimplexState, Strategy,
};
use crate::root::{bisect, BracketError, Tolerance};

/// Relative step for the central differences used by comparative statics.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-4;
/// Derivatives smaller than this are reported but their sign is not asserted.
pub const SIGN_FLOOR: f64 = 1e-8;
/// Default resolution of the technology-type sweep.
pub const DEFAULT_RHO_STEP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    CornerG,
    CornerP,
    CornerR,
    EdgeGpInterior,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::CornerG => "corner_G",
            EquilibriumKind::CornerP => "corner_P",
            EquilibriumKind::CornerR => "corner_R",
            EquilibriumKind::EdgeGpInterior => "edge_GP_interior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
}

impl Stability {
    pub fn from_eigenvalues(ev: &[f64]) -> Self {
        if ev.iter().all(|&l| l < 0.0) {
            Stability::Stable
        } else if ev.iter().all(|&l| l > 0.0) {
            Stability::Unstable
        } else {
            Stability::Saddle
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Saddle => "saddle",
            Stability::Unstable => "unstable",
        }
    }
}

/// A named inequality from the corner-stability conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub location: SimplexState,
    pub kind: EquilibriumKind,
    /// Transverse eigenvalues. Corners list the directions in `G, P, R`
    /// order skipping the corner itself; the edge point lists the along-edge
    /// value then the direction toward `R`.
    pub eigenvalues: [f64; 2],
    pub stability: Stability,
    pub checks: Vec<ConditionCheck>,
}

/// Which strategy wins everywhere on the G–P edge when no tipping point
/// exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominant {
    Genuine,
    Partial,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("no tipping point on (0, 1): {dominant:?} adoption dominates along the G-P edge (residual {at_zero} at x_G = 0, {at_one} at x_G = 1)")]
    NoRoot {
        dominant: Dominant,
        at_zero: f64,
        at_one: f64,
    },
    #[error("root finding failed: {0}")]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

fn corner_checks(params: &ModelParams, cost: f64, corner: Strategy) -> Vec<ConditionCheck> {
    let p = params;
    let ab = p.appropriability * p.systemic_value;
    let mut v = Vec::new();
    match corner {
        Strategy::Reject => {
            v.push(ConditionCheck { name: "b_P > c_P", holds: p.partial_benefit > p.partial_cost });
            v.push(ConditionCheck { name: "b_G < c", holds: p.genuine_benefit < cost });
        }
        Strategy::Partial => {
            let smoothed = p.appropriability * systemic_benefit(p.partial_weight, p) + p.genuine_benefit - cost
                < p.partial_benefit - p.partial_cost;
            v.push(ConditionCheck { name: "b_P > c_P", holds: p.partial_benefit > p.partial_cost });
            v.push(ConditionCheck { name: "gamma < e*", holds: p.partial_weight < p.threshold });
            v.push(ConditionCheck { name: "alpha*Phi(gamma) + b_G - c < b_P - c_P", holds: smoothed });
        }
        Strategy::Genuine => {
            v.push(ConditionCheck {
                name: "alpha*B + b_G - c > b_P - c_P",
                holds: ab + p.genuine_benefit - cost > p.partial_benefit - p.partial_cost,
            });
            v.push(ConditionCheck { name: "alpha*B + b_G > c", holds: ab + p.genuine_benefit > cost });
        }
    }
    v.push(ConditionCheck {
        name: "alpha*B > (c - c_P) + (b_P - b_G)",
        holds: p.is_bistable_at(cost),
    });
    v
}

/// Linear stability of the three corners at cost `cost`.
pub fn corner_stability(params: &ModelParams, cost: f64, coordination: bool) -> Vec<EquilibriumReport> {
    Strategy::ALL
        .iter()
        .map(|&corner| {
            let s = SimplexState::corner(corner);
            let f = payoffs(&s, cost, params.appropriability, params, coordination);
            let fi = f.get(corner);
            let mut ev = [0.0; 2];
            let mut k = 0;
            for other in Strategy::ALL {
                if other != corner {
                    ev[k] = f.get(other) - fi;
                    k += 1;
                }
            }
            EquilibriumReport {
                location: s,
                kind: match corner {
                    Strategy::Genuine => EquilibriumKind::CornerG,
                    Strategy::Partial => EquilibriumKind::CornerP,
                    Strategy::Reject => EquilibriumKind::CornerR,
                },
                eigenvalues: ev,
                stability: Stability::from_eigenvalues(&ev),
                checks: corner_checks(params, cost, corner),
            }
        })
        .collect()
}

/// Corners plus the interior G–P edge equilibrium when it exists.
pub fn equilibria(params: &ModelParams, cost: f64, coordination: bool) -> Vec<EquilibriumReport> {
    let mut out = corner_stability(params, cost, coordination);
    let tip = if coordination {
        edge_equilibrium(params, cost)
    } else {
        tipping_point(params, cost)
    };
    if let Ok(t) = tip {
        let x = t.genuine;
        let s = SimplexState::on_gp_edge(x).expect("root lies in (0, 1)");
        let e = t.effective;
        let mut slope = params.appropriability * systemic_benefit_slope(e, params) * (1.0 - params.partial_weight);
        if coordination {
            slope += params.peer_benefit + params.deviance_cost + params.norm_penalty;
        }
        let f = payoffs(&s, cost, params.appropriability, params, coordination);
        let ev = [x * (1.0 - x) * slope, -f.partial];
        out.push(EquilibriumReport {
            location: s,
            kind: EquilibriumKind::EdgeGpInterior,
            eigenvalues: ev,
            stability: Stability::from_eigenvalues(&ev),
            checks: Vec::new(),
        });
    }
    out
}

/// The unstable G–P edge equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TippingPoint {
    /// `x_G*`.
    pub genuine: f64,
    /// Effective adoption at the tipping point.
    pub effective: f64,
    /// Residual of the defining balance at the returned root.
    pub residual: f64,
}

fn solve_edge<F: Fn(f64) -> f64>(residual: F, partial_weight: f64) -> Result<TippingPoint, EquilibriumError> {
    let (at_zero, at_one) = (residual(0.0), residual(1.0));
    if at_zero >= 0.0 {
        return Err(EquilibriumError::NoRoot { dominant: Dominant::Genuine, at_zero, at_one });
    }
    if at_one <= 0.0 {
        return Err(EquilibriumError::NoRoot { dominant: Dominant::Partial, at_zero, at_one });
    }
    let tol = Tolerance { residual: 1e-11, width: 0.0, max_iter: 200 };
    let root = bisect(&residual, 0.0, 1.0, tol)?;
    Ok(TippingPoint {
        genuine: root.x,
        effective: partial_weight + (1.0 - partial_weight) * root.x,
        residual: root.residual,
    })
}

/// Root of `αΦ(γ + (1 − γ)x) = (c − c_P) + (b_P − b_G)` on `(0, 1)`.
pub fn tipping_point(params: &ModelParams, cost: f64) -> Result<TippingPoint, EquilibriumError> {
    let gap = params.adoption_gap(cost);
    let g = params.partial_weight;
    solve_edge(
        |x| params.appropriability * systemic_benefit(g + (1.0 - g) * x, params) - gap,
        g,
    )
}

/// G–P edge equilibrium including the coordination terms: `f_G = f_P` with
/// `x_P = 1 − x_G`.
pub fn edge_equilibrium(params: &ModelParams, cost: f64) -> Result<TippingPoint, EquilibriumError> {
    let g = params.partial_weight;
    solve_edge(
        |x| {
            let s = SimplexState::from_array_unchecked([x, 1.0 - x, 0.0]);
            let f = payoffs(&s, cost, params.appropriability, params, true);
            f.genuine - f.partial
        },
        g,
    )
}

/// Central finite-difference sensitivities of `x_G*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparativeStatics {
    pub tipping: f64,
    pub d_appropriability: f64,
    pub d_value: f64,
    /// With respect to `c − c_P` (equivalently the current cost).
    pub d_cost_gap: f64,
    /// With respect to `b_P − b_G`.
    pub d_benefit_gap: f64,
    /// Reported without an expected sign.
    pub d_partial_weight: f64,
}

impl ComparativeStatics {
    /// Signs `(−, −, +, +)` for α, B, cost gap, benefit gap; derivatives
    /// below [`SIGN_FLOOR`] are not asserted.
    pub fn expected_signs_hold(&self) -> bool {
        let neg = |d: f64| d.abs() <= SIGN_FLOOR || d < 0.0;
        let pos = |d: f64| d.abs() <= SIGN_FLOOR || d > 0.0;
        neg(self.d_appropriability) && neg(self.d_value) && pos(self.d_cost_gap) && pos(self.d_benefit_gap)
    }
}

fn central<F>(base: f64, rel: f64, f: F) -> Result<f64, EquilibriumError>
where
    F: Fn(f64) -> Result<f64, EquilibriumError>,
{
    let h = if base == 0.0 { rel } else { rel * base.abs() };
    Ok((f(base + h)? - f(base - h)?) / (2.0 * h))
}

pub fn comparative_statics(params: &ModelParams, cost: f64, rel: f64) -> Result<ComparativeStatics, EquilibriumError> {
    let tip = |p: &ModelParams, c: f64| tipping_point(p, c).map(|t| t.genuine);
    let base = tip(params, cost)?;
    let d_appropriability = central(params.appropriability, rel, |v| {
        tip(&ModelParams { appropriability: v, ..*params }, cost)
    })?;
    let d_value = central(params.systemic_value, rel, |v| {
        tip(&ModelParams { systemic_value: v, ..*params }, cost)
    })?;
    let h_cost = rel * (cost - params.partial_cost).abs().max(rel);
    let d_cost_gap = (tip(params, cost + h_cost)? - tip(params, cost - h_cost)?) / (2.0 * h_cost);
    let gap = params.partial_benefit - params.genuine_benefit;
    let h_b = rel * gap.abs().max(rel);
    let d_benefit_gap = (tip(&ModelParams { partial_benefit: params.partial_benefit + h_b, ..*params }, cost)?
        - tip(&ModelParams { partial_benefit: params.partial_benefit - h_b, ..*params }, cost)?)
        / (2.0 * h_b);
    let d_partial_weight = central(params.partial_weight, rel, |v| {
        tip(&ModelParams { partial_weight: v, ..*params }, cost)
    })
    .unwrap_or(f64::NAN);
    Ok(ComparativeStatics {
        tipping: base,
        d_appropriability,
        d_value,
        d_cost_gap,
        d_benefit_gap,
        d_partial_weight,
    })
}

/// Tipping point along a grid of `γ` values.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProfile {
    /// `(γ, x_G*)`, with `None` where no tipping point exists.
    pub points: Vec<(f64, Option<f64>)>,
    /// Grid locations where the numerical derivative changes sign.
    pub turning_points: Vec<f64>,
}

impl GammaProfile {
    pub fn is_monotone(&self) -> bool {
        self.turning_points.is_empty()
    }
}

/// Sweep `γ` and report any sign change of the numerical derivative of the
/// tipping point, using coordination-aware edge balance when requested.
pub fn gamma_profile(params: &ModelParams, cost: f64, gammas: &[f64], coordination: bool) -> GammaProfile {
    let points: Vec<(f64, Option<f64>)> = gammas
        .iter()
        .map(|&g| {
            let p = ModelParams { partial_weight: g, ..*params };
            let t = if coordination { edge_equilibrium(&p, cost) } else { tipping_point(&p, cost) };
            (g, t.ok().map(|t| t.genuine))
        })
        .collect();
    let mut turning_points = Vec::new();
    let mut last_sign = 0i8;
    for w in points.windows(2) {
        if let ((g0, Some(x0)), (g1, Some(x1))) = (w[0], w[1]) {
            let d = (x1 - x0) / (g1 - g0);
            let sign = if d > SIGN_FLOOR {
                1
            } else if d < -SIGN_FLOOR {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    turning_points.push(g0);
                }
                last_sign = sign;
            }
        } else {
            last_sign = 0;
        }
    }
    GammaProfile { points, turning_points }
}

/// Critical technology type: closed form and sweep-detected value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoCritical {
    /// `1 − c_P / ((b_P − b_G⁰) + c0)`.
    pub closed_form: f64,
    /// Smallest swept `ρ` at which the partial corner is no longer stable.
    pub detected: Option<f64>,
    pub step: f64,
}

impl RhoCritical {
    pub fn agrees(&self) -> bool {
        self.detected
            .map(|d| (d - self.closed_form).abs() <= self.step)
            .unwrap_or(false)
    }
}

/// One row of the technology-type sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSweepRow {
    pub rho: f64,
    pub params: ModelParams,
    /// Eigenvalue at the partial corner toward genuine adoption.
    pub partial_to_genuine: f64,
    pub partial_stable: bool,
    pub genuine_stable: bool,
}

pub fn rho_closed_form(params: &ModelParams) -> f64 {
    1.0 - params.partial_cost / ((params.partial_benefit - params.genuine_benefit) + params.genuine_cost)
}

pub fn rho_grid(step: f64) -> Vec<f64> {
    let n = libm::round(1.0 / step) as usize;
    (0..=n).map(|i| (i as f64 * step).min(1.0)).collect()
}

/// Evaluate corner stability along a grid of technology types. Rows whose
/// derived parameters are invalid are skipped.
pub fn rho_sweep(base: &ModelParams, rhos: &[f64], coordination: bool) -> Vec<RhoSweepRow> {
    rhos.iter()
        .filter_map(|&rho| {
            let p = apply_rho(base, rho).ok()?;
            let reports = corner_stability(&p, p.genuine_cost, coordination);
            let partial = &reports[Strategy::Partial.index()];
            let genuine = &reports[Strategy::Genuine.index()];
            Some(RhoSweepRow {
                rho,
                params: p,
                partial_to_genuine: partial.eigenvalues[0],
                partial_stable: partial.stability == Stability::Stable,
                genuine_stable: genuine.stability == Stability::Stable,
            })
        })
        .collect()
}

pub fn rho_critical(base: &ModelParams, step: f64, coordination: bool) -> RhoCritical {
    let rows = rho_sweep(base, &rho_grid(step), coordination);
    RhoCritical {
        closed_form: rho_closed_form(base),
        detected: rows.iter().find(|r| !r.partial_stable).map(|r| r.rho),
        step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_corners() {
        let p = ModelParams::reference();
        let r = corner_stability(&p, p.genuine_cost, false);
        assert_eq!(r[0].stability, Stability::Stable);
        assert_eq!(r[1].stability, Stability::Stable);
        assert_eq!(r[2].stability, Stability::Saddle);
        assert!(r.iter().all(|e| e.checks.iter().all(|c| c.holds)));
        // 1.4 > 0.8 + 0.4
        assert!(p.is_bistable_at(1.0));
    }

    #[test]
    fn partial_corner_unstable_when_unprofitable() {
        let mut p = ModelParams::reference();
        p.partial_benefit = 0.15;
        p.genuine_benefit = 0.05;
        let r = corner_stability(&p, p.genuine_cost, false);
        assert!(r[1].eigenvalues[1] > 0.0);
        assert_ne!(r[1].stability, Stability::Stable);
    }

    #[test]
    fn genuine_corner_unstable_without_appropriation() {
        let mut p = ModelParams::reference();
        p.appropriability = 0.0;
        let r = corner_stability(&p, p.genuine_cost, false);
        assert_ne!(r[0].stability, Stability::Stable);
    }

    #[test]
    fn tipping_point_against_dense_scan() {
        let p = ModelParams::reference();
        let t = tipping_point(&p, 1.0).unwrap();
        assert!(t.residual.abs() < 1e-10);
        // Independent: grid scan for the sign change of the balance.
        let f = |x: f64| {
            let e: f64 = 0.3 + 0.7 * x;
            0.7 * 2.0 / (1.0 + (-25.0 * (e - 0.6)).exp()) - 1.2
        };
        let n = 1_000_000;
        let k = (0..n).find(|&i| f(i as f64 / n as f64) > 0.0).unwrap();
        let scan = (k as f64 - 0.5) / n as f64;
        assert!((t.genuine - scan).abs() < 1e-6);
        // Closed form for the logistic: e = e* + ln(6)/k.
        let e = 0.6 + 6f64.ln() / 25.0;
        assert!((t.genuine - (e - 0.3) / 0.7).abs() < 1e-9);
    }

    #[test]
    fn no_root_cases() {
        let mut p = ModelParams::reference();
        p.appropriability = 0.99;
        p.systemic_value = 50.0;
        p.steepness = 1.0;
        assert!(matches!(
            tipping_point(&p, 1.0),
            Err(EquilibriumError::NoRoot { dominant: Dominant::Genuine, .. })
        ));
        let mut p = ModelParams::reference();
        p.appropriability = 0.05;
        assert!(matches!(
            tipping_point(&p, 1.0),
            Err(EquilibriumError::NoRoot { dominant: Dominant::Partial, .. })
        ));
    }

    #[test]
    fn tipping_falls_as_cost_falls() {
        let p = ModelParams::reference();
        let a = tipping_point(&p, 1.0).unwrap().genuine;
        let b = tipping_point(&p, 0.6).unwrap().genuine;
        let c = tipping_point(&p, 0.3).unwrap().genuine;
        assert!(a > b && b > c);
    }

    #[test]
    fn signs_at_reference() {
        let p = ModelParams::reference();
        let cs = comparative_statics(&p, 1.0, DEFAULT_RELATIVE_STEP).unwrap();
        assert!(cs.d_appropriability < 0.0);
        assert!(cs.d_value < 0.0);
        assert!(cs.d_cost_gap > 0.0);
        assert!(cs.d_benefit_gap > 0.0);
        assert!(cs.expected_signs_hold());
    }

    #[test]
    fn edge_equilibrium_matches_without_coordination() {
        let p = ModelParams::reference();
        let a = tipping_point(&p, 1.0).unwrap().genuine;
        let b = edge_equilibrium(&p, 1.0).unwrap().genuine;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn interior_edge_point_is_saddle() {
        let p = ModelParams::reference();
        let eq = equilibria(&p, 1.0, false);
        assert_eq!(eq.len(), 4);
        assert_eq!(eq[3].kind, EquilibriumKind::EdgeGpInterior);
        assert_eq!(eq[3].stability, Stability::Saddle);
    }

    #[test]
    fn rho_closed_form_examples() {
        let p = ModelParams::reference();
        assert!((rho_closed_form(&p) - (1.0 - 0.2 / 1.4)).abs() < 1e-15);
        let mut q = p;
        q.partial_cost = 1e-9;
        assert!(rho_closed_form(&q) > 1.0 - 1e-8);
        let h = 1e-6;
        let mut up = p;
        up.partial_cost += h;
        assert!(rho_closed_form(&up) < rho_closed_form(&p));
        let mut up = p;
        up.genuine_cost += h;
        assert!(rho_closed_form(&up) > rho_closed_form(&p));
        let mut up = p;
        up.partial_benefit += h;
        assert!(rho_closed_form(&up) > rho_closed_form(&p));
    }
}
