//! Parameters, states and payoff functions.
//!
//! Every other module goes through the functions here to evaluate payoffs,
//! so a change to the game only has to be made in one place.

use core::fmt;

use libm::exp;

/// One of the three pure strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Genuine,
    Partial,
    Reject,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Genuine, Strategy::Partial, Strategy::Reject];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Strategy::Genuine => 0,
            Strategy::Partial => 1,
            Strategy::Reject => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Strategy::Genuine => "G",
            Strategy::Partial => "P",
            Strategy::Reject => "R",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Parameter validation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },
    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(
        "cost ordering violated: c^{{(R)}} = 0 < c_P < c_G requires 0 < c_P = {partial} < c_G = {genuine}"
    )]
    CostOrdering { partial: f64, genuine: f64 },
    #[error("benefit ordering violated: b_G < b_P requires b_G = {genuine} < b_P = {partial}")]
    BenefitOrdering { genuine: f64, partial: f64 },
    #[error("partial adoption must be individually profitable: b_P = {benefit} > c_P = {cost}")]
    PartialUnprofitable { benefit: f64, cost: f64 },
}

/// Scalar parameters of the adoption game.
///
/// Fields are public for convenient construction; run [`ModelParams::validate`]
/// (or build through [`ModelParams::validated`]) before handing a set to the
/// analysis routines, all of which assume the cost and benefit ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Initial disruption cost of genuine adoption, `c0`.
    pub genuine_cost: f64,
    /// Cost of partial adoption, `c_P`.
    pub partial_cost: f64,
    /// Direct private benefit of genuine adoption, `b_G`.
    pub genuine_benefit: f64,
    /// Direct private benefit of partial adoption, `b_P`.
    pub partial_benefit: f64,
    /// Total systemic benefit `B`.
    pub systemic_value: f64,
    /// Appropriated fraction of the systemic benefit, `α`.
    pub appropriability: f64,
    /// Contribution weight of partial adopters to effective adoption, `γ`.
    pub partial_weight: f64,
    /// Adoption threshold `e*`.
    pub threshold: f64,
    /// Logistic steepness `k` of the benefit sigmoid.
    pub steepness: f64,
    /// Embedding cost-decay rate `δ` (active above threshold).
    pub embedding_rate: f64,
    /// Individual learning decay rate `δ_ind` (active everywhere).
    pub learning_rate: f64,
    /// Belief updating rate `λ`.
    pub belief_rate: f64,
    /// Peer benefit to genuine adopters, `ψ_G`.
    pub peer_benefit: f64,
    /// Norm enforcement against partial adopters, `ψ_P`.
    pub norm_penalty: f64,
    /// Social cost of deviating into genuine adoption, `ψ_dev`.
    pub deviance_cost: f64,
    /// Fraction of systemic value lost between pure system-change (ρ = 0)
    /// and pure point-solution (ρ = 1) technology: `B(ρ) = B·(1 − ω·ρ)`.
    pub value_decay: f64,
    /// Population size used for aggregate welfare.
    pub population: f64,
}

impl ModelParams {
    /// The reference parameter set: bistable with every corner condition
    /// satisfied by a clear margin.
    pub const fn reference() -> Self {
        ModelParams {
            genuine_cost: 1.0,
            partial_cost: 0.2,
            genuine_benefit: 0.1,
            partial_benefit: 0.5,
            systemic_value: 2.0,
            appropriability: 0.7,
            partial_weight: 0.3,
            threshold: 0.6,
            steepness: 25.0,
            embedding_rate: 0.5,
            learning_rate: 0.0,
            belief_rate: 0.1,
            peer_benefit: 0.0,
            norm_penalty: 0.0,
            deviance_cost: 0.0,
            value_decay: 1.0,
            population: 1.0,
        }
    }

    pub fn validated(self) -> Result<Self, ParamError> {
        self.validate()?;
        Ok(self)
    }

    /// Full validation: ranges plus the strict cost and benefit ordering
    /// `0 < c_P < c_G`, `b_G < b_P`, `b_P > c_P`.
    pub fn validate(&self) -> Result<(), ParamError> {
        self.check_common()?;
        open(
            "appropriability",
            self.appropriability,
            0.0,
            1.0,
            "(0, 1)",
        )?;
        open("threshold", self.threshold, 0.0, 1.0, "(0, 1)")?;
        positive("systemic_value", self.systemic_value)?;
        positive("embedding_rate", self.embedding_rate)?;
        if !(self.partial_cost > 0.0 && self.partial_cost < self.genuine_cost) {
            return Err(ParamError::CostOrdering {
                partial: self.partial_cost,
                genuine: self.genuine_cost,
            });
        }
        if !(self.genuine_benefit < self.partial_benefit) {
            return Err(ParamError::BenefitOrdering {
                genuine: self.genuine_benefit,
                partial: self.partial_benefit,
            });
        }
        Ok(())
    }

    /// Validation used for technology-type derived sets. The ρ family moves
    /// `c_G` below `c_P` and `b_G` up to `b_P` by construction, so only the
    /// ρ-invariant conditions and the closed ranges are checked.
    pub fn validate_tech_family(&self) -> Result<(), ParamError> {
        self.check_common()?;
        if !(self.appropriability > 0.0 && self.appropriability <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "appropriability",
                value: self.appropriability,
                range: "(0, 1]",
            });
        }
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            return Err(ParamError::OutOfRange {
                name: "threshold",
                value: self.threshold,
                range: "[0, 1)",
            });
        }
        non_negative("systemic_value", self.systemic_value)?;
        non_negative("embedding_rate", self.embedding_rate)?;
        if !(self.partial_cost > 0.0) {
            return Err(ParamError::CostOrdering {
                partial: self.partial_cost,
                genuine: self.genuine_cost,
            });
        }
        if !(self.genuine_benefit <= self.partial_benefit) {
            return Err(ParamError::BenefitOrdering {
                genuine: self.genuine_benefit,
                partial: self.partial_benefit,
            });
        }
        Ok(())
    }

    fn check_common(&self) -> Result<(), ParamError> {
        for (name, v) in self.named() {
            if !v.is_finite() {
                return Err(ParamError::NonFinite { name });
            }
        }
        non_negative("genuine_cost", self.genuine_cost)?;
        non_negative("genuine_benefit", self.genuine_benefit)?;
        positive("partial_benefit", self.partial_benefit)?;
        if !(self.partial_weight >= 0.0 && self.partial_weight < 1.0) {
            return Err(ParamError::OutOfRange {
                name: "partial_weight",
                value: self.partial_weight,
                range: "[0, 1)",
            });
        }
        positive("steepness", self.steepness)?;
        non_negative("learning_rate", self.learning_rate)?;
        non_negative("belief_rate", self.belief_rate)?;
        non_negative("peer_benefit", self.peer_benefit)?;
        non_negative("norm_penalty", self.norm_penalty)?;
        non_negative("deviance_cost", self.deviance_cost)?;
        if !(0.0..=1.0).contains(&self.value_decay) {
            return Err(ParamError::OutOfRange {
                name: "value_decay",
                value: self.value_decay,
                range: "[0, 1]",
            });
        }
        positive("population", self.population)?;
        if !(self.partial_benefit > self.partial_cost) {
            return Err(ParamError::PartialUnprofitable {
                benefit: self.partial_benefit,
                cost: self.partial_cost,
            });
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 17] {
        [
            ("genuine_cost", self.genuine_cost),
            ("partial_cost", self.partial_cost),
            ("genuine_benefit", self.genuine_benefit),
            ("partial_benefit", self.partial_benefit),
            ("systemic_value", self.systemic_value),
            ("appropriability", self.appropriability),
            ("partial_weight", self.partial_weight),
            ("threshold", self.threshold),
            ("steepness", self.steepness),
            ("embedding_rate", self.embedding_rate),
            ("learning_rate", self.learning_rate),
            ("belief_rate", self.belief_rate),
            ("peer_benefit", self.peer_benefit),
            ("norm_penalty", self.norm_penalty),
            ("deviance_cost", self.deviance_cost),
            ("value_decay", self.value_decay),
            ("population", self.population),
        ]
    }

    /// Cost gap `(c − c_P) + (b_P − b_G)` that systemic benefit has to close
    /// for genuine adoption to match partial adoption at cost `c`.
    #[inline]
    pub fn adoption_gap(&self, cost: f64) -> f64 {
        (cost - self.partial_cost) + (self.partial_benefit - self.genuine_benefit)
    }

    /// `αB > (c − c_P) + (b_P − b_G)`.
    pub fn is_bistable_at(&self, cost: f64) -> bool {
        self.appropriability * self.systemic_value > self.adoption_gap(cost)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference()
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            value: v,
            range: "(0, inf)",
        })
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            value: v,
            range: "[0, inf)",
        })
    }
}

fn open(name: &'static str, v: f64, lo: f64, hi: f64, range: &'static str) -> Result<(), ParamError> {
    if v > lo && v < hi {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            value: v,
            range,
        })
    }
}

/// Derive the parameter set of technology type `rho ∈ [0, 1]` from a
/// system-change (ρ = 0) baseline.
///
/// Threshold, appropriability, private benefit and disruption cost follow the
/// linear interpolation toward a pure point solution; the coordination
/// coefficients scale by `1 − ρ` and the systemic value by `1 − ω·ρ`.
pub fn apply_rho(base: &ModelParams, rho: f64) -> Result<ModelParams, ParamError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(ParamError::OutOfRange {
            name: "rho",
            value: rho,
            range: "[0, 1]",
        });
    }
    let keep = 1.0 - rho;
    let mut p = *base;
    p.threshold = keep * base.threshold;
    p.appropriability = rho + keep * base.appropriability;
    p.genuine_benefit = base.genuine_benefit + rho * (base.partial_benefit - base.genuine_benefit);
    p.genuine_cost = base.genuine_cost * keep;
    p.peer_benefit = base.peer_benefit * keep;
    p.norm_penalty = base.norm_penalty * keep;
    p.deviance_cost = base.deviance_cost * keep;
    p.systemic_value = base.systemic_value * (1.0 - base.value_decay * rho);
    p.validate_tech_family()?;
    Ok(p)
}

/// Invalid simplex coordinates.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("frequency {index} is {value}, must be finite and non-negative")]
    Component { index: usize, value: f64 },
    #[error("frequencies sum to {sum}, expected 1")]
    Sum { sum: f64 },
    #[error("cost {cost} outside [0, {max}]")]
    Cost { cost: f64, max: f64 },
    #[error("belief {belief} outside [0, 1]")]
    Belief { belief: f64 },
}

/// Tolerance on `x_G + x_P + x_R = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A point `(x_G, x_P, x_R)` on the 2-simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexState([f64; 3]);

impl SimplexState {
    pub fn new(genuine: f64, partial: f64, reject: f64) -> Result<Self, StateError> {
        let x = [genuine, partial, reject];
        for (index, &value) in x.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(StateError::Component { index, value });
            }
        }
        let sum = genuine + partial + reject;
        if libm::fabs(sum - 1.0) > SIMPLEX_TOLERANCE {
            return Err(StateError::Sum { sum });
        }
        Ok(SimplexState(x))
    }

    /// State with `x_R = 1 − x_G − x_P`; rounding below zero is clamped.
    pub fn from_genuine_partial(genuine: f64, partial: f64) -> Result<Self, StateError> {
        let mut reject = 1.0 - genuine - partial;
        if reject < 0.0 && reject > -SIMPLEX_TOLERANCE {
            reject = 0.0;
        }
        Self::new(genuine, partial, reject)
    }

    pub fn corner(s: Strategy) -> Self {
        let mut x = [0.0; 3];
        x[s.index()] = 1.0;
        SimplexState(x)
    }

    /// Point on the G–P edge with `x_G = genuine`.
    pub fn on_gp_edge(genuine: f64) -> Result<Self, StateError> {
        Self::new(genuine, 1.0 - genuine, 0.0)
    }

    pub(crate) fn from_array_unchecked(x: [f64; 3]) -> Self {
        SimplexState(x)
    }

    #[inline]
    pub fn genuine(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn partial(&self) -> f64 {
        self.0[1]
    }

    #[inline]
    pub fn reject(&self) -> f64 {
        self.0[2]
    }

    #[inline]
    pub fn get(&self, s: Strategy) -> f64 {
        self.0[s.index()]
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// Raw adoption rate `x_G + x_P`, the usual headline metric.
    pub fn raw_adoption(&self) -> f64 {
        self.0[0] + self.0[1]
    }

    /// Max-norm distance to a corner.
    pub fn distance_to(&self, s: Strategy) -> f64 {
        let c = Self::corner(s).0;
        let mut d: f64 = 0.0;
        for i in 0..3 {
            d = d.max(libm::fabs(self.0[i] - c[i]));
        }
        d
    }
}

/// Simplex state plus the current genuine-adoption cost, the doctors'
/// believed sharing fraction and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub simplex: SimplexState,
    pub cost: f64,
    pub belief: f64,
    pub time: f64,
}

impl FullState {
    /// Start at time zero with the undecayed cost and the model's
    /// appropriability as belief.
    pub fn initial(simplex: SimplexState, params: &ModelParams) -> Self {
        FullState {
            simplex,
            cost: params.genuine_cost,
            belief: params.appropriability,
            time: 0.0,
        }
    }

    pub fn with_belief(mut self, belief: f64) -> Self {
        self.belief = belief;
        self
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }

    pub fn check(&self, params: &ModelParams) -> Result<(), StateError> {
        let x = self.simplex.as_array();
        SimplexState::new(x[0], x[1], x[2])?;
        if !(self.cost >= 0.0 && self.cost <= params.genuine_cost) {
            return Err(StateError::Cost {
                cost: self.cost,
                max: params.genuine_cost,
            });
        }
        if !(0.0..=1.0).contains(&self.belief) {
            return Err(StateError::Belief {
                belief: self.belief,
            });
        }
        Ok(())
    }
}

/// Organisation-side parameters of the trust game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustParams {
    /// Announced sharing fraction `α̂`.
    pub announced: f64,
    /// Curvature `κ₂` of the quadratic reputational cost `κ(Δ) = ½κ₂Δ²`.
    pub curvature: f64,
    /// Per-unit reputational cost of the linearised repeated game.
    pub linear_cost: f64,
    /// Organisation's discount factor `β`.
    pub discount: f64,
    /// Realised systemic gain `V`.
    pub realised_gain: f64,
    /// Belief downgrade per failed attempt; `None` uses `α̂ − α_actual(V = B)`.
    pub belief_erosion: Option<f64>,
}

impl TrustParams {
    pub fn reference() -> Self {
        TrustParams {
            announced: 0.7,
            curvature: 4.0,
            linear_cost: 1.0,
            discount: 0.6,
            realised_gain: 2.0,
            belief_erosion: None,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.announced > 0.0 && self.announced <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "announced",
                value: self.announced,
                range: "(0, 1]",
            });
        }
        positive("curvature", self.curvature)?;
        positive("linear_cost", self.linear_cost)?;
        open("discount", self.discount, 0.0, 1.0, "(0, 1)")?;
        non_negative("realised_gain", self.realised_gain)?;
        if let Some(d) = self.belief_erosion {
            non_negative("belief_erosion", d)?;
        }
        Ok(())
    }

    /// Quadratic reputational cost `κ(Δ) = ½κ₂Δ²`.
    pub fn reputational_cost(&self, reneging: f64) -> f64 {
        0.5 * self.curvature * reneging * reneging
    }
}

/// Effective adoption `e = x_G + γ·x_P`.
#[inline]
pub fn effective_adoption(s: &SimplexState, partial_weight: f64) -> f64 {
    s.genuine() + partial_weight * s.partial()
}

/// Logistic `σ(z) = 1 / (1 + exp(−k·z))`.
#[inline]
pub fn sigmoid(z: f64, steepness: f64) -> f64 {
    1.0 / (1.0 + exp(-steepness * z))
}

/// Systemic benefit `Φ(e) = B·σ(e − e*)`.
#[inline]
pub fn systemic_benefit(e: f64, params: &ModelParams) -> f64 {
    params.systemic_value * sigmoid(e - params.threshold, params.steepness)
}

/// Slope `Φ'(e)`.
pub fn systemic_benefit_slope(e: f64, params: &ModelParams) -> f64 {
    let s = sigmoid(e - params.threshold, params.steepness);
    params.systemic_value * params.steepness * s * (1.0 - s)
}

/// Current disruption cost carried by the state.
#[inline]
pub fn disruption_cost(state: &FullState) -> f64 {
    state.cost
}

/// Cost after `duration` on one side of the threshold, in closed form:
/// `c·exp(−(δ_ind + δ·1{above})·duration)`. Below threshold with
/// `δ_ind = 0` the input is returned unchanged.
pub fn decayed_cost(params: &ModelParams, cost: f64, above: bool, duration: f64) -> f64 {
    let rate = params.learning_rate + if above { params.embedding_rate } else { 0.0 };
    if rate == 0.0 {
        cost
    } else {
        cost * exp(-rate * duration)
    }
}

/// Payoffs to the three strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payoffs {
    pub genuine: f64,
    pub partial: f64,
    pub reject: f64,
}

impl Payoffs {
    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        [self.genuine, self.partial, self.reject]
    }

    #[inline]
    pub fn get(&self, s: Strategy) -> f64 {
        self.as_array()[s.index()]
    }
}

/// Payoffs at state `s` with genuine-adoption cost `cost` and appropriated
/// fraction `appropriability`. With `coordination` the peer, norm and
/// deviance terms are added; the partial payoff never contains `Φ`.
#[inline]
pub fn payoffs(
    s: &SimplexState,
    cost: f64,
    appropriability: f64,
    params: &ModelParams,
    coordination: bool,
) -> Payoffs {
    let e = effective_adoption(s, params.partial_weight);
    let mut genuine = -cost + appropriability * systemic_benefit(e, params) + params.genuine_benefit;
    let mut partial = -params.partial_cost + params.partial_benefit;
    if coordination {
        genuine += params.peer_benefit * s.genuine() - params.deviance_cost * s.partial();
        partial -= params.norm_penalty * s.genuine();
    }
    Payoffs {
        genuine,
        partial,
        reject: 0.0,
    }
}

/// Mean fitness `x_G f_G + x_P f_P + x_R f_R`.
#[inline]
pub fn mean_fitness(s: &SimplexState, f: &Payoffs) -> f64 {
    s.genuine() * f.genuine + s.partial() * f.partial + s.reject() * f.reject
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(g: f64, p: f64, r: f64) -> SimplexState {
        SimplexState::new(g, p, r).unwrap()
    }

    #[test]
    fn effective_adoption_examples() {
        assert_eq!(effective_adoption(&st(1.0, 0.0, 0.0), 0.3), 1.0);
        assert_eq!(effective_adoption(&st(0.0, 1.0, 0.0), 0.3), 0.3);
        assert!((effective_adoption(&st(0.4, 0.5, 0.1), 0.5) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn benefit_midpoint_and_logistic_value() {
        let p = ModelParams::reference();
        assert!((systemic_benefit(p.threshold, &p) - p.systemic_value / 2.0).abs() < 1e-12);
        assert_eq!(systemic_benefit(0.6, &p), 1.0);
        // 2 / (1 + e^-3)
        let expected = 2.0 / (1.0 + (-3.0f64).exp());
        assert!((systemic_benefit(0.72, &p) - expected).abs() < 1e-12);
        assert!((expected - 1.9051).abs() < 1e-4);
    }

    #[test]
    fn cost_decay_closed_form() {
        let p = ModelParams::reference();
        assert_eq!(decayed_cost(&p, 1.0, false, 50.0), 1.0);
        let c = decayed_cost(&p, 1.0, true, 2.0);
        assert!((c - (-1.0f64).exp()).abs() < 1e-15);
        let mut q = p;
        q.learning_rate = 0.01;
        assert!(decayed_cost(&q, 1.0, false, 10.0) < 1.0);
    }

    #[test]
    fn payoff_examples() {
        let p = ModelParams::reference();
        let f = payoffs(&st(0.0, 1.0, 0.0), p.genuine_cost, p.appropriability, &p, false);
        assert_eq!(f.partial, p.partial_benefit - p.partial_cost);
        assert_eq!(f.reject, 0.0);

        let mut q = p;
        q.deviance_cost = 0.2;
        let s = st(0.0, 1.0, 0.0);
        let f = payoffs(&s, 0.8, 0.7, &q, true);
        let expected = -0.8 + 0.7 * systemic_benefit(q.partial_weight, &q) + q.genuine_benefit - 0.2;
        assert!((f.genuine - expected).abs() < 1e-15);
    }

    #[test]
    fn partial_payoff_ignores_systemic_value() {
        let p = ModelParams::reference();
        let mut q = p;
        q.systemic_value = 17.5;
        let s = st(0.3, 0.4, 0.3);
        let a = payoffs(&s, 1.0, 0.7, &p, true).partial;
        let b = payoffs(&s, 1.0, 0.7, &q, true).partial;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn mean_fitness_examples() {
        let f = Payoffs {
            genuine: 1.0,
            partial: 3.0,
            reject: 0.0,
        };
        assert_eq!(mean_fitness(&st(1.0, 0.0, 0.0), &f), 1.0);
        assert_eq!(mean_fitness(&st(0.0, 0.0, 1.0), &f), 0.0);
        assert_eq!(mean_fitness(&st(0.5, 0.5, 0.0), &f), 2.0);
    }

    #[test]
    fn ordering_is_enforced() {
        let mut p = ModelParams::reference();
        p.partial_cost = 1.2;
        p.partial_benefit = 1.5;
        let err = p.validate().unwrap_err();
        assert!(matches!(err, ParamError::CostOrdering { .. }));

        let mut p = ModelParams::reference();
        p.genuine_benefit = 0.6;
        assert!(matches!(p.validate(), Err(ParamError::BenefitOrdering { .. })));

        let mut p = ModelParams::reference();
        p.partial_benefit = 0.15;
        p.genuine_benefit = 0.05;
        assert!(matches!(
            p.validate(),
            Err(ParamError::PartialUnprofitable { .. })
        ));

        assert!(ModelParams::reference().validate().is_ok());
    }

    #[test]
    fn rho_endpoints() {
        let base = ModelParams::reference();
        let p0 = apply_rho(&base, 0.0).unwrap();
        assert_eq!(p0, base);

        let p1 = apply_rho(&base, 1.0).unwrap();
        assert_eq!(p1.threshold, 0.0);
        assert_eq!(p1.appropriability, 1.0);
        assert_eq!(p1.genuine_benefit, base.partial_benefit);
        assert_eq!(p1.genuine_cost, 0.0);
        assert_eq!(p1.deviance_cost, 0.0);

        let half = apply_rho(&base, 0.5).unwrap();
        assert!((half.threshold - 0.3).abs() < 1e-15);
        assert!(apply_rho(&base, 1.5).is_err());
    }

    #[test]
    fn point_solution_limit_removes_private_gap() {
        // At ρ = 1 the private benefit gap and all coordination terms vanish
        // and the cost of genuine adoption is zero, so f_G − f_P = αΦ(e) + c_P.
        let mut base = ModelParams::reference();
        base.peer_benefit = 0.3;
        base.norm_penalty = 0.2;
        base.deviance_cost = 0.4;
        let p = apply_rho(&base, 1.0).unwrap();
        for &(g, q) in &[(0.0, 1.0), (0.2, 0.5), (0.9, 0.05), (0.0, 0.0)] {
            let s = SimplexState::from_genuine_partial(g, q).unwrap();
            let f = payoffs(&s, 0.0, p.appropriability, &p, true);
            let e = effective_adoption(&s, p.partial_weight);
            let expected = p.appropriability * systemic_benefit(e, &p) + p.partial_cost;
            assert!((f.genuine - f.partial - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_rejects_bad_points() {
        assert!(SimplexState::new(0.5, 0.6, 0.0).is_err());
        assert!(SimplexState::new(-0.1, 0.6, 0.5).is_err());
        assert!(SimplexState::new(f64::NAN, 0.5, 0.5).is_err());
        assert!(SimplexState::new(0.2, 0.3, 0.5).is_ok());
    }
}
