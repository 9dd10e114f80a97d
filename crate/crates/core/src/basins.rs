//! Basins of attraction on a triangular grid.
//!
//! The simplex is cut into `n²` congruent triangles: for each lattice point
//! `(i, j)` with `i + j ≤ n − 1` an upward triangle, and for `i + j ≤ n − 2`
//! a downward one. Each cell is represented by its centroid, every cell has
//! the same area, and basin measures are plain label counts divided by `n²`.
//! Basins are computed with the cost frozen at a given value.

use alloc::vec::Vec;

use crate::dynamics::{integrate_outcome, DynamicsError, Environment, Flags, IntegrationConfig};
use crate::model::{FullState, ModelParams, SimplexState, Strategy};
use crate::root::bisect_predicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasinLabel {
    Genuine,
    Partial,
    /// Converged to rejection, hit the horizon, or failed numerically.
    Unclassified,
}

impl BasinLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BasinLabel::Genuine => "G",
            BasinLabel::Partial => "P",
            BasinLabel::Unclassified => "Unclassified",
        }
    }
}

/// One grid triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    /// Lattice coordinate along `x_G`.
    pub i: usize,
    /// Lattice coordinate along `x_P`.
    pub j: usize,
    pub upward: bool,
    pub centroid: SimplexState,
}

/// All `n²` cells, ordered by `i`, then `j`, upward before downward.
pub fn grid_cells(resolution: usize) -> Vec<GridCell> {
    let n = resolution;
    let inv = 1.0 / n as f64;
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n - i {
            let make = |off: f64, upward: bool| {
                let g = (i as f64 + off) * inv;
                let p = (j as f64 + off) * inv;
                let r = (1.0 - g - p).max(0.0);
                GridCell {
                    i,
                    j,
                    upward,
                    centroid: SimplexState::from_array_unchecked([g, p, r]),
                }
            };
            cells.push(make(1.0 / 3.0, true));
            if i + j + 2 <= n {
                cells.push(make(2.0 / 3.0, false));
            }
        }
    }
    cells
}

/// Runs independent jobs and returns their results in index order.
///
/// The sequential implementation is all the core crate needs; a parallel
/// one can be provided by a `std` consumer.
pub trait Executor {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutcome {
    pub label: BasinLabel,
    /// Time to converge to the labelled corner.
    pub time: Option<f64>,
}

/// Integrate one frozen-cost trajectory and label it by its final corner.
pub fn label_cell(
    start: SimplexState,
    params: &ModelParams,
    cost: f64,
    config: &IntegrationConfig,
    coordination: bool,
) -> CellOutcome {
    let env = Environment::new(*params);
    let flags = Flags::frozen().with_coordination(coordination);
    let initial = FullState::initial(start, params).with_cost(cost);
    match integrate_outcome(initial, &env, config, &flags) {
        Ok(t) => match t.converged_to {
            Some(Strategy::Genuine) => CellOutcome { label: BasinLabel::Genuine, time: t.convergence_time },
            Some(Strategy::Partial) => CellOutcome { label: BasinLabel::Partial, time: t.convergence_time },
            _ => CellOutcome { label: BasinLabel::Unclassified, time: None },
        },
        Err(_) => CellOutcome { label: BasinLabel::Unclassified, time: None },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinMap {
    pub resolution: usize,
    pub cells: Vec<GridCell>,
    pub outcomes: Vec<CellOutcome>,
    /// Midpoints between adjacent cells labelled G and P.
    pub separatrix: Vec<SimplexState>,
}

impl BasinMap {
    fn count(&self, label: BasinLabel) -> usize {
        self.outcomes.iter().filter(|o| o.label == label).count()
    }

    fn fraction(&self, label: BasinLabel) -> f64 {
        self.count(label) as f64 / self.cells.len() as f64
    }

    pub fn measure_genuine(&self) -> f64 {
        self.fraction(BasinLabel::Genuine)
    }

    pub fn measure_partial(&self) -> f64 {
        self.fraction(BasinLabel::Partial)
    }

    pub fn measure_unclassified(&self) -> f64 {
        self.fraction(BasinLabel::Unclassified)
    }

    pub fn unclassified_count(&self) -> usize {
        self.count(BasinLabel::Unclassified)
    }

    /// Mean convergence time over cells with the given label.
    pub fn mean_time(&self, label: BasinLabel) -> Option<f64> {
        mean(self.outcomes.iter().filter(|o| o.label == label).filter_map(|o| o.time))
    }

    /// Estimate where the separatrix meets the G–P edge: least-squares line
    /// `x_G = a + b·x_R` through the separatrix points within three grid
    /// spacings of the edge, evaluated at `x_R = 0`. Accuracy is of the
    /// order of one grid spacing.
    pub fn gp_edge_intercept(&self) -> Option<f64> {
        let band = 3.0 / self.resolution as f64;
        let pts: Vec<(f64, f64)> = self
            .separatrix
            .iter()
            .filter(|s| s.reject() <= band)
            .map(|s| (s.reject(), s.genuine()))
            .collect();
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx <= 0.0 {
            return Some(my);
        }
        let slope = sxy / sxx;
        Some(my - slope * mx)
    }
}

fn mean<I: Iterator<Item = f64>>(it: I) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in it {
        sum += v;
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

fn midpoint(a: &SimplexState, b: &SimplexState) -> SimplexState {
    let (x, y) = (a.as_array(), b.as_array());
    SimplexState::from_array_unchecked([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.5 * (x[2] + y[2])])
}

fn separatrix(resolution: usize, cells: &[GridCell], outcomes: &[CellOutcome]) -> Vec<SimplexState> {
    let n = resolution;
    let mut up = alloc::vec![usize::MAX; n * n];
    for (k, c) in cells.iter().enumerate() {
        if c.upward {
            up[c.i * n + c.j] = k;
        }
    }
    let mut out = Vec::new();
    for (k, c) in cells.iter().enumerate() {
        if c.upward {
            continue;
        }
        let neighbours = [(c.i, c.j), (c.i + 1, c.j), (c.i, c.j + 1)];
        for (a, b) in neighbours {
            let m = up[a * n + b];
            let (la, lb) = (outcomes[k].label, outcomes[m].label);
            let differ = matches!(
                (la, lb),
                (BasinLabel::Genuine, BasinLabel::Partial) | (BasinLabel::Partial, BasinLabel::Genuine)
            );
            if differ {
                out.push(midpoint(&c.centroid, &cells[m].centroid));
            }
        }
    }
    out
}

/// Frozen-cost basin map at the given resolution, run sequentially.
pub fn map_basins(
    params: &ModelParams,
    cost: f64,
    resolution: usize,
    config: &IntegrationConfig,
    coordination: bool,
) -> Result<BasinMap, DynamicsError> {
    map_basins_with(&Sequential, params, cost, resolution, config, coordination)
}

pub fn map_basins_with<E: Executor>(
    executor: &E,
    params: &ModelParams,
    cost: f64,
    resolution: usize,
    config: &IntegrationConfig,
    coordination: bool,
) -> Result<BasinMap, DynamicsError> {
    config.validate()?;
    if resolution == 0 {
        return Err(DynamicsError::Config { field: "resolution", value: 0.0 });
    }
    let cells = grid_cells(resolution);
    let outcomes = executor.run(cells.len(), |k| {
        label_cell(cells[k].centroid, params, cost, config, coordination)
    });
    let separatrix = separatrix(resolution, &cells, &outcomes);
    Ok(BasinMap { resolution, cells, outcomes, separatrix })
}

/// Locate the separatrix on the G–P edge by bisection over the initial
/// `x_G` with `x_R = 0`, classifying each start by simulation.
pub fn edge_separatrix(
    params: &ModelParams,
    cost: f64,
    config: &IntegrationConfig,
    coordination: bool,
    width: f64,
) -> Option<f64> {
    let reaches_g = |x: f64| {
        let s = SimplexState::from_array_unchecked([x, 1.0 - x, 0.0]);
        label_cell(s, params, cost, config, coordination).label == BasinLabel::Genuine
    };
    let (lo, hi) = (1e-9, 1.0 - 1e-9);
    if reaches_g(lo) || !reaches_g(hi) {
        return None;
    }
    let (a, b) = bisect_predicate(reaches_g, lo, hi, width);
    Some(0.5 * (a + b))
}

/// Frozen-cost outcomes for starts spread evenly along the G–P edge.
///
/// On the edge `x_R = 0` the only competition is between genuine and
/// partial adoption, so convergence times there measure how fast that
/// competition resolves. Interior starts near the partial corner are
/// instead limited by the decay of rejecters, whose rate `b_P − c_P` does
/// not depend on any coordination coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProfile {
    pub starts: Vec<f64>,
    pub outcomes: Vec<CellOutcome>,
}

/// Starts at `x_G = (k + ½)/points` on the G–P edge.
pub fn edge_profile<E: Executor>(
    executor: &E,
    params: &ModelParams,
    cost: f64,
    points: usize,
    config: &IntegrationConfig,
    coordination: bool,
) -> EdgeProfile {
    let starts: Vec<f64> = (0..points).map(|k| (k as f64 + 0.5) / points as f64).collect();
    let outcomes = executor.run(points, |k| {
        let x = starts[k];
        label_cell(SimplexState::from_array_unchecked([x, 1.0 - x, 0.0]), params, cost, config, coordination)
    });
    EdgeProfile { starts, outcomes }
}

/// Parameter varied by a basin-measure sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    DevianceCost,
    PeerBenefit,
    NormPenalty,
    Appropriability,
    SystemicValue,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::DevianceCost,
        SweepVariable::PeerBenefit,
        SweepVariable::NormPenalty,
        SweepVariable::Appropriability,
        SweepVariable::SystemicValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::DevianceCost => "psiDev",
            SweepVariable::PeerBenefit => "psiG",
            SweepVariable::NormPenalty => "psiP",
            SweepVariable::Appropriability => "alpha",
            SweepVariable::SystemicValue => "B",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.name() == name)
    }

    pub fn apply(self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = *params;
        match self {
            SweepVariable::DevianceCost => p.deviance_cost = value,
            SweepVariable::PeerBenefit => p.peer_benefit = value,
            SweepVariable::NormPenalty => p.norm_penalty = value,
            SweepVariable::Appropriability => p.appropriability = value,
            SweepVariable::SystemicValue => p.systemic_value = value,
        }
        p
    }

    /// Whether the coordination terms must be switched on for the sweep to
    /// have any effect.
    pub fn needs_coordination(self) -> bool {
        matches!(
            self,
            SweepVariable::DevianceCost | SweepVariable::PeerBenefit | SweepVariable::NormPenalty
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub measure_genuine: f64,
    pub measure_partial: f64,
    pub measure_unclassified: f64,
    pub unclassified: usize,
    pub mean_time_genuine: Option<f64>,
    pub mean_time_partial: Option<f64>,
    /// Mean time to G over cells labelled G at every sweep value.
    pub common_time_genuine: Option<f64>,
    /// Mean time to P over cells labelled P at every sweep value.
    pub common_time_partial: Option<f64>,
    /// As `common_time_genuine`, over G–P edge starts.
    pub edge_time_genuine: Option<f64>,
    /// As `common_time_partial`, over G–P edge starts.
    pub edge_time_partial: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn measure_genuine_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].measure_genuine <= w[0].measure_genuine)
    }

    fn strictly_decreasing(values: impl Iterator<Item = Option<f64>>) -> bool {
        let v: Vec<Option<f64>> = values.collect();
        v.iter().all(|x| x.is_some()) && v.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
    }

    pub fn genuine_times_decreasing(&self) -> bool {
        Self::strictly_decreasing(self.rows.iter().map(|r| r.common_time_genuine))
    }

    pub fn partial_times_decreasing(&self) -> bool {
        Self::strictly_decreasing(self.rows.iter().map(|r| r.common_time_partial))
    }

    pub fn edge_genuine_times_decreasing(&self) -> bool {
        Self::strictly_decreasing(self.rows.iter().map(|r| r.edge_time_genuine))
    }

    pub fn edge_partial_times_decreasing(&self) -> bool {
        Self::strictly_decreasing(self.rows.iter().map(|r| r.edge_time_partial))
    }
}

/// One frozen-cost basin map per sweep value, with convergence-time
/// statistics. Coordination is switched on when the variable needs it.
#[allow(clippy::too_many_arguments)]
pub fn basin_measure_sweep<E: Executor>(
    executor: &E,
    params: &ModelParams,
    cost: f64,
    variable: SweepVariable,
    values: &[f64],
    resolution: usize,
    config: &IntegrationConfig,
    coordination: bool,
) -> Result<SweepTable, DynamicsError> {
    let coordination = coordination || variable.needs_coordination();
    let mut maps = Vec::with_capacity(values.len());
    let mut edges = Vec::with_capacity(values.len());
    for &v in values {
        let p = variable.apply(params, v);
        maps.push(map_basins_with(executor, &p, cost, resolution, config, coordination)?);
        edges.push(edge_profile(executor, &p, cost, resolution, config, coordination));
    }
    let common = |sets: &[&[CellOutcome]], label: BasinLabel| -> Vec<bool> {
        (0..sets[0].len())
            .map(|k| sets.iter().all(|o| o[k].label == label && o[k].time.is_some()))
            .collect()
    };
    let map_sets: Vec<&[CellOutcome]> = maps.iter().map(|m| m.outcomes.as_slice()).collect();
    let edge_sets: Vec<&[CellOutcome]> = edges.iter().map(|e| e.outcomes.as_slice()).collect();
    let (common_g, common_p) = (common(&map_sets, BasinLabel::Genuine), common(&map_sets, BasinLabel::Partial));
    let (edge_g, edge_p) = (common(&edge_sets, BasinLabel::Genuine), common(&edge_sets, BasinLabel::Partial));
    let masked_mean = |outcomes: &[CellOutcome], mask: &[bool]| {
        mean(outcomes.iter().zip(mask).filter(|(_, &keep)| keep).filter_map(|(o, _)| o.time))
    };
    let rows = values
        .iter()
        .zip(maps.iter().zip(&edges))
        .map(|(&value, (m, e))| {
            let common_mean = |mask: &[bool]| masked_mean(&m.outcomes, mask);
            SweepRow {
                value,
                measure_genuine: m.measure_genuine(),
                measure_partial: m.measure_partial(),
                measure_unclassified: m.measure_unclassified(),
                unclassified: m.unclassified_count(),
                mean_time_genuine: m.mean_time(BasinLabel::Genuine),
                mean_time_partial: m.mean_time(BasinLabel::Partial),
                common_time_genuine: common_mean(&common_g),
                common_time_partial: common_mean(&common_p),
                edge_time_genuine: masked_mean(&e.outcomes, &edge_g),
                edge_time_partial: masked_mean(&e.outcomes, &edge_p),
            }
        })
        .collect();
    Ok(SweepTable { variable, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::tipping_point;
    use crate::model::effective_adoption;

    fn coarse() -> IntegrationConfig {
        IntegrationConfig { step: 0.05, ..Default::default() }
    }

    #[test]
    fn grid_has_n_squared_interior_cells() {
        for n in [1, 2, 5, 40] {
            let cells = grid_cells(n);
            assert_eq!(cells.len(), n * n);
            for c in &cells {
                let x = c.centroid.as_array();
                assert!(x.iter().all(|&v| v > 0.0));
                assert!((x[0] + x[1] + x[2] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_map_is_bistable_and_consistent() {
        let p = ModelParams::reference();
        let m = map_basins(&p, 1.0, 30, &coarse(), false).unwrap();
        let (g, q, u) = (m.measure_genuine(), m.measure_partial(), m.measure_unclassified());
        assert!(g > 0.0 && q > 0.0);
        assert!((g + q + u - 1.0).abs() < 1e-9);
        assert!(!m.separatrix.is_empty());
        let tip = tipping_point(&p, 1.0).unwrap().genuine;
        let est = m.gp_edge_intercept().unwrap();
        assert!((est - tip).abs() < 2.0 / 30.0, "{est} vs {tip}");
    }

    #[test]
    fn small_appropriability_keeps_low_states_partial() {
        let mut p = ModelParams::reference();
        p.appropriability = 0.05;
        let m = map_basins(&p, 1.0, 20, &coarse(), false).unwrap();
        for (c, o) in m.cells.iter().zip(&m.outcomes) {
            if effective_adoption(&c.centroid, p.partial_weight) < p.threshold {
                assert_eq!(o.label, BasinLabel::Partial);
            }
        }
    }

    #[test]
    fn monostable_map_has_one_label() {
        let mut p = ModelParams::reference();
        p.appropriability = 0.05;
        let m = map_basins(&p, 1.0, 15, &coarse(), false).unwrap();
        assert_eq!(m.measure_partial(), 1.0);
        assert!(m.separatrix.is_empty());
    }

    #[test]
    fn zero_coordination_matches_base_map() {
        let p = ModelParams::reference();
        let a = map_basins(&p, 1.0, 12, &coarse(), false).unwrap();
        let b = map_basins(&p, 1.0, 12, &coarse(), true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_bisection_hits_tipping_point() {
        let p = ModelParams::reference();
        let x = edge_separatrix(&p, 1.0, &IntegrationConfig::default(), false, 1e-7).unwrap();
        let tip = tipping_point(&p, 1.0).unwrap().genuine;
        assert!((x - tip).abs() < 1e-5);
    }

    #[test]
    fn deviance_sweep_shrinks_genuine_basin() {
        let p = ModelParams::reference();
        let t = basin_measure_sweep(
            &Sequential,
            &p,
            1.0,
            SweepVariable::DevianceCost,
            &[0.0, 0.2, 0.4],
            16,
            &coarse(),
            true,
        )
        .unwrap();
        assert!(t.measure_genuine_non_increasing());
        assert!(t.rows[2].measure_genuine < t.rows[0].measure_genuine);
    }

    #[test]
    fn sweep_names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(SweepVariable::from_name(v.name()), Some(v));
        }
        assert_eq!(SweepVariable::from_name("gamma"), None);
    }
}
