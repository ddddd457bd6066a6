//! Linear multicommodity network flow.
//!
//! Each commodity `k` must ship `d_k` units from `s_k` to `t_k`; arcs have a
//! per-unit cost shared by all commodities and a joint capacity. The
//! disaggregated master has one convexity row per commodity and one
//! capacity row per arc, and the pricing problem is a shortest path with arc
//! lengths `t_ij - u_ij`. Capacity rows start inactive and enter the master
//! only once violated (see [`ActiveSet`]).

pub mod dijkstra;
pub mod format;
pub mod generate;

use thiserror::Error;

use crate::lp::{LinearProgram, RowKind};
use crate::master::{Column, MasterError, MasterPrimal, RestrictedMaster, Sense};
use crate::oracle::{
    DualPoint, OracleError, OracleResult, PricingOracle, RowUpdate, SubproblemResult,
    SubproblemStatus,
};
use crate::pdcgm::{self, DriverConfig, DriverError, IterationRecord};

use dijkstra::{dijkstra, out_arcs, ShortestPathTree};

/// Fraction of capacity below which an active arc is deactivated.
pub const DEACTIVATION_FRACTION: f64 = 0.9;
const ACTIVATION_TOL: f64 = 1e-7;
const NEGATIVE_DUAL_TOL: f64 = 1e-7;

/// Arc with 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub cost: f64,
    pub capacity: f64,
}

/// Commodity with 0-based endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commodity {
    pub source: usize,
    pub sink: usize,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network needs at least one node")]
    NoNodes,
    #[error("arc {arc} references node {node} outside 0..{n}")]
    ArcNodeOutOfRange { arc: usize, node: usize, n: usize },
    #[error("arc {arc} is a self-loop")]
    SelfLoop { arc: usize },
    #[error("arc {arc} has invalid cost {cost} (must be finite and nonnegative)")]
    BadCost { arc: usize, cost: f64 },
    #[error("arc {arc} has invalid capacity {capacity} (must be finite and positive)")]
    BadCapacity { arc: usize, capacity: f64 },
    #[error("commodity {commodity} references node {node} outside 0..{n}")]
    CommodityNodeOutOfRange {
        commodity: usize,
        node: usize,
        n: usize,
    },
    #[error("commodity {commodity} has identical source and sink")]
    TrivialCommodity { commodity: usize },
    #[error("commodity {commodity} has invalid demand {demand} (must be finite and positive)")]
    BadDemand { commodity: usize, demand: f64 },
    #[error("sink of commodity {commodity} is unreachable from its source")]
    Unreachable { commodity: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    arcs: Vec<Arc>,
    commodities: Vec<Commodity>,
    out: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(
        n: usize,
        arcs: Vec<Arc>,
        commodities: Vec<Commodity>,
    ) -> Result<Self, NetworkError> {
        if n == 0 {
            return Err(NetworkError::NoNodes);
        }
        for (i, a) in arcs.iter().enumerate() {
            for node in [a.tail, a.head] {
                if node >= n {
                    return Err(NetworkError::ArcNodeOutOfRange { arc: i, node, n });
                }
            }
            if a.tail == a.head {
                return Err(NetworkError::SelfLoop { arc: i });
            }
            if !(a.cost.is_finite() && a.cost >= 0.0) {
                return Err(NetworkError::BadCost {
                    arc: i,
                    cost: a.cost,
                });
            }
            if !(a.capacity.is_finite() && a.capacity > 0.0) {
                return Err(NetworkError::BadCapacity {
                    arc: i,
                    capacity: a.capacity,
                });
            }
        }
        let out = out_arcs(n, &arcs);
        let unit = vec![1.0; arcs.len()];
        for (k, c) in commodities.iter().enumerate() {
            for node in [c.source, c.sink] {
                if node >= n {
                    return Err(NetworkError::CommodityNodeOutOfRange {
                        commodity: k,
                        node,
                        n,
                    });
                }
            }
            if c.source == c.sink {
                return Err(NetworkError::TrivialCommodity { commodity: k });
            }
            if !(c.demand.is_finite() && c.demand > 0.0) {
                return Err(NetworkError::BadDemand {
                    commodity: k,
                    demand: c.demand,
                });
            }
            if !dijkstra(n, &arcs, &out, &unit, c.source).dist[c.sink].is_finite() {
                return Err(NetworkError::Unreachable { commodity: k });
            }
        }
        Ok(Self {
            n,
            arcs,
            commodities,
            out,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn shortest_paths(&self, lengths: &[f64], source: usize) -> ShortestPathTree {
        dijkstra(self.n, &self.arcs, &self.out, lengths, source)
    }

    /// Penalty of commodity `k`'s artificial column. It exceeds the cost of
    /// routing the demand along any simple path even when every arc carries
    /// the largest capacity dual a feasible instance can induce.
    pub fn artificial_penalty(&self, k: usize) -> f64 {
        let total: f64 = self.arcs.iter().map(|a| a.cost).sum();
        10.0 * self.commodities[k].demand * ((self.n as f64 + 1.0) * total + 1.0)
    }

    /// The compact arc-flow LP: variable `k * m + e` is commodity `k`'s flow
    /// on arc `e`. Conservation rows come first (node-major per commodity),
    /// then one capacity row per arc.
    pub fn compact_lp(&self) -> LinearProgram {
        let m = self.arcs.len();
        let kk = self.commodities.len();
        let mut objective = Vec::with_capacity(m * kk);
        for _ in 0..kk {
            objective.extend(self.arcs.iter().map(|a| a.cost));
        }
        let mut lp = LinearProgram::nonnegative(objective).expect("costs are finite");
        for (k, c) in self.commodities.iter().enumerate() {
            for v in 0..self.n {
                let mut entries = Vec::new();
                for (e, a) in self.arcs.iter().enumerate() {
                    if a.tail == v {
                        entries.push((k * m + e, 1.0));
                    } else if a.head == v {
                        entries.push((k * m + e, -1.0));
                    }
                }
                let rhs = if v == c.source {
                    c.demand
                } else if v == c.sink {
                    -c.demand
                } else {
                    0.0
                };
                lp.add_row(entries, RowKind::Equal, rhs)
                    .expect("indices in range");
            }
        }
        for (e, a) in self.arcs.iter().enumerate() {
            lp.add_row(
                (0..kk).map(|k| (k * m + e, 1.0)),
                RowKind::LessEqual,
                a.capacity,
            )
            .expect("indices in range");
        }
        lp
    }
}

/// Arcs whose capacity rows are currently part of the master.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    active: Vec<bool>,
    /// Arcs reactivated after a removal; these stay active.
    pinned: Vec<bool>,
    removed_once: Vec<bool>,
    pub fraction: f64,
}

impl ActiveSet {
    pub fn empty(num_arcs: usize) -> Self {
        Self {
            active: vec![false; num_arcs],
            pinned: vec![false; num_arcs],
            removed_once: vec![false; num_arcs],
            fraction: DEACTIVATION_FRACTION,
        }
    }

    pub fn contains(&self, arc: usize) -> bool {
        self.active[arc]
    }

    pub fn len(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Activates every inactive arc with flow above capacity and deactivates
    /// every active arc with flow below `fraction` of capacity. An arc that
    /// is activated again after a removal is never removed a second time, so
    /// the set cannot cycle. Removals are skipped in iterations that add rows.
    pub fn update(&mut self, net: &Network, flows: &[f64]) -> RowUpdate {
        let mut update = RowUpdate::default();
        for (e, a) in net.arcs().iter().enumerate() {
            if !self.active[e] && flows[e] > a.capacity + ACTIVATION_TOL {
                update.added.push(e);
            }
        }
        if update.added.is_empty() {
            for (e, a) in net.arcs().iter().enumerate() {
                if self.active[e] && !self.pinned[e] && flows[e] < self.fraction * a.capacity {
                    update.removed.push(e);
                }
            }
        }
        for &e in &update.added {
            self.active[e] = true;
            self.pinned[e] = self.removed_once[e];
        }
        for &e in &update.removed {
            self.active[e] = false;
            self.removed_once[e] = true;
        }
        update
    }
}

/// Shortest-path pricing with the capacity-row active set.
#[derive(Debug, Clone)]
pub struct ShortestPathOracle<'a> {
    net: &'a Network,
    pub active: ActiveSet,
}

impl<'a> ShortestPathOracle<'a> {
    pub fn new(net: &'a Network) -> Self {
        Self {
            net,
            active: ActiveSet::empty(net.arcs().len()),
        }
    }

    /// Modified arc lengths `t - u`. Duals above tolerance are rejected,
    /// tiny positive ones are clamped.
    pub fn lengths(&self, duals: &DualPoint) -> Result<Vec<f64>, OracleError> {
        let arcs = self.net.arcs();
        if duals.linking.len() != arcs.len() {
            return Err(OracleError::DimensionMismatch {
                expected: arcs.len(),
                got: duals.linking.len(),
            });
        }
        if duals.convexity.len() != self.net.commodities().len() {
            return Err(OracleError::DimensionMismatch {
                expected: self.net.commodities().len(),
                got: duals.convexity.len(),
            });
        }
        arcs.iter()
            .zip(&duals.linking)
            .enumerate()
            .map(|(e, (a, &u))| {
                if u > NEGATIVE_DUAL_TOL * (1.0 + a.cost) {
                    Err(OracleError::NegativeLength {
                        arc: e,
                        length: a.cost - u,
                        dual: u,
                    })
                } else {
                    Ok((a.cost - u.min(0.0)).max(0.0))
                }
            })
            .collect()
    }

    fn path_column(&self, k: usize, path: &[usize]) -> Column {
        let c = self.net.commodities()[k];
        let cost = c.demand * path.iter().map(|&e| self.net.arcs()[e].cost).sum::<f64>();
        Column::point(cost, path.iter().map(|&e| (e, c.demand)).collect(), k, k)
    }

    fn price_at(&self, lengths: &[f64], convexity: &[f64], keep_all: bool) -> OracleResult {
        let arcs = self.net.arcs();
        let mut trees: Vec<Option<ShortestPathTree>> = vec![None; self.net.num_nodes()];
        let mut results = Vec::with_capacity(self.net.commodities().len());
        for (k, c) in self.net.commodities().iter().enumerate() {
            let tree =
                trees[c.source].get_or_insert_with(|| self.net.shortest_paths(lengths, c.source));
            let path = tree.path_to(arcs, c.sink).expect("sinks are reachable");
            let len: f64 = path.iter().map(|&e| lengths[e]).sum();
            let value = c.demand * len - convexity[k];
            let column = (keep_all || value < 0.0).then(|| self.path_column(k, &path));
            results.push(SubproblemResult {
                subproblem: k,
                status: SubproblemStatus::Point,
                value,
                column,
            });
        }
        OracleResult::new(results)
    }

    /// Columns from pricing at zero duals: plain shortest paths by cost.
    pub fn initial_columns(&self) -> Vec<Column> {
        let lengths: Vec<f64> = self.net.arcs().iter().map(|a| a.cost).collect();
        let zeros = vec![0.0; self.net.commodities().len()];
        self.price_at(&lengths, &zeros, true)
            .per_subproblem
            .into_iter()
            .filter_map(|r| r.column)
            .collect()
    }

    /// Builds the master: inactive capacity rows, one convexity row and one
    /// artificial per commodity, and the zero-dual shortest-path columns.
    pub fn initial_master(&self) -> Result<RestrictedMaster, MasterError> {
        let kk = self.net.commodities().len();
        let mut rm = RestrictedMaster::new(Sense::Min, kk);
        for (e, a) in self.net.arcs().iter().enumerate() {
            rm.add_linking_row(RowKind::LessEqual, a.capacity, self.active.contains(e));
        }
        for k in 0..kk {
            rm.add_artificial(k, self.net.artificial_penalty(k))?;
        }
        rm.add_columns(self.initial_columns())?;
        Ok(rm)
    }

    fn within_capacity(&self, flows: &[f64]) -> bool {
        self.net
            .arcs()
            .iter()
            .zip(flows)
            .all(|(a, f)| *f <= a.capacity + 1e-6 * a.capacity.max(1.0))
    }
}

impl PricingOracle for ShortestPathOracle<'_> {
    fn price(&mut self, duals: &DualPoint) -> Result<OracleResult, OracleError> {
        let lengths = self.lengths(duals)?;
        Ok(self.price_at(&lengths, &duals.convexity, false))
    }

    fn certifies_upper_bound(&self, master: &RestrictedMaster, primal: &MasterPrimal) -> bool {
        self.within_capacity(&master.column_activity(primal))
    }

    fn update_rows(&mut self, master: &mut RestrictedMaster, primal: &MasterPrimal) -> RowUpdate {
        let flows = master.column_activity(primal);
        let update = self.active.update(self.net, &flows);
        for &e in &update.added {
            master.set_active(e, true);
        }
        for &e in &update.removed {
            master.set_active(e, false);
        }
        update
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McnfSolution {
    pub objective: f64,
    pub lower_bound: f64,
    /// Total flow per arc.
    pub arc_flows: Vec<f64>,
    /// Flow per commodity per arc.
    pub commodity_flows: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    /// Share of capacity rows active at termination.
    pub active_fraction: f64,
    pub artificial_mass: f64,
    pub columns: usize,
    pub trace: Vec<IterationRecord>,
}

/// Solves a multicommodity flow instance by column generation.
pub fn solve_mcnf(net: &Network, cfg: &DriverConfig) -> Result<McnfSolution, DriverError> {
    let mut oracle = ShortestPathOracle::new(net);
    let mut master = oracle.initial_master()?;
    let out = pdcgm::run(&mut master, &mut oracle, cfg)?;
    Ok(mcnf_solution(net, &master, &oracle, out))
}

/// Assembles the reported solution from a finished run.
pub fn mcnf_solution(
    net: &Network,
    master: &RestrictedMaster,
    oracle: &ShortestPathOracle<'_>,
    out: pdcgm::RunOutput,
) -> McnfSolution {
    let inc = &out.solution.incumbent;
    let m = net.arcs().len();
    let mut commodity_flows = vec![vec![0.0; m]; net.commodities().len()];
    for (col, &lam) in master.columns().iter().zip(&inc.columns) {
        if let Some(k) = col.convexity_row {
            for &(e, v) in &col.entries {
                commodity_flows[k][e] += lam * v;
            }
        }
    }
    McnfSolution {
        objective: out.solution.ub,
        lower_bound: out.solution.lb,
        arc_flows: master.column_activity(inc),
        commodity_flows,
        outer_iterations: out.solution.outer_iterations,
        active_fraction: if m == 0 {
            0.0
        } else {
            oracle.active.len() as f64 / m as f64
        },
        artificial_mass: inc.artificial_mass(),
        columns: master.num_columns(),
        trace: out.trace,
    }
}
