//! The coalition formation game: coalition values with a logarithmic energy
//! barrier, Pareto-order comparison, the merge-and-split search, and
//! stability checks.
//!
//! Every sensor in a coalition receives the coalition's value as its payoff,
//! so the game's preference relation compares coalition values player by
//! player. Merge-and-split iterates two rules until neither applies: merge a
//! pair of coalitions when the union Pareto-improves both sides, split a
//! coalition into two parts when the parts Pareto-improve the whole. Fixed
//! points of the two rules are exactly the merge/split-stable partitions.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::metrics::{
    coalition_metric, individual_metric, InferenceTask, McSettings, MetricValue, MetricsError,
    NetDependence,
};
use crate::network::{EnergyModel, NetworkModel};
use crate::rng::RunSeed;

/// Floating-point threshold for the "at least one strict inequality" clause
/// of the Pareto order; prevents merge/split oscillation on ties.
pub const STRICT_IMPROVEMENT_EPS: f64 = 1e-9;

/// Merge-and-split operation budget before the runner aborts.
pub const DEFAULT_OP_CAP: usize = 10_000;

const MAX_SENSORS: usize = 64;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("coalition must be nonempty")]
    EmptyCoalition,
    #[error("duplicate member {0}")]
    DuplicateMember(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("collections do not cover the same players")]
    PlayerSetMismatch,
    #[error("the game supports at most {MAX_SENSORS} sensors, got {0}")]
    TooManySensors(usize),
    #[error("merge-and-split exceeded the operation cap of {cap}")]
    IterationCapExceeded { cap: usize, trace: Vec<TraceStep> },
    #[error("merge-and-split revisited a partition; aborting")]
    CycleDetected { trace: Vec<TraceStep> },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Nonempty sorted set of sensor ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    members: Vec<usize>,
}

impl Coalition {
    pub fn new(mut members: Vec<usize>) -> Result<Self, GameError> {
        if members.is_empty() {
            return Err(GameError::EmptyCoalition);
        }
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(GameError::DuplicateMember(w[0]));
            }
        }
        Ok(Coalition { members })
    }

    pub fn singleton(id: usize) -> Self {
        Coalition { members: vec![id] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    /// Union of two disjoint coalitions.
    fn union(&self, other: &Coalition) -> Coalition {
        let mut members = Vec::with_capacity(self.len() + other.len());
        members.extend_from_slice(&self.members);
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        Coalition { members }
    }

    fn bitmask(&self) -> u64 {
        self.members.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }
}

/// Disjoint coalitions covering the whole sensor set, kept in canonical
/// order (ascending smallest member).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    coalitions: Vec<Coalition>,
    n: usize,
}

impl Partition {
    pub fn new(mut coalitions: Vec<Coalition>, n: usize) -> Result<Self, GameError> {
        let mut seen = vec![false; n];
        for c in &coalitions {
            for &m in c.members() {
                if m >= n {
                    return Err(GameError::InvalidPartition(format!(
                        "member {m} out of range for {n} sensors"
                    )));
                }
                if seen[m] {
                    return Err(GameError::InvalidPartition(format!(
                        "member {m} appears in two coalitions"
                    )));
                }
                seen[m] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(GameError::InvalidPartition(format!(
                "sensor {missing} is not covered"
            )));
        }
        coalitions.sort_by_key(|c| c.members()[0]);
        Ok(Partition { coalitions, n })
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            coalitions: (0..n).map(Coalition::singleton).collect(),
            n,
        }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn sensor_count(&self) -> usize {
        self.n
    }

    pub fn max_coalition_size(&self) -> usize {
        self.coalitions
            .iter()
            .map(Coalition::len)
            .max()
            .unwrap_or(0)
    }

    /// Canonical key for cycle detection and equality.
    fn key(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.coalitions.iter().map(Coalition::bitmask).collect();
        k.sort_unstable();
        k
    }

    fn replace_pair(&self, i: usize, j: usize, merged: Coalition) -> Partition {
        let mut coalitions: Vec<Coalition> = self
            .coalitions
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i && k != j)
            .map(|(_, c)| c.clone())
            .collect();
        coalitions.push(merged);
        coalitions.sort_by_key(|c| c.members()[0]);
        Partition {
            coalitions,
            n: self.n,
        }
    }

    fn replace_split(&self, idx: usize, a: Coalition, b: Coalition) -> Partition {
        let mut coalitions: Vec<Coalition> = self
            .coalitions
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != idx)
            .map(|(_, c)| c.clone())
            .collect();
        coalitions.push(a);
        coalitions.push(b);
        coalitions.sort_by_key(|c| c.members()[0]);
        Partition {
            coalitions,
            n: self.n,
        }
    }
}

/// Decomposed ledger of one coalition's worth.
#[derive(Debug, Clone, Copy)]
pub struct CoalitionValue {
    pub individual_sum: f64,
    pub diversity_gain: f64,
    pub redundancy_loss: f64,
    pub energy: f64,
    /// Logarithmic barrier cost; infinite when the energy budget is violated.
    pub cost: f64,
    /// `individual_sum + diversity_gain - redundancy_loss - cost`.
    pub value: f64,
    /// Standard error of the underlying metric when it was Monte-Carlo.
    pub metric_std_error: f64,
}

/// Logarithmic barrier cost of an energy level: `-(1/t) log(1 - E/alpha)`
/// below the budget, infinite at or above it.
pub fn barrier_cost(energy: f64, e: &EnergyModel) -> f64 {
    if energy < e.budget {
        -(-energy / e.budget).ln_1p() / e.barrier_t
    } else {
        f64::INFINITY
    }
}

/// Everything a game run needs: the immutable network, the task, the
/// dependence model, Monte-Carlo settings, the run seed, and the metric
/// memo. Metric values depend only on (seed, member set), so re-evaluating
/// a coalition always reproduces the identical number; the energy model is
/// kept separately so one context (and its metric cache) can serve a sweep
/// over budgets.
pub struct GameContext<'a> {
    net: &'a NetworkModel,
    task: InferenceTask,
    dep: NetDependence,
    mc: McSettings,
    seed: RunSeed,
    energy: EnergyModel,
    metric_cache: HashMap<u64, MetricValue>,
}

impl<'a> GameContext<'a> {
    pub fn new(
        net: &'a NetworkModel,
        task: InferenceTask,
        dep: NetDependence,
        mc: McSettings,
        seed: RunSeed,
    ) -> Result<Self, GameError> {
        if net.len() > MAX_SENSORS {
            return Err(GameError::TooManySensors(net.len()));
        }
        Ok(GameContext {
            net,
            task,
            dep,
            mc,
            seed,
            energy: *net.energy(),
            metric_cache: HashMap::new(),
        })
    }

    pub fn network(&self) -> &NetworkModel {
        self.net
    }

    pub fn task(&self) -> &InferenceTask {
        &self.task
    }

    pub fn energy_model(&self) -> &EnergyModel {
        &self.energy
    }

    /// Swap the energy model (e.g. for a budget sweep); cached metrics stay
    /// valid because they do not depend on it.
    pub fn set_energy_model(&mut self, energy: EnergyModel) {
        self.energy = energy;
    }

    /// The coalition's inference metric, memoized by member set.
    pub fn metric(&mut self, c: &Coalition) -> Result<MetricValue, GameError> {
        let key = c.bitmask();
        if let Some(v) = self.metric_cache.get(&key) {
            return Ok(v.clone());
        }
        let v = coalition_metric(
            c.members(),
            self.net,
            &self.task,
            &self.dep,
            &self.mc,
            self.seed,
        )?;
        self.metric_cache.insert(key, v.clone());
        Ok(v)
    }

    /// Value of a coalition. Coalitions that violate the energy budget get
    /// value negative infinity without touching the metric estimators.
    pub fn coalition_value(&mut self, c: &Coalition) -> Result<CoalitionValue, GameError> {
        let energy = self
            .energy
            .coalition_energy(c.len())
            .map_err(|_| GameError::EmptyCoalition)?;
        if energy >= self.energy.budget {
            let mut individual_sum = 0.0;
            for &m in c.members() {
                individual_sum += individual_metric(&self.net.sensor(m).marginal, &self.task)?;
            }
            return Ok(CoalitionValue {
                individual_sum,
                diversity_gain: 0.0,
                redundancy_loss: 0.0,
                energy,
                cost: f64::INFINITY,
                value: f64::NEG_INFINITY,
                metric_std_error: 0.0,
            });
        }
        let metric = self.metric(c)?;
        let cost = barrier_cost(energy, &self.energy);
        let value = metric.individual_sum + metric.diversity_gain - metric.redundancy_loss - cost;
        Ok(CoalitionValue {
            individual_sum: metric.individual_sum,
            diversity_gain: metric.diversity_gain,
            redundancy_loss: metric.redundancy_loss,
            energy,
            cost,
            value,
            metric_std_error: metric.std_error(),
        })
    }

    /// Per-sensor payoff summary of a partition: average payoff, largest
    /// coalition, summed energy.
    pub fn partition_stats(&mut self, p: &Partition) -> Result<(f64, usize, f64), GameError> {
        let mut payoff_sum = 0.0;
        let mut total_energy = 0.0;
        for c in p.coalitions() {
            let v = self.coalition_value(c)?;
            payoff_sum += v.value * c.len() as f64;
            total_energy += v.energy;
        }
        Ok((
            payoff_sum / p.sensor_count() as f64,
            p.max_coalition_size(),
            total_energy,
        ))
    }
}

/// Pareto order between two collections over the same players: true iff
/// every player is weakly better off in `after` and at least one exceeds
/// its old payoff by more than [`STRICT_IMPROVEMENT_EPS`].
pub fn pareto_prefers(
    after: &[Coalition],
    before: &[Coalition],
    ctx: &mut GameContext,
) -> Result<bool, GameError> {
    let mask = |cs: &[Coalition]| cs.iter().fold(0u64, |m, c| m | c.bitmask());
    let after_mask = mask(after);
    if after_mask != mask(before) {
        return Err(GameError::PlayerSetMismatch);
    }
    let covered: usize = after.iter().map(Coalition::len).sum();
    if covered != after_mask.count_ones() as usize
        || before.iter().map(Coalition::len).sum::<usize>() != covered
    {
        return Err(GameError::PlayerSetMismatch);
    }

    let mut before_payoff: HashMap<usize, f64> = HashMap::new();
    for c in before {
        let v = ctx.coalition_value(c)?.value;
        for &m in c.members() {
            before_payoff.insert(m, v);
        }
    }
    let mut any_strict = false;
    for c in after {
        let v = ctx.coalition_value(c)?.value;
        for &m in c.members() {
            let old = before_payoff[&m];
            if v < old {
                return Ok(false);
            }
            if v > old + STRICT_IMPROVEMENT_EPS {
                any_strict = true;
            }
        }
    }
    Ok(any_strict)
}

/// Best Pareto-improving pairwise merge: among all pairs whose union
/// Pareto-improves both sides, pick the one with the largest total payoff
/// gain (ties broken by scan order). Greedy first-improvement would lock
/// strongly complementary sensors into mediocre coalitions filled to the
/// energy cap before their pairing is ever examined; selecting the most
/// useful partner first avoids those traps and matches how the players are
/// meant to choose collaborators.
fn find_improving_merge(
    p: &Partition,
    ctx: &mut GameContext,
) -> Result<Option<(usize, usize)>, GameError> {
    let m = p.coalitions().len();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..m {
        for j in (i + 1)..m {
            let a = &p.coalitions()[i];
            let b = &p.coalitions()[j];
            // Infeasible unions are never preferred; skip the metric work.
            if !ctx.energy.is_feasible(a.len() + b.len()) {
                continue;
            }
            let va = ctx.coalition_value(a)?.value;
            let vb = ctx.coalition_value(b)?.value;
            let vu = ctx.coalition_value(&a.union(b))?.value;
            let improves = vu >= va
                && vu >= vb
                && (vu > va + STRICT_IMPROVEMENT_EPS || vu > vb + STRICT_IMPROVEMENT_EPS);
            if !improves {
                continue;
            }
            let gain = (vu - va) * a.len() as f64 + (vu - vb) * b.len() as f64;
            if best.map(|(g, _, _)| gain > g).unwrap_or(true) {
                best = Some((gain, i, j));
            }
        }
    }
    Ok(best.map(|(_, i, j)| (i, j)))
}

/// Two-part splits of a coalition in deterministic enumeration order.
fn two_part_splits(c: &Coalition) -> impl Iterator<Item = (Coalition, Coalition)> + '_ {
    let m = c.len();
    let members = c.members();
    (1u64..(1u64 << (m - 1))).map(move |mask| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (k, &id) in members.iter().enumerate() {
            if mask & (1 << k) != 0 {
                a.push(id);
            } else {
                b.push(id);
            }
        }
        (Coalition { members: a }, Coalition { members: b })
    })
}

fn find_improving_split(
    p: &Partition,
    ctx: &mut GameContext,
) -> Result<Option<(usize, Coalition, Coalition)>, GameError> {
    for (idx, c) in p.coalitions().iter().enumerate() {
        if c.len() < 2 {
            continue;
        }
        for (a, b) in two_part_splits(c) {
            let after = [a, b];
            if pareto_prefers(&after, std::slice::from_ref(c), ctx)? {
                let [a, b] = after;
                return Ok(Some((idx, a, b)));
            }
        }
    }
    Ok(None)
}

/// Apply Pareto-improving merges until none remains.
pub fn merge_pass(p: &Partition, ctx: &mut GameContext) -> Result<Partition, GameError> {
    let mut current = p.clone();
    while let Some((i, j)) = find_improving_merge(&current, ctx)? {
        let merged = current.coalitions()[i].union(&current.coalitions()[j]);
        current = current.replace_pair(i, j, merged);
    }
    Ok(current)
}

/// Apply Pareto-improving two-part splits until none remains.
pub fn split_pass(p: &Partition, ctx: &mut GameContext) -> Result<Partition, GameError> {
    let mut current = p.clone();
    while let Some((idx, a, b)) = find_improving_split(&current, ctx)? {
        current = current.replace_split(idx, a, b);
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameOp {
    Merge,
    Split,
}

impl std::fmt::Display for GameOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GameOp::Merge => "merge",
            GameOp::Split => "split",
        })
    }
}

/// One accepted merge or split and the resulting state.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub step: usize,
    pub op: GameOp,
    pub partition: Partition,
    pub average_payoff: f64,
    pub max_coalition_size: usize,
    pub total_energy: f64,
}

/// Result of iterating merge-and-split to a fixed point.
#[derive(Debug, Clone)]
pub struct MergeSplitOutcome {
    pub initial: Partition,
    pub final_partition: Partition,
    pub initial_average_payoff: f64,
    pub trace: Vec<TraceStep>,
}

/// Run merge passes and split passes alternately until one full cycle
/// changes nothing. Every accepted operation strictly increases the total
/// payoff, so the iteration terminates; the cap and the visited-partition
/// check guard against defects.
pub fn run_merge_split(
    initial: Partition,
    ctx: &mut GameContext,
    op_cap: usize,
) -> Result<MergeSplitOutcome, GameError> {
    let mut current = initial.clone();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    seen.insert(current.key());
    let (initial_average_payoff, _, _) = ctx.partition_stats(&current)?;

    fn record(
        op: GameOp,
        p: &Partition,
        ctx: &mut GameContext,
        trace: &mut Vec<TraceStep>,
        seen: &mut HashSet<Vec<u64>>,
        op_cap: usize,
    ) -> Result<(), GameError> {
        let (average_payoff, max_coalition_size, total_energy) = ctx.partition_stats(p)?;
        trace.push(TraceStep {
            step: trace.len() + 1,
            op,
            partition: p.clone(),
            average_payoff,
            max_coalition_size,
            total_energy,
        });
        if trace.len() > op_cap {
            return Err(GameError::IterationCapExceeded {
                cap: op_cap,
                trace: trace.clone(),
            });
        }
        if !seen.insert(p.key()) {
            return Err(GameError::CycleDetected {
                trace: trace.clone(),
            });
        }
        Ok(())
    }

    loop {
        let mut changed = false;
        while let Some((i, j)) = find_improving_merge(&current, ctx)? {
            let merged = current.coalitions()[i].union(&current.coalitions()[j]);
            current = current.replace_pair(i, j, merged);
            record(GameOp::Merge, &current, ctx, &mut trace, &mut seen, op_cap)?;
            changed = true;
        }
        while let Some((idx, a, b)) = find_improving_split(&current, ctx)? {
            current = current.replace_split(idx, a, b);
            record(GameOp::Split, &current, ctx, &mut trace, &mut seen, op_cap)?;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Ok(MergeSplitOutcome {
        initial,
        final_partition: current,
        initial_average_payoff,
        trace,
    })
}

/// A partition is merge/split-stable iff no pairwise merge and no two-part
/// split is Pareto-preferred.
pub fn is_dhp_stable(p: &Partition, ctx: &mut GameContext) -> Result<bool, GameError> {
    Ok(find_improving_merge(p, ctx)?.is_none() && find_improving_split(p, ctx)?.is_none())
}

/// Diagnostic for small networks (at most 8 sensors): does the partition
/// weakly dominate every other partition player by player? A true result is
/// a sufficient condition for stability against arbitrary deviations; the
/// check is reported, never asserted, because such a partition need not
/// exist.
pub fn dominates_all_partitions(
    p: &Partition,
    ctx: &mut GameContext,
) -> Result<Option<bool>, GameError> {
    let n = p.sensor_count();
    if n > 8 {
        return Ok(None);
    }
    let mut own = vec![0.0; n];
    for c in p.coalitions() {
        let v = ctx.coalition_value(c)?.value;
        for &m in c.members() {
            own[m] = v;
        }
    }
    // Enumerate all partitions via restricted growth strings.
    let mut labels = vec![0usize; n];
    loop {
        let groups = labels.iter().copied().max().unwrap_or(0) + 1;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        for group in members {
            let c = Coalition { members: group };
            let v = ctx.coalition_value(&c)?.value;
            for &m in c.members() {
                if v > own[m] + 1e-12 {
                    return Ok(Some(false));
                }
            }
        }
        // Advance to the next restricted growth string.
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(Some(true));
            }
            i -= 1;
            let max_prefix = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= max_prefix {
                labels[i] += 1;
                for l in labels.iter_mut().skip(i + 1) {
                    *l = 0;
                }
                break;
            }
        }
    }
}
