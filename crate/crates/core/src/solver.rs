//! Exploitation search against a deterministic imitator.
//!
//! A memory-one rule turns the repeated game into a walk on a graph whose
//! nodes are the imitator's actions: from node `y`, opponent action `x` costs
//! the imitator `delta(x, y)` and moves him to `next(x, y)`. The best the
//! opponent can do over all horizons is then a longest-walk problem, and
//! unbounded exploitation is a positive cycle reachable from the start.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{RelativePayoffGame, SymmetricGame};
use crate::rules::{next_action, trajectory, Rule};
use crate::scalar::{Scalar, Tolerance};

/// Upper limit on opponent sequences enumerated by [`brute_force_oracle`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph<T> {
    n: usize,
    // indexed by y * n + x
    target: Vec<usize>,
    weight: Vec<T>,
    bound: T,
    tolerance: Tolerance,
}

impl<T: Scalar> TransitionGraph<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(next state, weight)` of the edge taken when the opponent plays `x`
    /// against state `y`.
    #[inline]
    pub fn edge(&self, y: usize, x: usize) -> (usize, T) {
        let i = y * self.n + x;
        (self.target[i], self.weight[i])
    }

    /// The largest one-period differential, `max delta`.
    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    /// States reachable from `start`, including `start`.
    pub fn reachable(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(y) = queue.pop_front() {
            for x in 0..self.n {
                let (t, _) = self.edge(y, x);
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Sum of edge weights along an opponent sequence, accumulated forward in
    /// the same order as [`trajectory`].
    pub fn walk_total(&self, start: usize, actions: &[usize]) -> (T, usize) {
        actions.iter().fold((T::ZERO, start), |(total, y), &x| {
            let (t, w) = self.edge(y, x);
            (total + w, t)
        })
    }

    /// Shortest opponent sequence driving the imitator from `from` to `to`,
    /// lowest action indices first.
    fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(y) = queue.pop_front() {
            if y == to {
                break;
            }
            for x in 0..self.n {
                let (t, _) = self.edge(y, x);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((y, x));
                    queue.push_back(t);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = to;
        while node != from {
            let (p, x) = parent[node].expect("target is reachable");
            path.push(x);
            node = p;
        }
        path.reverse();
        path
    }
}

pub fn build_transition_graph<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
) -> TransitionGraph<T> {
    let n = rel.n();
    let tolerance = rel.tolerance(epsilon);
    let mut target = Vec::with_capacity(n * n);
    let mut weight = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            target.push(next_action(rule, rel, &tolerance, x, y));
            weight.push(rel.delta(x, y));
        }
    }
    TransitionGraph {
        n,
        target,
        weight,
        bound: rel.max_relative_payoff(),
        tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploitVerdict {
    EssentiallyUnbeatable,
    BoundedButBeaten,
    MoneyPump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPolicy {
    Given(usize),
    WorstCase,
}

/// A cycle of opponent actions that returns the imitator to `entry` with a
/// strictly positive total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpCycle<T> {
    pub entry: usize,
    pub actions: Vec<usize>,
    pub sum: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploitationCertificate<T> {
    pub verdict: ExploitVerdict,
    /// Best total over all horizons; absent for money pumps.
    pub sup_total: Option<T>,
    pub bound: T,
    /// For finite verdicts, a sequence achieving `sup_total`; for money pumps,
    /// a sequence leading from `y0` to the cycle entry.
    pub witness_path: Vec<usize>,
    pub witness_cycle: Option<PumpCycle<T>>,
    pub policy: StartPolicy,
    pub y0: usize,
    /// Value-iteration sweeps performed.
    pub iterations: usize,
}

impl<T: Scalar> ExploitationCertificate<T> {
    pub fn is_unbeatable(&self) -> bool {
        self.verdict == ExploitVerdict::EssentiallyUnbeatable
    }
}

/// Best-prefix values `W_k(y)`: the most the opponent can gain from state `y`
/// within at most `k` rounds (zero for stopping immediately).
///
/// `W_0 = 0`, `W_{k+1}(y) = max(0, max_x [w(y, x) + W_k(next(y, x))])`.
/// `choices[k][y]` is the first action of an optimal walk of at most `k`
/// rounds, `None` when stopping is optimal.
struct ValueLayers<T> {
    values: Vec<Vec<T>>,
    choices: Vec<Vec<Option<usize>>>,
}

fn value_layers<T: Scalar>(graph: &TransitionGraph<T>, sweeps: usize) -> ValueLayers<T> {
    let n = graph.n;
    let mut values = vec![vec![T::ZERO; n]];
    let mut choices = vec![vec![None; n]];
    for k in 0..sweeps {
        let prev = &values[k];
        let mut layer = vec![T::ZERO; n];
        let mut choice = vec![None; n];
        for y in 0..n {
            for x in 0..n {
                let (t, w) = graph.edge(y, x);
                let candidate = w + prev[t];
                if candidate > layer[y] {
                    layer[y] = candidate;
                    choice[y] = Some(x);
                }
            }
        }
        values.push(layer);
        choices.push(choice);
    }
    ValueLayers { values, choices }
}

impl<T: Scalar> ValueLayers<T> {
    /// The shortest optimal opponent sequence: follows choices from the
    /// first layer that already attains the depth-`depth` value.
    fn witness(&self, graph: &TransitionGraph<T>, start: usize, depth: usize) -> Vec<usize> {
        let target = self.values[depth][start];
        let first = (0..=depth)
            .find(|&k| self.values[k][start] >= target)
            .unwrap_or(depth);
        let mut path = Vec::new();
        let mut y = start;
        for k in (1..=first).rev() {
            match self.choices[k][y] {
                Some(x) => {
                    path.push(x);
                    y = graph.edge(y, x).0;
                }
                None => break,
            }
        }
        path
    }
}

/// The opponent's best total within `rounds` rounds from `start`.
pub fn best_prefix_value<T: Scalar>(graph: &TransitionGraph<T>, start: usize, rounds: usize) -> T {
    value_layers(graph, rounds).values[rounds][start]
}

/// Longest walks of exactly `k` edges from `start`, with predecessors, used to
/// pull a positive cycle out of a graph that has one.
fn extract_positive_cycle<T: Scalar>(
    graph: &TransitionGraph<T>,
    start: usize,
    reachable: &[bool],
) -> Option<PumpCycle<T>> {
    let n = graph.n;
    let layers = reachable.iter().filter(|&&r| r).count();
    let mut best: Vec<Vec<Option<T>>> = vec![vec![None; n]];
    let mut pred: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; n]];
    best[0][start] = Some(T::ZERO);
    for k in 0..layers {
        let mut layer: Vec<Option<T>> = vec![None; n];
        let mut back = vec![None; n];
        for (u, base) in best[k].iter().enumerate() {
            let Some(base) = *base else { continue };
            for x in 0..n {
                let (v, w) = graph.edge(u, x);
                let candidate = base + w;
                if layer[v].is_none_or(|cur| candidate > cur) {
                    layer[v] = Some(candidate);
                    back[v] = Some((u, x));
                }
            }
        }
        best.push(layer);
        pred.push(back);
    }

    // A node whose longest walk of full length beats every shorter walk to it
    // sits at the end of a walk containing a positive cycle.
    let end = (0..n).find(|&v| match best[layers][v] {
        Some(full) => (0..layers).all(|k| best[k][v].is_none_or(|shorter| full > shorter)),
        None => false,
    })?;

    let mut nodes = vec![end];
    let mut actions = Vec::with_capacity(layers);
    let mut v = end;
    for k in (1..=layers).rev() {
        let (u, x) = pred[k][v].expect("walk layers are connected");
        actions.push(x);
        nodes.push(u);
        v = u;
    }
    nodes.reverse();
    actions.reverse();

    // Loop-erase the walk; every erased loop is a simple cycle.
    let mut stack_nodes = vec![nodes[0]];
    let mut stack_actions: Vec<usize> = Vec::new();
    let mut found: Option<PumpCycle<T>> = None;
    for (i, &x) in actions.iter().enumerate() {
        let next = nodes[i + 1];
        if let Some(pos) = stack_nodes.iter().position(|&s| s == next) {
            let mut cycle_actions = stack_actions[pos..].to_vec();
            cycle_actions.push(x);
            let (sum, back_at) = graph.walk_total(next, &cycle_actions);
            debug_assert_eq!(back_at, next);
            if found.as_ref().is_none_or(|c| sum > c.sum) {
                found = Some(PumpCycle {
                    entry: next,
                    actions: cycle_actions,
                    sum,
                });
            }
            stack_nodes.truncate(pos + 1);
            stack_actions.truncate(pos);
        } else {
            stack_actions.push(x);
            stack_nodes.push(next);
        }
    }
    found.map(|c| canonical_rotation(graph, c))
}

/// Rotates a simple cycle so that it is entered at its lowest-index state.
fn canonical_rotation<T: Scalar>(graph: &TransitionGraph<T>, cycle: PumpCycle<T>) -> PumpCycle<T> {
    let mut states = Vec::with_capacity(cycle.actions.len());
    let mut y = cycle.entry;
    for &x in &cycle.actions {
        states.push(y);
        y = graph.edge(y, x).0;
    }
    let (offset, &entry) = states
        .iter()
        .enumerate()
        .min_by_key(|&(_, &s)| s)
        .expect("cycles are non-empty");
    let mut actions = cycle.actions;
    actions.rotate_left(offset);
    let (sum, _) = graph.walk_total(entry, &actions);
    PumpCycle {
        entry,
        actions,
        sum,
    }
}

/// Precomputed value iteration shared by all start states of one graph.
pub struct Solver<'g, T> {
    graph: &'g TransitionGraph<T>,
    layers: ValueLayers<T>,
}

impl<'g, T: Scalar> Solver<'g, T> {
    pub fn new(graph: &'g TransitionGraph<T>) -> Self {
        // n sweeps settle every value unless a positive cycle is in play; one
        // more sweep exposes it.
        let layers = value_layers(graph, graph.n + 1);
        Solver { graph, layers }
    }

    pub fn sweeps(&self) -> usize {
        self.layers.values.len() - 1
    }

    fn pump_reachable(&self, reachable: &[bool]) -> bool {
        let n = self.graph.n;
        let tol = self.graph.tolerance.widened(n as f64);
        let (stable, extra) = (&self.layers.values[n], &self.layers.values[n + 1]);
        (0..n).any(|y| reachable[y] && tol.exceeds(extra[y], stable[y]))
    }

    /// Certificate for a single start state.
    pub fn from_start(&self, y0: usize, policy: StartPolicy) -> ExploitationCertificate<T> {
        let graph = self.graph;
        let n = graph.n;
        let reachable = graph.reachable(y0);
        if self.pump_reachable(&reachable) {
            let cycle_tol = graph.tolerance.widened(n as f64);
            if let Some(cycle) = extract_positive_cycle(graph, y0, &reachable)
                .filter(|c| cycle_tol.is_positive(c.sum))
            {
                return ExploitationCertificate {
                    verdict: ExploitVerdict::MoneyPump,
                    sup_total: None,
                    bound: graph.bound,
                    witness_path: graph.shortest_path(y0, cycle.entry),
                    witness_cycle: Some(cycle),
                    policy,
                    y0,
                    iterations: self.sweeps(),
                };
            }
            // Below the cycle threshold: float noise, not a pump.
        }
        let witness_path = self.layers.witness(graph, y0, n);
        let (sup_total, _) = graph.walk_total(y0, &witness_path);
        let verdict = if graph.tolerance.exceeds(sup_total, graph.bound) {
            ExploitVerdict::BoundedButBeaten
        } else {
            ExploitVerdict::EssentiallyUnbeatable
        };
        ExploitationCertificate {
            verdict,
            sup_total: Some(sup_total),
            bound: graph.bound,
            witness_path,
            witness_cycle: None,
            policy,
            y0,
            iterations: self.sweeps(),
        }
    }

    /// Worst start state: any money pump first, otherwise the largest
    /// `sup_total`; ties go to the lowest start index.
    pub fn worst_case(&self) -> ExploitationCertificate<T> {
        let mut worst: Option<ExploitationCertificate<T>> = None;
        for y0 in 0..self.graph.n {
            let cert = self.from_start(y0, StartPolicy::WorstCase);
            if cert.verdict == ExploitVerdict::MoneyPump {
                return cert;
            }
            let better = match &worst {
                None => true,
                Some(w) => cert.sup_total > w.sup_total,
            };
            if better {
                worst = Some(cert);
            }
        }
        worst.expect("games have at least one action")
    }
}

/// Supremum of the opponent's cumulative relative payoff from `y0`.
pub fn sup_exploitation<T: Scalar>(
    graph: &TransitionGraph<T>,
    y0: usize,
) -> ExploitationCertificate<T> {
    Solver::new(graph).from_start(y0, StartPolicy::Given(y0))
}

/// Checks whether `rule` keeps every opponent within `max delta` of the
/// imitator, from the given start or from every start.
pub fn certify_unbeatable<T: Scalar>(
    game: &SymmetricGame<T>,
    rule: &Rule,
    policy: StartPolicy,
    epsilon: f64,
) -> Result<ExploitationCertificate<T>> {
    let rel = RelativePayoffGame::from_game(game);
    certify_relative(&rel, rule, policy, epsilon)
}

pub fn certify_relative<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    rule: &Rule,
    policy: StartPolicy,
    epsilon: f64,
) -> Result<ExploitationCertificate<T>> {
    let n = rel.n();
    if let Rule::Custom(table) = rule {
        if table.n() != n {
            return Err(Error::InvalidRule(format!(
                "custom table covers {} actions, game has {n}",
                table.n()
            )));
        }
    }
    let graph = build_transition_graph(rule, rel, epsilon);
    let solver = Solver::new(&graph);
    match policy {
        StartPolicy::Given(y0) if y0 >= n => Err(Error::BadIndex { index: y0, n }),
        StartPolicy::Given(y0) => Ok(solver.from_start(y0, policy)),
        StartPolicy::WorstCase => Ok(solver.worst_case()),
    }
}

/// Exhaustive check of [`sup_exploitation`]: replays every opponent sequence
/// of `horizon + 1` rounds (periods `0..=horizon`) and returns the best
/// running total seen at any prefix.
pub fn brute_force_oracle<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    rule: &Rule,
    y0: usize,
    horizon: usize,
    epsilon: f64,
) -> Result<T> {
    let n = rel.n();
    if y0 >= n {
        return Err(Error::BadIndex { index: y0, n });
    }
    let rounds = horizon + 1;
    let sequences = (n as u128).checked_pow(rounds as u32).unwrap_or(u128::MAX);
    if sequences > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            sequences,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut seq = vec![0usize; rounds];
    let mut best: Option<T> = None;
    loop {
        for round in trajectory(rule, rel, epsilon, y0, &seq) {
            if best.is_none_or(|b| round.total > b) {
                best = Some(round.total);
            }
        }
        // odometer increment
        let mut i = rounds;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one round"));
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
        }
    }
}
