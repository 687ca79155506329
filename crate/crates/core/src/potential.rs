//! Exact-potential structure of symmetric games.
//!
//! For a symmetric two-player game the following are interchangeable tests of
//! the same property: an exact potential for the payoffs, an exact potential
//! for the relative payoffs, increasing differences of the relative payoffs,
//! decreasing differences, and additive separability. Each gets its own
//! checker here so they can be cross-validated against one another.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{RelativePayoffGame, SymmetricGame};
use crate::scalar::Scalar;

/// Largest action count for which total orders are enumerated exhaustively.
pub const MAX_ORDER_ENUMERATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialVerdict {
    ExactPotential,
    NotExactPotential,
}

/// An action triple `(x0, x1, x2)` whose 3-cycle sum
/// `delta(x0, x2) + delta(x1, x0) + delta(x2, x1)` is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleWitness<T> {
    pub actions: [usize; 3],
    pub cycle_sum: T,
}

/// `delta(x, y) = f(x) - f(y)`, normalized so that `f(actions[0]) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparableDecomposition<T> {
    f: Vec<T>,
}

impl<T: Scalar> SeparableDecomposition<T> {
    pub fn f(&self) -> &[T] {
        &self.f
    }

    /// The opponent-side term of `delta(x, y) = f(x) + g(y)`, always `-f`.
    pub fn g(&self) -> Vec<T> {
        self.f.iter().map(|&v| -v).collect()
    }

    pub fn value(&self, action: usize) -> T {
        self.f[action]
    }
}

/// An `n x n` exact potential, `P(actions[0], actions[0]) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> PotentialTable<T> {
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[x * self.n + y]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.values.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl<T: Scalar> Serialize for PotentialTable<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PotentialCertificate<T> {
    pub verdict: PotentialVerdict,
    pub potential: Option<PotentialTable<T>>,
    pub decomposition: Option<SeparableDecomposition<T>>,
    pub witness: Option<CycleWitness<T>>,
    pub epsilon: f64,
}

impl<T: Scalar> PotentialCertificate<T> {
    pub fn is_exact_potential(&self) -> bool {
        self.verdict == PotentialVerdict::ExactPotential
    }
}

fn cycle_sum<T: Scalar>(rel: &RelativePayoffGame<T>, a: usize, b: usize, c: usize) -> T {
    rel.delta(a, c) + rel.delta(b, a) + rel.delta(c, b)
}

/// Scans every action triple for a nonzero 3-cycle sum.
///
/// Returns a verdict-only certificate; on failure the witness is the triple
/// with the largest absolute cycle sum, earliest in lexicographic order.
pub fn check_valuation<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
) -> PotentialCertificate<T> {
    let n = rel.n();
    let tol = rel.tolerance(epsilon);
    let mut worst: Option<CycleWitness<T>> = None;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let sum = cycle_sum(rel, a, b, c);
                let beats = match &worst {
                    None => true,
                    Some(w) => sum.abs() > w.cycle_sum.abs(),
                };
                if beats {
                    worst = Some(CycleWitness {
                        actions: [a, b, c],
                        cycle_sum: sum,
                    });
                }
            }
        }
    }
    let witness = worst.filter(|w| !tol.is_zero(w.cycle_sum));
    PotentialCertificate {
        verdict: if witness.is_some() {
            PotentialVerdict::NotExactPotential
        } else {
            PotentialVerdict::ExactPotential
        },
        potential: None,
        decomposition: None,
        witness,
        epsilon,
    }
}

/// Reads `f(x) = delta(x, actions[0])` and verifies `delta(x, y) = f(x) - f(y)`.
pub fn separable_decomposition<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
) -> Result<SeparableDecomposition<T>> {
    let n = rel.n();
    let tol = rel.tolerance(epsilon);
    let f: Vec<T> = (0..n).map(|x| rel.delta(x, 0)).collect();
    let mut worst: Option<(usize, usize, T)> = None;
    for x in 0..n {
        for y in 0..n {
            let residual = (rel.delta(x, y) - (f[x] - f[y])).abs();
            if worst.is_none_or(|(_, _, w)| residual > w) {
                worst = Some((x, y, residual));
            }
        }
    }
    match worst {
        Some((x, y, r)) if tol.is_positive(r) => Err(Error::NotSeparable {
            x,
            y,
            violation: r.to_f64(),
        }),
        _ => Ok(SeparableDecomposition { f }),
    }
}

/// General additive separability `delta(x, y) = f(x) + g(y)`, without using
/// the zero-sum structure: every cross difference must vanish.
pub fn is_additively_separable<T: Scalar>(rel: &RelativePayoffGame<T>, epsilon: f64) -> bool {
    let n = rel.n();
    let tol = rel.tolerance(epsilon);
    (0..n).all(|x| {
        (0..n).all(|y| {
            let cross = rel.delta(x, y) - rel.delta(x, 0) - rel.delta(0, y) + rel.delta(0, 0);
            tol.is_zero(cross)
        })
    })
}

/// Builds an exact potential by integrating unilateral payoff differences
/// along the staircase `(a0, a0) -> (ai, a0) -> (ai, aj)`, then verifies both
/// defining identities on every `(x, x', y)`.
pub fn construct_exact_potential<T: Scalar>(
    game: &SymmetricGame<T>,
    epsilon: f64,
) -> Result<PotentialTable<T>> {
    let n = game.n();
    let pi = |x: usize, y: usize| game.payoff(x, y);
    let mut values = vec![T::ZERO; n * n];
    for i in 0..n {
        // First coordinate moves: P(ai, a0) - P(a0, a0) = pi(ai, a0) - pi(a0, a0).
        let base = pi(i, 0) - pi(0, 0);
        values[i * n] = base;
        for j in 1..n {
            // Second coordinate moves: P(ai, aj) - P(ai, a0) = pi(aj, ai) - pi(a0, ai).
            values[i * n + j] = base + (pi(j, i) - pi(0, i));
        }
    }
    let table = PotentialTable { n, values };

    let tol = game.tolerance(epsilon);
    let mut worst: Option<(String, T)> = None;
    for x in 0..n {
        for xp in 0..n {
            for y in 0..n {
                let gain = pi(x, y) - pi(xp, y);
                let row_role = (gain - (table.get(x, y) - table.get(xp, y))).abs();
                let col_role = (gain - (table.get(y, x) - table.get(y, xp))).abs();
                for (role, err) in [("row", row_role), ("column", col_role)] {
                    if worst.as_ref().is_none_or(|(_, w)| err > *w) {
                        worst = Some((format!("{role} deviation x={x}, x'={xp}, y={y}"), err));
                    }
                }
            }
        }
    }
    match worst {
        Some((context, err)) if tol.is_positive(err) => Err(Error::NoExactPotential {
            context,
            violation: err.to_f64(),
        }),
        _ => Ok(table),
    }
}

/// Full certificate: verdict and witness, plus `P` and `f` when they exist.
pub fn certify_potential<T: Scalar>(
    game: &SymmetricGame<T>,
    epsilon: f64,
) -> PotentialCertificate<T> {
    let rel = RelativePayoffGame::from_game(game);
    let mut cert = check_valuation(&rel, epsilon);
    if cert.is_exact_potential() {
        cert.decomposition = separable_decomposition(&rel, epsilon).ok();
        cert.potential = construct_exact_potential(game, epsilon).ok();
    }
    cert
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A quadruple `x_hi > x_lo`, `y_hi > y_lo` violating the differences condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrupleWitness<T> {
    pub x_hi: usize,
    pub x_lo: usize,
    pub y_hi: usize,
    pub y_lo: usize,
    /// How far the inequality is violated (always positive).
    pub violation: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferencesCheck<T> {
    pub holds: bool,
    pub witness: Option<QuadrupleWitness<T>>,
}

/// Checks increasing or decreasing differences of `delta` under the total
/// order given by `order` (lowest first).
///
/// Decreasing: `delta(x'', y'') - delta(x', y'') <= delta(x'', y') - delta(x', y')`
/// for all `x'' > x'`, `y'' > y'`; increasing flips the inequality.
pub fn check_differences<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    order: &[usize],
    direction: Direction,
    epsilon: f64,
) -> DifferencesCheck<T> {
    let tol = rel.tolerance(epsilon);
    let mut worst: Option<QuadrupleWitness<T>> = None;
    for_each_quadruple(rel, order, direction, |q| {
        if tol.is_positive(q.violation) && worst.is_none_or(|w| q.violation > w.violation) {
            worst = Some(q);
        }
        true
    });
    DifferencesCheck {
        holds: worst.is_none(),
        witness: worst,
    }
}

/// Visits ordered quadruples with their signed violation; stops when `visit`
/// returns `false`.
fn for_each_quadruple<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    order: &[usize],
    direction: Direction,
    mut visit: impl FnMut(QuadrupleWitness<T>) -> bool,
) {
    let n = order.len();
    for lo_x in 0..n {
        for hi_x in lo_x + 1..n {
            let (x_lo, x_hi) = (order[lo_x], order[hi_x]);
            for lo_y in 0..n {
                for hi_y in lo_y + 1..n {
                    let (y_lo, y_hi) = (order[lo_y], order[hi_y]);
                    let upper = rel.delta(x_hi, y_hi) - rel.delta(x_lo, y_hi);
                    let lower = rel.delta(x_hi, y_lo) - rel.delta(x_lo, y_lo);
                    let violation = match direction {
                        Direction::Decreasing => upper - lower,
                        Direction::Increasing => lower - upper,
                    };
                    let q = QuadrupleWitness {
                        x_hi,
                        x_lo,
                        y_hi,
                        y_lo,
                        violation,
                    };
                    if !visit(q) {
                        return;
                    }
                }
            }
        }
    }
}

fn differences_hold<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    order: &[usize],
    direction: Direction,
    epsilon: f64,
) -> bool {
    let tol = rel.tolerance(epsilon);
    let mut holds = true;
    for_each_quadruple(rel, order, direction, |q| {
        holds = !tol.is_positive(q.violation);
        holds
    });
    holds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSearchMethod {
    /// The identity order already satisfies the condition.
    Identity,
    /// Every total order was tried.
    Enumerated,
    /// Too many actions to enumerate; the valuation verdict was used instead.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSearch {
    pub holds: bool,
    pub order: Option<Vec<usize>>,
    pub method: OrderSearchMethod,
}

/// Looks for a total order under which `delta` has the requested differences.
///
/// Tries the identity order first, then all `n!` orders when
/// `n <= MAX_ORDER_ENUMERATION`. Larger games fall back to `fallback`.
pub fn search_order<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    direction: Direction,
    epsilon: f64,
    fallback: bool,
) -> OrderSearch {
    let n = rel.n();
    let identity: Vec<usize> = (0..n).collect();
    if differences_hold(rel, &identity, direction, epsilon) {
        return OrderSearch {
            holds: true,
            order: Some(identity),
            method: OrderSearchMethod::Identity,
        };
    }
    if n > MAX_ORDER_ENUMERATION {
        return OrderSearch {
            holds: fallback,
            order: None,
            method: OrderSearchMethod::Skipped,
        };
    }
    enumerate_orders(rel, direction, epsilon)
}

/// Exhaustive search over every total order, without the identity shortcut.
pub fn enumerate_orders<T: Scalar>(
    rel: &RelativePayoffGame<T>,
    direction: Direction,
    epsilon: f64,
) -> OrderSearch {
    let n = rel.n();
    let found = (0..n)
        .permutations(n)
        .find(|order| differences_hold(rel, order, direction, epsilon));
    OrderSearch {
        holds: found.is_some(),
        order: found,
        method: OrderSearchMethod::Enumerated,
    }
}

/// The five interchangeable exact-potential conditions evaluated separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub potential_of_payoffs: bool,
    pub potential_of_relative: bool,
    pub increasing_differences: bool,
    pub decreasing_differences: bool,
    pub additively_separable: bool,
    pub increasing_search: OrderSearch,
    pub decreasing_search: OrderSearch,
    /// `true` when all five conditions agree.
    pub consistent: bool,
}

impl EquivalenceReport {
    pub fn conditions(&self) -> [bool; 5] {
        [
            self.potential_of_payoffs,
            self.potential_of_relative,
            self.increasing_differences,
            self.decreasing_differences,
            self.additively_separable,
        ]
    }
}

pub fn check_equivalence<T: Scalar>(game: &SymmetricGame<T>, epsilon: f64) -> EquivalenceReport {
    let rel = RelativePayoffGame::from_game(game);
    let valuation = check_valuation(&rel, epsilon).is_exact_potential();
    let potential_of_payoffs = construct_exact_potential(game, epsilon).is_ok();
    let potential_of_relative = construct_exact_potential(&rel.as_game(), epsilon).is_ok();
    let increasing_search = search_order(&rel, Direction::Increasing, epsilon, valuation);
    let decreasing_search = search_order(&rel, Direction::Decreasing, epsilon, valuation);
    let additively_separable = is_additively_separable(&rel, epsilon);
    let mut report = EquivalenceReport {
        potential_of_payoffs,
        potential_of_relative,
        increasing_differences: increasing_search.holds,
        decreasing_differences: decreasing_search.holds,
        additively_separable,
        increasing_search,
        decreasing_search,
        consistent: false,
    };
    let c = report.conditions();
    report.consistent = c.iter().all(|&b| b == c[0]);
    report
}
