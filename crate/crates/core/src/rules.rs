//! Deterministic imitation rules and replay of the repeated game.
//!
//! Every rule here is stationary with memory one: the next own action is a
//! function of the opponent's last action `x` and the imitator's last action
//! `y`. The imitation class admits exactly the rules that copy `x` whenever
//! `delta(x, y) > 0` and otherwise pick one of `x` or `y`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::RelativePayoffGame;
use crate::scalar::{Scalar, Tolerance};

/// What imitate-the-best does when the opponent did exactly as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    Stay,
    Switch,
}

/// A full transition table `next[x][y]` over action indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomTable {
    n: usize,
    next: Vec<usize>,
}

impl CustomTable {
    /// Builds a table from `next(x, y)` evaluated on every pair.
    pub fn from_fn(n: usize, mut next: impl FnMut(usize, usize) -> usize) -> Result<Self> {
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let v = next(x, y);
                if v >= n {
                    return Err(Error::BadIndex { index: v, n });
                }
                table.push(v);
            }
        }
        Ok(CustomTable { n, next: table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn next(&self, x: usize, y: usize) -> usize {
        self.next[x * self.n + y]
    }

    /// Parses `{ "<x>|<y>": "<next>" }` over action labels.
    ///
    /// Diagonal entries may be omitted (the only class-consistent choice is to
    /// stay); every off-diagonal pair must be present.
    pub fn from_json(text: &str, actions: &[String]) -> Result<Self> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| Error::Parse {
                location: format!("line {}, column {}", e.line(), e.column()),
                message: e.to_string(),
            })?;
        let n = actions.len();
        let index = |label: &str| {
            actions
                .iter()
                .position(|a| a == label)
                .ok_or_else(|| Error::UnknownAction(label.to_string()))
        };
        let mut next: Vec<Option<usize>> = vec![None; n * n];
        for (key, value) in &raw {
            let (x, y) = key
                .split_once('|')
                .ok_or_else(|| Error::InvalidRule(format!("key {key:?} is not of the form x|y")))?;
            let (x, y) = (index(x)?, index(y)?);
            next[x * n + y] = Some(index(value)?);
        }
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                match next[x * n + y] {
                    Some(v) => table.push(v),
                    None if x == y => table.push(y),
                    None => {
                        return Err(Error::InvalidRule(format!(
                            "custom table has no entry for {}|{}",
                            actions[x], actions[y]
                        )))
                    }
                }
            }
        }
        Ok(CustomTable { n, next: table })
    }

    pub fn to_json(&self, actions: &[String]) -> String {
        let map: BTreeMap<String, &str> = (0..self.n)
            .flat_map(|x| (0..self.n).map(move |y| (x, y)))
            .map(|(x, y)| {
                (
                    format!("{}|{}", actions[x], actions[y]),
                    actions[self.next(x, y)].as_str(),
                )
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    /// Draws a random member of the imitation class for `rel`: forced copies
    /// where the opponent is strictly ahead, a coin flip between copying and
    /// staying elsewhere.
    pub fn random_in_class<T: Scalar, R: Rng + ?Sized>(
        rel: &RelativePayoffGame<T>,
        epsilon: f64,
        rng: &mut R,
    ) -> Self {
        let tol = rel.tolerance(epsilon);
        let n = rel.n();
        let next = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .map(|(x, y)| {
                if tol.is_positive(rel.delta(x, y)) || rng.gen_bool(0.5) {
                    x
                } else {
                    y
                }
            })
            .collect();
        CustomTable { n, next }
    }
}

/// A resolved imitation rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    TitForTat,
    ImitateIfBetter,
    ImitateTheBest(TiePolicy),
    Custom(CustomTable),
}

impl Rule {
    /// The built-in named rules, with both tie policies for imitate-the-best.
    pub fn builtins() -> [Rule; 4] {
        [
            Rule::TitForTat,
            Rule::ImitateIfBetter,
            Rule::ImitateTheBest(TiePolicy::Stay),
            Rule::ImitateTheBest(TiePolicy::Switch),
        ]
    }

    pub fn label(&self) -> String {
        match self {
            Rule::TitForTat => "tft".into(),
            Rule::ImitateIfBetter => "iib".into(),
            Rule::ImitateTheBest(TiePolicy::Stay) => "itb:stay".into(),
            Rule::ImitateTheBest(TiePolicy::Switch) => "itb:switch".into(),
            Rule::Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A rule as written on the command line, before any custom table is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSpec {
    Builtin(Rule),
    CustomFile(PathBuf),
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tft" => Ok(RuleSpec::Builtin(Rule::TitForTat)),
            "iib" => Ok(RuleSpec::Builtin(Rule::ImitateIfBetter)),
            "itb" | "itb:stay" => Ok(RuleSpec::Builtin(Rule::ImitateTheBest(TiePolicy::Stay))),
            "itb:switch" => Ok(RuleSpec::Builtin(Rule::ImitateTheBest(TiePolicy::Switch))),
            other => match other.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(RuleSpec::CustomFile(PathBuf::from(path))),
                _ => Err(Error::InvalidRule(format!(
                    "{other:?} (expected tft, iib, itb:stay, itb:switch or custom:<file.json>)"
                ))),
            },
        }
    }
}

impl RuleSpec {
    /// Resolves the spec, reading the custom table file if there is one.
    pub fn resolve(&self, actions: &[String]) -> Result<Rule> {
        match self {
            RuleSpec::Builtin(rule) => Ok(rule.clone()),
            RuleSpec::CustomFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                    location: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let table = CustomTable::from_json(&text, actions)?;
                Ok(Rule::Custom(table))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImitatorState {
    pub current: usize,
    pub initial: usize,
}

impl ImitatorState {
    pub fn new(initial: usize) -> Self {
        ImitatorState {
            current: initial,
            initial,
        }
    }
}

/// The imitator's next action after the opponent played `x` against `y`.
pub fn next_action<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    tol: &Tolerance,
    x: usize,
    y: usize,
) -> usize {
    match rule {
        Rule::TitForTat => x,
        Rule::ImitateIfBetter => {
            if tol.is_positive(rel.delta(x, y)) {
                x
            } else {
                y
            }
        }
        Rule::ImitateTheBest(tie) => {
            let d = rel.delta(x, y);
            if tol.is_positive(d) {
                x
            } else if tol.is_negative(d) {
                y
            } else {
                match tie {
                    TiePolicy::Stay => y,
                    TiePolicy::Switch => x,
                }
            }
        }
        Rule::Custom(table) => table.next(x, y),
    }
}

pub fn step<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
    opponent: usize,
    state: ImitatorState,
) -> ImitatorState {
    let tol = rel.tolerance(epsilon);
    ImitatorState {
        current: next_action(rule, rel, &tol, opponent, state.current),
        initial: state.initial,
    }
}

/// A pair `(x, y)` where a rule leaves the imitation class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassViolation {
    pub opponent: usize,
    pub own: usize,
    pub next: usize,
}

/// Checks every `(x, y)` pair against the imitation class; returns the first
/// violation in `(x, y)` lexicographic order.
pub fn validate_class_membership<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
) -> std::result::Result<(), ClassViolation> {
    let n = rel.n();
    let tol = rel.tolerance(epsilon);
    if let Rule::Custom(table) = rule {
        if table.n() != n {
            return Err(ClassViolation {
                opponent: 0,
                own: 0,
                next: table.n(),
            });
        }
    }
    for x in 0..n {
        for y in 0..n {
            let next = next_action(rule, rel, &tol, x, y);
            let allowed = if tol.is_positive(rel.delta(x, y)) {
                next == x
            } else {
                next == x || next == y
            };
            if !allowed {
                return Err(ClassViolation {
                    opponent: x,
                    own: y,
                    next,
                });
            }
        }
    }
    Ok(())
}

/// One period of the repeated game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Round<T> {
    pub opponent: usize,
    pub imitator: usize,
    pub delta: T,
    /// Cumulative relative payoff of the opponent through this round.
    pub total: T,
}

/// Replays the repeated game from `y0` against a fixed opponent sequence.
pub fn trajectory<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    epsilon: f64,
    y0: usize,
    opponent: &[usize],
) -> Vec<Round<T>> {
    let tol = rel.tolerance(epsilon);
    let mut y = y0;
    let mut total = T::ZERO;
    opponent
        .iter()
        .map(|&x| {
            let delta = rel.delta(x, y);
            total = total + delta;
            let round = Round {
                opponent: x,
                imitator: y,
                delta,
                total,
            };
            y = next_action(rule, rel, &tol, x, y);
            round
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_relative_game, labels, SymmetricGame};
    use crate::potential::separable_decomposition;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-9;

    fn chicken() -> RelativePayoffGame<i64> {
        build_relative_game(
            &SymmetricGame::new(
                "chicken",
                labels(&["swerve", "straight"]),
                vec![vec![3, 1], vec![4, 0]],
            )
            .unwrap(),
        )
    }

    fn counterexample() -> RelativePayoffGame<i64> {
        build_relative_game(
            &SymmetricGame::new(
                "counterexample",
                labels(&["A", "B", "C"]),
                vec![vec![0, 0, -1], vec![-1, 0, 0], vec![0, 10, 0]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn imitate_if_better_copies_a_winner() {
        let rel = chicken();
        let s = step(&Rule::ImitateIfBetter, &rel, EPS, 1, ImitatorState::new(0));
        assert_eq!(s.current, 1);
        assert_eq!(s.initial, 0);
    }

    #[test]
    fn imitate_if_better_never_leaves_c() {
        let rel = counterexample();
        let s = step(&Rule::ImitateIfBetter, &rel, EPS, 1, ImitatorState::new(2));
        assert_eq!(s.current, 2);
        for x in 0..3 {
            assert_eq!(
                next_action(&Rule::ImitateIfBetter, &rel, &rel.tolerance(EPS), x, 2),
                2
            );
        }
    }

    #[test]
    fn mirrored_action_is_kept_by_every_rule() {
        let rel = counterexample();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rules = Rule::builtins().to_vec();
        rules.push(Rule::Custom(CustomTable::random_in_class(
            &rel, EPS, &mut rng,
        )));
        for rule in &rules {
            for y in 0..3 {
                assert_eq!(step(rule, &rel, EPS, y, ImitatorState::new(y)).current, y);
            }
        }
    }

    #[test]
    fn tie_policy_decides_at_zero() {
        let g =
            SymmetricGame::new("coord", labels(&["a", "b"]), vec![vec![1, 0], vec![0, 1]]).unwrap();
        let rel = build_relative_game(&g);
        let tol = rel.tolerance(EPS);
        assert_eq!(
            next_action(&Rule::ImitateTheBest(TiePolicy::Stay), &rel, &tol, 1, 0),
            0
        );
        assert_eq!(
            next_action(&Rule::ImitateTheBest(TiePolicy::Switch), &rel, &tol, 1, 0),
            1
        );
    }

    #[test]
    fn builtins_are_in_class() {
        for rel in [chicken(), counterexample()] {
            for rule in Rule::builtins() {
                assert_eq!(validate_class_membership(&rule, &rel, EPS), Ok(()));
            }
        }
    }

    #[test]
    fn stubborn_custom_rule_is_rejected() {
        let rel = chicken();
        let stubborn = Rule::Custom(CustomTable::from_fn(2, |_, y| y).unwrap());
        assert_eq!(
            validate_class_membership(&stubborn, &rel, EPS),
            Err(ClassViolation {
                opponent: 1,
                own: 0,
                next: 0
            })
        );
    }

    #[test]
    fn chicken_tit_for_tat_trajectory() {
        let rounds = trajectory(&Rule::TitForTat, &chicken(), EPS, 0, &[1, 0, 1]);
        let totals: Vec<i64> = rounds.iter().map(|r| r.total).collect();
        assert_eq!(totals, vec![3, 0, 3]);
    }

    #[test]
    fn counterexample_cycle_pumps_tit_for_tat() {
        let rounds = trajectory(
            &Rule::TitForTat,
            &counterexample(),
            EPS,
            0,
            &[1, 2, 0, 1, 2, 0],
        );
        let deltas: Vec<i64> = rounds.iter().map(|r| r.delta).collect();
        assert_eq!(deltas, vec![-1, 10, -1, -1, 10, -1]);
        assert_eq!(rounds[2].total, 8);
        assert_eq!(rounds.last().unwrap().total, 16);
    }

    #[test]
    fn custom_table_json_round_trip() {
        let rel = counterexample();
        let actions = rel.actions().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let table = CustomTable::random_in_class(&rel, EPS, &mut rng);
        let back = CustomTable::from_json(&table.to_json(&actions), &actions).unwrap();
        assert_eq!(back, table);

        let partial = CustomTable::from_json(r#"{"A|B": "A", "B|A": "B"}"#, &actions[..2]).unwrap();
        assert_eq!(partial.next(0, 0), 0);
        assert!(CustomTable::from_json(r#"{"A|B": "A"}"#, &actions[..2]).is_err());
        assert!(CustomTable::from_json(r#"{"A|Z": "A"}"#, &actions[..2]).is_err());
    }

    #[test]
    fn rule_specs_parse() {
        assert_eq!(
            "tft".parse::<RuleSpec>().unwrap(),
            RuleSpec::Builtin(Rule::TitForTat)
        );
        assert_eq!(
            "itb:switch".parse::<RuleSpec>().unwrap(),
            RuleSpec::Builtin(Rule::ImitateTheBest(TiePolicy::Switch))
        );
        assert_eq!(
            "custom:rule.json".parse::<RuleSpec>().unwrap(),
            RuleSpec::CustomFile("rule.json".into())
        );
        assert!("pavlov".parse::<RuleSpec>().is_err());
        assert!("custom:".parse::<RuleSpec>().is_err());
    }

    fn potential_rel(max_n: usize) -> impl Strategy<Value = RelativePayoffGame<i64>> {
        (1..=max_n).prop_flat_map(|n| {
            (
                prop::collection::vec(-9i64..=9, n),
                prop::collection::vec(-9i64..=9, n * n),
            )
                .prop_map(move |(f, a)| {
                    let g = SymmetricGame::from_fn(
                        "p",
                        (0..n).map(|i| i.to_string()).collect(),
                        |x, y| f[x] + a[x.min(y) * n + x.max(y)],
                    )
                    .unwrap();
                    build_relative_game(&g)
                })
        })
    }

    fn any_rel(max_n: usize) -> impl Strategy<Value = RelativePayoffGame<i64>> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(-9i64..=9, n), n).prop_map(move |rows| {
                build_relative_game(
                    &SymmetricGame::new("r", (0..n).map(|i| i.to_string()).collect(), rows)
                        .unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn random_class_tables_validate(rel in any_rel(5), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rule = Rule::Custom(CustomTable::random_in_class(&rel, EPS, &mut rng));
            prop_assert_eq!(validate_class_membership(&rule, &rel, EPS), Ok(()));
            for rule in Rule::builtins() {
                prop_assert_eq!(validate_class_membership(&rule, &rel, EPS), Ok(()));
            }
        }

        #[test]
        fn separable_part_never_decreases_along_play(
            rel in potential_rel(5),
            seed in any::<u64>(),
            len in 1usize..30,
        ) {
            let n = rel.n();
            let f = separable_decomposition(&rel, EPS).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rules = Rule::builtins().to_vec();
            rules.push(Rule::Custom(CustomTable::random_in_class(&rel, EPS, &mut rng)));
            let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            let y0 = rng.gen_range(0..n);
            for rule in &rules {
                let rounds = trajectory(rule, &rel, EPS, y0, &seq);
                for w in rounds.windows(2) {
                    // f(x_t) - f(y_{t+1}) <= 0
                    prop_assert!(f.value(w[0].opponent) - f.value(w[1].imitator) <= 0);
                }
                if let Rule::TitForTat = rule {
                    for w in rounds.windows(2) {
                        prop_assert_eq!(w[1].imitator, w[0].opponent);
                    }
                }
                prop_assert_eq!(&rounds, &trajectory(rule, &rel, EPS, y0, &seq));
            }
        }
    }
}
