//! Randomized checks that tie the potential test to the exploitation search.
//!
//! For each game: tit-for-tat is essentially unbeatable exactly when the
//! relative payoffs form a valuation, every rule in the imitation class is
//! essentially unbeatable in such games, and the five potential conditions
//! agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{generate_random_game, RandomGameConfig, RandomMode};
use crate::error::Result;
use crate::game::{RelativePayoffGame, SymmetricGame};
use crate::potential::{check_equivalence, check_valuation, SeparableDecomposition};
use crate::rules::{trajectory, CustomTable, Rule};
use crate::scalar::Scalar;
use crate::solver::{certify_relative, ExploitVerdict, ExploitationCertificate, StartPolicy};

/// A rule that an opponent beat in a game where that should be impossible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeatenRule<T> {
    pub rule: String,
    /// Next-action table for custom rules, keyed `"x|y"`.
    pub table: Option<serde_json::Value>,
    pub certificate: ExploitationCertificate<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation<T> {
    /// The valuation test and the tit-for-tat search disagree.
    Biconditional {
        valuation: bool,
        tit_for_tat: ExploitVerdict,
    },
    ClassRuleBeaten(BeatenRule<T>),
    /// The five potential conditions do not all agree.
    InconsistentConditions {
        conditions: [bool; 5],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameCheck<T> {
    pub valuation: bool,
    pub tit_for_tat: ExploitVerdict,
    /// Rules swept through the class check (zero when the game has no potential).
    pub rules_checked: usize,
    pub violations: Vec<Violation<T>>,
}

impl<T> GameCheck<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs every check on one game. `custom_rules` random class members are
/// drawn from `rule_seed` on top of the built-in rules.
pub fn check_game<T: Scalar>(
    game: &SymmetricGame<T>,
    custom_rules: usize,
    rule_seed: u64,
    epsilon: f64,
) -> Result<GameCheck<T>> {
    let rel = RelativePayoffGame::from_game(game);
    let valuation = check_valuation(&rel, epsilon).is_exact_potential();
    let tft = certify_relative(&rel, &Rule::TitForTat, StartPolicy::WorstCase, epsilon)?;
    let mut violations = Vec::new();
    if valuation != tft.is_unbeatable() {
        violations.push(Violation::Biconditional {
            valuation,
            tit_for_tat: tft.verdict,
        });
    }

    let mut rules_checked = 0;
    if valuation {
        let mut rng = ChaCha8Rng::seed_from_u64(rule_seed);
        let customs = (0..custom_rules)
            .map(|_| Rule::Custom(CustomTable::random_in_class(&rel, epsilon, &mut rng)));
        for rule in Rule::builtins().into_iter().chain(customs) {
            rules_checked += 1;
            let cert = certify_relative(&rel, &rule, StartPolicy::WorstCase, epsilon)?;
            if !cert.is_unbeatable() {
                let table = match &rule {
                    Rule::Custom(t) => serde_json::from_str(&t.to_json(rel.actions())).ok(),
                    _ => None,
                };
                violations.push(Violation::ClassRuleBeaten(BeatenRule {
                    rule: rule.label(),
                    table,
                    certificate: cert,
                }));
            }
        }
    }

    let report = check_equivalence(game, epsilon);
    if !report.consistent {
        violations.push(Violation::InconsistentConditions {
            conditions: report.conditions(),
        });
    }

    Ok(GameCheck {
        valuation,
        tit_for_tat: tft.verdict,
        rules_checked,
        violations,
    })
}

/// Action count and generator mode used by `verify` for a given seed:
/// odd seeds draw from the potential family and each consecutive pair of
/// seeds moves `n` one step through 2..=5.
pub fn verify_config(seed: u64) -> RandomGameConfig {
    let n = 2 + (seed / 2 % 4) as usize;
    let mode = if seed.is_multiple_of(2) {
        RandomMode::Unrestricted
    } else {
        RandomMode::ExactPotential
    };
    RandomGameConfig::new(n, mode, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedReport {
    pub seed: u64,
    pub game: SymmetricGame<i64>,
    pub check: GameCheck<i64>,
}

/// Generates and checks the game for one `verify` seed.
pub fn verify_seed(seed: u64, custom_rules: usize, epsilon: f64) -> Result<SeedReport> {
    verify_game(&verify_config(seed), custom_rules, epsilon)
}

/// Generates and checks one random game; custom rules are drawn from the
/// game's seed.
pub fn verify_game(
    config: &RandomGameConfig,
    custom_rules: usize,
    epsilon: f64,
) -> Result<SeedReport> {
    let game = generate_random_game(config)?;
    let check = check_game(&game, custom_rules, config.seed, epsilon)?;
    Ok(SeedReport {
        seed: config.seed,
        game,
        check,
    })
}

/// Checks `f(x_t) - f(y_{t+1}) <= 0` along a trajectory, where `f` is the
/// separable part of the relative payoffs. Summed over rounds this keeps the
/// opponent's total at or below `f(x_T) - f(y_0)`. Returns the first round
/// that breaks it.
pub fn telescoping_violation<T: Scalar>(
    rule: &Rule,
    rel: &RelativePayoffGame<T>,
    decomposition: &SeparableDecomposition<T>,
    epsilon: f64,
    y0: usize,
    opponent: &[usize],
) -> Option<usize> {
    let tol = rel.tolerance(epsilon).widened(2.0);
    let rounds = trajectory(rule, rel, epsilon, y0, opponent);
    rounds.windows(2).position(|w| {
        let gap = decomposition.value(w[0].opponent) - decomposition.value(w[1].imitator);
        tol.is_positive(gap)
    })
}
