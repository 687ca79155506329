//! JSON views of certificates with action indices replaced by labels.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::catalog::CatalogSpec;
use crate::game::{AnyGame, SymmetricGame};
use crate::potential::{EquivalenceReport, PotentialCertificate};
use crate::rules::{Round, Rule};
use crate::scalar::Scalar;
use crate::solver::{ExploitationCertificate, StartPolicy};

/// Where a game came from, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameSource {
    File(String),
    Catalog(CatalogSpec),
}

fn source_fields(out: &mut Map<String, Value>, game: &AnyGame, source: &GameSource) {
    match source {
        GameSource::File(path) => {
            out.insert("source".into(), json!(path));
        }
        GameSource::Catalog(spec) => {
            out.insert("catalog".into(), json!(spec));
        }
    }
    out.insert("game".into(), json!(game));
    out.insert(
        "mode".into(),
        json!(if game.is_exact() { "exact" } else { "float" }),
    );
}

fn names(actions: &[String], indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| actions[i].clone()).collect()
}

pub fn potential_json<T: Scalar>(
    game: &SymmetricGame<T>,
    cert: &PotentialCertificate<T>,
    equivalence: Option<&EquivalenceReport>,
) -> Value {
    let actions = game.actions();
    let f = cert.decomposition.as_ref().map(|d| {
        actions
            .iter()
            .zip(d.f())
            .map(|(a, v)| (a.clone(), json!(v)))
            .collect::<Map<_, _>>()
    });
    let witness = cert.witness.as_ref().map(|w| {
        json!({
            "actions": names(actions, &w.actions),
            "cycle_sum": w.cycle_sum,
        })
    });
    let mut out = json!({
        "verdict": cert.verdict,
        "f": f,
        "P": cert.potential.as_ref().map(|p| p.rows()),
        "witness": witness,
        "epsilon": cert.epsilon,
    });
    if let Some(eq) = equivalence {
        let order = |o: &Option<Vec<usize>>| o.as_ref().map(|o| names(actions, o));
        out["conditions"] = json!({
            "potential_of_payoffs": eq.potential_of_payoffs,
            "potential_of_relative": eq.potential_of_relative,
            "increasing_differences": eq.increasing_differences,
            "decreasing_differences": eq.decreasing_differences,
            "additively_separable": eq.additively_separable,
            "increasing_order": order(&eq.increasing_search.order),
            "decreasing_order": order(&eq.decreasing_search.order),
            "order_search": eq.increasing_search.method,
            "consistent": eq.consistent,
        });
    }
    out
}

pub fn exploit_json<T: Scalar>(
    actions: &[String],
    rule: &Rule,
    cert: &ExploitationCertificate<T>,
) -> Value {
    let cycle = cert.witness_cycle.as_ref().map(|c| {
        json!({
            "entry": actions[c.entry],
            "actions": names(actions, &c.actions),
            "sum": c.sum,
        })
    });
    json!({
        "verdict": cert.verdict,
        "rule": rule.label(),
        "sup_total": cert.sup_total,
        "bound": cert.bound,
        "y0": actions[cert.y0],
        "start": match cert.policy {
            StartPolicy::Given(_) => "given",
            StartPolicy::WorstCase => "worst",
        },
        "witness_path": names(actions, &cert.witness_path),
        "witness_cycle": cycle,
        "iterations": cert.iterations,
    })
}

pub fn rounds_json<T: Scalar>(actions: &[String], rounds: &[Round<T>]) -> Value {
    Value::Array(
        rounds
            .iter()
            .enumerate()
            .map(|(t, r)| {
                json!({
                    "t": t,
                    "opponent": actions[r.opponent],
                    "imitator": actions[r.imitator],
                    "delta": r.delta,
                    "total": r.total,
                })
            })
            .collect(),
    )
}

/// Wraps a body with the game and its source.
pub fn with_game(body: Value, game: &AnyGame, source: &GameSource) -> Value {
    let mut out = Map::new();
    source_fields(&mut out, game, source);
    if let Value::Object(fields) = body {
        out.extend(fields);
    } else {
        out.insert("result".into(), body);
    }
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{chicken, counterexample_3x3, Family};
    use crate::potential::{certify_potential, check_equivalence};
    use crate::solver::certify_unbeatable;

    #[test]
    fn potential_report_uses_labels() {
        let g = chicken();
        let cert = certify_potential(&g, 1e-9);
        let eq = check_equivalence(&g, 1e-9);
        let v = potential_json(&g, &cert, Some(&eq));
        assert_eq!(v["verdict"], "exact_potential");
        assert_eq!(v["f"]["swerve"], 0);
        assert_eq!(v["f"]["straight"], 3);
        let p = &v["P"];
        let pi = g.rows();
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let (ox, oy) = (1 - x, 1 - y);
            let own = p[ox][y].as_i64().unwrap() - p[x][y].as_i64().unwrap();
            assert_eq!(own, pi[ox][y] - pi[x][y]);
            let other = p[x][oy].as_i64().unwrap() - p[x][y].as_i64().unwrap();
            assert_eq!(other, pi[oy][x] - pi[y][x]);
        }
        assert_eq!(v["conditions"]["consistent"], true);
        assert!(v["witness"].is_null());
    }

    #[test]
    fn counterexample_witness_and_pump() {
        let g = counterexample_3x3();
        let cert = certify_potential(&g, 1e-9);
        let v = potential_json(&g, &cert, None);
        assert_eq!(v["verdict"], "not_exact_potential");
        assert_eq!(v["witness"]["actions"], json!(["A", "B", "C"]));
        assert_eq!(v["witness"]["cycle_sum"], 8);
        assert!(v["f"].is_null() && v["P"].is_null());

        let e = certify_unbeatable(&g, &Rule::TitForTat, StartPolicy::WorstCase, 1e-9).unwrap();
        let v = exploit_json(g.actions(), &Rule::TitForTat, &e);
        assert_eq!(v["verdict"], "money_pump");
        assert!(v["sup_total"].is_null());
        assert_eq!(v["witness_cycle"]["actions"], json!(["B", "C", "A"]));
        assert_eq!(v["witness_cycle"]["sum"], 8);
        assert_eq!(v["bound"], 10);
    }

    #[test]
    fn game_and_catalog_embedded() {
        let g = AnyGame::from(chicken());
        let v = with_game(
            json!({"verdict": "x"}),
            &g,
            &GameSource::Catalog(CatalogSpec::new(Family::Chicken)),
        );
        assert_eq!(v["catalog"]["family"], "chicken");
        assert_eq!(v["game"]["actions"], json!(["swerve", "straight"]));
        assert_eq!(v["mode"], "exact");
        assert_eq!(v["verdict"], "x");
    }
}
