//! JSON and CSV game files.
//!
//! JSON: `{ "name": ..., "actions": [...], "payoff": [[...], ...] }`, row-major,
//! `payoff[i][j]` paid to the player choosing `actions[i]` against `actions[j]`.
//!
//! CSV: a header row of action labels (optionally preceded by an empty corner
//! cell), then one row per action: its label followed by `n` numbers. A
//! leading `# name: ...` comment line carries the game name.
//!
//! A file loads in exact mode iff every payoff literal is an integer literal.

use std::io::Read;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{AnyGame, SymmetricGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(parse_err(
                "format",
                format!("unknown game format {other:?}"),
            )),
        }
    }
}

impl Format {
    /// Guesses the format from a file extension, defaulting to JSON.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// A payoff literal before the numeric mode is decided.
#[derive(Debug, Clone, Copy)]
enum Literal {
    Int(i64),
    Float(f64),
}

fn assemble(name: String, actions: Vec<String>, rows: Vec<Vec<Literal>>) -> Result<AnyGame> {
    let exact = rows.iter().flatten().all(|l| matches!(l, Literal::Int(_)));
    if exact {
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|l| match l {
                        Literal::Int(v) => v,
                        Literal::Float(_) => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        Ok(AnyGame::Exact(SymmetricGame::new(name, actions, rows)?))
    } else {
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|l| match l {
                        Literal::Int(v) => v as f64,
                        Literal::Float(v) => v,
                    })
                    .collect()
            })
            .collect();
        Ok(AnyGame::Float(SymmetricGame::new(name, actions, rows)?))
    }
}

pub fn load_game(mut source: impl Read, format: Format) -> Result<AnyGame> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| parse_err("input", e.to_string()))?;
    match format {
        Format::Json => load_json(&text),
        Format::Csv => load_csv(&text),
    }
}

pub fn load_game_str(text: &str, format: Format) -> Result<AnyGame> {
    load_game(text.as_bytes(), format)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    #[serde(default)]
    name: Option<String>,
    actions: Vec<String>,
    payoff: Vec<Vec<Value>>,
}

const NON_FINITE_TOKENS: [&str; 5] = ["NaN", "Infinity", "-Infinity", "inf", "-inf"];

fn json_error(text: &str, err: serde_json::Error) -> Error {
    // Bare NaN / Infinity tokens are not JSON; report them as what they mean.
    if err.line() > 0 {
        if let Some(line) = text.lines().nth(err.line() - 1) {
            let rest = line.get(err.column().saturating_sub(1)..).unwrap_or("");
            if NON_FINITE_TOKENS.iter().any(|t| rest.starts_with(t)) {
                return parse_err(
                    format!("line {}, column {}", err.line(), err.column()),
                    "non-finite payoff",
                );
            }
        }
    }
    parse_err(
        format!("line {}, column {}", err.line(), err.column()),
        err.to_string(),
    )
}

fn json_literal(value: &Value, row: usize, col: usize) -> Result<Literal> {
    let location = || format!("payoff[{row}][{col}]");
    match value {
        Value::Number(num) => {
            if let Some(v) = num.as_i64() {
                Ok(Literal::Int(v))
            } else if num.is_u64() {
                Err(Error::OutOfExactRange {
                    row,
                    col,
                    value: num.as_u64().unwrap_or(u64::MAX) as i128,
                })
            } else {
                Ok(Literal::Float(num.as_f64().unwrap_or(f64::NAN)))
            }
        }
        Value::String(s) => match s.trim().parse::<f64>() {
            Ok(v) if !v.is_finite() => Err(Error::NonFinite { row, col }),
            _ => Err(parse_err(
                location(),
                format!("expected a number, found {s:?}"),
            )),
        },
        other => Err(parse_err(
            location(),
            format!("expected a number, found {other}"),
        )),
    }
}

fn load_json(text: &str) -> Result<AnyGame> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| json_error(text, e))?;
    let rows = raw
        .payoff
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, v)| json_literal(v, i, j))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(raw.name.unwrap_or_default(), raw.actions, rows)
}

fn csv_literal(field: &str, line: u64, index: usize) -> Result<Literal> {
    let field = field.trim();
    let lexically_integral = !field.is_empty()
        && field
            .trim_start_matches(['-', '+'])
            .chars()
            .all(|c| c.is_ascii_digit());
    if lexically_integral {
        return field.parse::<i64>().map(Literal::Int).map_err(|_| {
            parse_err(
                format!("line {line}, field {index}"),
                format!("integer {field} out of range"),
            )
        });
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Literal::Float(v)),
        Ok(_) => Err(parse_err(
            format!("line {line}, field {index}"),
            "non-finite payoff",
        )),
        Err(_) => Err(parse_err(
            format!("line {line}, field {index}"),
            format!("expected a number, found {field:?}"),
        )),
    }
}

fn load_csv(text: &str) -> Result<AnyGame> {
    let name = text
        .lines()
        .map(str::trim)
        .take_while(|l| l.starts_with('#') || l.is_empty())
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("name:"))
        .map(|s| s.trim().to_string())
        .unwrap_or_default();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(format!("line {line}"), e.to_string())
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push(record);
    }
    let (header, body) = records
        .split_first()
        .ok_or_else(|| parse_err("line 1", "missing header row"))?;
    let n = body.len();
    let mut labels: Vec<String> = header.iter().map(str::to_string).collect();
    let width = body.first().map_or(0, |r| r.len());
    if labels.first().is_some_and(String::is_empty) || (labels.len() == width && width > 0) {
        labels.remove(0);
    }
    if labels.len() != n {
        return Err(Error::NonSquare {
            rows: n,
            row: 0,
            cols: labels.len(),
        });
    }

    let mut rows = Vec::with_capacity(n);
    for (i, record) in body.iter().enumerate() {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let label = record.get(0).unwrap_or("");
        if label != labels[i] {
            return Err(parse_err(
                format!("line {line}, field 0"),
                format!(
                    "row label {label:?} does not match header label {:?}",
                    labels[i]
                ),
            ));
        }
        let cells = record.len().saturating_sub(1);
        if cells != n {
            return Err(Error::NonSquare {
                rows: n,
                row: i,
                cols: cells,
            });
        }
        let row = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(index, field)| csv_literal(field, line, index))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    assemble(name, labels, rows)
}

pub fn save_game(game: &AnyGame, format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(game).expect("games serialize");
            out.push('\n');
            out
        }
        Format::Csv => match game {
            AnyGame::Exact(g) => write_csv(g, |v| v.to_string()),
            // Debug keeps a decimal point on integral floats so the mode survives.
            AnyGame::Float(g) => write_csv(g, |v| format!("{v:?}")),
        },
    }
}

fn write_csv<T: crate::scalar::Scalar>(
    game: &SymmetricGame<T>,
    fmt: impl Fn(T) -> String,
) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(game.actions().iter().cloned());
    writer.write_record(&header).expect("in-memory write");
    for (i, label) in game.actions().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..game.n()).map(|j| fmt(game.payoff(i, j))));
        writer.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8");
    if game.name().is_empty() {
        body
    } else {
        format!("# name: {}\n{body}", game.name().replace('\n', " "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_json_game() {
        let g = load_game_str(
            r#"{"name": "chicken", "actions": ["swerve", "straight"], "payoff": [[3, 1], [4, 0]]}"#,
            Format::Json,
        )
        .unwrap();
        let AnyGame::Exact(g) = g else {
            panic!("integer literals load in exact mode")
        };
        assert_eq!(g.n(), 2);
        assert_eq!(g.payoff(1, 0), 4);
        assert_eq!(g.name(), "chicken");
    }

    #[test]
    fn decimal_literal_switches_to_float() {
        let g = load_game_str(
            r#"{"actions": ["a", "b"], "payoff": [[1, 2.5], [0, 1.0]]}"#,
            Format::Json,
        )
        .unwrap();
        assert!(!g.is_exact());
    }

    #[test]
    fn json_nan_is_non_finite() {
        let err =
            load_game_str(r#"{"actions": ["a"], "payoff": [[NaN]]}"#, Format::Json).unwrap_err();
        assert!(err.to_string().contains("non-finite payoff"), "{err}");
        let err =
            load_game_str(r#"{"actions": ["a"], "payoff": [["NaN"]]}"#, Format::Json).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 0 });
    }

    #[test]
    fn json_syntax_error_has_location() {
        let err = load_game_str(
            "{\n  \"actions\": [\"a\"],\n  \"payoff\": [[1,]]\n}",
            Format::Json,
        )
        .unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("line 3"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_duplicate_labels_rejected() {
        let err = load_game_str(
            r#"{"actions": ["a", "a"], "payoff": [[0, 0], [0, 0]]}"#,
            Format::Json,
        )
        .unwrap_err();
        assert_eq!(err, Error::DuplicateAction("a".into()));
    }

    #[test]
    fn csv_non_square_rejected() {
        let text = "a,b,c,d\na,1,2,3,4\nb,1,2,3,4\nc,1,2,3,4\n";
        let err = load_game_str(text, Format::Csv).unwrap_err();
        assert!(err.to_string().contains("non-square payoff table"), "{err}");
    }

    #[test]
    fn csv_with_and_without_corner_cell() {
        let with = load_game_str("# name: pd\n,c,d\nc,3,0\nd,5,1\n", Format::Csv).unwrap();
        let without = load_game_str("c,d\nc,3,0\nd,5,1\n", Format::Csv).unwrap();
        assert_eq!(with.name(), "pd");
        assert_eq!(with.actions(), without.actions());
        let (AnyGame::Exact(a), AnyGame::Exact(b)) = (&with, &without) else {
            panic!("exact mode expected")
        };
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn csv_errors_carry_line_and_field() {
        let err = load_game_str(",a,b\na,1,x\nb,0,1\n", Format::Csv).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                location: "line 2, field 2".into(),
                message: "expected a number, found \"x\"".into()
            }
        );
        let err = load_game_str(",a,b\na,1,NaN\nb,0,1\n", Format::Csv).unwrap_err();
        assert!(err.to_string().contains("non-finite"));
        let err = load_game_str(",a,b\nb,1,0\na,0,1\n", Format::Csv).unwrap_err();
        assert!(err.to_string().contains("does not match header"));
    }

    fn any_game() -> impl Strategy<Value = AnyGame> {
        (1usize..=5, any::<bool>()).prop_flat_map(|(n, exact)| {
            let labels: Vec<String> = (0..n).map(|i| format!("act,{i}")).collect();
            if exact {
                prop::collection::vec(prop::collection::vec(-1000i64..1000, n), n)
                    .prop_map(move |rows| {
                        AnyGame::Exact(SymmetricGame::new("g", labels.clone(), rows).unwrap())
                    })
                    .boxed()
            } else {
                prop::collection::vec(prop::collection::vec(-1e12f64..1e12, n), n)
                    .prop_map(move |rows| {
                        AnyGame::Float(SymmetricGame::new("g", labels.clone(), rows).unwrap())
                    })
                    .boxed()
            }
        })
    }

    proptest! {
        #[test]
        fn save_then_load_is_identity(game in any_game(), csv in any::<bool>()) {
            let format = if csv { Format::Csv } else { Format::Json };
            let text = save_game(&game, format);
            let back = load_game_str(&text, format).unwrap();
            prop_assert_eq!(back.actions(), game.actions());
            match (&game, &back) {
                (AnyGame::Exact(a), AnyGame::Exact(b)) => prop_assert_eq!(a.rows(), b.rows()),
                (AnyGame::Float(a), AnyGame::Float(b)) => {
                    for (ra, rb) in a.rows().iter().zip(b.rows()) {
                        for (x, y) in ra.iter().zip(rb) {
                            prop_assert_eq!(x.to_bits(), y.to_bits());
                        }
                    }
                }
                _ => prop_assert!(false, "numeric mode changed"),
            }
        }
    }
}
