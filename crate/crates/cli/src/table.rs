//! Plain-text rendering of JSON reports.

use std::fmt::Write;

use serde_json::{Map, Value};

pub fn render(report: &Value) -> String {
    let mut out = String::new();
    match report {
        Value::Object(fields) => render_object(&mut out, fields),
        other => out.push_str(&scalar(other)),
    }
    out
}

fn render_object(out: &mut String, fields: &Map<String, Value>) {
    if let Some(game) = fields.get("game") {
        render_game(out, game);
    }
    let mut flat = Vec::new();
    for (key, value) in fields {
        if key == "game" {
            continue;
        }
        flatten(&mut flat, key.clone(), value);
    }
    let width = flat.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in flat {
        if let Some(rows) = value.strip_prefix('\n') {
            let _ = writeln!(out, "{key}:");
            out.push_str(rows);
        } else {
            let _ = writeln!(out, "{key:width$}  {value}");
        }
    }
}

fn flatten(flat: &mut Vec<(String, String)>, key: String, value: &Value) {
    match value {
        Value::Object(fields) if !fields.is_empty() => {
            for (k, v) in fields {
                flatten(flat, format!("{key}.{k}"), v);
            }
        }
        Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
            flat.push((key, format!("\n{}", records(items))));
        }
        Value::Array(items) => {
            let cells: Vec<String> = items.iter().map(scalar).collect();
            flat.push((key, format!("[{}]", cells.join(", "))));
        }
        other => flat.push((key, scalar(other))),
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let cells: Vec<String> = items.iter().map(scalar).collect();
            format!("[{}]", cells.join(", "))
        }
        other => other.to_string(),
    }
}

/// A list of flat records as aligned columns.
fn records(items: &[Value]) -> String {
    let keys: Vec<&String> = items[0]
        .as_object()
        .map(|o| o.keys().collect())
        .unwrap_or_default();
    let rows: Vec<Vec<String>> = items
        .iter()
        .map(|item| keys.iter().map(|k| scalar(&item[k.as_str()])).collect())
        .collect();
    let header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    grid(&header, &rows)
}

fn grid(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        let _ = writeln!(out, "  {}", cells.join("  "));
    }
    out
}

pub fn render_game(out: &mut String, game: &Value) {
    let name = game["name"].as_str().unwrap_or("");
    let actions: Vec<String> = game["actions"]
        .as_array()
        .map(|a| a.iter().map(scalar).collect())
        .unwrap_or_default();
    let _ = writeln!(out, "game {name} (row player's payoff)");
    let mut header = vec![String::new()];
    header.extend(actions.iter().cloned());
    let rows: Vec<Vec<String>> = game["payoff"]
        .as_array()
        .map(|rows| {
            rows.iter()
                .zip(&actions)
                .map(|(row, label)| {
                    let mut cells = vec![label.clone()];
                    cells.extend(row.as_array().into_iter().flatten().map(scalar));
                    cells
                })
                .collect()
        })
        .unwrap_or_default();
    out.push_str(&grid(&header, &rows));
}
