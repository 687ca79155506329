use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde_json::{json, Value};

use imitation_core::catalog::{cpr_closed_form_check, Family};
use imitation_core::properties::{verify_config, verify_game, SeedReport};
use imitation_core::report::{exploit_json, potential_json, rounds_json, with_game, GameSource};
use imitation_core::rules::{next_action, trajectory};
use imitation_core::solver::{best_prefix_value, build_transition_graph};
use imitation_core::{
    build_catalog_game, certify_potential, certify_unbeatable, check_equivalence, load_game_str,
    save_game, AnyGame, CustomTable, Format, RandomGameConfig, RandomMode, RelativePayoffGame,
    Rule, Scalar, StartPolicy, SymmetricGame,
};

use crate::args::{
    CatalogArgs, DuelArgs, ExploitArgs, GameArgs, ReplayArgs, VerifyArgs, VerifyMode,
};
use crate::error::{CliError, CliResult};
use crate::source::{self, LoadedGame};

/// Runs `$body` with `$g` bound to the game in either numeric mode.
macro_rules! with_any {
    ($game:expr, |$g:ident| $body:expr) => {
        match $game {
            AnyGame::Exact($g) => $body,
            AnyGame::Float($g) => $body,
        }
    };
}

/// A finished command: its report and whether a checked property failed.
pub struct Outcome {
    pub report: Value,
    pub violation: Option<String>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome {
            report,
            violation: None,
        }
    }
}

pub fn analyze(args: &GameArgs, epsilon: f64) -> CliResult<Outcome> {
    let LoadedGame { game, source } = source::load(args)?;
    let (mut body, consistent) = with_any!(&game, |g| {
        let cert = certify_potential(g, epsilon);
        let eq = check_equivalence(g, epsilon);
        (potential_json(g, &cert, Some(&eq)), eq.consistent)
    });
    if let GameSource::Catalog(spec) = &source {
        if spec.family == Family::CommonPool {
            body["closed_form"] = json!(cpr_closed_form_check(spec, epsilon)?);
        }
    }
    let violation = (!consistent).then(|| "the five potential conditions disagree".to_string());
    Ok(Outcome {
        report: with_game(body, &game, &source),
        violation,
    })
}

fn exploit_body<T: Scalar>(
    g: &SymmetricGame<T>,
    rule: &Rule,
    start: Option<usize>,
    horizon: Option<u64>,
    epsilon: f64,
) -> CliResult<Value> {
    let policy = start.map_or(StartPolicy::WorstCase, StartPolicy::Given);
    let cert = certify_unbeatable(g, rule, policy, epsilon)?;
    let mut body = exploit_json(g.actions(), rule, &cert);
    body["epsilon"] = json!(epsilon);
    if let Some(k) = horizon {
        let rel = RelativePayoffGame::from_game(g);
        let graph = build_transition_graph(rule, &rel, epsilon);
        body["horizon"] = json!(k);
        body["horizon_value"] = json!(best_prefix_value(&graph, cert.y0, k as usize + 1));
    }
    Ok(body)
}

pub fn exploit(args: &ExploitArgs, epsilon: f64) -> CliResult<Outcome> {
    let LoadedGame { game, source } = source::load(&args.source)?;
    let rule = source::rule(&args.rule, game.actions())?;
    let start = source::start(&args.y0, game.actions())?;
    let body = with_any!(&game, |g| exploit_body(
        g,
        &rule,
        start,
        args.horizon,
        epsilon
    ))?;
    Ok(Outcome::ok(with_game(body, &game, &source)))
}

pub fn verify(args: &VerifyArgs, epsilon: f64) -> CliResult<Outcome> {
    let configs: Vec<RandomGameConfig> = (0..args.n)
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            let mut config = verify_config(seed);
            match args.mode {
                VerifyMode::Unrestricted => config.mode = RandomMode::Unrestricted,
                VerifyMode::ExactPotential => config.mode = RandomMode::ExactPotential,
                VerifyMode::Mixed => {}
            }
            if let Some(n) = args.actions {
                config.n = n as usize;
            }
            config
        })
        .collect();
    let reports: Vec<SeedReport> = configs
        .par_iter()
        .map(|c| verify_game(c, args.custom_rules, epsilon))
        .collect::<Result<_, _>>()?;

    let failures: Vec<&SeedReport> = reports.iter().filter(|r| !r.check.passed()).collect();
    let count = |pred: &dyn Fn(&SeedReport) -> bool| reports.iter().filter(|r| pred(r)).count();
    let mut report = json!({
        "games": args.n,
        "first_seed": args.seed,
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "actions": args.actions,
        "custom_rules": args.custom_rules,
        "epsilon": epsilon,
        "exact_potential_games": count(&|r| r.check.valuation),
        "tit_for_tat_unbeatable": count(&|r| r.check.tit_for_tat.eq(&imitation_core::ExploitVerdict::EssentiallyUnbeatable)),
        "rules_checked": reports.iter().map(|r| r.check.rules_checked).sum::<usize>(),
        "violations": failures.len(),
        "passed": failures.is_empty(),
        "failures": failures,
    });
    if args.n == 0 {
        report["warning"] = json!("no games generated; the check passes vacuously");
        eprintln!("warning: --n 0 generates no games; the check passes vacuously");
    }
    let violation = (!failures.is_empty()).then(|| {
        for failure in &failures {
            eprintln!(
                "counterexample (seed {}): {}",
                failure.seed,
                serde_json::to_string(&failure.game).expect("games serialize")
            );
        }
        format!(
            "{} of {} games violate the checked properties",
            failures.len(),
            args.n
        )
    });
    Ok(Outcome { report, violation })
}

pub fn catalog(args: &CatalogArgs) -> CliResult<Value> {
    match &args.spec {
        None => Ok(json!(Family::ALL
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>())),
        Some(text) => {
            let spec = source::parse_catalog(text)?;
            let game = build_catalog_game(&spec)?;
            if args.csv {
                Ok(Value::String(save_game(&game, Format::Csv)))
            } else {
                Ok(json!(game))
            }
        }
    }
}

fn rule_fields(rule_text: &str, rule: &Rule, actions: &[String]) -> Value {
    let mut fields = json!({ "rule": rule.label(), "rule_spec": rule_text });
    if let Rule::Custom(table) = rule {
        let map: Value = serde_json::from_str(&table.to_json(actions)).expect("table is JSON");
        fields["table"] = map;
    }
    fields
}

fn replay_body<T: Scalar>(
    g: &SymmetricGame<T>,
    rule: &Rule,
    y0: usize,
    opponent: &[usize],
    epsilon: f64,
) -> Value {
    let rel = RelativePayoffGame::from_game(g);
    let rounds = trajectory(rule, &rel, epsilon, y0, opponent);
    let total = rounds.last().map(|r| r.total).unwrap_or(T::ZERO);
    json!({
        "y0": g.actions()[y0],
        "bound": rel.max_relative_payoff(),
        "epsilon": epsilon,
        "opponent": opponent.iter().map(|&x| &g.actions()[x]).collect::<Vec<_>>(),
        "rounds": rounds_json(g.actions(), &rounds),
        "total": total,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn worst_start<T: Scalar>(g: &SymmetricGame<T>, rule: &Rule, epsilon: f64) -> CliResult<usize> {
    Ok(certify_unbeatable(g, rule, StartPolicy::WorstCase, epsilon)?.y0)
}

fn indices(labels: &[String], actions: &[String]) -> CliResult<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            actions.iter().position(|a| a == l).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown action {l:?} (actions: {})",
                    actions.join(", ")
                ))
            })
        })
        .collect()
}

pub fn replay(args: &ReplayArgs, epsilon: f64) -> CliResult<Outcome> {
    if let Some(path) = &args.transcript {
        return replay_transcript(path, epsilon);
    }
    let LoadedGame { game, source } = source::load(&args.source)?;
    let actions = game.actions().to_vec();
    let rule = source::rule(&args.rule, &actions)?;
    let mut opponent = indices(&args.actions, &actions)?;
    if let Some(k) = args.horizon {
        opponent.truncate(k as usize + 1);
    }
    let start = source::start(&args.y0, &actions)?;
    let body = with_any!(&game, |g| {
        let y0 = match start {
            Some(y0) => y0,
            None => worst_start(g, &rule, epsilon)?,
        };
        replay_body(g, &rule, y0, &opponent, epsilon)
    });
    let body = merge(rule_fields(&args.rule, &rule, &actions), body);
    Ok(Outcome::ok(with_game(body, &game, &source)))
}

fn transcript_error(path: &std::path::Path, what: &str) -> CliError {
    CliError::Usage(format!("{}: invalid transcript: {what}", path.display()))
}

fn replay_transcript(path: &std::path::Path, epsilon: f64) -> CliResult<Outcome> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let recorded: Value =
        serde_json::from_str(&text).map_err(|e| transcript_error(path, &e.to_string()))?;
    let game = load_game_str(&recorded["game"].to_string(), Format::Json)?;
    let actions = game.actions().to_vec();
    let rule = match recorded["table"].as_object() {
        Some(_) => Rule::Custom(CustomTable::from_json(
            &recorded["table"].to_string(),
            &actions,
        )?),
        None => {
            let label = recorded["rule"]
                .as_str()
                .ok_or_else(|| transcript_error(path, "missing rule"))?;
            source::rule(label, &actions)?
        }
    };
    let y0_label = recorded["y0"]
        .as_str()
        .ok_or_else(|| transcript_error(path, "missing y0"))?;
    let y0 = source::start(y0_label, &actions)?
        .ok_or_else(|| transcript_error(path, "y0 must be an action"))?;
    let labels: Vec<String> = serde_json::from_value(recorded["opponent"].clone())
        .map_err(|e| transcript_error(path, &e.to_string()))?;
    let opponent = indices(&labels, &actions)?;
    let epsilon = recorded["epsilon"].as_f64().unwrap_or(epsilon);
    let body = with_any!(&game, |g| replay_body(g, &rule, y0, &opponent, epsilon));
    let matches = body["rounds"] == recorded["rounds"];
    let spec = recorded["rule_spec"]
        .as_str()
        .unwrap_or(recorded["rule"].as_str().unwrap_or(""));
    let mut body = merge(rule_fields(spec, &rule, &actions), body);
    body["matches_transcript"] = json!(matches);
    let source = match serde_json::from_value(recorded["catalog"].clone()) {
        Ok(spec) => GameSource::Catalog(spec),
        Err(_) => GameSource::File(path.display().to_string()),
    };
    let violation = (!matches).then(|| "replayed totals differ from the transcript".to_string());
    Ok(Outcome {
        report: with_game(body, &game, &source),
        violation,
    })
}

/// Interactive play; returns the transcript.
pub fn duel(
    args: &DuelArgs,
    epsilon: f64,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> CliResult<Value> {
    let LoadedGame { game, source } = source::load(&args.source)?;
    let actions = game.actions().to_vec();
    let rule = source::rule(&args.rule, &actions)?;
    let start = source::start(&args.y0, &actions)?;
    let body = with_any!(&game, |g| duel_session(
        g,
        &rule,
        start,
        args.horizon,
        epsilon,
        input,
        output
    ))?;
    let body = merge(rule_fields(&args.rule, &rule, &actions), body);
    Ok(with_game(body, &game, &source))
}

fn duel_session<T: Scalar>(
    g: &SymmetricGame<T>,
    rule: &Rule,
    start: Option<usize>,
    horizon: Option<u64>,
    epsilon: f64,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> CliResult<Value> {
    let io_err = |e| CliError::io("terminal", e);
    let actions = g.actions();
    let rel = RelativePayoffGame::from_game(g);
    let tol = rel.tolerance(epsilon);
    let policy = start.map_or(StartPolicy::WorstCase, StartPolicy::Given);
    let cert = certify_unbeatable(g, rule, policy, epsilon)?;
    let bound = cert.bound;
    let y0 = cert.y0;
    writeln!(
        out,
        "{} vs {}: you choose the opponent's action each round; the imitator starts at {}.",
        g.name(),
        rule.label(),
        actions[y0]
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "actions: {}; bound {bound}; q to quit",
        actions.join(", ")
    )
    .map_err(io_err)?;

    let limit = horizon.map(|k| k as usize + 1).unwrap_or(usize::MAX);
    let mut opponent = Vec::new();
    let mut y = y0;
    let mut total = T::ZERO;
    let mut announced = false;
    let mut line = String::new();
    while opponent.len() < limit {
        write!(
            out,
            "[t={}] imitator plays {}> ",
            opponent.len(),
            actions[y]
        )
        .map_err(io_err)?;
        out.flush().map_err(io_err)?;
        line.clear();
        if input.read_line(&mut line).map_err(io_err)? == 0 {
            writeln!(out).map_err(io_err)?;
            break;
        }
        let choice = line.trim();
        if choice.is_empty() {
            continue;
        }
        if matches!(choice, "q" | "quit" | "exit") {
            break;
        }
        let Some(x) = actions.iter().position(|a| a == choice) else {
            writeln!(
                out,
                "unknown action {choice:?}; choose one of {}",
                actions.join(", ")
            )
            .map_err(io_err)?;
            continue;
        };
        let delta = rel.delta(x, y);
        total = total + delta;
        writeln!(
            out,
            "you {} vs imitator {}: delta {delta}, running sum {total} (bound {bound})",
            actions[x], actions[y]
        )
        .map_err(io_err)?;
        if !announced && !tol.is_negative(total - bound) {
            announced = true;
            if cert.is_unbeatable() {
                writeln!(out, "bound reached, cannot exceed {bound}").map_err(io_err)?;
            } else {
                writeln!(out, "bound reached; this rule can be pushed past it").map_err(io_err)?;
            }
        }
        opponent.push(x);
        y = next_action(rule, &rel, &tol, x, y);
    }
    writeln!(
        out,
        "final running sum {total} after {} rounds",
        opponent.len()
    )
    .map_err(io_err)?;
    let mut body = replay_body(g, rule, y0, &opponent, epsilon);
    body["verdict"] = json!(cert.verdict);
    Ok(body)
}
