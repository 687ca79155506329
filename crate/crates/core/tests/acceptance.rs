//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use imitation_core::catalog::{chicken, counterexample_3x3, cpr_closed_form_check};
use imitation_core::potential::{enumerate_orders, Direction};
use imitation_core::properties::telescoping_violation;
use imitation_core::solver::best_prefix_value;
use imitation_core::{
    brute_force_oracle, build_catalog_game, build_relative_game, build_transition_graph,
    certify_unbeatable, check_equivalence, check_valuation, generate_random_game,
    separable_decomposition, trajectory, AnyGame, CatalogSpec, CustomTable, ExploitVerdict, Family,
    RandomGameConfig, RandomMode, Rule, Scalar, StartPolicy, SymmetricGame,
};

const EPS: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn unrestricted(n: usize, seed: u64) -> SymmetricGame<i64> {
    generate_random_game(&RandomGameConfig::new(n, RandomMode::Unrestricted, seed)).unwrap()
}

/// Random games shared by criteria 3 and 6.
fn criterion3_games() -> Vec<SymmetricGame<i64>> {
    (0..600u64)
        .map(|seed| unrestricted(2 + (seed % 4) as usize, seed))
        .collect()
}

/// Random 2x2 tables with entries in [-3, 3], shared by criteria 5 and 6.
fn criterion5_games() -> Vec<SymmetricGame<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..100_000)
        .map(|i| {
            let mut draw = || rng.gen_range(-3..=3i64);
            let rows = vec![vec![draw(), draw()], vec![draw(), draw()]];
            SymmetricGame::new(format!("g{i}"), vec!["a".into(), "b".into()], rows).unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cert = certify_unbeatable(&chicken(), &Rule::TitForTat, StartPolicy::WorstCase, EPS)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        cert.verdict == ExploitVerdict::EssentiallyUnbeatable,
        || format!("verdict {:?}", cert.verdict),
    )?;
    ensure(cert.sup_total == Some(3) && cert.bound == 3, || {
        format!("sup_total {:?}, bound {}", cert.sup_total, cert.bound)
    })?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("sup_total 3 = bound 3 in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let game = counterexample_3x3();
    let tft = certify_unbeatable(&game, &Rule::TitForTat, StartPolicy::WorstCase, EPS)
        .map_err(|e| e.to_string())?;
    ensure(tft.verdict == ExploitVerdict::MoneyPump, || {
        format!("tft verdict {:?}", tft.verdict)
    })?;
    let cycle = tft
        .witness_cycle
        .as_ref()
        .ok_or("money pump without a cycle")?;
    ensure(cycle.sum == 8, || format!("cycle sum {}", cycle.sum))?;
    let rel = build_relative_game(&game);
    let (replayed, end) =
        build_transition_graph(&Rule::TitForTat, &rel, EPS).walk_total(cycle.entry, &cycle.actions);
    ensure(replayed == 8 && end == cycle.entry, || {
        format!("cycle replays to {replayed}, ending at {end}")
    })?;
    for rule in &Rule::builtins()[1..] {
        let cert = certify_unbeatable(&game, rule, StartPolicy::WorstCase, EPS)
            .map_err(|e| e.to_string())?;
        ensure(cert.is_unbeatable(), || {
            format!("{rule}: {:?}", cert.verdict)
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "tft pumped by cycle {:?} (sum 8); iib, itb:stay, itb:switch unbeatable; {elapsed:?}",
        cycle.actions
    ))
}

fn criterion_3(games: &[SymmetricGame<i64>]) -> Outcome {
    let start = Instant::now();
    let mut potential = 0;
    for game in games {
        let valuation = check_valuation(&build_relative_game(game), EPS).is_exact_potential();
        let cert = certify_unbeatable(game, &Rule::TitForTat, StartPolicy::WorstCase, EPS)
            .map_err(|e| e.to_string())?;
        ensure(valuation == cert.is_unbeatable(), || {
            format!(
                "{}: valuation {valuation}, tft {:?}",
                game.name(),
                cert.verdict
            )
        })?;
        potential += valuation as usize;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "{} games agree ({potential} exact potential) in {elapsed:?}",
        games.len()
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rules_checked = 0;
    let mut trajectories = 0;
    for seed in 0..120u64 {
        let n = 1 + (seed % 5) as usize;
        let game =
            generate_random_game(&RandomGameConfig::new(n, RandomMode::ExactPotential, seed))
                .unwrap();
        let rel = build_relative_game(&game);
        let f = separable_decomposition(&rel, EPS).map_err(|e| format!("{}: {e}", game.name()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let customs: Vec<Rule> = (0..50)
            .map(|_| Rule::Custom(CustomTable::random_in_class(&rel, EPS, &mut rng)))
            .collect();
        for rule in Rule::builtins().iter().chain(&customs) {
            let cert = certify_unbeatable(&game, rule, StartPolicy::WorstCase, EPS)
                .map_err(|e| e.to_string())?;
            ensure(cert.is_unbeatable(), || {
                format!("{} beats {rule}: {:?}", game.name(), cert.verdict)
            })?;
            rules_checked += 1;
        }
        for _ in 0..100 {
            let rule = &customs[rng.gen_range(0..customs.len())];
            let y0 = rng.gen_range(0..n);
            let len = rng.gen_range(1..=25);
            let opponent: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            for round in trajectory(rule, &rel, EPS, y0, &opponent) {
                let cap = f.value(round.opponent) - f.value(y0);
                ensure(round.total <= cap, || {
                    format!(
                        "{}: running sum {} above f(x_T) - f(y0) = {cap}",
                        game.name(),
                        round.total
                    )
                })?;
            }
            ensure(
                telescoping_violation(rule, &rel, &f, EPS, y0, &opponent).is_none(),
                || format!("{}: per-round telescoping step fails", game.name()),
            )?;
            trajectories += 1;
        }
    }
    Ok(format!(
        "120 potential games, {rules_checked} rule certificates unbeatable, {trajectories} trajectories telescope; {:?}",
        start.elapsed()
    ))
}

fn criterion_5(games: &[SymmetricGame<i64>]) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for game in games {
        let rel = build_relative_game(game);
        let custom = Rule::Custom(CustomTable::random_in_class(&rel, EPS, &mut rng));
        for rule in Rule::builtins().iter().chain([&custom]) {
            let cert = certify_unbeatable(game, rule, StartPolicy::WorstCase, EPS)
                .map_err(|e| e.to_string())?;
            ensure(cert.is_unbeatable(), || {
                format!("{:?} beats {rule}: {:?}", game.rows(), cert.verdict)
            })?;
        }
    }
    Ok(format!(
        "{} 2x2 games, 5 rules each, all unbeatable; {:?}",
        games.len(),
        start.elapsed()
    ))
}

fn criterion_6(c3: &[SymmetricGame<i64>], c5: &[SymmetricGame<i64>]) -> Outcome {
    let start = Instant::now();
    for game in c3.iter().chain(c5) {
        let report = check_equivalence(game, EPS);
        let valuation = check_valuation(&build_relative_game(game), EPS).is_exact_potential();
        ensure(
            report.consistent && report.conditions().iter().all(|&c| c == valuation),
            || {
                format!(
                    "{}: conditions {:?}, valuation {valuation}",
                    game.name(),
                    report.conditions()
                )
            },
        )?;
    }
    let mut enumerated = 0;
    for seed in 0..140u64 {
        let n = 2 + (seed % 7) as usize;
        let mode = if seed % 2 == 0 {
            RandomMode::Unrestricted
        } else {
            RandomMode::ExactPotential
        };
        let game = generate_random_game(&RandomGameConfig::new(n, mode, 6_000 + seed)).unwrap();
        let rel = build_relative_game(&game);
        let valuation = check_valuation(&rel, EPS).is_exact_potential();
        for direction in [Direction::Increasing, Direction::Decreasing] {
            let search = enumerate_orders(&rel, direction, EPS);
            ensure(search.holds == valuation, || {
                format!(
                    "n={n} seed {seed}: {direction:?} enumeration {}, valuation {valuation}",
                    search.holds
                )
            })?;
        }
        enumerated += 1;
    }
    Ok(format!(
        "{} games consistent; order enumeration agrees on {enumerated} games with n in 2..=8; {:?}",
        c3.len() + c5.len(),
        start.elapsed()
    ))
}

fn random_rule(rng: &mut ChaCha8Rng, n: usize) -> Rule {
    match rng.gen_range(0..5) {
        4 => Rule::Custom(CustomTable::from_fn(n, |_, _| rng.gen_range(0..n)).unwrap()),
        k => Rule::builtins()[k].clone(),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let triples = 240;
    for i in 0..triples {
        let n = rng.gen_range(1..=4);
        let horizon = rng.gen_range(0..=8);
        let game = unrestricted(n, 7_000 + i);
        let rel = build_relative_game(&game);
        let rule = random_rule(&mut rng, n);
        let y0 = rng.gen_range(0..n);
        let brute = brute_force_oracle(&rel, &rule, y0, horizon, EPS).map_err(|e| e.to_string())?;
        let graph = build_transition_graph(&rule, &rel, EPS);
        let value = best_prefix_value(&graph, y0, horizon + 1);
        ensure(brute == value, || {
            format!(
                "{} rule {rule} y0 {y0} T {horizon}: brute {brute}, solver {value}",
                game.name()
            )
        })?;
    }
    Ok(format!(
        "{triples} (game, rule, y0) triples agree exactly; {:?}",
        start.elapsed()
    ))
}

fn catalog_specs() -> Vec<CatalogSpec> {
    use Family::*;
    let s = CatalogSpec::new;
    vec![
        s(Chicken),
        s(PrisonersDilemma),
        s(PrisonersDilemma)
            .param("reward", 2.5)
            .param("temptation", 4.0)
            .param("sucker", -1.0)
            .param("punishment", 0.5),
        s(CournotLinear).param("b", 10.0),
        s(CournotLinear)
            .param("b", 20.0)
            .selector("cost", "quadratic")
            .param("c", 0.5),
        s(BertrandDifferentiated),
        s(BertrandDifferentiated)
            .param("a", 5.0)
            .param("b", 0.4)
            .param("c", 2.0)
            .grid(0.0, 10.0, 11),
        s(PublicGoods),
        s(PublicGoods)
            .selector("benefit", "sqrt")
            .param("m", 2.0)
            .selector("cost", "quadratic")
            .param("c", 0.3),
        s(CommonPool),
        s(CommonPool)
            .param("e", 20.0)
            .param("a", 6.0)
            .param("b", 0.2)
            .param("c", 0.5),
        s(MinimumEffort),
        s(MinimumEffort)
            .selector("cost", "quadratic")
            .param("c", 0.1)
            .grid(1.0, 7.0, 11),
        s(Synergistic),
        s(Synergistic).param("c", 2.0).grid(0.0, 5.0, 11),
        s(DiamondSearch),
        s(DiamondSearch)
            .param("alpha", 2.0)
            .selector("cost", "linear")
            .param("c", 1.0),
    ]
}

fn catalog_game_passes<T: Scalar>(
    game: &SymmetricGame<T>,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let rel = build_relative_game(game);
    ensure(check_valuation(&rel, EPS).is_exact_potential(), || {
        format!("{}: valuation fails", game.name())
    })?;
    let customs = (0..5).map(|_| Rule::Custom(CustomTable::random_in_class(&rel, EPS, rng)));
    for rule in Rule::builtins().into_iter().chain(customs) {
        let cert = certify_unbeatable(game, &rule, StartPolicy::WorstCase, EPS)
            .map_err(|e| e.to_string())?;
        ensure(cert.is_unbeatable(), || {
            format!("{}: {rule} {:?}", game.name(), cert.verdict)
        })?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = catalog_specs();
    for spec in &specs {
        let game = build_catalog_game(spec).map_err(|e| format!("{spec:?}: {e}"))?;
        if spec.family.is_continuous() {
            ensure(game.actions().len() == 11, || {
                format!("{spec:?}: grid size {}", game.actions().len())
            })?;
            ensure(!game.is_exact(), || {
                format!("{spec:?}: expected float mode")
            })?;
        }
        match &game {
            AnyGame::Exact(g) => catalog_game_passes(g, &mut rng)?,
            AnyGame::Float(g) => catalog_game_passes(g, &mut rng)?,
        }
    }
    let mut boundary = Vec::new();
    for spec in specs.iter().filter(|s| s.family == Family::CommonPool) {
        let AnyGame::Float(g) = build_catalog_game(spec).unwrap() else {
            return Err("common pool game not in float mode".into());
        };
        let scale = build_relative_game(&g).max_abs_delta().max(1.0);
        let check = cpr_closed_form_check(spec, EPS).map_err(|e| e.to_string())?;
        ensure(check.interior_max_error <= EPS * scale, || {
            format!(
                "closed form off by {} on interior points",
                check.interior_max_error
            )
        })?;
        boundary.push(check.boundary_holds);
    }
    Ok(format!(
        "{} catalog settings pass; common pool closed form holds inside (boundary: {boundary:?}); {:?}",
        specs.len(),
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let c3 = criterion3_games();
    let c5 = criterion5_games();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 chicken bound", criterion_1()),
        ("2 counterexample trichotomy", criterion_2()),
        ("3 valuation iff tit-for-tat unbeatable", criterion_3(&c3)),
        ("4 imitation class sweep", criterion_4()),
        ("5 all 2x2 games", criterion_5(&c5)),
        ("6 potential conditions agree", criterion_6(&c3, &c5)),
        ("7 brute force agreement", criterion_7()),
        ("8 catalog conformance", criterion_8()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {name}: {reason}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
