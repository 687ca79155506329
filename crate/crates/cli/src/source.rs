use std::fs::File;
use std::path::Path;

use imitation_core::report::GameSource;
use imitation_core::{build_catalog_game, load_game, AnyGame, CatalogSpec, Format, Rule, RuleSpec};

use crate::args::GameArgs;
use crate::error::{CliError, CliResult};

pub struct LoadedGame {
    pub game: AnyGame,
    pub source: GameSource,
}

pub fn load(args: &GameArgs) -> CliResult<LoadedGame> {
    match (&args.positional, &args.game, &args.catalog) {
        (None, Some(path), None) => load_file(path),
        (None, None, Some(spec)) => load_catalog(spec),
        (Some(text), None, None) => {
            let path = Path::new(text);
            if path.is_file() {
                load_file(path)
            } else {
                load_catalog(text)
            }
        }
        (None, None, None) => Err(CliError::Usage(
            "no game given: pass a game file, --game FILE or --catalog SPEC".into(),
        )),
        _ => Err(CliError::Usage("give exactly one game source".into())),
    }
}

fn load_file(path: &Path) -> CliResult<LoadedGame> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(&display, e))?;
    let game = load_game(file, Format::from_path(path))?;
    Ok(LoadedGame {
        game,
        source: GameSource::File(display),
    })
}

/// A catalog shorthand, or a path to a catalog spec JSON file.
pub fn parse_catalog(text: &str) -> CliResult<CatalogSpec> {
    let path = Path::new(text);
    if text.ends_with(".json") && path.is_file() {
        let body = std::fs::read_to_string(path).map_err(|e| CliError::io(text, e))?;
        return serde_json::from_str(&body)
            .map_err(|e| CliError::Usage(format!("{text}: invalid catalog spec: {e}")));
    }
    Ok(CatalogSpec::parse_shorthand(text)?)
}

fn load_catalog(text: &str) -> CliResult<LoadedGame> {
    let spec = parse_catalog(text)?;
    let game = build_catalog_game(&spec)?;
    Ok(LoadedGame {
        game,
        source: GameSource::Catalog(spec),
    })
}

pub fn rule(text: &str, actions: &[String]) -> CliResult<Rule> {
    let spec: RuleSpec = text.parse()?;
    Ok(spec.resolve(actions)?)
}

/// `None` for the worst start, otherwise the action's index.
pub fn start(text: &str, actions: &[String]) -> CliResult<Option<usize>> {
    if text == "worst" {
        return Ok(None);
    }
    actions
        .iter()
        .position(|a| a == text)
        .map(Some)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown action {text:?} for --y0 (actions: {}, or worst)",
                actions.join(", ")
            ))
        })
}
