use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "imitation",
    version,
    about = "Decide whether imitation rules can be exploited in symmetric two-player games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Comparison tolerance, scaled by max(1, largest magnitude) in float mode.
    #[arg(long, global = true, env = "IMITATION_EPSILON", default_value_t = 1e-9)]
    pub epsilon: f64,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Write the report (or duel transcript) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a game for exact potential structure.
    Analyze(GameArgs),
    /// Search for the opponent's best exploitation of a rule.
    Exploit(ExploitArgs),
    /// Check the potential/unbeatability equivalence on seeded random games.
    Verify(VerifyArgs),
    /// Play the opponent against an imitator, one round per line of input.
    Duel(DuelArgs),
    /// Replay a duel transcript or a fixed opponent sequence.
    Replay(ReplayArgs),
    /// Print a catalog game, or list the families.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game file (.json or .csv) or catalog spec such as `cournot_linear?b=10`.
    #[arg(value_name = "GAME")]
    pub positional: Option<String>,

    #[arg(long, value_name = "FILE", conflicts_with = "positional")]
    pub game: Option<PathBuf>,

    #[arg(long, value_name = "SPEC", conflicts_with_all = ["positional", "game"])]
    pub catalog: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExploitArgs {
    #[command(flatten)]
    pub source: GameArgs,

    /// tft, iib, itb:stay, itb:switch or custom:<file.json>.
    #[arg(long, default_value = "tft")]
    pub rule: String,

    /// Imitator's first action, or `worst` to take the worst start.
    #[arg(long, default_value = "worst")]
    pub y0: String,

    /// Also report the best total reachable in periods 0..=K.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Unrestricted,
    ExactPotential,
    /// Even seeds unrestricted, odd seeds exact-potential.
    Mixed,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of games.
    #[arg(long, default_value_t = 500)]
    pub n: u64,

    /// First seed; games use seeds seed..seed+n.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Fix the action count instead of cycling through 2..=5.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=12))]
    pub actions: Option<u64>,

    #[arg(long, value_enum, default_value_t = VerifyMode::Mixed)]
    pub mode: VerifyMode,

    /// Random class rules checked per potential game, on top of the built-ins.
    #[arg(long, default_value_t = 50)]
    pub custom_rules: usize,
}

#[derive(Debug, Args)]
pub struct DuelArgs {
    #[command(flatten)]
    pub source: GameArgs,

    #[arg(long, default_value = "tft")]
    pub rule: String,

    #[arg(long, default_value = "worst")]
    pub y0: String,

    /// Stop after period K (K+1 rounds).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Transcript written by `duel --out`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["positional", "game", "catalog"])]
    pub transcript: Option<PathBuf>,

    #[command(flatten)]
    pub source: GameArgs,

    /// Comma-separated opponent actions (with a game source).
    #[arg(long, value_delimiter = ',', required_unless_present = "transcript")]
    pub actions: Vec<String>,

    #[arg(long, default_value = "tft")]
    pub rule: String,

    #[arg(long, default_value = "worst")]
    pub y0: String,

    /// Replay only periods 0..=K.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Catalog spec; omit to list the families.
    pub spec: Option<String>,

    /// Emit CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
}
