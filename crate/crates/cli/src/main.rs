//! Command-line front end: solve, check, score, perft, compose, archive.
//!
//! Exit status is 0 for a proven or passing result, 1 for a disproven or
//! failing one and 2 for usage errors, bad input and exhausted budgets.

use std::error::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use problemist::aesthetics::{score, ScoreWeights, FEATURE_NAMES};
use problemist::archive::Archive;
use problemist::board::{move_to_san, play_san_line, Color, Position};
use problemist::composer::{self, ComposerConfig, PieceSetSpec, SamplingConfig, SubstrateSources};
use problemist::conventions::{evaluate_with, ConventionConfig};
use problemist::solver::{Outcome, SearchBudget, Solver, Stipulation};

static STOP: AtomicBool = AtomicBool::new(false);

#[derive(Parser)]
#[command(name = "problemist", version, about = "Compose and solve forced-mate chess problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the exact distance to mate and the key moves.
    Solve(SolveArgs),
    /// Check a position against the composition conventions.
    Check(CheckArgs),
    /// Score a problem's solution tree.
    Score(ScoreArgs),
    /// Count leaf nodes of the legal move tree.
    Perft(PerftArgs),
    /// Generate problems from a piece set and archive the survivors.
    Compose(ComposeArgs),
    /// Inspect or maintain an archive.
    Archive(ArchiveArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    None,
    Text,
    Json,
}

#[derive(Args)]
struct BudgetArgs {
    /// Node limit per solver call.
    #[arg(long, default_value_t = SearchBudget::default().max_nodes)]
    max_nodes: u64,
    /// Time limit per solver call, in seconds.
    #[arg(long, default_value_t = SearchBudget::default().max_seconds)]
    max_seconds: f64,
    /// Transposition table entries (0 disables the table).
    #[arg(long, default_value_t = SearchBudget::default().transposition_entries)]
    tt_entries: usize,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
            transposition_entries: self.tt_entries,
        }
    }
}

#[derive(Args)]
struct ConventionArgs {
    /// Accept problems with more than one key.
    #[arg(long)]
    allow_cooks: bool,
    /// Accept checking keys.
    #[arg(long)]
    allow_check_key: bool,
    /// Accept capturing keys.
    #[arg(long)]
    allow_capture_key: bool,
}

impl ConventionArgs {
    fn config(&self) -> ConventionConfig {
        ConventionConfig {
            require_no_cooks: !self.allow_cooks,
            require_no_check_in_key: !self.allow_check_key,
            require_no_capture_in_key: !self.allow_capture_key,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    fen: String,
    /// Largest mate length searched, in White moves.
    #[arg(long, default_value_t = 5)]
    max: u8,
    /// Moves played from the position before solving, in SAN.
    #[arg(long, value_name = "MOVES")]
    forced_line: Option<String>,
    /// Total bound, forced moves included, when a forced line is given.
    #[arg(long, value_name = "N")]
    extend: Option<u8>,
    #[arg(long, value_enum, default_value_t = TreeFormat::None)]
    tree: TreeFormat,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct CheckArgs {
    fen: String,
    /// For example mate5 or #5.
    #[arg(long, short)]
    stipulation: Stipulation,
    #[command(flatten)]
    conventions: ConventionArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct ScoreArgs {
    fen: String,
    #[arg(long, short)]
    stipulation: Stipulation,
    /// key = value weights file.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct PerftArgs {
    fen: String,
    depth: u32,
    /// Print the count below each root move.
    #[arg(long)]
    divide: bool,
}

#[derive(Args)]
struct ArchiveLocation {
    /// Archive directory.
    #[arg(long, env = "PROBLEMIST_ARCHIVE", default_value = "problemist-archive")]
    archive: PathBuf,
}

#[derive(Args)]
struct ComposeArgs {
    /// White pieces, king included, e.g. KNNNN.
    #[arg(long)]
    white: String,
    /// Black pieces, king included, e.g. KQ.
    #[arg(long)]
    black: String,
    /// Comma-separated exact mate lengths, e.g. mate3,mate4,mate5.
    #[arg(long, value_delimiter = ',', required = true)]
    goals: Vec<Stipulation>,
    #[command(flatten)]
    conventions: ConventionArgs,
    /// Discard problems scoring below this.
    #[arg(long)]
    min_aesthetics: Option<f64>,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Reject placements that leave a White man en prise.
    #[arg(long)]
    en_prise_filter: bool,
    #[arg(long, default_value_t = SamplingConfig::default().bias_strength)]
    bias_strength: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_candidates: u64,
    /// Wall-clock limit for the whole run, in seconds.
    #[arg(long, default_value_t = 3600.0)]
    max_wall_seconds: f64,
    #[arg(long, default_value_t = 2_000_000)]
    solve_max_nodes: u64,
    #[arg(long, default_value_t = 60.0)]
    solve_max_seconds: f64,
    #[arg(long, default_value_t = 1 << 18)]
    solve_tt_entries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Games file, one movetext per line.
    #[arg(long)]
    games: Option<PathBuf>,
    /// Directory of PGM images.
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    substrate_config: Option<PathBuf>,
    #[arg(long, default_value = "")]
    location: String,
    /// Treat board symmetries as duplicates.
    #[arg(long)]
    symmetric_dedup: bool,
    /// Timestamp written into every record instead of the clock.
    #[arg(long)]
    fixed_timestamp: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    location_dir: ArchiveLocation,
}

#[derive(Args)]
struct ArchiveArgs {
    #[command(subcommand)]
    action: ArchiveAction,
    #[command(flatten)]
    location: ArchiveLocation,
}

#[derive(Subcommand)]
enum ArchiveAction {
    /// One line per record.
    List,
    /// Re-solve and re-score every record.
    Verify {
        #[command(flatten)]
        conventions: ConventionArgs,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Rewrite the index from the records.
    Reindex,
}

type Result<T> = std::result::Result<T, Box<dyn Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Check(a) => check(a),
        Command::Score(a) => score_cmd(a),
        Command::Perft(a) => perft(a),
        Command::Compose(a) => compose(a),
        Command::Archive(a) => archive(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_position(fen: &str) -> Result<Position> {
    fen.parse().map_err(|e| format!("{fen:?}: {e}").into())
}

fn load_weights(path: Option<&PathBuf>) -> Result<ScoreWeights> {
    Ok(match path {
        Some(p) => ScoreWeights::load(p)?,
        None => ScoreWeights::default(),
    })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn solve(a: SolveArgs) -> Result<u8> {
    let start = parse_position(&a.fen)?;
    let (forced, after, white_moves) = match &a.forced_line {
        Some(line) => {
            let sans: Vec<&str> = line.split_whitespace().filter(|t| !t.ends_with('.')).collect();
            let positions = play_san_line(&start, sans.iter().copied())
                .map_err(|(i, e)| format!("move {} of the forced line ({}): {e}", i + 1, sans[i]))?;
            let white = positions[..positions.len() - 1]
                .iter()
                .filter(|p| p.side_to_move() == Color::White)
                .count() as u8;
            (sans.iter().map(|s| s.to_string()).collect(), positions[positions.len() - 1], white)
        }
        None => (Vec::new(), start, 0),
    };
    let total = a.extend.unwrap_or(a.max);
    let bound = total
        .checked_sub(white_moves)
        .filter(|&b| b >= 1)
        .ok_or("the bound leaves no moves after the forced line")?;

    let mut solver = Solver::new(a.budget.budget())?;
    let result = solver.solve_dtm(&after, bound)?;
    let white_to_move = after.side_to_move() == Color::White;
    let (code, dtm) = match result.outcome {
        Outcome::MateIn(d) => (0, Some(d)),
        Outcome::NoMateWithin(_) => (1, None),
        Outcome::Aborted => (2, None),
    };
    let keys = match dtm {
        Some(d) if white_to_move => solver.key_moves(&after, d)?,
        _ => Vec::new(),
    };
    let tree = match (dtm, a.tree) {
        (Some(d), TreeFormat::Text | TreeFormat::Json) if white_to_move => Some(solver.build_tree(&after, d)?),
        _ => None,
    };
    let key_sans: Vec<String> = keys.iter().map(|&k| move_to_san(&after, k)).collect();

    if a.format == Format::Json {
        let outcome = match result.outcome {
            Outcome::MateIn(_) => "mate",
            Outcome::NoMateWithin(_) => "no_mate",
            Outcome::Aborted => "aborted",
        };
        let mut v = json!({
            "fen": a.fen,
            "forced_line": forced,
            "bound": total,
            "outcome": outcome,
            "mate_in": dtm.map(|d| d + white_moves),
            "keys": keys.iter().zip(&key_sans).map(|(k, s)| json!({"uci": k.to_uci(), "san": s})).collect::<Vec<_>>(),
            "nodes": result.nodes_searched,
            "seconds": result.elapsed,
        });
        if let Some(t) = &tree {
            v["tree"] = serde_json::to_value(t)?;
        }
        print_json(&v);
        return Ok(code);
    }

    match result.outcome {
        Outcome::MateIn(d) => {
            println!("mate in {}", d + white_moves);
            if !forced.is_empty() {
                println!("after {}: mate in {d} more", forced.join(" "));
            }
        }
        Outcome::NoMateWithin(_) => println!("no mate within {total}"),
        Outcome::Aborted => println!("search aborted; budget exhausted"),
    }
    match key_sans.len() {
        0 => {}
        1 => println!("key: {}", key_sans[0]),
        _ => println!("keys: {}", key_sans.join(", ")),
    }
    println!("nodes: {}, time: {:.3}s", result.nodes_searched, result.elapsed);
    if let Some(t) = &tree {
        println!();
        match a.tree {
            TreeFormat::Json => println!("{}", serde_json::to_string_pretty(t)?),
            _ => print!("{}", t.render_text()),
        }
    }
    Ok(code)
}

fn check(a: CheckArgs) -> Result<u8> {
    let p = parse_position(&a.fen)?;
    let cfg = a.conventions.config();
    let mut solver = Solver::new(a.budget.budget())?;
    let report = evaluate_with(&mut solver, &p, a.stipulation, &cfg)?;
    let code = if report.indeterminate {
        2
    } else if report.passed {
        0
    } else {
        1
    };
    if a.format == Format::Json {
        print_json(&serde_json::to_value(&report)?);
        return Ok(code);
    }
    println!("{}", a.stipulation);
    for (name, ok, enabled) in report.checks(&cfg) {
        let verdict = match (report.indeterminate, enabled, ok) {
            (true, _, _) => "UNKNOWN",
            (_, false, _) => "SKIP",
            (_, true, true) => "PASS",
            (_, true, false) => "FAIL",
        };
        println!("{name:<20}{verdict}");
    }
    if let Some(d) = report.dtm {
        println!("{:<20}{d}", "distance to mate");
    }
    if !report.keys.is_empty() {
        let sans: Vec<String> = report.keys.iter().map(|&k| move_to_san(&p, k)).collect();
        println!("{:<20}{}", "keys", sans.join(", "));
    }
    let overall = match code {
        0 => "PASS",
        1 => "FAIL",
        _ => "INDETERMINATE",
    };
    println!("{:<20}{overall}", "result");
    Ok(code)
}

fn score_cmd(a: ScoreArgs) -> Result<u8> {
    let p = parse_position(&a.fen)?;
    let weights = load_weights(a.weights.as_ref())?;
    let tree = Solver::new(a.budget.budget())?.build_tree(&p, a.stipulation.moves())?;
    let s = score(&tree, &weights);
    if a.format == Format::Json {
        print_json(&json!({
            "total": s.total,
            "breakdown": s.breakdown,
            "contributions": s.breakdown.contributions(&weights).into_iter().map(|(k, v)| (k.to_owned(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "main_line": s.main_line.san,
        }));
        return Ok(0);
    }
    let values = s.breakdown.values();
    for ((name, term), value) in s.breakdown.contributions(&weights).into_iter().zip(values) {
        debug_assert!(FEATURE_NAMES.contains(&name));
        println!("{name:<20}{value:>8.3}{term:>+10.3}");
    }
    println!("{:<28}{:>10.3}", "total", s.total);
    println!("main line: {}", s.main_line.san.join(" "));
    Ok(0)
}

fn perft(a: PerftArgs) -> Result<u8> {
    let p = parse_position(&a.fen)?;
    if a.divide && a.depth >= 1 {
        let mut total = 0;
        for (m, n) in p.perft_divide(a.depth) {
            println!("{m} {n}");
            total += n;
        }
        println!("total {total}");
    } else {
        println!("{}", p.perft(a.depth));
    }
    Ok(0)
}

fn compose(a: ComposeArgs) -> Result<u8> {
    let spec = PieceSetSpec::parse(&a.white, &a.black)?;
    let mut cfg = ComposerConfig::new(spec, a.goals.iter().map(|g| g.moves()).collect());
    cfg.conventions = a.conventions.config();
    cfg.min_aesthetics = a.min_aesthetics;
    cfg.weights = load_weights(a.weights.as_ref())?;
    cfg.sampling = SamplingConfig {
        en_prise_filter: a.en_prise_filter,
        bias_strength: a.bias_strength,
    };
    cfg.max_candidates = a.max_candidates;
    cfg.max_wall_seconds = a.max_wall_seconds;
    cfg.per_solve = SearchBudget {
        max_nodes: a.solve_max_nodes,
        max_seconds: a.solve_max_seconds,
        transposition_entries: a.solve_tt_entries,
    };
    cfg.seed = a.seed;
    if a.games.is_some() || a.images.is_some() {
        cfg.substrate_sources = Some(SubstrateSources {
            games: a.games,
            images: a.images,
            config: a.substrate_config,
        });
    }
    cfg.location_label = a.location;
    cfg.symmetric_dedup = a.symmetric_dedup;
    cfg.workers = a.workers.max(1);
    cfg.fixed_timestamp = a.fixed_timestamp;
    cfg.validate()?;

    ctrlc::set_handler(|| STOP.store(true, Ordering::SeqCst))?;
    let mut archive = Archive::open(&a.location_dir.archive)?;
    let before = archive.len();
    let outcome = composer::run(&cfg, &mut archive, &STOP)?;
    let fresh: Vec<_> = archive.records()?.into_iter().skip(before).collect();

    if a.format == Format::Json {
        print_json(&json!({
            "archive": archive.dir(),
            "stats": outcome.stats,
            "emitted": fresh.iter().map(|r| &r.fen).collect::<Vec<_>>(),
            "error": outcome.error.as_ref().map(|e| e.to_string()),
        }));
    } else {
        let mut out = std::io::stdout().lock();
        for r in &fresh {
            writeln!(out, "{}  #{}  {:.3}  {}", r.fen, r.stipulation.moves(), r.aesthetics_score, r.main_line.join(" "))?;
        }
        writeln!(out, "{}", outcome.stats)?;
        writeln!(out, "archive: {}", archive.dir().display())?;
    }
    if let Some(e) = outcome.error {
        return Err(e.into());
    }
    Ok(0)
}

fn archive(a: ArchiveArgs) -> Result<u8> {
    let dir = &a.location.archive;
    match a.action {
        ArchiveAction::List => {
            for r in Archive::open(dir)?.records()? {
                println!("{}  #{}  {:.3}  {}", r.fen, r.stipulation.moves(), r.aesthetics_score, r.main_line.join(" "));
            }
            Ok(0)
        }
        ArchiveAction::Verify { conventions, weights } => {
            let cfg = conventions.config();
            let weights = load_weights(weights.as_ref())?;
            let records = Archive::open(dir)?.records()?;
            let mut bad = 0;
            for r in &records {
                if let Err(e) = composer::verify_record(r, &cfg, &weights, SearchBudget::default()) {
                    println!("FAIL {}: {e}", r.fen);
                    bad += 1;
                }
            }
            println!("{} of {} records verified", records.len() - bad, records.len());
            Ok(if bad == 0 { 0 } else { 1 })
        }
        ArchiveAction::Reindex => {
            println!("{} keys indexed", Archive::rebuild_index(dir)?);
            Ok(0)
        }
    }
}
