//! The generate-and-test loop: sample, solve, filter, score, archive.
//!
//! Every candidate `i` draws from its own random stream (the run seed with
//! stream number `i`), and each solve starts with a cleared transposition
//! table. A candidate's verdict therefore depends only on the configuration,
//! the seed and `i`. Workers may evaluate candidates in any order; the single
//! appender applies verdicts in index order, so parallel and sequential runs
//! write identical archives.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aesthetics::{score, ScoreWeights};
use crate::archive::{Archive, ArchiveError, CompositionRecord};
use crate::board::{emit_fen, Color, IllegalPosition, Piece, PieceKind, Position, Square};
use crate::conventions::{evaluate_with, ConventionConfig};
use crate::solver::{Outcome, SearchBudget, Solver, SolverError, Stipulation, MAX_MATE_MOVES};
use crate::substrate::{AttributeVector, Substrate, SubstrateConfig, SubstrateError};

pub const COMPOSER_VERSION: &str = concat!("problemist ", env!("CARGO_PKG_VERSION"));

// --- piece sets ----------------------------------------------------------

/// The exact material of every candidate, kings included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceSetSpec {
    pub white: Vec<PieceKind>,
    pub black: Vec<PieceKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("unknown piece letter {0:?}")]
    Letter(char),
    #[error("{0:?} must have exactly one king")]
    Kings(Color),
    #[error("{0:?} has more {1:?}s than promotions allow")]
    TooMany(Color, PieceKind),
    #[error("{0:?} has more than 16 pieces")]
    SideTooLarge(Color),
}

impl PieceSetSpec {
    /// Kinds are stored king first, then in Q R B N P order.
    pub fn new(mut white: Vec<PieceKind>, mut black: Vec<PieceKind>) -> Result<PieceSetSpec, SpecError> {
        for (color, side) in [(Color::White, &mut white), (Color::Black, &mut black)] {
            side.sort();
            let count = |k| side.iter().filter(|&&x| x == k).count();
            if count(PieceKind::King) != 1 {
                return Err(SpecError::Kings(color));
            }
            if side.len() > 16 {
                return Err(SpecError::SideTooLarge(color));
            }
            let pawns = count(PieceKind::Pawn);
            let mut promoted = 0;
            for (kind, base) in [(PieceKind::Queen, 1), (PieceKind::Rook, 2), (PieceKind::Bishop, 2), (PieceKind::Knight, 2)] {
                promoted += count(kind).saturating_sub(base);
                if pawns > 8 || pawns + promoted > 8 {
                    return Err(SpecError::TooMany(color, kind));
                }
            }
            if pawns > 8 {
                return Err(SpecError::TooMany(color, PieceKind::Pawn));
            }
        }
        Ok(PieceSetSpec { white, black })
    }

    /// Parse letter strings such as `"KNNNN"` and `"KQ"` (case-insensitive).
    pub fn parse(white: &str, black: &str) -> Result<PieceSetSpec, SpecError> {
        let kinds = |s: &str| -> Result<Vec<PieceKind>, SpecError> {
            s.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| PieceKind::from_letter(c.to_ascii_uppercase()).ok_or(SpecError::Letter(c)))
                .collect()
        };
        PieceSetSpec::new(kinds(white)?, kinds(black)?)
    }

    pub fn len(&self) -> usize {
        self.white.len() + self.black.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pieces in placement order: both kings, then White's and Black's men.
    fn placement_order(&self) -> Vec<Piece> {
        let w = |k| Piece::new(Color::White, k);
        let b = |k| Piece::new(Color::Black, k);
        let mut out = vec![w(PieceKind::King), b(PieceKind::King)];
        out.extend(self.white.iter().filter(|&&k| k != PieceKind::King).map(|&k| w(k)));
        out.extend(self.black.iter().filter(|&&k| k != PieceKind::King).map(|&k| b(k)));
        out
    }
}

impl fmt::Display for PieceSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = |v: &[PieceKind]| v.iter().map(|k| k.letter()).collect::<String>();
        write!(f, "{} vs {}", letters(&self.white), letters(&self.black).to_lowercase())
    }
}

// --- sampling ------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Overlap,
    Adjacency,
    IllegalCheck,
    PawnRank,
    EnPrise,
}

impl RejectReason {
    pub const ALL: [RejectReason; 5] = [
        RejectReason::Overlap,
        RejectReason::Adjacency,
        RejectReason::IllegalCheck,
        RejectReason::PawnRank,
        RejectReason::EnPrise,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub en_prise_filter: bool,
    /// 0 ignores the bias; 1 uses the bias weights alone.
    pub bias_strength: f64,
}

impl Default for SamplingConfig {
    fn default() -> SamplingConfig {
        SamplingConfig {
            en_prise_filter: false,
            bias_strength: 0.75,
        }
    }
}

/// Square weights pulling men toward the bias centroid. Denser bias
/// vectors give a tighter spread.
fn man_weights(bias: &AttributeVector, strength: f64) -> [f64; 64] {
    let sigma = 0.75 + (1.0 - bias.density) * 3.0;
    let mut w = [0.0; 64];
    for (i, x) in w.iter_mut().enumerate() {
        let df = (i % 8) as f64 - bias.centroid_file;
        let dr = (i / 8) as f64 - bias.centroid_rank;
        let g = (-(df * df + dr * dr) / (2.0 * sigma * sigma)).exp();
        *x = (1.0 - strength) + strength * g;
    }
    w
}

/// Weights for the Black king favoring the bias king separation.
fn king_weights(bias: &AttributeVector, strength: f64, white_king: Square) -> [f64; 64] {
    let mut w = [0.0; 64];
    for (i, x) in w.iter_mut().enumerate() {
        let d = Square::from_index(i as u8).chebyshev(white_king) as f64 - bias.king_separation;
        *x = (1.0 - strength) + strength * (-(d * d) / 2.0).exp();
    }
    w
}

fn draw_square<R: Rng + ?Sized>(rng: &mut R, weights: Option<&[f64; 64]>) -> Square {
    let Some(w) = weights else {
        return Square::from_index(rng.gen_range(0..64));
    };
    let total: f64 = w.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &wi) in w.iter().enumerate() {
        if x < wi {
            return Square::from_index(i as u8);
        }
        x -= wi;
    }
    Square::from_index(63)
}

/// Does White have a man that Black wins material by capturing? Static
/// rule: undefended and attacked, or attacked by something cheaper.
pub fn has_en_prise_piece(p: &Position) -> bool {
    let occ = p.occupied();
    p.pieces()
        .filter(|(_, pc)| pc.color == Color::White && pc.kind != PieceKind::King)
        .any(|(sq, pc)| {
            let attackers = p.attackers_to(sq, Color::Black, occ);
            if attackers == 0 {
                return false;
            }
            let defended = p.attackers_to(sq, Color::White, occ) != 0;
            if !defended {
                return true;
            }
            p.pieces()
                .filter(|(s, _)| attackers & s.bit() != 0)
                .any(|(_, a)| a.kind != PieceKind::King && a.kind.value() < pc.kind.value())
        })
}

/// Drop every piece of `spec` on an independently drawn square, White to
/// move. Malformed placements are rejected, never repaired.
pub fn sample_position<R: Rng + ?Sized>(
    spec: &PieceSetSpec,
    bias: Option<&AttributeVector>,
    cfg: &SamplingConfig,
    rng: &mut R,
) -> Result<Position, RejectReason> {
    let order = spec.placement_order();
    let men = bias.map(|b| man_weights(b, cfg.bias_strength));
    let mut placed: Vec<(Square, Piece)> = Vec::with_capacity(order.len());
    for (i, &piece) in order.iter().enumerate() {
        let sq = if i == 1 {
            let kings = bias.map(|b| king_weights(b, cfg.bias_strength, placed[0].0));
            draw_square(rng, kings.as_ref())
        } else {
            draw_square(rng, men.as_ref())
        };
        placed.push((sq, piece));
    }
    let p = Position::from_pieces(&placed, Color::White).map_err(|e| match e {
        IllegalPosition::Overlap(_) => RejectReason::Overlap,
        IllegalPosition::AdjacentKings => RejectReason::Adjacency,
        IllegalPosition::OpponentInCheck => RejectReason::IllegalCheck,
        IllegalPosition::PawnOnBackRank(_) => RejectReason::PawnRank,
        other => unreachable!("piece-set spec admits {other:?}"),
    })?;
    if cfg.en_prise_filter && has_en_prise_piece(&p) {
        return Err(RejectReason::EnPrise);
    }
    Ok(p)
}

// --- dedup ---------------------------------------------------------------

fn transform(sq: Square, t: u8) -> Square {
    let (f, r) = (sq.file(), sq.rank());
    let (f, r) = if t & 4 != 0 { (r, f) } else { (f, r) };
    let f = if t & 1 != 0 { 7 - f } else { f };
    let r = if t & 2 != 0 { 7 - r } else { r };
    Square::new(f, r)
}

/// Piece placement and side-to-move fields. With `symmetric`, the key is
/// the smallest over board symmetries that preserve the rules: the file
/// mirror always, all eight when there are no pawns.
pub fn dedup_key(p: &Position, symmetric: bool) -> String {
    let key = |pos: &Position| {
        let fen = emit_fen(pos);
        let mut fields = fen.split(' ');
        format!("{} {}", fields.next().unwrap_or(""), fields.next().unwrap_or(""))
    };
    if !symmetric {
        return key(p);
    }
    let pawnless = p.pieces().all(|(_, pc)| pc.kind != PieceKind::Pawn);
    let transforms: &[u8] = if pawnless { &[0, 1, 2, 3, 4, 5, 6, 7] } else { &[0, 1] };
    transforms
        .iter()
        .filter_map(|&t| {
            let pieces: Vec<(Square, Piece)> = p.pieces().map(|(s, pc)| (transform(s, t), pc)).collect();
            Position::from_pieces(&pieces, p.side_to_move()).ok().map(|q| key(&q))
        })
        .min()
        .unwrap_or_else(|| key(p))
}

// --- configuration -------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstrateSources {
    pub games: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposerConfig {
    pub piece_set: PieceSetSpec,
    /// Accepted exact mate lengths in White moves.
    pub goals: Vec<u8>,
    pub conventions: ConventionConfig,
    pub min_aesthetics: Option<f64>,
    pub weights: ScoreWeights,
    pub sampling: SamplingConfig,
    pub max_candidates: u64,
    pub max_wall_seconds: f64,
    pub per_solve: SearchBudget,
    pub seed: u64,
    pub substrate_sources: Option<SubstrateSources>,
    pub location_label: String,
    pub symmetric_dedup: bool,
    pub workers: usize,
    /// Written instead of the clock into every record; makes archives
    /// reproducible byte for byte.
    pub fixed_timestamp: Option<String>,
}

impl ComposerConfig {
    pub fn new(piece_set: PieceSetSpec, goals: Vec<u8>) -> ComposerConfig {
        ComposerConfig {
            piece_set,
            goals,
            conventions: ConventionConfig::default(),
            min_aesthetics: None,
            weights: ScoreWeights::default(),
            sampling: SamplingConfig::default(),
            max_candidates: 1_000_000,
            max_wall_seconds: 3600.0,
            per_solve: SearchBudget {
                max_nodes: 2_000_000,
                max_seconds: 60.0,
                transposition_entries: 1 << 18,
            },
            seed: 0,
            substrate_sources: None,
            location_label: String::new(),
            symmetric_dedup: false,
            workers: 1,
            fixed_timestamp: None,
        }
    }

    pub fn validate(&self) -> Result<(), ComposeError> {
        if self.goals.is_empty() {
            return Err(ComposeError::Config("at least one goal is required".into()));
        }
        if let Some(&g) = self.goals.iter().find(|&&g| g == 0 || g > MAX_MATE_MOVES) {
            return Err(ComposeError::Config(format!("goal mate in {g} is out of range")));
        }
        if !(self.max_wall_seconds > 0.0) {
            return Err(ComposeError::Config("max_wall_seconds must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.sampling.bias_strength) {
            return Err(ComposeError::Config("bias_strength must lie in [0, 1]".into()));
        }
        self.weights
            .validate()
            .map_err(|e| ComposeError::Config(e.to_string()))?;
        self.per_solve.validate().map_err(ComposeError::Solver)?;
        Ok(())
    }

    fn max_goal(&self) -> u8 {
        self.goals.iter().copied().max().unwrap_or(1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("invalid composer configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(SolverError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error("substrate config: {0}")]
    SubstrateConfig(#[from] crate::substrate::ConfigError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

// --- statistics ----------------------------------------------------------

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub candidates: u64,
    pub rejections: BTreeMap<RejectReason, u64>,
    /// Candidates with a proven mate within the largest goal.
    pub solved: u64,
    pub no_mate: u64,
    pub wrong_length: u64,
    pub aborted: u64,
    pub convention_failures: u64,
    pub aesthetics_failures: u64,
    pub duplicates: u64,
    pub emitted: u64,
    pub elapsed_seconds: f64,
    pub interrupted: bool,
}

impl RunStats {
    pub fn rejected(&self) -> u64 {
        self.rejections.values().sum()
    }

    pub fn emissions_per_candidate(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.emitted as f64 / self.candidates as f64
        }
    }
}

impl fmt::Display for RunStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut row = |label: &str, value: u64| writeln!(f, "{label:<24}{value}");
        row("candidates", self.candidates)?;
        for r in RejectReason::ALL {
            let name = serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            row(&format!("rejected {name}"), self.rejections.get(&r).copied().unwrap_or(0))?;
        }
        row("solved", self.solved)?;
        row("no mate", self.no_mate)?;
        row("wrong length", self.wrong_length)?;
        row("solver aborted", self.aborted)?;
        row("convention failures", self.convention_failures)?;
        row("aesthetics failures", self.aesthetics_failures)?;
        row("duplicates", self.duplicates)?;
        row("emitted", self.emitted)?;
        write!(f, "{:<24}{:.1}s", "elapsed", self.elapsed_seconds)
    }
}

// --- candidates ----------------------------------------------------------

/// What happened to one candidate, before deduplication.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Rejected(RejectReason),
    NoMate,
    WrongLength(u8),
    Aborted,
    ConventionFailed,
    AestheticsFailed,
    Accepted(Box<CompositionRecord>),
}

/// The random stream of candidate `index`.
pub fn candidate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn timestamp(cfg: &ComposerConfig) -> String {
    match &cfg.fixed_timestamp {
        Some(t) => t.clone(),
        None => chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

/// Solve, filter and score one position.
pub fn judge(cfg: &ComposerConfig, solver: &mut Solver, p: &Position, index: u64) -> Verdict {
    solver.clear();
    let dtm = match solver.solve_dtm(p, cfg.max_goal()) {
        Ok(r) => match r.outcome {
            Outcome::MateIn(d) => d,
            Outcome::NoMateWithin(_) => return Verdict::NoMate,
            Outcome::Aborted => return Verdict::Aborted,
        },
        Err(_) => return Verdict::Aborted,
    };
    if !cfg.goals.contains(&dtm) {
        return Verdict::WrongLength(dtm);
    }
    let stipulation = Stipulation::MateIn(dtm);
    let report = match evaluate_with(solver, p, stipulation, &cfg.conventions) {
        Ok(r) if r.indeterminate => return Verdict::Aborted,
        Ok(r) => r,
        Err(_) => return Verdict::Aborted,
    };
    if !report.passed {
        return Verdict::ConventionFailed;
    }
    let tree = match solver.build_tree(p, dtm) {
        Ok(t) => t,
        Err(_) => return Verdict::Aborted,
    };
    let s = score(&tree, &cfg.weights);
    if cfg.min_aesthetics.is_some_and(|min| s.total < min) {
        return Verdict::AestheticsFailed;
    }
    Verdict::Accepted(Box::new(CompositionRecord {
        fen: emit_fen(p),
        stipulation,
        composer_version: COMPOSER_VERSION.to_owned(),
        location_label: cfg.location_label.clone(),
        utc_timestamp: timestamp(cfg),
        main_line: s.main_line.san,
        solution_tree: tree,
        aesthetics_score: s.total,
        aesthetics_breakdown: s.breakdown,
        convention_report: report,
        seed: cfg.seed,
        candidate_index: index,
        dedup_key: dedup_key(p, cfg.symmetric_dedup),
    }))
}

/// Sample and judge candidate `index`.
pub fn evaluate_candidate(cfg: &ComposerConfig, substrate: Option<&Substrate>, solver: &mut Solver, index: u64) -> Verdict {
    let mut rng = candidate_rng(cfg.seed, index);
    let bias = substrate.and_then(|s| s.draw(&mut rng));
    match sample_position(&cfg.piece_set, bias.as_ref(), &cfg.sampling, &mut rng) {
        Ok(p) => judge(cfg, solver, &p, index),
        Err(r) => Verdict::Rejected(r),
    }
}

/// Sequential composer state: the cursor, dedup set and statistics.
pub struct Composer {
    cfg: ComposerConfig,
    substrate: Option<Substrate>,
    solver: Solver,
    seen: HashSet<String>,
    stats: RunStats,
    next_index: u64,
}

impl Composer {
    pub fn new(cfg: ComposerConfig, substrate: Option<Substrate>) -> Result<Composer, ComposeError> {
        cfg.validate()?;
        let solver = Solver::new(cfg.per_solve).map_err(ComposeError::Solver)?;
        Ok(Composer {
            cfg,
            substrate,
            solver,
            seen: HashSet::new(),
            stats: RunStats::default(),
            next_index: 0,
        })
    }

    pub fn config(&self) -> &ComposerConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    /// Treat these keys as already archived.
    pub fn mark_seen<I: IntoIterator<Item = String>>(&mut self, keys: I) {
        self.seen.extend(keys);
    }

    /// Count a verdict; returns the record if it is new.
    pub fn absorb(&mut self, verdict: Verdict) -> Option<CompositionRecord> {
        let s = &mut self.stats;
        s.candidates += 1;
        if !matches!(verdict, Verdict::Rejected(_) | Verdict::NoMate | Verdict::Aborted) {
            s.solved += 1;
        }
        match verdict {
            Verdict::Rejected(r) => *s.rejections.entry(r).or_insert(0) += 1,
            Verdict::NoMate => s.no_mate += 1,
            Verdict::WrongLength(_) => s.wrong_length += 1,
            Verdict::Aborted => s.aborted += 1,
            Verdict::ConventionFailed => s.convention_failures += 1,
            Verdict::AestheticsFailed => s.aesthetics_failures += 1,
            Verdict::Accepted(record) => {
                if !self.seen.insert(record.dedup_key.clone()) {
                    s.duplicates += 1;
                    return None;
                }
                s.emitted += 1;
                return Some(*record);
            }
        }
        None
    }

    /// Examine the next sampled candidate.
    pub fn compose_step(&mut self) -> Option<CompositionRecord> {
        let index = self.next_index;
        self.next_index += 1;
        let verdict = evaluate_candidate(&self.cfg, self.substrate.as_ref(), &mut self.solver, index);
        self.absorb(verdict)
    }

    /// Examine a given position as the next candidate.
    pub fn consider(&mut self, p: &Position) -> Option<CompositionRecord> {
        let index = self.next_index;
        self.next_index += 1;
        let verdict = judge(&self.cfg, &mut self.solver, p, index);
        self.absorb(verdict)
    }
}

fn load_substrate(cfg: &ComposerConfig) -> Result<Option<Substrate>, ComposeError> {
    let Some(src) = &cfg.substrate_sources else {
        return Ok(None);
    };
    let sub_cfg = match &src.config {
        Some(p) => SubstrateConfig::load(p)?,
        None => SubstrateConfig::default(),
    };
    let s = Substrate::load(src.games.as_deref(), src.images.as_deref(), sub_cfg)?;
    Ok((!s.is_empty()).then_some(s))
}

/// Statistics plus the error that ended the run early, if any.
pub struct RunOutcome {
    pub stats: RunStats,
    pub error: Option<ArchiveError>,
}

/// Compose until a budget runs out or `stop` is raised, appending every
/// new record to `archive`.
pub fn run(cfg: &ComposerConfig, archive: &mut Archive, stop: &AtomicBool) -> Result<RunOutcome, ComposeError> {
    let substrate = load_substrate(cfg)?;
    run_with_substrate(cfg, substrate, archive, stop)
}

pub fn run_with_substrate(
    cfg: &ComposerConfig,
    substrate: Option<Substrate>,
    archive: &mut Archive,
    stop: &AtomicBool,
) -> Result<RunOutcome, ComposeError> {
    let started = Instant::now();
    let mut composer = Composer::new(cfg.clone(), substrate)?;
    let existing: Vec<String> = archive.records()?.into_iter().map(|r| r.dedup_key).collect();
    composer.mark_seen(existing);
    let out_of_time = || started.elapsed().as_secs_f64() >= cfg.max_wall_seconds;

    let mut error = None;
    if cfg.workers <= 1 {
        while composer.next_index < cfg.max_candidates && !out_of_time() && !stop.load(Ordering::Relaxed) {
            if let Some(record) = composer.compose_step() {
                if let Err(e) = archive.append(&record) {
                    error = Some(e);
                    break;
                }
            }
        }
    } else {
        error = run_parallel(cfg, &mut composer, archive, stop, &out_of_time);
    }
    let mut stats = composer.stats.clone();
    stats.elapsed_seconds = started.elapsed().as_secs_f64();
    stats.interrupted = stop.load(Ordering::Relaxed);
    Ok(RunOutcome { stats, error })
}

fn run_parallel(
    cfg: &ComposerConfig,
    composer: &mut Composer,
    archive: &mut Archive,
    stop: &AtomicBool,
    out_of_time: &(dyn Fn() -> bool + Sync),
) -> Option<ArchiveError> {
    let next = AtomicU64::new(0);
    let failed = AtomicBool::new(false);
    let substrate = composer.substrate.clone();
    let (tx, rx) = mpsc::channel::<(u64, Verdict)>();
    let mut error = None;
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers {
            let tx = tx.clone();
            let (next, failed, substrate) = (&next, &failed, substrate.as_ref());
            scope.spawn(move || {
                let mut solver = Solver::new(cfg.per_solve).expect("budget validated");
                loop {
                    if out_of_time() || stop.load(Ordering::Relaxed) || failed.load(Ordering::Relaxed) {
                        break;
                    }
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= cfg.max_candidates {
                        break;
                    }
                    let verdict = evaluate_candidate(cfg, substrate, &mut solver, index);
                    if tx.send((index, verdict)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        // Apply verdicts strictly in index order.
        let mut pending = BTreeMap::new();
        for (index, verdict) in rx {
            pending.insert(index, verdict);
            while let Some(verdict) = pending.remove(&composer.next_index) {
                composer.next_index += 1;
                if error.is_some() {
                    continue;
                }
                if let Some(record) = composer.absorb(verdict) {
                    if let Err(e) = archive.append(&record) {
                        error = Some(e);
                        failed.store(true, Ordering::Relaxed);
                    }
                }
            }
        }
    });
    error
}

// --- re-verification -----------------------------------------------------

/// Recompute every verdict of a record from its FEN and compare.
pub fn verify_record(
    record: &CompositionRecord,
    conventions: &ConventionConfig,
    weights: &ScoreWeights,
    budget: SearchBudget,
) -> Result<(), String> {
    let p: Position = record.fen.parse().map_err(|e| format!("bad FEN: {e}"))?;
    let mut solver = Solver::new(budget).map_err(|e| e.to_string())?;
    let n = record.stipulation.moves();
    let dtm = solver.solve_dtm(&p, n).map_err(|e| e.to_string())?;
    if dtm.outcome != Outcome::MateIn(n) {
        return Err(format!("solver reports {:?}, record claims mate in {n}", dtm.outcome));
    }
    let report = evaluate_with(&mut solver, &p, record.stipulation, conventions).map_err(|e| e.to_string())?;
    if !report.passed {
        return Err("conventions fail on re-evaluation".into());
    }
    if report != record.convention_report {
        return Err("convention report differs".into());
    }
    let tree = solver.build_tree(&p, n).map_err(|e| e.to_string())?;
    if tree != record.solution_tree {
        return Err("solution tree differs".into());
    }
    let s = score(&tree, weights);
    if s.total != record.aesthetics_score || s.breakdown != record.aesthetics_breakdown {
        return Err("aesthetics score differs".into());
    }
    if s.main_line.san != record.main_line {
        return Err("main line differs".into());
    }
    Ok(())
}
