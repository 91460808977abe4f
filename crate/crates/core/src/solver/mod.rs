//! Exact bounded distance-to-mate search.
//!
//! White is always the attacking side. A White-to-move position asks "can
//! White force mate within n moves"; a Black-to-move position asks "does
//! every Black move allow White to force mate within n further moves".
//! Move counts are White moves, so a mate in 5 spans 9 plies.
//!
//! The search is an iterative-deepening depth-first AND/OR search. There is
//! no evaluation function: every node is either proven mate within a bound
//! or proven not.

mod tree;
mod tt;

use std::fmt;
use std::time::Instant;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::board::{Color, Move, Position, Status};
use tt::{Probe, TranspositionTable};

pub use tree::{AttackNode, AttackOption, Defense, DefenseNode, SolutionTree};

/// Largest supported mate length in attacker moves.
pub const MAX_MATE_MOVES: u8 = 16;

const ATTACKER: Color = Color::White;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stipulation {
    MateIn(u8),
}

impl Stipulation {
    pub fn moves(self) -> u8 {
        match self {
            Stipulation::MateIn(n) => n,
        }
    }
}

impl fmt::Display for Stipulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stipulation::MateIn(n) => write!(f, "White to play and mate in {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("bad stipulation {0:?}: expected mateN or #N with N in 1..={MAX_MATE_MOVES}")]
pub struct ParseStipulationError(pub String);

/// Accepts `mate5`, `mate 5`, `#5` and `5`.
impl std::str::FromStr for Stipulation {
    type Err = ParseStipulationError;

    fn from_str(s: &str) -> Result<Stipulation, ParseStipulationError> {
        let t = s.trim().to_ascii_lowercase();
        let digits = t.strip_prefix("mate").or_else(|| t.strip_prefix('#')).unwrap_or(&t).trim();
        match digits.parse::<u8>() {
            Ok(n) if (1..=MAX_MATE_MOVES).contains(&n) => Ok(Stipulation::MateIn(n)),
            _ => Err(ParseStipulationError(s.to_owned())),
        }
    }
}

/// Limits for one solver call. A zero `transposition_entries` disables the
/// table; the node and time limits must be positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_seconds: f64,
    pub transposition_entries: usize,
}

impl Default for SearchBudget {
    fn default() -> SearchBudget {
        SearchBudget {
            max_nodes: 1 << 34,
            max_seconds: 3600.0,
            transposition_entries: 1 << 22,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_nodes == 0 {
            return Err(SolverError::InvalidBudget("max_nodes must be positive"));
        }
        if !(self.max_seconds > 0.0) {
            return Err(SolverError::InvalidBudget("max_seconds must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MateIn(u8),
    NoMateWithin(u8),
    Aborted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MateResult {
    pub outcome: Outcome,
    pub nodes_searched: u64,
    pub elapsed: f64,
}

impl MateResult {
    pub fn mate_in(&self) -> Option<u8> {
        match self.outcome {
            Outcome::MateIn(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("mate bound {0} outside 1..={MAX_MATE_MOVES}")]
    BoundOutOfRange(u8),
    #[error("invalid search budget: {0}")]
    InvalidBudget(&'static str),
    #[error("search budget exhausted after {nodes} nodes in {elapsed:.3}s")]
    Aborted { nodes: u64, elapsed: f64 },
    #[error("position is already terminal ({0:?})")]
    Terminal(Status),
    #[error("the attacking side (White) must be to move")]
    AttackerNotToMove,
    #[error("no forced mate within {0} moves")]
    NoMate(u8),
}

/// Internal abort marker; converted to [`SolverError::Aborted`] at the API.
struct Abort;

/// Single-threaded solver that owns its transposition table. Counters and
/// limits restart at every public call; table contents persist across calls
/// until [`Solver::clear`].
pub struct Solver {
    tt: TranspositionTable,
    budget: SearchBudget,
    nodes: u64,
    started: Instant,
}

impl Solver {
    pub fn new(budget: SearchBudget) -> Result<Solver, SolverError> {
        budget.validate()?;
        Ok(Solver {
            tt: TranspositionTable::new(budget.transposition_entries),
            budget,
            nodes: 0,
            started: Instant::now(),
        })
    }

    pub fn budget(&self) -> SearchBudget {
        self.budget
    }

    /// Change limits; the table is reallocated only if its size changes.
    pub fn set_budget(&mut self, budget: SearchBudget) -> Result<(), SolverError> {
        budget.validate()?;
        if budget.transposition_entries != self.budget.transposition_entries {
            self.tt = TranspositionTable::new(budget.transposition_entries);
        }
        self.budget = budget;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.tt.clear();
    }

    /// Nodes visited by the most recent public call.
    pub fn nodes_searched(&self) -> u64 {
        self.nodes
    }

    fn begin(&mut self) {
        self.nodes = 0;
        self.started = Instant::now();
    }

    fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    fn aborted(&self) -> SolverError {
        SolverError::Aborted {
            nodes: self.nodes,
            elapsed: self.elapsed(),
        }
    }

    #[inline]
    fn tick(&mut self) -> Result<(), Abort> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Abort);
        }
        if self.nodes & 0x3FF == 0 && self.elapsed() > self.budget.max_seconds {
            return Err(Abort);
        }
        Ok(())
    }

    /// White to move: can White force mate within `depth` moves?
    fn attack(&mut self, pos: &Position, depth: u8) -> Result<bool, Abort> {
        self.tick()?;
        if depth == 0 {
            return Ok(false);
        }
        let key = pos.hash();
        match self.tt.probe(key, depth) {
            Probe::Mate => return Ok(true),
            Probe::NoMate => return Ok(false),
            Probe::Unknown => {}
        }
        let succ = pos.successors();
        let found = if depth == 1 {
            succ.iter()
                .any(|(_, next)| next.in_check() && !next.has_legal_move())
        } else {
            // Checks first: they are the likeliest mating tries and the
            // cheapest to refute or confirm.
            let mut order: ArrayVec<u8, 256> = ArrayVec::new();
            let mut quiet: ArrayVec<u8, 256> = ArrayVec::new();
            for (i, (_, next)) in succ.iter().enumerate() {
                if next.in_check() {
                    order.push(i as u8);
                } else {
                    quiet.push(i as u8);
                }
            }
            order.extend(quiet);
            let mut found = false;
            for i in order {
                if self.defend(&succ[i as usize].1, depth - 1)? {
                    found = true;
                    break;
                }
            }
            found
        };
        self.tt.store(key, depth, found);
        Ok(found)
    }

    /// Black to move: is Black mated within `depth` further White moves
    /// whatever it plays?
    fn defend(&mut self, pos: &Position, depth: u8) -> Result<bool, Abort> {
        self.tick()?;
        let succ = pos.successors();
        if succ.is_empty() {
            return Ok(pos.in_check());
        }
        if depth == 0 {
            return Ok(false);
        }
        let key = pos.hash();
        match self.tt.probe(key, depth) {
            Probe::Mate => return Ok(true),
            Probe::NoMate => return Ok(false),
            Probe::Unknown => {}
        }
        // Checks and captures first: they are the likeliest refutations.
        let mut order: ArrayVec<u8, 256> = ArrayVec::new();
        let mut rest: ArrayVec<u8, 256> = ArrayVec::new();
        for (i, (m, next)) in succ.iter().enumerate() {
            if m.flags.capture || next.in_check() {
                order.push(i as u8);
            } else {
                rest.push(i as u8);
            }
        }
        order.extend(rest);
        for i in order {
            if !self.attack(&succ[i as usize].1, depth)? {
                self.tt.store(key, depth, false);
                return Ok(false);
            }
        }
        self.tt.store(key, depth, true);
        Ok(true)
    }

    fn mates_within_inner(&mut self, pos: &Position, depth: u8) -> Result<bool, Abort> {
        if pos.side_to_move() == ATTACKER {
            self.attack(pos, depth)
        } else {
            self.defend(pos, depth)
        }
    }

    /// Smallest `n` in `1..=max` with a forced mate, if any.
    fn exact_dtm(&mut self, pos: &Position, max: u8) -> Result<Option<u8>, Abort> {
        for n in 1..=max {
            if self.mates_within_inner(pos, n)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    fn check_bound(max_moves: u8) -> Result<(), SolverError> {
        if !(1..=MAX_MATE_MOVES).contains(&max_moves) {
            return Err(SolverError::BoundOutOfRange(max_moves));
        }
        Ok(())
    }

    /// Does White force mate within `n` moves? Works for either side to move.
    pub fn mates_within(&mut self, pos: &Position, n: u8) -> Result<bool, SolverError> {
        Self::check_bound(n)?;
        self.begin();
        self.mates_within_inner(pos, n).map_err(|_| self.aborted())
    }

    /// Minimal distance to mate up to `max_moves`. Budget exhaustion is
    /// reported as [`Outcome::Aborted`], not as an error.
    pub fn solve_dtm(&mut self, pos: &Position, max_moves: u8) -> Result<MateResult, SolverError> {
        Self::check_bound(max_moves)?;
        self.begin();
        let outcome = match self.exact_dtm(pos, max_moves) {
            Ok(Some(n)) => Outcome::MateIn(n),
            Ok(None) => Outcome::NoMateWithin(max_moves),
            Err(Abort) => Outcome::Aborted,
        };
        Ok(MateResult {
            outcome,
            nodes_searched: self.nodes,
            elapsed: self.elapsed(),
        })
    }

    fn require_attacker_to_move(pos: &Position) -> Result<(), SolverError> {
        if pos.side_to_move() != ATTACKER {
            return Err(SolverError::AttackerNotToMove);
        }
        match pos.classify() {
            status @ (Status::Checkmate | Status::Stalemate) => Err(SolverError::Terminal(status)),
            _ => Ok(()),
        }
    }

    /// Every first move after which White still forces mate within `n - 1`
    /// further moves, in legal-move order, with flags annotated. Every
    /// legal first move is searched to the bound.
    pub fn key_moves(&mut self, pos: &Position, n: u8) -> Result<Vec<Move>, SolverError> {
        Self::check_bound(n)?;
        Self::require_attacker_to_move(pos)?;
        self.begin();
        let mut keys = Vec::new();
        for (m, next) in pos.successors() {
            if self.defend(&next, n - 1).map_err(|_| self.aborted())? {
                keys.push(pos.annotate(m));
            }
        }
        if keys.is_empty() {
            return Err(SolverError::NoMate(n));
        }
        Ok(keys)
    }

    /// Full solution tree for a position whose distance to mate is exactly `n`.
    pub fn build_tree(&mut self, pos: &Position, n: u8) -> Result<SolutionTree, SolverError> {
        Self::check_bound(n)?;
        Self::require_attacker_to_move(pos)?;
        self.begin();
        let result = (|| -> Result<Result<AttackNode, SolverError>, Abort> {
            match self.exact_dtm(pos, n)? {
                Some(d) if d == n => Ok(Ok(self.attack_node(pos, n)?)),
                _ => Ok(Err(SolverError::NoMate(n))),
            }
        })();
        let root = match result {
            Ok(r) => r?,
            Err(Abort) => return Err(self.aborted()),
        };
        Ok(SolutionTree {
            root_fen: pos.to_string(),
            stipulation: Stipulation::MateIn(n),
            root,
        })
    }

    /// `remaining` is the exact distance to mate of `pos`.
    fn attack_node(&mut self, pos: &Position, remaining: u8) -> Result<AttackNode, Abort> {
        let mut options = Vec::new();
        for (m, next) in pos.successors() {
            if self.defend(&next, remaining - 1)? {
                let san = crate::board::move_to_san(pos, m);
                let defense = self.defense_node(&next, remaining - 1)?;
                options.push(AttackOption {
                    mv: pos.annotate(m),
                    san,
                    defense,
                });
            }
        }
        debug_assert!(!options.is_empty(), "no optimal move at {pos}");
        Ok(AttackNode {
            mate_in: remaining,
            principal: 0,
            options,
        })
    }

    fn defense_node(&mut self, pos: &Position, bound: u8) -> Result<DefenseNode, Abort> {
        let mut defenses = Vec::new();
        for (m, next) in pos.successors() {
            let dtm = self
                .exact_dtm(&next, bound)?
                .expect("defense escapes a proven mate");
            let san = crate::board::move_to_san(pos, m);
            let reply = self.attack_node(&next, dtm)?;
            defenses.push(Defense {
                mv: pos.annotate(m),
                san,
                reply,
            });
        }
        Ok(DefenseNode { defenses })
    }
}

pub fn solve_dtm(pos: &Position, max_moves: u8, budget: SearchBudget) -> Result<MateResult, SolverError> {
    Solver::new(budget)?.solve_dtm(pos, max_moves)
}

pub fn key_moves(pos: &Position, n: u8, budget: SearchBudget) -> Result<Vec<Move>, SolverError> {
    Solver::new(budget)?.key_moves(pos, n)
}

pub fn build_tree(pos: &Position, n: u8, budget: SearchBudget) -> Result<SolutionTree, SolverError> {
    Solver::new(budget)?.build_tree(pos, n)
}
