//! Composition conventions: exact stipulation, no cooks, quiet key.

use serde::{Deserialize, Serialize};

use crate::board::{Move, Position};
use crate::solver::{Outcome, SearchBudget, Solver, SolverError, Stipulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionConfig {
    pub require_no_cooks: bool,
    pub require_no_check_in_key: bool,
    pub require_no_capture_in_key: bool,
}

impl Default for ConventionConfig {
    fn default() -> ConventionConfig {
        ConventionConfig {
            require_no_cooks: true,
            require_no_check_in_key: true,
            require_no_capture_in_key: true,
        }
    }
}

impl ConventionConfig {
    pub const NONE: ConventionConfig = ConventionConfig {
        require_no_cooks: false,
        require_no_check_in_key: false,
        require_no_capture_in_key: false,
    };
}

/// Verdicts with the evidence they were derived from.
///
/// `key_gives_check` and `key_captures` describe the unique key. When the
/// problem is cooked they are true if any key checks or captures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub stipulation: Stipulation,
    pub stipulation_holds: bool,
    /// Exact distance to mate if it is within the stipulated bound.
    pub dtm: Option<u8>,
    /// Keys of the shortest mate, so of the stipulated one when it holds.
    pub keys: Vec<Move>,
    pub cooked: bool,
    pub key_gives_check: bool,
    pub key_captures: bool,
    pub passed: bool,
    /// The search budget ran out; every verdict above is unproven.
    pub indeterminate: bool,
}

impl ConventionReport {
    fn indeterminate(stipulation: Stipulation) -> ConventionReport {
        ConventionReport {
            stipulation,
            stipulation_holds: false,
            dtm: None,
            keys: Vec::new(),
            cooked: false,
            key_gives_check: false,
            key_captures: false,
            passed: false,
            indeterminate: true,
        }
    }

    /// (name, satisfied, enabled) per convention, in a fixed order.
    pub fn checks(&self, cfg: &ConventionConfig) -> [(&'static str, bool, bool); 4] {
        [
            ("stipulation", self.stipulation_holds, true),
            ("no cooks", !self.cooked, cfg.require_no_cooks),
            ("no check in key", !self.key_gives_check, cfg.require_no_check_in_key),
            ("no capture in key", !self.key_captures, cfg.require_no_capture_in_key),
        ]
    }
}

/// Evaluate with a caller-owned solver so its table is reused.
pub fn evaluate_with(
    solver: &mut Solver,
    p: &Position,
    stipulation: Stipulation,
    cfg: &ConventionConfig,
) -> Result<ConventionReport, SolverError> {
    let n = stipulation.moves();
    let result = solver.solve_dtm(p, n)?;
    let dtm = match result.outcome {
        Outcome::MateIn(d) => Some(d),
        Outcome::NoMateWithin(_) => None,
        Outcome::Aborted => return Ok(ConventionReport::indeterminate(stipulation)),
    };
    let keys = match dtm {
        Some(d) => match solver.key_moves(p, d) {
            Ok(keys) => keys,
            Err(SolverError::Aborted { .. }) => return Ok(ConventionReport::indeterminate(stipulation)),
            Err(e) => return Err(e),
        },
        None => Vec::new(),
    };
    let stipulation_holds = dtm == Some(n);
    let cooked = keys.len() > 1;
    let key_gives_check = keys.iter().any(|k| k.flags.check);
    let key_captures = keys.iter().any(|k| k.flags.capture);
    let mut report = ConventionReport {
        stipulation,
        stipulation_holds,
        dtm,
        keys,
        cooked,
        key_gives_check,
        key_captures,
        passed: false,
        indeterminate: false,
    };
    report.passed = report.checks(cfg).iter().all(|&(_, ok, enabled)| ok || !enabled);
    Ok(report)
}

pub fn evaluate(
    p: &Position,
    stipulation: Stipulation,
    cfg: &ConventionConfig,
    budget: SearchBudget,
) -> Result<ConventionReport, SolverError> {
    evaluate_with(&mut Solver::new(budget)?, p, stipulation, cfg)
}
