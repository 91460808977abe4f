use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use super::types::{PieceKind, Square};

/// Annotations on a move. `capture` is always filled by the generator;
/// `check`/`checkmate` only after [`Position::annotate`](super::Position::annotate).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveFlags {
    pub capture: bool,
    pub check: bool,
    pub checkmate: bool,
}

/// A single ply. Identity (equality, ordering, hashing) is the
/// `(from, to, promotion)` triple; flags are annotations only.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub promotion: Option<PieceKind>,
    #[serde(default)]
    pub flags: MoveFlags,
}

/// Largest legal move count of any chess position is 218.
pub type MoveList = ArrayVec<Move, 256>;

impl Move {
    pub fn new(from: Square, to: Square) -> Move {
        Move {
            from,
            to,
            promotion: None,
            flags: MoveFlags::default(),
        }
    }

    pub fn with_promotion(from: Square, to: Square, kind: PieceKind) -> Move {
        Move {
            promotion: Some(kind),
            ..Move::new(from, to)
        }
    }

    #[inline]
    fn key(&self) -> (Square, Square, Option<PieceKind>) {
        (self.from, self.to, self.promotion)
    }

    /// Neither a check nor a capture.
    pub fn is_quiet(&self) -> bool {
        !self.flags.capture && !self.flags.check
    }

    /// Long algebraic form, e.g. `c1e2` or `a7a8q`.
    pub fn to_uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(k) = self.promotion {
            s.push(k.letter().to_ascii_lowercase());
        }
        s
    }
}

impl PartialEq for Move {
    fn eq(&self, other: &Move) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Move {}

impl PartialOrd for Move {
    fn partial_cmp(&self, other: &Move) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Move {
    fn cmp(&self, other: &Move) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for Move {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_uci())
    }
}
