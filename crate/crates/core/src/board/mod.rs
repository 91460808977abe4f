//! Chess model: squares, pieces, positions, legal move generation, FEN and
//! SAN, terminal-state classification and perft.

mod fen;
mod moves;
mod position;
mod san;
mod tables;
mod types;

pub use fen::{emit_fen, parse_fen, FenError};
pub use moves::{Move, MoveFlags, MoveList};
pub use position::{CastlingRights, IllegalPosition, MoveError, Position, Status, Successors};
pub use san::{move_to_san, parse_san, play_san_line, SanError};
pub use types::{Color, ParseSquareError, Piece, PieceKind, Square};
