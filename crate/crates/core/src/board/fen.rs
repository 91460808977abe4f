//! Forsyth-Edwards Notation.
//!
//! Parsing is strict: exactly six whitespace-separated fields, castling rights
//! must match king and rook placement, and the en-passant square must be
//! consistent with a pawn that has just double-pushed.

use std::str::FromStr;

use super::position::{CastlingRights, IllegalPosition, Position};
use super::types::{Color, Piece, PieceKind, Square};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FenError {
    #[error("expected 6 FEN fields, found {0}")]
    FieldCount(usize),
    #[error("malformed piece placement: {0}")]
    Placement(String),
    #[error("malformed side to move: {0:?}")]
    SideToMove(String),
    #[error("malformed castling field: {0:?}")]
    Castling(String),
    #[error("malformed en passant field: {0:?}")]
    EnPassant(String),
    #[error("malformed halfmove clock: {0:?}")]
    HalfmoveClock(String),
    #[error("malformed fullmove number: {0:?}")]
    FullmoveNumber(String),
    #[error("illegal position: {0}")]
    Illegal(#[from] IllegalPosition),
}

pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let side = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_owned())),
    };
    let mut pos = Position::empty(side);
    parse_placement(fields[0], &mut pos)?;

    let castling = parse_castling(fields[2], &pos)?;
    let en_passant = parse_en_passant(fields[3], &pos)?;
    let halfmove: u32 = fields[4]
        .parse()
        .map_err(|_| FenError::HalfmoveClock(fields[4].to_owned()))?;
    let fullmove: u32 = match fields[5].parse() {
        Ok(n) if n >= 1 => n,
        _ => return Err(FenError::FullmoveNumber(fields[5].to_owned())),
    };
    pos.set_state(castling, en_passant, halfmove, fullmove);
    pos.validate()?;
    Ok(pos)
}

fn parse_placement(field: &str, pos: &mut Position) -> Result<(), FenError> {
    let err = |msg: &str| FenError::Placement(format!("{msg} in {field:?}"));
    let rows: Vec<&str> = field.split('/').collect();
    if rows.len() != 8 {
        return Err(err("expected 8 ranks"));
    }
    for (i, row) in rows.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        let mut last_was_digit = false;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) || last_was_digit {
                    return Err(err("bad empty-square count"));
                }
                file += d as u8;
                last_was_digit = true;
            } else {
                let piece = Piece::from_fen_char(c).ok_or_else(|| err("unknown piece letter"))?;
                if file >= 8 {
                    return Err(err("rank overflows"));
                }
                pos.put(Square::new(file, rank), piece);
                file += 1;
                last_was_digit = false;
            }
            if file > 8 {
                return Err(err("rank overflows"));
            }
        }
        if file != 8 {
            return Err(err("rank does not cover 8 files"));
        }
    }
    Ok(())
}

fn parse_castling(field: &str, pos: &Position) -> Result<CastlingRights, FenError> {
    if field == "-" {
        return Ok(CastlingRights::NONE);
    }
    let err = || FenError::Castling(field.to_owned());
    let mut bits = 0u8;
    // Canonical order is KQkq; anything else would not round trip.
    let order = [
        ('K', CastlingRights::WHITE_KINGSIDE, Color::White, 7u8),
        ('Q', CastlingRights::WHITE_QUEENSIDE, Color::White, 0),
        ('k', CastlingRights::BLACK_KINGSIDE, Color::Black, 7),
        ('q', CastlingRights::BLACK_QUEENSIDE, Color::Black, 0),
    ];
    let mut rest = field;
    for (c, flag, color, rook_file) in order {
        if let Some(tail) = rest.strip_prefix(c) {
            rest = tail;
            let rank = if color == Color::White { 0 } else { 7 };
            let king = Piece::new(color, PieceKind::King);
            let rook = Piece::new(color, PieceKind::Rook);
            if pos.piece_at(Square::new(4, rank)) != Some(king)
                || pos.piece_at(Square::new(rook_file, rank)) != Some(rook)
            {
                return Err(err());
            }
            bits |= flag;
        }
    }
    if !rest.is_empty() || bits == 0 {
        return Err(err());
    }
    Ok(CastlingRights::from_bits(bits))
}

fn parse_en_passant(field: &str, pos: &Position) -> Result<Option<Square>, FenError> {
    if field == "-" {
        return Ok(None);
    }
    let err = || FenError::EnPassant(field.to_owned());
    let sq: Square = field.parse().map_err(|_| err())?;
    // The square behind a pawn the opponent just pushed two ranks.
    let (target_rank, dr) = match pos.side_to_move() {
        Color::White => (5, -1i8),
        Color::Black => (2, 1),
    };
    if sq.rank() != target_rank {
        return Err(err());
    }
    let pusher = pos.side_to_move().opposite();
    let pawn_sq = sq.offset(0, dr).ok_or_else(err)?;
    let origin = sq.offset(0, -dr).ok_or_else(err)?;
    if pos.piece_at(pawn_sq) != Some(Piece::new(pusher, PieceKind::Pawn))
        || pos.piece_at(sq).is_some()
        || pos.piece_at(origin).is_some()
    {
        return Err(err());
    }
    Ok(Some(sq))
}

pub fn emit_fen(pos: &Position) -> String {
    let mut out = String::with_capacity(90);
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            match pos.piece_at(Square::new(file, rank)) {
                Some(p) => {
                    if empty > 0 {
                        out.push(char::from(b'0' + empty));
                        empty = 0;
                    }
                    out.push(p.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from(b'0' + empty));
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match pos.side_to_move() {
        Color::White => 'w',
        Color::Black => 'b',
    });
    out.push(' ');
    let c = pos.castling();
    if c.is_empty() {
        out.push('-');
    } else {
        for (flag, ch) in [
            (CastlingRights::WHITE_KINGSIDE, 'K'),
            (CastlingRights::WHITE_QUEENSIDE, 'Q'),
            (CastlingRights::BLACK_KINGSIDE, 'k'),
            (CastlingRights::BLACK_QUEENSIDE, 'q'),
        ] {
            if c.has(flag) {
                out.push(ch);
            }
        }
    }
    out.push(' ');
    match pos.en_passant() {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(" {} {}", pos.halfmove_clock(), pos.fullmove_number()));
    out
}

impl FromStr for Position {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Position, FenError> {
        parse_fen(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_KNIGHTS: &str = "8/8/8/4N3/8/4N2k/5KN1/2N4q w - - 0 1";

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    #[test]
    fn four_knights_position_parses() {
        let p = parse_fen(FOUR_KNIGHTS).unwrap();
        let wn = Piece::new(Color::White, PieceKind::Knight);
        for s in ["c1", "e3", "e5", "g2"] {
            assert_eq!(p.piece_at(sq(s)), Some(wn), "{s}");
        }
        assert_eq!(p.piece_at(sq("f2")), Some(Piece::new(Color::White, PieceKind::King)));
        assert_eq!(p.piece_at(sq("h3")), Some(Piece::new(Color::Black, PieceKind::King)));
        assert_eq!(p.piece_at(sq("h1")), Some(Piece::new(Color::Black, PieceKind::Queen)));
        assert_eq!(p.piece_count(), 7);
        assert_eq!(p.side_to_move(), Color::White);
        assert_eq!(emit_fen(&p), FOUR_KNIGHTS);
    }

    #[test]
    fn bare_kings_round_trip() {
        let t = "8/8/8/8/8/8/8/K6k w - - 0 1";
        assert_eq!(emit_fen(&parse_fen(t).unwrap()), t);
    }

    #[test]
    fn emit_after_move_flips_side_and_relocates_knight() {
        let p = parse_fen(FOUR_KNIGHTS).unwrap();
        let next = p
            .apply_move(crate::board::Move::new(sq("c1"), sq("e2")))
            .unwrap();
        assert_eq!(emit_fen(&next), "8/8/8/4N3/8/4N2k/4NKN1/7q b - - 1 1");
    }

    #[test]
    fn distinct_errors() {
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/KK5k w - - 0 1"),
            Err(FenError::Illegal(IllegalPosition::TooManyKings(Color::White)))
        );
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/Kk6 w - - 0 1"),
            Err(FenError::Illegal(IllegalPosition::AdjacentKings))
        );
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/K5Rk w - - 0 1"),
            Err(FenError::Illegal(IllegalPosition::OpponentInCheck))
        );
        assert_eq!(
            parse_fen("P7/8/8/8/8/8/8/K6k w - - 0 1"),
            Err(FenError::Illegal(IllegalPosition::PawnOnBackRank(sq("a8"))))
        );
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/7k w - - 0 1"),
            Err(FenError::Illegal(IllegalPosition::MissingKing(Color::White)))
        );
        assert_eq!(parse_fen("invalid"), Err(FenError::FieldCount(1)));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/8/K6k x - - 0 1"),
            Err(FenError::SideToMove(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/8/K6k w K - 0 1"),
            Err(FenError::Castling(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/8/K6k w - e3 0 1"),
            Err(FenError::EnPassant(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/8/K6k w - - x 1"),
            Err(FenError::HalfmoveClock(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/8/K6k w - - 0 0"),
            Err(FenError::FullmoveNumber(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/9/K6k w - - 0 1"),
            Err(FenError::Placement(_))
        ));
        assert!(matches!(
            parse_fen("8/8/8/8/8/8/44/K6k w - - 0 1"),
            Err(FenError::Placement(_))
        ));
    }

    #[test]
    fn castling_and_en_passant_round_trip() {
        for t in [
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1",
            "r3k2r/8/8/8/8/8/8/R3K2R b Kq - 7 42",
        ] {
            assert_eq!(emit_fen(&parse_fen(t).unwrap()), t);
        }
    }
}
