//! Standard Algebraic Notation.

use super::moves::Move;
use super::position::Position;
use super::types::{PieceKind, Square};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SanError {
    #[error("unparseable SAN {0:?}")]
    Syntax(String),
    #[error("SAN {0:?} matches no legal move")]
    Illegal(String),
    #[error("SAN {0:?} matches more than one legal move")]
    Ambiguous(String),
}

fn is_castle(pos: &Position, m: &Move) -> bool {
    pos.piece_at(m.from).map(|p| p.kind) == Some(PieceKind::King)
        && m.from.file() == 4
        && m.from.rank() == m.to.rank()
        && m.from.file().abs_diff(m.to.file()) == 2
}

/// Render a legal move. Disambiguation uses the origin file when that is
/// unique, else the rank, else both; the suffix is `+` or `#`.
pub fn move_to_san(pos: &Position, m: Move) -> String {
    let piece = pos.piece_at(m.from).expect("SAN of a move from an empty square");
    let annotated = pos.annotate(m);
    let mut san = String::with_capacity(8);

    if is_castle(pos, &m) {
        san.push_str(if m.to.file() == 6 { "O-O" } else { "O-O-O" });
    } else if piece.kind == PieceKind::Pawn {
        if annotated.flags.capture {
            san.push(m.from.file_char());
            san.push('x');
        }
        san.push_str(&m.to.to_string());
        if let Some(k) = m.promotion {
            san.push('=');
            san.push(k.letter());
        }
    } else {
        san.push(piece.kind.letter());
        let rivals: Vec<Square> = pos
            .legal_moves()
            .into_iter()
            .filter(|o| {
                o.to == m.to
                    && o.from != m.from
                    && pos.piece_at(o.from).map(|p| p.kind) == Some(piece.kind)
            })
            .map(|o| o.from)
            .collect();
        if !rivals.is_empty() {
            if rivals.iter().all(|s| s.file() != m.from.file()) {
                san.push(m.from.file_char());
            } else if rivals.iter().all(|s| s.rank() != m.from.rank()) {
                san.push(m.from.rank_char());
            } else {
                san.push(m.from.file_char());
                san.push(m.from.rank_char());
            }
        }
        if annotated.flags.capture {
            san.push('x');
        }
        san.push_str(&m.to.to_string());
    }

    if annotated.flags.checkmate {
        san.push('#');
    } else if annotated.flags.check {
        san.push('+');
    }
    san
}

/// Parse SAN against the legal moves of `pos`. Check/mate suffixes and
/// annotation glyphs (`!`, `?`) are accepted and ignored.
pub fn parse_san(pos: &Position, text: &str) -> Result<Move, SanError> {
    let syntax = || SanError::Syntax(text.to_owned());
    let body = text.trim().trim_end_matches(['+', '#', '!', '?']);
    if body.is_empty() {
        return Err(syntax());
    }
    let legal = pos.legal_moves();

    let castle = match body {
        "O-O" | "0-0" => Some(6),
        "O-O-O" | "0-0-0" => Some(2),
        _ => None,
    };
    if let Some(file) = castle {
        return legal
            .iter()
            .copied()
            .find(|m| is_castle(pos, m) && m.to.file() == file)
            .ok_or_else(|| SanError::Illegal(text.to_owned()));
    }

    let mut chars: Vec<char> = body.chars().collect();
    let kind = match chars[0] {
        c @ ('K' | 'Q' | 'R' | 'B' | 'N') => {
            chars.remove(0);
            PieceKind::from_letter(c).expect("piece letter")
        }
        _ => PieceKind::Pawn,
    };

    let mut promotion = None;
    if kind == PieceKind::Pawn {
        if let Some(&last) = chars.last() {
            if let Some(k) = PieceKind::from_letter(last).filter(|&k| {
                last.is_ascii_uppercase() && PieceKind::PROMOTIONS.contains(&k)
            }) {
                promotion = Some(k);
                chars.pop();
                if chars.last() == Some(&'=') {
                    chars.pop();
                }
            }
        }
    }

    if chars.len() < 2 {
        return Err(syntax());
    }
    let dest: String = chars[chars.len() - 2..].iter().collect();
    let to: Square = dest.parse().map_err(|_| syntax())?;
    let mut prefix = &chars[..chars.len() - 2];
    let mut capture = false;
    if prefix.last() == Some(&'x') {
        capture = true;
        prefix = &prefix[..prefix.len() - 1];
    }
    let mut from_file = None;
    let mut from_rank = None;
    for &c in prefix {
        match c {
            'a'..='h' if from_file.is_none() && from_rank.is_none() => {
                from_file = Some(c as u8 - b'a')
            }
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return Err(syntax()),
        }
    }
    if kind == PieceKind::Pawn && capture && from_file.is_none() {
        return Err(syntax());
    }

    let mut found = None;
    for m in legal.iter().copied() {
        let piece = match pos.piece_at(m.from) {
            Some(p) => p,
            None => continue,
        };
        if piece.kind != kind
            || m.to != to
            || m.promotion != promotion
            || is_castle(pos, &m)
            || from_file.is_some_and(|f| m.from.file() != f)
            || from_rank.is_some_and(|r| m.from.rank() != r)
        {
            continue;
        }
        if capture && !m.flags.capture {
            continue;
        }
        if found.replace(m).is_some() {
            return Err(SanError::Ambiguous(text.to_owned()));
        }
    }
    found.ok_or_else(|| SanError::Illegal(text.to_owned()))
}

/// Play a sequence of SAN moves, returning every position along the way
/// (the first element is `start`). Fails at the first bad move with its
/// zero-based ply index.
pub fn play_san_line<'a, I>(start: &Position, moves: I) -> Result<Vec<Position>, (usize, SanError)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut line = vec![*start];
    for (ply, san) in moves.into_iter().enumerate() {
        let current = *line.last().expect("non-empty");
        let m = parse_san(&current, san).map_err(|e| (ply, e))?;
        line.push(current.play(m));
    }
    Ok(line)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_KNIGHTS: &str = "8/8/8/4N3/8/4N2k/5KN1/2N4q w - - 0 1";

    fn line(fen: &str, sans: &[&str]) -> Position {
        let start: Position = fen.parse().unwrap();
        *play_san_line(&start, sans.iter().copied()).unwrap().last().unwrap()
    }

    #[test]
    fn quiet_knight_move_needs_file_disambiguation() {
        // After 1.Ne2 Qxg2+ 2.Nxg2 Kh2 both the e2 and g2 knights reach f4.
        let p = line(FOUR_KNIGHTS, &["Ne2", "Qxg2+", "Nxg2", "Kh2"]);
        let m = parse_san(&p, "Ngf4").unwrap();
        assert_eq!(m.from, "g2".parse().unwrap());
        assert_eq!(move_to_san(&p, m), "Ngf4");
        assert_eq!(parse_san(&p, "Nf4"), Err(SanError::Ambiguous("Nf4".into())));
    }

    #[test]
    fn main_line_ends_in_mate_suffix() {
        let p = line(
            FOUR_KNIGHTS,
            &["Ne2", "Qxg2+", "Nxg2", "Kh2", "Ngf4", "Kh1", "Ng3+", "Kh2"],
        );
        let m = parse_san(&p, "Nf3").unwrap();
        assert_eq!(move_to_san(&p, m), "Nf3#");
    }

    #[test]
    fn lone_king_move_has_no_disambiguation() {
        let p = line(FOUR_KNIGHTS, &["Ne2", "Qxg2+", "Nxg2"]);
        let m = parse_san(&p, "Kh2").unwrap();
        assert_eq!(move_to_san(&p, m), "Kh2");
    }

    #[test]
    fn rank_disambiguation() {
        // Knights on e5 and e3 both reach g4.
        let p: Position = "8/8/8/4N3/8/4N3/5K2/7k w - - 0 1".parse().unwrap();
        let m = parse_san(&p, "N5g4").unwrap();
        assert_eq!(move_to_san(&p, m), "N5g4");
    }

    #[test]
    fn pawn_promotion_and_castling() {
        let p: Position = "r3k3/1P6/8/8/8/8/8/4K2R w K - 0 1".parse().unwrap();
        let m = parse_san(&p, "bxa8=Q+").unwrap();
        assert_eq!(m.promotion, Some(PieceKind::Queen));
        assert_eq!(move_to_san(&p, m), "bxa8=Q+");
        let castle = parse_san(&p, "O-O").unwrap();
        assert_eq!(move_to_san(&p, castle), "O-O");
        assert_eq!(parse_san(&p, "b8N").unwrap().promotion, Some(PieceKind::Knight));
    }

    #[test]
    fn bad_san() {
        let p = Position::initial();
        assert!(matches!(parse_san(&p, "Zz9"), Err(SanError::Syntax(_))));
        assert!(matches!(parse_san(&p, "e5"), Err(SanError::Illegal(_))));
        assert!(matches!(parse_san(&p, ""), Err(SanError::Syntax(_))));
        assert_eq!(parse_san(&p, "Nf3").unwrap().to_uci(), "g1f3");
    }
}
