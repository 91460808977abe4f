#![allow(dead_code)]

pub mod oracle;

use problemist::board::{Color, Piece, PieceKind, Position, Square};
use problemist::solver::{Outcome, SearchBudget, Solver};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use PieceKind::*;

pub const FOUR_KNIGHTS: &str = "8/8/8/4N3/8/4N2k/5KN1/2N4q w - - 0 1";

/// Kings plus the given extra pieces dropped on random squares; retries
/// until the placement is a legal position with `side` to move.
pub fn random_position<R: Rng>(rng: &mut R, white: &[PieceKind], black: &[PieceKind], side: Color) -> Position {
    let mut kinds: Vec<Piece> = vec![
        Piece::new(Color::White, PieceKind::King),
        Piece::new(Color::Black, PieceKind::King),
    ];
    kinds.extend(white.iter().map(|&k| Piece::new(Color::White, k)));
    kinds.extend(black.iter().map(|&k| Piece::new(Color::Black, k)));
    let squares: Vec<Square> = Square::all().collect();
    loop {
        let chosen: Vec<Square> = squares.choose_multiple(rng, kinds.len()).copied().collect();
        let placed: Vec<(Square, Piece)> = chosen.into_iter().zip(kinds.iter().copied()).collect();
        if let Ok(p) = Position::from_pieces(&placed, side) {
            return p;
        }
    }
}

pub fn uci_set(moves: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = moves.into_iter().collect();
    v.sort();
    v
}

pub const SMALL_SETS: &[(&[PieceKind], &[PieceKind])] = &[
    (&[Queen], &[]),
    (&[Rook], &[]),
    (&[Rook, Rook], &[]),
    (&[Queen, Knight], &[Pawn]),
    (&[Rook, Bishop], &[Knight]),
    (&[Queen, Rook], &[Bishop, Pawn]),
    (&[Rook, Knight, Pawn], &[Pawn, Pawn]),
];

/// White-to-move positions with a mate in at most 3, found by scanning a
/// seeded stream of random positions. Also returns the rejected positions.
pub fn mating_sample(wanted: usize, seed: u64) -> (Vec<(Position, u8)>, Vec<Position>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solver = Solver::new(SearchBudget {
        transposition_entries: 1 << 18,
        ..SearchBudget::default()
    }).unwrap();
    let mut mates = Vec::new();
    let mut others = Vec::new();
    let mut i = 0;
    while mates.len() < wanted {
        let (w, b) = SMALL_SETS[i % SMALL_SETS.len()];
        i += 1;
        let p = random_position(&mut rng, w, b, Color::White);
        if !p.has_legal_move() {
            continue;
        }
        match solver.solve_dtm(&p, 3).unwrap().outcome {
            Outcome::MateIn(n) => mates.push((p, n)),
            Outcome::NoMateWithin(_) => others.push(p),
            Outcome::Aborted => unreachable!(),
        }
    }
    (mates, others)
}
