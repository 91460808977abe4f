mod common;

use common::oracle::{uci, NaiveBoard};
use common::{random_position, uci_set, FOUR_KNIGHTS};
use problemist::board::{
    emit_fen, move_to_san, parse_fen, parse_san, play_san_line, Color, PieceKind, Position, Status,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use PieceKind::*;

const SEVEN_PIECE_SETS: &[(&[PieceKind], &[PieceKind])] = &[
    (&[Knight, Knight, Knight, Knight], &[Queen]),
    (&[Rook, Bishop, Pawn], &[Rook, Pawn]),
    (&[Queen, Pawn], &[Bishop, Knight, Pawn]),
    (&[Rook, Rook], &[Queen, Pawn, Pawn]),
    (&[Bishop, Bishop, Knight], &[Rook, Knight]),
];

fn seven_piece_positions(count: usize, seed: u64) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (w, b) = SEVEN_PIECE_SETS[i % SEVEN_PIECE_SETS.len()];
            let side = if i % 3 == 2 { Color::Black } else { Color::White };
            random_position(&mut rng, w, b, side)
        })
        .collect()
}

#[test]
fn perft_matches_naive_generator_on_reference_positions() {
    for (fen, depth) in [
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", 4),
        ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", 3),
        ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", 4),
        ("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1", 3),
        (FOUR_KNIGHTS, 4),
    ] {
        let p = parse_fen(fen).unwrap();
        let naive = NaiveBoard::from_fen(fen);
        assert_eq!(p.perft(depth), naive.perft(depth), "{fen} depth {depth}");
    }
}

#[test]
fn perft_known_values() {
    let kiwipete = parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1").unwrap();
    assert_eq!(kiwipete.perft(3), 97_862);
    assert_eq!(Position::initial().perft(4), 197_281);
}

#[test]
fn perft_matches_naive_generator_on_random_seven_piece_positions() {
    for p in seven_piece_positions(20, 7) {
        let fen = emit_fen(&p);
        let naive = NaiveBoard::from_fen(&fen);
        for depth in 1..=4 {
            assert_eq!(p.perft(depth), naive.perft(depth), "{fen} depth {depth}");
        }
    }
}

#[test]
fn four_knights_after_queen_check_has_two_replies() {
    let start = parse_fen(FOUR_KNIGHTS).unwrap();
    let line = play_san_line(&start, ["Ne2", "Qxg2+"]).unwrap();
    let p = line.last().unwrap();
    let replies = uci_set(p.legal_moves().iter().map(|m| m.to_uci()));
    assert_eq!(replies, vec!["e3g2".to_string(), "f2e1".to_string()]);
    let naive = NaiveBoard::from_fen(&emit_fen(p));
    assert_eq!(uci_set(naive.legal().into_iter().map(uci)), replies);
    // capture resets the halfmove clock
    let after = p.apply_move(parse_san(p, "Nxg2").unwrap()).unwrap();
    assert_eq!(after.halfmove_clock(), 0);
}

#[test]
fn main_line_ends_in_checkmate() {
    let start = parse_fen(FOUR_KNIGHTS).unwrap();
    assert_eq!(start.classify(), Status::Ongoing);
    let line = play_san_line(
        &start,
        ["Ne2", "Qxg2+", "Nxg2", "Kh2", "Ngf4", "Kh1", "Ng3+", "Kh2", "Nf3"],
    )
    .unwrap();
    let end = line.last().unwrap();
    assert_eq!(end.classify(), Status::Checkmate);
    assert!(end.legal_moves().is_empty());
}

fn arb_position() -> impl Strategy<Value = Position> {
    (any::<u64>(), 0..SEVEN_PIECE_SETS.len(), any::<bool>()).prop_map(|(seed, set, black)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, b) = SEVEN_PIECE_SETS[set];
        let side = if black { Color::Black } else { Color::White };
        random_position(&mut rng, w, b, side)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fen_round_trip(p in arb_position()) {
        let fen = emit_fen(&p);
        prop_assert_eq!(emit_fen(&parse_fen(&fen).unwrap()), fen);
    }

    #[test]
    fn moves_never_leave_own_king_attacked(p in arb_position()) {
        let mover = p.side_to_move();
        for m in p.legal_moves() {
            let next = p.apply_move(m).unwrap();
            let naive = NaiveBoard::from_fen(&emit_fen(&next));
            let king = next.king_square(mover);
            prop_assert!(!naive.attacked(king.index(), mover == Color::Black));
            prop_assert!(next.validate().is_ok());
            prop_assert_eq!(next.side_to_move(), !mover);
        }
    }

    #[test]
    fn san_round_trip(p in arb_position()) {
        for m in p.legal_moves() {
            let san = move_to_san(&p, m);
            prop_assert_eq!(parse_san(&p, &san).unwrap(), m, "{}", san);
        }
    }

    #[test]
    fn classify_is_pure(p in arb_position()) {
        let s = p.classify();
        prop_assert_eq!(s, p.classify());
        prop_assert_eq!(p.legal_moves().is_empty(), matches!(s, Status::Checkmate | Status::Stalemate));
        prop_assert_eq!(p.in_check(), matches!(s, Status::Checkmate | Status::Check));
    }
}
