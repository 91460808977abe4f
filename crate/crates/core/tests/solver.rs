mod common;

use common::oracle::{uci, NaiveBoard};
use common::{mating_sample, random_position, uci_set, FOUR_KNIGHTS};
use problemist::board::{play_san_line, Color, PieceKind, Position};
use problemist::solver::{
    build_tree, key_moves, solve_dtm, AttackNode, Outcome, SearchBudget, SolutionTree, Solver, SolverError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use PieceKind::*;

fn budget() -> SearchBudget {
    SearchBudget {
        transposition_entries: 1 << 18,
        ..SearchBudget::default()
    }
}

fn no_table() -> SearchBudget {
    SearchBudget {
        transposition_entries: 0,
        ..SearchBudget::default()
    }
}

fn after(fen: &str, sans: &[&str]) -> Position {
    let start: Position = fen.parse().unwrap();
    *play_san_line(&start, sans.iter().copied()).unwrap().last().unwrap()
}

#[test]
fn distance_and_keys_match_naive_minimax() {
    let (mates, others) = mating_sample(60, 11);
    assert!(mates.len() >= 50);
    for (p, n) in &mates {
        assert!(p.piece_count() <= 7);
        let naive = NaiveBoard::from_fen(&p.to_string());
        assert_eq!(naive.dtm(3), Some(*n as u32), "{p}");
        let keys = key_moves(p, *n, budget()).unwrap();
        assert_eq!(
            uci_set(keys.iter().map(|m| m.to_uci())),
            uci_set(naive.keys(*n as u32).into_iter().map(uci)),
            "{p}"
        );
    }
    // Negative answers are checked to a smaller bound to keep the naive
    // search affordable.
    for p in others.iter().take(40) {
        let naive = NaiveBoard::from_fen(&p.to_string());
        assert_eq!(naive.dtm(2), None, "{p}");
    }
}

#[test]
fn black_to_move_counts_remaining_white_moves() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 20 {
        let p = random_position(&mut rng, &[Queen], &[Pawn], Color::Black);
        if !p.has_legal_move() {
            continue;
        }
        let r = solve_dtm(&p, 2, budget()).unwrap();
        let naive = NaiveBoard::from_fen(&p.to_string());
        let expected = (1..=2).find(|&k| naive.loses_within(k));
        match r.outcome {
            Outcome::MateIn(n) => assert_eq!(expected, Some(n as u32), "{p}"),
            Outcome::NoMateWithin(_) => assert_eq!(expected, None, "{p}"),
            Outcome::Aborted => unreachable!(),
        }
        checked += 1;
    }
}

#[test]
fn transposition_table_never_changes_answers() {
    let (mates, others) = mating_sample(25, 23);
    for p in mates.iter().map(|(p, _)| p).chain(others.iter().take(25)) {
        let with = solve_dtm(p, 3, budget()).unwrap().outcome;
        let without = solve_dtm(p, 3, no_table()).unwrap().outcome;
        assert_eq!(with, without, "{p}");
        if let Outcome::MateIn(n) = with {
            assert_eq!(key_moves(p, n, budget()).unwrap(), key_moves(p, n, no_table()).unwrap());
        }
    }
}

#[test]
fn mate_bounds_are_monotone() {
    let (mates, _) = mating_sample(20, 31);
    let mut solver = Solver::new(budget()).unwrap();
    for (p, n) in &mates {
        for k in 1..=5u8 {
            assert_eq!(solver.mates_within(p, k).unwrap(), k >= *n, "{p} k={k}");
        }
    }
}

fn check_attack_node(pos: &Position, node: &AttackNode, solver: &mut Solver) {
    let n = node.mate_in;
    let keys = solver.key_moves(pos, n).unwrap();
    let options: Vec<_> = node.options.iter().map(|o| o.mv).collect();
    assert_eq!(options, keys, "options at {pos} are the optimal moves");
    for opt in &node.options {
        let next = pos.apply_move(opt.mv).unwrap();
        let legal = next.legal_moves();
        let listed: Vec<_> = opt.defense.defenses.iter().map(|d| d.mv).collect();
        assert_eq!(listed, legal.to_vec(), "every defense at {next} is listed");
        if legal.is_empty() {
            assert!(next.is_checkmate());
            assert!(opt.san.ends_with('#'));
        }
        for d in &opt.defense.defenses {
            let reply_pos = next.apply_move(d.mv).unwrap();
            assert!(d.reply.mate_in < n);
            let exact = solver.solve_dtm(&reply_pos, n).unwrap().mate_in();
            assert_eq!(exact, Some(d.reply.mate_in));
            check_attack_node(&reply_pos, &d.reply, solver);
        }
    }
}

#[test]
fn trees_are_exhaustive_with_exact_lengths() {
    let (mates, _) = mating_sample(20, 47);
    let mut solver = Solver::new(budget()).unwrap();
    for (p, n) in &mates {
        let tree = build_tree(p, *n, budget()).unwrap();
        assert_eq!(tree.max_plies(), 2 * *n as usize - 1, "{p}");
        check_attack_node(p, &tree.root, &mut solver);
        tree.for_each_line(|line| {
            let end = play_san_line(p, line.iter().map(|(_, s)| s.as_str())).unwrap();
            assert!(end.last().unwrap().is_checkmate());
        });
    }
}

#[test]
fn tree_requires_exact_distance() {
    let p: Position = "7k/8/6K1/8/8/8/8/1Q6 w - - 0 1".parse().unwrap();
    assert_eq!(build_tree(&p, 2, budget()), Err(SolverError::NoMate(2)));
}

#[test]
fn rook_ladder_has_several_keys() {
    let p: Position = "7k/8/8/8/8/8/R7/1R4K1 w - - 0 1".parse().unwrap();
    let r = solve_dtm(&p, 4, budget()).unwrap();
    assert_eq!(r.outcome, Outcome::MateIn(2));
    let keys = key_moves(&p, 2, budget()).unwrap();
    assert!(keys.len() >= 2);
    let naive = NaiveBoard::from_fen(&p.to_string());
    assert_eq!(
        uci_set(keys.iter().map(|m| m.to_uci())),
        uci_set(naive.keys(2).into_iter().map(uci))
    );
}

fn four_knights_tree() -> SolutionTree {
    let p: Position = FOUR_KNIGHTS.parse().unwrap();
    build_tree(&p, 5, budget()).unwrap()
}

#[test]
fn four_knights_is_mate_in_five_with_unique_quiet_key() {
    let p: Position = FOUR_KNIGHTS.parse().unwrap();
    assert_eq!(solve_dtm(&p, 8, budget()).unwrap().outcome, Outcome::MateIn(5));
    let keys = key_moves(&p, 5, budget()).unwrap();
    assert_eq!(keys.len(), 1);
    assert_eq!(keys[0].to_uci(), "c1e2");
    assert!(keys[0].is_quiet());
    let tree = four_knights_tree();
    assert_eq!(tree.root.sans(), ["Ne2"]);
    assert_eq!(tree.max_plies(), 9);
}

#[test]
fn four_knights_defense_lengths() {
    let tree = four_knights_tree();
    let key = tree.root.option("Ne2").unwrap();
    let remaining = |san: &str| key.defense.defense(san).unwrap().reply.mate_in;
    for san in ["Qf1+", "Qe1+"] {
        assert_eq!(remaining(san), 3, "{san}");
    }
    for san in ["Qd1", "Qc1", "Qb1", "Qa1"] {
        assert_eq!(remaining(san), 3, "{san}");
        let reply = &key.defense.defense(san).unwrap().reply;
        assert_eq!(reply.sans(), ["Ngf4+"]);
        let short = reply.options[0].defense.defense("Kh4").unwrap();
        assert_eq!(short.reply.sans(), ["Nf3#"]);
        let long = reply.options[0].defense.defense("Kh2").unwrap();
        assert_eq!(uci_set(long.reply.sans().into_iter().map(String::from)), ["N3g4+", "N5g4+", "Nf3+"]);
    }
    for san in ["Qg1+", "Qxg2+"] {
        assert_eq!(remaining(san), 4, "{san}");
    }
    let qf1 = &key.defense.defense("Qf1+").unwrap().reply;
    assert_eq!(qf1.sans(), ["Kxf1"]);
}

#[test]
fn queen_retreat_lengths_agree_with_naive_search() {
    for san in ["Qd1", "Qa1"] {
        let p = after(FOUR_KNIGHTS, &["Ne2", san]);
        let naive = NaiveBoard::from_fen(&p.to_string());
        assert!(!naive.mate_within(2), "{san}");
        assert!(naive.mate_within(3), "{san}");
    }
}

#[test]
fn four_knights_main_line_duals() {
    let tree = four_knights_tree();
    let kh2 = &tree
        .root
        .option("Ne2")
        .unwrap()
        .defense
        .defense("Qxg2+")
        .unwrap()
        .reply
        .option("Nxg2")
        .unwrap()
        .defense
        .defense("Kh2")
        .unwrap()
        .reply;
    assert_eq!(kh2.sans(), ["Ngf4"]);
    let last = &kh2.options[0]
        .defense
        .defense("Kh1")
        .unwrap()
        .reply
        .option("Ng3+")
        .unwrap()
        .defense
        .defense("Kh2")
        .unwrap()
        .reply;
    assert_eq!(uci_set(last.sans().into_iter().map(String::from)), ["Nf3#", "Ng4#"]);
}

#[test]
fn embedded_sub_problems() {
    let p = after(FOUR_KNIGHTS, &["Ne2", "Qxg2+", "Nxg2", "Kh2"]);
    assert_eq!(solve_dtm(&p, 6, budget()).unwrap().outcome, Outcome::MateIn(3));
    let keys = key_moves(&p, 3, budget()).unwrap();
    assert_eq!(keys.iter().map(|m| m.to_uci()).collect::<Vec<_>>(), ["g2f4"]);
    assert!(keys[0].is_quiet());

    let ne3 = after(FOUR_KNIGHTS, &["Ne2", "Qxg2+", "Nxg2", "Kh2", "Ne3"]);
    assert_eq!(solve_dtm(&ne3, 6, budget()).unwrap().outcome, Outcome::MateIn(4));
}

#[test]
fn aborted_search_reports_counters() {
    let p: Position = FOUR_KNIGHTS.parse().unwrap();
    let tiny = SearchBudget {
        max_nodes: 500,
        ..budget()
    };
    let r = solve_dtm(&p, 5, tiny).unwrap();
    assert_eq!(r.outcome, Outcome::Aborted);
    assert_eq!(r.nodes_searched, 501);
}
