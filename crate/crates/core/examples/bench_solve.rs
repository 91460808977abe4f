use std::time::Instant;

use problemist::board::Position;
use problemist::solver::{SearchBudget, Solver};

fn main() {
    let fen = std::env::args().nth(1).unwrap_or_else(|| "8/8/8/4N3/8/4N2k/5KN1/2N4q w - - 0 1".into());
    let max: u8 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(6);
    let pos: Position = fen.parse().unwrap();
    let mut s = Solver::new(SearchBudget::default()).unwrap();
    let t = Instant::now();
    let r = s.solve_dtm(&pos, max).unwrap();
    println!("{:?} nodes={} {:.2}s", r.outcome, r.nodes_searched, t.elapsed().as_secs_f64());
    if let Some(n) = r.mate_in() {
        let t = Instant::now();
        let keys = s.key_moves(&pos, n).unwrap();
        println!("keys {:?} nodes={} {:.2}s", keys.iter().map(|m| m.to_uci()).collect::<Vec<_>>(), s.nodes_searched(), t.elapsed().as_secs_f64());
        let t = Instant::now();
        let tree = s.build_tree(&pos, n).unwrap();
        println!("tree nodes={} {:.2}s attack_nodes={}", s.nodes_searched(), t.elapsed().as_secs_f64(), tree.attack_nodes());
        print!("{}", tree.render_text());
    }
}
