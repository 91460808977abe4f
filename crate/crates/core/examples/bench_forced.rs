use std::time::Instant;

use problemist::board::{play_san_line, Position};
use problemist::solver::{SearchBudget, Solver};

fn main() {
    let mut args = std::env::args().skip(1);
    let fen = args.next().unwrap();
    let max: u8 = args.next().unwrap().parse().unwrap();
    let sans: Vec<String> = args.collect();
    let pos: Position = fen.parse().unwrap();
    let line = play_san_line(&pos, sans.iter().map(|s| s.as_str())).unwrap();
    let p = *line.last().unwrap();
    println!("{p}");
    let mut s = Solver::new(SearchBudget::default()).unwrap();
    let t = Instant::now();
    let r = s.solve_dtm(&p, max).unwrap();
    println!("{:?} nodes={} {:.2}s", r.outcome, r.nodes_searched, t.elapsed().as_secs_f64());
}
