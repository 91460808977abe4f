use problemist::aesthetics::{score, ScoreWeights};
use problemist::board::Position;
use problemist::solver::{build_tree, SearchBudget};

fn main() {
    let fen = std::env::args().nth(1).unwrap_or_else(|| "8/8/8/4N3/8/4N2k/5KN1/2N4q w - - 0 1".into());
    let n: u8 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(5);
    let p: Position = fen.parse().unwrap();
    let tree = build_tree(&p, n, SearchBudget::default()).unwrap();
    let w = ScoreWeights::default();
    let s = score(&tree, &w);
    println!("total {:.4}", s.total);
    for (name, c) in s.breakdown.contributions(&w) {
        println!("  {name:<18} {c:+.4}");
    }
    println!("{:?}", s.breakdown);
    println!("{}", s.main_line.san.join(" "));
}
