//! A small, explicit aesthetics model for solved problems.
//!
//! The score is a signed weighted sum of a handful of features. Tree-level
//! features (variation and dual penalties) describe the whole solution;
//! line-level features describe one root-to-leaf line and its final mate
//! position. The main line is the line with the best line-level score.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::board::{Color, Move, Position, Square};
use crate::solver::{AttackNode, SolutionTree};

macro_rules! features {
    ($($name:ident: $sign:expr, $default:expr;)*) => {
        /// Raw feature values. See the module docs for what each one measures.
        #[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
        pub struct FeatureBreakdown {
            $(pub $name: f64,)*
        }

        /// One non-negative weight per feature. Penalties are subtracted.
        #[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
        pub struct ScoreWeights {
            $(pub $name: f64,)*
        }

        impl Default for ScoreWeights {
            fn default() -> ScoreWeights {
                ScoreWeights { $($name: $default,)* }
            }
        }

        pub const FEATURE_NAMES: &[&str] = &[$(stringify!($name)),*];
        const SIGNS: &[f64] = &[$($sign),*];

        impl FeatureBreakdown {
            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$name),*]
            }
        }

        impl ScoreWeights {
            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$name),*]
            }

            fn slot(&mut self, key: &str) -> Option<&mut f64> {
                match key {
                    $(stringify!($name) => Some(&mut self.$name),)*
                    _ => None,
                }
            }

            pub fn scaled(&self, factor: f64) -> ScoreWeights {
                ScoreWeights { $($name: self.$name * factor,)* }
            }
        }
    };
}

features! {
    quiet_key: 1.0, 1.0;
    sacrifice_count: 1.0, 0.25;
    variation_penalty: -1.0, 0.2;
    dual_penalty: -1.0, 0.05;
    geometry_line: 1.0, 0.25;
    geometry_triangle: 1.0, 0.5;
    economy: 1.0, 1.0;
    mainline_length: 1.0, 0.1;
}

/// Features that depend on the chosen line rather than the whole tree.
const LINE_LEVEL: &[&str] = &[
    "quiet_key",
    "sacrifice_count",
    "geometry_line",
    "geometry_triangle",
    "economy",
    "mainline_length",
];

#[derive(Debug, thiserror::Error)]
pub enum WeightsError {
    #[error("cannot read weights file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: expected `name = value`")]
    Syntax(usize),
    #[error("line {line}: unknown weight {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: weight must be a finite non-negative number")]
    BadValue { line: usize },
    #[error("at least one weight must be positive")]
    AllZero,
    #[error("weight {0} must be finite and non-negative")]
    Negative(&'static str),
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<(), WeightsError> {
        if let Some(i) = self.values().iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(WeightsError::Negative(FEATURE_NAMES[i]));
        }
        if self.values().iter().all(|&w| w == 0.0) {
            return Err(WeightsError::AllZero);
        }
        Ok(())
    }

    /// Parse `name = value` lines; `#` starts a comment. Unlisted weights
    /// keep their defaults.
    pub fn parse(text: &str) -> Result<ScoreWeights, WeightsError> {
        let mut w = ScoreWeights::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(WeightsError::Syntax(line))?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| WeightsError::BadValue { line })?;
            if !value.is_finite() || value < 0.0 {
                return Err(WeightsError::BadValue { line });
            }
            *w.slot(key).ok_or_else(|| WeightsError::UnknownKey {
                line,
                key: key.to_owned(),
            })? = value;
        }
        w.validate()?;
        Ok(w)
    }

    pub fn load(path: &Path) -> Result<ScoreWeights, WeightsError> {
        ScoreWeights::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for ScoreWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, w) in FEATURE_NAMES.iter().zip(self.values()) {
            writeln!(f, "{name} = {w}")?;
        }
        Ok(())
    }
}

impl FeatureBreakdown {
    /// Signed weighted term per feature, in declaration order.
    pub fn contributions(&self, w: &ScoreWeights) -> Vec<(&'static str, f64)> {
        FEATURE_NAMES
            .iter()
            .zip(SIGNS)
            .zip(self.values().into_iter().zip(w.values()))
            .map(|((&name, &sign), (f, w))| (name, sign * w * f))
            .collect()
    }

    pub fn total(&self, w: &ScoreWeights) -> f64 {
        self.contributions(w).iter().map(|(_, c)| c).sum()
    }

    fn line_total(&self, w: &ScoreWeights) -> f64 {
        self.contributions(w)
            .iter()
            .filter(|(n, _)| LINE_LEVEL.contains(n))
            .map(|(_, c)| c)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainLine {
    pub moves: Vec<Move>,
    pub san: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: f64,
    pub breakdown: FeatureBreakdown,
    pub main_line: MainLine,
}

/// Score a tree: tree-level features plus the line-level features of the
/// line [`select_main_line`] picks.
pub fn score(tree: &SolutionTree, w: &ScoreWeights) -> Score {
    let (main_line, mut breakdown) = best_line(tree, w);
    breakdown.variation_penalty = variation_penalty(tree);
    breakdown.dual_penalty = dual_count(&tree.root) as f64;
    Score {
        total: breakdown.total(w),
        breakdown,
        main_line,
    }
}

/// The root-to-leaf line with the highest line-level score. Ties go to the
/// longer line, then to the lexicographically smallest SAN sequence.
pub fn select_main_line(tree: &SolutionTree, w: &ScoreWeights) -> MainLine {
    best_line(tree, w).0
}

/// Line-level features of one root-to-leaf line; tree-level fields are 0.
/// Key quietness is read from the first move's annotation flags, as stored
/// in a [`SolutionTree`].
pub fn line_features(root: &Position, line: &[Move]) -> FeatureBreakdown {
    let mut pos = *root;
    let mut sacrifices = 0;
    let mut before_white = 0;
    for (ply, &m) in line.iter().enumerate() {
        if ply % 2 == 0 {
            before_white = balance(&pos);
        }
        pos = pos.play(m);
        if ply % 2 == 1 && balance(&pos) < before_white {
            sacrifices += 1;
        }
    }
    let quiet = line.first().is_some_and(|m| m.is_quiet());
    FeatureBreakdown {
        quiet_key: quiet as u8 as f64,
        sacrifice_count: sacrifices as f64,
        geometry_line: collinear_groups(&pos) as f64,
        geometry_triangle: minor_triangle(&pos) as u8 as f64,
        economy: economy(&pos),
        mainline_length: line.len() as f64,
        ..FeatureBreakdown::default()
    }
}

fn balance(p: &Position) -> i32 {
    p.material(Color::White) - p.material(Color::Black)
}

fn relative_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn best_line(tree: &SolutionTree, w: &ScoreWeights) -> (MainLine, FeatureBreakdown) {
    let root: Position = tree.root_fen.parse().expect("tree root FEN is valid");
    let mut best: Option<(f64, MainLine, FeatureBreakdown)> = None;
    tree.for_each_line(|line| {
        let moves: Vec<Move> = line.iter().map(|(m, _)| *m).collect();
        let features = line_features(&root, &moves);
        let s = features.line_total(w);
        let candidate = MainLine {
            moves,
            san: line.iter().map(|(_, s)| s.clone()).collect(),
        };
        let better = match &best {
            None => true,
            Some((bs, bl, _)) => {
                if !relative_tie(s, *bs) {
                    s > *bs
                } else if candidate.moves.len() != bl.moves.len() {
                    candidate.moves.len() > bl.moves.len()
                } else {
                    candidate.san < bl.san
                }
            }
        };
        if better {
            best = Some((s, candidate, features));
        }
    });
    let (_, line, features) = best.expect("a solution tree has at least one line");
    (line, features)
}

/// log2(1 + number of distinct reply sets among the root defenses).
fn variation_penalty(tree: &SolutionTree) -> f64 {
    let distinct: BTreeSet<Vec<&str>> = tree
        .root
        .options
        .iter()
        .flat_map(|o| o.defense.defenses.iter())
        .map(|d| d.reply.sans())
        .collect();
    (1.0 + distinct.len() as f64).log2()
}

/// White nodes with more than one optimal move.
fn dual_count(node: &AttackNode) -> usize {
    let here = (node.options.len() > 1) as usize;
    here + node
        .options
        .iter()
        .flat_map(|o| o.defense.defenses.iter())
        .map(|d| dual_count(&d.reply))
        .sum::<usize>()
}

/// Files, ranks and diagonals holding three or more pieces.
fn collinear_groups(p: &Position) -> usize {
    let mut files = [0u8; 8];
    let mut ranks = [0u8; 8];
    let mut diag = [0u8; 15];
    let mut anti = [0u8; 15];
    for (sq, _) in p.pieces() {
        let (f, r) = (sq.file() as usize, sq.rank() as usize);
        files[f] += 1;
        ranks[r] += 1;
        diag[7 + f - r] += 1;
        anti[f + r] += 1;
    }
    files
        .iter()
        .chain(&ranks)
        .chain(&diag)
        .chain(&anti)
        .filter(|&&n| n >= 3)
        .count()
}

/// Three White minor pieces forming an isosceles triangle, all within two
/// squares of the Black king.
fn minor_triangle(p: &Position) -> bool {
    let king = p.king_square(Color::Black);
    let minors: Vec<Square> = p
        .pieces()
        .filter(|(sq, pc)| {
            pc.color == Color::White && pc.kind.is_minor() && sq.chebyshev(king) <= 2
        })
        .map(|(sq, _)| sq)
        .collect();
    let d2 = |a: Square, b: Square| {
        let df = a.file() as i32 - b.file() as i32;
        let dr = a.rank() as i32 - b.rank() as i32;
        df * df + dr * dr
    };
    for (i, &a) in minors.iter().enumerate() {
        for (j, &b) in minors.iter().enumerate().skip(i + 1) {
            for &c in &minors[j + 1..] {
                let cross = (b.file() as i32 - a.file() as i32) * (c.rank() as i32 - a.rank() as i32)
                    - (b.rank() as i32 - a.rank() as i32) * (c.file() as i32 - a.file() as i32);
                let (ab, bc, ca) = (d2(a, b), d2(b, c), d2(c, a));
                if cross != 0 && (ab == bc || bc == ca || ca == ab) {
                    return true;
                }
            }
        }
    }
    false
}

/// Share of White pieces that check the Black king or cover one of its
/// flight squares. Attacks are computed with the king lifted off the board.
fn economy(p: &Position) -> f64 {
    let king = p.king_square(Color::Black);
    let occ = p.occupied() & !king.bit();
    let mut flights = 0u64;
    for df in -1..=1i8 {
        for dr in -1..=1i8 {
            if let Some(s) = king.offset(df, dr) {
                if s != king && p.piece_at(s).is_none_or(|pc| pc.color == Color::White) {
                    flights |= s.bit();
                }
            }
        }
    }
    let mut total = 0;
    let mut active = 0;
    for (sq, pc) in p.pieces().filter(|(_, pc)| pc.color == Color::White) {
        total += 1;
        let att = p.piece_attacks(sq, pc, occ);
        if att & (king.bit() | flights) != 0 {
            active += 1;
        }
    }
    if total == 0 {
        return 0.0;
    }
    active as f64 / total as f64
}
