use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Stipulation;
use crate::board::Move;

/// AND/OR tree of a forced mate. White nodes hold every move that keeps the
/// optimal distance; Black nodes hold every legal defense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionTree {
    pub root_fen: String,
    pub stipulation: Stipulation,
    pub root: AttackNode,
}

/// White to move, mate in exactly `mate_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackNode {
    pub mate_in: u8,
    /// Index into `options` of the designated principal move.
    pub principal: usize,
    pub options: Vec<AttackOption>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOption {
    #[serde(rename = "move")]
    pub mv: Move,
    pub san: String,
    pub defense: DefenseNode,
}

/// Black to move. No defenses means Black is checkmated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseNode {
    pub defenses: Vec<Defense>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defense {
    #[serde(rename = "move")]
    pub mv: Move,
    pub san: String,
    pub reply: AttackNode,
}

impl DefenseNode {
    pub fn is_mate(&self) -> bool {
        self.defenses.is_empty()
    }

    pub fn defense(&self, san: &str) -> Option<&Defense> {
        self.defenses.iter().find(|d| d.san == san)
    }
}

impl AttackNode {
    pub fn principal_option(&self) -> &AttackOption {
        &self.options[self.principal]
    }

    pub fn option(&self, san: &str) -> Option<&AttackOption> {
        self.options.iter().find(|o| o.san == san)
    }

    pub fn sans(&self) -> Vec<&str> {
        self.options.iter().map(|o| o.san.as_str()).collect()
    }

    fn max_plies(&self) -> usize {
        self.options
            .iter()
            .map(|o| {
                1 + o
                    .defense
                    .defenses
                    .iter()
                    .map(|d| 1 + d.reply.max_plies())
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    fn count_nodes(&self) -> usize {
        1 + self
            .options
            .iter()
            .flat_map(|o| o.defense.defenses.iter())
            .map(|d| d.reply.count_nodes())
            .sum::<usize>()
    }
}

/// One root-to-leaf path as alternating White/Black moves with their SAN.
pub type Line = Vec<(Move, String)>;

impl SolutionTree {
    /// Length in plies of the longest root-to-leaf path.
    pub fn max_plies(&self) -> usize {
        self.root.max_plies()
    }

    /// Number of White nodes.
    pub fn attack_nodes(&self) -> usize {
        self.root.count_nodes()
    }

    /// Follow the principal White move and the first listed Black defense
    /// that keeps the longest resistance.
    pub fn principal_line(&self) -> Line {
        let mut line = Vec::new();
        let mut node = &self.root;
        loop {
            let opt = node.principal_option();
            line.push((opt.mv, opt.san.clone()));
            let Some(best) = opt
                .defense
                .defenses
                .iter()
                .max_by_key(|d| (d.reply.mate_in, std::cmp::Reverse(d.mv)))
            else {
                return line;
            };
            line.push((best.mv, best.san.clone()));
            node = &best.reply;
        }
    }

    /// Visit every root-to-leaf path.
    pub fn for_each_line(&self, mut visit: impl FnMut(&[(Move, String)])) {
        fn walk(node: &AttackNode, line: &mut Line, visit: &mut dyn FnMut(&[(Move, String)])) {
            for opt in &node.options {
                line.push((opt.mv, opt.san.clone()));
                if opt.defense.is_mate() {
                    visit(line);
                }
                for d in &opt.defense.defenses {
                    line.push((d.mv, d.san.clone()));
                    walk(&d.reply, line, visit);
                    line.pop();
                }
                line.pop();
            }
        }
        walk(&self.root, &mut Vec::new(), &mut visit);
    }

    /// Indented text layout: one Black defense per line with the White
    /// replies inline, alternatives separated by `" / "`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.root_fen);
        let _ = writeln!(out, "{}", self.stipulation);
        let _ = writeln!(out, "1. {}", self.root.sans().join(" / "));
        render_continuations(&mut out, &self.root, 1, 4);
        out
    }
}

const DEFENSE_COLUMN: usize = 18;

/// Expand below a White node whose move number is `number`.
fn render_continuations(out: &mut String, node: &AttackNode, number: usize, indent: usize) {
    let expanding: Vec<&AttackOption> = node.options.iter().filter(|o| !o.defense.is_mate()).collect();
    if node.options.len() == 1 {
        render_defenses(out, &node.options[0].defense, number, indent);
        return;
    }
    for opt in expanding {
        let _ = writeln!(out, "{:indent$}{}. {}:", "", number, opt.san);
        render_defenses(out, &opt.defense, number, indent + 4);
    }
}

fn render_defenses(out: &mut String, node: &DefenseNode, number: usize, indent: usize) {
    for d in &node.defenses {
        let left = format!("{:indent$}{}... {}", "", number, d.san);
        let _ = writeln!(
            out,
            "{:<width$} {}. {}",
            left,
            number + 1,
            d.reply.sans().join(" / "),
            width = indent + DEFENSE_COLUMN
        );
        render_continuations(out, &d.reply, number + 1, indent + 4);
    }
}
