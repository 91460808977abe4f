//! Deliberately naive reference implementation used as a test oracle.
//!
//! Shares no code with the library: its own FEN reader, a 64-byte mailbox,
//! geometric attack scans and full-width boolean minimax without any
//! transposition table or move-ordering tricks.

#![allow(dead_code)]

pub type NaiveMove = (usize, usize, Option<u8>);

#[derive(Clone)]
pub struct NaiveBoard {
    sq: [u8; 64],
    white_to_move: bool,
    // K Q k q
    castle: [bool; 4],
    ep: Option<usize>,
}

const EMPTY: u8 = b'.';

fn is_white(p: u8) -> bool {
    p.is_ascii_uppercase()
}

fn file(i: usize) -> i32 {
    (i % 8) as i32
}

fn rank(i: usize) -> i32 {
    (i / 8) as i32
}

fn at(f: i32, r: i32) -> Option<usize> {
    ((0..8).contains(&f) && (0..8).contains(&r)).then(|| (r * 8 + f) as usize)
}

const KNIGHT_D: [(i32, i32); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_D: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_D: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_D: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

impl NaiveBoard {
    pub fn from_fen(fen: &str) -> NaiveBoard {
        let parts: Vec<&str> = fen.split(' ').collect();
        let mut sq = [EMPTY; 64];
        let mut r = 7i32;
        let mut f = 0i32;
        for c in parts[0].bytes() {
            if c == b'/' {
                r -= 1;
                f = 0;
            } else if c.is_ascii_digit() {
                f += (c - b'0') as i32;
            } else {
                sq[(r * 8 + f) as usize] = c;
                f += 1;
            }
        }
        let castle = [
            parts[2].contains('K'),
            parts[2].contains('Q'),
            parts[2].contains('k'),
            parts[2].contains('q'),
        ];
        let ep = if parts[3] == "-" {
            None
        } else {
            let b = parts[3].as_bytes();
            Some(((b[1] - b'1') as usize) * 8 + (b[0] - b'a') as usize)
        };
        NaiveBoard {
            sq,
            white_to_move: parts[1] == "w",
            castle,
            ep,
        }
    }

    fn own(&self, p: u8) -> bool {
        p != EMPTY && is_white(p) == self.white_to_move
    }

    fn enemy(&self, p: u8) -> bool {
        p != EMPTY && is_white(p) != self.white_to_move
    }

    fn king(&self, white: bool) -> usize {
        let k = if white { b'K' } else { b'k' };
        (0..64).find(|&i| self.sq[i] == k).expect("king present")
    }

    /// Is `target` attacked by any piece of the given color? Scans outward
    /// from the target square.
    pub fn attacked(&self, target: usize, by_white: bool) -> bool {
        let (tf, tr) = (file(target), rank(target));
        let mine = |p: u8, kind: u8| p != EMPTY && is_white(p) == by_white && p.to_ascii_uppercase() == kind;
        for (df, dr) in KNIGHT_D {
            if let Some(i) = at(tf + df, tr + dr) {
                if mine(self.sq[i], b'N') {
                    return true;
                }
            }
        }
        for (df, dr) in KING_D {
            if let Some(i) = at(tf + df, tr + dr) {
                if mine(self.sq[i], b'K') {
                    return true;
                }
            }
        }
        // a white pawn attacks upward, so it sits one rank below the target
        let pr = if by_white { tr - 1 } else { tr + 1 };
        for df in [-1, 1] {
            if let Some(i) = at(tf + df, pr) {
                if mine(self.sq[i], b'P') {
                    return true;
                }
            }
        }
        for (dirs, kind) in [(ROOK_D, b'R'), (BISHOP_D, b'B')] {
            for (df, dr) in dirs {
                let (mut f, mut r) = (tf + df, tr + dr);
                while let Some(i) = at(f, r) {
                    let p = self.sq[i];
                    if p != EMPTY {
                        if mine(p, kind) || mine(p, b'Q') {
                            return true;
                        }
                        break;
                    }
                    f += df;
                    r += dr;
                }
            }
        }
        false
    }

    pub fn in_check(&self) -> bool {
        self.attacked(self.king(self.white_to_move), !self.white_to_move)
    }

    fn pseudo(&self) -> Vec<NaiveMove> {
        let mut out = Vec::new();
        for from in 0..64 {
            let p = self.sq[from];
            if !self.own(p) {
                continue;
            }
            let (f, r) = (file(from), rank(from));
            let kind = p.to_ascii_uppercase();
            let step = |dirs: &[(i32, i32)], slide: bool, out: &mut Vec<NaiveMove>| {
                for &(df, dr) in dirs {
                    let (mut nf, mut nr) = (f + df, r + dr);
                    while let Some(to) = at(nf, nr) {
                        let q = self.sq[to];
                        if self.own(q) {
                            break;
                        }
                        out.push((from, to, None));
                        if q != EMPTY || !slide {
                            break;
                        }
                        nf += df;
                        nr += dr;
                    }
                }
            };
            match kind {
                b'N' => step(&KNIGHT_D, false, &mut out),
                b'K' => step(&KING_D, false, &mut out),
                b'R' => step(&ROOK_D, true, &mut out),
                b'B' => step(&BISHOP_D, true, &mut out),
                b'Q' => {
                    step(&ROOK_D, true, &mut out);
                    step(&BISHOP_D, true, &mut out);
                }
                b'P' => {
                    let dir = if self.white_to_move { 1 } else { -1 };
                    let last = if self.white_to_move { 7 } else { 0 };
                    let start = if self.white_to_move { 1 } else { 6 };
                    let add = |to: usize, out: &mut Vec<NaiveMove>| {
                        if rank(to) == last {
                            for pr in [b'Q', b'R', b'B', b'N'] {
                                out.push((from, to, Some(pr)));
                            }
                        } else {
                            out.push((from, to, None));
                        }
                    };
                    if let Some(one) = at(f, r + dir) {
                        if self.sq[one] == EMPTY {
                            add(one, &mut out);
                            if r == start {
                                let two = at(f, r + 2 * dir).unwrap();
                                if self.sq[two] == EMPTY {
                                    add(two, &mut out);
                                }
                            }
                        }
                    }
                    for df in [-1, 1] {
                        if let Some(to) = at(f + df, r + dir) {
                            if self.enemy(self.sq[to]) || Some(to) == self.ep {
                                add(to, &mut out);
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        // castling
        let (home, ks, qs, rook) = if self.white_to_move {
            (4usize, 0usize, 1usize, b'R')
        } else {
            (60, 2, 3, b'r')
        };
        let king = if self.white_to_move { b'K' } else { b'k' };
        if self.sq[home] == king && !self.attacked(home, !self.white_to_move) {
            if self.castle[ks]
                && self.sq[home + 3] == rook
                && self.sq[home + 1] == EMPTY
                && self.sq[home + 2] == EMPTY
                && !self.attacked(home + 1, !self.white_to_move)
                && !self.attacked(home + 2, !self.white_to_move)
            {
                out.push((home, home + 2, None));
            }
            if self.castle[qs]
                && self.sq[home - 4] == rook
                && self.sq[home - 1] == EMPTY
                && self.sq[home - 2] == EMPTY
                && self.sq[home - 3] == EMPTY
                && !self.attacked(home - 1, !self.white_to_move)
                && !self.attacked(home - 2, !self.white_to_move)
            {
                out.push((home, home - 2, None));
            }
        }
        out
    }

    pub fn make(&self, (from, to, promo): NaiveMove) -> NaiveBoard {
        let mut b = self.clone();
        let p = self.sq[from];
        let kind = p.to_ascii_uppercase();
        if kind == b'P' && Some(to) == self.ep && self.sq[to] == EMPTY {
            let victim = if self.white_to_move { to - 8 } else { to + 8 };
            b.sq[victim] = EMPTY;
        }
        if kind == b'K' && (to as i32 - from as i32).abs() == 2 {
            let (rf, rt) = if to > from { (from + 3, from + 1) } else { (from - 4, from - 1) };
            b.sq[rt] = b.sq[rf];
            b.sq[rf] = EMPTY;
        }
        b.sq[to] = match promo {
            Some(pr) if self.white_to_move => pr,
            Some(pr) => pr.to_ascii_lowercase(),
            None => p,
        };
        b.sq[from] = EMPTY;
        for (corner, right) in [(7usize, 0usize), (0, 1), (63, 2), (56, 3)] {
            if from == corner || to == corner {
                b.castle[right] = false;
            }
        }
        if from == 4 {
            b.castle[0] = false;
            b.castle[1] = false;
        }
        if from == 60 {
            b.castle[2] = false;
            b.castle[3] = false;
        }
        b.ep = (kind == b'P' && (to as i32 - from as i32).abs() == 16).then(|| (from + to) / 2);
        b.white_to_move = !self.white_to_move;
        b
    }

    pub fn legal(&self) -> Vec<NaiveMove> {
        let mover = self.white_to_move;
        self.pseudo()
            .into_iter()
            .filter(|&m| {
                let n = self.make(m);
                !n.attacked(n.king(mover), !mover)
            })
            .collect()
    }

    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        self.legal().into_iter().map(|m| self.make(m).perft(depth - 1)).sum()
    }

    pub fn is_checkmate(&self) -> bool {
        self.in_check() && self.legal().is_empty()
    }

    /// Side to move forces mate within `n` of its own moves.
    pub fn mate_within(&self, n: u32) -> bool {
        if n == 0 {
            return false;
        }
        self.legal().into_iter().any(|m| self.make(m).loses_within(n - 1))
    }

    /// Side to move gets mated within `n` further attacker moves whatever it plays.
    pub fn loses_within(&self, n: u32) -> bool {
        let moves = self.legal();
        if moves.is_empty() {
            return self.in_check();
        }
        n > 0 && moves.into_iter().all(|m| self.make(m).mate_within(n))
    }

    pub fn dtm(&self, max: u32) -> Option<u32> {
        (1..=max).find(|&n| self.mate_within(n))
    }

    /// Every first move after which mate follows within `n - 1` more moves.
    pub fn keys(&self, n: u32) -> Vec<NaiveMove> {
        let mut keys: Vec<NaiveMove> = self
            .legal()
            .into_iter()
            .filter(|&m| self.make(m).loses_within(n - 1))
            .collect();
        keys.sort();
        keys
    }
}

pub fn uci(m: NaiveMove) -> String {
    let name = |i: usize| format!("{}{}", (b'a' + (i % 8) as u8) as char, (b'1' + (i / 8) as u8) as char);
    let mut s = format!("{}{}", name(m.0), name(m.1));
    if let Some(p) = m.2 {
        s.push(p.to_ascii_lowercase() as char);
    }
    s
}

impl NaiveBoard {
    pub fn is_capture(&self, (from, to, _): NaiveMove) -> bool {
        self.sq[to] != EMPTY || (self.sq[from].to_ascii_uppercase() == b'P' && Some(to) == self.ep)
    }

    pub fn gives_check(&self, m: NaiveMove) -> bool {
        self.make(m).in_check()
    }
}
