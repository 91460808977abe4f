//! Precomputed attack tables and Zobrist keys, all built at compile time.

const fn leaper_table(deltas: &[(i8, i8)]) -> [u64; 64] {
    let mut table = [0u64; 64];
    let mut sq = 0;
    while sq < 64 {
        let f = (sq % 8) as i8;
        let r = (sq / 8) as i8;
        let mut i = 0;
        while i < deltas.len() {
            let nf = f + deltas[i].0;
            let nr = r + deltas[i].1;
            if nf >= 0 && nf < 8 && nr >= 0 && nr < 8 {
                table[sq] |= 1u64 << (nr * 8 + nf);
            }
            i += 1;
        }
        sq += 1;
    }
    table
}

pub const KNIGHT: [u64; 64] = leaper_table(&[
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
]);

pub const KING: [u64; 64] = leaper_table(&[
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
]);

/// Squares attacked by a pawn of the given color standing on the square.
pub const PAWN_ATTACKS: [[u64; 64]; 2] = [
    leaper_table(&[(-1, 1), (1, 1)]),
    leaper_table(&[(-1, -1), (1, -1)]),
];

// Ray directions. The first four increase the square index, the last four
// decrease it; this decides whether the nearest blocker is the lowest or the
// highest set bit.
const DIRS: [(i8, i8); 8] = [
    (0, 1),
    (1, 0),
    (1, 1),
    (-1, 1),
    (0, -1),
    (-1, 0),
    (-1, -1),
    (1, -1),
];

const fn ray_table() -> [[u64; 64]; 8] {
    let mut table = [[0u64; 64]; 8];
    let mut d = 0;
    while d < 8 {
        let mut sq = 0;
        while sq < 64 {
            let mut f = (sq % 8) as i8 + DIRS[d].0;
            let mut r = (sq / 8) as i8 + DIRS[d].1;
            while f >= 0 && f < 8 && r >= 0 && r < 8 {
                table[d][sq] |= 1u64 << (r * 8 + f);
                f += DIRS[d].0;
                r += DIRS[d].1;
            }
            sq += 1;
        }
        d += 1;
    }
    table
}

const RAYS: [[u64; 64]; 8] = ray_table();

#[inline]
fn ray_attacks(dir: usize, sq: usize, occ: u64) -> u64 {
    let ray = RAYS[dir][sq];
    let blockers = ray & occ;
    if blockers == 0 {
        return ray;
    }
    let first = if dir < 4 {
        blockers.trailing_zeros()
    } else {
        63 - blockers.leading_zeros()
    };
    ray ^ RAYS[dir][first as usize]
}

#[inline]
pub fn rook_attacks(sq: usize, occ: u64) -> u64 {
    ray_attacks(0, sq, occ) | ray_attacks(1, sq, occ) | ray_attacks(4, sq, occ) | ray_attacks(5, sq, occ)
}

#[inline]
pub fn bishop_attacks(sq: usize, occ: u64) -> u64 {
    ray_attacks(2, sq, occ) | ray_attacks(3, sq, occ) | ray_attacks(6, sq, occ) | ray_attacks(7, sq, occ)
}

/// Iterate set bits in ascending square order.
#[inline]
pub fn bits(mut bb: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if bb == 0 {
            None
        } else {
            let i = bb.trailing_zeros() as usize;
            bb &= bb - 1;
            Some(i)
        }
    })
}

const fn splitmix64(state: u64) -> (u64, u64) {
    let next = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (next, z ^ (z >> 31))
}

pub struct Zobrist {
    pub pieces: [[[u64; 64]; 6]; 2],
    pub black_to_move: u64,
    pub castling: [u64; 16],
    pub en_passant_file: [u64; 8],
}

const fn zobrist() -> Zobrist {
    let mut z = Zobrist {
        pieces: [[[0; 64]; 6]; 2],
        black_to_move: 0,
        castling: [0; 16],
        en_passant_file: [0; 8],
    };
    let mut state = 0x5EED_C0DE_F00D_CAFE;
    let mut c = 0;
    while c < 2 {
        let mut k = 0;
        while k < 6 {
            let mut s = 0;
            while s < 64 {
                let (st, v) = splitmix64(state);
                state = st;
                z.pieces[c][k][s] = v;
                s += 1;
            }
            k += 1;
        }
        c += 1;
    }
    let (st, v) = splitmix64(state);
    state = st;
    z.black_to_move = v;
    // Castling keys are indexed by the 4-bit rights mask; entry 0 stays zero.
    let mut i = 1;
    while i < 16 {
        let (st, v) = splitmix64(state);
        state = st;
        z.castling[i] = v;
        i += 1;
    }
    let mut f = 0;
    while f < 8 {
        let (st, v) = splitmix64(state);
        state = st;
        z.en_passant_file[f] = v;
        f += 1;
    }
    z
}

pub static ZOBRIST: Zobrist = zobrist();

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knight_and_king_counts() {
        assert_eq!(KNIGHT[0].count_ones(), 2);
        assert_eq!(KNIGHT[27].count_ones(), 8);
        assert_eq!(KING[0].count_ones(), 3);
        assert_eq!(KING[27].count_ones(), 8);
    }

    #[test]
    fn sliders_stop_at_blockers() {
        // rook on a1, blocker on a4: a2 a3 a4 plus the whole first rank
        let occ = 1u64 << 24;
        assert_eq!(rook_attacks(0, occ).count_ones(), 3 + 7);
        // bishop on d4 on an empty board
        assert_eq!(bishop_attacks(27, 0).count_ones(), 13);
    }
}
