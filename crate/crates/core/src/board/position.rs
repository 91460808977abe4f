use std::fmt;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use super::moves::{Move, MoveFlags, MoveList};
use super::tables::{bishop_attacks, bits, rook_attacks, KING, KNIGHT, PAWN_ATTACKS, ZOBRIST};
use super::types::{Color, Piece, PieceKind, Square};

/// Castling availability as a 4-bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastlingRights(u8);

impl CastlingRights {
    pub const WHITE_KINGSIDE: u8 = 1;
    pub const WHITE_QUEENSIDE: u8 = 2;
    pub const BLACK_KINGSIDE: u8 = 4;
    pub const BLACK_QUEENSIDE: u8 = 8;

    pub const NONE: CastlingRights = CastlingRights(0);
    pub const ALL: CastlingRights = CastlingRights(15);

    pub const fn from_bits(bits: u8) -> CastlingRights {
        CastlingRights(bits & 15)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn has(self, flag: u8) -> bool {
        self.0 & flag != 0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Mask of rights that survive a move touching the given square.
const fn castling_mask(sq: usize) -> u8 {
    match sq {
        0 => 15 & !CastlingRights::WHITE_QUEENSIDE,
        4 => 15 & !(CastlingRights::WHITE_KINGSIDE | CastlingRights::WHITE_QUEENSIDE),
        7 => 15 & !CastlingRights::WHITE_KINGSIDE,
        56 => 15 & !CastlingRights::BLACK_QUEENSIDE,
        60 => 15 & !(CastlingRights::BLACK_KINGSIDE | CastlingRights::BLACK_QUEENSIDE),
        63 => 15 & !CastlingRights::BLACK_KINGSIDE,
        _ => 15,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ongoing,
    Check,
    Checkmate,
    Stalemate,
}

/// Ways a piece placement can fail to be a legal chess position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IllegalPosition {
    #[error("{0:?} has no king")]
    MissingKing(Color),
    #[error("{0:?} has more than one king")]
    TooManyKings(Color),
    #[error("kings stand on adjacent squares")]
    AdjacentKings,
    #[error("the side not to move is in check")]
    OpponentInCheck,
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("two pieces placed on {0}")]
    Overlap(Square),
    #[error("{0} pieces on the board (maximum 32)")]
    TooManyPieces(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("illegal move {0}")]
    Illegal(Move),
}

pub type Successors = ArrayVec<(Move, Position), 256>;

/// Full chess state. Immutable: every move produces a new value.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Position {
    by_color: [u64; 2],
    by_kind: [u64; 6],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
    hash: u64,
}

impl Position {
    pub(crate) fn empty(side_to_move: Color) -> Position {
        let mut p = Position {
            by_color: [0; 2],
            by_kind: [0; 6],
            side_to_move,
            castling: CastlingRights::NONE,
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
            hash: 0,
        };
        p.hash = p.compute_hash();
        p
    }

    /// The standard starting position.
    pub fn initial() -> Position {
        "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"
            .parse()
            .expect("initial FEN is valid")
    }

    /// Build a position from a piece list with no castling rights, no
    /// en-passant square and fresh move counters.
    pub fn from_pieces(
        pieces: &[(Square, Piece)],
        side_to_move: Color,
    ) -> Result<Position, IllegalPosition> {
        let mut p = Position::empty(side_to_move);
        for &(sq, piece) in pieces {
            if p.piece_at(sq).is_some() {
                return Err(IllegalPosition::Overlap(sq));
            }
            p.put(sq, piece);
        }
        p.hash = p.compute_hash();
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn put(&mut self, sq: Square, piece: Piece) {
        self.by_color[piece.color.index()] |= sq.bit();
        self.by_kind[piece.kind.index()] |= sq.bit();
    }

    pub(crate) fn set_state(
        &mut self,
        castling: CastlingRights,
        en_passant: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) {
        self.castling = castling;
        self.en_passant = en_passant;
        self.halfmove_clock = halfmove_clock;
        self.fullmove_number = fullmove_number;
        self.hash = self.compute_hash();
    }

    fn compute_hash(&self) -> u64 {
        let mut h = 0;
        for (sq, piece) in self.pieces() {
            h ^= ZOBRIST.pieces[piece.color.index()][piece.kind.index()][sq.index()];
        }
        if self.side_to_move == Color::Black {
            h ^= ZOBRIST.black_to_move;
        }
        h ^= ZOBRIST.castling[self.castling.bits() as usize];
        if let Some(ep) = self.en_passant {
            h ^= ZOBRIST.en_passant_file[ep.file() as usize];
        }
        h
    }

    // --- accessors -------------------------------------------------------

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    #[inline]
    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    #[inline]
    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    /// Zobrist hash over placement, side to move, castling and en passant.
    #[inline]
    pub fn hash(&self) -> u64 {
        self.hash
    }

    #[inline]
    pub fn occupied(&self) -> u64 {
        self.by_color[0] | self.by_color[1]
    }

    #[inline]
    pub fn color_bb(&self, color: Color) -> u64 {
        self.by_color[color.index()]
    }

    #[inline]
    pub fn pieces_bb(&self, color: Color, kind: PieceKind) -> u64 {
        self.by_color[color.index()] & self.by_kind[kind.index()]
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let bit = sq.bit();
        let color = if self.by_color[0] & bit != 0 {
            Color::White
        } else if self.by_color[1] & bit != 0 {
            Color::Black
        } else {
            return None;
        };
        let kind = PieceKind::ALL
            .into_iter()
            .find(|k| self.by_kind[k.index()] & bit != 0)?;
        Some(Piece { color, kind })
    }

    /// All pieces in ascending square order.
    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        bits(self.occupied()).map(move |i| {
            let sq = Square::from_index(i as u8);
            (sq, self.piece_at(sq).expect("occupied square has a piece"))
        })
    }

    pub fn piece_count(&self) -> usize {
        self.occupied().count_ones() as usize
    }

    pub fn king_square(&self, color: Color) -> Square {
        let bb = self.pieces_bb(color, PieceKind::King);
        debug_assert!(bb != 0, "no {:?} king", color);
        Square::from_index(bb.trailing_zeros() as u8)
    }

    /// Sum of conventional piece values for one side.
    pub fn material(&self, color: Color) -> i32 {
        PieceKind::ALL
            .into_iter()
            .map(|k| k.value() * self.pieces_bb(color, k).count_ones() as i32)
            .sum()
    }

    // --- attacks ---------------------------------------------------------

    /// Pieces of `by` attacking `sq` given the occupancy `occ`.
    pub fn attackers_to(&self, sq: Square, by: Color, occ: u64) -> u64 {
        let s = sq.index();
        let them = self.by_color[by.index()];
        let diag = self.by_kind[PieceKind::Bishop.index()] | self.by_kind[PieceKind::Queen.index()];
        let ortho = self.by_kind[PieceKind::Rook.index()] | self.by_kind[PieceKind::Queen.index()];
        let mut att = KNIGHT[s] & self.by_kind[PieceKind::Knight.index()];
        att |= KING[s] & self.by_kind[PieceKind::King.index()];
        att |= PAWN_ATTACKS[by.opposite().index()][s] & self.by_kind[PieceKind::Pawn.index()];
        att |= bishop_attacks(s, occ) & diag;
        att |= rook_attacks(s, occ) & ortho;
        att & them
    }

    #[inline]
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        self.attackers_to(sq, by, self.occupied()) != 0
    }

    /// Squares attacked by the piece on `sq` under occupancy `occ`.
    pub fn piece_attacks(&self, sq: Square, piece: Piece, occ: u64) -> u64 {
        let s = sq.index();
        match piece.kind {
            PieceKind::King => KING[s],
            PieceKind::Knight => KNIGHT[s],
            PieceKind::Pawn => PAWN_ATTACKS[piece.color.index()][s],
            PieceKind::Bishop => bishop_attacks(s, occ),
            PieceKind::Rook => rook_attacks(s, occ),
            PieceKind::Queen => bishop_attacks(s, occ) | rook_attacks(s, occ),
        }
    }

    /// Union of squares attacked by all pieces of `color`.
    pub fn attack_map(&self, color: Color) -> u64 {
        let occ = self.occupied();
        let mut map = 0;
        for i in bits(self.by_color[color.index()]) {
            let sq = Square::from_index(i as u8);
            let piece = self.piece_at(sq).expect("occupied");
            map |= self.piece_attacks(sq, piece, occ);
        }
        map
    }

    #[inline]
    pub fn in_check(&self) -> bool {
        let us = self.side_to_move;
        self.is_attacked(self.king_square(us), us.opposite())
    }

    // --- validation ------------------------------------------------------

    pub fn validate(&self) -> Result<(), IllegalPosition> {
        let count = self.piece_count();
        if count > 32 {
            return Err(IllegalPosition::TooManyPieces(count));
        }
        for color in Color::ALL {
            match self.pieces_bb(color, PieceKind::King).count_ones() {
                0 => return Err(IllegalPosition::MissingKing(color)),
                1 => {}
                _ => return Err(IllegalPosition::TooManyKings(color)),
            }
        }
        let wk = self.king_square(Color::White);
        let bk = self.king_square(Color::Black);
        if wk.chebyshev(bk) <= 1 {
            return Err(IllegalPosition::AdjacentKings);
        }
        let back_ranks = 0xFF00_0000_0000_00FFu64;
        if let Some(i) = bits(self.by_kind[PieceKind::Pawn.index()] & back_ranks).next() {
            return Err(IllegalPosition::PawnOnBackRank(Square::from_index(i as u8)));
        }
        let them = self.side_to_move.opposite();
        if self.is_attacked(self.king_square(them), self.side_to_move) {
            return Err(IllegalPosition::OpponentInCheck);
        }
        Ok(())
    }

    // --- move generation -------------------------------------------------

    fn pseudo_moves(&self, out: &mut MoveList) {
        let us = self.side_to_move;
        let them = us.opposite();
        let own = self.by_color[us.index()];
        let enemy = self.by_color[them.index()];
        let occ = own | enemy;

        for from_i in bits(own) {
            let from = Square::from_index(from_i as u8);
            let piece = self.piece_at(from).expect("own square occupied");
            if piece.kind == PieceKind::Pawn {
                self.pawn_moves(from, out);
                continue;
            }
            let targets = self.piece_attacks(from, piece, occ) & !own;
            for to_i in bits(targets) {
                let to = Square::from_index(to_i as u8);
                let mut m = Move::new(from, to);
                m.flags.capture = enemy & to.bit() != 0;
                out.push(m);
            }
            if piece.kind == PieceKind::King {
                self.castling_moves(from, out);
            }
        }
    }

    fn pawn_moves(&self, from: Square, out: &mut MoveList) {
        let us = self.side_to_move;
        let enemy = self.by_color[us.opposite().index()];
        let occ = self.occupied();
        let (dir, start_rank): (i8, u8) = match us {
            Color::White => (1, 1),
            Color::Black => (-1, 6),
        };
        let promo_rank = us.promotion_rank();
        let push = |to: Square, capture: bool, out: &mut MoveList| {
            if to.rank() == promo_rank {
                for kind in PieceKind::PROMOTIONS {
                    let mut m = Move::with_promotion(from, to, kind);
                    m.flags.capture = capture;
                    out.push(m);
                }
            } else {
                let mut m = Move::new(from, to);
                m.flags.capture = capture;
                out.push(m);
            }
        };
        for to_i in bits(PAWN_ATTACKS[us.index()][from.index()]) {
            let to = Square::from_index(to_i as u8);
            if enemy & to.bit() != 0 || Some(to) == self.en_passant {
                push(to, true, out);
            }
        }
        if let Some(one) = from.offset(0, dir) {
            if occ & one.bit() == 0 {
                push(one, false, out);
                if from.rank() == start_rank {
                    let two = one.offset(0, dir).expect("double push stays on board");
                    if occ & two.bit() == 0 {
                        push(two, false, out);
                    }
                }
            }
        }
    }

    fn castling_moves(&self, king: Square, out: &mut MoveList) {
        let us = self.side_to_move;
        let them = us.opposite();
        let (home, ks, qs) = match us {
            Color::White => (
                Square::new(4, 0),
                CastlingRights::WHITE_KINGSIDE,
                CastlingRights::WHITE_QUEENSIDE,
            ),
            Color::Black => (
                Square::new(4, 7),
                CastlingRights::BLACK_KINGSIDE,
                CastlingRights::BLACK_QUEENSIDE,
            ),
        };
        if king != home || !(self.castling.has(ks) || self.castling.has(qs)) {
            return;
        }
        let occ = self.occupied();
        let rank = home.rank();
        if self.is_attacked(home, them) {
            return;
        }
        let rook = self.pieces_bb(us, PieceKind::Rook);
        if self.castling.has(ks)
            && rook & Square::new(7, rank).bit() != 0
            && occ & (Square::new(5, rank).bit() | Square::new(6, rank).bit()) == 0
            && !self.is_attacked(Square::new(5, rank), them)
            && !self.is_attacked(Square::new(6, rank), them)
        {
            out.push(Move::new(home, Square::new(6, rank)));
        }
        if self.castling.has(qs)
            && rook & Square::new(0, rank).bit() != 0
            && occ
                & (Square::new(1, rank).bit() | Square::new(2, rank).bit() | Square::new(3, rank).bit())
                == 0
            && !self.is_attacked(Square::new(3, rank), them)
            && !self.is_attacked(Square::new(2, rank), them)
        {
            out.push(Move::new(home, Square::new(2, rank)));
        }
    }

    /// Legal moves in ascending `(from, to, promotion)` order, with the
    /// capture flag filled.
    pub fn legal_moves(&self) -> MoveList {
        let mut pseudo = MoveList::new();
        self.pseudo_moves(&mut pseudo);
        pseudo.sort_unstable();
        let us = self.side_to_move;
        pseudo.retain(|m| {
            let next = self.make(*m);
            !next.is_attacked(next.king_square(us), us.opposite())
        });
        pseudo
    }

    /// Legal moves paired with the positions they lead to, in the same
    /// order as [`legal_moves`](Self::legal_moves).
    pub fn successors(&self) -> Successors {
        let mut pseudo = MoveList::new();
        self.pseudo_moves(&mut pseudo);
        pseudo.sort_unstable();
        let us = self.side_to_move;
        let mut out = Successors::new();
        for m in pseudo {
            let next = self.make(m);
            if !next.is_attacked(next.king_square(us), us.opposite()) {
                debug_assert!(next.validate().is_ok(), "{} from {}", m, self);
                out.push((m, next));
            }
        }
        out
    }

    pub fn has_legal_move(&self) -> bool {
        let mut pseudo = MoveList::new();
        self.pseudo_moves(&mut pseudo);
        let us = self.side_to_move;
        pseudo.into_iter().any(|m| {
            let next = self.make(m);
            !next.is_attacked(next.king_square(us), us.opposite())
        })
    }

    /// Apply a move without legality checking. The move must come from
    /// [`legal_moves`](Self::legal_moves) of this position.
    pub fn play(&self, m: Move) -> Position {
        let next = self.make(m);
        debug_assert!(
            next.validate().is_ok(),
            "{} from {} produced an invalid position: {:?}",
            m,
            self,
            next.validate()
        );
        next
    }

    /// Apply a move after checking it is legal here.
    pub fn apply_move(&self, m: Move) -> Result<Position, MoveError> {
        if !self.legal_moves().contains(&m) {
            return Err(MoveError::Illegal(m));
        }
        Ok(self.play(m))
    }

    /// Core move application; may leave the mover in check.
    fn make(&self, m: Move) -> Position {
        let mut p = *self;
        let us = self.side_to_move;
        let them = us.opposite();
        let from_bit = m.from.bit();
        let to_bit = m.to.bit();
        let moving = self.piece_at(m.from).expect("move from an empty square");
        let z = &ZOBRIST;

        let mut captured = None;
        let mut capture_sq = m.to;
        if moving.kind == PieceKind::Pawn && Some(m.to) == self.en_passant && self.piece_at(m.to).is_none() {
            capture_sq = Square::new(m.to.file(), m.from.rank());
            captured = Some(Piece::new(them, PieceKind::Pawn));
        } else if let Some(victim) = self.piece_at(m.to) {
            captured = Some(victim);
        }

        if let Some(victim) = captured {
            let b = capture_sq.bit();
            p.by_color[them.index()] &= !b;
            p.by_kind[victim.kind.index()] &= !b;
            p.hash ^= z.pieces[them.index()][victim.kind.index()][capture_sq.index()];
        }

        p.by_color[us.index()] ^= from_bit | to_bit;
        p.by_kind[moving.kind.index()] ^= from_bit;
        let placed = m.promotion.unwrap_or(moving.kind);
        p.by_kind[placed.index()] |= to_bit;
        p.hash ^= z.pieces[us.index()][moving.kind.index()][m.from.index()];
        p.hash ^= z.pieces[us.index()][placed.index()][m.to.index()];

        if moving.kind == PieceKind::King && m.from.file() == 4 && (m.to.file() == 6 || m.to.file() == 2) {
            let rank = m.from.rank();
            let (rf, rt) = if m.to.file() == 6 { (7, 5) } else { (0, 3) };
            let (rf, rt) = (Square::new(rf, rank), Square::new(rt, rank));
            p.by_color[us.index()] ^= rf.bit() | rt.bit();
            p.by_kind[PieceKind::Rook.index()] ^= rf.bit() | rt.bit();
            p.hash ^= z.pieces[us.index()][PieceKind::Rook.index()][rf.index()];
            p.hash ^= z.pieces[us.index()][PieceKind::Rook.index()][rt.index()];
        }

        p.hash ^= z.castling[self.castling.bits() as usize];
        p.castling = CastlingRights::from_bits(
            self.castling.bits() & castling_mask(m.from.index()) & castling_mask(m.to.index()),
        );
        p.hash ^= z.castling[p.castling.bits() as usize];

        if let Some(ep) = self.en_passant {
            p.hash ^= z.en_passant_file[ep.file() as usize];
        }
        p.en_passant = None;
        if moving.kind == PieceKind::Pawn && m.from.rank().abs_diff(m.to.rank()) == 2 {
            let ep = Square::new(m.from.file(), (m.from.rank() + m.to.rank()) / 2);
            p.en_passant = Some(ep);
            p.hash ^= z.en_passant_file[ep.file() as usize];
        }

        p.halfmove_clock = if moving.kind == PieceKind::Pawn || captured.is_some() {
            0
        } else {
            self.halfmove_clock + 1
        };
        if us == Color::Black {
            p.fullmove_number += 1;
        }
        p.side_to_move = them;
        p.hash ^= z.black_to_move;
        p
    }

    /// Does the (legal) move give check?
    pub fn gives_check(&self, m: Move) -> bool {
        self.make(m).in_check()
    }

    /// Fill the capture, check and checkmate flags of a legal move.
    pub fn annotate(&self, m: Move) -> Move {
        let next = self.make(m);
        let capture = self.piece_at(m.to).is_some()
            || (Some(m.to) == self.en_passant
                && self.piece_at(m.from).map(|p| p.kind) == Some(PieceKind::Pawn));
        let check = next.in_check();
        let checkmate = check && !next.has_legal_move();
        Move {
            flags: MoveFlags {
                capture,
                check,
                checkmate,
            },
            ..m
        }
    }

    pub fn classify(&self) -> Status {
        match (self.in_check(), self.has_legal_move()) {
            (true, false) => Status::Checkmate,
            (false, false) => Status::Stalemate,
            (true, true) => Status::Check,
            (false, true) => Status::Ongoing,
        }
    }

    pub fn is_checkmate(&self) -> bool {
        self.classify() == Status::Checkmate
    }

    /// Leaf count of the legal move tree at exactly `depth` plies.
    pub fn perft(&self, depth: u32) -> u64 {
        match depth {
            0 => 1,
            1 => self.legal_moves().len() as u64,
            _ => self
                .legal_moves()
                .into_iter()
                .map(|m| self.play(m).perft(depth - 1))
                .sum(),
        }
    }

    /// Per-root-move perft counts, in legal move order.
    pub fn perft_divide(&self, depth: u32) -> Vec<(Move, u64)> {
        assert!(depth >= 1);
        self.legal_moves()
            .into_iter()
            .map(|m| (m, self.play(m).perft(depth - 1)))
            .collect()
    }

    /// Same position with the other side to move and the en-passant square
    /// cleared, or `None` when that would not be legal.
    pub fn with_side_to_move(&self, side: Color) -> Option<Position> {
        let mut p = *self;
        p.side_to_move = side;
        p.en_passant = None;
        p.hash = p.compute_hash();
        p.validate().ok().map(|_| p)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::fen::emit_fen(self))
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({})", self)
    }
}

impl std::hash::Hash for Position {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}
