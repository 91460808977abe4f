//! Transposition table of proven mate bounds.
//!
//! An entry for a position records the smallest attacker-move count known to
//! force mate and the largest count known not to. Both facts are exact, so a
//! hit can only save work; it never changes an answer.

const UNKNOWN_MATE: u8 = u8::MAX;
const UNKNOWN_NO_MATE: i8 = -1;

#[derive(Clone, Copy)]
struct Entry {
    key: u64,
    mate_within: u8,
    no_mate_within: i8,
    generation: u8,
}

const EMPTY: Entry = Entry {
    key: 0,
    mate_within: UNKNOWN_MATE,
    no_mate_within: UNKNOWN_NO_MATE,
    generation: 0,
};

/// What the table knows about "mate within `d`" for one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Probe {
    Mate,
    NoMate,
    Unknown,
}

pub(crate) struct TranspositionTable {
    entries: Vec<Entry>,
    mask: u64,
    generation: u8,
}

impl TranspositionTable {
    /// `capacity` is rounded down to a power of two; zero disables the table.
    pub fn new(capacity: usize) -> TranspositionTable {
        let size = if capacity == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - capacity.leading_zeros())
        };
        TranspositionTable {
            entries: vec![EMPTY; size],
            mask: size.saturating_sub(1) as u64,
            generation: 1,
        }
    }

    #[cfg(test)]
    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    /// Invalidate every entry in O(1) by bumping the generation tag.
    pub fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.entries.fill(EMPTY);
            self.generation = 1;
        }
    }

    #[inline]
    fn slot(&self, key: u64) -> Option<usize> {
        (!self.entries.is_empty()).then_some((key & self.mask) as usize)
    }

    #[inline]
    pub fn probe(&self, key: u64, depth: u8) -> Probe {
        let Some(i) = self.slot(key) else {
            return Probe::Unknown;
        };
        let e = &self.entries[i];
        if e.key != key || e.generation != self.generation {
            return Probe::Unknown;
        }
        if e.mate_within <= depth {
            Probe::Mate
        } else if e.no_mate_within >= depth as i8 {
            Probe::NoMate
        } else {
            Probe::Unknown
        }
    }

    #[inline]
    pub fn store(&mut self, key: u64, depth: u8, mate: bool) {
        let Some(i) = self.slot(key) else {
            return;
        };
        let generation = self.generation;
        let e = &mut self.entries[i];
        if e.key != key || e.generation != generation {
            *e = Entry {
                key,
                generation,
                ..EMPTY
            };
        }
        if mate {
            e.mate_within = e.mate_within.min(depth);
        } else {
            e.no_mate_within = e.no_mate_within.max(depth as i8);
        }
    }
}
