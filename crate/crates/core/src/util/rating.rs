//! Aggregation buffers for "total edge weight towards each label" queries.

/// Capacity of the fixed-size open-addressing map.
pub const SPARSE_CAPACITY: usize = 1 << 15;

/// Nodes with at least this many incident edges use the dense map, which keeps
/// the sparse map's load factor at or below one third.
pub const DENSE_DEGREE_THRESHOLD: usize = SPARSE_CAPACITY / 3;

pub trait RatingMap {
    fn add(&mut self, key: u32, value: u64);
    fn get(&self, key: u32) -> u64;
    /// Visits entries in insertion order.
    fn for_each(&self, f: impl FnMut(u32, u64));
    fn clear(&mut self);
}

/// Array indexed by key plus a list of touched keys for O(touched) clearing.
#[derive(Debug, Default, Clone)]
pub struct DenseRatingMap {
    values: Vec<u64>,
    touched: Vec<u32>,
}

impl DenseRatingMap {
    pub fn new(key_space: usize) -> Self {
        Self {
            values: vec![0; key_space],
            touched: Vec::new(),
        }
    }

    /// Grows the key space if needed. Must be called on a cleared map.
    pub fn ensure_key_space(&mut self, key_space: usize) {
        debug_assert!(self.touched.is_empty());
        if self.values.len() < key_space {
            self.values.resize(key_space, 0);
        }
    }
}

impl RatingMap for DenseRatingMap {
    #[inline]
    fn add(&mut self, key: u32, value: u64) {
        let slot = &mut self.values[key as usize];
        if *slot == 0 {
            self.touched.push(key);
        }
        *slot += value;
    }

    #[inline]
    fn get(&self, key: u32) -> u64 {
        self.values[key as usize]
    }

    fn for_each(&self, mut f: impl FnMut(u32, u64)) {
        for &key in &self.touched {
            f(key, self.values[key as usize]);
        }
    }

    fn clear(&mut self) {
        for &key in &self.touched {
            self.values[key as usize] = 0;
        }
        self.touched.clear();
    }
}

const EMPTY: u32 = u32::MAX;

/// Fixed-capacity linear-probing map. Callers keep the number of distinct keys
/// well below the capacity.
#[derive(Debug, Clone)]
pub struct SparseRatingMap {
    keys: Vec<u32>,
    values: Vec<u64>,
    used_slots: Vec<u32>,
    shift: u32,
}

impl Default for SparseRatingMap {
    fn default() -> Self {
        Self::new()
    }
}

impl SparseRatingMap {
    pub fn new() -> Self {
        Self::with_capacity(SPARSE_CAPACITY)
    }

    /// A map with `capacity` slots, rounded up to a power of two (at least 2).
    pub fn with_capacity(capacity: usize) -> Self {
        let capacity = capacity.max(2).next_power_of_two();
        Self {
            keys: vec![EMPTY; capacity],
            values: vec![0; capacity],
            used_slots: Vec::new(),
            shift: 32 - capacity.trailing_zeros(),
        }
    }

    #[inline]
    fn slot_of(&self, key: u32) -> usize {
        let mask = self.keys.len() - 1;
        let mut slot = (key.wrapping_mul(0x9E37_79B1) >> self.shift) as usize & mask;
        loop {
            let k = self.keys[slot];
            if k == key || k == EMPTY {
                return slot;
            }
            slot = (slot + 1) & mask;
        }
    }
}

impl RatingMap for SparseRatingMap {
    #[inline]
    fn add(&mut self, key: u32, value: u64) {
        debug_assert!(self.used_slots.len() < self.keys.len() - 1);
        let slot = self.slot_of(key);
        if self.keys[slot] == EMPTY {
            self.keys[slot] = key;
            self.used_slots.push(slot as u32);
        }
        self.values[slot] += value;
    }

    #[inline]
    fn get(&self, key: u32) -> u64 {
        let slot = self.slot_of(key);
        if self.keys[slot] == key {
            self.values[slot]
        } else {
            0
        }
    }

    fn for_each(&self, mut f: impl FnMut(u32, u64)) {
        for &slot in &self.used_slots {
            f(self.keys[slot as usize], self.values[slot as usize]);
        }
    }

    fn clear(&mut self) {
        for &slot in &self.used_slots {
            self.keys[slot as usize] = EMPTY;
            self.values[slot as usize] = 0;
        }
        self.used_slots.clear();
    }
}
