//! Fenwick tree over `u32` counts, used for range counting of revealed
//! half-edges.

#[derive(Debug, Clone)]
pub struct Fenwick {
    data: Vec<u32>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Fenwick { data: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn add(&mut self, mut idx: usize, value: u32) {
        while idx < self.data.len() {
            self.data[idx] += value;
            idx |= idx + 1;
        }
    }

    /// Sum over `[0, idx)`.
    pub fn prefix(&self, idx: usize) -> u32 {
        let mut r = idx.min(self.data.len());
        let mut acc = 0;
        while r > 0 {
            acc += self.data[r - 1];
            r &= r - 1;
        }
        acc
    }

    /// Sum over `[lo, hi)`.
    pub fn range(&self, lo: usize, hi: usize) -> u32 {
        if hi <= lo {
            return 0;
        }
        self.prefix(hi) - self.prefix(lo)
    }
}
