//! Fixed-excitation sector: all n-bit strings with exactly k bits set.
//!
//! Bit i set means molecule i is in |↑>. States are stored in increasing
//! integer order, so the rank of a string is its colexicographic rank.

use crate::error::{Error, Result};

/// Largest molecule count a sector can hold.
pub const MAX_MOLECULES: usize = 63;

/// Binomial coefficient with saturation at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    k: usize,
    states: Vec<u64>,
    // choose[p][j] = C(p, j)
    choose: Vec<Vec<u64>>,
}

impl SectorBasis {
    /// Sector of `n` molecules with `k` excitations; `limit` caps the size.
    pub fn new(n: usize, k: usize, limit: usize) -> Result<Self> {
        if n == 0 || n > MAX_MOLECULES || k > n {
            return Err(Error::InvalidArgument(format!("no sector with n = {n}, k = {k}")));
        }
        let size = binomial(n, k);
        if size > limit as u64 {
            return Err(Error::SizeLimit {
                what: "sector dimension".into(),
                size: size as usize,
                limit,
            });
        }
        let choose: Vec<Vec<u64>> = (0..=n)
            .map(|p| (0..=k + 1).map(|j| binomial(p, j)).collect())
            .collect();
        let mut states = Vec::with_capacity(size as usize);
        if k == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates weight-k words in increasing order
            let mut x: u64 = (1u64 << k) - 1;
            let end = 1u64 << n;
            while x < end {
                states.push(x);
                let c = x & x.wrapping_neg();
                let r = x + c;
                x = (((r ^ x) >> 2) / c) | r;
            }
        }
        Ok(SectorBasis { n, k, states, choose })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn unrank(&self, rank: usize) -> u64 {
        self.states[rank]
    }

    /// Rank of a weight-k string, `None` for strings outside the sector.
    pub fn rank(&self, bits: u64) -> Option<usize> {
        if bits.count_ones() as usize != self.k || (self.n < 64 && bits >> self.n != 0) {
            return None;
        }
        let mut rank = 0u64;
        let mut rest = bits;
        let mut j = 1;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            rank += self.choose[p][j];
            rest &= rest - 1;
            j += 1;
        }
        Some(rank as usize)
    }
}

/// Renders a sector string as ↑/↓ characters, molecule 0 first.
pub fn spin_string(bits: u64, n: usize) -> String {
    (0..n)
        .map(|i| if bits >> i & 1 == 1 { 'u' } else { 'd' })
        .collect()
}
