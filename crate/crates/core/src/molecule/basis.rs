use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::wigner::wigner_3j_int;

/// Uncoupled basis ket |N M_N M_S>. The spin projection is stored doubled
/// (`ms2 = +-1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: u32,
    pub mn: i32,
    pub ms2: i32,
}

impl BasisState {
    pub fn new(n: u32, mn: i32, ms2: i32) -> Result<Self> {
        if mn.unsigned_abs() > n {
            return Err(Error::InvalidArgument(format!("|M_N| = {} > N = {n}", mn.abs())));
        }
        if ms2 != 1 && ms2 != -1 {
            return Err(Error::InvalidArgument(format!("2 M_S = {ms2} must be +-1")));
        }
        Ok(BasisState { n, mn, ms2 })
    }

    /// Twice the conserved projection M_N + M_S.
    pub fn m2_total(&self) -> i32 {
        2 * self.mn + self.ms2
    }

    pub fn ms(&self) -> f64 {
        self.ms2 as f64 / 2.0
    }
}

/// Truncated basis with N = 0..=n_max.
#[derive(Clone, Debug)]
pub struct Basis {
    n_max: u32,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    blocks: Vec<(i32, Vec<usize>)>,
}

impl Basis {
    pub fn new(n_max: u32) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument(format!("N_max = {n_max} must be >= 1")));
        }
        let mut states = Vec::with_capacity(2 * (n_max as usize + 1).pow(2));
        for n in 0..=n_max {
            for mn in -(n as i32)..=(n as i32) {
                for ms2 in [-1, 1] {
                    states.push(BasisState { n, mn, ms2 });
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut by_m: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
        for (i, s) in states.iter().enumerate() {
            by_m.entry(s.m2_total()).or_default().push(i);
        }
        Ok(Basis {
            n_max,
            states,
            index,
            blocks: by_m.into_iter().collect(),
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index sets of fixed 2(M_N + M_S), ascending in M.
    pub fn blocks(&self) -> &[(i32, Vec<usize>)] {
        &self.blocks
    }
}

/// Geometric factor of <bra| d_q |ket> in units of the permanent dipole.
pub fn dipole_element<T: Real>(bra: &BasisState, ket: &BasisState, q: i32) -> T {
    if bra.ms2 != ket.ms2 || !(-1..=1).contains(&q) {
        return T::zero();
    }
    let (n, np) = (bra.n as i32, ket.n as i32);
    if (n - np).abs() != 1 || bra.mn != q + ket.mn {
        return T::zero();
    }
    let sign = if bra.mn.rem_euclid(2) == 0 { T::one() } else { -T::one() };
    let norm = lit::<T>(((2 * n + 1) * (2 * np + 1)) as f64).sqrt();
    sign * norm
        * wigner_3j_int::<T>(n, 1, np, 0, 0, 0)
        * wigner_3j_int::<T>(n, 1, np, -bra.mn, q, ket.mn)
}
