//! Annealing dynamics of the many-body XXZ model in the fixed-excitation
//! sector.
//!
//! The field is ramped linearly, E(s) = E_start + s (E_end − E_start), and
//! each step applies the exact propagator of the Hamiltonian sampled at the
//! step midpoint.

mod propagator;

pub use propagator::{
    apply_propagator, build_sector_hamiltonian, choose_method, fidelity, state_norm, Method, PropagatorOptions,
    SectorHamiltonian,
};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    brute_force_ground, classify_states, ising_from_tables, sector_bits, Classification, CouplingTables,
    GroundSet, LatticeConfig, SpinConfig, TableBuilder,
};
use crate::molecule::MoleculeModel;
use crate::scalar::{lit, Real};
use crate::sector::SectorBasis;

/// Sector ceiling used unless a run opts in to larger lattices.
pub const DEFAULT_SECTOR_LIMIT: usize = 12_870;
/// Sector ceiling with the 3×3 grid enabled.
pub const OPT_IN_SECTOR_LIMIT: usize = 48_620;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    /// kV/cm
    pub e_start: T,
    /// kV/cm
    pub e_end: T,
    /// total annealing time, ms
    pub t_ms: T,
    pub n_steps: usize,
    /// the run stops at s = stop_s
    pub stop_s: T,
}

impl<T: Real> Schedule<T> {
    pub fn new(e_start: T, e_end: T, t_ms: T, n_steps: usize) -> Result<Self> {
        let s = Schedule {
            e_start,
            e_end,
            t_ms,
            n_steps,
            stop_s: T::one(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_stop(mut self, stop_s: T) -> Result<Self> {
        self.stop_s = stop_s;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
        }
        if !(self.t_ms > T::zero()) {
            return Err(Error::InvalidArgument(format!("T = {} ms must be > 0", self.t_ms)));
        }
        if !(self.stop_s > T::zero() && self.stop_s <= T::one()) {
            return Err(Error::InvalidArgument(format!("stop_s = {} outside (0, 1]", self.stop_s)));
        }
        if !(self.e_start >= T::zero() && self.e_end >= T::zero()) {
            return Err(Error::InvalidArgument("fields must be >= 0".into()));
        }
        Ok(())
    }

    pub fn field(&self, s: T) -> T {
        self.e_start + s * (self.e_end - self.e_start)
    }

    /// s at boundary `k` (0..=n_steps).
    pub fn s_at(&self, k: usize) -> T {
        self.stop_s * lit(k as f64) / lit(self.n_steps as f64)
    }

    pub fn s_mid(&self, k: usize) -> T {
        self.stop_s * (lit::<T>(k as f64) + lit(0.5)) / lit(self.n_steps as f64)
    }

    /// Step length in ms.
    pub fn dt_ms(&self) -> T {
        self.stop_s * self.t_ms / lit(self.n_steps as f64)
    }
}

/// Amplitudes over a sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T> {
    pub amps: Vec<Complex<T>>,
}

impl<T: Real> QuantumState<T> {
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        QuantumState { amps }
    }

    pub fn norm(&self) -> T {
        state_norm(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Product of (|0> ± |1>)/√2 over qubits. The + sign is used when the
/// intra-qubit J_z is negative, − when positive.
pub fn initial_state<T: Real>(
    config: &LatticeConfig<T>,
    classification: &Classification,
    tables: &CouplingTables<T>,
) -> Result<QuantumState<T>> {
    let nq = config.n_qubits();
    let mut signs = Vec::with_capacity(nq);
    for (a, q) in config.qubits.iter().enumerate() {
        let jz = tables.j_z[(q.first, q.second)];
        if jz == T::zero() {
            return Err(Error::AmbiguousSign(a));
        }
        signs.push(jz < T::zero());
    }
    let amp: T = lit::<T>(2.0).powi(-(nq as i32)).sqrt();
    let mut psi = QuantumState {
        amps: vec![Complex::new(T::zero(), T::zero()); classification.basis.len()],
    };
    for bits in 0..1u64 << nq {
        let c = SpinConfig::new(bits, nq);
        let negative = (0..nq).filter(|&a| c.get(a) == 1 && !signs[a]).count() % 2 == 1;
        let idx = classification
            .basis
            .rank(sector_bits(config, &c))
            .ok_or_else(|| Error::DimensionMismatch {
                expected: classification.basis.len(),
                got: 0,
            })?;
        psi.amps[idx] = Complex::new(if negative { -amp } else { amp }, T::zero());
    }
    Ok(psi)
}

/// Probability split of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    pub p_solution: T,
    pub p_invalid: T,
    pub p_valid_other: T,
    /// probability of each qubit outcome, indexed by `SpinConfig::bits`
    pub valid: Vec<T>,
}

pub fn measure<T: Real>(state: &QuantumState<T>, classification: &Classification, ground: &GroundSet<T>) -> Measurement<T> {
    let probs = state.probabilities();
    let mut valid = vec![T::zero(); classification.n_valid()];
    let mut p_invalid = T::zero();
    for (i, p) in probs.iter().enumerate() {
        match classification.outcome[i] {
            Some(c) => valid[c.bits as usize] += *p,
            None => p_invalid += *p,
        }
    }
    let mut p_solution = T::zero();
    let mut p_valid_other = T::zero();
    for (bits, p) in valid.iter().enumerate() {
        let c = SpinConfig::new(bits as u64, ground.configs.first().map_or(0, |g| g.n));
        if ground.contains(&c) {
            p_solution += *p;
        } else {
            p_valid_other += *p;
        }
    }
    Measurement {
        p_solution,
        p_invalid,
        p_valid_other,
        valid,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealOptions {
    pub propagator: PropagatorOptions,
    pub sector_limit: usize,
    /// abort when |‖ψ‖ − 1| exceeds this
    pub norm_tol: f64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            propagator: PropagatorOptions::default(),
            sector_limit: DEFAULT_SECTOR_LIMIT,
            norm_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnnealResult<T: Real> {
    pub s: Vec<T>,
    pub t_ms: Vec<T>,
    pub p_solution: Vec<T>,
    pub p_invalid: Vec<T>,
    pub p_valid_other: Vec<T>,
    /// final probability of each qubit outcome, indexed by bits
    pub final_valid: Vec<T>,
    /// final probability of each invalid sector string
    pub final_invalid: Vec<(u64, T)>,
    pub ground: GroundSet<T>,
    pub final_state: QuantumState<T>,
    pub method: Method,
    pub n_qubits: usize,
}

impl<T: Real> AnnealResult<T> {
    fn push(&mut self, schedule: &Schedule<T>, k: usize, m: &Measurement<T>) {
        let s = schedule.s_at(k);
        self.s.push(s);
        self.t_ms.push(s * schedule.t_ms);
        self.p_solution.push(m.p_solution);
        self.p_invalid.push(m.p_invalid);
        self.p_valid_other.push(m.p_valid_other);
    }

    pub fn final_p_solution(&self) -> T {
        *self.p_solution.last().expect("at least one sample")
    }

    pub fn final_p_invalid(&self) -> T {
        *self.p_invalid.last().expect("at least one sample")
    }

    pub fn final_p_valid(&self) -> T {
        T::one() - self.final_p_invalid()
    }

    /// Outcome with the largest final probability.
    pub fn most_likely(&self) -> SpinConfig {
        let best = (0..self.final_valid.len()).fold(0, |b, i| {
            if self.final_valid[i] > self.final_valid[b] {
                i
            } else {
                b
            }
        });
        SpinConfig::new(best as u64, self.n_qubits)
    }
}

/// Runs `schedule` from `psi`, calling `observe(k, ψ)` after every step k
/// (1-based). With `reverse` the steps are undone in reverse order.
pub fn evolve<T, F, O>(
    basis: &SectorBasis,
    tables_at: F,
    schedule: &Schedule<T>,
    options: &AnnealOptions,
    psi: &mut QuantumState<T>,
    reverse: bool,
    mut observe: O,
) -> Result<Method>
where
    T: Real,
    F: Fn(T) -> Result<CouplingTables<T>>,
    O: FnMut(usize, &QuantumState<T>),
{
    schedule.validate()?;
    if psi.amps.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: psi.amps.len(),
        });
    }
    let method = choose_method(basis.len(), &options.propagator);
    let dt_s = schedule.dt_ms() * lit(1e-3);
    for step in 0..schedule.n_steps {
        let k = if reverse { schedule.n_steps - 1 - step } else { step };
        let tables = tables_at(schedule.field(schedule.s_mid(k)))?;
        let h = build_sector_hamiltonian(&tables, basis)?;
        let dt = if reverse { -dt_s } else { dt_s };
        apply_propagator(&h, &mut psi.amps, dt, method, &options.propagator)?;
        let drift = propagator::drift(&psi.amps);
        if drift > options.norm_tol {
            return Err(Error::NormDrift { step: k + 1, drift });
        }
        observe(step + 1, psi);
    }
    Ok(method)
}

/// Anneals `config` along `schedule` with tables produced by `tables_at`.
/// The solution set is the ground set of the Ising model at E_end.
pub fn propagate_with<T, F>(
    config: &LatticeConfig<T>,
    tables_at: F,
    schedule: &Schedule<T>,
    options: &AnnealOptions,
) -> Result<AnnealResult<T>>
where
    T: Real,
    F: Fn(T) -> Result<CouplingTables<T>>,
{
    schedule.validate()?;
    let classification = classify_states(config, options.sector_limit)?;
    let ground = brute_force_ground(&ising_from_tables(config, &tables_at(schedule.e_end)?))?;
    let mut psi = initial_state(config, &classification, &tables_at(schedule.e_start)?)?;

    let samples = schedule.n_steps + 1;
    let mut result = AnnealResult {
        s: Vec::with_capacity(samples),
        t_ms: Vec::with_capacity(samples),
        p_solution: Vec::with_capacity(samples),
        p_invalid: Vec::with_capacity(samples),
        p_valid_other: Vec::with_capacity(samples),
        final_valid: Vec::new(),
        final_invalid: Vec::new(),
        ground: ground.clone(),
        final_state: psi.clone(),
        method: Method::Dense,
        n_qubits: config.n_qubits(),
    };
    let initial = measure(&psi, &classification, &ground);
    result.push(schedule, 0, &initial);
    let mut last = initial;
    result.method = evolve(&classification.basis, tables_at, schedule, options, &mut psi, false, |k, st| {
        last = measure(st, &classification, &ground);
        result.push(schedule, k, &last);
    })?;
    result.final_valid = last.valid;
    let probs = psi.probabilities();
    result.final_invalid = classification
        .outcome
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_none())
        .map(|(i, _)| (classification.basis.unrank(i), probs[i]))
        .collect();
    result.final_state = psi;
    Ok(result)
}

/// Anneals `config` with coupling tables from the molecular model.
pub fn propagate<T: Real>(
    model: &MoleculeModel<T>,
    config: &LatticeConfig<T>,
    schedule: &Schedule<T>,
    options: &AnnealOptions,
) -> Result<AnnealResult<T>> {
    let builder = TableBuilder::new(model, config)?;
    propagate_with(config, |e| builder.tables(e), schedule, options)
}
