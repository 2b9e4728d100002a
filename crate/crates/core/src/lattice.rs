//! Molecule geometries, many-body coupling tables and the qubit-level
//! Ising model obtained from the pair encoding |0> = |↑↓>, |1> = |↓↑>.

use std::fmt;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{angular_factor_from_vector, couplings_between, DressedPair, Encoding};
use crate::error::{Error, Result};
use crate::molecule::{FieldPoint, MoleculeModel, StateLabels};
use crate::scalar::{lit, to_f64, Real};
use crate::sector::SectorBasis;

pub const DEFAULT_B_MT: f64 = 600.0;
/// Intra-qubit spacing, nm.
pub const DEFAULT_R1_NM: f64 = 500.0;
/// Inter-qubit spacing, nm.
pub const DEFAULT_R2_NM: f64 = 1000.0;
/// Largest qubit count accepted by [`brute_force_ground`].
pub const MAX_BRUTE_FORCE_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sz<T: Real>(self) -> T {
        match self {
            Spin::Up => lit(0.5),
            Spin::Down => lit(-0.5),
        }
    }
}

/// A qubit made of two molecules. `first` is ↑ in |0>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitPair {
    pub first: usize,
    pub second: usize,
}

impl QubitPair {
    pub fn new(first: usize, second: usize) -> Self {
        QubitPair { first, second }
    }

    pub fn flipped(self) -> Self {
        QubitPair {
            first: self.second,
            second: self.first,
        }
    }
}

/// A molecule locked in one state, used to bias its neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spectator {
    pub molecule: usize,
    pub state: Spin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig<T: Real> {
    /// nm
    pub positions: Vec<Vector3<T>>,
    pub field_axis: Vector3<T>,
    pub qubits: Vec<QubitPair>,
    pub spectators: Vec<Spectator>,
    /// per-molecule electric offsets, V/m
    pub delta_e_v_m: Vec<T>,
    pub b_mt: T,
}

impl<T: Real> LatticeConfig<T> {
    pub fn new(
        positions: Vec<Vector3<T>>,
        field_axis: Vector3<T>,
        qubits: Vec<QubitPair>,
        spectators: Vec<Spectator>,
        b_mt: T,
    ) -> Result<Self> {
        let n = positions.len();
        let config = LatticeConfig {
            positions,
            field_axis,
            qubits,
            spectators,
            delta_e_v_m: vec![T::zero(); n],
            b_mt,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_offsets(mut self, delta_e_v_m: Vec<T>) -> Result<Self> {
        self.delta_e_v_m = delta_e_v_m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n == 0 {
            return Err(Error::Geometry("no molecules".into()));
        }
        if self.delta_e_v_m.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.delta_e_v_m.len(),
            });
        }
        if !(self.field_axis.norm() > T::zero()) {
            return Err(Error::Geometry("field axis must be nonzero".into()));
        }
        if !(self.b_mt > T::zero()) {
            return Err(Error::InvalidArgument(format!("B = {} mT must be > 0", self.b_mt)));
        }
        let mut role = vec![0u32; n];
        let mut mark = |i: usize| -> Result<()> {
            if i >= n {
                return Err(Error::Geometry(format!("molecule index {i} out of range")));
            }
            role[i] += 1;
            Ok(())
        };
        for q in &self.qubits {
            mark(q.first)?;
            mark(q.second)?;
        }
        for s in &self.spectators {
            mark(s.molecule)?;
        }
        if let Some(i) = role.iter().position(|&r| r != 1) {
            return Err(Error::Geometry(format!(
                "molecule {i} must belong to exactly one qubit or spectator"
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.positions[i] - self.positions[j]).norm() <= T::zero() {
                    return Err(Error::Geometry(format!("molecules {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn n_molecules(&self) -> usize {
        self.positions.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Swaps the roles of the two molecules of qubit `q`.
    pub fn flip_qubit(&mut self, q: usize) {
        self.qubits[q] = self.qubits[q].flipped();
    }

    fn from_pairs(pairs: Vec<(Vector3<T>, Vector3<T>)>, b_mt: T) -> Result<Self> {
        let mut positions = Vec::with_capacity(2 * pairs.len());
        let mut qubits = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            qubits.push(QubitPair::new(positions.len(), positions.len() + 1));
            positions.push(a);
            positions.push(b);
        }
        Self::new(positions, Vector3::z(), qubits, Vec::new(), b_mt)
    }

    /// Two side-by-side qubits: a rectangle with sides `r1` along the
    /// field and `r2` across it.
    pub fn two_qubit(r1: T, r2: T, b_mt: T) -> Result<Self> {
        Self::chain_1d_af(2, r1, r2, b_mt)
    }

    /// Qubits along the field axis, chain perpendicular to it.
    pub fn chain_1d_af(n: usize, r1: T, r2: T, b_mt: T) -> Result<Self> {
        let pairs = (0..n)
            .map(|q| {
                let x = r2 * lit(q as f64);
                (Vector3::new(x, T::zero(), T::zero()), Vector3::new(x, T::zero(), r1))
            })
            .collect();
        Self::from_pairs(pairs, b_mt)
    }

    /// The antiferromagnetic chain rotated by π/2: qubits across the field,
    /// chain along it.
    pub fn chain_1d_fm(n: usize, r1: T, r2: T, b_mt: T) -> Result<Self> {
        let pairs = (0..n)
            .map(|q| {
                let z = r2 * lit(q as f64);
                (Vector3::new(T::zero(), T::zero(), z), Vector3::new(r1, T::zero(), z))
            })
            .collect();
        Self::from_pairs(pairs, b_mt)
    }

    /// Antiferromagnetic chains stacked side by side, all perpendicular to
    /// the field. Qubit index is `row * cols + col`.
    pub fn grid_2d(rows: usize, cols: usize, r1: T, r2: T, b_mt: T) -> Result<Self> {
        Self::stack_3d(1, rows, cols, r1, r2, T::zero(), b_mt)
    }

    /// 2D layers stacked along the field with layer spacing `pitch`
    /// (first molecule to first molecule). Odd layers have inverted
    /// encodings. Qubit index is `(layer * rows + row) * cols + col`.
    pub fn stack_3d(layers: usize, rows: usize, cols: usize, r1: T, r2: T, pitch: T, b_mt: T) -> Result<Self> {
        let mut positions = Vec::new();
        let mut qubits = Vec::new();
        for layer in 0..layers {
            let z = pitch * lit(layer as f64);
            for r in 0..rows {
                for c in 0..cols {
                    let x = r2 * lit(c as f64);
                    let y = r2 * lit(r as f64);
                    let pair = QubitPair::new(positions.len(), positions.len() + 1);
                    qubits.push(if layer % 2 == 1 { pair.flipped() } else { pair });
                    positions.push(Vector3::new(x, y, z));
                    positions.push(Vector3::new(x, y, z + r1));
                }
            }
        }
        Self::new(positions, Vector3::z(), qubits, Vec::new(), b_mt)
    }

    /// Two qubits on the field axis, one above the other.
    pub fn head_to_head(r1: T, pitch: T, b_mt: T) -> Result<Self> {
        let p = |z: T| Vector3::new(T::zero(), T::zero(), z);
        Self::from_pairs(vec![(p(T::zero()), p(r1)), (p(pitch), p(pitch + r1))], b_mt)
    }

    /// Second qubit turned perpendicular and placed on the mirror plane of
    /// the first.
    pub fn cross(r1: T, r2: T, b_mt: T) -> Result<Self> {
        let half = r1 * lit(0.5);
        Self::from_pairs(
            vec![
                (Vector3::zeros(), Vector3::new(T::zero(), T::zero(), r1)),
                (Vector3::new(r2, -half, half), Vector3::new(r2, half, half)),
            ],
            b_mt,
        )
    }
}

/// Pairwise XXZ couplings and single-molecule biases, Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTables<T: Real> {
    pub j_perp: DMatrix<T>,
    pub j_z: DMatrix<T>,
    pub h: Vec<T>,
}

impl<T: Real> CouplingTables<T> {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Tables for `n` non-interacting, unbiased molecules.
    pub fn zeros(n: usize) -> Self {
        CouplingTables {
            j_perp: DMatrix::zeros(n, n),
            j_z: DMatrix::zeros(n, n),
            h: vec![T::zero(); n],
        }
    }
}

/// Evaluates coupling tables of one lattice at varying base fields.
pub struct TableBuilder<'a, T: Real> {
    model: &'a MoleculeModel<T>,
    config: &'a LatticeConfig<T>,
    labels: StateLabels,
    angular: DMatrix<T>,
    encoding: Encoding,
}

impl<'a, T: Real> TableBuilder<'a, T> {
    pub fn new(model: &'a MoleculeModel<T>, config: &'a LatticeConfig<T>) -> Result<Self> {
        config.validate()?;
        let labels = model.labels(config.b_mt)?;
        let n = config.n_molecules();
        let axis = config.field_axis.normalize();
        let angular = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                angular_factor_from_vector(&(config.positions[j] - config.positions[i]), &axis)
            }
        });
        Ok(TableBuilder {
            model,
            config,
            labels,
            angular,
            encoding: Encoding::default(),
        })
    }

    pub fn config(&self) -> &LatticeConfig<T> {
        self.config
    }

    /// Tables with every molecule at `e_kv_cm` plus its own offset.
    pub fn tables(&self, e_kv_cm: T) -> Result<CouplingTables<T>> {
        let cfg = self.config;
        let n = cfg.n_molecules();
        let mut offsets: Vec<T> = Vec::new();
        for &d in &cfg.delta_e_v_m {
            if !offsets.contains(&d) {
                offsets.push(d);
            }
        }
        let dressed: Vec<DressedPair<T>> = offsets
            .par_iter()
            .map(|&d| {
                let f = FieldPoint::new(e_kv_cm, cfg.b_mt).with_offset(d);
                self.model.dressed_pair(&f, &self.labels, self.encoding)
            })
            .collect::<Result<_>>()?;
        let which: Vec<usize> = cfg
            .delta_e_v_m
            .iter()
            .map(|d| offsets.iter().position(|o| o == d).unwrap_or(0))
            .collect();

        let mut t = CouplingTables::zeros(n);
        for i in 0..n {
            t.h[i] = dressed[which[i]].splitting();
        }
        for i in 0..n {
            for j in i + 1..n {
                let c = couplings_between(&dressed[which[i]], &dressed[which[j]], self.angular[(i, j)]);
                t.j_perp[(i, j)] = c.j_perp;
                t.j_perp[(j, i)] = c.j_perp;
                t.j_z[(i, j)] = c.j_z;
                t.j_z[(j, i)] = c.j_z;
                t.h[i] += c.k;
                t.h[j] += c.w;
            }
        }
        for s in &cfg.spectators {
            t.j_perp.row_mut(s.molecule).fill(T::zero());
            t.j_perp.column_mut(s.molecule).fill(T::zero());
        }
        Ok(t)
    }
}

/// Coupling tables of `config` at base field `e_kv_cm`.
pub fn build_coupling_tables<T: Real>(
    model: &MoleculeModel<T>,
    config: &LatticeConfig<T>,
    e_kv_cm: T,
) -> Result<CouplingTables<T>> {
    TableBuilder::new(model, config)?.tables(e_kv_cm)
}

/// Qubit outcome; bit `a` is the value of qubit `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig {
    pub bits: u64,
    pub n: usize,
}

impl SpinConfig {
    pub fn new(bits: u64, n: usize) -> Self {
        SpinConfig { bits, n }
    }

    pub fn get(&self, a: usize) -> u8 {
        (self.bits >> a & 1) as u8
    }

    /// Ising spin of qubit `a`: +½ for 0, −½ for 1.
    pub fn s<T: Real>(&self, a: usize) -> T {
        if self.get(a) == 0 {
            lit(0.5)
        } else {
            lit(-0.5)
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (a, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << a,
                _ => return Err(Error::InvalidArgument(format!("bad bitstring {text:?}"))),
            }
        }
        Ok(SpinConfig::new(bits, text.chars().count()))
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.n {
            write!(f, "{}", self.get(a))?;
        }
        Ok(())
    }
}

/// E(s) = Σ h_a s_a + Σ_{a<b} J_ab s_a s_b with s = ±½.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T: Real> {
    pub h: Vec<T>,
    /// symmetric, zero diagonal
    pub j: DMatrix<T>,
    pub qubits: Vec<QubitPair>,
}

impl<T: Real> IsingModel<T> {
    pub fn new(h: Vec<T>, j: DMatrix<T>) -> Result<Self> {
        let n = h.len();
        if j.nrows() != n || j.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: j.nrows() });
        }
        let qubits = (0..n).map(|a| QubitPair::new(2 * a, 2 * a + 1)).collect();
        Ok(IsingModel { h, j, qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, config: &SpinConfig) -> T {
        let n = self.n_qubits();
        let mut e = T::zero();
        for a in 0..n {
            let sa: T = config.s(a);
            e += self.h[a] * sa;
            for b in a + 1..n {
                e += self.j[(a, b)] * sa * config.s::<T>(b);
            }
        }
        e
    }

    fn scale(&self) -> T {
        let mut s = T::zero();
        for a in 0..self.n_qubits() {
            s += self.h[a].abs();
            for b in a + 1..self.n_qubits() {
                s += self.j[(a, b)].abs();
            }
        }
        s
    }
}

/// Qubit-level Ising model of `config` at field `e_kv_cm`.
pub fn effective_ising<T: Real>(
    model: &MoleculeModel<T>,
    config: &LatticeConfig<T>,
    e_kv_cm: T,
) -> Result<IsingModel<T>> {
    let tables = build_coupling_tables(model, config, e_kv_cm)?;
    Ok(ising_from_tables(config, &tables))
}

/// Qubit-level Ising model from precomputed tables.
pub fn ising_from_tables<T: Real>(config: &LatticeConfig<T>, tables: &CouplingTables<T>) -> IsingModel<T> {
    let nq = config.n_qubits();
    let jz = &tables.j_z;
    let mut h = vec![T::zero(); nq];
    let mut j = DMatrix::zeros(nq, nq);
    for (a, qa) in config.qubits.iter().enumerate() {
        h[a] = tables.h[qa.first] - tables.h[qa.second];
        for s in &config.spectators {
            h[a] += s.state.sz::<T>() * (jz[(qa.first, s.molecule)] - jz[(qa.second, s.molecule)]);
        }
        for (b, qb) in config.qubits.iter().enumerate().skip(a + 1) {
            let v = (jz[(qa.first, qb.first)] + jz[(qa.second, qb.second)])
                - (jz[(qa.first, qb.second)] + jz[(qa.second, qb.first)]);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    IsingModel {
        h,
        j,
        qubits: config.qubits.clone(),
    }
}

/// Global minimizers of an Ising model.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSet<T> {
    pub energy: T,
    pub configs: Vec<SpinConfig>,
}

impl<T> GroundSet<T> {
    pub fn contains(&self, c: &SpinConfig) -> bool {
        self.configs.contains(c)
    }
}

/// Exhaustive minimization. Configurations within 1e-9 of the model scale
/// of the minimum are all returned, in increasing bit order.
pub fn brute_force_ground<T: Real>(model: &IsingModel<T>) -> Result<GroundSet<T>> {
    let n = model.n_qubits();
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::SizeLimit {
            what: "Ising qubits".into(),
            size: n,
            limit: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    let energies: Vec<T> = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| model.energy(&SpinConfig::new(bits, n)))
        .collect();
    let min = energies.iter().copied().fold(energies[0], |m, e| if e < m { e } else { m });
    let tol = model.scale() * lit(1e-9);
    let configs = (0..1u64 << n)
        .filter(|&b| energies[b as usize] - min <= tol)
        .map(|b| SpinConfig::new(b, n))
        .collect();
    Ok(GroundSet { energy: min, configs })
}

/// Partition of the excitation sector into valid and invalid states.
#[derive(Clone, Debug)]
pub struct Classification {
    pub basis: SectorBasis,
    /// qubit outcome of each sector state, `None` when invalid
    pub outcome: Vec<Option<SpinConfig>>,
    /// sector index of each qubit outcome, by `SpinConfig::bits`
    pub valid_index: Vec<usize>,
}

impl Classification {
    pub fn n_valid(&self) -> usize {
        self.valid_index.len()
    }

    pub fn n_invalid(&self) -> usize {
        self.basis.len() - self.n_valid()
    }
}

/// Sector bitstring of a qubit outcome with spectators in their locked state.
pub fn sector_bits<T: Real>(config: &LatticeConfig<T>, outcome: &SpinConfig) -> u64 {
    let mut bits = 0u64;
    for (a, q) in config.qubits.iter().enumerate() {
        bits |= 1 << if outcome.get(a) == 0 { q.first } else { q.second };
    }
    for s in &config.spectators {
        if s.state == Spin::Up {
            bits |= 1 << s.molecule;
        }
    }
    bits
}

/// Classifies the sector with one excitation per qubit plus the locked
/// ↑ spectators.
pub fn classify_states<T: Real>(config: &LatticeConfig<T>, size_limit: usize) -> Result<Classification> {
    config.validate()?;
    let n = config.n_molecules();
    if n % 2 == 1 && config.spectators.is_empty() {
        return Err(Error::Geometry("odd molecule count without spectators".into()));
    }
    let nq = config.n_qubits();
    if nq > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits".into(),
            size: nq,
            limit: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    let k = nq + config.spectators.iter().filter(|s| s.state == Spin::Up).count();
    let basis = SectorBasis::new(n, k, size_limit)?;
    let mut outcome = vec![None; basis.len()];
    let mut valid_index = Vec::with_capacity(1 << nq);
    for bits in 0..1u64 << nq {
        let c = SpinConfig::new(bits, nq);
        let idx = basis
            .rank(sector_bits(config, &c))
            .expect("valid states lie in the sector");
        outcome[idx] = Some(c);
        valid_index.push(idx);
    }
    Ok(Classification {
        basis,
        outcome,
        valid_index,
    })
}

/// Magnitude-weighted check used by tests and experiments: all couplings
/// of `model` share the sign of `sign`.
pub fn couplings_have_sign<T: Real>(model: &IsingModel<T>, sign: T) -> bool {
    let n = model.n_qubits();
    (0..n).all(|a| (a + 1..n).all(|b| to_f64(model.j[(a, b)] * sign) > 0.0))
}
