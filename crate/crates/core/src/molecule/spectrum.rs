use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVectorView, SymmetricEigen};
use rayon::prelude::*;

use super::{Basis, BasisState, FieldPoint, MoleculeModel};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::search::{golden_section_min, linspace};

/// Identifies an eigenstate by its symmetry block (twice M_N + M_S) and its
/// energy rank inside that block. Levels of one block never cross, so the
/// key follows a state adiabatically along a field sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub m2: i32,
    pub rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Alpha,
    Beta,
    Gamma,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Alpha, Label::Beta, Label::Gamma];

    /// Bare state that dominates the label below the avoided crossing.
    fn reference(self) -> BasisState {
        match self {
            Label::Alpha => BasisState { n: 0, mn: 0, ms2: -1 },
            Label::Beta => BasisState { n: 1, mn: 1, ms2: -1 },
            Label::Gamma => BasisState { n: 0, mn: 0, ms2: 1 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Alpha => "alpha",
            Label::Beta => "beta",
            Label::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Eigenpairs of one field point, sorted by energy.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    energies: Vec<T>,
    vectors: DMatrix<T>,
    keys: Vec<StateKey>,
}

impl<T: Real> Eigensystem<T> {
    pub(crate) fn from_blocks(h: &DMatrix<T>, basis: &Basis) -> Self {
        let dim = h.nrows();
        let mut entries: Vec<(T, StateKey, Vec<T>)> = Vec::with_capacity(dim);
        for (m2, idx) in basis.blocks() {
            let n = idx.len();
            let sub = DMatrix::from_fn(n, n, |i, j| h[(idx[i], idx[j])]);
            let eig = SymmetricEigen::new(sub);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            for (rank, &col) in order.iter().enumerate() {
                let mut full = vec![T::zero(); dim];
                for (i, &row) in idx.iter().enumerate() {
                    full[row] = eig.eigenvectors[(i, col)];
                }
                fix_phase(&mut full);
                entries.push((eig.eigenvalues[col], StateKey { m2: *m2, rank }, full));
            }
        }
        entries.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let mut vectors = DMatrix::<T>::zeros(dim, dim);
        let mut energies = Vec::with_capacity(dim);
        let mut keys = Vec::with_capacity(dim);
        for (col, (e, key, v)) in entries.into_iter().enumerate() {
            energies.push(e);
            keys.push(key);
            for (row, x) in v.into_iter().enumerate() {
                vectors[(row, col)] = x;
            }
        }
        Eigensystem {
            energies,
            vectors,
            keys,
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Eigenvectors as columns, in energy order.
    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> DVectorView<'_, T> {
        self.vectors.column(k)
    }

    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn index_of(&self, key: StateKey) -> Option<usize> {
        self.keys.iter().position(|k| *k == key)
    }

    /// Index of the eigenstate with the largest weight on `bare`.
    fn dominant(&self, basis: &Basis, bare: &BasisState) -> Option<(usize, T)> {
        let row = basis.index_of(bare)?;
        (0..self.len())
            .map(|k| (k, self.vectors[(row, k)] * self.vectors[(row, k)]))
            .fold(None, |best: Option<(usize, T)>, (k, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((k, w)),
            })
    }
}

/// Largest-magnitude coefficient made positive (first one on ties).
fn fix_phase<T: Real>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Resolved keys of the α, β, γ states for one magnetic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateLabels {
    pub alpha: StateKey,
    pub beta: StateKey,
    pub gamma: StateKey,
}

impl StateLabels {
    pub fn key(&self, label: Label) -> StateKey {
        match label {
            Label::Alpha => self.alpha,
            Label::Beta => self.beta,
            Label::Gamma => self.gamma,
        }
    }

    fn from_eigensystem<T: Real>(es: &Eigensystem<T>, basis: &Basis) -> Result<Self> {
        let mut keys = [StateKey { m2: 0, rank: 0 }; 3];
        for (slot, label) in keys.iter_mut().zip(Label::ALL) {
            let (k, weight) = es.dominant(basis, &label.reference()).ok_or_else(|| {
                Error::Labeling(format!("reference state for {label} missing from basis"))
            })?;
            if weight <= lit(0.5) {
                return Err(Error::Labeling(format!(
                    "{label} has no dominant bare character (weight {weight:.3})"
                )));
            }
            *slot = es.keys()[k];
        }
        if keys[0] == keys[1] || keys[1] == keys[2] || keys[0] == keys[2] {
            return Err(Error::Labeling("labels are not distinct".into()));
        }
        Ok(StateLabels {
            alpha: keys[0],
            beta: keys[1],
            gamma: keys[2],
        })
    }
}

impl<T: Real> MoleculeModel<T> {
    /// Labels α, β, γ from the bare character at `e_ref_kv_cm`.
    ///
    /// B = 0 is rejected: without Zeeman splitting the β–γ pair is undefined.
    pub fn labels_at(&self, b_mt: T, e_ref_kv_cm: T) -> Result<StateLabels> {
        if !(b_mt > T::zero()) {
            return Err(Error::Labeling(format!(
                "B = {b_mt} mT: beta/gamma undefined without a magnetic field"
            )));
        }
        let es = self.eigensystem(&FieldPoint::new(e_ref_kv_cm, b_mt));
        StateLabels::from_eigensystem(&es, self.basis())
    }

    /// Labels resolved at zero electric field.
    pub fn labels(&self, b_mt: T) -> Result<StateLabels> {
        self.labels_at(b_mt, T::zero())
    }

    /// Energy gap |ε_γ − ε_β| in Hz.
    pub fn beta_gamma_gap(&self, labels: &StateLabels, e_kv_cm: T, b_mt: T) -> Result<T> {
        let es = self.eigensystem(&FieldPoint::new(e_kv_cm, b_mt));
        let ib = es.index_of(labels.beta).ok_or_else(|| missing(Label::Beta))?;
        let ig = es.index_of(labels.gamma).ok_or_else(|| missing(Label::Gamma))?;
        Ok((es.energies()[ig] - es.energies()[ib]).abs())
    }
}

fn missing(label: Label) -> Error {
    Error::Labeling(format!("{label} not present in eigensystem"))
}

/// Spectrum followed along an electric-field grid.
#[derive(Clone, Debug)]
pub struct TrackedSpectrum<T: Real> {
    pub grid: Vec<T>,
    /// `energies[point][state]`, Hz
    pub energies: Vec<Vec<T>>,
    /// one matrix per grid point, tracked states as columns
    pub eigvecs: Vec<DMatrix<T>>,
    pub keys: Vec<StateKey>,
    pub labels: BTreeMap<Label, usize>,
}

impl<T: Real> TrackedSpectrum<T> {
    pub fn n_states(&self) -> usize {
        self.keys.len()
    }

    pub fn label_of(&self, state: usize) -> Option<Label> {
        self.labels.iter().find(|(_, &s)| s == state).map(|(l, _)| *l)
    }

    pub fn energy(&self, label: Label, point: usize) -> Option<T> {
        self.labels.get(&label).map(|&s| self.energies[point][s])
    }
}

/// Diagonalizes on every grid point and follows the `n_states` lowest
/// levels (ordered at the first point).
///
/// States are followed by symmetry block and in-block rank; a step is
/// accepted only if that continuation is also the maximum-overlap partner
/// and the overlap exceeds 0.5. Labels are continued adiabatically from
/// their bare character at zero field.
pub fn track_spectrum<T: Real>(
    model: &MoleculeModel<T>,
    b_mt: T,
    grid: &[T],
    n_states: usize,
) -> Result<TrackedSpectrum<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty field grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("field grid must be strictly increasing".into()));
    }
    if !(b_mt > T::zero()) {
        return Err(Error::Labeling(format!(
            "B = {b_mt} mT: beta/gamma undefined without a magnetic field"
        )));
    }
    let n_states = n_states.min(model.dim());

    let systems: Vec<Eigensystem<T>> = grid
        .par_iter()
        .map(|&e| model.eigensystem(&FieldPoint::new(e, b_mt)))
        .collect();

    let first = &systems[0];
    let keys: Vec<StateKey> = first.keys()[..n_states].to_vec();
    let all_labels = model.labels(b_mt)?;
    let mut labels = BTreeMap::new();
    for label in Label::ALL {
        if let Some(s) = keys.iter().position(|k| *k == all_labels.key(label)) {
            labels.insert(label, s);
        }
    }

    let mut energies = Vec::with_capacity(grid.len());
    let mut eigvecs = Vec::with_capacity(grid.len());
    let mut prev_cols: Option<Vec<usize>> = None;
    for (p, es) in systems.iter().enumerate() {
        let cols: Vec<usize> = keys
            .iter()
            .map(|k| es.index_of(*k).expect("block ranks are stable across the grid"))
            .collect();
        if let Some(prev) = &prev_cols {
            let prev_es = &systems[p - 1];
            for (&pc, &cc) in prev.iter().zip(&cols) {
                let v = prev_es.vector(pc);
                let here = es.vector(cc).dot(&v).abs();
                let (best, best_ov) = (0..es.len())
                    .map(|k| (k, es.vector(k).dot(&v).abs()))
                    .fold((cc, here), |acc, x| if x.1 > acc.1 { x } else { acc });
                if best != cc || here <= lit(0.5) {
                    return Err(Error::Tracking {
                        e_from: to_f64(grid[p - 1]),
                        e_to: to_f64(grid[p]),
                        overlap: to_f64(if best != cc { here } else { best_ov }),
                    });
                }
            }
        }
        energies.push(cols.iter().map(|&c| es.energies()[c]).collect());
        eigvecs.push(DMatrix::from_fn(es.vectors().nrows(), cols.len(), |i, j| {
            es.vectors()[(i, cols[j])]
        }));
        prev_cols = Some(cols);
    }

    Ok(TrackedSpectrum {
        grid: grid.to_vec(),
        energies,
        eigvecs,
        keys,
        labels,
    })
}

/// Number of points in the coarse pre-scan of the field finders.
pub const PRESCAN_POINTS: usize = 201;

/// Locates the β–γ avoided crossing inside `bracket` (kV/cm). Returns the
/// field of minimum gap and the gap in Hz; the field is resolved to 1 V/cm.
pub fn find_avoided_crossing<T: Real>(
    model: &MoleculeModel<T>,
    b_mt: T,
    bracket: (T, T),
) -> Result<(T, T)> {
    let (lo, hi) = bracket;
    if !(hi > lo) || lo < T::zero() {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let labels = model.labels(b_mt)?;
    let grid = linspace(lo, hi, PRESCAN_POINTS);
    let gaps: Vec<T> = grid
        .par_iter()
        .map(|&e| model.beta_gamma_gap(&labels, e, b_mt))
        .collect::<Result<_>>()?;

    let minima: Vec<usize> = (1..gaps.len() - 1)
        .filter(|&i| gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1])
        .collect();
    let no_min = || Error::NoMinimum {
        lo: to_f64(lo),
        hi: to_f64(hi),
    };
    let i = match minima.as_slice() {
        [] => return Err(no_min()),
        [i] => *i,
        many => {
            return Err(Error::InvalidArgument(format!(
                "bracket [{lo}, {hi}] holds {} gap minima",
                many.len()
            )))
        }
    };
    golden_section_min(
        |e| model.beta_gamma_gap(&labels, e, b_mt),
        grid[i - 1],
        grid[i + 1],
        lit(1e-3),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::MoleculeConstants;

    fn srf() -> MoleculeModel<f64> {
        MoleculeModel::new(MoleculeConstants::srf(), 5).unwrap()
    }

    #[test]
    fn labels_at_low_field() {
        let model = srf();
        let l = model.labels(538.0).unwrap();
        assert_eq!(l.alpha.m2, -1);
        assert_eq!(l.beta.m2, 1);
        assert_eq!(l.gamma.m2, 1);
        assert_eq!((l.beta.rank, l.gamma.rank), (0, 1));
    }

    #[test]
    fn zero_magnetic_field_is_a_labeling_error() {
        let model = srf();
        assert!(matches!(model.labels(0.0), Err(Error::Labeling(_))));
        assert!(matches!(
            track_spectrum(&model, 0.0, &[0.0, 1.0], 5),
            Err(Error::Labeling(_))
        ));
    }

    #[test]
    fn single_point_grid_labels_without_tracking() {
        let model = srf();
        let ts = track_spectrum(&model, 538.0, &[0.2], 5).unwrap();
        assert_eq!(ts.labels.len(), 3);
        assert_eq!(ts.energies.len(), 1);
    }

    #[test]
    fn eigenvectors_normalized() {
        let model = srf();
        let es = model.eigensystem(&FieldPoint::new(6.7, 600.0));
        for k in 0..es.len() {
            assert!((es.vector(k).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_must_increase() {
        let model = srf();
        assert!(track_spectrum(&model, 538.0, &[1.0, 0.5], 5).is_err());
        assert!(track_spectrum(&model, 538.0, &[], 5).is_err());
    }

    #[test]
    fn coarse_grid_across_crossing_is_reported() {
        // two points straddling the 600 mT crossing: β changes character
        let model = srf();
        let r = track_spectrum(&model, 600.0, &[6.0, 7.5], 5);
        assert!(matches!(r, Err(Error::Tracking { .. })), "{r:?}");
    }

    #[test]
    fn crossing_at_538_mt() {
        let (ex, gap) = find_avoided_crossing(&srf(), 538.0, (0.0, 3.0)).unwrap();
        assert!((ex - 1.18).abs() / 1.18 < 0.02, "E_x = {ex}");
        assert!(gap > 0.0);
    }

    #[test]
    fn monotone_gap_has_no_minimum() {
        let r = find_avoided_crossing(&srf(), 600.0, (0.0, 3.0));
        assert!(matches!(r, Err(Error::NoMinimum { .. })));
    }
}
