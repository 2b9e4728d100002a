//! Single ²Σ molecule in co-aligned dc electric and magnetic fields.
//!
//! The Hamiltonian is rotation + spin-rotation + Stark + Zeeman in the
//! uncoupled |N M_N M_S> basis, in Hz. With co-aligned fields M_N + M_S is
//! conserved, so diagonalization runs block by block.

mod basis;
mod spectrum;

pub use basis::{dipole_element, Basis, BasisState};
pub use spectrum::{
    find_avoided_crossing, track_spectrum, Eigensystem, Label, StateKey, StateLabels,
    TrackedSpectrum, PRESCAN_POINTS,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Rotational constant, spin-rotation constant and permanent dipole moment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeConstants<T> {
    pub name: String,
    /// cm^-1
    pub b_e: T,
    /// cm^-1
    pub gamma_sr: T,
    /// Debye
    pub dipole: T,
}

impl<T: Real> MoleculeConstants<T> {
    pub fn new(name: &str, b_e: T, gamma_sr: T, dipole: T) -> Result<Self> {
        let c = MoleculeConstants {
            name: name.to_string(),
            b_e,
            gamma_sr,
            dipole,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_e > T::zero()) {
            return Err(Error::InvalidArgument(format!("B_e = {} must be > 0", self.b_e)));
        }
        if !(self.dipole > T::zero()) {
            return Err(Error::InvalidArgument(format!("d = {} must be > 0", self.dipole)));
        }
        if !self.gamma_sr.is_finite() {
            return Err(Error::InvalidArgument("gamma_SR must be finite".into()));
        }
        Ok(())
    }

    /// SrF(X²Σ⁺).
    pub fn srf() -> Self {
        MoleculeConstants {
            name: "SrF".into(),
            b_e: lit(0.251),
            gamma_sr: lit(2.49e-3),
            dipole: lit(3.47),
        }
    }

    /// SrI(X²Σ⁺).
    pub fn sri() -> Self {
        MoleculeConstants {
            name: "SrI".into(),
            b_e: lit(0.0367),
            gamma_sr: lit(3.29e-3),
            dipole: lit(6.00),
        }
    }
}

/// Field magnitudes seen by one molecule. Both fields point along z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint<T> {
    /// kV/cm
    pub e_kv_cm: T,
    /// mT
    pub b_mt: T,
    /// per-molecule electric offset, V/m
    pub delta_e_v_m: T,
}

impl<T: Real> FieldPoint<T> {
    pub fn new(e_kv_cm: T, b_mt: T) -> Self {
        FieldPoint {
            e_kv_cm,
            b_mt,
            delta_e_v_m: T::zero(),
        }
    }

    pub fn with_offset(mut self, delta_e_v_m: T) -> Self {
        self.delta_e_v_m = delta_e_v_m;
        self
    }

    /// Total electric field E + δE in kV/cm.
    pub fn total_e_kv_cm(&self) -> T {
        self.e_kv_cm + self.delta_e_v_m * lit(constants::v_per_m_to_kv_per_cm(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_kv_cm >= T::zero()) || !(self.b_mt >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "fields must be non-negative (E = {}, B = {})",
                self.e_kv_cm, self.b_mt
            )));
        }
        Ok(())
    }
}

/// Precomputed operator matrices for one molecule and basis cutoff.
#[derive(Clone, Debug)]
pub struct MoleculeModel<T: Real> {
    constants: MoleculeConstants<T>,
    basis: Basis,
    field_free: DMatrix<T>,
    zeeman_per_mt: DVector<T>,
    stark_per_kv_cm: DMatrix<T>,
    /// d_q / d for q = -1, 0, +1
    dipole: [DMatrix<T>; 3],
}

/// Default rotational cutoff.
pub const DEFAULT_N_MAX: u32 = 5;

impl<T: Real> MoleculeModel<T> {
    pub fn new(constants: MoleculeConstants<T>, n_max: u32) -> Result<Self> {
        constants.validate()?;
        let basis = Basis::new(n_max)?;
        let dim = basis.len();
        let states = basis.states();

        let hz_per_cm: T = lit(constants::HZ_PER_WAVENUMBER);
        let rot = constants.b_e * hz_per_cm;
        let gamma = constants.gamma_sr * hz_per_cm;
        let half: T = lit(0.5);

        let mut field_free = DMatrix::<T>::zeros(dim, dim);
        for (i, s) in states.iter().enumerate() {
            let n = lit::<T>(s.n as f64);
            let mn = lit::<T>(s.mn as f64);
            let ms = lit::<T>(s.ms());
            field_free[(i, i)] = rot * n * (n + T::one()) + gamma * mn * ms;
            // N+ S- connects |N M +1/2> to |N M+1 -1/2>
            if s.ms2 == 1 && s.mn < s.n as i32 {
                let up = BasisState {
                    n: s.n,
                    mn: s.mn + 1,
                    ms2: -1,
                };
                let j = basis.index_of(&up).expect("partner state in basis");
                let nn = (s.n * (s.n + 1)) as f64;
                let mm = (s.mn * (s.mn + 1)) as f64;
                let v = half * gamma * lit::<T>(nn - mm).sqrt();
                field_free[(i, j)] += v;
                field_free[(j, i)] += v;
            }
        }

        let zeeman_scale: T = lit(constants::zeeman_hz_per_mt());
        let zeeman_per_mt = DVector::from_iterator(
            dim,
            states.iter().map(|s| zeeman_scale * lit::<T>(s.ms())),
        );

        let dipole = [-1, 0, 1].map(|q| {
            DMatrix::from_fn(dim, dim, |i, j| dipole_element::<T>(&states[i], &states[j], q))
        });
        let stark_scale = constants.dipole * lit::<T>(constants::stark_hz_per_debye_kv_cm());
        let stark_per_kv_cm = &dipole[1] * stark_scale;

        Ok(MoleculeModel {
            constants,
            basis,
            field_free,
            zeeman_per_mt,
            stark_per_kv_cm,
            dipole,
        })
    }

    pub fn constants(&self) -> &MoleculeConstants<T> {
        &self.constants
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Bare dipole operator d_q / d.
    pub fn bare_dipole(&self, q: i32) -> Result<&DMatrix<T>> {
        match q {
            -1 => Ok(&self.dipole[0]),
            0 => Ok(&self.dipole[1]),
            1 => Ok(&self.dipole[2]),
            _ => Err(Error::InvalidArgument(format!("spherical component q = {q}"))),
        }
    }

    /// Full Hamiltonian matrix in Hz.
    pub fn hamiltonian(&self, field: &FieldPoint<T>) -> DMatrix<T> {
        let mut h = self.field_free.clone();
        h -= &self.stark_per_kv_cm * field.total_e_kv_cm();
        for i in 0..self.dim() {
            h[(i, i)] += self.zeeman_per_mt[i] * field.b_mt;
        }
        h
    }

    /// Diagonalizes block by block in M_N + M_S.
    pub fn eigensystem(&self, field: &FieldPoint<T>) -> Eigensystem<T> {
        Eigensystem::from_blocks(&self.hamiltonian(field), &self.basis)
    }
}

/// Hamiltonian matrix (Hz) for the given constants, fields and cutoff.
pub fn build_hamiltonian<T: Real>(
    constants: &MoleculeConstants<T>,
    field: &FieldPoint<T>,
    n_max: u32,
) -> Result<DMatrix<T>> {
    field.validate()?;
    let model = MoleculeModel::new(constants.clone(), n_max)?;
    Ok(model.hamiltonian(field))
}
