//! Field-dressed dipole-dipole couplings between two molecules.
//!
//! Each molecule is reduced to two dressed states |↑>, |↓>. Only the
//! excitation-conserving part of the dipolar operator is kept,
//!
//!   V = −P2(cos θ)/R³ · (d₊₁d₋₁ + 2 d₀d₀ + d₋₁d₊₁),
//!
//! and its 4×4 projection is parameterized as
//! J_z SzSz + J⊥/2 (S⁺S⁻ + h.c.) + W 1⊗Sz + K Sz⊗1 + V 1⊗1.

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::molecule::{FieldPoint, Label, MoleculeModel, StateLabels, PRESCAN_POINTS};
use crate::scalar::{lit, to_f64, Real};
use crate::search::{bisect_threshold, golden_section_min, linspace};

/// Distance (nm) and angle between the field axis and the intermolecular
/// vector (rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry<T> {
    pub r_nm: T,
    pub theta: T,
}

impl<T: Real> PairGeometry<T> {
    pub fn new(r_nm: T, theta: T) -> Result<Self> {
        if !(r_nm > T::zero()) {
            return Err(Error::Geometry(format!("R = {r_nm} nm must be > 0")));
        }
        if !(theta >= T::zero() && theta <= T::pi()) {
            return Err(Error::Geometry(format!("theta = {theta} outside [0, pi]")));
        }
        Ok(PairGeometry { r_nm, theta })
    }

    /// P2(cos θ)/R³ in nm⁻³.
    pub fn angular_factor(&self) -> T {
        let c = self.theta.cos();
        (lit::<T>(3.0) * c * c - T::one()) / (lit::<T>(2.0) * self.r_nm.powi(3))
    }
}

/// P2(cos θ)/R³ for a displacement `r` (nm) and unit field axis. Exactly
/// zero when 3 (r·axis)² = |r|².
pub fn angular_factor_from_vector<T: Real>(r: &Vector3<T>, axis: &Vector3<T>) -> T {
    let z = r.dot(axis);
    let r2 = r.norm_squared();
    (lit::<T>(3.0) * z * z - r2) / (lit::<T>(2.0) * r2 * r2 * r2.sqrt())
}

/// XXZ parameters of one molecule pair, Hz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairCouplings<T> {
    pub j_perp: T,
    pub j_z: T,
    pub w: T,
    pub k: T,
    pub v: T,
}

impl<T: Real> PairCouplings<T> {
    /// Excitation-conserving 4×4 block in the basis |↑↑>, |↑↓>, |↓↑>, |↓↓>.
    pub fn reconstruct(&self) -> [[T; 4]; 4] {
        let half: T = lit(0.5);
        let mut block = [[T::zero(); 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                let sa = if a == 0 { half } else { -half };
                let sb = if b == 0 { half } else { -half };
                block[2 * a + b][2 * a + b] = self.j_z * sa * sb + self.w * sb + self.k * sa + self.v;
            }
        }
        block[1][2] = self.j_perp * half;
        block[2][1] = self.j_perp * half;
        block
    }

    /// Inverts the XXZ parameterization on a projected block.
    pub fn from_block(block: &[[T; 4]; 4]) -> Self {
        let (uu, ud, du, dd) = (block[0][0], block[1][1], block[2][2], block[3][3]);
        let half: T = lit(0.5);
        PairCouplings {
            j_z: uu + dd - ud - du,
            j_perp: lit::<T>(2.0) * block[1][2],
            k: half * (uu + ud - du - dd),
            w: half * (uu - ud + du - dd),
            v: (uu + ud + du + dd) / lit(4.0),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        PairCouplings {
            j_perp: self.j_perp * factor,
            j_z: self.j_z * factor,
            w: self.w * factor,
            k: self.k * factor,
            v: self.v * factor,
        }
    }
}

/// Transverse field and bias of a two-molecule qubit, Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams<T> {
    pub h_q: T,
    pub delta_q: T,
}

/// Two dressed states of one molecule at one field point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedPair<T> {
    pub energy_up: T,
    pub energy_down: T,
    /// permanent dipole, D
    pub dipole: T,
    /// `dip[q + 1][a][b] = <a| d_q |b> / d` with a, b = 0 (↑), 1 (↓)
    pub dip: [[[T; 2]; 2]; 3],
}

impl<T: Real> DressedPair<T> {
    /// ε↑ − ε↓, the single-molecule coefficient of Sz.
    pub fn splitting(&self) -> T {
        self.energy_up - self.energy_down
    }
}

/// Which tracked states play |↑> and |↓>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub up: Label,
    pub down: Label,
}

impl Default for Encoding {
    fn default() -> Self {
        Encoding {
            up: Label::Beta,
            down: Label::Gamma,
        }
    }
}

/// U† d_q U over the columns of `eigvecs`, in Debye.
pub fn dressed_dipole<T: Real>(
    model: &MoleculeModel<T>,
    eigvecs: &DMatrix<T>,
    q: i32,
) -> Result<DMatrix<T>> {
    if eigvecs.nrows() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: eigvecs.nrows(),
        });
    }
    let d = model.bare_dipole(q)?;
    Ok(eigvecs.transpose() * d * eigvecs * model.constants().dipole)
}

impl<T: Real> MoleculeModel<T> {
    /// Dressed ↑/↓ data at `field`.
    pub fn dressed_pair(
        &self,
        field: &FieldPoint<T>,
        labels: &StateLabels,
        encoding: Encoding,
    ) -> Result<DressedPair<T>> {
        let es = self.eigensystem(field);
        let find = |label: Label| {
            es.index_of(labels.key(label))
                .ok_or_else(|| Error::Labeling(format!("{label} not found at E = {}", field.e_kv_cm)))
        };
        let iu = find(encoding.up)?;
        let id = find(encoding.down)?;
        let cols = [es.vector(iu), es.vector(id)];
        let mut dip = [[[T::zero(); 2]; 2]; 3];
        for (qi, q) in [-1, 0, 1].into_iter().enumerate() {
            let d = self.bare_dipole(q)?;
            for a in 0..2 {
                let da = d.transpose() * cols[a];
                for b in 0..2 {
                    // <a| d_q |b> = a^T d_q b
                    dip[qi][a][b] = da.dot(&cols[b]);
                }
            }
        }
        Ok(DressedPair {
            energy_up: es.energies()[iu],
            energy_down: es.energies()[id],
            dipole: self.constants().dipole,
            dip,
        })
    }
}

/// Projected excitation-conserving dipolar block for molecules `a`, `b`
/// with angular factor P2/R³ (nm⁻³). Basis |↑↑>, |↑↓>, |↓↑>, |↓↓>.
///
/// Elements that change the number of ↑ molecules are dropped.
pub fn projected_block<T: Real>(a: &DressedPair<T>, b: &DressedPair<T>, angular: T) -> [[T; 4]; 4] {
    let scale = -angular * a.dipole * b.dipole * lit::<T>(constants::dipolar_hz_nm3_per_debye2());
    let two: T = lit(2.0);
    let mut block = [[T::zero(); 4]; 4];
    for ia in 0..2 {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    let ups_in = (ja == 0) as i32 + (jb == 0) as i32;
                    let ups_out = (ia == 0) as i32 + (ib == 0) as i32;
                    if ups_in != ups_out {
                        continue;
                    }
                    let m = a.dip[2][ia][ja] * b.dip[0][ib][jb]
                        + two * a.dip[1][ia][ja] * b.dip[1][ib][jb]
                        + a.dip[0][ia][ja] * b.dip[2][ib][jb];
                    block[2 * ia + ib][2 * ja + jb] = scale * m;
                }
            }
        }
    }
    block
}

/// XXZ couplings between two dressed molecules.
pub fn couplings_between<T: Real>(a: &DressedPair<T>, b: &DressedPair<T>, angular: T) -> PairCouplings<T> {
    PairCouplings::from_block(&projected_block(a, b, angular))
}

/// XXZ couplings of two identical molecules sharing `field`.
pub fn pair_couplings<T: Real>(
    model: &MoleculeModel<T>,
    field: &FieldPoint<T>,
    geometry: &PairGeometry<T>,
    encoding: Encoding,
) -> Result<PairCouplings<T>> {
    field.validate()?;
    let labels = model.labels(field.b_mt)?;
    let dressed = model.dressed_pair(field, &labels, encoding)?;
    Ok(couplings_between(&dressed, &dressed, geometry.angular_factor()))
}

/// Geometry-free couplings (P2/R³ = 1 nm⁻³).
fn unit_couplings<T: Real>(
    model: &MoleculeModel<T>,
    labels: &StateLabels,
    e_kv_cm: T,
    b_mt: T,
) -> Result<PairCouplings<T>> {
    let d = model.dressed_pair(&FieldPoint::new(e_kv_cm, b_mt), labels, Encoding::default())?;
    Ok(couplings_between(&d, &d, T::one()))
}

/// Electric field (kV/cm) maximizing |J⊥| inside `bracket`, to 1 V/cm.
///
/// The optimum does not depend on R or θ; a supplied geometry is only
/// checked for the degenerate magic angle.
pub fn find_e_perp<T: Real>(
    model: &MoleculeModel<T>,
    b_mt: T,
    bracket: (T, T),
    geometry: Option<&PairGeometry<T>>,
) -> Result<T> {
    if let Some(g) = geometry {
        if g.angular_factor().abs() * g.r_nm.powi(3) < lit(1e-12) {
            return Err(Error::Geometry("magic-angle geometry has vanishing couplings".into()));
        }
    }
    let (lo, hi) = bracket;
    if !(hi > lo) || lo < T::zero() {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let labels = model.labels(b_mt)?;
    let objective = |e: T| -> Result<T> { Ok(-unit_couplings(model, &labels, e, b_mt)?.j_perp.abs()) };
    let grid = linspace(lo, hi, PRESCAN_POINTS);
    let values: Vec<T> = grid.par_iter().map(|&e| objective(e)).collect::<Result<_>>()?;
    let best = (0..values.len())
        .fold(0, |b, i| if values[i] < values[b] { i } else { b });
    if best == 0 || best + 1 == values.len() {
        return Err(Error::NoMaximum {
            lo: to_f64(lo),
            hi: to_f64(hi),
        });
    }
    let (e, _) = golden_section_min(objective, grid[best - 1], grid[best + 1], lit(1e-3))?;
    Ok(e)
}

/// Default ratio J_z/J⊥ defining E_z.
pub const DEFAULT_EZ_RATIO: f64 = 100.0;

/// Smallest field above `e_perp` with |J_z|/|J⊥| ≥ `ratio`, to 1 V/cm.
/// The scan stops at `e_max`.
pub fn find_e_z<T: Real>(model: &MoleculeModel<T>, b_mt: T, e_perp: T, ratio: T, e_max: T) -> Result<T> {
    let labels = model.labels(b_mt)?;
    let reached = |e: T| -> Result<bool> {
        let c = unit_couplings(model, &labels, e, b_mt)?;
        Ok(c.j_z.abs() >= ratio * c.j_perp.abs())
    };
    if reached(e_perp)? {
        return Ok(e_perp);
    }
    let step: T = lit(0.01);
    let mut prev = e_perp;
    loop {
        let next = prev + step;
        if next > e_max {
            return Err(Error::RatioNotReached {
                ratio: to_f64(ratio),
                lo: to_f64(e_perp),
                hi: to_f64(e_max),
            });
        }
        if reached(next)? {
            return bisect_threshold(reached, prev, next, lit(1e-3));
        }
        prev = next;
    }
}

/// Bias and transverse field of a qubit made of two molecules at `f1`, `f2`.
pub fn qubit_params<T: Real>(
    model: &MoleculeModel<T>,
    f1: &FieldPoint<T>,
    f2: &FieldPoint<T>,
    geometry: &PairGeometry<T>,
) -> Result<QubitParams<T>> {
    if f1.b_mt != f2.b_mt {
        return Err(Error::InvalidArgument("qubit molecules must share B".into()));
    }
    let labels = model.labels(f1.b_mt)?;
    let enc = Encoding::default();
    let d1 = model.dressed_pair(f1, &labels, enc)?;
    let d2 = model.dressed_pair(f2, &labels, enc)?;
    let c = couplings_between(&d1, &d2, geometry.angular_factor());
    let h1 = d1.splitting() + c.k;
    let h2 = d2.splitting() + c.w;

    let two: T = lit(2.0);
    let mean = FieldPoint {
        e_kv_cm: (f1.e_kv_cm + f2.e_kv_cm) / two,
        b_mt: f1.b_mt,
        delta_e_v_m: (f1.delta_e_v_m + f2.delta_e_v_m) / two,
    };
    let dm = model.dressed_pair(&mean, &labels, enc)?;
    Ok(QubitParams {
        h_q: h1 - h2,
        delta_q: couplings_between(&dm, &dm, geometry.angular_factor()).j_perp,
    })
}

/// J_ab = J_z13 + J_z24 − J_z14 − J_z23 for qubits (1, 2) and (3, 4) with
/// positions in nm; all molecules see `field`.
pub fn interqubit_coupling<T: Real>(
    model: &MoleculeModel<T>,
    field: &FieldPoint<T>,
    positions: &[Vector3<T>; 4],
    field_axis: &Vector3<T>,
) -> Result<T> {
    for i in 0..4 {
        for j in i + 1..4 {
            if (positions[i] - positions[j]).norm() <= T::zero() {
                return Err(Error::Geometry(format!("molecules {i} and {j} coincide")));
            }
        }
    }
    let axis = field_axis.normalize();
    let labels = model.labels(field.b_mt)?;
    let d = model.dressed_pair(field, &labels, Encoding::default())?;
    let jz = |i: usize, j: usize| {
        couplings_between(&d, &d, angular_factor_from_vector(&(positions[j] - positions[i]), &axis)).j_z
    };
    Ok(jz(0, 2) + jz(1, 3) - jz(0, 3) - jz(1, 2))
}
