//! End-to-end runs: coupling scans, the two-qubit anneal, 1D/2D anneals,
//! the scaling study, 3D-stack parameters and molecular-constant sweeps.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{find_e_perp, find_e_z, pair_couplings, Encoding, PairCouplings, PairGeometry, DEFAULT_EZ_RATIO};
use crate::dynamics::{propagate, AnnealOptions, AnnealResult, Schedule};
use crate::error::{Error, Result};
use crate::lattice::{
    effective_ising, ising_from_tables, IsingModel, LatticeConfig, TableBuilder, DEFAULT_B_MT, DEFAULT_R1_NM,
    DEFAULT_R2_NM,
};
use crate::molecule::{find_avoided_crossing, FieldPoint, MoleculeConstants, MoleculeModel, DEFAULT_N_MAX};

/// Electric-field window searched for the β–γ crossing, kV/cm.
pub const CROSSING_SEARCH: (f64, f64) = (0.0, 40.0);
/// Half-width of the E⊥ search around the crossing, kV/cm.
pub const E_PERP_HALF_WIDTH: f64 = 0.5;
/// Extent of the E_z scan above E⊥, kV/cm.
pub const E_Z_SCAN: f64 = 20.0;
pub const ANNEAL_TIMES_MS: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 25.0];
pub const STEPS_1D: usize = 200;
pub const STEPS_2D: usize = 100;

/// Crossing and working fields at one magnetic field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub b_mt: f64,
    pub e_cross: f64,
    pub gap_hz: f64,
    pub e_perp: f64,
    pub e_z: f64,
}

pub fn working_point(model: &MoleculeModel<f64>, b_mt: f64) -> Result<WorkingPoint> {
    let (e_cross, gap_hz) = find_avoided_crossing(model, b_mt, CROSSING_SEARCH)?;
    let lo = (e_cross - E_PERP_HALF_WIDTH).max(0.0);
    let e_perp = find_e_perp(model, b_mt, (lo, e_cross + E_PERP_HALF_WIDTH), None)?;
    let e_z = find_e_z(model, b_mt, e_perp, DEFAULT_EZ_RATIO, e_perp + E_Z_SCAN)?;
    Ok(WorkingPoint {
        b_mt,
        e_cross,
        gap_hz,
        e_perp,
        e_z,
    })
}

/// Molecule, fields and spacings shared by the lattice experiments.
#[derive(Clone, Debug)]
pub struct Setup {
    pub model: MoleculeModel<f64>,
    pub b_mt: f64,
    pub e_start: f64,
    pub e_end: f64,
    pub r1_nm: f64,
    pub r2_nm: f64,
    pub options: AnnealOptions,
}

impl Setup {
    /// Ramp from E⊥ to E_z of `constants` at `b_mt`.
    pub fn auto(constants: MoleculeConstants<f64>, b_mt: f64) -> Result<Self> {
        let model = MoleculeModel::new(constants, DEFAULT_N_MAX)?;
        let wp = working_point(&model, b_mt)?;
        Ok(Setup {
            model,
            b_mt,
            e_start: wp.e_perp,
            e_end: wp.e_z,
            r1_nm: DEFAULT_R1_NM,
            r2_nm: DEFAULT_R2_NM,
            options: AnnealOptions::default(),
        })
    }

    /// SrF at 600 mT with automatically located working fields.
    pub fn srf() -> Result<Self> {
        Self::auto(MoleculeConstants::srf(), DEFAULT_B_MT)
    }

    pub fn schedule(&self, t_ms: f64, n_steps: usize) -> Result<Schedule<f64>> {
        Schedule::new(self.e_start, self.e_end, t_ms, n_steps)
    }

    pub fn field_at(&self, s: f64) -> f64 {
        self.e_start + s * (self.e_end - self.e_start)
    }
}

/// One row of a coupling-vs-field scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingRow {
    pub e_kv_cm: f64,
    pub b_mt: f64,
    pub r_nm: f64,
    pub theta: f64,
    pub couplings: PairCouplings<f64>,
}

pub fn coupling_scan(
    model: &MoleculeModel<f64>,
    b_mt: f64,
    grid: &[f64],
    geometry: &PairGeometry<f64>,
) -> Result<Vec<CouplingRow>> {
    grid.par_iter()
        .map(|&e| {
            Ok(CouplingRow {
                e_kv_cm: e,
                b_mt,
                r_nm: geometry.r_nm,
                theta: geometry.theta,
                couplings: pair_couplings(model, &FieldPoint::new(e, b_mt), geometry, Encoding::default())?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptConstant {
    Dipole,
    RotationalConstant,
    SpinRotation,
}

impl SweptConstant {
    pub fn name(self) -> &'static str {
        match self {
            SweptConstant::Dipole => "d_D",
            SweptConstant::RotationalConstant => "B_e_cm-1",
            SweptConstant::SpinRotation => "gamma_SR_cm-1",
        }
    }

    /// Default sweep window.
    pub fn window(self) -> (f64, f64) {
        match self {
            SweptConstant::Dipole => (1.0, 10.0),
            SweptConstant::RotationalConstant => (0.15, 0.3),
            SweptConstant::SpinRotation => (1e-4, 1e-2),
        }
    }

    fn apply(self, base: &MoleculeConstants<f64>, value: f64) -> Result<MoleculeConstants<f64>> {
        let mut c = base.clone();
        match self {
            SweptConstant::Dipole => c.dipole = value,
            SweptConstant::RotationalConstant => c.b_e = value,
            SweptConstant::SpinRotation => c.gamma_sr = value,
        }
        c.validate()?;
        Ok(c)
    }
}

/// Logarithmic grid with `per_decade` points per decade, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(Error::InvalidArgument(format!("bad log grid [{lo}, {hi}]")));
    }
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    Ok((0..=n)
        .map(|i| lo * 10f64.powf(decades * i as f64 / n as f64))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub constant: SweptConstant,
    pub values: Vec<f64>,
    pub b_mt: f64,
    pub base: MoleculeConstants<f64>,
    pub r_nm: f64,
    pub theta: f64,
}

impl ScanSpec {
    /// SrF-based sweep over the default window, 25 points per decade.
    pub fn default_for(constant: SweptConstant) -> Self {
        let (lo, hi) = constant.window();
        ScanSpec {
            constant,
            values: log_grid(lo, hi, 25).expect("valid window"),
            b_mt: DEFAULT_B_MT,
            base: MoleculeConstants::srf(),
            r_nm: 500.0,
            theta: FRAC_PI_2,
        }
    }
}

/// One sweep point. Points without a crossing keep the error text.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub point: Option<WorkingPoint>,
    pub j_perp_at_e_perp: f64,
    pub j_z_at_e_z: f64,
    pub error: Option<String>,
}

pub fn scan_constant(spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    let geometry = PairGeometry::new(spec.r_nm, spec.theta)?;
    Ok(spec
        .values
        .par_iter()
        .map(|&value| {
            let run = || -> Result<(WorkingPoint, f64, f64)> {
                let model = MoleculeModel::new(spec.constant.apply(&spec.base, value)?, DEFAULT_N_MAX)?;
                let wp = working_point(&model, spec.b_mt)?;
                let enc = Encoding::default();
                let jp = pair_couplings(&model, &FieldPoint::new(wp.e_perp, spec.b_mt), &geometry, enc)?.j_perp;
                let jz = pair_couplings(&model, &FieldPoint::new(wp.e_z, spec.b_mt), &geometry, enc)?.j_z;
                Ok((wp, jp, jz))
            };
            match run() {
                Ok((wp, jp, jz)) => ScanRow {
                    value,
                    point: Some(wp),
                    j_perp_at_e_perp: jp,
                    j_z_at_e_z: jz,
                    error: None,
                },
                Err(e) => ScanRow {
                    value,
                    point: None,
                    j_perp_at_e_perp: f64::NAN,
                    j_z_at_e_z: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Working fields and the pair Ising coupling at E_z across magnetic fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldRangeRow {
    pub point: WorkingPoint,
    /// J_z at E_z for two molecules `r_nm` apart along the field
    pub j_z: f64,
}

pub fn field_range_scan(model: &MoleculeModel<f64>, b_values: &[f64], r_nm: f64) -> Result<Vec<FieldRangeRow>> {
    let g = PairGeometry::new(r_nm, 0.0)?;
    b_values
        .par_iter()
        .map(|&b| {
            let point = working_point(model, b)?;
            let j_z = pair_couplings(model, &FieldPoint::new(point.e_z, b), &g, Encoding::default())?.j_z;
            Ok(FieldRangeRow { point, j_z })
        })
        .collect()
}

/// Two-qubit Hamiltonian parameters at one point of the ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitPoint {
    pub s: f64,
    pub e_kv_cm: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub j_ab: f64,
    pub j_z_intra: f64,
    pub h_a: f64,
    pub h_b: f64,
}

#[derive(Clone, Debug)]
pub struct TwoQubitRun {
    pub trace: Vec<TwoQubitPoint>,
    pub anneal: AnnealResult<f64>,
}

pub fn two_qubit_trace(setup: &Setup, points: usize) -> Result<Vec<TwoQubitPoint>> {
    let config = LatticeConfig::two_qubit(setup.r1_nm, setup.r2_nm, setup.b_mt)?;
    let builder = TableBuilder::new(&setup.model, &config)?;
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            let e = setup.field_at(s);
            let t = builder.tables(e)?;
            let ising = ising_from_tables(&config, &t);
            Ok(TwoQubitPoint {
                s,
                e_kv_cm: e,
                delta_a: t.j_perp[(0, 1)],
                delta_b: t.j_perp[(2, 3)],
                j_ab: ising.j[(0, 1)],
                j_z_intra: t.j_z[(0, 1)],
                h_a: ising.h[0],
                h_b: ising.h[1],
            })
        })
        .collect()
}

pub fn run_two_qubit(setup: &Setup, t_ms: f64, n_steps: usize) -> Result<TwoQubitRun> {
    let config = LatticeConfig::two_qubit(setup.r1_nm, setup.r2_nm, setup.b_mt)?;
    Ok(TwoQubitRun {
        trace: two_qubit_trace(setup, 101)?,
        anneal: propagate(&setup.model, &config, &setup.schedule(t_ms, n_steps)?, &setup.options)?,
    })
}

fn anneal_all(setup: &Setup, config: &LatticeConfig<f64>, times: &[f64], n_steps: usize) -> Result<Vec<AnnealResult<f64>>> {
    times
        .par_iter()
        .map(|&t| propagate(&setup.model, config, &setup.schedule(t, n_steps)?, &setup.options))
        .collect()
}

pub fn run_chain_1d(setup: &Setup, n_qubits: usize, times: &[f64], n_steps: usize) -> Result<Vec<AnnealResult<f64>>> {
    let config = LatticeConfig::chain_1d_af(n_qubits, setup.r1_nm, setup.r2_nm, setup.b_mt)?;
    anneal_all(setup, &config, times, n_steps)
}

pub fn run_lattice_2d(
    setup: &Setup,
    rows: usize,
    cols: usize,
    times: &[f64],
    n_steps: usize,
) -> Result<Vec<AnnealResult<f64>>> {
    let config = LatticeConfig::grid_2d(rows, cols, setup.r1_nm, setup.r2_nm, setup.b_mt)?;
    anneal_all(setup, &config, times, n_steps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "1D-AF")]
    Af1d,
    #[serde(rename = "1D-FM")]
    Fm1d,
    #[serde(rename = "2D-AF")]
    Af2d,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Af1d, Family::Fm1d, Family::Af2d];

    pub fn name(self) -> &'static str {
        match self {
            Family::Af1d => "1D-AF",
            Family::Fm1d => "1D-FM",
            Family::Af2d => "2D-AF",
        }
    }

    /// Default sizes as (rows, cols); 1D families use one row.
    pub fn default_sizes(self, opt_in_3x3: bool) -> Vec<(usize, usize)> {
        match self {
            Family::Af1d | Family::Fm1d => (1..=6).map(|n| (1, n)).collect(),
            Family::Af2d => {
                let mut v = vec![(2, 2), (2, 3), (2, 4)];
                if opt_in_3x3 {
                    v.push((3, 3));
                }
                v
            }
        }
    }

    pub fn default_steps(self) -> usize {
        match self {
            Family::Af1d | Family::Fm1d => STEPS_1D,
            Family::Af2d => STEPS_2D,
        }
    }

    pub fn config(self, size: (usize, usize), setup: &Setup) -> Result<LatticeConfig<f64>> {
        let (r1, r2, b) = (setup.r1_nm, setup.r2_nm, setup.b_mt);
        match self {
            Family::Af1d => LatticeConfig::chain_1d_af(size.0 * size.1, r1, r2, b),
            Family::Fm1d => LatticeConfig::chain_1d_fm(size.0 * size.1, r1, r2, b),
            Family::Af2d => LatticeConfig::grid_2d(size.0, size.1, r1, r2, b),
        }
    }
}

/// Best annealing time of one lattice size.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub n_qubits: usize,
    pub best_t_ms: f64,
    pub p_solution: f64,
    pub p_invalid: f64,
    /// final (T, p_solution, p_invalid) for every time
    pub per_time: Vec<(f64, f64, f64)>,
    /// final p_invalid is non-decreasing in T
    pub invalid_non_decreasing: bool,
}

pub fn scaling_study(
    setup: &Setup,
    family: Family,
    sizes: &[(usize, usize)],
    times: &[f64],
    n_steps: usize,
) -> Result<Vec<ScalingRow>> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no annealing times".into()));
    }
    sizes
        .iter()
        .map(|&size| {
            let config = family.config(size, setup)?;
            let runs = anneal_all(setup, &config, times, n_steps)?;
            let per_time: Vec<(f64, f64, f64)> = times
                .iter()
                .zip(&runs)
                .map(|(&t, r)| (t, r.final_p_solution(), r.final_p_invalid()))
                .collect();
            let best = per_time
                .iter()
                .copied()
                .fold(per_time[0], |b, x| if x.1 > b.1 { x } else { b });
            let mut sorted = per_time.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let invalid_non_decreasing = sorted.windows(2).all(|w| w[1].2 >= w[0].2);
            Ok(ScalingRow {
                family,
                rows: size.0,
                cols: size.1,
                n_qubits: config.n_qubits(),
                best_t_ms: best.0,
                p_solution: best.1,
                p_invalid: best.2,
                per_time,
                invalid_non_decreasing,
            })
        })
        .collect()
}

/// Ising parameters of the 3D stack at one point of the ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StackPoint {
    pub s: f64,
    pub e_kv_cm: f64,
    /// intra-qubit J⊥ of the first qubit
    pub delta: f64,
    /// nearest-neighbour coupling inside the bottom layer
    pub j_intra_layer: f64,
    /// coupling between vertically adjacent qubits of layers 0 and 1
    pub j_inter_layer: f64,
    pub h_bottom: f64,
    pub h_middle: f64,
    pub h_top: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StackShape {
    pub layers: usize,
    pub rows: usize,
    pub cols: usize,
    /// layer spacing; r1 + r2 when unset
    pub pitch_nm: Option<f64>,
}

impl Default for StackShape {
    fn default() -> Self {
        StackShape {
            layers: 3,
            rows: 2,
            cols: 2,
            pitch_nm: None,
        }
    }
}

pub fn stack_3d_config(setup: &Setup, shape: StackShape) -> Result<LatticeConfig<f64>> {
    if shape.layers < 2 || shape.cols < 2 {
        return Err(Error::InvalidArgument("stack needs >= 2 layers and >= 2 columns".into()));
    }
    LatticeConfig::stack_3d(
        shape.layers,
        shape.rows,
        shape.cols,
        setup.r1_nm,
        setup.r2_nm,
        shape.pitch_nm.unwrap_or(setup.r1_nm + setup.r2_nm),
        setup.b_mt,
    )
}

pub fn stack_3d_parameters(setup: &Setup, shape: StackShape, points: usize) -> Result<Vec<StackPoint>> {
    let config = stack_3d_config(setup, shape)?;
    let builder = TableBuilder::new(&setup.model, &config)?;
    let per_layer = shape.rows * shape.cols;
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            let e = setup.field_at(s);
            let t = builder.tables(e)?;
            let ising = ising_from_tables(&config, &t);
            let mid = (shape.layers / 2) * per_layer;
            Ok(StackPoint {
                s,
                e_kv_cm: e,
                delta: t.j_perp[(0, 1)],
                j_intra_layer: ising.j[(0, 1)],
                j_inter_layer: ising.j[(0, per_layer)],
                h_bottom: ising.h[0],
                h_middle: ising.h[mid],
                h_top: ising.h[(shape.layers - 1) * per_layer],
            })
        })
        .collect()
}

/// Ising model of a lattice at the end of the ramp.
pub fn final_ising(setup: &Setup, config: &LatticeConfig<f64>) -> Result<IsingModel<f64>> {
    effective_ising(&setup.model, config, setup.e_end)
}
