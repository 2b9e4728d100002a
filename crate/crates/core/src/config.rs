//! JSON run configuration. Every dimensioned key carries its unit in the
//! key name; unknown keys are rejected.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{AnnealOptions, PropagatorOptions, DEFAULT_SECTOR_LIMIT, OPT_IN_SECTOR_LIMIT};
use crate::error::{Error, Result};
use crate::experiments::{self, Family, Setup, SweptConstant, ANNEAL_TIMES_MS};
use crate::lattice::{LatticeConfig, QubitPair, Spectator, DEFAULT_B_MT, DEFAULT_R1_NM, DEFAULT_R2_NM};
use crate::molecule::{MoleculeConstants, MoleculeModel, DEFAULT_N_MAX};
use nalgebra::Vector3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    Couplings,
    FieldRange,
    Scan,
    TwoQubit,
    #[serde(rename = "chain_1d")]
    Chain1d,
    #[serde(rename = "lattice_2d")]
    Lattice2d,
    Anneal,
    Scaling,
    #[serde(rename = "stack_3d")]
    Stack3d,
}

impl ExperimentKind {
    /// CLI subcommand that runs this kind.
    pub fn subcommand(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Couplings | ExperimentKind::FieldRange => "couplings",
            ExperimentKind::Scan => "scan",
            ExperimentKind::TwoQubit | ExperimentKind::Chain1d | ExperimentKind::Lattice2d | ExperimentKind::Anneal => {
                "anneal"
            }
            ExperimentKind::Scaling => "scale",
            ExperimentKind::Stack3d => "stack3d",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Couplings => "couplings",
            ExperimentKind::FieldRange => "field_range",
            ExperimentKind::Scan => "scan",
            ExperimentKind::TwoQubit => "two_qubit",
            ExperimentKind::Chain1d => "chain_1d",
            ExperimentKind::Lattice2d => "lattice_2d",
            ExperimentKind::Anneal => "anneal",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Stack3d => "stack_3d",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeBlock {
    /// "SrF" or "SrI"; explicit constants override it
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, rename = "B_e_cm-1", skip_serializing_if = "Option::is_none")]
    pub b_e: Option<f64>,
    #[serde(default, rename = "gamma_SR_cm-1", skip_serializing_if = "Option::is_none")]
    pub gamma_sr: Option<f64>,
    #[serde(default, rename = "d_D", skip_serializing_if = "Option::is_none")]
    pub dipole: Option<f64>,
}

impl MoleculeBlock {
    pub fn constants(&self) -> Result<MoleculeConstants<f64>> {
        let mut c = match self.preset.as_deref() {
            None | Some("SrF") => MoleculeConstants::srf(),
            Some("SrI") => MoleculeConstants::sri(),
            Some(other) => return Err(Error::Config(format!("molecule.preset: unknown molecule {other:?}"))),
        };
        if let Some(n) = &self.name {
            c.name = n.clone();
        }
        if let Some(x) = self.b_e {
            c.b_e = x;
        }
        if let Some(x) = self.gamma_sr {
            c.gamma_sr = x;
        }
        if let Some(x) = self.dipole {
            c.dipole = x;
        }
        c.validate().map_err(|e| Error::Config(format!("molecule: {e}")))?;
        Ok(c)
    }

    fn resolved(&self) -> Result<Self> {
        let c = self.constants()?;
        Ok(MoleculeBlock {
            preset: self.preset.clone(),
            name: Some(c.name),
            b_e: Some(c.b_e),
            gamma_sr: Some(c.gamma_sr),
            dipole: Some(c.dipole),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EMode {
    Auto,
    Manual,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsBlock {
    #[serde(default, rename = "B_mT", skip_serializing_if = "Option::is_none")]
    pub b_mt: Option<f64>,
    #[serde(default, rename = "E_mode", skip_serializing_if = "Option::is_none")]
    pub e_mode: Option<EMode>,
    #[serde(default, rename = "E_start_kV_cm", skip_serializing_if = "Option::is_none")]
    pub e_start: Option<f64>,
    #[serde(default, rename = "E_end_kV_cm", skip_serializing_if = "Option::is_none")]
    pub e_end: Option<f64>,
    /// field grid of spectrum and coupling scans
    #[serde(default, rename = "E_min_kV_cm", skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[serde(default, rename = "E_max_kV_cm", skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[serde(default, rename = "E_points", skip_serializing_if = "Option::is_none")]
    pub e_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeFamily {
    Rectangle,
    #[serde(rename = "chain_1d_af")]
    Chain1dAf,
    #[serde(rename = "chain_1d_fm")]
    Chain1dFm,
    #[serde(rename = "grid_2d")]
    Grid2d,
    #[serde(rename = "stack_3d")]
    Stack3d,
    HeadToHead,
    Cross,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectatorEntry {
    pub molecule: usize,
    pub state: crate::lattice::Spin,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<LatticeFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_nm: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_pairs: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectators: Option<Vec<SpectatorEntry>>,
    #[serde(default, rename = "delta_E_V_m", skip_serializing_if = "Option::is_none")]
    pub delta_e_v_m: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times_ms: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBlock {
    #[serde(default, rename = "R_nm", skip_serializing_if = "Option::is_none")]
    pub r_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_rad: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSeries {
    #[serde(default)]
    pub molecule: MoleculeBlock,
    #[serde(rename = "B_mT")]
    pub b_mt: f64,
    #[serde(rename = "E_min_kV_cm")]
    pub e_min: f64,
    #[serde(rename = "E_max_kV_cm")]
    pub e_max: f64,
    #[serde(rename = "E_points")]
    pub e_points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<SweptConstant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_decade: Option<usize>,
    /// magnetic fields of the field-range scan
    #[serde(default, rename = "B_values_mT", skip_serializing_if = "Option::is_none")]
    pub b_values_mt: Option<Vec<f64>>,
    /// extra molecules for coupling scans
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<CouplingSeries>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<Family>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_in_3x3: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    #[serde(default, rename = "N_max", skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_states: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub molecule: MoleculeBlock,
    #[serde(default)]
    pub fields: FieldsBlock,
    #[serde(default)]
    pub lattice: LatticeBlock,
    #[serde(default)]
    pub schedule: ScheduleBlock,
    #[serde(default)]
    pub pair: PairBlock,
    #[serde(default)]
    pub scan: ScanBlock,
    #[serde(default)]
    pub scaling: ScalingBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
}

const UNIT_SUFFIXES: [&str; 20] = [
    "kV_cm", "V_cm", "V_m", "kV_m", "cm-1", "mT", "T", "G", "nm", "um", "mm", "m", "ms", "us", "s", "Hz", "kHz",
    "rad", "deg", "D",
];

fn stem(key: &str) -> Option<&str> {
    UNIT_SUFFIXES
        .iter()
        .filter_map(|u| key.strip_suffix(u).and_then(|k| k.strip_suffix('_')))
        .max_by_key(|k| k.len())
}

/// Keys accepted in each block, used only for unit diagnostics.
fn known_keys(block: &str) -> &'static [&'static str] {
    match block {
        "molecule" => &["preset", "name", "B_e_cm-1", "gamma_SR_cm-1", "d_D"],
        "fields" => &["B_mT", "E_mode", "E_start_kV_cm", "E_end_kV_cm", "E_min_kV_cm", "E_max_kV_cm", "E_points"],
        "lattice" => &[
            "family", "n_qubits", "rows", "cols", "layers", "r1_nm", "r2_nm", "pitch_nm", "positions_nm",
            "field_axis", "qubit_pairs", "spectators", "delta_E_V_m",
        ],
        "schedule" => &["times_ms", "n_steps", "stop_s"],
        "pair" => &["R_nm", "theta_rad"],
        "scan" => &["constant", "values", "window", "per_decade", "B_values_mT", "series"],
        "series" => &["molecule", "B_mT", "E_min_kV_cm", "E_max_kV_cm", "E_points"],
        _ => &[],
    }
}

fn check_units(block: &str, value: &Value) -> Result<()> {
    let Value::Object(map) = value else { return Ok(()) };
    let known = known_keys(block);
    for (key, v) in map {
        if !known.is_empty() && !known.contains(&key.as_str()) {
            if let Some(s) = stem(key) {
                if let Some(expected) = known.iter().find(|k| stem(k) == Some(s)) {
                    return Err(Error::Config(format!(
                        "{block}.{key}: unit-suffix mismatch, expected key {expected:?}"
                    )));
                }
            }
        }
        match (block, key.as_str()) {
            ("", k) => check_units(k, v)?,
            ("scan", "series") | ("series", "molecule") => {
                let sub = if key == "series" { "series" } else { "molecule" };
                if let Value::Array(items) = v {
                    for it in items {
                        check_units(sub, it)?;
                    }
                } else {
                    check_units(sub, v)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn minimal(experiment: ExperimentKind) -> Self {
        RunConfig {
            experiment,
            output_dir: None,
            molecule: MoleculeBlock::default(),
            fields: FieldsBlock::default(),
            lattice: LatticeBlock::default(),
            schedule: ScheduleBlock::default(),
            pair: PairBlock::default(),
            scan: ScanBlock::default(),
            scaling: ScalingBlock::default(),
            numerics: NumericsBlock::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        check_units("", &value)?;
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("schema violation: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0) || !x.is_finite() => Err(Error::Config(format!("{name} = {x} must be > 0"))),
                _ => Ok(()),
            }
        };
        let non_negative = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x >= 0.0) || !x.is_finite() => Err(Error::Config(format!("{name} = {x} must be >= 0"))),
                _ => Ok(()),
            }
        };
        self.molecule.constants()?;
        positive("fields.B_mT", self.fields.b_mt)?;
        non_negative("fields.E_start_kV_cm", self.fields.e_start)?;
        non_negative("fields.E_end_kV_cm", self.fields.e_end)?;
        non_negative("fields.E_min_kV_cm", self.fields.e_min)?;
        positive("fields.E_max_kV_cm", self.fields.e_max)?;
        if let (Some(a), Some(b)) = (self.fields.e_min, self.fields.e_max) {
            if b <= a {
                return Err(Error::Config("fields.E_max_kV_cm must exceed E_min_kV_cm".into()));
            }
        }
        if self.fields.e_mode == Some(EMode::Manual) && (self.fields.e_start.is_none() || self.fields.e_end.is_none())
        {
            return Err(Error::Config("fields.E_mode = manual needs E_start_kV_cm and E_end_kV_cm".into()));
        }
        positive("lattice.r1_nm", self.lattice.r1_nm)?;
        positive("lattice.r2_nm", self.lattice.r2_nm)?;
        positive("lattice.pitch_nm", self.lattice.pitch_nm)?;
        positive("pair.R_nm", self.pair.r_nm)?;
        if let Some(t) = self.pair.theta_rad {
            if !(0.0..=std::f64::consts::PI).contains(&t) {
                return Err(Error::Config(format!("pair.theta_rad = {t} outside [0, pi]")));
            }
        }
        if let Some(times) = &self.schedule.times_ms {
            if times.is_empty() {
                return Err(Error::Config("schedule.times_ms is empty".into()));
            }
            for &t in times {
                positive("schedule.times_ms", Some(t))?;
            }
        }
        if self.schedule.n_steps == Some(0) {
            return Err(Error::Config("schedule.n_steps must be >= 1".into()));
        }
        if let Some(s) = self.schedule.stop_s {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Config(format!("schedule.stop_s = {s} outside (0, 1]")));
            }
        }
        if self.numerics.n_max == Some(0) {
            return Err(Error::Config("numerics.N_max must be >= 1".into()));
        }
        if let Some(w) = self.scan.window {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::Config("scan.window must be 0 < lo < hi".into()));
            }
        }
        for s in self.scan.series.iter().flatten() {
            s.molecule.constants()?;
            positive("scan.series.B_mT", Some(s.b_mt))?;
            if !(s.e_max > s.e_min && s.e_min >= 0.0) || s.e_points < 2 {
                return Err(Error::Config("scan.series: need 0 <= E_min < E_max and E_points >= 2".into()));
            }
        }
        Ok(())
    }

    pub fn b_mt(&self) -> f64 {
        self.fields.b_mt.unwrap_or(match self.experiment {
            ExperimentKind::Spectrum => 538.0,
            _ => DEFAULT_B_MT,
        })
    }

    pub fn n_max(&self) -> u32 {
        self.numerics.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn model(&self) -> Result<MoleculeModel<f64>> {
        MoleculeModel::new(self.molecule.constants()?, self.n_max())
    }

    pub fn n_steps(&self) -> usize {
        self.schedule.n_steps.unwrap_or(match self.experiment {
            ExperimentKind::Lattice2d => experiments::STEPS_2D,
            _ => experiments::STEPS_1D,
        })
    }

    pub fn times_ms(&self) -> Vec<f64> {
        self.schedule.times_ms.clone().unwrap_or_else(|| match self.experiment {
            ExperimentKind::TwoQubit | ExperimentKind::Chain1d => vec![15.0],
            ExperimentKind::Lattice2d => vec![10.0],
            _ => ANNEAL_TIMES_MS.to_vec(),
        })
    }

    pub fn opt_in_3x3(&self) -> bool {
        self.scaling.opt_in_3x3.unwrap_or(false)
    }

    pub fn anneal_options(&self) -> AnnealOptions {
        let defaults = PropagatorOptions::default();
        AnnealOptions {
            propagator: PropagatorOptions {
                dense_max_dim: self.numerics.dense_max_dim.unwrap_or(defaults.dense_max_dim),
                krylov_tol: self.numerics.krylov_tol.unwrap_or(defaults.krylov_tol),
                ..defaults
            },
            sector_limit: if self.opt_in_3x3() {
                OPT_IN_SECTOR_LIMIT
            } else {
                DEFAULT_SECTOR_LIMIT
            },
            ..AnnealOptions::default()
        }
    }

    /// Ramp endpoints; located automatically unless given explicitly.
    pub fn ramp(&self, model: &MoleculeModel<f64>) -> Result<(f64, f64)> {
        match (self.fields.e_mode, self.fields.e_start, self.fields.e_end) {
            (Some(EMode::Manual), Some(a), Some(b)) | (None, Some(a), Some(b)) => Ok((a, b)),
            (_, a, b) => {
                let wp = experiments::working_point(model, self.b_mt())?;
                Ok((a.unwrap_or(wp.e_perp), b.unwrap_or(wp.e_z)))
            }
        }
    }

    pub fn setup(&self) -> Result<Setup> {
        let model = self.model()?;
        let (e_start, e_end) = self.ramp(&model)?;
        Ok(Setup {
            model,
            b_mt: self.b_mt(),
            e_start,
            e_end,
            r1_nm: self.lattice.r1_nm.unwrap_or(DEFAULT_R1_NM),
            r2_nm: self.lattice.r2_nm.unwrap_or(DEFAULT_R2_NM),
            options: self.anneal_options(),
        })
    }

    /// Electric-field grid (lo, hi, points) of spectrum and coupling runs.
    pub fn e_grid(&self) -> Result<(f64, f64, usize)> {
        let (lo, hi, n) = match self.experiment {
            ExperimentKind::Spectrum => SPECTRUM_GRID,
            _ => COUPLING_GRID,
        };
        let lo = self.fields.e_min.unwrap_or(lo);
        let hi = self.fields.e_max.unwrap_or(hi);
        let n = self.fields.e_points.unwrap_or(n);
        if !(hi > lo) || n < 2 {
            return Err(Error::Config("field grid needs E_max_kV_cm > E_min_kV_cm and E_points >= 2".into()));
        }
        Ok((lo, hi, n))
    }

    pub fn n_states(&self) -> usize {
        self.numerics.n_states.unwrap_or(5)
    }

    pub fn b_values(&self) -> Vec<f64> {
        self.scan
            .b_values_mt
            .clone()
            .unwrap_or_else(|| (0..=8).map(|i| 540.0 + 10.0 * i as f64).collect())
    }

    pub fn field_range_r_nm(&self) -> f64 {
        self.pair.r_nm.unwrap_or(DEFAULT_R2_NM)
    }

    pub fn pair_geometry(&self) -> (f64, f64) {
        (self.pair.r_nm.unwrap_or(500.0), self.pair.theta_rad.unwrap_or(FRAC_PI_2))
    }

    pub fn lattice_family(&self) -> LatticeFamily {
        self.lattice.family.unwrap_or(match self.experiment {
            ExperimentKind::Chain1d => LatticeFamily::Chain1dAf,
            ExperimentKind::Lattice2d => LatticeFamily::Grid2d,
            ExperimentKind::Stack3d => LatticeFamily::Stack3d,
            _ => LatticeFamily::Rectangle,
        })
    }

    /// Geometry described by the lattice block.
    pub fn lattice_config(&self, setup: &Setup) -> Result<LatticeConfig<f64>> {
        let l = &self.lattice;
        let (r1, r2, b) = (setup.r1_nm, setup.r2_nm, setup.b_mt);
        let pitch = l.pitch_nm.unwrap_or(r1 + r2);
        let mut config = match self.lattice_family() {
            LatticeFamily::Rectangle => LatticeConfig::two_qubit(r1, r2, b)?,
            LatticeFamily::Chain1dAf => LatticeConfig::chain_1d_af(l.n_qubits.unwrap_or(6), r1, r2, b)?,
            LatticeFamily::Chain1dFm => LatticeConfig::chain_1d_fm(l.n_qubits.unwrap_or(6), r1, r2, b)?,
            LatticeFamily::Grid2d => LatticeConfig::grid_2d(l.rows.unwrap_or(2), l.cols.unwrap_or(3), r1, r2, b)?,
            LatticeFamily::Stack3d => LatticeConfig::stack_3d(
                l.layers.unwrap_or(3),
                l.rows.unwrap_or(2),
                l.cols.unwrap_or(2),
                r1,
                r2,
                pitch,
                b,
            )?,
            LatticeFamily::HeadToHead => LatticeConfig::head_to_head(r1, pitch, b)?,
            LatticeFamily::Cross => LatticeConfig::cross(r1, r2, b)?,
            LatticeFamily::Explicit => {
                let positions = l
                    .positions_nm
                    .as_ref()
                    .ok_or_else(|| Error::Config("lattice.positions_nm required for explicit lattices".into()))?
                    .iter()
                    .map(|p| Vector3::new(p[0], p[1], p[2]))
                    .collect();
                let axis = l.field_axis.unwrap_or([0.0, 0.0, 1.0]);
                let qubits = l
                    .qubit_pairs
                    .as_ref()
                    .ok_or_else(|| Error::Config("lattice.qubit_pairs required for explicit lattices".into()))?
                    .iter()
                    .map(|p| QubitPair::new(p[0], p[1]))
                    .collect();
                let spectators = l
                    .spectators
                    .iter()
                    .flatten()
                    .map(|s| Spectator {
                        molecule: s.molecule,
                        state: s.state,
                    })
                    .collect();
                LatticeConfig::new(positions, Vector3::new(axis[0], axis[1], axis[2]), qubits, spectators, b)
                    .map_err(|e| Error::Config(format!("lattice: {e}")))?
            }
        };
        if let Some(d) = &l.delta_e_v_m {
            config = config.with_offsets(d.clone()).map_err(|e| Error::Config(format!("lattice.delta_E_V_m: {e}")))?;
        }
        Ok(config)
    }

    /// Copy with every default written out and automatic fields located.
    pub fn resolved(&self) -> Result<Self> {
        let mut r = self.clone();
        r.molecule = self.molecule.resolved()?;
        r.fields.b_mt = Some(self.b_mt());
        r.numerics.n_max = Some(self.n_max());
        let defaults = PropagatorOptions::default();
        r.numerics.dense_max_dim = Some(self.numerics.dense_max_dim.unwrap_or(defaults.dense_max_dim));
        r.numerics.krylov_tol = Some(self.numerics.krylov_tol.unwrap_or(defaults.krylov_tol));
        match self.experiment {
            ExperimentKind::Spectrum => {
                let (lo, hi, n) = self.e_grid()?;
                r.fields.e_min = Some(lo);
                r.fields.e_max = Some(hi);
                r.fields.e_points = Some(n);
                r.numerics.n_states = Some(self.n_states());
            }
            ExperimentKind::Couplings => {
                let (rn, theta) = self.pair_geometry();
                r.pair = PairBlock {
                    r_nm: Some(rn),
                    theta_rad: Some(theta),
                };
                let explicit = self.fields.e_min.is_some() || self.fields.e_max.is_some();
                if !explicit && self.scan.series.is_none() {
                    r.scan.series = Some(default_coupling_series());
                } else if explicit {
                    let (lo, hi, n) = self.e_grid()?;
                    r.fields.e_min = Some(lo);
                    r.fields.e_max = Some(hi);
                    r.fields.e_points = Some(n);
                }
            }
            ExperimentKind::FieldRange => {
                r.scan.b_values_mt = Some(self.b_values());
                r.pair.r_nm = Some(self.field_range_r_nm());
            }
            ExperimentKind::Scan => {
                let (rn, theta) = self.pair_geometry();
                r.pair = PairBlock {
                    r_nm: Some(rn),
                    theta_rad: Some(theta),
                };
                let c = self.scan.constant.unwrap_or(SweptConstant::Dipole);
                r.scan.constant = Some(c);
                if self.scan.values.is_none() {
                    let (lo, hi) = c.window();
                    r.scan.window = Some(self.scan.window.unwrap_or([lo, hi]));
                    r.scan.per_decade = Some(self.scan.per_decade.unwrap_or(25));
                }
            }
            _ => {}
        }
        if self.needs_ramp() {
            let (a, b) = self.ramp(&self.model()?)?;
            r.fields.e_mode = Some(self.fields.e_mode.unwrap_or(EMode::Auto));
            r.fields.e_start = Some(a);
            r.fields.e_end = Some(b);
            r.lattice.r1_nm = Some(self.lattice.r1_nm.unwrap_or(DEFAULT_R1_NM));
            r.lattice.r2_nm = Some(self.lattice.r2_nm.unwrap_or(DEFAULT_R2_NM));
            r.schedule.times_ms = Some(self.times_ms());
            r.schedule.n_steps = Some(self.n_steps());
            r.schedule.stop_s = Some(self.schedule.stop_s.unwrap_or(1.0));
            r.lattice.family = Some(self.lattice_family());
        }
        Ok(r)
    }

    fn needs_ramp(&self) -> bool {
        matches!(
            self.experiment,
            ExperimentKind::TwoQubit
                | ExperimentKind::Chain1d
                | ExperimentKind::Lattice2d
                | ExperimentKind::Anneal
                | ExperimentKind::Scaling
                | ExperimentKind::Stack3d
        )
    }
}

const SPECTRUM_GRID: (f64, f64, usize) = (0.0, 2.0, 201);
const COUPLING_GRID: (f64, f64, usize) = (5.5, 8.5, 121);

/// SrF at 600 mT and SrI at 100 mT, each over the field range of its
/// crossing.
pub fn default_coupling_series() -> Vec<CouplingSeries> {
    let block = |preset: &str| MoleculeBlock {
        preset: Some(preset.into()),
        ..MoleculeBlock::default()
    };
    vec![
        CouplingSeries {
            molecule: block("SrF"),
            b_mt: 600.0,
            e_min: 5.5,
            e_max: 8.5,
            e_points: 121,
        },
        CouplingSeries {
            molecule: block("SrI"),
            b_mt: 100.0,
            e_min: 0.5,
            e_max: 2.0,
            e_points: 121,
        },
    ]
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}
