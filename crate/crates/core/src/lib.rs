//! Quantum annealing with pairs of ²Σ molecules as qubits.
//!
//! The crate covers the single-molecule fine structure in co-aligned dc
//! fields ([`molecule`]), field-dressed dipole-dipole couplings
//! ([`coupling`]), qubit-pair lattices and their effective Ising models
//! ([`lattice`]), fixed-excitation annealing dynamics ([`dynamics`]) and the
//! scripted end-to-end runs in [`experiments`].
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

pub mod cli;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod molecule;
pub mod output;
pub mod scalar;
pub mod search;
pub mod sector;
pub mod svg;
pub mod wigner;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MoleculeConstants = molecule::MoleculeConstants<f64>;
pub type MoleculeModel = molecule::MoleculeModel<f64>;
pub type FieldPoint = molecule::FieldPoint<f64>;
pub type PairGeometry = coupling::PairGeometry<f64>;
pub type PairCouplings = coupling::PairCouplings<f64>;
pub type LatticeConfig = lattice::LatticeConfig<f64>;
pub type CouplingTables = lattice::CouplingTables<f64>;
pub type IsingModel = lattice::IsingModel<f64>;
pub type Schedule = dynamics::Schedule<f64>;
pub type AnnealResult = dynamics::AnnealResult<f64>;
