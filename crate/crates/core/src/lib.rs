//! Simulation and analysis of system-environment states that spread classical
//! information about a system qubit into environment fragments.
//!
//! Layers, bottom up: dense complex linear algebra ([`linalg`]), gate-level
//! circuits ([`circuit`]), noisy finite-shot sampling ([`sampler`]), Pauli
//! tomography with readout mitigation ([`tomography`]), information measures
//! over fragments ([`info`]), and file-emitting runs ([`pipeline`]).

pub mod circuit;
pub mod error;
pub mod info;
pub mod linalg;
pub mod pipeline;
pub mod sampler;
pub mod tomography;

pub use circuit::{build_darwinism_circuit, theoretical_state, Circuit, DarwinismConfig, GateSpec, Variant};
pub use error::{Error, Result};
pub use info::{discord, fragment_sweep, holevo, mutual_information, FragmentSpec, InfoReport, InfoRow, Source};
pub use linalg::{ComplexMatrix, DensityMatrix, EntropyMode, Pauli, StateVector};
pub use pipeline::{RunConfig, OutputFormat};
pub use sampler::{CountsTable, MeasurementSetting, NoiseModel};
pub use tomography::{CalibrationData, ReconstructionReport, StokesTable};
