//! Full-statevector Monte Carlo simulation of fault-tolerant quantum error
//! correction memory cycles.
//!
//! The crate simulates single QEC cycles (and chains of cycles) of the Steane
//! [[7,1,3]] code and the tilted-17 surface code at the wavefunction level,
//! under two error models: stochastic Pauli fault injection and coherent
//! pulse-area (over/under-rotation) noise. Per-trial failure metrics are
//! evaluated directly on the output wavefunction by projecting onto the
//! correctable-error subspaces, so no perfect decode round is needed.
//!
//! Module map:
//! - [`statevector`]: dense complex statevector kernel
//! - [`gates`]: the concrete gate set (axis rotations, CNOT/CZ, cat prep)
//! - [`noise`]: error models and deterministic per-trial RNG streams
//! - [`code_steane`]: Steane [[7,1,3]] memory cycle
//! - [`code_surface17`]: tilted-17 surface code memory cycle
//! - [`metrics`]: failure subspaces and wavefunction metrics
//! - [`harness`]: Monte Carlo driver, histograms, sweeps, and fits

pub mod code_steane;
pub mod code_surface17;
pub mod gates;
pub mod harness;
pub mod metrics;
pub mod noise;
pub mod statevector;

mod error;

pub use error::SimError;

/// Common surface the two codes expose to the metrics engine and the Monte
/// Carlo driver. Code values are immutable and shareable; cycle execution
/// exclusively owns its state and RNG stream.
pub trait QecCode: Sync {
    fn name(&self) -> &'static str;
    /// Number of data qubits (low indices of the register).
    fn n_data(&self) -> usize;
    /// Total register size including ancillas.
    fn n_total(&self) -> usize;
    /// |0_L> on the data qubits only.
    fn logical_zero(&self) -> &statevector::StateVector;
    /// |1_L> on the data qubits only.
    fn logical_one(&self) -> &statevector::StateVector;
    /// Data indices excluded from X-error kets when building subspaces
    /// (surface-code degeneracy; empty for Steane).
    fn x_exclusions(&self) -> &[usize];
    /// Data indices excluded from Z-error kets.
    fn z_exclusions(&self) -> &[usize];
    /// Ideal encoding of alpha |0_L> + beta |1_L> with ancillas in |0>.
    fn encode(
        &self,
        alpha: num_complex::Complex64,
        beta: num_complex::Complex64,
    ) -> Result<statevector::StateVector>;
    /// Runs one full QEC cycle (detection + repair) in place.
    fn run_cycle(
        &self,
        state: &mut statevector::StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<CycleRecord>;
    /// Stochastic-Pauli Bernoulli draws consumed by one fault-free cycle;
    /// used by the harness to pre-scan for fault-free trials.
    fn fault_draws_per_clean_cycle(&self) -> usize;
}

/// Per-cycle syndrome/correction log, code-specific.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum CycleRecord {
    Steane(code_steane::SyndromeRecord),
    Surface17(code_surface17::SurfaceCycleRecord),
}
pub use gates::GateSpec;
pub use metrics::FailureMetrics;
pub use noise::{NoiseModel, RngStream};
pub use statevector::{Pauli, PauliString, StateVector};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SimError>;
