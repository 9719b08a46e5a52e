//! Error models and deterministic per-trial randomness.
//!
//! Two error models are supported. The stochastic Pauli model inserts X and Z
//! errors, each with probability `p`, on the codeword qubits immediately
//! before each syndrome measurement; the insertions are unitary Pauli gates,
//! so the trial evolution stays purely unitary. The pulse-area model rescales
//! every noisy gate's rotation angle by `(1 + sigma * r)` with `r` uniform on
//! the open interval (-1, 1), drawn independently per gate.
//!
//! # Randomness
//!
//! `RngStream` is a counter-based deterministic generator: ChaCha8 keyed by
//! `(master_seed, trial_index)` through a SplitMix64 expansion. Two ChaCha
//! stream counters are used per trial: stream 0 drives fault-location
//! Bernoulli draws, stream 1 drives everything else (input angles,
//! measurement draws, pulse jitter). Draws happen in fixed circuit order, so
//! a trial is bit-reproducible from `(master_seed, trial_index)` regardless
//! of how trials are scheduled across threads. Keeping fault draws on their
//! own stream lets the harness pre-scan a trial's fault pattern without
//! disturbing the measurement stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::statevector::{PauliString, StateVector};
use crate::{GateSpec, Result, SimError};

/// Tagged choice of error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Every gate ideal, no fault insertions.
    None,
    /// X and Z inserted with probability `p` each, per qubit, per fault location.
    StochasticPauli { p: f64 },
    /// Every noisy gate's angle scaled by `1 + sigma * r`, r uniform on (-1, 1).
    PulseArea { sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::StochasticPauli { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(SimError::Config(format!("Pauli rate p = {p} outside [0, 1]")))
                }
            }
            NoiseModel::PulseArea { sigma } => {
                if sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(SimError::Config(format!("jitter sigma = {sigma} negative")))
                }
            }
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial randomness source. See the module docs for the
/// generator family and stream layout.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    trial_index: u64,
    general: ChaCha8Rng,
    faults: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = master_seed ^ trial_index.rotate_left(32) ^ 0xA02B_DBF7_BB3C_0A7C;
        // Mix both inputs through SplitMix64 into the 256-bit ChaCha key.
        let mut acc = master_seed;
        let _ = splitmix64(&mut acc);
        for chunk in key.chunks_mut(8) {
            s ^= splitmix64(&mut acc) ^ trial_index;
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut general = ChaCha8Rng::from_seed(key);
        let mut faults = ChaCha8Rng::from_seed(key);
        general.set_stream(1);
        faults.set_stream(2);
        Self {
            master_seed,
            trial_index,
            general,
            faults,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    /// Uniform in [0, 1) from the general stream (53-bit resolution).
    pub fn uniform(&mut self) -> f64 {
        (self.general.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Bernoulli(p) draw from the dedicated fault stream.
    pub fn fault_bernoulli(&mut self, p: f64) -> bool {
        ((self.faults.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) < p
    }

    /// A clone of the fault stream for look-ahead scanning of fault patterns.
    pub fn fork_fault_scanner(&self) -> FaultScanner {
        FaultScanner {
            faults: self.faults.clone(),
        }
    }

    /// Uniform on the open interval (-1, 1); exact endpoints are rejected.
    pub fn open_symmetric(&mut self) -> f64 {
        loop {
            let r = 2.0 * self.uniform() - 1.0;
            if r > -1.0 && r < 1.0 {
                return r;
            }
        }
    }
}

/// Read-only look-ahead over a trial's fault Bernoulli sequence.
#[derive(Debug, Clone)]
pub struct FaultScanner {
    faults: ChaCha8Rng,
}

impl FaultScanner {
    /// True if any of the next `draws` Bernoulli(p) draws fires.
    pub fn any_fault(&mut self, p: f64, draws: usize) -> bool {
        (0..draws)
            .any(|_| ((self.faults.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) < p)
    }
}

/// Pulse-area scale factor `1 + sigma * r`; one draw per noisy gate.
pub fn sample_pulse_scale(sigma: f64, rng: &mut RngStream) -> f64 {
    if sigma == 0.0 {
        // Still consume the per-gate draw so the stream layout is independent
        // of sigma.
        let _ = rng.open_symmetric();
        return 1.0;
    }
    1.0 + sigma * rng.open_symmetric()
}

/// Applies a circuit gate under the noise model.
///
/// Pulse-area noise rescales the angle; the stochastic Pauli model leaves
/// gates exact (its faults are injected separately at fault locations).
pub fn apply_noisy_gate(
    state: &mut StateVector,
    gate: &GateSpec,
    noise: &NoiseModel,
    rng: &mut RngStream,
) -> Result<()> {
    let angle = match *noise {
        NoiseModel::PulseArea { sigma } => gate.nominal_angle * sample_pulse_scale(sigma, rng),
        _ => gate.nominal_angle,
    };
    state.apply_generated_unitary(gate, angle)
}

/// One stochastic-Pauli fault location: for each listed qubit, applies X with
/// probability `p` and then Z with probability `p`. Returns the realized
/// Pauli string for logging.
pub fn inject_pauli_faults(
    state: &mut StateVector,
    qubits: &[usize],
    p: f64,
    rng: &mut RngStream,
) -> Result<PauliString> {
    let mut applied = PauliString::identity(state.n_qubits());
    for &q in qubits {
        if rng.fault_bernoulli(p) {
            let x = PauliString::single(state.n_qubits(), q, crate::Pauli::X);
            state.apply_pauli(&x)?;
            applied = applied.then(&x);
        }
        if rng.fault_bernoulli(p) {
            let z = PauliString::single(state.n_qubits(), q, crate::Pauli::Z);
            state.apply_pauli(&z)?;
            applied = applied.then(&z);
        }
    }
    Ok(applied)
}

/// Random encoded-input angles: theta uniform on [0, pi), phi on [0, 2 pi).
pub fn random_input_angles(rng: &mut RngStream) -> (f64, f64) {
    let theta = std::f64::consts::PI * rng.uniform();
    let phi = 2.0 * std::f64::consts::PI * rng.uniform();
    (theta, phi)
}
