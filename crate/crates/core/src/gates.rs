//! The concrete gate set used by both code circuits.
//!
//! Every gate is described by a Hamiltonian generator that squares to the
//! identity, so evolution has the closed form `cos(a) 1 - i sin(a) G`. All
//! circuit gates run at the nominal angle pi/2, which realizes the target
//! unitary up to a global phase of -i per gate. Global phases are kept:
//! the metrics are phase-insensitive and the coherent interference between
//! fault paths is exactly what is under study.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::statevector::StateVector;
use crate::{Result, SimError};

/// Pauli letter a controlled gate applies on its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetPauli {
    X,
    Z,
}

/// Generator structure of a gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// `G = ux X + uy Y + uz Z` on one qubit, with |u| = 1.
    SingleAxis { qubit: usize, axis: [f64; 3] },
    /// `G = 1 - |1..1><1..1| + |1..1><1..1| (x) P_target` over the control set.
    ControlledPauli {
        controls: Vec<usize>,
        target: usize,
        pauli: TargetPauli,
    },
}

/// A gate as generator + nominal angle, plus a label for fault-location logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    /// omega * t; always pi/2 for gates emitted by the code circuits.
    pub nominal_angle: f64,
    pub label: String,
}

/// Hadamard-like gate W = (X - Z)/sqrt(2); at pi/2 it applies -i W.
pub fn hadamard_w(qubit: usize) -> GateSpec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    GateSpec {
        kind: GateKind::SingleAxis {
            qubit,
            axis: [s, 0.0, -s],
        },
        nominal_angle: std::f64::consts::FRAC_PI_2,
        label: format!("W{qubit}"),
    }
}

/// CNOT(control -> target); at pi/2 it applies -i CNOT.
pub fn cnot(control: usize, target: usize) -> Result<GateSpec> {
    controlled(vec![control], target, TargetPauli::X)
}

/// CZ(control, target); at pi/2 it applies -i CZ. Symmetric in its arguments.
pub fn cz(control: usize, target: usize) -> Result<GateSpec> {
    controlled(vec![control], target, TargetPauli::Z)
}

/// General multi-controlled Pauli (Toffoli-style for two controls). Unused by
/// the code circuits; kept to exercise the projector generator algebra.
pub fn controlled(controls: Vec<usize>, target: usize, pauli: TargetPauli) -> Result<GateSpec> {
    if controls.contains(&target) {
        return Err(SimError::Config(format!(
            "control set {controls:?} overlaps target {target}"
        )));
    }
    let label = match pauli {
        TargetPauli::X => format!("C{controls:?}X{target}"),
        TargetPauli::Z => format!("C{controls:?}Z{target}"),
    };
    Ok(GateSpec {
        kind: GateKind::ControlledPauli {
            controls,
            target,
            pauli,
        },
        nominal_angle: std::f64::consts::FRAC_PI_2,
        label,
    })
}

/// Puts the listed ancilla qubits into the cat state (|0..0> + |1..1>)/sqrt(2)
/// by direct amplitude injection. The preparation is exact by construction
/// (the protocol treats cat preparation as error free), and the data factor
/// is untouched.
pub fn prepare_cat_state(state: &mut StateVector, ancilla: &[usize]) -> Result<()> {
    if ancilla.is_empty() {
        return Err(SimError::Config("empty ancilla list for cat state".into()));
    }
    let mut anc_mask = 0usize;
    for &q in ancilla {
        if q >= state.n_qubits() {
            return Err(SimError::Config(format!(
                "ancilla index {q} out of range for {} qubits",
                state.n_qubits()
            )));
        }
        anc_mask |= 1 << q;
    }
    // Pre: every ancilla in |0>, i.e. no amplitude where any ancilla bit is set.
    let off: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & anc_mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if off.sqrt() > crate::statevector::ENTANGLEMENT_TOL {
        return Err(SimError::ContractViolation(format!(
            "cat preparation requires ancillas in |0> (off mass {off:.3e})"
        )));
    }
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let n = state.amplitudes().len();
    let amps = state.amplitudes_mut();
    for i in 0..n {
        if i & anc_mask == 0 {
            let a = amps[i] * s;
            amps[i] = a;
            amps[i | anc_mask] = a;
        }
    }
    Ok(())
}
