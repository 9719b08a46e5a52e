//! Tilted-17 surface code (distance 3) memory cycle.
//!
//! Nine data qubits sit on a 3x3 grid in row-major order (0..8); qubit 9 is
//! the single measurement ancilla, reused for all eight stabilizers. One QEC
//! cycle runs three identical rounds of the eight stabilizer measurements,
//! takes a per-bit majority vote over the rounds, decodes each syndrome half
//! with a lookup table built by exhaustive minimum-weight search, and applies
//! the corrections as noiseless frame operations.
//!
//! Each stabilizer is read out through the ancilla with a W - couplings - W
//! sandwich: W on the ancilla, one controlled-Pauli per support qubit (CNOT
//! from the ancilla for X-type stabilizers, CZ for Z-type), W again, then a
//! computational-basis measurement where outcome 0 means eigenvalue +1. The
//! coupling orders of the weight-4 stabilizers are chosen so that any single
//! ancilla fault propagates to a data error the decoder handles safely (the
//! "hook" pairs differ from a correctable error by a stabilizer);
//! [`Surface17Code::verify_fault_tolerance`] checks this exhaustively.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gates::{self, TargetPauli};
use crate::noise::{self, NoiseModel, RngStream};
use crate::statevector::{Pauli, PauliString, StateVector, NORM_TOL};
use crate::{CycleRecord, QecCode, Result, SimError};

/// Number of data qubits.
pub const N_DATA: usize = 9;
/// The reusable measurement ancilla.
pub const ANCILLA: usize = 9;
/// Total register size.
pub const N_TOTAL: usize = 10;
/// Syndrome measurement rounds per cycle (majority vote over these).
pub const ROUNDS: usize = 3;

/// X-type stabilizer supports (detect Z errors), ascending member order.
pub const X_STABILIZERS: [&[usize]; 4] = [&[0, 1, 3, 4], &[1, 2], &[6, 7], &[4, 5, 7, 8]];
/// Z-type stabilizer supports (detect X errors), ascending member order.
pub const Z_STABILIZERS: [&[usize]; 4] = [&[0, 3], &[1, 2, 4, 5], &[3, 4, 6, 7], &[5, 8]];

/// Ancilla coupling order for each X-type stabilizer. Weight-4 orders put the
/// late-coupled pair on one grid row, so an ancilla X fault mid-measurement
/// leaves a row pair that completes to the stabilizer after decoding.
pub const X_SCHEDULE: [&[usize]; 4] = [&[0, 1, 3, 4], &[1, 2], &[6, 7], &[4, 5, 7, 8]];
/// Ancilla coupling order for each Z-type stabilizer; the late-coupled pairs
/// sit on grid columns, which is the benign direction for Z hooks.
pub const Z_SCHEDULE: [&[usize]; 4] = [&[0, 3], &[2, 5, 1, 4], &[4, 7, 3, 6], &[5, 8]];

/// Logical X support (left grid column).
pub const LOGICAL_X: [usize; 3] = [0, 3, 6];
/// Logical Z support (top grid row).
pub const LOGICAL_Z: [usize; 3] = [0, 1, 2];

/// Per-cycle syndrome history for the surface code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceCycleRecord {
    /// One 8-bit syndrome per round: X-type stabilizer bits then Z-type bits.
    pub round_syndromes: Vec<[u8; 8]>,
    /// Per-bit majority over the rounds.
    pub consensus: [u8; 8],
    /// Labels of the applied corrections.
    pub corrections: Vec<String>,
    /// Non-identity stochastic fault insertions, as Pauli labels.
    pub injected_faults: Vec<String>,
}

/// A single Pauli injected on the ancilla at a specific schedule slot, used
/// by the fault-tolerance verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaInjection {
    /// Global slot index within one cycle; see [`Surface17Code::slot_count`].
    pub slot: usize,
    pub pauli: Pauli,
}

/// A detected fault-tolerance violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FtViolation {
    pub slot: usize,
    pub pauli: Pauli,
    /// Squared overlap with the ideal encoded state after the faulty cycle
    /// plus one clean follow-up cycle.
    pub fidelity_sq: f64,
}

/// The tilted-17 surface code with its decoder tables and coupling schedules.
#[derive(Debug, Clone)]
pub struct Surface17Code {
    logical_zero: StateVector,
    logical_one: StateVector,
    /// Syndrome (over Z-type stabilizers) -> X correction support.
    x_corrections: [Vec<usize>; 16],
    /// Syndrome (over X-type stabilizers) -> Z correction support.
    z_corrections: [Vec<usize>; 16],
    x_schedule: [Vec<usize>; 4],
    z_schedule: [Vec<usize>; 4],
}

impl Default for Surface17Code {
    fn default() -> Self {
        Self::new()
    }
}

/// 4-bit syndrome of an error support against a stabilizer set: bit i is the
/// overlap parity with stabilizer i.
fn syndrome_of(support: &[usize], stabilizers: &[&[usize]; 4]) -> usize {
    let mut s = 0usize;
    for (i, stab) in stabilizers.iter().enumerate() {
        let overlap = support.iter().filter(|q| stab.contains(q)).count();
        s |= (overlap & 1) << i;
    }
    s
}

/// Builds the lookup decoder for one error species by exhaustive search in
/// order of increasing weight, lexicographic within a weight; the first
/// support found for a syndrome wins, which fixes all tie-breaks.
fn build_decoder(stabilizers: &[&[usize]; 4]) -> [Vec<usize>; 16] {
    let mut supports: Vec<Vec<usize>> = (0..1usize << N_DATA)
        .map(|mask| (0..N_DATA).filter(|q| mask >> q & 1 == 1).collect())
        .collect();
    supports.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut table: [Option<Vec<usize>>; 16] = Default::default();
    for support in supports {
        let s = syndrome_of(&support, stabilizers);
        if table[s].is_none() {
            table[s] = Some(support);
        }
    }
    table.map(|t| t.expect("every 4-bit syndrome is reachable"))
}

/// |0_L>: uniform superposition over the 16 bitmasks of the X-type stabilizer
/// group, applied to |0>^9 (projector construction).
fn logical_zero_state() -> StateVector {
    let mut masks = vec![0usize];
    for support in X_STABILIZERS {
        let g: usize = support.iter().map(|&q| 1usize << q).sum();
        let mut next = Vec::with_capacity(masks.len() * 2);
        for &m in &masks {
            next.push(m);
            next.push(m ^ g);
        }
        masks = next;
    }
    masks.sort_unstable();
    masks.dedup();
    assert_eq!(masks.len(), 16);
    let amp = Complex64::new(1.0 / (masks.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; 1 << N_DATA];
    for m in masks {
        amps[m] = amp;
    }
    StateVector::from_amplitudes(N_DATA, amps).expect("logical zero")
}

impl Surface17Code {
    pub fn new() -> Self {
        Self::with_schedules(
            X_SCHEDULE.map(|s| s.to_vec()),
            Z_SCHEDULE.map(|s| s.to_vec()),
        )
    }

    /// Constructor with explicit coupling orders; used to demonstrate that a
    /// bad order breaks fault tolerance. Orders must be permutations of the
    /// stabilizer supports.
    pub fn with_schedules(x_schedule: [Vec<usize>; 4], z_schedule: [Vec<usize>; 4]) -> Self {
        for (sched, stabs) in [(&x_schedule, &X_STABILIZERS), (&z_schedule, &Z_STABILIZERS)] {
            for (order, support) in sched.iter().zip(stabs.iter()) {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, *support, "schedule must permute the support");
            }
        }
        let logical_zero = logical_zero_state();
        let mut logical_one = logical_zero.clone();
        logical_one
            .apply_pauli(&PauliString::from_support(N_DATA, &LOGICAL_X, Pauli::X))
            .expect("X_L application");
        Self {
            logical_zero,
            logical_one,
            x_corrections: build_decoder(&Z_STABILIZERS),
            z_corrections: build_decoder(&X_STABILIZERS),
            x_schedule,
            z_schedule,
        }
    }

    /// Ideal encoding: alpha |0_L> + beta |1_L> on data qubits, ancilla |0>.
    pub fn encode(&self, alpha: Complex64, beta: Complex64) -> Result<StateVector> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::Config(format!(
                "unnormalized logical input: |a|^2 + |b|^2 = {norm}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; 1 << N_TOTAL];
        for (i, (&a0, &a1)) in self
            .logical_zero
            .amplitudes()
            .iter()
            .zip(self.logical_one.amplitudes())
            .enumerate()
        {
            amps[i] = alpha * a0 + beta * a1;
        }
        StateVector::from_amplitudes(N_TOTAL, amps)
    }

    /// The X-error correction support for a Z-stabilizer syndrome.
    pub fn lookup_decode_x(&self, syndrome: [u8; 4]) -> &[usize] {
        &self.x_corrections[pack(syndrome)]
    }

    /// The Z-error correction support for an X-stabilizer syndrome.
    pub fn lookup_decode_z(&self, syndrome: [u8; 4]) -> &[usize] {
        &self.z_corrections[pack(syndrome)]
    }

    /// Number of ancilla injection slots in one full cycle.
    pub fn slot_count(&self) -> usize {
        let per_round: usize = self
            .x_schedule
            .iter()
            .chain(&self.z_schedule)
            .map(|order| order.len() + 3)
            .sum();
        ROUNDS * per_round
    }

    /// One stabilizer readout through the ancilla. `slot` advances through
    /// the injection points: before the first W, after it, after each
    /// coupling, and after the second W (just before measurement).
    #[allow(clippy::too_many_arguments)]
    fn measure_one(
        &self,
        state: &mut StateVector,
        order: &[usize],
        kind: TargetPauli,
        noise: &NoiseModel,
        rng: &mut RngStream,
        slot: &mut usize,
        injection: Option<AncillaInjection>,
    ) -> Result<u8> {
        let hit = |state: &mut StateVector, slot: &mut usize| -> Result<()> {
            if let Some(inj) = injection {
                if inj.slot == *slot {
                    state.apply_pauli(&PauliString::single(N_TOTAL, ANCILLA, inj.pauli))?;
                }
            }
            *slot += 1;
            Ok(())
        };
        hit(state, slot)?;
        noise::apply_noisy_gate(state, &gates::hadamard_w(ANCILLA), noise, rng)?;
        hit(state, slot)?;
        for &data in order {
            let gate = match kind {
                TargetPauli::X => gates::cnot(ANCILLA, data)?,
                TargetPauli::Z => gates::cz(ANCILLA, data)?,
            };
            noise::apply_noisy_gate(state, &gate, noise, rng)?;
            hit(state, slot)?;
        }
        noise::apply_noisy_gate(state, &gates::hadamard_w(ANCILLA), noise, rng)?;
        hit(state, slot)?;
        let u = rng.uniform();
        let bit = state.measure_qubit(ANCILLA, u)?;
        state.reset_qubit(ANCILLA)?;
        Ok(bit)
    }

    /// One round of all eight stabilizers (X-type then Z-type). Under the
    /// stochastic Pauli model, faults are injected on every data qubit before
    /// each stabilizer measurement.
    fn stabilizer_round(
        &self,
        state: &mut StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
        slot: &mut usize,
        injection: Option<AncillaInjection>,
        record: &mut SurfaceCycleRecord,
    ) -> Result<[u8; 8]> {
        let mut bits = [0u8; 8];
        let all_data: Vec<usize> = (0..N_DATA).collect();
        let schedules = self
            .x_schedule
            .iter()
            .map(|o| (o, TargetPauli::X))
            .chain(self.z_schedule.iter().map(|o| (o, TargetPauli::Z)));
        for (i, (order, kind)) in schedules.enumerate() {
            if let NoiseModel::StochasticPauli { p } = *noise {
                let applied = noise::inject_pauli_faults(state, &all_data, p, rng)?;
                if !applied.is_identity() {
                    record.injected_faults.push(applied.label());
                }
            }
            bits[i] = self.measure_one(state, order, kind, noise, rng, slot, injection)?;
        }
        Ok(bits)
    }

    /// One full QEC cycle: three rounds, per-bit majority vote, lookup
    /// decoding of both syndrome halves, noiseless corrections.
    pub fn single_shot_cycle(
        &self,
        state: &mut StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
        injection: Option<AncillaInjection>,
    ) -> Result<SurfaceCycleRecord> {
        let mut record = SurfaceCycleRecord {
            round_syndromes: Vec::with_capacity(ROUNDS),
            consensus: [0; 8],
            corrections: Vec::new(),
            injected_faults: Vec::new(),
        };
        let mut slot = 0usize;
        for _ in 0..ROUNDS {
            let bits = self.stabilizer_round(state, noise, rng, &mut slot, injection, &mut record)?;
            record.round_syndromes.push(bits);
        }
        for bit in 0..8 {
            let votes: u8 = record.round_syndromes.iter().map(|r| r[bit]).sum();
            record.consensus[bit] = u8::from(votes >= 2);
        }
        let x_syndrome: [u8; 4] = record.consensus[0..4].try_into().unwrap();
        let z_syndrome: [u8; 4] = record.consensus[4..8].try_into().unwrap();
        // X-type syndrome bits flag Z errors and vice versa.
        let z_fix = self.lookup_decode_z(x_syndrome).to_vec();
        let x_fix = self.lookup_decode_x(z_syndrome).to_vec();
        for (support, letter) in [(z_fix, Pauli::Z), (x_fix, Pauli::X)] {
            if support.is_empty() {
                continue;
            }
            let p = PauliString::from_support(N_TOTAL, &support, letter);
            record.corrections.push(p.label());
            state.apply_pauli(&p)?;
        }
        Ok(record)
    }

    /// Exhaustively injects every single ancilla Pauli at every schedule slot
    /// of one cycle, follows with one clean cycle, and reports every case
    /// whose final state is not the ideal encoded input (up to global phase).
    /// An empty result certifies the coupling schedule.
    pub fn verify_fault_tolerance(&self) -> Result<Vec<FtViolation>> {
        let alpha = Complex64::new(0.6, 0.0);
        let beta = Complex64::new(0.48, 0.64);
        let ideal = self.encode(alpha, beta)?;
        let mut violations = Vec::new();
        for slot in 0..self.slot_count() {
            for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut state = self.encode(alpha, beta)?;
                let mut rng = RngStream::new(0, 0);
                self.single_shot_cycle(
                    &mut state,
                    &NoiseModel::None,
                    &mut rng,
                    Some(AncillaInjection { slot, pauli }),
                )?;
                self.single_shot_cycle(&mut state, &NoiseModel::None, &mut rng, None)?;
                let f2 = state.inner_product(&ideal)?.norm_sqr();
                if (f2 - 1.0).abs() > 1e-10 {
                    violations.push(FtViolation {
                        slot,
                        pauli,
                        fidelity_sq: f2,
                    });
                }
            }
        }
        Ok(violations)
    }
}

fn pack(syndrome: [u8; 4]) -> usize {
    syndrome
        .iter()
        .enumerate()
        .map(|(i, &b)| (usize::from(b != 0)) << i)
        .sum()
}

/// Both decoder tables as CSV rows: species, 4-bit syndrome, correction.
pub fn lookup_table_csv(code: &Surface17Code) -> String {
    let mut out = String::from("species,s0,s1,s2,s3,correction\n");
    for (species, table, letter) in [
        ("x_error", &code.x_corrections, 'X'),
        ("z_error", &code.z_corrections, 'Z'),
    ] {
        for (s, support) in table.iter().enumerate() {
            let name: String = if support.is_empty() {
                "I".into()
            } else {
                support.iter().map(|q| format!("{letter}{q}")).collect()
            };
            out.push_str(&format!(
                "{species},{},{},{},{},{name}\n",
                s & 1,
                (s >> 1) & 1,
                (s >> 2) & 1,
                (s >> 3) & 1,
            ));
        }
    }
    out
}

impl QecCode for Surface17Code {
    fn name(&self) -> &'static str {
        "surface17"
    }
    fn n_data(&self) -> usize {
        N_DATA
    }
    fn n_total(&self) -> usize {
        N_TOTAL
    }
    fn logical_zero(&self) -> &StateVector {
        &self.logical_zero
    }
    fn logical_one(&self) -> &StateVector {
        &self.logical_one
    }
    fn x_exclusions(&self) -> &[usize] {
        // X2 = X1 and X7 = X6 on the codespace (they differ by the weight-2
        // X stabilizers), so their kets are dropped from the subspace bases.
        &[2, 7]
    }
    fn z_exclusions(&self) -> &[usize] {
        // Z3 = Z0 and Z8 = Z5 likewise.
        &[3, 8]
    }
    fn encode(&self, alpha: Complex64, beta: Complex64) -> Result<StateVector> {
        Surface17Code::encode(self, alpha, beta)
    }
    fn run_cycle(
        &self,
        state: &mut StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<CycleRecord> {
        Ok(CycleRecord::Surface17(self.single_shot_cycle(
            state, noise, rng, None,
        )?))
    }
    fn fault_draws_per_clean_cycle(&self) -> usize {
        // 3 rounds x 8 stabilizer measurements x 9 qubits x 2 draws
        ROUNDS * 8 * N_DATA * 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn generic_input() -> (Complex64, Complex64) {
        (Complex64::new(0.6, 0.0), Complex64::new(0.48, 0.64))
    }

    #[test]
    fn logical_zero_matches_stabilizer_group_masks() {
        // The sixteen computational codewords of |0_L>, written as bitmasks
        // with bit q = data qubit q.
        let expect: [usize; 16] = [
            0, 6, 27, 29, 192, 198, 219, 221, 363, 365, 368, 374, 427, 429, 432, 438,
        ];
        let code = Surface17Code::new();
        let amp = 0.25;
        for (i, a) in code.logical_zero().amplitudes().iter().enumerate() {
            if expect.contains(&i) {
                assert_abs_diff_eq!(a.re, amp, epsilon = 1e-13);
                assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-13);
            } else {
                assert!(a.norm() < 1e-13, "unexpected amplitude at {i}");
            }
        }
    }

    #[test]
    fn logical_states_are_stabilizer_eigenstates() {
        let code = Surface17Code::new();
        for state in [code.logical_zero(), code.logical_one()] {
            for (supports, letter) in [
                (&X_STABILIZERS, Pauli::X),
                (&Z_STABILIZERS, Pauli::Z),
            ] {
                for support in supports.iter() {
                    let mut s = state.clone();
                    s.apply_pauli(&PauliString::from_support(N_DATA, support, letter))
                        .unwrap();
                    let ov = s.inner_product(state).unwrap();
                    assert_abs_diff_eq!(ov.re, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn logical_operators_act_correctly() {
        let code = Surface17Code::new();
        // Z_L fixes |0_L> and negates |1_L>.
        let zl = PauliString::from_support(N_DATA, &LOGICAL_Z, Pauli::Z);
        let mut s = code.logical_zero().clone();
        s.apply_pauli(&zl).unwrap();
        assert_abs_diff_eq!(
            s.inner_product(code.logical_zero()).unwrap().re,
            1.0,
            epsilon = 1e-12
        );
        let mut s = code.logical_one().clone();
        s.apply_pauli(&zl).unwrap();
        assert_abs_diff_eq!(
            s.inner_product(code.logical_one()).unwrap().re,
            -1.0,
            epsilon = 1e-12
        );
        // And the logical kets are orthogonal.
        assert!(code
            .logical_zero()
            .inner_product(code.logical_one())
            .unwrap()
            .norm()
            < 1e-13);
    }

    #[test]
    fn weight_two_stabilizer_degeneracies() {
        let code = Surface17Code::new();
        for (a, b, letter) in [
            (1usize, 2usize, Pauli::X),
            (6, 7, Pauli::X),
            (0, 3, Pauli::Z),
            (5, 8, Pauli::Z),
        ] {
            let mut sa = code.logical_zero().clone();
            sa.apply_pauli(&PauliString::single(N_DATA, a, letter)).unwrap();
            let mut sb = code.logical_zero().clone();
            sb.apply_pauli(&PauliString::single(N_DATA, b, letter)).unwrap();
            let ov = sa.inner_product(&sb).unwrap();
            assert_abs_diff_eq!(ov.re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_cycle_is_identity_with_zero_syndromes() {
        let code = Surface17Code::new();
        let (a, b) = generic_input();
        let mut state = code.encode(a, b).unwrap();
        let ideal = state.clone();
        let mut rng = RngStream::new(7, 0);
        let record = code
            .single_shot_cycle(&mut state, &NoiseModel::None, &mut rng, None)
            .unwrap();
        assert_eq!(record.round_syndromes.len(), ROUNDS);
        for r in &record.round_syndromes {
            assert_eq!(*r, [0; 8]);
        }
        assert!(record.corrections.is_empty());
        let f2 = state.inner_product(&ideal).unwrap().norm_sqr();
        assert_abs_diff_eq!(f2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn x4_error_syndrome_and_repair() {
        // X on the grid center trips the two adjacent weight-4 Z plaquettes:
        // Z-type syndrome (0,1,1,0); the decoder returns it exactly.
        let code = Surface17Code::new();
        assert_eq!(code.lookup_decode_x([0, 1, 1, 0]), &[4]);
        let (a, b) = generic_input();
        let mut state = code.encode(a, b).unwrap();
        state
            .apply_pauli(&PauliString::single(N_TOTAL, 4, Pauli::X))
            .unwrap();
        let mut rng = RngStream::new(7, 0);
        let record = code
            .single_shot_cycle(&mut state, &NoiseModel::None, &mut rng, None)
            .unwrap();
        assert_eq!(&record.consensus[4..8], &[0, 1, 1, 0]);
        let ideal = code.encode(a, b).unwrap();
        let f2 = state.inner_product(&ideal).unwrap().norm_sqr();
        assert_abs_diff_eq!(f2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_27_single_paulis_repaired() {
        let code = Surface17Code::new();
        let (a, b) = generic_input();
        let ideal = code.encode(a, b).unwrap();
        for q in 0..N_DATA {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut state = code.encode(a, b).unwrap();
                state.apply_pauli(&PauliString::single(N_TOTAL, q, p)).unwrap();
                let mut rng = RngStream::new(7, 0);
                code.single_shot_cycle(&mut state, &NoiseModel::None, &mut rng, None)
                    .unwrap();
                let f2 = state.inner_product(&ideal).unwrap().norm_sqr();
                assert!((f2 - 1.0).abs() < 1e-10, "{p:?} on qubit {q}: F^2 = {f2}");
            }
        }
    }

    #[test]
    fn decoder_goldens() {
        let code = Surface17Code::new();
        // Trivial syndrome: no correction.
        assert!(code.lookup_decode_x([0, 0, 0, 0]).is_empty());
        assert!(code.lookup_decode_z([0, 0, 0, 0]).is_empty());
        // Single-bit syndromes pick the lowest-index matching qubit
        // (degenerate partners share a column).
        assert_eq!(code.lookup_decode_x([1, 0, 0, 0]), &[0]);
        assert_eq!(code.lookup_decode_x([0, 1, 0, 0]), &[1]);
        assert_eq!(code.lookup_decode_x([0, 0, 1, 0]), &[6]);
        assert_eq!(code.lookup_decode_x([0, 0, 0, 1]), &[8]);
        assert_eq!(code.lookup_decode_z([1, 0, 0, 0]), &[0]);
        assert_eq!(code.lookup_decode_z([0, 0, 0, 1]), &[5]);
        // A two-bit syndrome with no single-qubit match falls to weight 2.
        assert_eq!(code.lookup_decode_x([1, 1, 0, 0]), &[0, 1]);
        // Every correction reproduces its own syndrome.
        for s in 0..16usize {
            let syndrome = [
                (s & 1) as u8,
                ((s >> 1) & 1) as u8,
                ((s >> 2) & 1) as u8,
                ((s >> 3) & 1) as u8,
            ];
            assert_eq!(syndrome_of(code.lookup_decode_x(syndrome), &Z_STABILIZERS), s);
            assert_eq!(syndrome_of(code.lookup_decode_z(syndrome), &X_STABILIZERS), s);
        }
    }

    #[test]
    fn majority_vote_overrides_single_flipped_round() {
        // Z on the ancilla right before the second W of a round-1 X-type
        // stabilizer flips that one readout; the majority over three rounds
        // must discard it and apply no correction.
        let code = Surface17Code::new();
        let (a, b) = generic_input();
        let mut state = code.encode(a, b).unwrap();
        let ideal = state.clone();
        let mut rng = RngStream::new(7, 0);
        // Slot 5 is after the fourth coupling of the first stabilizer.
        let record = code
            .single_shot_cycle(
                &mut state,
                &NoiseModel::None,
                &mut rng,
                Some(AncillaInjection {
                    slot: 5,
                    pauli: Pauli::Z,
                }),
            )
            .unwrap();
        assert_eq!(record.round_syndromes[0][0], 1);
        assert_eq!(record.round_syndromes[1][0], 0);
        assert_eq!(record.consensus, [0; 8]);
        assert!(record.corrections.is_empty());
        let f2 = state.inner_product(&ideal).unwrap().norm_sqr();
        assert_abs_diff_eq!(f2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn schedule_passes_fault_tolerance_check() {
        let code = Surface17Code::new();
        let violations = code.verify_fault_tolerance().unwrap();
        assert!(
            violations.is_empty(),
            "unexpected violations: {violations:?}"
        );
    }

    #[test]
    fn bad_coupling_order_fails_fault_tolerance_check() {
        // Coupling the first plaquette as (0,3,1,4) makes the mid-circuit
        // hook X1X4, which decodes to X6 and completes a logical X.
        let mut x_sched = X_SCHEDULE.map(|s| s.to_vec());
        x_sched[0] = vec![0, 3, 1, 4];
        let code = Surface17Code::with_schedules(x_sched, Z_SCHEDULE.map(|s| s.to_vec()));
        let violations = code.verify_fault_tolerance().unwrap();
        assert!(!violations.is_empty());
    }

    #[test]
    fn lookup_table_csv_shape() {
        let code = Surface17Code::new();
        let csv = lookup_table_csv(&code);
        assert_eq!(csv.lines().count(), 1 + 32);
        assert!(csv.contains("x_error,0,1,1,0,X4"));
        assert!(csv.contains("z_error,0,0,0,0,I"));
    }
}
