//! Steane [[7,1,3]] memory cycle.
//!
//! Data qubits 0..6 carry the codeword (the traditional 1-based labels map to
//! indices 0..6); qubits 7..10 are the four Shor-style cat ancillas, reused
//! for every stabilizer measurement. One QEC cycle measures the three X-type
//! stabilizers (which detect Z errors) with a two-round consistency loop,
//! repairs, then does the same with the three Z-type stabilizers for X
//! errors. Repairs are noiseless Pauli frame operations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gates::{self, TargetPauli};
use crate::noise::{self, NoiseModel, RngStream};
use crate::statevector::{Pauli, PauliString, StateVector, NORM_TOL};
use crate::{CycleRecord, QecCode, Result, SimError};

/// Number of data qubits.
pub const N_DATA: usize = 7;
/// Cat ancilla indices.
pub const ANCILLAS: [usize; 4] = [7, 8, 9, 10];
/// Total register size.
pub const N_TOTAL: usize = 11;
/// Consistency-loop hard cap; past it the last round is used as-is.
pub const MAX_ROUNDS: usize = 10;

/// X-type stabilizer supports in table row order (these detect Z errors).
pub const X_STABILIZERS: [[usize; 4]; 3] = [[1, 3, 4, 6], [2, 3, 4, 5], [0, 3, 5, 6]];
/// Z-type stabilizer supports in table row order (these detect X errors).
pub const Z_STABILIZERS: [[usize; 4]; 3] = [[1, 2, 5, 6], [0, 2, 4, 6], [0, 1, 2, 3]];

/// Which repair family a syndrome addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairType {
    /// Syndrome came from the X-type stabilizers; repair is a Z Pauli.
    ZRepair,
    /// Syndrome came from the Z-type stabilizers; repair is an X Pauli.
    XRepair,
}

/// Per-cycle syndrome history and applied corrections.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyndromeRecord {
    /// Consistency rounds of the X-type (Z-error detecting) syndromes.
    pub z_detection_rounds: Vec<[u8; 3]>,
    /// Consistency rounds of the Z-type (X-error detecting) syndromes.
    pub x_detection_rounds: Vec<[u8; 3]>,
    /// Labels of the repairs applied (empty entries omitted).
    pub corrections: Vec<String>,
    /// True if either loop hit the round cap without two agreeing rounds.
    pub round_cap_hit: bool,
    /// Non-identity stochastic fault insertions, as Pauli labels.
    pub injected_faults: Vec<String>,
}

/// The Steane code: stabilizer tables, logical operators, cached logical kets.
#[derive(Debug, Clone)]
pub struct SteaneCode {
    logical_zero: StateVector,
    logical_one: StateVector,
}

impl Default for SteaneCode {
    fn default() -> Self {
        Self::new()
    }
}

impl SteaneCode {
    pub fn new() -> Self {
        let logical_zero = logical_zero_state();
        let mut logical_one = logical_zero.clone();
        logical_one
            .apply_pauli(&PauliString::from_support(
                N_DATA,
                &[0, 1, 2, 3, 4, 5, 6],
                Pauli::X,
            ))
            .expect("X_L application");
        Self {
            logical_zero,
            logical_one,
        }
    }
}

/// |0_L>: the uniform superposition over the 8 even codewords generated by
/// the X-type stabilizers, built by applying the projector product
/// prod_i (1 + g_i)/2 to |0>^7 and normalizing.
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
    assert_eq!(masks.len(), 8);
    let amp = Complex64::new(1.0 / (masks.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; 1 << N_DATA];
    for m in masks {
        amps[m] = amp;
    }
    StateVector::from_amplitudes(N_DATA, amps).expect("logical zero")
}

/// The Table-style 3-bit column for `qubit` against the given stabilizer set.
fn syndrome_column(stabilizers: &[[usize; 4]; 3], qubit: usize) -> [u8; 3] {
    let mut col = [0u8; 3];
    for (row, support) in stabilizers.iter().enumerate() {
        col[row] = u8::from(support.contains(&qubit));
    }
    col
}

/// Maps a 3-bit syndrome to its repair Pauli on the data qubits (identity for
/// 000). The inverse table is built mechanically from the stabilizer supports.
pub fn repair_from_syndrome(syndrome: [u8; 3], repair: RepairType) -> PauliString {
    if syndrome == [0, 0, 0] {
        return PauliString::identity(N_DATA);
    }
    let (stabilizers, letter) = match repair {
        RepairType::ZRepair => (&X_STABILIZERS, Pauli::Z),
        RepairType::XRepair => (&Z_STABILIZERS, Pauli::X),
    };
    for q in 0..N_DATA {
        if syndrome_column(stabilizers, q) == syndrome {
            return PauliString::single(N_DATA, q, letter);
        }
    }
    unreachable!("all 7 nonzero syndromes map to a unique qubit");
}

impl SteaneCode {
    /// Ideal encoding: alpha |0_L> + beta |1_L> on data qubits, ancillas |0>.
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

    /// Measures one weight-4 stabilizer with the cat-state ancilla procedure.
    ///
    /// The cat is prepared ideally, each cat qubit couples to one support
    /// qubit in ascending data order (CNOT from the ancilla for X-type
    /// factors, CZ for Z-type), each ancilla is rotated by W and read out;
    /// the syndrome bit is the parity of the four outcomes. Ancillas are
    /// reset perfectly.
    pub fn measure_stabilizer(
        &self,
        state: &mut StateVector,
        stabilizer: &PauliString,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<(u8, ())> {
        let support: Vec<usize> = (0..stabilizer.n_qubits())
            .filter(|&q| stabilizer.letter(q) != Pauli::I)
            .collect();
        if support.len() != 4 {
            return Err(SimError::UnsupportedGate(format!(
                "stabilizer weight {} unsupported (Steane stabilizers are weight 4)",
                support.len()
            )));
        }
        let letter = stabilizer.letter(support[0]);
        if support.iter().any(|&q| stabilizer.letter(q) != letter) || letter == Pauli::Y {
            return Err(SimError::UnsupportedGate(
                "stabilizer must be a uniform X or Z string".into(),
            ));
        }
        let kind = if letter == Pauli::X {
            TargetPauli::X
        } else {
            TargetPauli::Z
        };
        let mut support4 = [0usize; 4];
        support4.copy_from_slice(&support);
        let bit = self.measure_support(state, &support4, kind, noise, rng)?;
        Ok((bit, ()))
    }

    fn measure_support(
        &self,
        state: &mut StateVector,
        support: &[usize; 4],
        kind: TargetPauli,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<u8> {
        gates::prepare_cat_state(state, &ANCILLAS)?;
        for (k, &data) in support.iter().enumerate() {
            let gate = match kind {
                TargetPauli::X => gates::cnot(ANCILLAS[k], data)?,
                TargetPauli::Z => gates::cz(ANCILLAS[k], data)?,
            };
            noise::apply_noisy_gate(state, &gate, noise, rng)?;
        }
        let mut parity = 0u8;
        for &anc in &ANCILLAS {
            noise::apply_noisy_gate(state, &gates::hadamard_w(anc), noise, rng)?;
        }
        for &anc in &ANCILLAS {
            let u = rng.uniform();
            parity ^= state.measure_qubit(anc, u)?;
            state.reset_qubit(anc)?;
        }
        Ok(parity)
    }

    /// One full QEC cycle: Z-error detection and repair, then X-error
    /// detection and repair, each with the two-round consistency loop.
    pub fn qec_cycle(
        &self,
        state: &mut StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<SyndromeRecord> {
        let mut record = SyndromeRecord {
            z_detection_rounds: Vec::new(),
            x_detection_rounds: Vec::new(),
            corrections: Vec::new(),
            round_cap_hit: false,
            injected_faults: Vec::new(),
        };
        self.detection_block(
            state,
            &X_STABILIZERS,
            TargetPauli::X,
            RepairType::ZRepair,
            noise,
            rng,
            &mut record,
        )?;
        self.detection_block(
            state,
            &Z_STABILIZERS,
            TargetPauli::Z,
            RepairType::XRepair,
            noise,
            rng,
            &mut record,
        )?;
        Ok(record)
    }

    #[allow(clippy::too_many_arguments)]
    fn detection_block(
        &self,
        state: &mut StateVector,
        stabilizers: &[[usize; 4]; 3],
        kind: TargetPauli,
        repair: RepairType,
        noise: &NoiseModel,
        rng: &mut RngStream,
        record: &mut SyndromeRecord,
    ) -> Result<()> {
        let rounds = match repair {
            RepairType::ZRepair => &mut record.z_detection_rounds,
            RepairType::XRepair => &mut record.x_detection_rounds,
        };
        loop {
            let mut syndrome = [0u8; 3];
            for (i, support) in stabilizers.iter().enumerate() {
                if let NoiseModel::StochasticPauli { p } = *noise {
                    let applied = noise::inject_pauli_faults(
                        state,
                        &[0, 1, 2, 3, 4, 5, 6],
                        p,
                        rng,
                    )?;
                    if !applied.is_identity() {
                        record.injected_faults.push(applied.label());
                    }
                }
                syndrome[i] = self.measure_support(state, support, kind, noise, rng)?;
            }
            rounds.push(syndrome);
            let n = rounds.len();
            if n >= 2 && rounds[n - 1] == rounds[n - 2] {
                break;
            }
            if n >= MAX_ROUNDS {
                record.round_cap_hit = true;
                break;
            }
        }
        let last = *rounds.last().expect("at least one round");
        let fix = repair_from_syndrome(last, repair);
        if !fix.is_identity() {
            record.corrections.push(fix.label());
            let full = embed_on_register(&fix);
            state.apply_pauli(&full)?;
        }
        Ok(())
    }
}

/// Widens a data-qubit Pauli string to the full 11-qubit register.
fn embed_on_register(p: &PauliString) -> PauliString {
    let mut full = PauliString::identity(N_TOTAL);
    for q in 0..p.n_qubits() {
        if p.letter(q) != Pauli::I {
            full = full.then(&PauliString::single(N_TOTAL, q, p.letter(q)));
        }
    }
    full
}

/// The six-row syndrome table as CSV (rows = operators, columns = qubits,
/// 1-based labels to match the conventional table layout).
pub fn syndrome_table_csv() -> String {
    let mut out = String::from("operator,q1,q2,q3,q4,q5,q6,q7\n");
    let row_name = |letter: char, support: &[usize; 4]| -> String {
        support
            .iter()
            .map(|&q| format!("{letter}{}", q + 1))
            .collect::<String>()
    };
    for support in &X_STABILIZERS {
        out.push_str(&row_name('X', support));
        for q in 0..N_DATA {
            out.push_str(if support.contains(&q) { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    for support in &Z_STABILIZERS {
        out.push_str(&row_name('Z', support));
        for q in 0..N_DATA {
            out.push_str(if support.contains(&q) { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

impl QecCode for SteaneCode {
    fn name(&self) -> &'static str {
        "steane"
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
        &[]
    }
    fn z_exclusions(&self) -> &[usize] {
        &[]
    }
    fn encode(&self, alpha: Complex64, beta: Complex64) -> Result<StateVector> {
        SteaneCode::encode(self, alpha, beta)
    }
    fn run_cycle(
        &self,
        state: &mut StateVector,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<CycleRecord> {
        Ok(CycleRecord::Steane(self.qec_cycle(state, noise, rng)?))
    }
    fn fault_draws_per_clean_cycle(&self) -> usize {
        // 2 blocks x 2 rounds x 3 stabilizer measurements x 7 qubits x 2 draws
        2 * 2 * 3 * N_DATA * 2
    }
}
