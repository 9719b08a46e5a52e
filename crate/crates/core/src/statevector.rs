//! Dense complex statevector kernel.
//!
//! Bit convention (fixed across the whole crate): qubit 0 is the
//! least-significant bit of the basis-state index. A bitstring `"10"` puts
//! qubit 0 in |1> and qubit 1 in |0>, i.e. basis index 1.
//!
//! Gates never renormalize; norm drift is treated as a kernel defect.
//! Renormalization happens only inside [`StateVector::measure_qubit`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gates::{GateKind, GateSpec, TargetPauli};
use crate::{Result, SimError};

/// Norm tolerance for states returned by kernel operations.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for entanglement/orthogonality contract checks.
pub const ENTANGLEMENT_TOL: f64 = 1e-10;
/// Below this branch norm, a measurement branch is considered empty.
const COLLAPSE_TOL: f64 = 1e-15;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A Pauli operator on `n` qubits with an overall phase in {1, i, -1, -i}.
///
/// The phase is stored as the exponent `k` of `i^k`, so composition follows
/// the single-qubit algebra exactly (e.g. `XZ = -iY`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
    /// Phase exponent: the operator carries the global phase i^phase_exp.
    phase_exp: u8,
}

impl PauliString {
    /// The identity on `n_qubits` qubits.
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n_qubits],
            phase_exp: 0,
        }
    }

    /// A single Pauli letter on one qubit, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.letters[qubit] = p;
        s
    }

    /// A Pauli with the given letter on every listed qubit.
    pub fn from_support(n_qubits: usize, support: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        for &q in support {
            s.letters[q] = p;
        }
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// The overall phase as a complex unit.
    pub fn phase(&self) -> Complex64 {
        match self.phase_exp & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// The written product `self * other` per qubit, phases included: the
    /// string "X then Z" composes to the operator XZ = -iY.
    pub fn then(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.letters.len(), other.letters.len());
        let mut phase_exp = (self.phase_exp + other.phase_exp) & 3;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&first, &second)| {
                let (p, extra) = mul_pauli(first, second);
                phase_exp = (phase_exp + extra) & 3;
                p
            })
            .collect();
        PauliString { letters, phase_exp }
    }

    /// Text form like `+X.IZ` (phase, then letters for qubits 0..n).
    pub fn label(&self) -> String {
        let phase = match self.phase_exp & 3 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        let mut s = String::from(phase);
        for l in &self.letters {
            s.push(l.symbol());
        }
        s
    }
}

/// Product `a * b` of single-qubit Paulis: returns (letter, phase exponent of i).
fn mul_pauli(a: Pauli, b: Pauli) -> (Pauli, u8) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (p, 0),
        (X, X) | (Y, Y) | (Z, Z) => (I, 0),
        // i^1 = i, i^3 = -i
        (X, Y) => (Z, 1),
        (Y, X) => (Z, 3),
        (Y, Z) => (X, 1),
        (Z, Y) => (X, 3),
        (Z, X) => (Y, 1),
        (X, Z) => (Y, 3),
    }
}

/// Normalized complex amplitude array over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds the computational basis state given by `bits`, where the i-th
    /// character is qubit i's value.
    pub fn new_basis_state(n_qubits: usize, bits: &str) -> Result<Self> {
        if bits.len() != n_qubits {
            return Err(SimError::Config(format!(
                "bitstring length {} does not match qubit count {}",
                bits.len(),
                n_qubits
            )));
        }
        let mut index = 0usize;
        for (q, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => index |= 1 << q,
                _ => {
                    return Err(SimError::Config(format!(
                        "bitstring may only contain 0/1, got {c:?}"
                    )))
                }
            }
        }
        Ok(Self::from_basis_index(n_qubits, index))
    }

    /// Basis state from an index directly (qubit 0 = least-significant bit).
    pub fn from_basis_index(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[index] = Complex64::ONE;
        Self { n_qubits, amps }
    }

    /// All-zeros state |0...0>.
    pub fn zero(n_qubits: usize) -> Self {
        Self::from_basis_index(n_qubits, 0)
    }

    /// Builds a state from raw amplitudes; the caller guarantees normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(SimError::Config(format!(
                "amplitude array length {} is not 2^{}",
                amps.len(),
                n_qubits
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of reading 0 on `qubit`.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// <self|other> with conjugation on `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(SimError::Config(format!(
                "inner product dimension mismatch: {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies `U = cos(angle) 1 - i sin(angle) G` for the gate's generator G.
    ///
    /// Valid because every generator in this crate squares to the identity
    /// (unit-axis single-qubit generators and the projector form of the
    /// controlled gates); single-axis gates verify |u| = 1 here.
    pub fn apply_generated_unitary(&mut self, gate: &GateSpec, angle: f64) -> Result<()> {
        let c = angle.cos();
        let s = angle.sin();
        match &gate.kind {
            GateKind::SingleAxis { qubit, axis } => {
                let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(SimError::UnsupportedGate(format!(
                        "axis norm {norm} != 1; generator is not involutory"
                    )));
                }
                self.check_qubit(*qubit)?;
                let (ux, uy, uz) = (axis[0], axis[1], axis[2]);
                // cos(a) 1 - i sin(a) (ux X + uy Y + uz Z) as a 2x2 matrix
                let m00 = Complex64::new(c, -s * uz);
                let m01 = Complex64::new(-s * uy, -s * ux);
                let m10 = Complex64::new(s * uy, -s * ux);
                let m11 = Complex64::new(c, s * uz);
                self.apply_one_qubit_matrix(*qubit, m00, m01, m10, m11);
            }
            GateKind::ControlledPauli {
                controls,
                target,
                pauli,
            } => {
                self.check_qubit(*target)?;
                let mut control_mask = 0usize;
                for &ctl in controls {
                    self.check_qubit(ctl)?;
                    if ctl == *target {
                        return Err(SimError::Config(format!(
                            "control and target overlap on qubit {ctl}"
                        )));
                    }
                    control_mask |= 1 << ctl;
                }
                // Off the control branch the generator acts as the identity,
                // so every such amplitude picks up exp(-i angle).
                let off_phase = Complex64::new(c, -s);
                let tmask = 1usize << *target;
                match pauli {
                    TargetPauli::X => {
                        let m00 = Complex64::new(c, 0.0);
                        let m01 = Complex64::new(0.0, -s);
                        for i in 0..self.amps.len() {
                            if i & tmask != 0 {
                                continue;
                            }
                            let j = i | tmask;
                            if i & control_mask == control_mask {
                                let (ai, aj) = (self.amps[i], self.amps[j]);
                                self.amps[i] = m00 * ai + m01 * aj;
                                self.amps[j] = m01 * ai + m00 * aj;
                            } else {
                                self.amps[i] *= off_phase;
                                self.amps[j] *= off_phase;
                            }
                        }
                    }
                    TargetPauli::Z => {
                        let z0 = Complex64::new(c, -s);
                        let z1 = Complex64::new(c, s);
                        for (i, a) in self.amps.iter_mut().enumerate() {
                            if i & control_mask == control_mask {
                                *a *= if i & tmask == 0 { z0 } else { z1 };
                            } else {
                                *a *= off_phase;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_one_qubit_matrix(
        &mut self,
        qubit: usize,
        m00: Complex64,
        m01: Complex64,
        m10: Complex64,
        m11: Complex64,
    ) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m00 * a0 + m01 * a1;
            self.amps[j] = m10 * a0 + m11 * a1;
        }
    }

    /// Exact Pauli action including the string's phase; norm preserved exactly.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n_qubits() > self.n_qubits {
            return Err(SimError::Config(format!(
                "Pauli string on {} qubits applied to {}-qubit state",
                p.n_qubits(),
                self.n_qubits
            )));
        }
        for (q, &letter) in p.letters.iter().enumerate() {
            self.apply_single_pauli(q, letter);
        }
        let phase = p.phase();
        if phase != Complex64::ONE {
            for a in &mut self.amps {
                *a *= phase;
            }
        }
        Ok(())
    }

    /// Applies one Pauli letter on one qubit.
    pub fn apply_single_pauli(&mut self, qubit: usize, p: Pauli) {
        let mask = 1usize << qubit;
        match p {
            Pauli::I => {}
            Pauli::X => {
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Pauli::Y => {
                let plus_i = Complex64::new(0.0, 1.0);
                let minus_i = Complex64::new(0.0, -1.0);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let j = i | mask;
                        let (a0, a1) = (self.amps[i], self.amps[j]);
                        // Y|0> = i|1>, Y|1> = -i|0>
                        self.amps[i] = minus_i * a1;
                        self.amps[j] = plus_i * a0;
                    }
                }
            }
            Pauli::Z => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a = -*a;
                    }
                }
            }
        }
    }

    /// Projective measurement of `qubit` driven by a uniform draw `u` in [0,1).
    ///
    /// Outcome is 0 iff `u <= |<0_q|Psi>|^2`; the state is projected and
    /// renormalized. This is the only kernel operation that renormalizes.
    pub fn measure_qubit(&mut self, qubit: usize, u: f64) -> Result<u8> {
        self.check_qubit(qubit)?;
        let p0 = self.prob_zero(qubit);
        let outcome: u8 = if u <= p0 { 0 } else { 1 };
        let branch_prob = if outcome == 0 { p0 } else { 1.0 - p0 };
        let branch_norm = branch_prob.max(0.0).sqrt();
        if branch_norm < COLLAPSE_TOL {
            return Err(SimError::NumericalCollapse {
                qubit,
                norm: branch_norm,
            });
        }
        let mask = 1usize << qubit;
        let keep_set = outcome == 1;
        let scale = 1.0 / branch_norm;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & mask) != 0) == keep_set {
                *a *= scale;
            } else {
                *a = Complex64::ZERO;
            }
        }
        Ok(outcome)
    }

    /// Resets a post-measurement qubit to |0>.
    ///
    /// The qubit must be in a definite computational basis state in product
    /// with the rest; otherwise a contract violation is raised.
    pub fn reset_qubit(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        // Branch masses computed directly: after a measurement the dead
        // branch is exactly zero, and 1 - p0 would reintroduce rounding dust.
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        if p0.min(p1).sqrt() > ENTANGLEMENT_TOL {
            return Err(SimError::ContractViolation(format!(
                "qubit {qubit} is not in a definite basis state (p0 = {p0:.6})"
            )));
        }
        if p1 > p0 {
            // Move the |1> branch down to |0>.
            for i in 0..self.amps.len() {
                if i & mask == 0 {
                    self.amps[i] = self.amps[i | mask];
                    self.amps[i | mask] = Complex64::ZERO;
                }
            }
        } else {
            // Already |0> up to numerical dust on the other branch.
            for (i, a) in self.amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a = Complex64::ZERO;
                }
            }
        }
        Ok(())
    }

    /// Extracts the factor on the low `n_low` qubits, requiring all higher
    /// qubits to be in |0> (amplitude outside that block below the
    /// entanglement tolerance).
    pub fn factor_low(&self, n_low: usize) -> Result<StateVector> {
        if n_low > self.n_qubits {
            return Err(SimError::Config(format!(
                "cannot take {}-qubit factor of a {}-qubit state",
                n_low, self.n_qubits
            )));
        }
        let block = 1usize << n_low;
        let outside: f64 = self.amps[block..].iter().map(|a| a.norm_sqr()).sum();
        if outside.sqrt() > ENTANGLEMENT_TOL {
            return Err(SimError::ContractViolation(format!(
                "qubits above {} are not in |0> (outside mass {:.3e})",
                n_low - 1,
                outside
            )));
        }
        Ok(StateVector {
            n_qubits: n_low,
            amps: self.amps[..block].to_vec(),
        })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(SimError::Config(format!(
                "qubit index {} out of range for {} qubits",
                qubit, self.n_qubits
            )));
        }
        Ok(())
    }
}
