//! Wavefunction-level failure metrics.
//!
//! Instead of decoding a measurement record, the simulator projects the
//! post-cycle wavefunction onto nested "correctable" subspaces of the data
//! register and reports the leaked probability:
//!
//! - `S_L`: the codespace, span{|0_L>, |1_L>};
//! - `S_{L+1}`: the codespace plus every weight-1 Pauli applied to both
//!   logical kets;
//! - `S_{psi+1}`: the input ray |Psi_0> plus weight-1 Paulis applied to it;
//! - `S_{psi+2}`: the input ray plus X_i, Z_k, and the CSS-correctable
//!   products X_i Z_k applied to it.
//!
//! For the surface code, X errors on qubits 2 and 7 and Z errors on 3 and 8
//! duplicate other weight-1 kets exactly (weight-2 stabilizer degeneracy) and
//! are excluded from the generator lists. Bases are orthonormalized once per
//! (code, input) pair with modified Gram-Schmidt and reused across trials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::statevector::{Pauli, PauliString, StateVector};
use crate::{QecCode, Result, SimError};

/// Residual norm below which a Gram-Schmidt candidate is linearly dependent.
pub const DROP_TOL: f64 = 1e-8;
/// Tolerance for single subspace-inclusion bounds.
pub const BOUND_TOL: f64 = 1e-10;
/// Tolerance for the plain [0, 1] range check. Looser than BOUND_TOL: a
/// projector assembled from up to 44 basis vectors with pairwise overlaps
/// allowed up to 1e-10 can overshoot unit mass by several times 1e-10, so a
/// complementary failure probability may dip slightly negative without any
/// defect in the kernel.
pub const RANGE_TOL: f64 = 1e-9;
/// Tolerance for bounds whose two sides come from different bases.
pub const CHAIN_TOL: f64 = 2e-10;
/// Below this codespace probability the ratio F^2 / P_code is not reported.
pub const RATIO_GUARD: f64 = 1e-14;

/// An orthonormal basis of a subspace of the data-qubit Hilbert space.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    vectors: Vec<StateVector>,
}

impl SubspaceBasis {
    /// Orthonormalizes the generator list with modified Gram-Schmidt,
    /// dropping candidates whose residual norm falls under [`DROP_TOL`].
    pub fn from_generators(generators: &[StateVector]) -> Result<Self> {
        let mut vectors: Vec<StateVector> = Vec::new();
        for gen in generators {
            let mut v = gen.clone();
            for b in &vectors {
                let coeff = b.inner_product(&v)?;
                let bamps = b.amplitudes();
                for (x, &ba) in v.amplitudes_mut().iter_mut().zip(bamps) {
                    *x -= coeff * ba;
                }
            }
            let norm = v.norm_sqr().sqrt();
            if norm < DROP_TOL {
                continue;
            }
            let inv = Complex64::new(1.0 / norm, 0.0);
            for x in v.amplitudes_mut() {
                *x *= inv;
            }
            vectors.push(v);
        }
        if vectors.is_empty() {
            return Err(SimError::SubspaceConstruction(
                "no independent generators".into(),
            ));
        }
        Ok(Self { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Probability mass of `psi` captured by the subspace.
    pub fn captured(&self, psi: &StateVector) -> Result<f64> {
        let mut total = 0.0;
        for b in &self.vectors {
            total += b.inner_product(psi)?.norm_sqr();
        }
        Ok(total)
    }
}

/// All four subspace bases plus the reference kets, for one (code, input).
#[derive(Debug, Clone)]
pub struct MetricBases {
    pub s_l: SubspaceBasis,
    pub s_l1: SubspaceBasis,
    pub s_psi1: SubspaceBasis,
    pub s_psi2: SubspaceBasis,
    ideal: StateVector,
    n_data: usize,
}

/// Failure metrics of one post-cycle wavefunction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FailureMetrics {
    /// Probability outside the codespace (= 1 - p_code).
    pub p_fail_l: f64,
    /// Probability outside codespace + weight-1 errors.
    pub p_fail_l1: f64,
    /// Probability outside input ray + weight-1 errors on it.
    pub p_fail_psi1: f64,
    /// Probability outside input ray + weight-<=2 errors on it.
    pub p_fail_psi2: f64,
    /// Probability inside the codespace.
    pub p_code: f64,
    /// Squared overlap with the ideal encoded input.
    pub fidelity_sq: f64,
    /// `fidelity_sq / p_code`, omitted when the state has (numerically) left
    /// the codespace entirely.
    pub ratio: Option<f64>,
}

/// Weight-1 error strings for a code, honoring its degeneracy exclusions.
fn weight_one_errors(code: &dyn QecCode) -> Vec<PauliString> {
    let n = code.n_data();
    let mut errors = Vec::new();
    for q in 0..n {
        if !code.x_exclusions().contains(&q) {
            errors.push(PauliString::single(n, q, Pauli::X));
        }
        errors.push(PauliString::single(n, q, Pauli::Y));
        if !code.z_exclusions().contains(&q) {
            errors.push(PauliString::single(n, q, Pauli::Z));
        }
    }
    errors
}

/// Generators of S_{psi+2} beyond |Psi_0>: X_i, Z_k, and the CSS products
/// X_i Z_k (i = k gives Y up to phase), with the code's exclusions. Single-Y
/// kets on excluded indices are still covered through the degeneracy.
fn psi2_errors(code: &dyn QecCode) -> Vec<PauliString> {
    let n = code.n_data();
    let xs: Vec<usize> = (0..n).filter(|q| !code.x_exclusions().contains(q)).collect();
    let zs: Vec<usize> = (0..n).filter(|q| !code.z_exclusions().contains(q)).collect();
    let mut errors = Vec::new();
    for &i in &xs {
        errors.push(PauliString::single(n, i, Pauli::X));
    }
    for &k in &zs {
        errors.push(PauliString::single(n, k, Pauli::Z));
    }
    for &i in &xs {
        for &k in &zs {
            errors.push(PauliString::single(n, i, Pauli::X).then(&PauliString::single(n, k, Pauli::Z)));
        }
    }
    errors
}

fn applied(base: &StateVector, error: &PauliString) -> Result<StateVector> {
    let mut v = base.clone();
    v.apply_pauli(error)?;
    Ok(v)
}

impl MetricBases {
    pub fn new(code: &dyn QecCode, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let zero = code.logical_zero().clone();
        let one = code.logical_one().clone();
        let n = code.n_data();
        let mut ideal_amps = vec![Complex64::ZERO; 1 << n];
        for (i, (&a0, &a1)) in zero.amplitudes().iter().zip(one.amplitudes()).enumerate() {
            ideal_amps[i] = alpha * a0 + beta * a1;
        }
        let ideal = StateVector::from_amplitudes(n, ideal_amps)?;

        let w1 = weight_one_errors(code);
        let w2 = psi2_errors(code);

        let l_gens = vec![zero.clone(), one.clone()];
        let mut l1_gens = l_gens.clone();
        for e in &w1 {
            l1_gens.push(applied(&zero, e)?);
            l1_gens.push(applied(&one, e)?);
        }
        let mut psi1_gens = vec![ideal.clone()];
        for e in &w1 {
            psi1_gens.push(applied(&ideal, e)?);
        }
        let mut psi2_gens = psi1_gens.clone();
        for e in &w2 {
            psi2_gens.push(applied(&ideal, e)?);
        }

        let s_l = SubspaceBasis::from_generators(&l_gens)?;
        let s_l1 = SubspaceBasis::from_generators(&l1_gens)?;
        let s_psi1 = SubspaceBasis::from_generators(&psi1_gens)?;
        let s_psi2 = SubspaceBasis::from_generators(&psi2_gens)?;
        Ok(Self {
            s_l,
            s_l1,
            s_psi1,
            s_psi2,
            ideal,
            n_data: n,
        })
    }

    /// The ideal encoded input on the data qubits.
    pub fn ideal(&self) -> &StateVector {
        &self.ideal
    }
}

/// Evaluates all metrics on a full-register post-cycle state. The ancillas
/// must be back in |0> (they are measured and reset every readout), so the
/// data factor can be extracted exactly.
pub fn compute_metrics(bases: &MetricBases, state: &StateVector) -> Result<FailureMetrics> {
    let data = state.factor_low(bases.n_data)?;
    let p_code = bases.s_l.captured(&data)?;
    let fidelity_sq = bases.ideal.inner_product(&data)?.norm_sqr();
    let m = FailureMetrics {
        p_fail_l: 1.0 - p_code,
        p_fail_l1: 1.0 - bases.s_l1.captured(&data)?,
        p_fail_psi1: 1.0 - bases.s_psi1.captured(&data)?,
        p_fail_psi2: 1.0 - bases.s_psi2.captured(&data)?,
        p_code,
        fidelity_sq,
        ratio: (p_code >= RATIO_GUARD).then_some(fidelity_sq / p_code),
    };
    check_bounds(&m)?;
    Ok(m)
}

/// Consistency bounds every metric set must satisfy: probabilities lie in
/// [0, 1], the fidelity never exceeds the codespace mass, and enlarging a
/// subspace can only reduce the failure probability.
pub fn check_bounds(m: &FailureMetrics) -> Result<()> {
    let fail = |what: &str| {
        Err(SimError::BoundViolation(format!(
            "{what} violated: {m:?}"
        )))
    };
    for (name, v) in [
        ("p_fail_l", m.p_fail_l),
        ("p_fail_l1", m.p_fail_l1),
        ("p_fail_psi1", m.p_fail_psi1),
        ("p_fail_psi2", m.p_fail_psi2),
        ("p_code", m.p_code),
        ("fidelity_sq", m.fidelity_sq),
    ] {
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) || !v.is_finite() {
            return fail(&format!("range of {name} = {v}"));
        }
    }
    if m.fidelity_sq > m.p_code + BOUND_TOL {
        return fail("F^2 <= P_code");
    }
    if (m.p_fail_l - (1.0 - m.p_code)).abs() > BOUND_TOL {
        return fail("p_fail_l = 1 - p_code");
    }
    if m.p_fail_l1 > m.p_fail_l + BOUND_TOL {
        return fail("S_L within S_L+1");
    }
    if m.p_fail_l1 > m.p_fail_psi1 + CHAIN_TOL {
        return fail("S_psi+1 within S_L+1");
    }
    if m.p_fail_psi2 > m.p_fail_psi1 + CHAIN_TOL {
        return fail("S_psi+1 within S_psi+2");
    }
    if 1.0 - m.fidelity_sq < m.p_fail_l - BOUND_TOL {
        return fail("1 - F^2 >= p_fail_l");
    }
    Ok(())
}
