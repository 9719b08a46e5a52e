use thiserror::Error;

/// Errors raised by the simulation kernel and the code circuits.
#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value is inconsistent (lengths, ranges, indices).
    #[error("configuration error: {0}")]
    Config(String),

    /// A gate generator does not square to the identity, so the closed-form
    /// cos/sin evolution is invalid.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    /// The selected measurement branch has vanishing norm; the supplied
    /// uniform draw is inconsistent with the state.
    #[error("numerical collapse: branch norm {norm:.3e} below threshold for qubit {qubit}")]
    NumericalCollapse { qubit: usize, norm: f64 },

    /// A contract on the quantum state was violated (e.g. resetting a qubit
    /// that is still entangled, or cat preparation on non-|0> ancillas).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Subspace construction produced an unexpected rank.
    #[error("subspace construction error: {0}")]
    SubspaceConstruction(String),

    /// A theorem-level bound between metrics was violated; this signals a
    /// defect in the metric engine or the kernel, never a noisy trial.
    #[error("metric bound violation: {0}")]
    BoundViolation(String),
}
