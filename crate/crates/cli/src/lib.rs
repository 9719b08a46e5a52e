//! Configuration, dispatch, and artifact plumbing for the `qecsim` binary.
//!
//! A run is described by a [`ResolvedConfig`]: either built from flags alone
//! or loaded from a TOML file and overridden field-by-field by flags. Every
//! JSON artifact embeds the schema version and the fully resolved config, so
//! any result file is reproducible on its own.

pub mod config;
pub mod dispatch;

/// Version stamp written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// Process exit code for usage/configuration errors.
pub const EXIT_USAGE: u8 = 2;
/// Process exit code for internal invariant violations.
pub const EXIT_INTERNAL: u8 = 3;
