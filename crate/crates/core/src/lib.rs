//! Exact coefficient tracking of GHZ-diagonal states under fusion and
//! non-local stabilizer measurements, and dynamic-programming search for
//! protocols that distill `n`-party GHZ states from noisy Bell pairs.

pub mod error;
pub mod ops;
pub mod optimizer;
pub mod oracle;
pub mod pauli;
pub mod protocol;
pub mod stabilizer;
pub mod state;

pub use error::{Error, Result};
pub use optimizer::{base_dp, multi_run, random_dp, DpEntry, DpTable, RandomSearchConfig};
pub use ops::{fuse, measure_stabilizer, FusionSpec, MeasurementResult};
pub use pauli::{Pauli, PauliString};
pub use stabilizer::{enumerate_stabilizers, StabilizerIndex};
pub use state::{isotropic_bell, BasisLabel, GhzDiagState};
