//! Scattering on star-shaped two-dimensional quantum junctions.
//!
//! A junction is a rectangular quantum well with semi-infinite straight
//! wires attached orthogonally to its sides. Scattering matrices on the
//! first spectral band are computed from the Dirichlet-to-Neumann (DN) map
//! of the well: the closed (evanescent) channels are eliminated by a Schur
//! complement, giving the DN map of the intermediate Hamiltonian on the open
//! channels, and from it
//!
//! * the exact scattering matrix (Cayley transform of the intermediate DN map),
//! * a single-pole resonance model and its approximate scattering matrix,
//! * energy-dependent and low-temperature projector vertex conditions.
//!
//! An independent full-channel mode-matching solver ([`oracle`]) checks the
//! Schur-complement route.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channels;
pub mod dn;
pub mod interior;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod quadrature;
pub mod scattering;
pub mod vertex;

mod linalg;

pub use channels::{momentum, ChannelBasis, ChannelError, TransverseMode};
pub use dn::{
    DnError, DnMatrix, GroupSelector, IntermediateDn, SinglePoleModel, SpectralData, ValidityReport,
};
pub use interior::{BoundaryCurrent, EigenError, EigenRep, InteriorEigenpair};
pub use model::{
    builtin_example, Grid, JunctionSpec, Side, SolverConfig, Violation, WellSpec, WireSpec,
};
pub use pipeline::{BandGroup, Junction, PipelineError};
pub use scattering::{Method, SMatrix, ScatteringError, SweepFlag, SweepResult, SweepRow};
pub use vertex::{Assignment, FermiWindow, LowTempLimit, ProjectorBc, VertexBc, VertexError};
