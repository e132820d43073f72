//! Deterministic linear network coding (DLNC) for single-hop broadcast
//! over packet erasure channels.
//!
//! After a systematic phase each receiver reports which packets it lost.
//! The sender then designs a `U×K` coding matrix over GF(q) so that every
//! receiver can solve for its lost packets, with `U` as small as possible.
//!
//! * [`gf`]: finite field arithmetic.
//! * [`model`]: state feedback matrices and Wants sets.
//! * [`linalg`]: coding matrices, rank, solution checks, decoding.
//! * [`graphic`]: the graphic-matroid construction.
//! * [`baseline`]: systematic RLNC for comparison.
//! * [`oracle`]: brute-force optimum and uniform-matroid facts.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod gf;
pub mod graphic;
pub mod linalg;
pub mod model;
pub mod oracle;

pub use baseline::{run_rlnc, RlncRun, StoppingRule};
pub use gf::{Field, FieldElement, GfError};
pub use graphic::{build_graph, build_solution, LabeledMultigraph, Location};
pub use linalg::{CodingMatrix, LinalgError, SolutionVerdict};
pub use model::{sample_instance, split_seed, ModelError, PacketSet, ReceptionInstance, WantsCollection};
pub use oracle::{brute_force_uq, classify, CaseLabel, Representability, UqOutcome};
