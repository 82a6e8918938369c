//! Classical simulation of distributed quantum approximate counting.
//!
//! The crate estimates the number of marked elements `t = |S|` of a set
//! `S ⊆ {0, …, 2^n − 1}` by splitting the index space across `2^k` virtual
//! nodes. Each node runs an adaptive, phase-estimation-free amplitude
//! estimator over an `(n − k + 2)`-qubit register and reports an integer
//! count; the coordinator sums the node counts and attaches the aggregate
//! error bound.
//!
//! Modules, bottom-up:
//!
//! - [`oracle`]: marked sets, prefix/stride decomposition into sub-oracles,
//!   and the inner-product / Hamming sub-oracles built from two bit vectors.
//! - [`qsim`]: measurement statistics of `Q^k A|0⟩`, either from the
//!   closed-form rotation picture or from a dense statevector simulator.
//! - [`miqae`]: the modified iterative amplitude estimation baseline and the
//!   confidence-interval machinery shared with the node estimator.
//! - [`diqc`]: the per-node estimator with two-stage amplification, rotation
//!   rescaling and weighted post-processing.
//! - [`coordinator`]: fan-out over nodes and aggregation.
//! - [`applications`]: inner product and Hamming distance estimation with
//!   communication ledgers.
//! - [`metrics`]: closed-form resource arithmetic.
//! - [`checks`]: property suites used by tests and the `prop-check` command.
//!
//! ```
//! use diqc_core::coordinator::{run_distributed, DistributedParams, ExecutionMode};
//! use diqc_core::oracle::{OracleSpec, PartitionScheme};
//!
//! let oracle = OracleSpec::new(6, [38, 8, 16]).unwrap();
//! let params = DistributedParams::new(1, 0.01, 0.1).unwrap();
//! let result = run_distributed(&oracle, &params, PartitionScheme::Prefix, 7, ExecutionMode::Sequential).unwrap();
//! assert_eq!(result.per_node.len(), 2);
//! ```

pub mod applications;
pub mod checks;
pub mod coordinator;
pub mod diqc;
pub mod error;
pub mod io;
pub mod metrics;
pub mod miqae;
pub mod oracle;
pub mod qsim;

pub use error::{Error, Result};
