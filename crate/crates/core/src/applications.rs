//! Inner product and Hamming distance of two parties' bit strings, estimated
//! by running the node estimator on the stride sub-oracles, with a ledger of
//! the quantum communication the two-party protocol would need.

use serde::{Deserialize, Serialize};

use crate::coordinator::{DistributedParams, ExecutionMode};
use crate::diqc::{run_node_on, NodeResult, RunStatus};
use crate::error::{Error, Result};
use crate::metrics;
use crate::oracle::{hamming_suboracle, inner_product_suboracle, BitVector, SubOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Inner,
    Hamming,
}

impl Problem {
    /// Qubits exchanged per application of `A_{j'}`: a round trip of
    /// `n − k + 2` qubits (plus Bob's returned scratch qubit) for the inner
    /// product, a one-way send of `n − k + 1` for Hamming.
    pub fn qubits_per_a(self, n: u32, k: u32) -> u64 {
        let m = (n - k) as u64;
        match self {
            Problem::Inner => 2 * m + 3,
            Problem::Hamming => m + 1,
        }
    }
}

/// Bits used to send one node's unrounded estimate back.
pub const RESULT_BITS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommunicationLedger {
    pub qubits_per_a: u64,
    /// Applications of `A_{j'}` or `A_{j'}^†`, i.e. `Σ K_i N_i` over nodes.
    pub a_invocations: u64,
    pub total_qubits: u64,
    pub classical_bits: u64,
}

impl CommunicationLedger {
    fn from_nodes(qubits_per_a: u64, nodes: &[NodeResult]) -> Self {
        let a_invocations = nodes.iter().map(|r| r.oracle_calls_physical).sum();
        CommunicationLedger {
            qubits_per_a,
            a_invocations,
            total_qubits: qubits_per_a * a_invocations,
            classical_bits: RESULT_BITS * nodes.len() as u64,
        }
    }
}

/// Closed-form cap on the qubits exchanged:
/// `2^k·(4n − 4k + 6)·M` for the inner product and `2^k·(2n − 2k + 2)·M` for
/// Hamming, with `M` the per-node query bound.
pub fn communication_bound(problem: Problem, n: u32, k: u32, epsilon_node: f64, alpha_node: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let big_m = metrics::query_bound(epsilon_node, alpha_node)?;
    let per_node = 2.0 * problem.qubits_per_a(n, k) as f64 * big_m;
    Ok(2f64.powi(k as i32) * per_node)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub problem: Problem,
    /// Width after padding to a power of two.
    pub n: u32,
    pub k: u32,
    /// `Σ_{j'} c_{j'} / 2^n`.
    pub estimate: f64,
    /// `Σ_{j'} c_{j'}`, the unrounded count estimate.
    pub count_estimate: f64,
    /// `2^{−k−1}·3ε`.
    pub bound: f64,
    /// `1 − (4/3)α`.
    pub confidence: f64,
    pub status: RunStatus,
    pub ledger: CommunicationLedger,
    pub communication_bound: f64,
    pub per_node: Vec<NodeResult>,
}

impl PairEstimate {
    pub fn within_bound(&self, truth: f64) -> bool {
        (self.estimate - truth).abs() <= self.bound
    }
}

/// Pads both vectors with zeros to a common power-of-two length.
pub fn pad_pair(x: &BitVector, y: &BitVector) -> (BitVector, BitVector) {
    let len = x.len().max(y.len());
    let pad = |v: &BitVector| {
        let mut bits = v.bits().to_vec();
        bits.resize(len, false);
        BitVector::new(bits).padded()
    };
    (pad(x), pad(y))
}

fn estimate_pair(
    problem: Problem,
    x: &BitVector,
    y: &BitVector,
    params: &DistributedParams,
    seed: u64,
    mode: ExecutionMode,
) -> Result<PairEstimate> {
    let (x, y) = pad_pair(x, y);
    let n = x.len().trailing_zeros();
    let k = params.k;
    if k >= n {
        return Err(Error::domain(format!("need k < n, got k = {k} with vectors of length 2^{n}")));
    }
    let build = match problem {
        Problem::Inner => inner_product_suboracle,
        Problem::Hamming => hamming_suboracle,
    };
    let subs = (0..params.nodes())
        .map(|j| build(&x, &y, k, j))
        .collect::<Result<Vec<SubOracle>>>()?;
    let config = params.node_config()?;
    let run = |sub: &SubOracle| run_node_on(sub, &config, params.backend, seed.wrapping_add(sub.node_id()));
    let nodes: Vec<NodeResult> = match mode {
        ExecutionMode::Sequential => subs.iter().map(run).collect::<Result<_>>()?,
        ExecutionMode::Concurrent => {
            use rayon::prelude::*;
            subs.par_iter().map(run).collect::<Result<_>>()?
        }
    };
    let count_estimate: f64 = nodes.iter().map(|r| r.c_j).sum();
    let status = if nodes.iter().all(NodeResult::succeeded) {
        RunStatus::Success
    } else {
        RunStatus::Failed
    };
    Ok(PairEstimate {
        problem,
        n,
        k,
        estimate: count_estimate / (1u64 << n) as f64,
        count_estimate,
        bound: 3.0 * params.epsilon / 2f64.powi(k as i32 + 1),
        confidence: 1.0 - 4.0 / 3.0 * params.alpha,
        status,
        ledger: CommunicationLedger::from_nodes(problem.qubits_per_a(n, k), &nodes),
        communication_bound: communication_bound(problem, n, k, params.node_epsilon(), params.node_alpha())?,
        per_node: nodes,
    })
}

/// Estimates `x·y = 2^{−n} Σ x_i y_i`; node `j'` runs with seed `seed + j'`.
pub fn estimate_inner_product(
    x: &BitVector,
    y: &BitVector,
    params: &DistributedParams,
    seed: u64,
    mode: ExecutionMode,
) -> Result<PairEstimate> {
    estimate_pair(Problem::Inner, x, y, params, seed, mode)
}

/// Estimates `d(x, y)/2^n`, the fraction of differing positions.
pub fn estimate_hamming(
    x: &BitVector,
    y: &BitVector,
    params: &DistributedParams,
    seed: u64,
    mode: ExecutionMode,
) -> Result<PairEstimate> {
    estimate_pair(Problem::Hamming, x, y, params, seed, mode)
}

/// Exact `x·y` after padding.
pub fn exact_inner_product(x: &BitVector, y: &BitVector) -> f64 {
    let (x, y) = pad_pair(x, y);
    let hits = x.bits().iter().zip(y.bits()).filter(|(a, b)| **a && **b).count();
    hits as f64 / x.len() as f64
}

/// Exact `d(x, y)/2^n` after padding.
pub fn exact_hamming(x: &BitVector, y: &BitVector) -> f64 {
    let (x, y) = pad_pair(x, y);
    let diff = x.bits().iter().zip(y.bits()).filter(|(a, b)| a != b).count();
    diff as f64 / x.len() as f64
}
