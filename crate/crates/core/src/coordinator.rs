//! Fan-out of a counting problem over `2^k` virtual nodes and aggregation of
//! their integer counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diqc::{run_node_on, DiqcConfig, NodeResult, QPolicy, RunStatus};
use crate::error::{Error, Result};
use crate::oracle::{OracleSpec, PartitionScheme, SubOracle};
use crate::qsim::Backend;

/// Global parameters of a distributed run. Nodes get `ε/2^k` and `α/2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributedParams {
    pub k: u32,
    pub epsilon: f64,
    pub alpha: f64,
    pub shots_per_batch: u64,
    pub backend: Backend,
    pub q_policy: QPolicy,
}

impl DistributedParams {
    /// Requires `1 ≤ k`, `0 < ε ≤ 0.01` and `0 < α < 3/4`; `N_0` defaults
    /// to one shot per batch on the analytic backend.
    pub fn new(k: u32, epsilon: f64, alpha: f64) -> Result<Self> {
        if k == 0 || k >= 40 {
            return Err(Error::domain(format!("k = {k} must be at least 1")));
        }
        if !(epsilon > 0.0 && epsilon <= 0.01) {
            return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0, 0.01]")));
        }
        if !(alpha > 0.0 && alpha < 0.75) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 3/4)")));
        }
        Ok(DistributedParams {
            k,
            epsilon,
            alpha,
            shots_per_batch: 1,
            backend: Backend::Analytic,
            q_policy: QPolicy::Staged,
        })
    }

    pub fn with_shots_per_batch(mut self, n0: u64) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::domain("shots per batch must be positive"));
        }
        self.shots_per_batch = n0;
        Ok(self)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_q_policy(mut self, policy: QPolicy) -> Self {
        self.q_policy = policy;
        self
    }

    pub fn nodes(&self) -> u64 {
        1u64 << self.k
    }

    pub fn node_epsilon(&self) -> f64 {
        self.epsilon / self.nodes() as f64
    }

    pub fn node_alpha(&self) -> f64 {
        self.alpha / self.nodes() as f64
    }

    pub fn node_config(&self) -> Result<DiqcConfig> {
        DiqcConfig::new(self.node_epsilon(), self.node_alpha(), self.shots_per_batch)?.with_q_policy(self.q_policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    Sequential,
    #[default]
    Concurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub oracle_calls_nominal: u64,
    pub oracle_calls_physical: u64,
    pub total_shots: u64,
    pub max_big_k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub n: u32,
    pub k: u32,
    pub epsilon: f64,
    pub alpha: f64,
    pub t_prime: u64,
    /// `2^{n−k−1}·3ε + 2^{k+1}/3`.
    pub error_bound: f64,
    /// `1 − (4/3)α`.
    pub confidence: f64,
    pub status: RunStatus,
    pub totals: Totals,
    pub per_node: Vec<NodeResult>,
}

impl AggregateResult {
    pub fn within_bound(&self, t: u64) -> bool {
        (self.t_prime as f64 - t as f64).abs() <= self.error_bound
    }
}

/// `2^{n−k−1}·3ε + 2^{k+1}/3`.
pub fn aggregate_error_bound(n: u32, k: u32, epsilon: f64) -> f64 {
    2f64.powi(n as i32 - k as i32 - 1) * 3.0 * epsilon + 2f64.powi(k as i32 + 1) / 3.0
}

fn run_nodes(subs: &[SubOracle], config: &DiqcConfig, backend: Backend, seed_of: impl Fn(u64) -> u64 + Sync, mode: ExecutionMode) -> Result<Vec<NodeResult>> {
    let run = |sub: &SubOracle| run_node_on(sub, config, backend, seed_of(sub.node_id()));
    match mode {
        ExecutionMode::Sequential => subs.iter().map(run).collect(),
        // Each node owns its seeded sampler, so scheduling cannot change results.
        ExecutionMode::Concurrent => subs.par_iter().map(run).collect(),
    }
}

/// Splits `oracle` with `scheme`, runs every node with seed
/// `base_seed + node_id` and aggregates.
pub fn run_distributed(
    oracle: &OracleSpec,
    params: &DistributedParams,
    scheme: PartitionScheme,
    base_seed: u64,
    mode: ExecutionMode,
) -> Result<AggregateResult> {
    if params.k >= oracle.n() {
        return Err(Error::domain(format!("need k < n, got k = {} and n = {}", params.k, oracle.n())));
    }
    let subs = oracle.decompose(params.k, scheme)?;
    let config = params.node_config()?;
    let nodes = run_nodes(&subs, &config, params.backend, |j| base_seed.wrapping_add(j), mode)?;
    aggregate(nodes)
}

/// Sums node counts and reconstructs `(n, k, ε, α)` from the node setup.
pub fn aggregate(mut nodes: Vec<NodeResult>) -> Result<AggregateResult> {
    let first = nodes.first().ok_or_else(|| Error::domain("no node results to aggregate"))?;
    let count = nodes.len() as u64;
    if count < 2 || !count.is_power_of_two() {
        return Err(Error::MixedConfig(format!("{count} nodes is not 2^k with k >= 1")));
    }
    let (m, eps_j, alpha_j) = (first.m, first.epsilon, first.alpha);
    if let Some(bad) = nodes
        .iter()
        .find(|r| r.m != m || r.epsilon != eps_j || r.alpha != alpha_j)
    {
        return Err(Error::MixedConfig(format!(
            "node {} has (m, ε, α) = ({}, {}, {}) but node {} has ({m}, {eps_j}, {alpha_j})",
            bad.node_id, bad.m, bad.epsilon, bad.alpha, first.node_id
        )));
    }
    nodes.sort_by_key(|r| r.node_id);
    if nodes.windows(2).any(|w| w[0].node_id == w[1].node_id) {
        return Err(Error::MixedConfig("duplicate node ids".into()));
    }

    let k = count.trailing_zeros();
    let n = m + k;
    let epsilon = eps_j * count as f64;
    let alpha = alpha_j * count as f64;
    let totals = nodes.iter().fold(Totals::default(), |t, r| Totals {
        oracle_calls_nominal: t.oracle_calls_nominal + r.oracle_calls_nominal,
        oracle_calls_physical: t.oracle_calls_physical + r.oracle_calls_physical,
        total_shots: t.total_shots + r.total_shots,
        max_big_k: t.max_big_k.max(r.max_big_k),
    });
    let status = if nodes.iter().all(NodeResult::succeeded) {
        RunStatus::Success
    } else {
        RunStatus::Failed
    };
    Ok(AggregateResult {
        n,
        k,
        epsilon,
        alpha,
        t_prime: nodes.iter().map(|r| r.t_prime).sum(),
        error_bound: aggregate_error_bound(n, k, epsilon),
        confidence: 1.0 - 4.0 / 3.0 * alpha,
        status,
        totals,
        per_node: nodes,
    })
}
