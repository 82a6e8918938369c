//! Closed-form resource arithmetic: amplification caps, shot caps, query
//! bounds and gate counts.
//!
//! Gate counts grow like `8^n` and are computed with [`BigUint`]. The one
//! comparison involving `π` is decided with exact rationals using
//! `π < 355/113`.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c = 1 / (sin²(π/21)·sin²(8π/21))`.
pub fn ratio_constant() -> f64 {
    let a = (PI / 21.0).sin();
    let b = (8.0 * PI / 21.0).sin();
    1.0 / (a * a * b * b)
}

/// `sin(π/21)·sin(8π/21)`: the widest `a`-interval for which an amplification
/// factor of at least three is always available.
pub fn quadrant_width_threshold() -> f64 {
    (PI / 21.0).sin() * (8.0 * PI / 21.0).sin()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon = {epsilon} must be positive")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// `k_max = ⌊π/(8ε) − 1/2⌋`, the largest Grover power a node may use.
pub fn grover_power_cap(epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    Ok((PI / (8.0 * epsilon) - 0.5).floor().max(0.0) as u64)
}

/// `K_max = 2⌊π/(8ε) − 1/2⌋ + 1`.
pub fn k_max_cap(epsilon: f64) -> Result<u64> {
    Ok(2 * grover_power_cap(epsilon)? + 1)
}

/// `N_max = ⌈2c·ln(2/α)⌉` shots per round.
pub fn shots_cap(alpha_round: f64) -> Result<u64> {
    check_alpha(alpha_round)?;
    Ok((2.0 * ratio_constant() * (2.0 / alpha_round).ln()).ceil() as u64)
}

/// Upper bound on `Σ k_i N_i` for one node:
/// `(2c⌊π/(8ε) − 1/2⌋ + c)·[3 ln 4 + (9/4) ln 3 + (7/2) ln(1/α)]`.
pub fn query_bound(epsilon: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let c = ratio_constant();
    let kmax = grover_power_cap(epsilon)? as f64;
    let log_term = 3.0 * 4f64.ln() + 2.25 * 3f64.ln() + 3.5 * (1.0 / alpha).ln();
    Ok((2.0 * c * kmax + c) * log_term)
}

fn pow2(e: u32) -> BigUint {
    BigUint::one() << e as usize
}

/// Gates of one controlled `Q` on `n` index qubits: `4^{n+1} + 4^{n+1} − 2^{n+2}`.
pub fn gates_controlled_q(n: u32) -> BigUint {
    pow2(2 * n + 3) - pow2(n + 2)
}

/// Gates of one node operator `Q_j` (and equally of `A_j`):
/// `2^{2(n−k)+5} − 2^{n−k+3}`.
pub fn gates_qj(n: u32, k: u32) -> Result<BigUint> {
    if k >= n {
        return Err(Error::domain(format!("need k < n, got k = {k}, n = {n}")));
    }
    let w = n - k;
    Ok(pow2(2 * w + 5) - pow2(w + 3))
}

/// Gates of the phase-estimation counting circuit with `m` counting qubits:
/// `(2^m − 1)(4^{n+1} + 4^{n+1} − 2^{n+2}) + n + (m² + m)/2`.
pub fn gates_counting_circuit(n: u32, m: u32) -> BigUint {
    let mm = BigUint::from(m);
    (pow2(m) - BigUint::one()) * gates_controlled_q(n)
        + BigUint::from(n)
        + (&mm * &mm + &mm) / BigUint::from(2u32)
}

/// Left-hand side of the gate comparison, the counting circuit at `m = n + 1`
/// as tabulated: `(n² + 7n + 4)/2 + 2^{n+2}(4^{n+1} − 2^{n+2} + 1)`.
pub fn counting_total_gates(n: u32) -> BigUint {
    let nn = BigUint::from(n);
    let poly = (&nn * &nn + BigUint::from(7u32) * &nn + BigUint::from(4u32)) / BigUint::from(2u32);
    poly + pow2(n + 2) * (pow2(2 * n + 2) - pow2(n + 2) + BigUint::one())
}

/// `3·2^{n−3}·π + 1/2`, with `π` supplied as a rational.
fn depth_factor(n: u32, pi: &BigRational) -> BigRational {
    let three = BigRational::from_integer(BigInt::from(3));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let scale = if n >= 3 {
        BigRational::from_integer(BigInt::from(pow2(n - 3)))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(pow2(3 - n)))
    };
    three * scale * pi + half
}

fn pi_upper() -> BigRational {
    BigRational::new(BigInt::from(355), BigInt::from(113))
}

/// Exact rational upper bound on the node-side gate total
/// `(2^{2n−2k+5} − 2^{n−k+3})(3·2^{n−3}π + 1/2)`.
pub fn diqc_gate_bound_upper(n: u32, k: u32) -> Result<BigRational> {
    let qj = BigRational::from_integer(BigInt::from(gates_qj(n, k)?));
    Ok(qj * depth_factor(n, &pi_upper()))
}

/// Floating-point value of the node-side gate bound, for reports.
pub fn diqc_gate_bound(n: u32, k: u32) -> Result<f64> {
    let qj = gates_qj(n, k)?;
    let qj: f64 = qj.to_string().parse().unwrap_or(f64::INFINITY);
    Ok(qj * (3.0 * 2f64.powi(n as i32 - 3) * PI + 0.5))
}

/// Whether the counting circuit needs strictly more gates than the node-side
/// bound. Decided exactly: the right-hand side is evaluated at `355/113 > π`.
pub fn counting_exceeds_node_gates(n: u32, k: u32) -> Result<bool> {
    let lhs = BigRational::from_integer(BigInt::from(counting_total_gates(n)));
    Ok(lhs > diqc_gate_bound_upper(n, k)?)
}

/// One row of a resource comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub context: String,
    pub qubits: u64,
    /// Exact gate count, or exact upper bound, as a decimal string.
    pub gate_count: String,
    /// Maximum number of consecutive `Q` applications.
    pub max_q_depth: f64,
    pub query_bound: Option<f64>,
}

/// Gate and depth comparison between phase-estimation counting with `n + 1`
/// counting qubits and a node of the distributed algorithm run at
/// `ε_j = 1/(3·2^n)`.
pub fn counting_comparison(n: u32, k: u32) -> Result<Vec<ResourceReport>> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::domain(format!("need 1 <= k < n, n >= 2; got n = {n}, k = {k}")));
    }
    let eps_node = 1.0 / (3.0 * 2f64.powi(n as i32));
    let kmax = grover_power_cap(eps_node)?;
    let qj = gates_qj(n, k)?;
    let per_q_total = &qj * BigUint::from(kmax);
    let with_prep = &per_q_total + &qj;
    Ok(vec![
        ResourceReport {
            context: format!("phase-estimation counting, n = {n}, m = n + 1"),
            qubits: 2 * n as u64 + 1,
            gate_count: counting_total_gates(n).to_string(),
            max_q_depth: 2f64.powi(n as i32),
            query_bound: None,
        },
        ResourceReport {
            context: format!("distributed node bound, n = {n}, k = {k}"),
            qubits: (n - k + 2) as u64,
            gate_count: format!("{:.0}", diqc_gate_bound(n, k)?.ceil()),
            max_q_depth: 3.0 * 2f64.powi(n as i32 - 3) * PI - 0.5,
            query_bound: None,
        },
        ResourceReport {
            context: format!("distributed node Q_j^kmax only, kmax = {kmax}"),
            qubits: (n - k + 2) as u64,
            gate_count: per_q_total.to_string(),
            max_q_depth: kmax as f64,
            query_bound: None,
        },
        ResourceReport {
            context: format!("distributed node A_j + Q_j^kmax, kmax = {kmax}"),
            qubits: (n - k + 2) as u64,
            gate_count: with_prep.to_string(),
            max_q_depth: kmax as f64,
            query_bound: None,
        },
    ])
}

/// Savings against the phase-estimation inner-product estimator at error
/// `2^{−(n+1)}`: qubits saved and the coefficient of `d(Q_j)` in the depth
/// saving (the `d(QFT)` term comes on top).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimationSavings {
    pub qubits_saved: f64,
    pub depth_saving_qj_coefficient: f64,
}

pub fn inner_product_savings(n: u32, k: u32) -> PhaseEstimationSavings {
    let n_f = n as f64;
    PhaseEstimationSavings {
        qubits_saved: n_f + k as f64 - 1.0,
        depth_saving_qj_coefficient: 2f64.powi(n as i32 + 1) - 3.0 * 2f64.powi(n as i32 - 3) * PI - 1.5,
    }
}

/// Savings against the phase-estimation Hamming-distance estimator at error
/// `2^{−n/2}`.
pub fn hamming_savings(n: u32, k: u32) -> PhaseEstimationSavings {
    let n_f = n as f64;
    PhaseEstimationSavings {
        qubits_saved: n_f / 2.0 + k as f64 - 1.0,
        depth_saving_qj_coefficient: 2f64.powf(n_f / 2.0) - 3.0 * 2f64.powf((n_f - 8.0) / 2.0) * PI - 1.5,
    }
}
