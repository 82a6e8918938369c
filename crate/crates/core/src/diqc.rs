//! Per-node estimator: adaptive amplitude estimation with a two-stage
//! amplification factor, rotation rescaling of the auxiliary qubit and a
//! weighted average over all narrow rounds.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;
use crate::miqae::{angles_from_measurement, chernoff_interval, quadrant, same_quadrant, sin_sq, AngleInterval};
use crate::oracle::SubOracle;
use crate::qsim::{Backend, Sampler};

pub use crate::miqae::RunStatus;

/// Rule choosing the minimum growth factor `q` of `K` for a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QPolicy {
    /// `q = 2` while the `sin²`-width is at least `50ε`, then `q = 3`.
    Staged,
    Fixed(u32),
}

impl QPolicy {
    pub fn factor(self, amplitude_width: f64, epsilon: f64) -> u32 {
        match self {
            QPolicy::Staged if amplitude_width >= 50.0 * epsilon => 2,
            QPolicy::Staged => 3,
            QPolicy::Fixed(q) => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiqcConfig {
    /// Node half-width target `ε_j`.
    pub epsilon: f64,
    /// Node significance `α_j`.
    pub alpha: f64,
    /// `N_0`, shots per batch.
    pub shots_per_batch: u64,
    pub q_policy: QPolicy,
}

impl DiqcConfig {
    pub fn new(epsilon: f64, alpha: f64, shots_per_batch: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(Error::domain(format!("node epsilon = {epsilon} must lie in (0, 0.25)")));
        }
        if !(alpha > 0.0 && alpha < 0.75) {
            return Err(Error::domain(format!("node alpha = {alpha} must lie in (0, 0.75)")));
        }
        if shots_per_batch == 0 {
            return Err(Error::domain("shots per batch must be positive"));
        }
        Ok(DiqcConfig {
            epsilon,
            alpha,
            shots_per_batch,
            q_policy: QPolicy::Staged,
        })
    }

    pub fn with_q_policy(mut self, policy: QPolicy) -> Result<Self> {
        if let QPolicy::Fixed(q) = policy {
            if !(2..=3).contains(&q) {
                return Err(Error::domain(format!("amplification factor q = {q} must be 2 or 3")));
            }
        }
        self.q_policy = policy;
        Ok(self)
    }

    /// `K_max = 2⌊π/(8ε_j) − 1/2⌋ + 1`.
    pub fn k_max(&self) -> u64 {
        metrics::k_max_cap(self.epsilon).expect("epsilon validated")
    }

    /// `α_{j,i} = ((q−1)/q)·α_j·K_i/K_max`.
    pub fn round_alpha(&self, q: u32, big_k: u64) -> f64 {
        let q = q as f64;
        (q - 1.0) / q * self.alpha * big_k as f64 / self.k_max() as f64
    }
}

/// State of one round when it ends (a new `K` was found, the target was
/// reached, the shot budget ran out, or the round backtracked).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub big_k: u64,
    pub quadrant: i64,
    pub r: f64,
    pub q: u32,
    pub shots: u64,
    pub shots_cap: u64,
    pub hits: u64,
    pub a_hat: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub theta_low: f64,
    pub theta_high: f64,
    pub backtracked: bool,
    /// The extra full-budget attempt made after a round ran dry.
    pub retry: bool,
}

impl RoundRecord {
    /// `[sin²θ_low, sin²θ_high]`.
    pub fn amplitude_interval(&self) -> (f64, f64) {
        (sin_sq(self.theta_low), sin_sq(self.theta_high))
    }

    pub fn amplitude_width(&self) -> f64 {
        let (lo, hi) = self.amplitude_interval();
        hi - lo
    }
}

/// Next amplification chosen by [`find_next_k_diqc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextK {
    pub big_k: u64,
    pub r: f64,
    /// Quadrant of the rescaled interval at `big_k`.
    pub quadrant: i64,
}

/// Scans odd `K` downward from `2⌊π/(4(θ_max − θ_min)) − 1/2⌋ + 1` while
/// `K ≥ q·K_current`. The first `K` keeping the interval in one quadrant is
/// returned with `r = 1`; failing that, and unless the round backtracked, the
/// first `K` for which `r = sin²((R+1)π/(2K))/sin²θ_max` passes the admission
/// test and keeps the rescaled interval in one quadrant.
pub fn find_next_k_diqc(
    theta_min: f64,
    theta_max: f64,
    q: u32,
    k_current: u64,
    backtracked: bool,
) -> Result<Option<NextK>> {
    if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= FRAC_PI_2 + 1e-15) {
        return Err(Error::domain(format!(
            "FindNext K needs 0 <= θ_min < θ_max <= π/2, got [{theta_min}, {theta_max}]"
        )));
    }
    let floor_k = (PI / (4.0 * (theta_max - theta_min)) - 0.5).floor().max(0.0);
    let mut big_k = 2 * (floor_k as u64) + 1;
    let lower = q as u64 * k_current;
    let (s_min, s_max) = (theta_min.sin(), theta_max.sin());
    while big_k >= lower {
        if same_quadrant(big_k, theta_min, theta_max) {
            return Ok(Some(NextK {
                big_k,
                r: 1.0,
                quadrant: quadrant(big_k, theta_min),
            }));
        }
        if !backtracked {
            let kf = big_k as f64;
            let rq = quadrant(big_k, theta_min);
            let r = sin_sq((rq + 1) as f64 * PI / (2.0 * kf)) / (s_max * s_max);
            let threshold = sin_sq(FRAC_PI_2 * (1.0 - 1.0 / kf)).max(0.75);
            if r > threshold && r <= 1.0 {
                let lo = (r.sqrt() * s_min).asin();
                let hi = (r.sqrt() * s_max).min(1.0).asin();
                if same_quadrant(big_k, lo, hi) {
                    return Ok(Some(NextK {
                        big_k,
                        r,
                        quadrant: quadrant(big_k, lo),
                    }));
                }
            }
        }
        big_k -= 2;
    }
    Ok(None)
}

/// Output of the weighted-average post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostProcessed {
    /// `Σ a_i ω_i / Σ ω_i` on the amplitude scale.
    pub amplitude: f64,
    /// `2^m` times the amplitude.
    pub c_j: f64,
    pub t_prime: u64,
    /// `[max(0, a − 3ε/2), min(1, a + 3ε/2)]`.
    pub a_low: f64,
    pub a_high: f64,
    pub scaled_low: f64,
    pub scaled_high: f64,
}

fn finish(amplitude: f64, epsilon: f64, m: u32) -> PostProcessed {
    let scale = (1u64 << m) as f64;
    let c_j = scale * amplitude;
    let a_low = (amplitude - 1.5 * epsilon).max(0.0);
    let a_high = (amplitude + 1.5 * epsilon).min(1.0);
    PostProcessed {
        amplitude,
        c_j,
        // f64::round breaks ties away from zero.
        t_prime: c_j.round().max(0.0) as u64,
        a_low,
        a_high,
        scaled_low: scale * a_low,
        scaled_high: scale * a_high,
    }
}

/// Weighted average over amplitude intervals of width at most `3ε` with
/// weights `1/width`. A zero-width interval dominates any others.
pub fn post_process_intervals(intervals: &[(f64, f64)], epsilon: f64, m: u32) -> Result<PostProcessed> {
    let limit = 3.0 * epsilon;
    let qualifying: Vec<(f64, f64)> = intervals
        .iter()
        .copied()
        .filter(|(lo, hi)| hi - lo <= limit)
        .collect();
    if qualifying.is_empty() {
        return Err(Error::EstimationIncomplete { max_width: limit });
    }
    let exact: Vec<f64> = qualifying
        .iter()
        .filter(|(lo, hi)| hi <= lo)
        .map(|(lo, _)| *lo)
        .collect();
    let amplitude = if !exact.is_empty() {
        exact.iter().sum::<f64>() / exact.len() as f64
    } else {
        let (num, den) = qualifying.iter().fold((0.0, 0.0), |(num, den), (lo, hi)| {
            let w = 1.0 / (hi - lo);
            (num + 0.5 * (lo + hi) * w, den + w)
        });
        num / den
    };
    Ok(finish(amplitude, epsilon, m))
}

/// Post-processes the non-backtracked rounds of a node trace.
pub fn post_process(rounds: &[RoundRecord], epsilon: f64, m: u32) -> Result<PostProcessed> {
    let intervals: Vec<(f64, f64)> = rounds
        .iter()
        .filter(|r| !r.backtracked)
        .map(RoundRecord::amplitude_interval)
        .collect();
    post_process_intervals(&intervals, epsilon, m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub node_id: u64,
    pub m: u32,
    pub seed: u64,
    pub epsilon: f64,
    pub alpha: f64,
    pub status: RunStatus,
    /// `[c_j^min, c_j^max]` on the amplitude scale.
    pub a_low: f64,
    pub a_high: f64,
    /// Unrounded count estimate `c_j = 2^m · a`.
    pub c_j: f64,
    pub t_prime: u64,
    pub scaled_low: f64,
    pub scaled_high: f64,
    /// Last `[sin²θ_min, sin²θ_max]` reached by the loop.
    pub final_low: f64,
    pub final_high: f64,
    /// `Σ k_i N_i`, the counting convention of the query bound.
    pub oracle_calls_nominal: u64,
    /// `Σ K_i N_i`: applications of `A` or `A†`.
    pub oracle_calls_physical: u64,
    pub total_shots: u64,
    pub max_big_k: u64,
    pub rounds: Vec<RoundRecord>,
}

impl NodeResult {
    pub fn succeeded(&self) -> bool {
        self.status == RunStatus::Success
    }

    pub fn amplitude_estimate(&self) -> f64 {
        self.c_j / (1u64 << self.m) as f64
    }

    /// Largest Grover power `k = (K − 1)/2` used: the circuit depth in `Q`.
    pub fn max_depth(&self) -> u64 {
        (self.max_big_k - 1) / 2
    }

    pub fn covers(&self, amplitude: f64) -> bool {
        self.a_low <= amplitude && amplitude <= self.a_high
    }
}

struct Counters {
    nominal: u64,
    physical: u64,
    shots: u64,
    max_big_k: u64,
}

fn rescale(theta_tilde: f64, r: f64) -> f64 {
    (sin_sq(theta_tilde) / r).sqrt().min(1.0).asin()
}

/// Runs the node estimator on `sampler` for a sub-register of width `m`.
///
/// A round that spends its shot budget without a new `K` gets one more
/// attempt with a fresh budget, recorded separately with `retry` set; if that
/// also runs dry the node stops with [`RunStatus::Failed`].
pub fn run_node<S: Sampler + ?Sized>(m: u32, config: &DiqcConfig, sampler: &mut S, seed: u64) -> Result<NodeResult> {
    let eps = config.epsilon;
    let mut theta = AngleInterval::full();
    let mut big_k = 1u64;
    let mut r = 1.0;
    let mut quad = 0i64;
    let mut backtracked = false;
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut ctr = Counters {
        nominal: 0,
        physical: 0,
        shots: 0,
        max_big_k: 1,
    };
    let mut status = RunStatus::Success;
    let mut round = 0u32;

    'rounds: while theta.amplitude_width() > 2.0 * eps {
        round += 1;
        let start = theta;
        let q = config.q_policy.factor(start.amplitude_width(), eps);
        let cap = metrics::shots_cap(config.round_alpha(q, big_k))?;
        let grover_power = (big_k - 1) / 2;
        ctr.max_big_k = ctr.max_big_k.max(big_k);

        for retry in [false, true] {
            let (mut n, mut hits) = (0u64, 0u64);
            let mut last = None;
            while n < cap {
                let batch = config.shots_per_batch.min(cap - n);
                hits += sampler.sample(grover_power, r, batch);
                n += batch;
                ctr.nominal += grover_power * batch;
                ctr.physical += big_k * batch;
                ctr.shots += batch;

                let a_hat = hits as f64 / n as f64;
                let (a_min, a_max) = chernoff_interval(a_hat, n, config.round_alpha(q, big_k))?;
                let (t_lo, t_hi) = angles_from_measurement(a_min, a_max, quad, big_k)?;
                let mut record = RoundRecord {
                    round,
                    big_k,
                    quadrant: quad,
                    r,
                    q,
                    shots: n,
                    shots_cap: cap,
                    hits,
                    a_hat,
                    a_min,
                    a_max,
                    theta_low: 0.0,
                    theta_high: 0.0,
                    backtracked: false,
                    retry,
                };

                if sin_sq(t_lo) > r || sin_sq(t_hi) > r {
                    // Inconsistent with the rescaling: restore and look again
                    // with the r-branch disabled.
                    theta = start;
                    backtracked = true;
                    record.theta_low = theta.low;
                    record.theta_high = theta.high;
                    record.backtracked = true;
                    if let Some(next) = find_next_k_diqc(theta.low, theta.high, q, big_k, true)? {
                        rounds.push(record);
                        (big_k, r, quad) = (next.big_k, next.r, next.quadrant);
                        backtracked = false;
                        continue 'rounds;
                    }
                    last = Some(record);
                    continue;
                }

                let lo = rescale(t_lo, r);
                let hi = rescale(t_hi, r).max(lo);
                theta = AngleInterval::new(lo, hi)?;
                record.theta_low = theta.low;
                record.theta_high = theta.high;

                if theta.amplitude_width() <= 2.0 * eps {
                    rounds.push(record);
                    break 'rounds;
                }
                if let Some(next) = find_next_k_diqc(theta.low, theta.high, q, big_k, backtracked)? {
                    rounds.push(record);
                    (big_k, r, quad) = (next.big_k, next.r, next.quadrant);
                    backtracked = false;
                    continue 'rounds;
                }
                last = Some(record);
            }
            rounds.extend(last);
        }
        status = RunStatus::Failed;
        break;
    }

    let (final_low, final_high) = theta.amplitudes();
    let pp = match post_process(&rounds, eps, m) {
        Ok(pp) => pp,
        Err(Error::EstimationIncomplete { .. }) if status == RunStatus::Failed => {
            finish(0.5 * (final_low + final_high), eps, m)
        }
        Err(e) => return Err(e),
    };
    Ok(NodeResult {
        node_id: 0,
        m,
        seed,
        epsilon: eps,
        alpha: config.alpha,
        status,
        a_low: pp.a_low,
        a_high: pp.a_high,
        c_j: pp.c_j,
        t_prime: pp.t_prime,
        scaled_low: pp.scaled_low,
        scaled_high: pp.scaled_high,
        final_low,
        final_high,
        oracle_calls_nominal: ctr.nominal,
        oracle_calls_physical: ctr.physical,
        total_shots: ctr.shots,
        max_big_k: ctr.max_big_k,
        rounds,
    })
}

/// Builds a sampler for `sub` on `backend` and runs the node estimator.
pub fn run_node_on(sub: &SubOracle, config: &DiqcConfig, backend: Backend, seed: u64) -> Result<NodeResult> {
    let mut sampler = backend.sampler(sub, seed)?;
    let mut result = run_node(sub.m(), config, sampler.as_mut(), seed)?;
    result.node_id = sub.node_id();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{OracleSpec, PartitionScheme};
    use crate::qsim::AnalyticSampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn find_next_k_plain_branch() {
        let next = find_next_k_diqc(0.1, 0.11, 2, 1, false).unwrap().unwrap();
        assert_eq!(next.big_k, 127);
        assert_eq!(next.r, 1.0);
        assert_eq!(next.quadrant, 8);
    }

    #[test]
    fn find_next_k_empty_scan() {
        assert_eq!(find_next_k_diqc(0.2, 1.2, 2, 1, false).unwrap(), None);
        assert!(find_next_k_diqc(0.4, 0.4, 2, 1, false).is_err());
    }

    #[test]
    fn find_next_k_prefers_rescaled_large_k() {
        // θ_max sits just above 11π/102 so that r = 0.9995 lands it there.
        let theta_max = ((11.0 * PI / 102.0).sin() / 0.9995f64.sqrt()).asin();
        let theta_min = theta_max - PI / 104.0;
        let next = find_next_k_diqc(theta_min, theta_max, 2, 5, false).unwrap().unwrap();
        assert_eq!(next.big_k, 51);
        assert_abs_diff_eq!(next.r, 0.9995, epsilon = 1e-9);
        assert_eq!(next.quadrant, 10);
        // A plain K = 41 exists but is smaller; with the r-branch disabled it wins.
        let plain = find_next_k_diqc(theta_min, theta_max, 2, 5, true).unwrap().unwrap();
        assert_eq!(plain.big_k, 41);
        assert_eq!(plain.r, 1.0);
    }

    #[test]
    fn post_process_examples() {
        // ε = 0.002 so both widths (0.003, 0.0015) sit well inside 3ε.
        let pp = post_process_intervals(&[(0.0610, 0.0640), (0.0615, 0.0630)], 0.002, 5).unwrap();
        assert_abs_diff_eq!(pp.c_j, 1.994_666_666_666_666_7, epsilon = 1e-9);
        assert_eq!(pp.t_prime, 2);

        let pp = post_process_intervals(&[(0.2, 0.202)], 0.001, 4).unwrap();
        assert_abs_diff_eq!(pp.c_j, 16.0 * 0.201, epsilon = 1e-12);

        let pp = post_process_intervals(&[(0.5, 0.501); 3], 0.001, 3).unwrap();
        assert_abs_diff_eq!(pp.c_j, 8.0 * 0.5005, epsilon = 1e-12);
        assert!((pp.t_prime as f64 - pp.c_j).abs() <= 2.0 / 3.0);

        // Wide intervals are ignored; none left is an error.
        assert!(matches!(
            post_process_intervals(&[(0.1, 0.2)], 0.001, 3),
            Err(Error::EstimationIncomplete { .. })
        ));
    }

    #[test]
    fn post_process_clamps_output_interval() {
        let pp = post_process_intervals(&[(0.0, 0.001)], 0.001, 5).unwrap();
        assert_eq!(pp.a_low, 0.0);
        assert_abs_diff_eq!(pp.a_high, 0.002, epsilon = 1e-15);
        assert_abs_diff_eq!(pp.scaled_high, 0.064, epsilon = 1e-12);
    }

    #[test]
    fn empty_suboracle_counts_zero() {
        let cfg = DiqcConfig::new(0.001, 0.05, 1).unwrap();
        let mut s = AnalyticSampler::new(0.0, 1).unwrap();
        let res = run_node(5, &cfg, &mut s, 1).unwrap();
        assert!(res.succeeded());
        assert_eq!(res.t_prime, 0);
        assert!(res.c_j < 0.1);
    }

    #[test]
    fn prefix_nodes_recover_counts() {
        let oracle = OracleSpec::new(6, [38, 8, 16]).unwrap();
        let subs = oracle.decompose(1, PartitionScheme::Prefix).unwrap();
        let cfg = DiqcConfig::new(0.001, 0.05, 1).unwrap();
        for seed in 0..5 {
            let r0 = run_node_on(&subs[0], &cfg, Backend::Analytic, seed).unwrap();
            let r1 = run_node_on(&subs[1], &cfg, Backend::Analytic, seed).unwrap();
            assert_eq!((r0.t_prime, r1.t_prime), (2, 1));
            assert_eq!(r1.node_id, 1);
        }
    }

    #[test]
    fn trace_invariants_hold() {
        let cfg = DiqcConfig::new(0.002, 0.05, 5).unwrap();
        for (i, a) in [0.0, 1.0 / 64.0, 0.3, 0.5, 0.93, 1.0].into_iter().enumerate() {
            for seed in 0..10 {
                let mut s = AnalyticSampler::new(a, seed * 7 + i as u64).unwrap();
                let res = run_node(6, &cfg, &mut s, seed).unwrap();
                let mut prev_k = 0;
                for rec in &res.rounds {
                    assert_eq!(rec.big_k % 2, 1);
                    assert!(rec.big_k <= cfg.k_max());
                    assert!(rec.shots <= rec.shots_cap);
                    assert!(rec.r > 0.0 && rec.r <= 1.0);
                    assert!(0.0 <= rec.theta_low && rec.theta_low <= rec.theta_high && rec.theta_high <= FRAC_PI_2);
                    if prev_k != 0 && rec.big_k != prev_k {
                        assert!(rec.big_k >= 2 * prev_k);
                    }
                    prev_k = rec.big_k;
                }
                assert!((res.t_prime as f64 - res.c_j).abs() <= 2.0 / 3.0);
                if res.succeeded() {
                    assert!(res.a_high - res.a_low <= 3.0 * cfg.epsilon + 1e-15);
                }
                assert_eq!(res.oracle_calls_physical, 2 * res.oracle_calls_nominal + res.total_shots);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = DiqcConfig::new(0.005, 0.05, 3).unwrap();
        let run = |seed| {
            let mut s = AnalyticSampler::new(0.2, seed).unwrap();
            run_node(4, &cfg, &mut s, seed).unwrap()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn config_validation() {
        assert!(DiqcConfig::new(0.0, 0.05, 1).is_err());
        assert!(DiqcConfig::new(0.001, 0.8, 1).is_err());
        assert!(DiqcConfig::new(0.001, 0.05, 0).is_err());
        let cfg = DiqcConfig::new(0.001, 0.05, 1).unwrap();
        assert!(cfg.with_q_policy(QPolicy::Fixed(4)).is_err());
        assert_eq!(cfg.k_max(), 785);
    }
}
