//! Modified iterative quantum amplitude estimation, the single-register
//! baseline, together with the confidence-interval helpers the node
//! estimator reuses.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;
use crate::qsim::Sampler;

/// `[θ_low, θ_high] ⊆ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub low: f64,
    pub high: f64,
}

impl AngleInterval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(0.0 <= low && low <= high && high <= FRAC_PI_2 + 1e-15) {
            return Err(Error::domain(format!(
                "angle interval [{low}, {high}] not inside [0, π/2]"
            )));
        }
        Ok(AngleInterval {
            low,
            high: high.min(FRAC_PI_2),
        })
    }

    pub fn full() -> Self {
        AngleInterval {
            low: 0.0,
            high: FRAC_PI_2,
        }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    /// `[sin²θ_low, sin²θ_high]`.
    pub fn amplitudes(&self) -> (f64, f64) {
        (sin_sq(self.low), sin_sq(self.high))
    }

    /// `sin²θ_high − sin²θ_low`.
    pub fn amplitude_width(&self) -> f64 {
        let (lo, hi) = self.amplitudes();
        hi - lo
    }
}

pub(crate) fn sin_sq(x: f64) -> f64 {
    let s = x.sin();
    s * s
}

/// `⌊2Kθ/π⌋`.
pub fn quadrant(big_k: u64, theta: f64) -> i64 {
    (2.0 * big_k as f64 * theta / PI).floor() as i64
}

/// `⌊2Kθ_low/π⌋ = ⌈2Kθ_high/π⌉ − 1`: both scaled endpoints share a quadrant.
pub fn same_quadrant(big_k: u64, low: f64, high: f64) -> bool {
    let kf = big_k as f64;
    let lo = (2.0 * kf * low / PI).floor();
    let hi = (2.0 * kf * high / PI).ceil();
    lo == hi - 1.0
}

/// Hoeffding half-width `√(ln(2/α)/(2N))`.
pub fn chernoff_half_width(n_samples: u64, alpha: f64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * n_samples as f64)).sqrt())
}

/// Confidence interval `[max(0, â − ε_a), min(1, â + ε_a)]`.
pub fn chernoff_interval(a_hat: f64, n_samples: u64, alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&a_hat) {
        return Err(Error::domain(format!("estimate {a_hat} outside [0, 1]")));
    }
    let eps = chernoff_half_width(n_samples, alpha)?;
    Ok(((a_hat - eps).max(0.0), (a_hat + eps).min(1.0)))
}

/// Converts bounds on `sin²(γ)` into bounds on `γ ∈ [0, π/2]`, where even
/// quadrants read `γ` forwards and odd quadrants mirror it.
pub fn gamma_from_interval(a_min: f64, a_max: f64, quadrant: i64) -> Result<(f64, f64)> {
    if !(0.0 <= a_min && a_min <= a_max && a_max <= 1.0) {
        return Err(Error::domain(format!("bad amplitude interval [{a_min}, {a_max}]")));
    }
    let lo = a_min.sqrt().asin();
    let hi = a_max.sqrt().asin();
    Ok(if quadrant.rem_euclid(2) == 0 {
        (lo, hi)
    } else {
        (FRAC_PI_2 - hi, FRAC_PI_2 - lo)
    })
}

/// Angle interval `[(Rπ/2 + γ_min)/K, (Rπ/2 + γ_max)/K]` implied by a
/// measurement at amplification `K` in quadrant `R`.
pub fn angles_from_measurement(a_min: f64, a_max: f64, quadrant: i64, big_k: u64) -> Result<(f64, f64)> {
    let (g_lo, g_hi) = gamma_from_interval(a_min, a_max, quadrant)?;
    let base = quadrant as f64 * FRAC_PI_2;
    let kf = big_k as f64;
    Ok(((base + g_lo) / kf, (base + g_hi) / kf))
}

/// Next Grover power: the largest odd `K ≤ ⌊π/(2(θ_u − θ_l))⌋` with
/// `K ≥ 3K_i` keeping the scaled interval in one quadrant, as `(K − 1)/2`;
/// `k_i` when none exists.
pub fn find_next_k_miqae(k_i: u64, theta_low: f64, theta_high: f64) -> Result<u64> {
    if !(theta_high > theta_low) {
        return Err(Error::domain("FindNextK needs a non-degenerate interval"));
    }
    let k_current = 2 * k_i + 1;
    let mut big_k = (PI / (2.0 * (theta_high - theta_low))).floor() as u64;
    if big_k % 2 == 0 {
        big_k = big_k.saturating_sub(1);
    }
    while big_k >= 3 * k_current {
        if same_quadrant(big_k, theta_low, theta_high) {
            return Ok((big_k - 1) / 2);
        }
        big_k -= 2;
    }
    Ok(k_i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiqaeConfig {
    /// Target half-width on the angle and on the amplitude.
    pub epsilon: f64,
    pub alpha: f64,
    pub shots_per_batch: u64,
}

impl MiqaeConfig {
    pub fn new(epsilon: f64, alpha: f64, shots_per_batch: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if shots_per_batch == 0 {
            return Err(Error::domain("shots per batch must be positive"));
        }
        Ok(MiqaeConfig {
            epsilon,
            alpha,
            shots_per_batch,
        })
    }

    /// `K_max = π/(4ε)` (real valued).
    pub fn k_max(&self) -> f64 {
        PI / (4.0 * self.epsilon)
    }
}

/// One round of the baseline, recorded when the round ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiqaeRound {
    pub round: u32,
    pub big_k: u64,
    pub quadrant: i64,
    pub shots: u64,
    pub shots_cap: u64,
    pub a_hat: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub theta_low: f64,
    pub theta_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Success,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiqaeResult {
    pub a_low: f64,
    pub a_high: f64,
    pub status: RunStatus,
    /// `Σ k_i N_i`.
    pub oracle_calls: u64,
    pub total_shots: u64,
    pub max_big_k: u64,
    pub rounds: Vec<MiqaeRound>,
}

impl MiqaeResult {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.a_low + self.a_high)
    }

    /// Largest Grover power `k = (K − 1)/2` used.
    pub fn max_depth(&self) -> u64 {
        (self.max_big_k - 1) / 2
    }

    pub fn contains(&self, a: f64) -> bool {
        self.a_low <= a && a <= self.a_high
    }
}

/// Runs the baseline against `sampler` (queried with `r = 1`).
///
/// A round that spends its whole shot budget without finding a larger `K`
/// ends the run with [`RunStatus::Failed`] and the current interval.
pub fn run_miqae<S: Sampler + ?Sized>(config: &MiqaeConfig, sampler: &mut S) -> Result<MiqaeResult> {
    let k_max = config.k_max();
    let mut theta = AngleInterval::full();
    let mut k_i: u64 = 0;
    let mut rounds = Vec::new();
    let mut oracle_calls = 0u64;
    let mut total_shots = 0u64;
    let mut max_big_k = 1u64;
    let mut status = RunStatus::Success;

    'outer: while theta.width() > 2.0 * config.epsilon {
        let round = rounds.len() as u32 + 1;
        let big_k = 2 * k_i + 1;
        let alpha_i = (2.0 * config.alpha / 3.0) * (big_k as f64 / k_max);
        let cap = metrics::shots_cap(alpha_i)?;
        let quad = quadrant(big_k, theta.low);
        let mut n = 0u64;
        let mut hits = 0u64;
        max_big_k = max_big_k.max(big_k);

        loop {
            let batch = config.shots_per_batch.min(cap - n);
            if batch == 0 {
                status = RunStatus::Failed;
                break 'outer;
            }
            hits += sampler.sample(k_i, 1.0, batch);
            n += batch;
            oracle_calls += k_i * batch;
            total_shots += batch;

            let a_hat = hits as f64 / n as f64;
            let (a_min, a_max) = chernoff_interval(a_hat, n, alpha_i)?;
            let (lo, hi) = angles_from_measurement(a_min, a_max, quad, big_k)?;
            theta = AngleInterval::new(lo.max(0.0), hi.min(FRAC_PI_2))?;

            let record = MiqaeRound {
                round,
                big_k,
                quadrant: quad,
                shots: n,
                shots_cap: cap,
                a_hat,
                a_min,
                a_max,
                theta_low: theta.low,
                theta_high: theta.high,
            };
            if theta.width() < 2.0 * config.epsilon {
                rounds.push(record);
                break 'outer;
            }
            let next = find_next_k_miqae(k_i, theta.low, theta.high)?;
            if next != k_i {
                rounds.push(record);
                k_i = next;
                continue 'outer;
            }
            if n == cap {
                rounds.push(record);
            }
        }
    }

    let (a_low, a_high) = theta.amplitudes();
    Ok(MiqaeResult {
        a_low,
        a_high,
        status,
        oracle_calls,
        total_shots,
        max_big_k,
        rounds,
    })
}
