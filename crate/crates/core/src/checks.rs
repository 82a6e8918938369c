//! Property suites over the estimator's analytic claims, shared by the test
//! targets and the `prop-check` command.
//!
//! Every suite counts the cases it checks and the ones that fail. A suite can
//! be fed a deliberately broken input ([`CheckOptions::inject`]) to confirm it
//! is able to fail.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diqc::find_next_k_diqc;
use crate::error::{Error, Result};
use crate::metrics;
use crate::miqae::{angles_from_measurement, sin_sq};
use crate::oracle::{PartitionScheme, SubOracle};
use crate::qsim::{good_probability, shot_rng, NodeCircuit};

const RESCALE_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Rescaling by an admissible `r` moves `2Kθ/π` down by less than one.
    RescaleGrid,
    /// Narrow single-quadrant intervals always admit `K ≥ 3K_i`.
    NextKExists,
    /// Geometric-growth sums are dominated by the `K_max/q^i` sums.
    GrowthSums,
    /// Counting circuit gate total exceeds the node-side bound.
    GateTotals,
    /// Statevector and closed-form `P[11]` agree.
    BackendEquivalence,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::RescaleGrid,
        Suite::NextKExists,
        Suite::GrowthSums,
        Suite::GateTotals,
        Suite::BackendEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RescaleGrid => "rescale-grid",
            Suite::NextKExists => "next-k-exists",
            Suite::GrowthSums => "growth-sums",
            Suite::GateTotals => "gate-totals",
            Suite::BackendEquivalence => "backend-equivalence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub seed: u64,
    /// Cases drawn by the randomized suites.
    pub random_cases: u64,
    pub inject: Option<Suite>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 20241017,
            random_cases: 20_000,
            inject: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: u64,
    pub failures: u64,
    pub injected: bool,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Default)]
struct Tally {
    cases: u64,
    failures: u64,
    first: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    fn finish(self, suite: Suite, injected: bool) -> SuiteReport {
        SuiteReport {
            suite,
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            injected,
            first_failure: self.first,
        }
    }
}

/// For odd `K ≤ 99`, ten `r` from just above `sin²(π/2·(1 − 1/K))` to 1 and
/// 1000 `θ ∈ [0, π/2)`: `0 ≤ 2Kθ/π − 2K·arcsin(√r sin θ)/π < 1`.
/// The lower bound allows `1e−12` of round-off (`arcsin(sin θ) ≠ θ` in
/// floating point). Injection lowers `r` to 0.9 of the threshold.
pub fn rescale_grid(inject: bool) -> SuiteReport {
    let mut t = Tally::default();
    for big_k in (1..=99u64).step_by(2) {
        let kf = big_k as f64;
        let threshold = sin_sq(FRAC_PI_2 * (1.0 - 1.0 / kf));
        let r_lo = if inject { 0.9 * threshold } else { threshold + 1e-6 };
        for step in 0..10 {
            let r = r_lo + (1.0 - r_lo) * step as f64 / 9.0;
            for i in 0..1000 {
                let theta = FRAC_PI_2 * i as f64 / 1000.0;
                let gap = 2.0 * kf * theta / PI - 2.0 * kf * (r.sqrt() * theta.sin()).asin() / PI;
                t.check(gap >= -RESCALE_ROUNDOFF && gap < 1.0, || format!("K = {big_k}, r = {r}, θ = {theta}: gap {gap}"));
            }
        }
    }
    t.finish(Suite::RescaleGrid, inject)
}

/// Random odd `K_i`, quadrant `R < K_i` and amplitude interval of width at
/// most `sin(π/21)·sin(8π/21)`, mapped to the angle interval it implies;
/// FindNext K with `q = 3` must return some `K ≥ 3K_i` whose `r` is 1 or
/// above `sin²(π/2·(1 − 1/K))`. Injection widens the interval fivefold.
pub fn next_k_exists(seed: u64, cases: u64, inject: bool) -> SuiteReport {
    let mut rng = shot_rng(seed);
    let mut t = Tally::default();
    let max_width = metrics::quadrant_width_threshold() * if inject { 5.0 } else { 1.0 };
    for _ in 0..cases {
        let k_i = 2 * rng.random_range(0..200u64) + 1;
        let quad = rng.random_range(0..k_i) as i64;
        let width = rng.random_range(1e-9..=max_width).min(0.999);
        let a_min = rng.random_range(1e-9..(1.0 - width - 1e-9));
        let a_max = a_min + width;
        let (lo, hi) = angles_from_measurement(a_min, a_max, quad, k_i).expect("valid interval");
        let outcome = find_next_k_diqc(lo, hi.min(FRAC_PI_2), 3, k_i, false);
        let ok = match &outcome {
            Ok(Some(next)) => {
                let kf = next.big_k as f64;
                next.big_k >= 3 * k_i && (next.r == 1.0 || next.r > sin_sq(FRAC_PI_2 * (1.0 - 1.0 / kf)))
            }
            _ => false,
        };
        t.check(ok, || {
            format!("K_i = {k_i}, R = {quad}, a ∈ [{a_min}, {a_max}], θ ∈ [{lo}, {hi}]: {outcome:?}")
        });
    }
    t.finish(Suite::NextKExists, inject)
}

/// Random `K_1 < … < K_t < K_max` with `K_i ≥ qK_{i−1}`; for `f(x) = x` and
/// `f(x) = x·ln(2qK_max/((q−1)xα))` and every `î`:
/// `Σ_{i≥î} f(K_i) ≤ Σ_{i=0}^{t−î} f(K_max/q^i)`. Injection compares against
/// `K_max/2` instead of `K_max`.
pub fn growth_sums(seed: u64, cases: u64, inject: bool) -> SuiteReport {
    let mut rng = shot_rng(seed ^ 0x1e44a1);
    let mut t = Tally::default();
    for _ in 0..cases {
        let q = rng.random_range(2..=3u64);
        let k_max = 2 * rng.random_range(2..50_000u64) + 1;
        let alpha = rng.random_range(0.001..=0.5);
        // Grow forwards, then keep the prefix that stays below K_max.
        let mut seq = vec![rng.random_range(1..=3u64).min(k_max - 1)];
        loop {
            let last = *seq.last().unwrap();
            let next = q * last.max(1) + rng.random_range(0..=2 * last);
            if next >= k_max || seq.len() > 40 {
                break;
            }
            seq.push(next);
        }
        if seq[0] * q <= 1 {
            seq.remove(0);
        }
        if seq.is_empty() {
            continue;
        }
        let reference = if inject { k_max as f64 / 2.0 } else { k_max as f64 };
        let qf = q as f64;
        let c = 2.0 * qf * k_max as f64 / ((qf - 1.0) * alpha);
        let fs: [(&str, Box<dyn Fn(f64) -> f64>); 2] = [
            ("x", Box::new(|x| x)),
            ("x ln(C/x)", Box::new(move |x: f64| x * (c / x).ln())),
        ];
        let len = seq.len();
        for (name, f) in &fs {
            for hat in 0..len {
                let lhs: f64 = seq[hat..].iter().map(|&k| f(k as f64)).sum();
                let rhs: f64 = (0..len - hat).map(|i| f(reference / qf.powi(i as i32))).sum();
                t.check(lhs <= rhs * (1.0 + 1e-12), || {
                    format!("f = {name}, q = {q}, K_max = {k_max}, seq = {seq:?}, î = {hat}: {lhs} > {rhs}")
                });
            }
        }
    }
    t.finish(Suite::GrowthSums, inject)
}

/// `4 ≤ n ≤ 30`, `k ∈ {1, 2}`, decided exactly. Injection asks for the
/// reverse inequality.
pub fn gate_totals(inject: bool) -> SuiteReport {
    let mut t = Tally::default();
    for n in 4..=30 {
        for k in [1, 2] {
            let holds = metrics::counting_exceeds_node_gates(n, k).unwrap_or(false);
            t.check(holds != inject, || format!("n = {n}, k = {k}"));
        }
    }
    t.finish(Suite::GateTotals, inject)
}

/// `m ≤ 6`, every `t ≤ 2^m`, `r ∈ {0.25, 0.5, 0.8, 1}`, `k ≤ 10`: statevector
/// `P[11]` within `1e−10` of `sin²((2k+1)θ̃)`. Injection perturbs `r` in the
/// closed form by `1e−6`.
pub fn backend_equivalence(inject: bool) -> SuiteReport {
    let mut t = Tally::default();
    for m in 1..=6u32 {
        for count in 0..=1u64 << m {
            let sub = SubOracle::new(m, 1, 0, PartitionScheme::Prefix, 0..count).expect("valid sub-oracle");
            let circuit = NodeCircuit::new(&sub).expect("small register");
            let a = count as f64 / (1u64 << m) as f64;
            for r in [0.25, 0.5, 0.8, 1.0] {
                let mut state = crate::qsim::StateVector::zero(m + 2).expect("small register");
                circuit.apply_a(&mut state, r).expect("width matches");
                for power in 0..=10u64 {
                    if power > 0 {
                        circuit.apply_q(&mut state, r).expect("width matches");
                    }
                    let sv = state.probability_where(crate::qsim::is_good);
                    let r_model = if inject { r - 1e-6 } else { r };
                    let closed = good_probability(a, r_model, power);
                    t.check((sv - closed).abs() <= 1e-10, || {
                        format!("m = {m}, t = {count}, r = {r}, k = {power}: {sv} vs {closed}")
                    });
                }
            }
        }
    }
    t.finish(Suite::BackendEquivalence, inject)
}

pub fn run_suite(suite: Suite, options: &CheckOptions) -> SuiteReport {
    let inject = options.inject == Some(suite);
    match suite {
        Suite::RescaleGrid => rescale_grid(inject),
        Suite::NextKExists => next_k_exists(options.seed, options.random_cases, inject),
        Suite::GrowthSums => growth_sums(options.seed, options.random_cases, inject),
        Suite::GateTotals => gate_totals(inject),
        Suite::BackendEquivalence => backend_equivalence(inject),
    }
}

pub fn run_all(options: &CheckOptions) -> CheckReport {
    let suites: Vec<SuiteReport> = Suite::ALL.iter().map(|&s| run_suite(s, options)).collect();
    CheckReport {
        seed: options.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}
