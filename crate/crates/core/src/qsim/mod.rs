//! Measurement statistics of `Q^k A|0⟩` on a node register.
//!
//! A node register has `m + 2` qubits: `m` index qubits on the high bits, then
//! the oracle flag `q1` (bit 1) and the rotation qubit `q0` (bit 0). The good
//! outcome is `q1 q0 = 11`. Two backends produce its probability:
//!
//! - [`AmplitudeModel`]: the closed form `sin²((2k+1)·θ̃)` with
//!   `sin θ̃ = √(r·t/2^m)`;
//! - [`NodeCircuit`]: a dense statevector built from the actual `A` and the
//!   four reflections of `Q`.
//!
//! Both feed the estimators through the [`Sampler`] trait.

mod chains;
mod statevector;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Indicator, SubOracle};

pub use chains::{hamming_prepare, inner_product_prepare};
pub use statevector::{StateVector, MAX_QUBITS};

/// Deterministic generator used for every shot. ChaCha8 is counter based, so
/// a run is fully reproduced by its 64-bit seed.
pub type ShotRng = ChaCha8Rng;

pub fn shot_rng(seed: u64) -> ShotRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_rotation(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("rotation parameter r = {r} outside (0, 1]")));
    }
    Ok(())
}

/// Closed-form description of `A|0⟩` in the two-dimensional rotation picture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeModel {
    pub m: u32,
    pub t_local: u64,
    pub r: f64,
}

impl AmplitudeModel {
    pub fn new(m: u32, t_local: u64, r: f64) -> Result<Self> {
        if m == 0 || m >= 63 {
            return Err(Error::domain(format!("sub-register width m = {m} unsupported")));
        }
        if t_local > 1u64 << m {
            return Err(Error::domain(format!("t_local = {t_local} exceeds 2^{m}")));
        }
        check_rotation(r)?;
        Ok(AmplitudeModel { m, t_local, r })
    }

    /// `a = t / 2^m`, the quantity being estimated.
    pub fn amplitude(&self) -> f64 {
        self.t_local as f64 / (1u64 << self.m) as f64
    }

    /// `θ̃ = arcsin √(r·a)`.
    pub fn theta_tilde(&self) -> f64 {
        rescaled_angle(self.amplitude(), self.r)
    }

    pub fn prob11(&self, grover_power: u64) -> f64 {
        good_probability(self.amplitude(), self.r, grover_power)
    }
}

/// `arcsin √(r·a)`.
pub fn rescaled_angle(amplitude: f64, r: f64) -> f64 {
    (r * amplitude).sqrt().min(1.0).asin()
}

/// `sin²((2k+1)·arcsin √(r·a))`.
pub fn good_probability(amplitude: f64, r: f64, grover_power: u64) -> f64 {
    let theta = rescaled_angle(amplitude, r);
    let s = ((2 * grover_power + 1) as f64 * theta).sin();
    (s * s).clamp(0.0, 1.0)
}

/// `P[11]` of `Q^k A|0⟩` from the closed form.
pub fn prob11_analytic(model: &AmplitudeModel, grover_power: u64) -> f64 {
    model.prob11(grover_power)
}

/// Binomial draw of the number of good outcomes in `shots` measurements.
pub fn sample_shots<R: rand::Rng + ?Sized>(probability: f64, shots: u64, rng: &mut R) -> u64 {
    let p = probability.clamp(0.0, 1.0);
    if shots == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return shots;
    }
    Binomial::new(shots, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Source of measurement counts for `Q^k A(r)|0⟩`.
pub trait Sampler {
    /// Probability of the good outcome. Exposed for diagnostics and tests.
    fn probability(&mut self, grover_power: u64, r: f64) -> f64;

    /// Number of good outcomes among `shots` fresh preparations.
    fn sample(&mut self, grover_power: u64, r: f64, shots: u64) -> u64;
}

/// Closed-form sampler for an arbitrary amplitude `a ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct AnalyticSampler {
    amplitude: f64,
    rng: ShotRng,
}

impl AnalyticSampler {
    pub fn new(amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::domain(format!("amplitude {amplitude} outside [0, 1]")));
        }
        Ok(AnalyticSampler {
            amplitude,
            rng: shot_rng(seed),
        })
    }

    pub fn for_suboracle(sub: &SubOracle, seed: u64) -> Self {
        AnalyticSampler {
            amplitude: sub.amplitude(),
            rng: shot_rng(seed),
        }
    }
}

impl Sampler for AnalyticSampler {
    fn probability(&mut self, grover_power: u64, r: f64) -> f64 {
        good_probability(self.amplitude, r, grover_power)
    }

    fn sample(&mut self, grover_power: u64, r: f64, shots: u64) -> u64 {
        let p = self.probability(grover_power, r);
        sample_shots(p, shots, &mut self.rng)
    }
}

/// The `A` and `Q` operators of one node, realised on a [`StateVector`].
#[derive(Debug, Clone)]
pub struct NodeCircuit {
    m: u32,
    truth: Vec<bool>,
}

/// Basis-index predicate for the good outcome `q1 q0 = 11`.
pub fn is_good(index: usize) -> bool {
    index & 0b11 == 0b11
}

impl NodeCircuit {
    pub fn new(sub: &SubOracle) -> Result<Self> {
        let m = sub.m();
        if m + 2 > MAX_QUBITS {
            return Err(Error::domain(format!(
                "statevector backend limited to {MAX_QUBITS} qubits, node needs {}",
                m + 2
            )));
        }
        let truth = (0..1u64 << m).map(|i| sub.marked().contains(&i)).collect();
        Ok(NodeCircuit { m, truth })
    }

    pub fn num_qubits(&self) -> u32 {
        self.m + 2
    }

    fn check_width(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::domain(format!(
                "state has {} qubits, node register needs {}",
                state.num_qubits(),
                self.num_qubits()
            )));
        }
        Ok(())
    }

    fn oracle(&self, state: &mut StateVector) {
        let truth = &self.truth;
        state.xor_oracle(2, self.m, 1, |i| truth[i as usize]);
    }

    /// `A = (I ⊗ R_r)(U_χ ⊗ I)(H^{⊗m} ⊗ I₂)`.
    pub fn apply_a(&self, state: &mut StateVector, r: f64) -> Result<()> {
        self.check_width(state)?;
        check_rotation(r)?;
        for q in 2..self.m + 2 {
            state.h(q);
        }
        self.oracle(state);
        state.ry(0, 2.0 * r.sqrt().asin());
        Ok(())
    }

    pub fn apply_a_dagger(&self, state: &mut StateVector, r: f64) -> Result<()> {
        self.check_width(state)?;
        check_rotation(r)?;
        state.ry(0, -2.0 * r.sqrt().asin());
        self.oracle(state);
        for q in 2..self.m + 2 {
            state.h(q);
        }
        Ok(())
    }

    /// `Q = −A U₀ A† U₁₁`.
    pub fn apply_q(&self, state: &mut StateVector, r: f64) -> Result<()> {
        self.check_width(state)?;
        state.phase_flip_where(is_good);
        self.apply_a_dagger(state, r)?;
        state.phase_flip_where(|i| i == 0);
        self.apply_a(state, r)?;
        state.negate();
        Ok(())
    }

    /// `Q^k A|0⟩`.
    pub fn prepare(&self, r: f64, grover_power: u64) -> Result<StateVector> {
        let mut state = StateVector::zero(self.num_qubits())?;
        self.apply_a(&mut state, r)?;
        for _ in 0..grover_power {
            self.apply_q(&mut state, r)?;
        }
        Ok(state)
    }

    pub fn prob11(&self, r: f64, grover_power: u64) -> Result<f64> {
        Ok(self.prepare(r, grover_power)?.probability_where(is_good))
    }
}

/// Sampler that derives `P[11]` from a full statevector simulation.
#[derive(Debug, Clone)]
pub struct StatevectorSampler {
    circuit: NodeCircuit,
    rng: ShotRng,
    cache: HashMap<(u64, u64), f64>,
}

impl StatevectorSampler {
    pub fn new(sub: &SubOracle, seed: u64) -> Result<Self> {
        Ok(StatevectorSampler {
            circuit: NodeCircuit::new(sub)?,
            rng: shot_rng(seed),
            cache: HashMap::new(),
        })
    }
}

impl Sampler for StatevectorSampler {
    fn probability(&mut self, grover_power: u64, r: f64) -> f64 {
        let circuit = &self.circuit;
        *self
            .cache
            .entry((grover_power, r.to_bits()))
            .or_insert_with(|| {
                circuit
                    .prob11(r, grover_power)
                    .expect("register width validated at construction")
            })
    }

    fn sample(&mut self, grover_power: u64, r: f64, shots: u64) -> u64 {
        let p = self.probability(grover_power, r);
        sample_shots(p, shots, &mut self.rng)
    }
}

/// Which backend produces the measurement statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Analytic,
    Statevector,
}

impl Backend {
    pub fn sampler(self, sub: &SubOracle, seed: u64) -> Result<Box<dyn Sampler + Send>> {
        Ok(match self {
            Backend::Analytic => Box::new(AnalyticSampler::for_suboracle(sub, seed)),
            Backend::Statevector => Box::new(StatevectorSampler::new(sub, seed)?),
        })
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Analytic => f.write_str("analytic"),
            Backend::Statevector => f.write_str("statevector"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Backend::Analytic),
            "statevector" => Ok(Backend::Statevector),
            other => Err(Error::domain(format!("unknown backend `{other}`"))),
        }
    }
}
