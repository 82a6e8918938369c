use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: u32 = 22;

const NORM_TOLERANCE: f64 = 1e-10;

/// Dense amplitude vector. Qubit `q` is bit `q` of the basis index, so qubit 0
/// is the least significant (rightmost) one.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: u32,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: u32) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::domain(format!(
                "statevector width {num_qubits} outside [1, {MAX_QUBITS}]"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: u32, index: usize) -> Result<Self> {
        let mut s = StateVector::zero(num_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::domain(format!("basis index {index} out of range")));
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: u32) {
        assert!(q < self.num_qubits, "qubit {q} out of range");
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE,
            "norm drifted to {}",
            self.norm_sqr()
        );
    }

    /// Total probability of basis states satisfying `pred`.
    pub fn probability_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Applies a real 2×2 matrix `[[a, b], [c, d]]` to qubit `q`.
    fn apply_real_1q(&mut self, q: u32, a: f64, b: f64, c: f64, d: f64) {
        self.check_qubit(q);
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let lo = self.amplitudes[i];
                let hi = self.amplitudes[i | bit];
                self.amplitudes[i] = lo * a + hi * b;
                self.amplitudes[i | bit] = lo * c + hi * d;
            }
        }
        self.debug_check_norm();
    }

    pub fn h(&mut self, q: u32) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.apply_real_1q(q, s, s, s, -s);
    }

    pub fn x(&mut self, q: u32) {
        self.apply_real_1q(q, 0.0, 1.0, 1.0, 0.0);
    }

    /// `R_Y(angle)`: `|0⟩ → cos(angle/2)|0⟩ + sin(angle/2)|1⟩`.
    pub fn ry(&mut self, q: u32, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        self.apply_real_1q(q, c, -s, s, c);
    }

    /// Flips `target` on every basis state where `cond` holds. `cond` must not
    /// depend on the target bit.
    pub fn flip_where(&mut self, target: u32, cond: impl Fn(usize) -> bool) {
        self.check_qubit(target);
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 && cond(i) {
                self.amplitudes.swap(i, i | bit);
            }
        }
        self.debug_check_norm();
    }

    pub fn cnot(&mut self, control: u32, target: u32) {
        assert_ne!(control, target);
        self.check_qubit(control);
        self.flip_where(target, |i| i >> control & 1 == 1);
    }

    pub fn ccnot(&mut self, c1: u32, c2: u32, target: u32) {
        assert!(c1 != target && c2 != target && c1 != c2);
        self.check_qubit(c1);
        self.check_qubit(c2);
        self.flip_where(target, |i| i >> c1 & 1 == 1 && i >> c2 & 1 == 1);
    }

    /// `|i⟩|b⟩ → |i⟩|b ⊕ f(i)⟩` where `i` is the field of `width` bits starting
    /// at qubit `lo` and `b` is `target`.
    pub fn xor_oracle(&mut self, lo: u32, width: u32, target: u32, f: impl Fn(u64) -> bool) {
        assert!(target < lo || target >= lo + width, "target inside index field");
        let field_mask = (1usize << width) - 1;
        self.flip_where(target, |i| f(((i >> lo) & field_mask) as u64));
    }

    /// Multiplies amplitudes of basis states satisfying `pred` by −1.
    pub fn phase_flip_where(&mut self, pred: impl Fn(usize) -> bool) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if pred(i) {
                *a = -*a;
            }
        }
    }

    /// Global phase −1.
    pub fn negate(&mut self) {
        for a in &mut self.amplitudes {
            *a = -*a;
        }
    }

    /// Removes qubit `q`, which must be in `|0⟩` up to `tol` probability.
    pub fn discard_zero_qubit(&self, q: u32, tol: f64) -> Result<StateVector> {
        self.check_qubit(q);
        let leaked = self.probability_where(|i| i >> q & 1 == 1);
        if leaked > tol {
            return Err(Error::domain(format!(
                "qubit {q} is entangled or excited (probability {leaked:e} of |1⟩)"
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> q & 1 == 0)
            .map(|(_, &a)| a)
            .collect::<Vec<_>>();
        Ok(StateVector {
            num_qubits: self.num_qubits - 1,
            amplitudes,
        })
    }

    /// Exchanges qubits `a` and `b`.
    pub fn swap_qubits(&mut self, a: u32, b: u32) {
        self.check_qubit(a);
        self.check_qubit(b);
        if a == b {
            return;
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amplitudes.swap(i, i ^ ba ^ bb);
            }
        }
    }
}
