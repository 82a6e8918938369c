//! Two-party preparation of `A_{j'}` for the inner-product and Hamming
//! sub-oracles, built gate by gate from the parties' data oracles
//! `U_x : |i'⟩|b⟩ → |i'⟩|b ⊕ x_g⟩` and `U_y` with `g = 2^k·i' + j'`.

use super::statevector::StateVector;
use crate::error::{Error, Result};
use crate::oracle::{pair_width, BitVector, PartitionScheme};

const CLEAN_TOLERANCE: f64 = 1e-24;

struct Layout {
    m: u32,
    k: u32,
    offset: u64,
}

impl Layout {
    fn new(x: &BitVector, y: &BitVector, k: u32, offset: u64) -> Result<Self> {
        let n = pair_width(x, y)?;
        if k == 0 || k >= n || offset >= 1u64 << k {
            return Err(Error::domain(format!(
                "need 1 <= k < n = {n} and offset < 2^k, got k = {k}, offset = {offset}"
            )));
        }
        Ok(Layout { m: n - k, k, offset })
    }

    fn bit<'a>(&'a self, v: &'a BitVector) -> impl Fn(u64) -> bool + 'a {
        move |i| v.get(PartitionScheme::Stride.lift(self.m, self.k, self.offset, i) as usize)
    }
}

/// Oracle part of the inner-product `A_{j'}` on an `(m+3)`-qubit register laid
/// out as `[i' | x | y | anc]` (anc on bit 0):
/// `U_x`, then `U_y`, `CCNOT(x, y → anc)`, `U_y`, then `U_x` again.
/// Maps `|i'⟩|000⟩ → |i'⟩|00⟩|x_g ∧ y_g⟩`; the `y` qubit is verified clean
/// before it is handed back.
pub fn inner_product_oracle_chain(
    state: &mut StateVector,
    x: &BitVector,
    y: &BitVector,
    k: u32,
    offset: u64,
) -> Result<()> {
    let layout = Layout::new(x, y, k, offset)?;
    if state.num_qubits() != layout.m + 3 {
        return Err(Error::domain("inner-product chain needs m + 3 qubits"));
    }
    let m = layout.m;
    // Alice
    state.xor_oracle(3, m, 2, layout.bit(x));
    // Bob
    state.xor_oracle(3, m, 1, layout.bit(y));
    state.ccnot(2, 1, 0);
    state.xor_oracle(3, m, 1, layout.bit(y));
    if state.probability_where(|i| i & 0b010 != 0) > CLEAN_TOLERANCE {
        return Err(Error::domain("Bob's register did not decouple"));
    }
    // Alice
    state.xor_oracle(3, m, 2, layout.bit(x));
    Ok(())
}

/// Oracle part of the Hamming `A_{j'}` on an `(m+2)`-qubit register laid out
/// as `[i' | x | y]`: `U_x`, `U_y`, `CNOT(y → x)`, `U_y`.
/// Maps `|i'⟩|00⟩ → |i'⟩|x_g ⊕ y_g⟩|0⟩`.
pub fn hamming_oracle_chain(
    state: &mut StateVector,
    x: &BitVector,
    y: &BitVector,
    k: u32,
    offset: u64,
) -> Result<()> {
    let layout = Layout::new(x, y, k, offset)?;
    if state.num_qubits() != layout.m + 2 {
        return Err(Error::domain("Hamming chain needs m + 2 qubits"));
    }
    let m = layout.m;
    state.xor_oracle(2, m, 1, layout.bit(x));
    state.xor_oracle(2, m, 0, layout.bit(y));
    state.cnot(0, 1);
    state.xor_oracle(2, m, 0, layout.bit(y));
    Ok(())
}

/// `A_{j'}|0⟩` for the inner-product problem, returned in the node layout
/// `[i' | flag | rotation]`. Bob's scratch qubit is discarded after it is
/// checked to be back in `|0⟩`.
pub fn inner_product_prepare(
    x: &BitVector,
    y: &BitVector,
    k: u32,
    offset: u64,
    r: f64,
) -> Result<StateVector> {
    let layout = Layout::new(x, y, k, offset)?;
    let mut state = StateVector::zero(layout.m + 3)?;
    for q in 3..layout.m + 3 {
        state.h(q);
    }
    inner_product_oracle_chain(&mut state, x, y, k, offset)?;
    // [i' | x-slot | y | anc] → [i' | x-slot | anc]
    let mut state = state.discard_zero_qubit(1, CLEAN_TOLERANCE)?;
    // The freed x slot becomes the rotation qubit.
    state.ry(1, 2.0 * r.sqrt().asin());
    state.swap_qubits(0, 1);
    Ok(state)
}

/// `A_{j'}|0⟩` for the Hamming problem in the node layout.
pub fn hamming_prepare(
    x: &BitVector,
    y: &BitVector,
    k: u32,
    offset: u64,
    r: f64,
) -> Result<StateVector> {
    let layout = Layout::new(x, y, k, offset)?;
    let mut state = StateVector::zero(layout.m + 2)?;
    for q in 2..layout.m + 2 {
        state.h(q);
    }
    hamming_oracle_chain(&mut state, x, y, k, offset)?;
    state.ry(0, 2.0 * r.sqrt().asin());
    Ok(state)
}
