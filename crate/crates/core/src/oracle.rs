//! Marked-element sets and their per-node restrictions.
//!
//! An [`OracleSpec`] is the classical truth table of `χ_S` over `n`-bit
//! indices. Splitting the top `k` bits (prefix scheme) or the bottom `k` bits
//! (stride scheme) of the index yields `2^k` [`SubOracle`]s over `m = n − k`
//! bits whose marked sets partition `S`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported index-register width.
pub const MAX_WIDTH: u32 = 40;

/// How a node's local index `i'` maps back into the parent index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    /// Node `j` owns the indices whose top `k` bits equal `j`: `x = (j << m) | i'`.
    Prefix,
    /// Node `j` owns the indices congruent to `j` modulo `2^k`: `x = 2^k·i' + j`.
    Stride,
}

impl PartitionScheme {
    /// Parent index of local index `local` on node `node` for widths `(m, k)`.
    pub fn lift(self, m: u32, k: u32, node: u64, local: u64) -> u64 {
        match self {
            PartitionScheme::Prefix => (node << m) | local,
            PartitionScheme::Stride => (local << k) | node,
        }
    }

    /// Inverse of [`lift`](Self::lift): `(node, local)` of a parent index.
    pub fn split(self, m: u32, k: u32, x: u64) -> (u64, u64) {
        match self {
            PartitionScheme::Prefix => (x >> m, x & mask(m)),
            PartitionScheme::Stride => (x & mask(k), x >> k),
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionScheme::Prefix => f.write_str("prefix"),
            PartitionScheme::Stride => f.write_str("stride"),
        }
    }
}

impl std::str::FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefix" => Ok(PartitionScheme::Prefix),
            "stride" => Ok(PartitionScheme::Stride),
            other => Err(Error::domain(format!("unknown partition scheme `{other}`"))),
        }
    }
}

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Anything that answers membership queries over a `width`-bit index space.
pub trait Indicator {
    fn width(&self) -> u32;
    fn marked(&self) -> &BTreeSet<u64>;

    fn size(&self) -> u64 {
        1u64 << self.width()
    }

    /// Number of marked elements.
    fn count(&self) -> u64 {
        self.marked().len() as u64
    }

    /// `χ(x)`: whether `x` is marked.
    fn indicator(&self, x: u64) -> Result<bool> {
        if x >= self.size() {
            return Err(Error::domain(format!(
                "index {x} outside [0, 2^{})",
                self.width()
            )));
        }
        Ok(self.marked().contains(&x))
    }
}

/// The marked set `S` over `n`-bit indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSpec {
    n: u32,
    marked: BTreeSet<u64>,
}

impl OracleSpec {
    pub fn new(n: u32, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if n == 0 || n > MAX_WIDTH {
            return Err(Error::domain(format!(
                "register width n = {n} must be in [1, {MAX_WIDTH}]"
            )));
        }
        let marked: BTreeSet<u64> = marked.into_iter().collect();
        if let Some(&x) = marked.iter().next_back() {
            if x >= 1u64 << n {
                return Err(Error::domain(format!("marked element {x} >= 2^{n}")));
            }
        }
        Ok(OracleSpec { n, marked })
    }

    /// Builds an oracle over a universe of `universe` elements, rounding the
    /// universe up to the next power of two. Padding indices are unmarked.
    pub fn from_universe(universe: u64, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if universe == 0 {
            return Err(Error::domain("universe must be non-empty"));
        }
        let n = universe.next_power_of_two().trailing_zeros().max(1);
        let marked: BTreeSet<u64> = marked.into_iter().collect();
        if let Some(&x) = marked.iter().next_back() {
            if x >= universe {
                return Err(Error::domain(format!(
                    "marked element {x} outside universe of size {universe}"
                )));
            }
        }
        OracleSpec::new(n, marked)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn check_split(&self, k: u32) -> Result<()> {
        if k == 0 || k >= self.n {
            return Err(Error::domain(format!(
                "split width k = {k} must satisfy 1 <= k < n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Splits into `2^k` sub-oracles under `scheme`.
    pub fn decompose(&self, k: u32, scheme: PartitionScheme) -> Result<Vec<SubOracle>> {
        self.check_split(k)?;
        let m = self.n - k;
        let mut nodes: Vec<SubOracle> = (0..1u64 << k)
            .map(|j| SubOracle {
                m,
                k,
                node_id: j,
                scheme,
                marked_local: BTreeSet::new(),
            })
            .collect();
        for &x in &self.marked {
            let (node, local) = scheme.split(m, k, x);
            nodes[node as usize].marked_local.insert(local);
        }
        Ok(nodes)
    }

    /// `S_j = { i' | j·i' ∈ S }` with `j` the top `k` bits.
    pub fn decompose_prefix(&self, k: u32) -> Result<Vec<SubOracle>> {
        self.decompose(k, PartitionScheme::Prefix)
    }

    /// `{ i' | 2^k·i' + j' ∈ S }` for offsets `j' ∈ [0, 2^k)`.
    pub fn decompose_stride(&self, k: u32) -> Result<Vec<SubOracle>> {
        self.decompose(k, PartitionScheme::Stride)
    }
}

impl Indicator for OracleSpec {
    fn width(&self) -> u32 {
        self.n
    }
    fn marked(&self) -> &BTreeSet<u64> {
        &self.marked
    }
}

/// One node's restriction of a marked set to an `m = n − k` bit index space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubOracle {
    m: u32,
    k: u32,
    node_id: u64,
    scheme: PartitionScheme,
    marked_local: BTreeSet<u64>,
}

impl SubOracle {
    /// A free-standing sub-oracle, mostly useful for single-node runs.
    pub fn new(
        m: u32,
        k: u32,
        node_id: u64,
        scheme: PartitionScheme,
        marked_local: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        if m == 0 || m + k > MAX_WIDTH {
            return Err(Error::domain(format!("invalid widths m = {m}, k = {k}")));
        }
        if k < 64 && node_id >= 1u64 << k {
            return Err(Error::domain(format!("node id {node_id} >= 2^{k}")));
        }
        let marked_local: BTreeSet<u64> = marked_local.into_iter().collect();
        if let Some(&x) = marked_local.iter().next_back() {
            if x >= 1u64 << m {
                return Err(Error::domain(format!("local element {x} >= 2^{m}")));
            }
        }
        Ok(SubOracle {
            m,
            k,
            node_id,
            scheme,
            marked_local,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn node_id(&self) -> u64 {
        self.node_id
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    /// Ground-truth `t_j`.
    pub fn t_local(&self) -> u64 {
        self.marked_local.len() as u64
    }

    /// `a_j = t_j / 2^m`.
    pub fn amplitude(&self) -> f64 {
        self.t_local() as f64 / self.size() as f64
    }

    /// Maps a local index to the parent index space.
    pub fn lift(&self, local: u64) -> u64 {
        self.scheme.lift(self.m, self.k, self.node_id, local)
    }

    /// The marked set expressed in parent indices.
    pub fn lifted(&self) -> impl Iterator<Item = u64> + '_ {
        self.marked_local.iter().map(|&i| self.lift(i))
    }
}

impl Indicator for SubOracle {
    fn width(&self) -> u32 {
        self.m
    }
    fn marked(&self) -> &BTreeSet<u64> {
        &self.marked_local
    }
}

/// A bit string `x ∈ {0,1}^{len}` held by one party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitVector(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitVector(vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BitVector(self.0.iter().map(|b| !b).collect())
    }

    /// Appends zeros up to the next power of two (at least 2).
    pub fn padded(&self) -> Self {
        let target = self.0.len().next_power_of_two().max(2);
        let mut bits = self.0.clone();
        bits.resize(target, false);
        BitVector(bits)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::domain(format!(
                    "bit vector character {i} is `{other}`, expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector)
    }
}

/// Width `n` of a pair of equal-length power-of-two bit vectors.
pub(crate) fn pair_width(x: &BitVector, y: &BitVector) -> Result<u32> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "bit vector lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 || !x.len().is_power_of_two() {
        return Err(Error::domain(format!(
            "bit vector length {} is not a power of two >= 2",
            x.len()
        )));
    }
    Ok(x.len().trailing_zeros())
}

fn pair_suboracle(
    x: &BitVector,
    y: &BitVector,
    k: u32,
    offset: u64,
    combine: impl Fn(bool, bool) -> bool,
) -> Result<SubOracle> {
    let n = pair_width(x, y)?;
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "split width k = {k} must satisfy 1 <= k < n = {n}"
        )));
    }
    if offset >= 1u64 << k {
        return Err(Error::domain(format!("offset {offset} >= 2^{k}")));
    }
    let m = n - k;
    let marked = (0..1u64 << m).filter(|&i| {
        let g = PartitionScheme::Stride.lift(m, k, offset, i) as usize;
        combine(x.get(g), y.get(g))
    });
    SubOracle::new(m, k, offset, PartitionScheme::Stride, marked)
}

/// `{ i' | x_g ∧ y_g = 1 }` with `g = 2^k·i' + j'`.
pub fn inner_product_suboracle(x: &BitVector, y: &BitVector, k: u32, offset: u64) -> Result<SubOracle> {
    pair_suboracle(x, y, k, offset, |a, b| a && b)
}

/// `{ i' | x_g ⊕ y_g = 1 }` with `g = 2^k·i' + j'`.
pub fn hamming_suboracle(x: &BitVector, y: &BitVector, k: u32, offset: u64) -> Result<SubOracle> {
    pair_suboracle(x, y, k, offset, |a, b| a != b)
}
