//! Hamming-weight subspace decomposition of the `n`-qubit Hilbert space.
//!
//! Subspace `m` is spanned by the computational basis states with exactly `m`
//! qubits in `|1>`. Its dimension is `C(n, m)`. In weight-lex order the
//! subspaces occupy contiguous position ranges `l_m ..= L_m`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{norm_sqr, DenseOperator, C64, ONE};

/// Largest register for which layouts (and dense operators) are built.
pub const MAX_LAYOUT_QUBITS: usize = 14;
/// Largest register for count-only layouts.
pub const MAX_COUNT_QUBITS: usize = 30;
/// Subspace masses treated as numerical zero by [`subspace_support`].
pub const SUPPORT_FLOOR: f64 = 1e-20;

/// Binomial coefficient, exact for the register sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceLayout {
    pub n: usize,
    /// `d[m] = C(n, m)`
    pub d: Vec<usize>,
    /// Lower offsets `l_m`.
    pub l: Vec<usize>,
    /// Upper offsets `L_m = l_m + d(m) - 1`.
    #[serde(rename = "L")]
    pub upper: Vec<usize>,
}

/// Layout for `1 <= n <= 14`.
pub fn build_layout(n: usize) -> Result<SubspaceLayout> {
    if !(1..=MAX_LAYOUT_QUBITS).contains(&n) {
        return Err(Error::QubitCount {
            n,
            min: 1,
            max: MAX_LAYOUT_QUBITS,
        });
    }
    Ok(SubspaceLayout::compute(n))
}

/// Layout for count-only work up to 30 qubits; never densified.
pub fn build_count_layout(n: usize) -> Result<SubspaceLayout> {
    if !(1..=MAX_COUNT_QUBITS).contains(&n) {
        return Err(Error::QubitCount {
            n,
            min: 1,
            max: MAX_COUNT_QUBITS,
        });
    }
    Ok(SubspaceLayout::compute(n))
}

impl SubspaceLayout {
    fn compute(n: usize) -> Self {
        let d: Vec<usize> = (0..=n).map(|m| binomial(n, m)).collect();
        let mut l = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for &dm in &d {
            l.push(acc);
            acc += dm;
        }
        let upper = l.iter().zip(&d).map(|(&lm, &dm)| lm + dm - 1).collect();
        Self { n, d, l, upper }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Index of the default transfer target: `n/2` for even `n`, `(n-1)/2` for odd.
    pub fn peak(&self) -> usize {
        self.n / 2
    }

    pub fn check_subspace(&self, m: usize) -> Result<()> {
        if m > self.n {
            return Err(Error::InvalidTransfer(format!(
                "subspace {m} outside 0..={}",
                self.n
            )));
        }
        Ok(())
    }

    /// Weight-lex position range of subspace `m`.
    pub fn range(&self, m: usize) -> std::ops::RangeInclusive<usize> {
        self.l[m]..=self.upper[m]
    }

    /// Subspace containing weight-lex position `pos`.
    pub fn subspace_of_position(&self, pos: usize) -> usize {
        self.l.partition_point(|&lm| lm <= pos) - 1
    }
}

impl fmt::Display for SubspaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {} (N = {})", self.n, self.dim())?;
        writeln!(f, "{:>4} {:>10} {:>10} {:>10}", "m", "d(m)", "l_m", "L_m")?;
        for m in 0..=self.n {
            writeln!(
                f,
                "{:>4} {:>10} {:>10} {:>10}",
                m, self.d[m], self.l[m], self.upper[m]
            )?;
        }
        Ok(())
    }
}

/// Number of `|1>` spins in a binary basis index.
pub fn weight_of(binary_index: usize, _n: usize) -> usize {
    binary_index.count_ones() as usize
}

/// Weight-lex position of a binary index.
pub fn weight_rank(binary_index: usize, layout: &SubspaceLayout) -> Result<usize> {
    if binary_index >= layout.dim() {
        return Err(Error::BasisIndex {
            index: binary_index,
            dim: layout.dim(),
        });
    }
    let m = weight_of(binary_index, layout.n);
    // combinatorial number system: rank among same-weight indices
    let mut rank = 0;
    let mut remaining = m;
    for p in (0..layout.n).rev() {
        if binary_index >> p & 1 == 1 {
            rank += binomial(p, remaining);
            remaining -= 1;
        }
    }
    Ok(layout.l[m] + rank)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisOrdering {
    #[default]
    Binary,
    WeightLex,
}

impl FromStr for BasisOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(Self::Binary),
            "weightlex" | "weight-lex" | "weight_lex" => Ok(Self::WeightLex),
            other => Err(Error::Config(format!("unknown ordering '{other}'"))),
        }
    }
}

impl fmt::Display for BasisOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Binary => "binary",
            Self::WeightLex => "weightlex",
        })
    }
}

/// Bijection between weight-lex positions and binary indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisPermutation {
    pub n: usize,
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl BasisPermutation {
    pub fn new(layout: &SubspaceLayout) -> Self {
        let dim = layout.dim();
        let mut forward: Vec<usize> = (0..dim).collect();
        forward.sort_by_key(|&b| (b.count_ones(), b));
        let mut inverse = vec![0; dim];
        for (pos, &b) in forward.iter().enumerate() {
            inverse[b] = pos;
        }
        Self {
            n: layout.n,
            forward,
            inverse,
        }
    }

    /// Binary index at weight-lex position `pos`.
    pub fn forward(&self, pos: usize) -> usize {
        self.forward[pos]
    }

    /// Weight-lex position of binary index `b`.
    pub fn inverse(&self, b: usize) -> usize {
        self.inverse[b]
    }

    pub fn forward_map(&self) -> &[usize] {
        &self.forward
    }

    /// Re-indexes a binary-ordered operator into weight-lex order (`P† A P`).
    pub fn to_weight_order(&self, a: &DenseOperator) -> DenseOperator {
        let f = &self.forward;
        let mut out = DenseOperator::from_fn(f.len(), |i, j| a.get(f[i], f[j]));
        if a.is_flagged_hermitian() {
            out = out.mark_hermitian().expect("permutation preserves hermiticity");
        }
        out
    }

    /// Re-indexes a weight-lex operator into binary order (`P A P†`).
    pub fn to_binary_order(&self, a: &DenseOperator) -> DenseOperator {
        let inv = &self.inverse;
        let mut out = DenseOperator::from_fn(inv.len(), |i, j| a.get(inv[i], inv[j]));
        if a.is_flagged_hermitian() {
            out = out.mark_hermitian().expect("permutation preserves hermiticity");
        }
        out
    }

    pub fn state_to_weight_order(&self, state: &[C64]) -> Vec<C64> {
        self.forward.iter().map(|&b| state[b]).collect()
    }

    pub fn state_to_binary_order(&self, state: &[C64]) -> Vec<C64> {
        self.inverse.iter().map(|&p| state[p]).collect()
    }
}

/// Permutation matrix `P` with `P|pos> = |forward(pos)>`.
pub fn permutation_dense(layout: &SubspaceLayout) -> Result<DenseOperator> {
    if layout.n > 12 {
        return Err(Error::QubitCount {
            n: layout.n,
            min: 1,
            max: 12,
        });
    }
    let perm = BasisPermutation::new(layout);
    let dim = layout.dim();
    let mut p = DenseOperator::zeros(dim);
    for pos in 0..dim {
        p.set(perm.forward(pos), pos, ONE);
    }
    Ok(p)
}

/// Probability mass per subspace; masses at or below [`SUPPORT_FLOOR`] are omitted.
pub fn subspace_support(
    state: &[C64],
    layout: &SubspaceLayout,
    ordering: BasisOrdering,
) -> Result<BTreeMap<usize, f64>> {
    if state.len() != layout.dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            found: state.len(),
        });
    }
    let total = norm_sqr(state);
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm_sqr: total });
    }
    let mut mass = vec![0.0; layout.n + 1];
    for (i, a) in state.iter().enumerate() {
        let m = match ordering {
            BasisOrdering::Binary => weight_of(i, layout.n),
            BasisOrdering::WeightLex => layout.subspace_of_position(i),
        };
        mass[m] += a.norm_sqr();
    }
    Ok(mass
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > SUPPORT_FLOOR)
        .collect())
}
