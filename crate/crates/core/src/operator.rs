//! Product-operator algebra over spin-1/2 factors and its exact dense lowering.
//!
//! A [`ProductTerm`] is a complex coefficient times an ordered tensor product of
//! single-spin factors, qubit 1 first. Lowering follows the convention that
//! qubit 1 is the most significant bit of the binary basis index, so
//! `|0...0>` is index 0 and `(E/2 + I_z)^{⊗n}` lowers to `Diag(1, 0, ..., 0)`.
//!
//! [`DenseOperator`] is the verification oracle: an exact `2^n x 2^n` complex
//! matrix in double precision. Exponentials of Hermitian operators go through
//! a spectral decomposition only.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for algebraic identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const HALF: C64 = C64::new(0.5, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Sign `a` of a projector factor `E/2 + a I_mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One tensor factor of a product operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinFactor {
    /// Unity operator `E`.
    E,
    /// Spin operator `I_mu = sigma_mu / 2`.
    I(Axis),
    /// Rank-1 projector `E/2 + a I_mu`.
    P(Sign, Axis),
}

impl SpinFactor {
    pub const IX: SpinFactor = SpinFactor::I(Axis::X);
    pub const IY: SpinFactor = SpinFactor::I(Axis::Y);
    pub const IZ: SpinFactor = SpinFactor::I(Axis::Z);
    /// `|0><0|`
    pub const UP: SpinFactor = SpinFactor::P(Sign::Plus, Axis::Z);
    /// `|1><1|`
    pub const DOWN: SpinFactor = SpinFactor::P(Sign::Minus, Axis::Z);

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let h = 0.5;
        let pauli = |axis: Axis| -> [[C64; 2]; 2] {
            match axis {
                Axis::X => [[ZERO, C64::new(h, 0.0)], [C64::new(h, 0.0), ZERO]],
                Axis::Y => [[ZERO, C64::new(0.0, -h)], [C64::new(0.0, h), ZERO]],
                Axis::Z => [[C64::new(h, 0.0), ZERO], [ZERO, C64::new(-h, 0.0)]],
            }
        };
        match self {
            SpinFactor::E => [[ONE, ZERO], [ZERO, ONE]],
            SpinFactor::I(axis) => pauli(axis),
            SpinFactor::P(sign, axis) => {
                let s = pauli(axis);
                let a = sign.value();
                [
                    [HALF + s[0][0] * a, s[0][1] * a],
                    [s[1][0] * a, HALF + s[1][1] * a],
                ]
            }
        }
    }

    pub fn is_identity(self) -> bool {
        self == SpinFactor::E
    }
}

impl fmt::Display for SpinFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinFactor::E => f.write_str("E"),
            SpinFactor::I(axis) => write!(f, "I{axis}"),
            SpinFactor::P(Sign::Plus, axis) => write!(f, "(E/2+I{axis})"),
            SpinFactor::P(Sign::Minus, axis) => write!(f, "(E/2-I{axis})"),
        }
    }
}

/// The fixed 2x2 matrix of a single-spin factor.
pub fn factor_matrix(f: SpinFactor) -> DenseOperator {
    let m = f.matrix();
    DenseOperator::from_matrix(DMatrix::from_fn(2, 2, |i, j| m[i][j]))
}

/// Coefficient times an ordered tensor product of single-spin factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub coefficient: C64,
    pub factors: Vec<SpinFactor>,
}

impl ProductTerm {
    pub fn new(coefficient: f64, factors: Vec<SpinFactor>) -> Self {
        Self {
            coefficient: C64::new(coefficient, 0.0),
            factors,
        }
    }

    pub fn with_complex(coefficient: C64, factors: Vec<SpinFactor>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }

    /// `coefficient * E^{⊗n}`.
    pub fn identity(n: usize, coefficient: f64) -> Self {
        Self::new(coefficient, vec![SpinFactor::E; n])
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.coefficient.im == 0.0
    }

    /// Prepends `prefix` factors (qubits 1..) and appends `suffix` factors.
    pub fn embed(&self, prefix: &[SpinFactor], suffix: &[SpinFactor]) -> ProductTerm {
        let mut factors = Vec::with_capacity(prefix.len() + self.factors.len() + suffix.len());
        factors.extend_from_slice(prefix);
        factors.extend_from_slice(&self.factors);
        factors.extend_from_slice(suffix);
        ProductTerm {
            coefficient: self.coefficient,
            factors,
        }
    }

    /// Non-zero entries of row `row` of the lowered matrix.
    pub fn row_entries(&self, row: usize) -> Vec<(usize, C64)> {
        let n = self.n();
        let mut acc = vec![(0usize, self.coefficient)];
        for (q, f) in self.factors.iter().enumerate() {
            let rb = (row >> (n - 1 - q)) & 1;
            let m = f.matrix();
            let mut next = Vec::with_capacity(acc.len() * 2);
            for &(col, v) in &acc {
                for (cb, &entry) in m[rb].iter().enumerate() {
                    if entry != ZERO {
                        next.push(((col << 1) | cb, v * entry));
                    }
                }
            }
            acc = next;
        }
        acc
    }

    pub fn lower_sparse(&self) -> SparseOperator {
        let dim = 1usize << self.n();
        SparseOperator {
            dim,
            rows: (0..dim).map(|r| self.row_entries(r)).collect(),
        }
    }
}

impl fmt::Display for ProductTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient.im == 0.0 {
            write!(f, "{}", self.coefficient.re)?;
        } else {
            write!(f, "({})", self.coefficient)?;
        }
        for factor in &self.factors {
            write!(f, "·{factor}")?;
        }
        Ok(())
    }
}

/// A sum of product terms over a fixed number of qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OperatorSum {
    pub n: usize,
    pub terms: Vec<ProductTerm>,
}

impl OperatorSum {
    pub fn new(n: usize, terms: Vec<ProductTerm>) -> Result<Self> {
        for t in &terms {
            if t.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.n(),
                });
            }
        }
        Ok(Self { n, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lower_sparse(&self) -> SparseOperator {
        let dim = 1usize << self.n;
        let mut out = SparseOperator::zeros(dim);
        for t in &self.terms {
            out = out.add(&t.lower_sparse());
        }
        out
    }
}

/// Exact tensor-product lowering to a dense matrix.
pub trait Lower {
    fn lower(&self, n: usize) -> Result<DenseOperator>;
}

impl Lower for ProductTerm {
    fn lower(&self, n: usize) -> Result<DenseOperator> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n(),
            });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for r in 0..dim {
            for (c, v) in self.row_entries(r) {
                m[(r, c)] += v;
            }
        }
        let mut out = DenseOperator::from_matrix(m);
        out.hermitian = self.is_hermitian();
        Ok(out)
    }
}

impl Lower for OperatorSum {
    fn lower(&self, n: usize) -> Result<DenseOperator> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for t in &self.terms {
            if t.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.n(),
                });
            }
            for r in 0..dim {
                for (c, v) in t.row_entries(r) {
                    m[(r, c)] += v;
                }
            }
        }
        let mut out = DenseOperator::from_matrix(m);
        out.hermitian = self.terms.iter().all(ProductTerm::is_hermitian);
        Ok(out)
    }
}

/// Row-compressed operator used for large exhaustive structural checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    fn combine(mut row: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
        row.sort_by_key(|&(c, _)| c);
        let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match out.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => out.push((c, v)),
            }
        }
        out.retain(|&(_, v)| v != ZERO);
        out
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| Self::combine(a.iter().chain(b.iter()).copied().collect()))
            .collect();
        SparseOperator {
            dim: self.dim,
            rows,
        }
    }

    pub fn sub(&self, other: &SparseOperator) -> SparseOperator {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                Self::combine(
                    a.iter()
                        .copied()
                        .chain(b.iter().map(|&(c, v)| (c, -v)))
                        .collect(),
                )
            })
            .collect();
        SparseOperator {
            dim: self.dim,
            rows,
        }
    }

    pub fn mul(&self, other: &SparseOperator) -> SparseOperator {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = Vec::new();
                for &(k, a) in row {
                    for &(c, b) in &other.rows[k] {
                        acc.push((c, a * b));
                    }
                }
                Self::combine(acc)
            })
            .collect();
        SparseOperator {
            dim: self.dim,
            rows,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|&(_, v)| v.norm()))
            .fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> DenseOperator {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        DenseOperator::from_matrix(m)
    }

    /// Max entry difference against a dense operator.
    pub fn max_diff_dense(&self, dense: &DenseOperator) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            let mut expected = vec![ZERO; self.dim];
            for &(c, v) in &self.rows[r] {
                expected[c] += v;
            }
            for (c, e) in expected.iter().enumerate() {
                worst = worst.max((dense.mat[(r, c)] - e).norm());
            }
        }
        worst
    }
}

/// Exact complex matrix of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    hermitian: bool,
}

impl DenseOperator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self {
            mat,
            hermitian: false,
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        let mut out = Self::from_matrix(DMatrix::from_element(dim, dim, ZERO));
        out.hermitian = true;
        out
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::from_matrix(DMatrix::identity(dim, dim));
        out.hermitian = true;
        out
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let dim = values.len();
        let mut out = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            out.mat[(i, i)] = v;
        }
        out.hermitian = values.iter().all(|v| v.im == 0.0);
        out
    }

    /// `|i><j| + |j><i|` scaled by `value` (or `value |i><i|` when `i == j`).
    pub fn symmetric_pair(dim: usize, i: usize, j: usize, value: f64) -> Self {
        let mut out = Self::zeros(dim);
        out.mat[(i, j)] = C64::new(value, 0.0);
        out.mat[(j, i)] = C64::new(value, 0.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of qubits, when the dimension is a power of two.
    pub fn qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
        self.hermitian = false;
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermitian flag after checking `max |A - A†| < 1e-12`.
    pub fn mark_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation >= 1e-12 {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.adjoint(),
            hermitian: self.hermitian,
        }
    }

    fn check_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_dim(other)?;
        Ok(DenseOperator::from_matrix(&self.mat * &other.mat))
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_dim(other)?;
        let mut out = DenseOperator::from_matrix(&self.mat + &other.mat);
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_dim(other)?;
        let mut out = DenseOperator::from_matrix(&self.mat - &other.mat);
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> DenseOperator {
        let mut out = DenseOperator::from_matrix(&self.mat * s);
        out.hermitian = self.hermitian && s.im == 0.0;
        out
    }

    pub fn kron(&self, other: &DenseOperator) -> DenseOperator {
        let mut out = DenseOperator::from_matrix(self.mat.kronecker(&other.mat));
        out.hermitian = self.hermitian && other.hermitian;
        out
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &DenseOperator) -> Result<DenseOperator> {
        self.check_dim(u)?;
        let mut out = DenseOperator::from_matrix(&u.mat * &self.mat * u.mat.adjoint());
        out.hermitian = self.hermitian;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max entry magnitude of `self - other`.
    pub fn max_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Max entry deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let dim = self.dim();
        (0..dim).all(|i| (0..dim).all(|j| i == j || self.mat[(i, j)].norm() <= tol))
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.mat[(i, i)]).collect()
    }

    pub fn apply(&self, state: &[C64]) -> Result<Vec<C64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.len(),
            });
        }
        let dim = self.dim();
        Ok((0..dim)
            .map(|i| (0..dim).map(|j| self.mat[(i, j)] * state[j]).sum())
            .collect())
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let svd = self.mat.clone().svd(false, false);
        svd.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let sym = self.symmetrized()?;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    fn symmetrized(&self) -> Result<DMatrix<C64>> {
        let deviation = self.hermitian_deviation();
        if deviation > EXACT_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok((&self.mat + self.mat.adjoint()) * HALF)
    }
}

/// `exp(-i θ A)` for Hermitian `A` via spectral decomposition.
pub fn expm_hermitian(a: &DenseOperator, theta: f64) -> Result<DenseOperator> {
    let sym = a.symmetrized()?;
    let eig = SymmetricEigen::new(sym);
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, -theta * lambda);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(DenseOperator::from_matrix(scaled * v.adjoint()))
}

/// `AB + BA`.
pub fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    let mut out = ab.add(&ba)?;
    out.hermitian = a.hermitian && b.hermitian;
    Ok(out)
}

/// `AB - BA`.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    ab.sub(&ba)
}

/// Max entry magnitude of `A - e^{iφ} B`, with φ aligning the entry pair of
/// largest joint magnitude.
pub fn phase_aligned_distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    a.check_dim(b)?;
    let mut best = (0.0, ONE);
    for (x, y) in a.mat.iter().zip(b.mat.iter()) {
        let w = x.norm() * y.norm();
        if w > best.0 {
            best = (w, x * y.conj());
        }
    }
    let phase = if best.0 > 0.0 {
        best.1 / best.1.norm()
    } else {
        ONE
    };
    Ok(a.mat
        .iter()
        .zip(b.mat.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max))
}

/// Squared norm of a state vector.
pub fn norm_sqr(state: &[C64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum()
}

/// Max amplitude difference between two states.
pub fn state_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn factor_matrices() {
        let e = factor_matrix(SpinFactor::E);
        assert_eq!(e, DenseOperator::from_matrix(DMatrix::identity(2, 2)));
        let ix = factor_matrix(SpinFactor::IX);
        assert_eq!(ix.get(0, 1), c(0.5));
        assert_eq!(ix.get(1, 0), c(0.5));
        assert_eq!(ix.get(0, 0), ZERO);
        let up = factor_matrix(SpinFactor::UP);
        assert_eq!(up.diagonal_entries(), vec![ONE, ZERO]);
        assert_eq!(up.get(0, 1), ZERO);
    }

    #[test]
    fn projector_factors_are_rank_one() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for sign in [Sign::Plus, Sign::Minus] {
                let p = factor_matrix(SpinFactor::P(sign, axis));
                let p2 = p.mul(&p).unwrap();
                assert!(p2.max_diff(&p).unwrap() < 1e-15);
                let trace: C64 = p.diagonal_entries().iter().sum();
                assert!((trace - ONE).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn lower_small_terms() {
        let t = ProductTerm::new(2.0, vec![SpinFactor::IX]);
        let m = t.lower(1).unwrap();
        assert_eq!(m.get(0, 1), ONE);
        assert_eq!(m.get(1, 0), ONE);
        assert_eq!(m.get(0, 0), ZERO);

        let t = ProductTerm::new(2.0, vec![SpinFactor::UP, SpinFactor::IX]);
        let m = t.lower(2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 1) || (i, j) == (1, 0) { ONE } else { ZERO };
                assert_eq!(m.get(i, j), expected, "({i},{j})");
            }
        }
        assert!(matches!(t.lower(3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lower_sum_matches_b1_at_two_qubits() {
        let sum = OperatorSum::new(
            2,
            vec![
                ProductTerm::new(1.0, vec![SpinFactor::UP, SpinFactor::DOWN]),
                ProductTerm::new(2.0, vec![SpinFactor::IX, SpinFactor::UP]),
            ],
        )
        .unwrap();
        let m = sum.lower(2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i + j == 2 { ONE } else { ZERO };
                assert_eq!(m.get(i, j), expected);
            }
        }
    }

    #[test]
    fn expm_cases() {
        let zero = DenseOperator::zeros(4);
        let u = expm_hermitian(&zero, 1.3).unwrap();
        assert!(u.max_diff(&DenseOperator::identity(4)).unwrap() < 1e-14);

        let theta = 0.77;
        let iz = factor_matrix(SpinFactor::IZ);
        let u = expm_hermitian(&iz, theta).unwrap();
        let expected = DenseOperator::diagonal(&[
            C64::from_polar(1.0, -theta / 2.0),
            C64::from_polar(1.0, theta / 2.0),
        ]);
        assert!(u.max_diff(&expected).unwrap() < 1e-14);

        let mut bad = DenseOperator::zeros(2);
        bad.set(0, 1, ONE);
        assert!(matches!(expm_hermitian(&bad, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn commutator_identities() {
        let a = ProductTerm::new(1.5, vec![SpinFactor::IX, SpinFactor::P(Sign::Minus, Axis::Y)])
            .lower(2)
            .unwrap();
        let id = DenseOperator::identity(4);
        let ac = anticommutator(&id, &a).unwrap();
        assert!(ac.max_diff(&a.scale(c(2.0))).unwrap() < 1e-15);
        assert!(commutator(&a, &a).unwrap().max_abs() < 1e-15);
        assert!(matches!(
            commutator(&a, &DenseOperator::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phase_alignment() {
        let u = expm_hermitian(
            &ProductTerm::new(1.0, vec![SpinFactor::IY, SpinFactor::IZ]).lower(2).unwrap(),
            0.4,
        )
        .unwrap();
        assert!(phase_aligned_distance(&u, &u).unwrap() < 1e-15);
        let minus_i = u.scale(C64::new(0.0, -1.0));
        assert!(phase_aligned_distance(&u, &minus_i).unwrap() < 1e-15);
        let x = ProductTerm::new(2.0, vec![SpinFactor::IX]).lower(1).unwrap();
        let d = phase_aligned_distance(&DenseOperator::identity(2), &x).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_norm_of_pauli() {
        let x = ProductTerm::new(4.0, vec![SpinFactor::IX, SpinFactor::IY]).lower(2).unwrap();
        assert!((x.spectral_norm() - 1.0).abs() < 1e-12);
        let ev = x.hermitian_eigenvalues().unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expm_pi_rotation_flips() {
        let ix = factor_matrix(SpinFactor::IX);
        let u = expm_hermitian(&ix, PI).unwrap();
        // exp(-i pi I_x) = -i sigma_x
        assert!((u.get(0, 1) - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(u.get(0, 0).norm() < 1e-14);
    }
}
