//! Subspace transfer: state- and subspace-selective p-quantum operators, the
//! anti-diagonal index window, and the product-formula synthesis of
//! `U_pm(θ) = exp(-iθ Q_pm)`.
//!
//! Every index and matrix here lives in weight-lex positions. Circuits act on
//! a register whose basis labels are those positions; mapping them onto the
//! physical binary register is the permutation of [`permutation_dense`].
//!
//! [`permutation_dense`]: crate::layout::permutation_dense

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_to_state, Circuit, Gate, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::generators::{
    build_b, build_diag, naive_gm, synth_bk, synth_block_diagonal, AntiDiagonalSpec, DiagSpec,
    GmSpec,
};
use crate::layout::{BasisOrdering, SubspaceLayout, MAX_LAYOUT_QUBITS};
use crate::operator::{
    anticommutator, expm_hermitian, norm_sqr, Axis, DenseOperator, C64, EXACT_TOL, ZERO,
};

/// Inclusive range of admissible anti-diagonal indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub k_min: i64,
    pub k_max: i64,
}

impl IndexWindow {
    pub fn contains(&self, k: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    pub fn width(&self) -> i64 {
        self.k_max - self.k_min
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }
}

/// Transfer of subspace `m` into `target` by `U_pm(θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub layout: SubspaceLayout,
    pub m: usize,
    pub target: usize,
    pub theta: f64,
    pub trotter_l: usize,
    pub k: Option<i64>,
}

impl TransferSpec {
    /// Defaults: target the largest subspace, `θ = π`, `L = 1`, `k` solved.
    pub fn new(layout: &SubspaceLayout, m: usize) -> Result<Self> {
        Self {
            layout: layout.clone(),
            m,
            target: layout.peak(),
            theta: PI,
            trotter_l: 1,
            k: None,
        }
        .validated()
    }

    pub fn with_target(mut self, target: usize) -> Result<Self> {
        self.target = target;
        self.validated()
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_trotter(mut self, trotter_l: usize) -> Result<Self> {
        self.trotter_l = trotter_l;
        self.validated()
    }

    pub fn with_k(mut self, k: i64) -> Result<Self> {
        self.k = Some(k);
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.layout.check_subspace(self.m)?;
        self.layout.check_subspace(self.target)?;
        if self.m >= self.target || self.target > self.layout.n - self.m {
            return Err(Error::InvalidTransfer(format!(
                "need m < m' <= n - m, got m = {}, m' = {}, n = {}",
                self.m, self.target, self.layout.n
            )));
        }
        if self.trotter_l == 0 {
            return Err(Error::Config("trotter depth must be at least 1".into()));
        }
        if let Some(k) = self.k {
            let w = solve_index_window(&self.layout, self.m, self.target)?;
            if !w.contains(k) {
                return Err(Error::InvalidTransfer(format!(
                    "k = {k} outside window {}..={}",
                    w.k_min, w.k_max
                )));
            }
        }
        Ok(self)
    }

    /// The explicit `k`, or the solver's choice when the target is the peak.
    pub fn resolve_k(&self) -> Result<i64> {
        match self.k {
            Some(k) => Ok(k),
            None => Ok(choose_k(&self.layout, self.m, self.target)?.k),
        }
    }
}

fn dim_i64(layout: &SubspaceLayout) -> i64 {
    1i64 << layout.n
}

/// Partner position `N - k - 1 - p` of position `p`.
fn partner(layout: &SubspaceLayout, k: i64, p: usize) -> i64 {
    dim_i64(layout) - k - 1 - p as i64
}

/// Admissible `k` by enumerating every index and every source position.
/// Registers above [`MAX_LAYOUT_QUBITS`] fall back to the closed form.
pub fn solve_index_window(layout: &SubspaceLayout, m: usize, target: usize) -> Result<IndexWindow> {
    layout.check_subspace(m)?;
    layout.check_subspace(target)?;
    let empty = Error::EmptyWindow {
        n: layout.n,
        from: m,
        to: target,
    };
    if m >= target {
        return Err(empty);
    }
    if layout.n > MAX_LAYOUT_QUBITS {
        return window_closed_form(layout, m, target).ok_or(empty);
    }
    let (lo, hi) = (layout.l[target] as i64, layout.upper[target] as i64);
    let max = dim_i64(layout) - 2;
    let admissible: Vec<i64> = (-max..=max)
        .filter(|&k| {
            layout
                .range(m)
                .all(|p| (lo..=hi).contains(&partner(layout, k, p)))
        })
        .collect();
    match (admissible.first(), admissible.last()) {
        (Some(&k_min), Some(&k_max)) => {
            debug_assert_eq!((k_max - k_min + 1) as usize, admissible.len());
            Ok(IndexWindow { k_min, k_max })
        }
        _ => Err(empty),
    }
}

/// `N - l_m - l_{m'} - d(m') <= k <= N - l_m - l_{m'} - d(m)`.
pub fn window_closed_form(layout: &SubspaceLayout, m: usize, target: usize) -> Option<IndexWindow> {
    let base = dim_i64(layout) - layout.l[m] as i64 - layout.l[target] as i64;
    let w = IndexWindow {
        k_min: base - layout.d[target] as i64,
        k_max: base - layout.d[m] as i64,
    };
    (m < target && w.k_min <= w.k_max && w.k_max <= dim_i64(layout) - 2).then_some(w)
}

/// Window into the largest subspace written through the peak offsets only.
pub fn peak_window_closed_form(layout: &SubspaceLayout, m: usize) -> Option<IndexWindow> {
    let p = layout.peak();
    if m >= p {
        return None;
    }
    let (lp, dp) = (layout.l[p] as i64, layout.d[p] as i64);
    let (lm, dm) = (layout.l[m] as i64, layout.d[m] as i64);
    Some(if layout.n.is_multiple_of(2) {
        IndexWindow {
            k_min: lp - lm,
            k_max: lp - lm + dp - dm,
        }
    } else {
        IndexWindow {
            k_min: lp + dp - lm,
            k_max: lp + 2 * dp - lm - dm,
        }
    })
}

/// How [`choose_k`] arrived at its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRegime {
    /// `k = 2^{n-1}`; `b_k` is a single product term.
    HalfRegister,
    /// `k = 2^{n-k0-1} + μ 2^{n-n0-1}`.
    Binary,
    /// Sparsest in-window index nearest the rejected candidate.
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KChoice {
    pub k: i64,
    pub regime: KRegime,
    pub candidate: i64,
    pub window: IndexWindow,
    pub m0: Option<usize>,
    pub n0: i32,
    pub k0: i32,
}

/// Largest `m` with `l_{m+1} <= d(peak) / 2`.
pub fn regime_a_bound(layout: &SubspaceLayout) -> Option<usize> {
    let half = layout.d[layout.peak()] as f64 / 2.0;
    (0..layout.n)
        .take_while(|&m| layout.l[m + 1] as f64 <= half)
        .last()
}

fn floor_log2(x: f64) -> i32 {
    x.log2().floor() as i32
}

/// `(n0, k0)`: floor-of-log exponents of the binary regime.
pub fn binary_exponents(n: usize) -> (i32, i32) {
    let nf = n as f64;
    let r = (PI / 2.0).sqrt();
    let k0 = floor_log2(nf.sqrt() * r / (1.0 + 2.0 / nf));
    let n0 = if n.is_multiple_of(2) {
        floor_log2(0.5 * nf * nf.sqrt() * r * (1.0 + 2.0 / nf))
    } else {
        let stirling = (1.0 + 1.0 / nf).powf(nf).sqrt() / (1.0 + 1.0 / (nf - 1.0)).powf(nf - 1.0).sqrt();
        floor_log2(r * (nf + 3.0) / 4.0 * (1.0 + nf) * (nf - 1.0).sqrt() / nf * stirling)
    };
    (n0, k0)
}

fn pow2(e: i32) -> Option<i64> {
    (0..62).contains(&e).then(|| 1i64 << e)
}

/// Anti-diagonal index for the transfer `m -> target`, validated against the
/// enumerated window.
pub fn choose_k(layout: &SubspaceLayout, m: usize, target: usize) -> Result<KChoice> {
    let window = solve_index_window(layout, m, target)?;
    let n = layout.n;
    let m0 = regime_a_bound(layout);
    let (n0, k0) = binary_exponents(n);
    let (regime, candidate) = if target != layout.peak() {
        (KRegime::Fallback, window.k_min)
    } else if m0.is_some_and(|m0| m <= m0) {
        (KRegime::HalfRegister, 1i64 << (n - 1))
    } else {
        let base = pow2(n as i32 - k0 - 1);
        let step = pow2(n as i32 - n0 - 1);
        match (base, step) {
            (Some(base), Some(step)) => {
                let mu = (window.k_min - base).div_euclid(step) + 1;
                (KRegime::Binary, base + mu * step)
            }
            _ => (KRegime::Fallback, window.k_min),
        }
    };
    let mut choice = KChoice {
        k: candidate,
        regime,
        candidate,
        window,
        m0,
        n0,
        k0,
    };
    if regime == KRegime::Fallback || !window.contains(candidate) {
        choice.k = window
            .iter()
            .min_by_key(|&k| (k.unsigned_abs().count_ones(), (k - candidate).abs(), k))
            .expect("window is nonempty");
        if regime != KRegime::Fallback {
            log::warn!(
                "n = {n}, m = {m}: candidate k = {candidate} outside {}..={}, using {}",
                window.k_min,
                window.k_max,
                choice.k
            );
        }
        choice.regime = KRegime::Fallback;
    }
    Ok(choice)
}

/// `Q_pm` with its source/target position pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct QpmOperator {
    pub m: usize,
    pub target: usize,
    pub k: i64,
    pub pairs: Vec<(usize, usize)>,
    pub dense: DenseOperator,
}

/// Source/target pairs `(l_m + l', N - k - 1 - l_m - l')` of `Q_pm`, checking
/// that all targets land in one higher subspace and `N - 1 - k > 2 L_m`.
pub fn qpm_pairs(layout: &SubspaceLayout, m: usize, k: i64) -> Result<(usize, Vec<(usize, usize)>)> {
    layout.check_subspace(m)?;
    let dim = dim_i64(layout);
    if k.abs() > dim - 2 {
        return Err(Error::AntiDiagonalIndex { k, max: dim - 2 });
    }
    let upper_m = layout.upper[m] as i64;
    if dim - 1 - k <= 2 * upper_m {
        return Err(Error::InvalidTransfer(format!(
            "N - 1 - k = {} must exceed 2 L_m = {}",
            dim - 1 - k,
            2 * upper_m
        )));
    }
    let first = partner(layout, k, layout.l[m]);
    if !(0..dim).contains(&first) {
        return Err(Error::InvalidTransfer(format!("k = {k} has no partner for l_m")));
    }
    let target = layout.subspace_of_position(first as usize);
    let mut pairs = Vec::with_capacity(layout.d[m]);
    for p in layout.range(m) {
        let t = partner(layout, k, p);
        if t < 0 || !layout.range(target).contains(&(t as usize)) || target <= m {
            return Err(Error::InvalidTransfer(format!(
                "k = {k}: position {p} pairs with {t}, outside subspace {target} > {m}"
            )));
        }
        pairs.push((p, t as usize));
    }
    Ok((target, pairs))
}

fn check_dense_layout(layout: &SubspaceLayout) -> Result<()> {
    if layout.n > MAX_DENSE_QUBITS {
        return Err(Error::QubitCount {
            n: layout.n,
            min: 1,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// `Q_pm = ½ [b_k, g_m]_+` in weight-lex positions.
pub fn build_qpm(layout: &SubspaceLayout, m: usize, k: i64) -> Result<QpmOperator> {
    check_dense_layout(layout)?;
    let (target, pairs) = qpm_pairs(layout, m, k)?;
    let b = build_b(&AntiDiagonalSpec::new(layout.n, k)?)?;
    let g = gm_positions(layout, m)?;
    let dense = anticommutator(&b, &g)?.scale(C64::new(0.5, 0.0));
    Ok(QpmOperator {
        m,
        target,
        k,
        pairs,
        dense,
    })
}

/// `g_m` as a diagonal over weight-lex positions.
pub fn gm_positions(layout: &SubspaceLayout, m: usize) -> Result<DenseOperator> {
    build_diag(&DiagSpec::Gm(GmSpec::new(layout, m)?), BasisOrdering::WeightLex)
}

fn check_pair(source: usize, target: usize, n: usize) -> Result<usize> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::QubitCount {
            n,
            min: 1,
            max: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    if source == target {
        return Err(Error::InvalidTransfer(format!(
            "source and target positions coincide ({source})"
        )));
    }
    for p in [source, target] {
        if p >= dim {
            return Err(Error::BasisIndex { index: p, dim });
        }
    }
    Ok(dim)
}

/// `Q_psk = ½(|s⟩⟨t| + |t⟩⟨s|)`.
pub fn build_qpsk(source: usize, target: usize, n: usize) -> Result<DenseOperator> {
    let dim = check_pair(source, target, n)?;
    DenseOperator::symmetric_pair(dim, source, target, 0.5).mark_hermitian()
}

/// `exp(-iθ Q_psk) = E + (cos(θ/2) - 1)(|s⟩⟨s| + |t⟩⟨t|) - 2i sin(θ/2) Q_psk`.
pub fn build_upsk_closed(source: usize, target: usize, theta: f64, n: usize) -> Result<DenseOperator> {
    let dim = check_pair(source, target, n)?;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut u = DenseOperator::identity(dim);
    u.set(source, source, C64::new(c, 0.0));
    u.set(target, target, C64::new(c, 0.0));
    u.set(source, target, C64::new(0.0, -s));
    u.set(target, source, C64::new(0.0, -s));
    Ok(u)
}

/// Dense `exp(-iθ Q_pm)` for a transfer spec.
pub fn upm_dense_oracle(spec: &TransferSpec) -> Result<DenseOperator> {
    let q = build_qpm(&spec.layout, spec.m, spec.resolve_k()?)?;
    expm_hermitian(&q.dense, spec.theta)
}

/// Commuting product of the closed-form pair rotations.
pub fn upm_pair_product(spec: &TransferSpec) -> Result<DenseOperator> {
    check_dense_layout(&spec.layout)?;
    let (_, pairs) = qpm_pairs(&spec.layout, spec.m, spec.resolve_k()?)?;
    pairs.iter().try_fold(DenseOperator::identity(spec.layout.dim()), |acc, &(s, t)| {
        acc.mul(&build_upsk_closed(s, t, spec.theta, spec.layout.n)?)
    })
}

/// Max deviation of `G_m(π) b_k G_m(π)^{-1}` from `b_k - 2[b_k, g_m]_+`.
pub fn eq40_deviation(layout: &SubspaceLayout, m: usize, k: i64) -> Result<f64> {
    check_dense_layout(layout)?;
    let b = build_b(&AntiDiagonalSpec::new(layout.n, k)?)?;
    let g = gm_positions(layout, m)?;
    let lhs = b.conjugate_by(&expm_hermitian(&g, PI)?)?;
    let rhs = b.sub(&anticommutator(&b, &g)?.scale(C64::new(2.0, 0.0)))?;
    lhs.max_diff(&rhs)
}

pub fn check_eq40(layout: &SubspaceLayout, m: usize, k: i64) -> bool {
    eq40_deviation(layout, m, k).is_ok_and(|d| d <= EXACT_TOL)
}

/// Gate realization of `G_m(π)` on the position register.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GmRealization {
    /// Parity reduction of the block `l_m..=L_m`.
    #[default]
    Block,
    /// One selective rotation per position.
    Naive,
}

/// `[exp(-i(θ/4L) b_k) G_m(π) exp(i(θ/4L) b_k) G_m(π)^{-1}]^L` on the
/// weight-lex position register.
pub fn synth_upm(spec: &TransferSpec, realization: GmRealization) -> Result<Circuit> {
    let layout = &spec.layout;
    let n = layout.n;
    let k = spec.resolve_k()?;
    qpm_pairs(layout, spec.m, k)?;
    let gspec = GmSpec::new(layout, spec.m)?;
    let g_pi = match realization {
        GmRealization::Block => synth_block_diagonal(&gspec.position_block(), PI),
        GmRealization::Naive => naive_gm(&gspec, PI, BasisOrdering::WeightLex)?,
    };
    let g_inv = g_pi.inverse();
    let alpha = spec.theta / (4.0 * spec.trotter_l as f64);
    let b_minus = synth_bk(k, -alpha, 1, n)?;
    let b_plus = synth_bk(k, alpha, 1, n)?;
    let mut c = Circuit::new(
        n,
        format!(
            "U_pm[m={}->{}, k={k}, θ={}, L={}, G={realization:?}] on weight-lex positions",
            spec.m, spec.target, spec.theta, spec.trotter_l
        ),
    );
    for _ in 0..spec.trotter_l {
        for part in [&g_inv, &b_minus, &g_pi, &b_plus] {
            c.append(part)?;
        }
    }
    Ok(c)
}

/// `Π_k exp(-iπ I_kx)`: exchanges subspaces `m` and `n - m` (binary register).
pub fn symmetric_flip(n: usize) -> Result<Circuit> {
    Circuit::from_gates(
        n,
        "symmetric_flip",
        (1..=n).map(|q| Gate::single(q, Axis::X, PI)).collect(),
    )
}

fn check_source_state(state: &[C64], layout: &SubspaceLayout, m: usize) -> Result<()> {
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
    let outside: f64 = state
        .iter()
        .enumerate()
        .filter(|(p, _)| !layout.range(m).contains(p))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if outside > 1e-8 {
        return Err(Error::SupportOutsideSubspace { subspace: m, outside });
    }
    Ok(())
}

/// Apply `U_pm(θ)` to a weight-lex state supported in subspace `m`, either
/// through the pair rotations in closed form or through the synthesized
/// circuit.
pub fn transfer_state(state: &[C64], spec: &TransferSpec, use_exact: bool) -> Result<Vec<C64>> {
    check_source_state(state, &spec.layout, spec.m)?;
    let k = spec.resolve_k()?;
    if !use_exact {
        return apply_to_state(&synth_upm(spec, GmRealization::Block)?, state);
    }
    let (_, pairs) = qpm_pairs(&spec.layout, spec.m, k)?;
    let (c, s) = ((spec.theta / 2.0).cos(), (spec.theta / 2.0).sin());
    let mut out = state.to_vec();
    for (src, tgt) in pairs {
        let (a, b) = (state[src], state[tgt]);
        out[src] = a * c - C64::new(0.0, s) * b;
        out[tgt] = b * c - C64::new(0.0, s) * a;
    }
    Ok(out)
}

/// State carrying each source amplitude onto its paired target position.
pub fn paired_image(state: &[C64], pairs: &[(usize, usize)]) -> Vec<C64> {
    let mut out = vec![ZERO; state.len()];
    for &(s, t) in pairs {
        out[t] = state[s];
    }
    out
}

/// Normalized complex-Gaussian state on the positions of subspace `m`.
pub fn random_subspace_state(layout: &SubspaceLayout, m: usize, seed: u64) -> Result<Vec<C64>> {
    layout.check_subspace(m)?;
    if layout.n > crate::circuit::MAX_STATE_QUBITS {
        return Err(Error::QubitCount {
            n: layout.n,
            min: 1,
            max: crate::circuit::MAX_STATE_QUBITS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = vec![ZERO; layout.dim()];
    for p in layout.range(m) {
        state[p] = C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    }
    let norm = norm_sqr(&state).sqrt();
    state.iter_mut().for_each(|a| *a /= norm);
    Ok(state)
}
