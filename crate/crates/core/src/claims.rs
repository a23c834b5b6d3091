//! Claims suite: every checkable statement about the constructions, run as
//! independent seeded jobs and reported as JSON lines.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_to_dense, count, MAX_DENSE_QUBITS};
use crate::elementary::synth_multibody_zz;
use crate::error::{Error, Result};
use crate::generators::{
    build_b, build_bbar, expand_b, plan_bk, plan_uk, synth_block_diagonal, synth_uk,
    AntiDiagonalSpec, BkPath, DiagonalBlockSpec, GmSpec, bk_path,
};
use crate::layout::{build_count_layout, build_layout, subspace_support, BasisOrdering, SubspaceLayout};
use crate::operator::{
    anticommutator, commutator, expm_hermitian, phase_aligned_distance, state_distance, DenseOperator,
    Lower, ProductTerm, SpinFactor, C64, ZERO,
};
use crate::transfer::{
    build_qpsk, build_upsk_closed, choose_k, eq40_deviation, gm_positions, paired_image,
    peak_window_closed_form, qpm_pairs, random_subspace_state, regime_a_bound, solve_index_window,
    synth_upm, upm_dense_oracle, window_closed_form, GmRealization, TransferSpec,
};

pub const EQ6_CLOSED_FORM: &str = "EQ6_CLOSED_FORM";
pub const EQ7_PHASE: &str = "EQ7_PHASE";
pub const EQ8_TRANSFER: &str = "EQ8_TRANSFER";
pub const EXPAND_B: &str = "EXPAND_B";
pub const EXPAND_B_TERMS: &str = "EXPAND_B_TERMS";
pub const EQ10_ZZ: &str = "EQ10_ZZ";
pub const BLOCK_DIAG: &str = "BLOCK_DIAG";
pub const BLOCK_COUNT_2N: &str = "BLOCK_COUNT_2N";
pub const INDEX_WINDOW: &str = "INDEX_WINDOW";
pub const REGIME_A: &str = "REGIME_A";
pub const EQ38_EXPANSION: &str = "EQ38_EXPANSION";
pub const EQ40_IDENTITY: &str = "EQ40_IDENTITY";
pub const EQ40_COUNTEREXAMPLE: &str = "EQ40_COUNTEREXAMPLE";
pub const NORMS: &str = "NORMS";
pub const EQ24_CONJ: &str = "EQ24_CONJ";
pub const TROTTER_ORDER: &str = "TROTTER_ORDER";
pub const COUNT_ZZ: &str = "COUNT_ZZ";
pub const COUNT_GM_2N: &str = "COUNT_GM_2N";
pub const COUNT_UK_N2: &str = "COUNT_UK_N2";
pub const COUNT_BK: &str = "COUNT_BK";

/// Claims that build dense matrices (`n <= 12`).
pub const DENSE_CLAIMS: &[&str] = &[
    EQ6_CLOSED_FORM,
    EQ7_PHASE,
    EQ8_TRANSFER,
    EXPAND_B,
    EXPAND_B_TERMS,
    EQ10_ZZ,
    BLOCK_DIAG,
    BLOCK_COUNT_2N,
    INDEX_WINDOW,
    REGIME_A,
    EQ38_EXPANSION,
    EQ40_IDENTITY,
    EQ40_COUNTEREXAMPLE,
    NORMS,
    EQ24_CONJ,
    TROTTER_ORDER,
];

/// Symbolic gate-count claims (`n <= 20`).
pub const COUNT_CLAIMS: &[&str] = &[COUNT_ZZ, COUNT_GM_2N, COUNT_UK_N2, COUNT_BK];

/// Claims whose tolerance bounds a floating-point deviation.
pub const NUMERIC_CLAIMS: &[&str] = &[
    EQ6_CLOSED_FORM,
    EQ7_PHASE,
    EQ8_TRANSFER,
    EXPAND_B,
    EQ10_ZZ,
    BLOCK_DIAG,
    EQ38_EXPANSION,
    EQ40_IDENTITY,
    NORMS,
    EQ24_CONJ,
];

pub const MAX_COUNT_CLAIM_QUBITS: usize = 20;
const CONJ_QUBITS: std::ops::RangeInclusive<usize> = 3..=5;
const TROTTER_MAX_QUBITS: usize = 4;
const EXPANSION_MAX_QUBITS: usize = 4;
const EXHAUSTIVE_BLOCK_QUBITS: usize = 6;
const EXHAUSTIVE_COUNT_QUBITS: usize = 10;
const SAMPLES: usize = 200;
const COUNT_SAMPLES: usize = 256;
/// Distances below this are treated as numerical zero in convergence fits.
pub const DISTANCE_FLOOR: f64 = 1e-12;
/// Product formulas with every distance below this are reported as exact.
pub const EXACT_DISTANCE: f64 = 1e-10;

fn default_tolerance(claim: &str, n: usize, trotter_l: usize) -> f64 {
    match claim {
        EQ6_CLOSED_FORM | EXPAND_B => 1e-12,
        EQ10_ZZ | EQ24_CONJ => 1e-9,
        EXPAND_B_TERMS | INDEX_WINDOW | REGIME_A | COUNT_ZZ => 0.0,
        TROTTER_ORDER => 0.2,
        BLOCK_COUNT_2N | COUNT_GM_2N => (2 * n - 1) as f64,
        COUNT_UK_N2 => (n * n - 1) as f64,
        COUNT_BK => (2 * n * n + 6 * trotter_l * n) as f64,
        _ => 1e-10,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Measured,
}

/// Parameters locating a claim point; unset fields do not apply.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimParams {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub trotter_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Witness source position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_pos: Option<usize>,
    /// Witness target position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pos: Option<usize>,
}

impl ClaimParams {
    fn n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: String,
    pub params: ClaimParams,
    pub status: Status,
    pub metric: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

type SortKey = (
    String,
    usize,
    Option<usize>,
    Option<usize>,
    Option<i64>,
    Option<usize>,
    Option<usize>,
    Option<usize>,
    Option<u64>,
);

impl ClaimResult {
    fn checked(claim: &str, params: ClaimParams, metric: f64, tolerance: f64) -> Self {
        let status = if metric <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            claim: claim.to_string(),
            params,
            status,
            metric,
            tolerance,
            note: None,
        }
    }

    fn measured(claim: &str, params: ClaimParams, metric: f64, tolerance: f64, note: String) -> Self {
        Self {
            claim: claim.to_string(),
            params,
            status: Status::Measured,
            metric,
            tolerance,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn sort_key(&self) -> SortKey {
        let p = &self.params;
        (
            self.claim.clone(),
            p.n,
            p.m,
            p.target,
            p.k,
            p.trotter_l,
            p.source_pos,
            p.target_pos,
            p.seed,
        )
    }
}

/// Which anti-diagonal indices dense transfer claims visit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPolicy {
    /// Solver choice into the largest subspace.
    #[default]
    ClosedForm,
    /// Every index of every admissible window.
    ExhaustiveWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub count_n_max: usize,
    /// Source subspaces for transfer claims; all when unset.
    pub subspaces: Option<Vec<usize>>,
    pub k_policy: KPolicy,
    pub trotter_ls: Vec<usize>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Claim ids to run; all when unset.
    pub claims: Option<Vec<String>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 6,
            count_n_max: MAX_COUNT_CLAIM_QUBITS,
            subspaces: None,
            k_policy: KPolicy::ClosedForm,
            trotter_ls: vec![4, 8, 16, 32],
            seed: 2024,
            tolerances: BTreeMap::new(),
            claims: None,
        }
    }
}

fn known_claim(id: &str) -> Option<&'static str> {
    DENSE_CLAIMS
        .iter()
        .chain(COUNT_CLAIMS)
        .find(|c| **c == id)
        .copied()
}

impl SweepConfig {
    /// Count-only configuration for `2..=n_max`.
    pub fn counts(n_max: usize) -> Self {
        Self {
            count_n_max: n_max,
            claims: Some(COUNT_CLAIMS.iter().map(|c| c.to_string()).collect()),
            ..Self::default()
        }
    }

    /// Sets one tolerance for every numeric claim.
    pub fn with_numeric_tolerance(mut self, tol: f64) -> Self {
        for c in NUMERIC_CLAIMS {
            self.tolerances.insert(c.to_string(), tol);
        }
        self
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let c: SweepConfig =
            serde_json::from_slice(bytes).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn selected(&self) -> Result<Vec<&'static str>> {
        match &self.claims {
            None => Ok(DENSE_CLAIMS.iter().chain(COUNT_CLAIMS).copied().collect()),
            Some(ids) => ids
                .iter()
                .map(|id| known_claim(id).ok_or_else(|| Error::Config(format!("unknown claim {id}"))))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let selected = self.selected()?;
        let dense = selected.iter().any(|c| DENSE_CLAIMS.contains(c));
        if dense && (self.n_min < 1 || self.n_min > self.n_max || self.n_max > MAX_DENSE_QUBITS) {
            return Err(Error::Config(format!(
                "dense claims need 1 <= n_min <= n_max <= {MAX_DENSE_QUBITS}, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        if selected.iter().any(|c| COUNT_CLAIMS.contains(c))
            && !(2..=MAX_COUNT_CLAIM_QUBITS).contains(&self.count_n_max)
        {
            return Err(Error::Config(format!(
                "count claims need 2 <= count_n_max <= {MAX_COUNT_CLAIM_QUBITS}, got {}",
                self.count_n_max
            )));
        }
        if self.trotter_ls.contains(&0) {
            return Err(Error::Config("trotter depths must be positive".into()));
        }
        if selected.contains(&TROTTER_ORDER) && self.trotter_ls.len() < 3 {
            return Err(Error::Config("TROTTER_ORDER needs at least 3 trotter depths".into()));
        }
        if selected.contains(&COUNT_BK) && self.trotter_ls.is_empty() {
            return Err(Error::Config("COUNT_BK needs at least one trotter depth".into()));
        }
        for id in self.tolerances.keys() {
            known_claim(id).ok_or_else(|| Error::Config(format!("tolerance for unknown claim {id}")))?;
        }
        Ok(())
    }

    fn tolerance(&self, claim: &str, n: usize, trotter_l: usize) -> f64 {
        self.tolerances
            .get(claim)
            .copied()
            .unwrap_or_else(|| default_tolerance(claim, n, trotter_l))
    }

    fn source_subspaces(&self, layout: &SubspaceLayout) -> Vec<usize> {
        (0..layout.peak())
            .filter(|m| self.subspaces.as_ref().is_none_or(|s| s.contains(m)))
            .collect()
    }

    /// `(m, target, k)` points under the index policy.
    fn transfer_points(&self, layout: &SubspaceLayout) -> Result<Vec<(usize, usize, i64)>> {
        let mut out = Vec::new();
        for m in self.source_subspaces(layout) {
            match self.k_policy {
                KPolicy::ClosedForm => {
                    out.push((m, layout.peak(), choose_k(layout, m, layout.peak())?.k));
                }
                KPolicy::ExhaustiveWindow => {
                    for target in m + 1..=layout.n - m {
                        let w = solve_index_window(layout, m, target)?;
                        out.extend(w.iter().map(|k| (m, target, k)));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn job_seed(base: u64, claim: &str, n: usize) -> u64 {
    claim
        .bytes()
        .chain((n as u64).to_le_bytes())
        .fold(base ^ 0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

struct Job<'a> {
    claim: &'static str,
    n: usize,
    config: &'a SweepConfig,
}

impl Job<'_> {
    fn seed(&self) -> u64 {
        job_seed(self.config.seed, self.claim, self.n)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }

    fn tol(&self) -> f64 {
        self.config.tolerance(self.claim, self.n, 0)
    }

    fn params(&self) -> ClaimParams {
        ClaimParams::n(self.n)
    }

    fn seeded_params(&self) -> ClaimParams {
        ClaimParams {
            seed: Some(self.seed()),
            ..self.params()
        }
    }

    fn run(&self) -> Result<Vec<ClaimResult>> {
        match self.claim {
            EQ6_CLOSED_FORM => self.eq6(),
            EQ7_PHASE => self.eq7(),
            EQ8_TRANSFER => self.eq8(),
            EXPAND_B => self.expand_b(),
            EXPAND_B_TERMS => self.expand_b_terms(),
            EQ10_ZZ => self.eq10(),
            BLOCK_DIAG | BLOCK_COUNT_2N => self.block(),
            INDEX_WINDOW => self.index_window(),
            REGIME_A => self.regime_a(),
            EQ38_EXPANSION => self.eq38(),
            EQ40_IDENTITY => self.eq40(),
            EQ40_COUNTEREXAMPLE => self.eq40_counterexample(),
            NORMS => self.norms(),
            EQ24_CONJ => self.eq24(),
            TROTTER_ORDER => self.trotter(),
            COUNT_ZZ => self.count_zz(),
            COUNT_GM_2N => self.count_gm(),
            COUNT_UK_N2 => self.count_uk(),
            COUNT_BK => self.count_bk(),
            other => Err(Error::Config(format!("unknown claim {other}"))),
        }
    }

    /// One result carrying the worst case and its witness parameters.
    fn worst(&self, cases: impl IntoIterator<Item = Result<(f64, ClaimParams)>>) -> Result<Vec<ClaimResult>> {
        let mut best = (0.0, self.params());
        for case in cases {
            let (metric, params) = case?;
            if metric > best.0 || metric.is_nan() {
                best = (metric, params);
            }
        }
        Ok(vec![ClaimResult::checked(self.claim, best.1, best.0, self.tol())])
    }

    fn eq6(&self) -> Result<Vec<ClaimResult>> {
        let mut rng = self.rng();
        let dim = 1usize << self.n;
        let samples: Vec<(usize, usize, f64)> = (0..100)
            .map(|_| {
                let pair = sample(&mut rng, dim, 2);
                (pair.index(0), pair.index(1), rng.random_range(-2.0 * PI..2.0 * PI))
            })
            .collect();
        self.worst(samples.into_iter().map(|(s, t, theta)| {
            let q = build_qpsk(s, t, self.n)?;
            let d = build_upsk_closed(s, t, theta, self.n)?.max_diff(&expm_hermitian(&q, theta)?)?;
            Ok((
                d,
                ClaimParams {
                    theta: Some(theta),
                    source_pos: Some(s),
                    target_pos: Some(t),
                    ..self.seeded_params()
                },
            ))
        }))
    }

    fn eq7(&self) -> Result<Vec<ClaimResult>> {
        let dim = 1usize << self.n;
        let pairs = (0..dim).flat_map(|s| (0..dim).filter(move |&t| t != s).map(move |t| (s, t)));
        self.worst(pairs.map(|(s, t)| {
            let u = expm_hermitian(&build_qpsk(s, t, self.n)?, PI)?;
            let mut want = DenseOperator::identity(dim);
            want.set(s, s, ZERO);
            want.set(t, t, ZERO);
            want.set(t, s, C64::new(0.0, -1.0));
            want.set(s, t, C64::new(0.0, -1.0));
            Ok((
                u.max_diff(&want)?,
                ClaimParams {
                    theta: Some(PI),
                    source_pos: Some(s),
                    target_pos: Some(t),
                    ..self.params()
                },
            ))
        }))
    }

    fn eq8(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let mut out = Vec::new();
        for (m, target, k) in self.config.transfer_points(&layout)? {
            let spec = TransferSpec::new(&layout, m)?.with_target(target)?.with_k(k)?;
            let u = upm_dense_oracle(&spec)?;
            let (_, pairs) = qpm_pairs(&layout, m, k)?;
            let seed = job_seed(self.seed(), "point", m * 1_000_003 + target * 1009 + k as usize);
            let mut metric: f64 = 0.0;
            for s in 0..10 {
                let psi = random_subspace_state(&layout, m, seed.wrapping_add(s))?;
                let phi = u.apply(&psi)?;
                let mass = subspace_support(&phi, &layout, BasisOrdering::WeightLex)?
                    .get(&target)
                    .copied()
                    .unwrap_or(0.0);
                let want: Vec<C64> = paired_image(&psi, &pairs)
                    .into_iter()
                    .map(|a| a * C64::new(0.0, -1.0))
                    .collect();
                metric = metric.max((mass - 1.0).abs()).max(state_distance(&phi, &want));
            }
            let params = ClaimParams {
                m: Some(m),
                target: Some(target),
                k: Some(k),
                theta: Some(PI),
                seed: Some(seed),
                ..self.params()
            };
            out.push(ClaimResult::checked(self.claim, params, metric, self.tol()));
        }
        Ok(out)
    }

    fn all_k(&self) -> impl Iterator<Item = i64> {
        let max = (1i64 << self.n) - 2;
        -max..=max
    }

    fn expand_b(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        self.worst(self.all_k().map(|k| {
            let spec = AntiDiagonalSpec::new(n, k)?;
            let d = expand_b(&spec).lower(n)?.max_diff(&build_b(&spec)?)?;
            Ok((
                d,
                ClaimParams {
                    k: Some(k),
                    ..self.params()
                },
            ))
        }))
    }

    fn expand_b_terms(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let mut mismatches = 0usize;
        let mut checked = 0usize;
        let mut witness = self.params();
        for k in self.all_k() {
            if let Some(want) = expansion_term_count(n, k) {
                checked += 1;
                if expand_b(&AntiDiagonalSpec::new(n, k)?).len() != want {
                    mismatches += 1;
                    witness.k = Some(k);
                }
            }
        }
        Ok(vec![ClaimResult::checked(self.claim, witness, mismatches as f64, self.tol())
            .with_note(format!("{checked} indices with closed-form term counts"))])
    }

    fn eq10(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let mut rng = self.rng();
        let mut cases = Vec::new();
        for m in 3..=n {
            for _ in 0..5 {
                let mut ks: Vec<usize> = sample(&mut rng, n, m).into_iter().map(|q| q + 1).collect();
                ks.sort_unstable();
                cases.push((m, ks, rng.random_range(-PI..PI)));
            }
        }
        self.worst(cases.into_iter().map(|(m, ks, theta)| {
            let mut factors = vec![SpinFactor::E; n];
            ks.iter().for_each(|&q| factors[q - 1] = SpinFactor::IZ);
            let term = ProductTerm::new(f64::powi(2.0, m as i32 - 1), factors);
            let oracle = expm_hermitian(&term.lower(n)?, theta)?;
            let c = synth_multibody_zz(&ks, theta, n)?;
            Ok((
                circuit_to_dense(&c)?.max_diff(&oracle)?,
                ClaimParams {
                    m: Some(m),
                    theta: Some(theta),
                    ..self.seeded_params()
                },
            ))
        }))
    }

    fn block(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let dim = 1u64 << n;
        let mut rng = self.rng();
        let blocks: Vec<(u64, u64)> = if n <= EXHAUSTIVE_BLOCK_QUBITS {
            (0..dim).flat_map(|l| (l..dim).map(move |u| (l, u))).collect()
        } else {
            (0..SAMPLES)
                .map(|_| {
                    let (a, b) = (rng.random_range(0..dim), rng.random_range(0..dim));
                    (a.min(b), a.max(b))
                })
                .collect()
        };
        if self.claim == BLOCK_COUNT_2N {
            let mut worst = (0usize, self.params());
            for &(l, u) in &blocks {
                let c = synth_block_diagonal(&DiagonalBlockSpec::new(n, l, u)?, 1.0);
                let s = count(&c).selective;
                if s > worst.0 {
                    worst = (s, ClaimParams { source_pos: Some(l as usize), target_pos: Some(u as usize), ..self.seeded_params() });
                }
            }
            return Ok(vec![ClaimResult::checked(self.claim, worst.1, worst.0 as f64, self.tol())]);
        }
        let thetas: Vec<f64> = blocks.iter().map(|_| rng.random_range(-PI..PI)).collect();
        self.worst(blocks.iter().zip(thetas).map(|(&(l, u), theta)| {
            let c = synth_block_diagonal(&DiagonalBlockSpec::new(n, l, u)?, theta);
            let d = circuit_to_dense(&c)?;
            let want: Vec<C64> = (0..dim)
                .map(|i| {
                    if (l..=u).contains(&i) {
                        C64::from_polar(1.0, -theta)
                    } else {
                        C64::new(1.0, 0.0)
                    }
                })
                .collect();
            Ok((
                d.max_diff(&DenseOperator::diagonal(&want))?,
                ClaimParams {
                    theta: Some(theta),
                    source_pos: Some(l as usize),
                    target_pos: Some(u as usize),
                    ..self.seeded_params()
                },
            ))
        }))
    }

    fn index_window(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let mut mismatches = 0usize;
        let mut witness = self.params();
        for m in 0..self.n {
            for target in m + 1..=self.n {
                let brute = solve_index_window(&layout, m, target).ok();
                let mut ok = brute == window_closed_form(&layout, m, target);
                if target == layout.peak() {
                    ok &= brute == peak_window_closed_form(&layout, m);
                }
                if !ok {
                    mismatches += 1;
                    witness.m = Some(m);
                    witness.target = Some(target);
                }
            }
        }
        Ok(vec![ClaimResult::checked(self.claim, witness, mismatches as f64, self.tol())])
    }

    fn regime_a(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let m0 = regime_a_bound(&layout);
        let mut misses = 0usize;
        let mut witness = self.params();
        for m in 0..layout.peak() {
            if m0.is_some_and(|m0| m <= m0) {
                let c = choose_k(&layout, m, layout.peak())?;
                let half = 1i64 << (self.n - 1);
                if c.k != half || !c.window.contains(half) {
                    misses += 1;
                    witness.m = Some(m);
                    witness.k = Some(c.k);
                }
            }
        }
        let note = match m0 {
            Some(m0) => format!("m0 = {m0}"),
            None => "no subspace satisfies the bound".into(),
        };
        Ok(vec![ClaimResult::checked(self.claim, witness, misses as f64, self.tol()).with_note(note)])
    }

    fn eq38(&self) -> Result<Vec<ClaimResult>> {
        if self.n > EXPANSION_MAX_QUBITS {
            return Ok(Vec::new());
        }
        let dim = 1usize << self.n;
        let mut rng = self.rng();
        let cases: Vec<(DenseOperator, Vec<(usize, f64)>)> = (0..10)
            .map(|_| {
                let a = random_hermitian(dim, &mut rng);
                let count = rng.random_range(1..=dim.min(4));
                let angles = sample(&mut rng, dim, count)
                    .into_iter()
                    .map(|p| (p, rng.random_range(-PI..PI)))
                    .collect();
                (a, angles)
            })
            .collect();
        self.worst(cases.into_iter().map(|(a, angles)| {
            let d = eq38_expansion(&a, &angles)?.max_diff(&selective_conjugation(&a, &angles)?)?;
            Ok((d, self.seeded_params()))
        }))
    }

    fn eq40(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let points: Vec<(usize, i64)> = (0..=self.n)
            .flat_map(|m| self.all_k().map(move |k| (m, k)))
            .filter(|&(m, k)| qpm_pairs(&layout, m, k).is_ok())
            .collect();
        let count = points.len();
        let mut out = self.worst(points.into_iter().map(|(m, k)| {
            Ok((
                eq40_deviation(&layout, m, k)?,
                ClaimParams {
                    m: Some(m),
                    k: Some(k),
                    ..self.params()
                },
            ))
        }))?;
        out[0].note = Some(format!("{count} (m, k) pairs"));
        Ok(out)
    }

    fn eq40_counterexample(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(2)?;
        let d = eq40_deviation(&layout, 1, 0)?;
        let tol = self.tol();
        let mut r = ClaimResult::checked(
            self.claim,
            ClaimParams {
                m: Some(1),
                k: Some(0),
                ..ClaimParams::n(2)
            },
            d,
            tol,
        );
        r.status = if d > tol { Status::Pass } else { Status::Fail };
        Ok(vec![r.with_note("N - 1 - k <= 2 L_m; identity expected to break")])
    }

    fn norms(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let points = self.config.transfer_points(&layout)?;
        self.worst(points.into_iter().map(|(m, target, k)| {
            let b = build_b(&AntiDiagonalSpec::new(self.n, k)?)?;
            let g = gm_positions(&layout, m)?;
            let c = commutator(&b, &g)?;
            let d = [&b, &g, &c]
                .iter()
                .map(|a| (a.spectral_norm() - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((
                d,
                ClaimParams {
                    m: Some(m),
                    target: Some(target),
                    k: Some(k),
                    ..self.params()
                },
            ))
        }))
    }

    fn eq24(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let tol = self.tol();
        (1..=(1i64 << n) - 3)
            .step_by(2)
            .map(|k| {
                let d = eq24_deviation(k, n)?;
                let verdict = if d <= tol { "holds" } else { "violated" };
                let params = ClaimParams {
                    k: Some(k),
                    ..self.params()
                };
                Ok(ClaimResult::measured(self.claim, params, d, tol, verdict.into()))
            })
            .collect()
    }

    fn trotter(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_layout(self.n)?;
        let tol = self.tol();
        let mut out = Vec::new();
        for (m, target, k) in self.config.transfer_points(&layout)? {
            let spec = TransferSpec::new(&layout, m)?.with_target(target)?.with_k(k)?;
            let fit = trotter_convergence(&spec, &self.config.trotter_ls)?;
            let params = ClaimParams {
                m: Some(m),
                target: Some(target),
                k: Some(k),
                theta: Some(spec.theta),
                ..self.params()
            };
            let r = match fit.slope {
                Some(slope) if !fit.exact => ClaimResult::measured(
                    self.claim,
                    params,
                    slope,
                    tol,
                    format!("slope over {} depths", fit.fitted_points()),
                ),
                _ => ClaimResult::measured(self.claim, params, fit.max_distance(), tol, "exact".into()),
            };
            out.push(r);
        }
        Ok(out)
    }

    fn count_zz(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let mut worst = (0usize, self.params());
        for m in 2..=n {
            let ks: Vec<usize> = (1..=m).collect();
            let c = synth_multibody_zz(&ks, 1.0, n)?;
            let dev = c.len().abs_diff(6 * (m - 2) + 1);
            if dev > worst.0 {
                worst = (dev, ClaimParams { m: Some(m), ..self.params() });
            }
        }
        Ok(vec![ClaimResult::checked(self.claim, worst.1, worst.0 as f64, self.tol())])
    }

    fn count_gm(&self) -> Result<Vec<ClaimResult>> {
        let layout = build_count_layout(self.n)?;
        (0..=self.n)
            .map(|m| {
                let block = GmSpec::new(&layout, m)?.position_block();
                let s = count(&synth_block_diagonal(&block, PI)).selective;
                let params = ClaimParams {
                    m: Some(m),
                    ..self.params()
                };
                Ok(ClaimResult::checked(self.claim, params, s as f64, self.tol()))
            })
            .collect()
    }

    /// All odd `k` in range, or a seeded sample on large registers.
    fn odd_indices(&self) -> Vec<i64> {
        let max = (1i64 << self.n) - 3;
        if self.n <= EXHAUSTIVE_COUNT_QUBITS {
            return (1..=max).step_by(2).collect();
        }
        let mut rng = self.rng();
        let mut ks: Vec<i64> = (0..COUNT_SAMPLES)
            .map(|_| 2 * rng.random_range(0..(max + 1) / 2) + 1)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    fn count_uk(&self) -> Result<Vec<ClaimResult>> {
        let seeded = self.n > EXHAUSTIVE_COUNT_QUBITS;
        let mut worst = (0usize, self.params());
        for k in self.odd_indices() {
            let c = plan_uk(k, self.n)?.basic_op_count();
            if c >= worst.0 {
                let base = if seeded { self.seeded_params() } else { self.params() };
                worst = (c, ClaimParams { k: Some(k), ..base });
            }
        }
        Ok(vec![ClaimResult::checked(self.claim, worst.1, worst.0 as f64, self.tol())])
    }

    fn count_bk(&self) -> Result<Vec<ClaimResult>> {
        let n = self.n;
        let seeded = n > EXHAUSTIVE_COUNT_QUBITS;
        let specs: Vec<AntiDiagonalSpec> = self
            .odd_indices()
            .into_iter()
            .flat_map(|k| [k, -k])
            .map(|k| AntiDiagonalSpec::new(n, k))
            .collect::<Result<_>>()?;
        let general: Vec<&AntiDiagonalSpec> = specs.iter().filter(|s| bk_path(s) == BkPath::Conjugation).collect();
        self.config
            .trotter_ls
            .iter()
            .map(|&l| {
                let mut worst = (0usize, ClaimParams { trotter_l: Some(l), ..self.params() });
                for s in &general {
                    let c = plan_bk(s, 1.0, l)?.basic_op_count();
                    if c >= worst.0 {
                        let base = if seeded { self.seeded_params() } else { self.params() };
                        worst = (c, ClaimParams { k: Some(s.k), trotter_l: Some(l), ..base });
                    }
                }
                let tol = self.config.tolerance(self.claim, n, l);
                Ok(ClaimResult::checked(self.claim, worst.1, worst.0 as f64, tol)
                    .with_note(format!("{} general-path indices", general.len())))
            })
            .collect()
    }
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DenseOperator {
    let mut a = DenseOperator::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if i == j { 0.0 } else { rng.sample(StandardNormal) };
            a.set(i, j, C64::new(re, im));
            a.set(j, i, C64::new(re, -im));
        }
    }
    a
}

/// Term count of the tensor expansion of `b_k` where a closed form exists:
/// `n` for `|k| = 1`, `n - l` for `|k| = 2^l`, `(r-m+1)(n-r) - 1` for
/// `|k| = 2^r + 2^m` and `(r-m)(n-r) + 1` for `|k| = 2^r - 2^m`.
pub fn expansion_term_count(n: usize, k: i64) -> Option<usize> {
    let a = k.unsigned_abs();
    if a == 0 {
        return None;
    }
    if a.is_power_of_two() {
        return Some(n - a.trailing_zeros() as usize);
    }
    let m = a.trailing_zeros() as usize;
    let rest = a - (1 << m);
    if rest.is_power_of_two() {
        let r = rest.trailing_zeros() as usize;
        return Some((r - m + 1) * (n - r) - 1);
    }
    let r = (a + (1 << m)).trailing_zeros() as usize;
    (a + (1 << m) == 1 << r && r <= n).then(|| (r - m) * (n - r) + 1)
}

/// Max deviation of `U_k b̄_{k1} U_k†` from `b_k` with `U_k` lowered to gates.
pub fn eq24_deviation(k: i64, n: usize) -> Result<f64> {
    let u = circuit_to_dense(&synth_uk(k, n)?)?;
    let (bbar, _) = build_bbar(n, k)?;
    bbar.conjugate_by(&u)?.max_diff(&build_b(&AntiDiagonalSpec::new(n, k)?)?)
}

fn check_positions(dim: usize, angles: &[(usize, f64)]) -> Result<()> {
    let mut seen = vec![false; dim];
    for &(p, _) in angles {
        if p >= dim {
            return Err(Error::BasisIndex { index: p, dim });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::Config(format!("position {p} repeated in angle list")));
        }
    }
    Ok(())
}

/// `U_o A U_o^{-1}` with `U_o = Π C_p(θ_p)`, `C_p(θ) = exp(-iθ |p⟩⟨p|)`, by
/// the four-term expansion over the projectors `D_p`.
pub fn eq38_expansion(a: &DenseOperator, angles: &[(usize, f64)]) -> Result<DenseOperator> {
    let dim = a.dim();
    check_positions(dim, angles)?;
    let proj = |p: usize| DenseOperator::symmetric_pair(dim, p, p, 1.0);
    let weighted = |w: &dyn Fn(f64) -> f64| {
        angles.iter().fold(DenseOperator::zeros(dim), |acc, &(p, t)| {
            acc.add(&proj(p).scale(C64::new(w(t), 0.0))).expect("same dimension")
        })
    };
    let one_minus_cos = weighted(&|t| 1.0 - t.cos());
    let sin = weighted(&|t| t.sin());
    let mut out = a
        .sub(&anticommutator(a, &one_minus_cos)?)?
        .add(&commutator(a, &sin)?.scale(C64::new(0.0, 1.0)))?;
    for &(k, tk) in angles {
        let dk = proj(k);
        for &(l, tl) in angles {
            let w = (1.0 - tk.cos()) * (1.0 - tl.cos()) + tk.sin() * tl.sin();
            let dl = proj(l);
            out = out.add(&dk.mul(a)?.mul(&dl)?.scale(C64::new(w, 0.0)))?;
            if l > k {
                let v = tk.sin() * (1.0 - tl.cos()) - tl.sin() * (1.0 - tk.cos());
                let cross = dk.mul(a)?.mul(&dl)?.sub(&dl.mul(a)?.mul(&dk)?)?;
                out = out.add(&cross.scale(C64::new(0.0, v)))?;
            }
        }
    }
    Ok(out)
}

/// Direct `U_o A U_o^{-1}` for the same angle list.
pub fn selective_conjugation(a: &DenseOperator, angles: &[(usize, f64)]) -> Result<DenseOperator> {
    let dim = a.dim();
    check_positions(dim, angles)?;
    let mut diag = vec![C64::new(1.0, 0.0); dim];
    for &(p, t) in angles {
        diag[p] = C64::from_polar(1.0, -t);
    }
    a.conjugate_by(&DenseOperator::diagonal(&diag))
}

/// Product-formula distances over Trotter depths with a log-log fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterFit {
    /// `(L, distance)` pairs.
    pub points: Vec<(usize, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Every distance below [`EXACT_DISTANCE`].
    pub exact: bool,
}

impl TrotterFit {
    pub fn max_distance(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn fitted_points(&self) -> usize {
        self.points.iter().filter(|p| p.1 >= DISTANCE_FLOOR).count()
    }
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let nf = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / nf, ys.iter().sum::<f64>() / nf);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Distance of the synthesized `U_pm` from `exp(-iθ Q_pm)` for each depth.
pub fn trotter_convergence(spec: &TransferSpec, trotter_ls: &[usize]) -> Result<TrotterFit> {
    if trotter_ls.len() < 3 {
        return Err(Error::Config(format!(
            "convergence fit needs at least 3 trotter depths, got {}",
            trotter_ls.len()
        )));
    }
    let oracle = upm_dense_oracle(spec)?;
    let points = trotter_ls
        .iter()
        .map(|&l| {
            let s = spec.clone().with_trotter(l)?;
            let u = circuit_to_dense(&synth_upm(&s, GmRealization::Block)?)?;
            Ok((l, phase_aligned_distance(&u, &oracle)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 >= DISTANCE_FLOOR)
        .map(|&(l, d)| (l as f64, d))
        .collect();
    let fit = loglog_fit(&usable);
    Ok(TrotterFit {
        exact: points.iter().all(|p| p.1 < EXACT_DISTANCE),
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        points,
    })
}

/// Runs every selected claim; results are sorted and reproducible from the config.
pub fn run_claims_suite(config: &SweepConfig) -> Result<Vec<ClaimResult>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for claim in config.selected()? {
        let ns: Vec<usize> = match claim {
            EQ40_COUNTEREXAMPLE => vec![2],
            EQ24_CONJ => (config.n_min.max(*CONJ_QUBITS.start())..=config.n_max.min(*CONJ_QUBITS.end())).collect(),
            TROTTER_ORDER => (config.n_min.max(2)..=config.n_max.min(TROTTER_MAX_QUBITS)).collect(),
            EQ8_TRANSFER | NORMS => (config.n_min.max(2)..=config.n_max).collect(),
            EQ40_IDENTITY | EQ38_EXPANSION | EXPAND_B | EXPAND_B_TERMS | EQ10_ZZ => {
                (config.n_min..=config.n_max).collect()
            }
            COUNT_UK_N2 | COUNT_BK => (3..=config.count_n_max).collect(),
            COUNT_ZZ | COUNT_GM_2N => (2..=config.count_n_max).collect(),
            _ => (config.n_min.max(2)..=config.n_max).collect(),
        };
        jobs.extend(ns.into_iter().map(|n| Job { claim, n, config }));
    }
    let mut results: Vec<ClaimResult> = jobs
        .par_iter()
        .map(Job::run)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    results.sort_by_key(ClaimResult::sort_key);
    Ok(results)
}

/// One JSON object per line.
pub fn write_jsonl(results: &[ClaimResult], mut w: impl Write) -> std::io::Result<()> {
    for r in results {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn any_failed(results: &[ClaimResult]) -> bool {
    results.iter().any(|r| r.status == Status::Fail)
}
