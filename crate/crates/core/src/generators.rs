//! Diagonal block generators `g` and anti-diagonal generators `b_k`: dense
//! builders, product-operator expansions and gate-level synthesis of their
//! exponentials.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Gate};
use crate::elementary::synth_basic_unitary;
use crate::error::{Error, Result};
use crate::layout::{BasisOrdering, BasisPermutation, SubspaceLayout};
use crate::operator::{Axis, DenseOperator, OperatorSum, ProductTerm, Sign, SpinFactor, C64, ONE, ZERO};

/// Largest register for symbolic (count-only) generator work.
pub const MAX_SYMBOLIC_QUBITS: usize = 30;

fn check_dense(n: usize) -> Result<()> {
    if n == 0 || n > crate::circuit::MAX_DENSE_QUBITS {
        return Err(Error::QubitCount {
            n,
            min: 1,
            max: crate::circuit::MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

fn check_symbolic(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SYMBOLIC_QUBITS {
        return Err(Error::QubitCount {
            n,
            min: 1,
            max: MAX_SYMBOLIC_QUBITS,
        });
    }
    Ok(())
}

/// Contiguous block `l..=L` of binary basis indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagonalBlockSpec {
    pub n: usize,
    pub l: u64,
    pub upper: u64,
}

impl DiagonalBlockSpec {
    pub fn new(n: usize, l: u64, upper: u64) -> Result<Self> {
        check_symbolic(n)?;
        let dim = 1u64 << n;
        if l > upper || upper >= dim {
            return Err(Error::BasisIndex {
                index: upper.max(l) as usize,
                dim: dim as usize,
            });
        }
        Ok(Self { n, l, upper })
    }

    pub fn len(&self) -> u64 {
        self.upper - self.l + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `g_m`, the projector onto weight subspace `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GmSpec {
    pub layout: SubspaceLayout,
    pub m: usize,
}

impl GmSpec {
    pub fn new(layout: &SubspaceLayout, m: usize) -> Result<Self> {
        layout.check_subspace(m)?;
        Ok(Self {
            layout: layout.clone(),
            m,
        })
    }

    /// The weight-lex image of `g_m` as a block of positions.
    pub fn position_block(&self) -> DiagonalBlockSpec {
        DiagonalBlockSpec {
            n: self.layout.n,
            l: self.layout.l[self.m] as u64,
            upper: self.layout.upper[self.m] as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagSpec {
    Block(DiagonalBlockSpec),
    Gm(GmSpec),
}

/// Diagonal 0/1 operator represented in the requested ordering.
pub fn build_diag(spec: &DiagSpec, ordering: BasisOrdering) -> Result<DenseOperator> {
    let (n, in_binary): (usize, Box<dyn Fn(usize) -> bool>) = match spec {
        DiagSpec::Block(b) => {
            let b = *b;
            (b.n, Box::new(move |i| (b.l..=b.upper).contains(&(i as u64))))
        }
        DiagSpec::Gm(g) => {
            let m = g.m;
            (g.layout.n, Box::new(move |i: usize| i.count_ones() as usize == m))
        }
    };
    check_dense(n)?;
    let dim = 1usize << n;
    let perm = (ordering == BasisOrdering::WeightLex)
        .then(|| BasisPermutation::new(&crate::layout::build_layout(n).expect("n checked")));
    let diag: Vec<C64> = (0..dim)
        .map(|pos| {
            let b = perm.as_ref().map_or(pos, |p| p.forward(pos));
            if in_binary(b) {
                ONE
            } else {
                ZERO
            }
        })
        .collect();
    DenseOperator::diagonal(&diag).mark_hermitian()
}

fn label_bits(index: u64, r: usize) -> Vec<u8> {
    (0..r).map(|q| ((index >> (r - 1 - q)) & 1) as u8).collect()
}

/// Full-register selective rotation `C_index(θ)` on qubits `1..=r`.
fn indexed_selective(index: u64, r: usize, theta: f64) -> Gate {
    Gate::selective((1..=r).collect(), label_bits(index, r), theta)
}

/// `exp(-iθ Diag(block))` by parity reduction of the block.
pub fn synth_block_diagonal(spec: &DiagonalBlockSpec, theta: f64) -> Circuit {
    let mut c = Circuit::new(spec.n, format!("block_diagonal[{}..={}]", spec.l, spec.upper));
    let (mut l, mut upper) = (spec.l as i64, spec.upper as i64);
    let mut r = spec.n;
    while l <= upper {
        if r == 0 {
            c.global_phase -= theta;
            break;
        }
        let d = upper - l + 1;
        let (lo, hi) = if l % 2 == 0 && d % 2 == 0 {
            (l / 2, (upper - 1) / 2)
        } else if l % 2 == 1 && d % 2 == 1 {
            c.gates.push(indexed_selective(l as u64, r, theta));
            ((l + 1) / 2, (upper - 1) / 2)
        } else if l % 2 == 0 {
            c.gates.push(indexed_selective(upper as u64, r, theta));
            (l / 2, (upper - 2).div_euclid(2))
        } else {
            c.gates.push(indexed_selective(l as u64, r, theta));
            c.gates.push(indexed_selective(upper as u64, r, theta));
            ((l + 1) / 2, (upper - 2).div_euclid(2))
        };
        l = lo;
        upper = hi;
        r -= 1;
    }
    c
}

/// One full-register selective rotation per basis state of subspace `m`.
pub fn naive_gm(spec: &GmSpec, theta: f64, ordering: BasisOrdering) -> Result<Circuit> {
    let n = spec.layout.n;
    if spec.layout.d[spec.m] > 1 << 12 {
        return Err(Error::QubitCount { n, min: 1, max: 12 });
    }
    let labels: Vec<u64> = match ordering {
        BasisOrdering::Binary => (0..1u64 << n)
            .filter(|b| b.count_ones() as usize == spec.m)
            .collect(),
        BasisOrdering::WeightLex => spec.layout.range(spec.m).map(|p| p as u64).collect(),
    };
    let mut c = Circuit::new(n, format!("naive_gm[m={}, {ordering}]", spec.m));
    c.gates = labels
        .into_iter()
        .map(|i| indexed_selective(i, n, theta))
        .collect();
    Ok(c)
}

/// `b_k`: ones on the line `row + col = 2^n - 1 - k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AntiDiagonalSpec {
    pub n: usize,
    pub k: i64,
}

impl AntiDiagonalSpec {
    pub fn new(n: usize, k: i64) -> Result<Self> {
        check_symbolic(n)?;
        let max = (1i64 << n) - 2;
        if k.abs() > max {
            return Err(Error::AntiDiagonalIndex { k, max });
        }
        Ok(Self { n, k })
    }

    /// `row + col` along the line.
    pub fn line_sum(&self) -> i64 {
        (1i64 << self.n) - 1 - self.k
    }

    /// Column partner of `row`, if it lies on the line.
    pub fn partner(&self, row: usize) -> Option<usize> {
        let c = self.line_sum() - row as i64;
        (0..1i64 << self.n).contains(&c).then_some(c as usize)
    }

    pub fn nonzeros(&self) -> usize {
        ((1i64 << self.n) - self.k.abs()) as usize
    }
}

pub fn build_b(spec: &AntiDiagonalSpec) -> Result<DenseOperator> {
    check_dense(spec.n)?;
    let dim = 1usize << spec.n;
    let mut b = DenseOperator::zeros(dim);
    for r in 0..dim {
        if let Some(c) = spec.partner(r) {
            b.set(r, c, ONE);
        }
    }
    b.mark_hermitian()
}

/// Product-operator expansion of `b_k`; every pair of terms multiplies to zero.
pub fn expand_b(spec: &AntiDiagonalSpec) -> OperatorSum {
    let terms = expand_raw(spec.k, spec.n)
        .into_iter()
        .map(|factors| {
            let xs = factors.iter().filter(|f| **f == SpinFactor::IX).count();
            ProductTerm::new(f64::powi(2.0, xs as i32), factors)
        })
        .collect();
    OperatorSum { n: spec.n, terms }
}

/// Factor lists with `σ_x` written as `I_x` (coefficient restored by the caller).
fn expand_raw(k: i64, n: usize) -> Vec<Vec<SpinFactor>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    if k == 0 {
        return vec![vec![SpinFactor::IX; n]];
    }
    let half = 1i64 << (n - 1);
    let a = k.abs();
    let prepend = |f: SpinFactor, ts: Vec<Vec<SpinFactor>>| -> Vec<Vec<SpinFactor>> {
        ts.into_iter()
            .map(|mut t| {
                t.insert(0, f);
                t
            })
            .collect()
    };
    let append = |f: SpinFactor, ts: Vec<Vec<SpinFactor>>| -> Vec<Vec<SpinFactor>> {
        ts.into_iter()
            .map(|mut t| {
                t.push(f);
                t
            })
            .collect()
    };
    if a >= half {
        let rest = (a - half) * k.signum();
        let p = if k > 0 { SpinFactor::UP } else { SpinFactor::DOWN };
        return prepend(p, expand_raw(rest, n - 1));
    }
    if k % 2 == 0 {
        return append(SpinFactor::IX, expand_raw(k / 2, n - 1));
    }
    let (k1, l1) = ((a - 1) / 2, (a + 1) / 2);
    let (up, down) = if k > 0 { (k1, l1) } else { (-l1, -k1) };
    let mut out = append(SpinFactor::UP, expand_raw(up, n - 1));
    out.extend(append(SpinFactor::DOWN, expand_raw(down, n - 1)));
    out
}

/// `b̄_{k1}` and `ḡ_k` for odd `k`.
pub fn build_bbar(n: usize, k: i64) -> Result<(DenseOperator, DenseOperator)> {
    check_dense(n)?;
    if k % 2 == 0 {
        return Err(Error::EvenIndex(k));
    }
    let dim = 1i64 << n;
    if k < 1 || k >= dim - 1 {
        return Err(Error::AntiDiagonalIndex { k, max: dim - 3 });
    }
    let trim = (k - 1) / 2;
    let mut bbar = DenseOperator::zeros(dim as usize);
    for r in trim..dim - 1 - trim {
        bbar.set(r as usize, (dim - 2 - r) as usize, ONE);
    }
    let center = dim / 2 - 1;
    let gbar: Vec<C64> = (0..dim)
        .map(|i| if (trim..center).contains(&i) { ONE } else { ZERO })
        .collect();
    Ok((bbar.mark_hermitian()?, DenseOperator::diagonal(&gbar).mark_hermitian()?))
}

/// Step of a basic-operation plan, in temporal order.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanStep {
    /// `exp(-i angle term)`
    Exp { term: ProductTerm, angle: f64 },
    Gates(Circuit),
}

/// Sequence of basic unitary operations; lowered to gates on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicPlan {
    pub n: usize,
    pub provenance: String,
    pub steps: Vec<PlanStep>,
}

impl BasicPlan {
    pub fn new(n: usize, provenance: impl Into<String>) -> Self {
        Self {
            n,
            provenance: provenance.into(),
            steps: Vec::new(),
        }
    }

    fn exp_all(&mut self, terms: impl IntoIterator<Item = ProductTerm>, angle: f64) {
        self.steps
            .extend(terms.into_iter().map(|term| PlanStep::Exp { term, angle }));
    }

    pub fn extend(&mut self, other: BasicPlan) {
        self.steps.extend(other.steps);
    }

    pub fn inverse(&self) -> BasicPlan {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| match s {
                PlanStep::Exp { term, angle } => PlanStep::Exp {
                    term: term.clone(),
                    angle: -angle,
                },
                PlanStep::Gates(c) => PlanStep::Gates(c.inverse()),
            })
            .collect();
        BasicPlan {
            n: self.n,
            provenance: format!("inverse({})", self.provenance),
            steps,
        }
    }

    /// Exponentials count once; explicit gates count individually.
    pub fn basic_op_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                PlanStep::Exp { .. } => 1,
                PlanStep::Gates(c) => c.len(),
            })
            .sum()
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n, self.provenance.clone());
        for s in &self.steps {
            match s {
                PlanStep::Exp { term, angle } => c.append(&synth_basic_unitary(term, *angle, self.n)?)?,
                PlanStep::Gates(g) => c.append(g)?,
            }
        }
        Ok(c)
    }
}

/// `b_k = prefix ⊗ b_{core_k} ⊗ σ_x^{⊗suffix}` after stripping high and even peels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BkReduction {
    pub n: usize,
    pub prefix: Vec<Sign>,
    pub core_k: i64,
    pub core_n: usize,
    pub suffix: usize,
}

impl BkReduction {
    pub fn new(spec: &AntiDiagonalSpec) -> Self {
        let (mut k, mut n) = (spec.k, spec.n);
        let mut prefix = Vec::new();
        let mut suffix = 0;
        while k != 0 {
            let half = 1i64 << (n - 1);
            if k.abs() >= half {
                prefix.push(if k > 0 { Sign::Plus } else { Sign::Minus });
                k = (k.abs() - half) * k.signum();
            } else if k % 2 == 0 {
                suffix += 1;
                k /= 2;
            } else {
                break;
            }
            n -= 1;
        }
        Self {
            n: spec.n,
            prefix,
            core_k: k,
            core_n: n,
            suffix,
        }
    }

    /// Core indices `0`, `±1` and `±(2^l ± 1)` expand into at most a quadratic number of terms.
    pub fn is_closed_form(&self) -> bool {
        let a = self.core_k.unsigned_abs();
        a <= 1 || (a - 1).is_power_of_two() || (a + 1).is_power_of_two()
    }

    fn prefix_factors(&self) -> Vec<SpinFactor> {
        self.prefix
            .iter()
            .map(|&s| SpinFactor::P(s, Axis::Z))
            .collect()
    }

    /// Lifts a core term with the projector prefix and `2I_x` suffix.
    fn lift_with_frame(&self, t: &ProductTerm) -> ProductTerm {
        let mut lifted = t.embed(&self.prefix_factors(), &vec![SpinFactor::IX; self.suffix]);
        lifted.coefficient *= f64::powi(2.0, self.suffix as i32);
        lifted
    }

    /// Lifts a core term with the projector prefix and identity suffix.
    fn lift_controlled(&self, t: &ProductTerm) -> ProductTerm {
        t.embed(&self.prefix_factors(), &vec![SpinFactor::E; self.suffix])
    }

    fn core_qubits(&self) -> std::ops::RangeInclusive<usize> {
        self.prefix.len() + 1..=self.prefix.len() + self.core_n
    }

    fn prefix_bits(&self) -> u64 {
        self.prefix
            .iter()
            .fold(0u64, |acc, s| (acc << 1) | u64::from(*s == Sign::Minus))
    }
}

/// Exponents `e >= 1` of the binary expansion of odd `k`, largest first.
fn uk_exponents(k: i64) -> Vec<u32> {
    let mut e: Vec<u32> = (1..63).filter(|&i| (k >> i) & 1 == 1).collect();
    e.reverse();
    e
}

/// `U_k = exp(iπ/2 b_{j_1}) exp(iπ/2 b_{-j_2}) ...` (with a trailing
/// `exp(iπ/2 b_0)` for an odd factor count), in temporal order.
pub fn plan_uk(k: i64, n: usize) -> Result<BasicPlan> {
    check_symbolic(n)?;
    if k % 2 == 0 {
        return Err(Error::EvenIndex(k));
    }
    let max = ((1i64 << n) - 3).max(1);
    if k < 1 || k > max {
        return Err(Error::AntiDiagonalIndex { k, max });
    }
    let mut plan = BasicPlan::new(n, format!("U_{k}"));
    for f in split_factors(k, n)?.into_iter().rev() {
        plan.extend(f);
    }
    Ok(plan)
}

/// Signed indices of the `U_k` factors, in operator-product order (left first).
pub fn uk_factor_indices(k: i64) -> Vec<(i64, i64)> {
    let exps = uk_exponents(k);
    let mut out: Vec<(i64, i64)> = exps
        .iter()
        .enumerate()
        .map(|(t, &e)| (1i64 << (e - 1), if t % 2 == 0 { 1 } else { -1 }))
        .collect();
    if exps.len() % 2 == 1 {
        out.push((0, 1));
    }
    out
}

/// Gate-level `U_k`.
pub fn synth_uk(k: i64, n: usize) -> Result<Circuit> {
    plan_uk(k, n)?.to_circuit()
}

fn split_factors(k: i64, n: usize) -> Result<Vec<BasicPlan>> {
    uk_factor_indices(k)
        .into_iter()
        .map(|(j, sign)| {
            let spec = AntiDiagonalSpec::new(n, sign * j)?;
            let mut p = BasicPlan::new(n, format!("exp(iπ/2 b_{})", sign * j));
            p.exp_all(expand_b(&spec).terms, -FRAC_PI_2);
            Ok(p)
        })
        .collect()
}

/// How `exp(-iθ b_k)` is synthesized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BkPath {
    /// Commuting product of the expansion terms.
    Expansion,
    /// Conjugated `b̄_{k1}` with the Trotter product for its exponential.
    Conjugation,
}

pub fn bk_path(spec: &AntiDiagonalSpec) -> BkPath {
    if BkReduction::new(spec).is_closed_form() {
        BkPath::Expansion
    } else {
        BkPath::Conjugation
    }
}

/// Exact `exp(-iθ b_k)` as the product of its commuting expansion terms.
pub fn plan_bk_expansion(spec: &AntiDiagonalSpec, theta: f64) -> BasicPlan {
    let mut plan = BasicPlan::new(spec.n, format!("B_{}(θ) expansion", spec.k));
    plan.exp_all(expand_b(spec).terms, theta);
    plan
}

/// `exp(-iθ b_k)` over basic operations, choosing the exact expansion where
/// the core index has a closed form and the conjugation route otherwise.
pub fn plan_bk(spec: &AntiDiagonalSpec, theta: f64, trotter_l: usize) -> Result<BasicPlan> {
    if trotter_l == 0 {
        return Err(Error::Config("trotter depth must be at least 1".into()));
    }
    let red = BkReduction::new(spec);
    if red.is_closed_form() {
        return Ok(plan_bk_expansion(spec, theta));
    }
    let n = spec.n;
    let mut plan = BasicPlan::new(n, format!("B_{}(θ) conjugation L={trotter_l}", spec.k));
    let core_k = red.core_k.abs();
    let flip = (red.core_k < 0).then(|| {
        let mut c = Circuit::new(n, "core x-flip");
        c.gates = red.core_qubits().map(|q| Gate::single(q, Axis::X, PI)).collect();
        c
    });
    if let Some(f) = &flip {
        plan.steps.push(PlanStep::Gates(f.clone()));
    }

    let factors: Vec<BasicPlan> = split_factors(core_k, red.core_n)?
        .into_iter()
        .map(|f| lift_plan(&f, &red, n))
        .collect();
    for f in &factors {
        plan.extend(f.inverse());
    }

    let center = (1u64 << (red.core_n - 1)) - 1;
    let mut dc = vec![SpinFactor::DOWN; red.core_n];
    dc[0] = SpinFactor::UP;
    plan.steps.push(PlanStep::Exp {
        term: red.lift_with_frame(&ProductTerm::new(1.0, dc)),
        angle: theta,
    });
    let b1: Vec<ProductTerm> = expand_b(&AntiDiagonalSpec::new(red.core_n, 1)?)
        .terms
        .iter()
        .map(|t| red.lift_with_frame(t))
        .collect();
    let shift = (red.core_n + red.suffix) as u32;
    let base = red.prefix_bits() << shift;
    let lo = ((core_k as u64 - 1) / 2) << red.suffix;
    let hi = (center << red.suffix) - 1;
    let gbar = DiagonalBlockSpec::new(n, base + lo, base + hi)?;
    let g_pi = synth_block_diagonal(&gbar, PI);
    let g_inv = g_pi.inverse();
    let step = theta / (2.0 * trotter_l as f64);
    for _ in 0..trotter_l {
        plan.steps.push(PlanStep::Gates(g_inv.clone()));
        plan.exp_all(b1.iter().cloned(), -step);
        plan.steps.push(PlanStep::Gates(g_pi.clone()));
        plan.exp_all(b1.iter().cloned(), step);
    }

    for f in factors.iter().rev() {
        plan.extend(f.clone());
    }
    if let Some(f) = &flip {
        plan.steps.push(PlanStep::Gates(f.inverse()));
    }
    Ok(plan)
}

fn lift_plan(p: &BasicPlan, red: &BkReduction, n: usize) -> BasicPlan {
    let steps = p
        .steps
        .iter()
        .map(|s| match s {
            PlanStep::Exp { term, angle } => PlanStep::Exp {
                term: red.lift_controlled(term),
                angle: *angle,
            },
            PlanStep::Gates(_) => unreachable!("factor plans hold exponentials only"),
        })
        .collect();
    BasicPlan {
        n,
        provenance: p.provenance.clone(),
        steps,
    }
}

/// Gate-level `exp(-iθ b_k)`.
pub fn synth_bk(k: i64, theta: f64, trotter_l: usize, n: usize) -> Result<Circuit> {
    let spec = AntiDiagonalSpec::new(n, k)?;
    plan_bk(&spec, theta, trotter_l)?.to_circuit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_to_dense;
    use crate::layout::build_layout;
    use crate::operator::{anticommutator, expm_hermitian, phase_aligned_distance, Lower};
    use proptest::prelude::*;

    fn ones(a: &DenseOperator) -> Vec<(usize, usize)> {
        let d = a.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if a.get(i, j).norm() > 1e-12 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn gm_diagonals() {
        for ordering in [BasisOrdering::Binary, BasisOrdering::WeightLex] {
            for n in 1..=4 {
                let layout = build_layout(n).unwrap();
                let g0 = build_diag(&DiagSpec::Gm(GmSpec::new(&layout, 0).unwrap()), ordering).unwrap();
                assert_eq!(ones(&g0), vec![(0, 0)]);
                let gn = build_diag(&DiagSpec::Gm(GmSpec::new(&layout, n).unwrap()), ordering).unwrap();
                let last = (1 << n) - 1;
                assert_eq!(ones(&gn), vec![(last, last)]);
            }
        }
        let layout = build_layout(3).unwrap();
        let g1 = GmSpec::new(&layout, 1).unwrap();
        let wl = build_diag(&DiagSpec::Gm(g1.clone()), BasisOrdering::WeightLex).unwrap();
        assert_eq!(ones(&wl), vec![(1, 1), (2, 2), (3, 3)]);
        let bin = build_diag(&DiagSpec::Gm(g1), BasisOrdering::Binary).unwrap();
        assert_eq!(ones(&bin), vec![(1, 1), (2, 2), (4, 4)]);
    }

    fn block_oracle(spec: &DiagonalBlockSpec, theta: f64) -> DenseOperator {
        let diag: Vec<C64> = (0..1u64 << spec.n)
            .map(|i| {
                if (spec.l..=spec.upper).contains(&i) {
                    C64::from_polar(1.0, -theta)
                } else {
                    ONE
                }
            })
            .collect();
        DenseOperator::diagonal(&diag)
    }

    #[test]
    fn block_examples() {
        let theta = 0.7;
        let single = DiagonalBlockSpec::new(3, 5, 5).unwrap();
        let c = synth_block_diagonal(&single, theta);
        assert_eq!(c.len(), 1);
        assert!(circuit_to_dense(&c).unwrap().max_diff(&block_oracle(&single, theta)).unwrap() < 1e-12);

        let g1 = DiagonalBlockSpec::new(3, 1, 3).unwrap();
        let c = synth_block_diagonal(&g1, theta);
        // C_1 peeled on three qubits, then {2,3} halves to index 1 on two qubits
        assert_eq!(
            c.gates,
            vec![
                Gate::selective(vec![1, 2, 3], vec![0, 0, 1], theta),
                Gate::selective(vec![1, 2], vec![0, 1], theta),
            ]
        );
        assert!(circuit_to_dense(&c).unwrap().max_diff(&block_oracle(&g1, theta)).unwrap() < 1e-12);

        let full = DiagonalBlockSpec::new(3, 0, 7).unwrap();
        let c = synth_block_diagonal(&full, theta);
        assert!(c.is_empty());
        assert_eq!(c.global_phase, -theta);
        assert!(circuit_to_dense(&c).unwrap().max_diff(&block_oracle(&full, theta)).unwrap() < 1e-12);
    }

    #[test]
    fn block_exhaustive_small() {
        let theta = 1.9;
        for n in 1..=6usize {
            for l in 0..1u64 << n {
                for upper in l..1u64 << n {
                    let spec = DiagonalBlockSpec::new(n, l, upper).unwrap();
                    let c = synth_block_diagonal(&spec, theta);
                    let bound = 2 * (spec.len() as f64).log2().ceil() as usize + 2;
                    assert!(c.len() < 2 * n && c.len() <= bound, "n={n} [{l},{upper}] {}", c.len());
                    let d = circuit_to_dense(&c).unwrap();
                    assert!(d.max_diff(&block_oracle(&spec, theta)).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn naive_gm_counts() {
        let layout = build_layout(4).unwrap();
        let theta = 0.3;
        for ordering in [BasisOrdering::Binary, BasisOrdering::WeightLex] {
            let c = naive_gm(&GmSpec::new(&layout, 0).unwrap(), theta, ordering).unwrap();
            assert_eq!(c.len(), 1);
            let spec = GmSpec::new(&layout, 2).unwrap();
            let c = naive_gm(&spec, theta, ordering).unwrap();
            assert_eq!(c.len(), 6);
            let g = build_diag(&DiagSpec::Gm(spec.clone()), ordering).unwrap();
            let oracle = expm_hermitian(&g, theta).unwrap();
            assert!(circuit_to_dense(&c).unwrap().max_diff(&oracle).unwrap() < 1e-10);
            let zero = naive_gm(&spec, 0.0, ordering).unwrap();
            assert!(circuit_to_dense(&zero).unwrap().max_diff(&DenseOperator::identity(16)).unwrap() < 1e-15);
        }
    }

    #[test]
    fn b_examples() {
        let b = build_b(&AntiDiagonalSpec::new(1, 0).unwrap()).unwrap();
        assert_eq!(ones(&b), vec![(0, 1), (1, 0)]);
        let b = build_b(&AntiDiagonalSpec::new(2, 1).unwrap()).unwrap();
        assert_eq!(ones(&b), vec![(0, 2), (1, 1), (2, 0)]);
        let b = build_b(&AntiDiagonalSpec::new(3, 4).unwrap()).unwrap();
        assert_eq!(ones(&b), vec![(0, 3), (1, 2), (2, 1), (3, 0)]);
        assert!(matches!(
            AntiDiagonalSpec::new(2, 3),
            Err(Error::AntiDiagonalIndex { k: 3, max: 2 })
        ));
    }

    #[test]
    fn b_line_invariants() {
        for n in 1..=5usize {
            let max = (1i64 << n) - 2;
            for k in -max..=max {
                let spec = AntiDiagonalSpec::new(n, k).unwrap();
                let b = build_b(&spec).unwrap();
                let nz = ones(&b);
                assert_eq!(nz.len(), spec.nonzeros());
                assert!(b.hermitian_deviation() == 0.0);
                if k > 0 && k % 2 == 1 {
                    let diag: Vec<usize> = nz.iter().filter(|(i, j)| i == j).map(|p| p.0).collect();
                    assert_eq!(diag, vec![(1usize << (n - 1)) - (k as usize).div_ceil(2)]);
                }
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let e = expand_b(&AntiDiagonalSpec::new(3, 0).unwrap());
        assert_eq!(e.terms, vec![ProductTerm::new(8.0, vec![SpinFactor::IX; 3])]);
        let e = expand_b(&AntiDiagonalSpec::new(2, 1).unwrap());
        assert_eq!(
            e.terms,
            vec![
                ProductTerm::new(2.0, vec![SpinFactor::IX, SpinFactor::UP]),
                ProductTerm::new(1.0, vec![SpinFactor::UP, SpinFactor::DOWN]),
            ]
        );
        assert_eq!(e.len(), 2);
        let e = expand_b(&AntiDiagonalSpec::new(2, 2).unwrap());
        assert_eq!(e.terms, vec![ProductTerm::new(2.0, vec![SpinFactor::UP, SpinFactor::IX])]);
    }

    #[test]
    fn expansion_lowers_exactly() {
        for n in 1..=6usize {
            let max = (1i64 << n) - 2;
            for k in -max..=max {
                let spec = AntiDiagonalSpec::new(n, k).unwrap();
                let e = expand_b(&spec);
                let diff = e.lower(n).unwrap().max_diff(&build_b(&spec).unwrap()).unwrap();
                assert!(diff == 0.0, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn bbar_examples() {
        let n = 3;
        let (bbar, gbar) = build_bbar(n, 1).unwrap();
        assert_eq!(bbar, build_b(&AntiDiagonalSpec::new(n, 1).unwrap()).unwrap());
        assert_eq!(ones(&gbar), vec![(0, 0), (1, 1), (2, 2)]);
        let (bbar, _) = build_bbar(n, 3).unwrap();
        let nz = ones(&bbar);
        assert_eq!(nz.len(), 5);
        assert!(!nz.contains(&(0, 6)) && !nz.contains(&(6, 0)));
        assert!(nz.contains(&(3, 3)));
        assert!(matches!(build_bbar(3, 2), Err(Error::EvenIndex(2))));
    }

    #[test]
    fn bbar_anticommutator_identity() {
        for n in 2..=5usize {
            let dim = 1usize << n;
            let center = dim / 2 - 1;
            let mut dc = DenseOperator::zeros(dim);
            dc.set(center, center, ONE);
            let b1 = build_b(&AntiDiagonalSpec::new(n, 1).unwrap()).unwrap();
            let b1_off = b1.sub(&dc).unwrap();
            for k in (1..dim as i64 - 1).step_by(2) {
                let (bbar, gbar) = build_bbar(n, k).unwrap();
                let lhs = bbar.sub(&dc).unwrap();
                let rhs = anticommutator(&gbar, &b1_off).unwrap();
                assert!(lhs.max_diff(&rhs).unwrap() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn reduction_shapes() {
        let r = BkReduction::new(&AntiDiagonalSpec::new(5, 22).unwrap());
        // 22 = 16 + 6, 6 = 2·3
        assert_eq!((r.prefix.clone(), r.core_k, r.core_n, r.suffix), (vec![Sign::Plus], 3, 3, 1));
        assert!(r.is_closed_form());
        let r = BkReduction::new(&AntiDiagonalSpec::new(5, 11).unwrap());
        assert!(!r.is_closed_form());
        let r = BkReduction::new(&AntiDiagonalSpec::new(4, -11).unwrap());
        assert_eq!((r.prefix.clone(), r.core_k, r.core_n), (vec![Sign::Minus], -3, 3));
    }

    #[test]
    fn uk_examples() {
        assert!(synth_uk(1, 3).unwrap().is_empty());
        assert_eq!(uk_factor_indices(3), vec![(1, 1), (0, 1)]);
        assert_eq!(uk_factor_indices(5), vec![(2, 1), (0, 1)]);
        assert_eq!(uk_factor_indices(11), vec![(4, 1), (1, -1)]);
        let p = plan_uk(5, 4).unwrap();
        assert!(p.basic_op_count() < 16);
        assert!(matches!(synth_uk(4, 3), Err(Error::EvenIndex(4))));
    }

    #[test]
    fn uk_conjugation_small() {
        for n in 3..=5usize {
            for k in (1..(1i64 << n) - 2).step_by(2) {
                let u = circuit_to_dense(&synth_uk(k, n).unwrap()).unwrap();
                let (bbar, _) = build_bbar(n, k).unwrap();
                let b = build_b(&AntiDiagonalSpec::new(n, k).unwrap()).unwrap();
                let d = bbar.conjugate_by(&u).unwrap().max_diff(&b).unwrap();
                assert!(d < 1e-9, "n={n} k={k} d={d}");
            }
        }
    }

    fn bk_oracle(n: usize, k: i64, theta: f64) -> DenseOperator {
        expm_hermitian(&build_b(&AntiDiagonalSpec::new(n, k).unwrap()).unwrap(), theta).unwrap()
    }

    #[test]
    fn bk_exact_paths() {
        let theta = 0.83;
        let c = synth_bk(0, theta, 1, 3).unwrap();
        assert!(phase_aligned_distance(&circuit_to_dense(&c).unwrap(), &bk_oracle(3, 0, theta)).unwrap() < 1e-10);
        let c = synth_bk(1, theta, 1, 3).unwrap();
        assert_eq!(plan_bk(&AntiDiagonalSpec::new(3, 1).unwrap(), theta, 1).unwrap().basic_op_count(), 3);
        assert!(circuit_to_dense(&c).unwrap().max_diff(&bk_oracle(3, 1, theta)).unwrap() < 1e-9);
    }

    #[test]
    fn bk_general_path_is_exact_for_every_depth() {
        let theta = 1.1;
        for (n, k) in [(4usize, 11i64), (4, -11), (4, 13), (5, 11), (5, 22), (5, -19), (5, 27)] {
            let spec = AntiDiagonalSpec::new(n, k).unwrap();
            let oracle = bk_oracle(n, k, theta);
            for l in [1usize, 2, 4] {
                let c = synth_bk(k, theta, l, n).unwrap();
                let d = circuit_to_dense(&c).unwrap().max_diff(&oracle).unwrap();
                assert!(d < 1e-9, "n={n} k={k} L={l} d={d} path={:?}", bk_path(&spec));
            }
        }
    }

    #[test]
    fn seven_at_four_qubits_is_closed_form() {
        let spec = AntiDiagonalSpec::new(4, 7).unwrap();
        assert_eq!(bk_path(&spec), BkPath::Expansion);
        let c = synth_bk(7, 0.9, 4, 4).unwrap();
        assert!(circuit_to_dense(&c).unwrap().max_diff(&bk_oracle(4, 7, 0.9)).unwrap() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bk_matches_oracle(n in 2usize..=5, raw in any::<i64>(), theta in -3.0f64..3.0, l in 1usize..=3) {
            let max = (1i64 << n) - 2;
            let k = raw.rem_euclid(2 * max + 1) - max;
            let c = synth_bk(k, theta, l, n).unwrap();
            let d = circuit_to_dense(&c).unwrap().max_diff(&bk_oracle(n, k, theta)).unwrap();
            prop_assert!(d < 1e-9, "n={} k={} d={}", n, k, d);
        }

        #[test]
        fn bk_count_bound(n in 3usize..=20, raw in any::<u64>(), l in 1usize..=32) {
            let max = (1i64 << n) - 2;
            let k = (raw % (2 * max as u64 + 1)) as i64 - max;
            let spec = AntiDiagonalSpec::new(n, k).unwrap();
            prop_assume!(bk_path(&spec) == BkPath::Conjugation);
            let count = plan_bk(&spec, 1.0, l).unwrap().basic_op_count();
            prop_assert!(count <= 2 * n * n + 6 * l * n, "n={} k={} count={}", n, k, count);
        }
    }
}
