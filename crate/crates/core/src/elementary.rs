//! Lowering of elementary propagators into the gate set: multi-body ZZ,
//! zero-quantum swaps, selective-rotation relabeling and the basic unitaries
//! `exp(-iθQ)` for real product terms.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::operator::{Axis, ProductTerm, Sign, SpinFactor};

fn check_indices(indices: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidQubitSet(indices.to_vec()));
    }
    for &q in &sorted {
        if q == 0 || q > n {
            return Err(Error::QubitIndex { qubit: q, n });
        }
    }
    Ok(sorted)
}

/// Temporal gates of `A_{ab}`, which conjugates `I_{az}` into `2 I_{az} I_{bz}`.
fn zz_lift(a: usize, b: usize) -> [Gate; 3] {
    [
        Gate::single(a, Axis::Y, FRAC_PI_2),
        Gate::coupling(a, b, FRAC_PI_2),
        Gate::single(a, Axis::X, FRAC_PI_2),
    ]
}

fn inverse_gates(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// `exp(-iθ 2^{m-1} I_{k_1 z} ... I_{k_m z})`.
pub fn synth_multibody_zz(indices: &[usize], theta: f64, n: usize) -> Result<Circuit> {
    let ks = check_indices(indices, n)?;
    let mut c = Circuit::new(n, format!("multibody_zz{ks:?}"));
    c.gates = multibody_gates(&ks, theta);
    Ok(c)
}

fn multibody_gates(ks: &[usize], theta: f64) -> Vec<Gate> {
    match ks.len() {
        1 => vec![Gate::single(ks[0], Axis::Z, theta)],
        2 => vec![Gate::coupling(ks[0], ks[1], theta)],
        m => {
            let lift = zz_lift(ks[m - 2], ks[m - 1]);
            let mut gates = inverse_gates(&lift);
            gates.extend(multibody_gates(&ks[..m - 1], theta));
            gates.extend(lift);
            gates
        }
    }
}

/// Single-spin rotation conjugating `I_z` into `I_axis`.
fn z_to(q: usize, axis: Axis) -> Option<Gate> {
    match axis {
        Axis::X => Some(Gate::single(q, Axis::Y, FRAC_PI_2)),
        Axis::Y => Some(Gate::single(q, Axis::X, -FRAC_PI_2)),
        Axis::Z => None,
    }
}

/// `exp(-iα I_{kμ} I_{lν})` as a rotated coupling.
fn bilinear(k: usize, mu: Axis, l: usize, nu: Axis, alpha: f64) -> Vec<Gate> {
    let frame: Vec<Gate> = [z_to(k, mu), z_to(l, nu)].into_iter().flatten().collect();
    let mut gates = inverse_gates(&frame);
    gates.push(Gate::coupling(k, l, alpha / 2.0));
    gates.extend(frame);
    gates
}

/// `V_kl(θ) = exp(-iθ I_kx I_ly) exp(iθ I_ky I_lx)`.
pub fn synth_zero_quantum(k: usize, l: usize, theta: f64, n: usize) -> Result<Circuit> {
    if k == l {
        return Err(Error::InvalidQubitSet(vec![k, l]));
    }
    check_indices(&[k, l], n)?;
    let mut c = Circuit::new(n, format!("zero_quantum({k},{l})"));
    if theta == 0.0 {
        return Ok(c);
    }
    c.gates = bilinear(k, Axis::Y, l, Axis::X, -theta);
    c.gates.extend(bilinear(k, Axis::X, l, Axis::Y, theta));
    Ok(c)
}

/// A selective rotation rewritten as `pre`, then the canonical gate on qubits
/// `1..=m` with labels `0...0`, then `post`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSelective {
    pub pre: Circuit,
    pub canonical: Gate,
    pub post: Circuit,
    /// Qubits flipped by π x-pulses.
    pub flips: Vec<usize>,
    /// `(hole, outsider)` pairs exchanged by `V(π)`.
    pub swaps: Vec<(usize, usize)>,
}

impl NormalizedSelective {
    pub fn into_circuit(self) -> Circuit {
        let mut c = self.pre;
        c.gates.push(self.canonical);
        c.gates.extend(self.post.gates);
        c
    }
}

pub fn normalize_selective(
    subset: &[usize],
    labels: &[u8],
    theta: f64,
    n: usize,
) -> Result<NormalizedSelective> {
    let ks = check_indices(subset, n)?;
    if ks != subset || labels.len() != ks.len() || labels.iter().any(|&a| a > 1) {
        return Err(Error::InvalidQubitSet(subset.to_vec()));
    }
    let m = ks.len();
    let mut pre = Circuit::new(n, "normalize");
    let mut trail = Vec::new();
    let mut flips = Vec::new();
    for (&q, &a) in ks.iter().zip(labels) {
        if a == 1 {
            pre.gates.push(Gate::single(q, Axis::X, PI));
            trail.push(format!("X{q}"));
            flips.push(q);
        }
    }
    let holes = (1..=m).filter(|q| !ks.contains(q));
    let outsiders = ks.iter().copied().filter(|&q| q > m);
    let swaps: Vec<(usize, usize)> = holes.zip(outsiders).collect();
    for &(hole, out) in &swaps {
        pre.append(&synth_zero_quantum(hole, out, PI, n)?)?;
        trail.push(format!("V{hole},{out}"));
    }
    pre.provenance = format!("normalize[{}]", trail.join(" "));
    let post = pre.inverse();
    Ok(NormalizedSelective {
        pre,
        canonical: Gate::selective((1..=m).collect(), vec![0; m], theta),
        post,
        flips,
        swaps,
    })
}

/// `exp(-iθ term)` for a real-coefficient product term.
pub fn synth_basic_unitary(term: &ProductTerm, theta: f64, n: usize) -> Result<Circuit> {
    if term.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: term.n(),
        });
    }
    if term.coefficient.im != 0.0 || !term.coefficient.re.is_finite() {
        return Err(Error::UnrecognizedTerm(term.to_string()));
    }
    let angle = theta * term.coefficient.re;
    let mut c = Circuit::new(n, format!("basic({term})"));

    let mut frame = Vec::new();
    let mut transverse = Vec::new();
    let mut projectors = Vec::new();
    for (i, f) in term.factors.iter().enumerate() {
        let q = i + 1;
        match *f {
            SpinFactor::E => {}
            SpinFactor::I(axis) => {
                frame.extend(z_to(q, axis).map(|g| g.inverse()));
                transverse.push(q);
            }
            SpinFactor::P(sign, axis) => {
                frame.extend(z_to(q, axis).map(|g| g.inverse()));
                projectors.push((q, u8::from(sign == Sign::Minus)));
            }
        }
    }
    if transverse.is_empty() && projectors.is_empty() {
        c.global_phase = -angle;
        return Ok(c);
    }

    let s = transverse.len();
    let mut core = Vec::new();
    if projectors.is_empty() {
        core = multibody_gates(&transverse, angle / f64::powi(2.0, s as i32 - 1));
    } else if s == 0 {
        let (qs, labels): (Vec<usize>, Vec<u8>) = projectors.into_iter().unzip();
        core = normalize_selective(&qs, &labels, angle, n)?.into_circuit().gates;
    } else {
        let chain: Vec<Gate> = transverse
            .windows(2)
            .flat_map(|w| zz_lift(w[0], w[1]))
            .collect();
        let scaled = angle / f64::powi(2.0, s as i32 - 1);
        let mut with_pivot = projectors.clone();
        with_pivot.push((transverse[0], 0));
        with_pivot.sort_unstable();
        let (qs, labels): (Vec<usize>, Vec<u8>) = with_pivot.into_iter().unzip();
        let (ps, plabels): (Vec<usize>, Vec<u8>) = projectors.into_iter().unzip();
        core.extend(inverse_gates(&chain));
        core.extend(normalize_selective(&qs, &labels, scaled, n)?.into_circuit().gates);
        core.extend(normalize_selective(&ps, &plabels, -scaled / 2.0, n)?.into_circuit().gates);
        core.extend(chain);
    }
    c.gates = frame.clone();
    c.gates.extend(core);
    c.gates.extend(inverse_gates(&frame));
    Ok(c)
}
