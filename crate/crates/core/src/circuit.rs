//! Circuit IR over the universal gate set: single-spin rotations, ZZ couplings
//! and selective rotations. Gate lists are stored in temporal order.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Axis, DenseOperator, C64, ONE, ZERO};

/// Largest register accepted by dense lowering.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register accepted by state-vector simulation.
pub const MAX_STATE_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", deny_unknown_fields)]
pub enum Gate {
    /// `exp(-i θ I_{kμ})`
    #[serde(rename = "single")]
    SingleSpin { qubit: usize, axis: Axis, angle: f64 },
    /// `exp(-i θ 2 I_{kz} I_{lz})`
    #[serde(rename = "zz")]
    Coupling { qubits: [usize; 2], angle: f64 },
    /// `exp(-i θ D)` with `D` the projector onto `|a_1 ... a_m>` of the subset.
    #[serde(rename = "sel")]
    Selective {
        qubits: Vec<usize>,
        labels: Vec<u8>,
        angle: f64,
    },
}

impl Gate {
    pub fn single(qubit: usize, axis: Axis, angle: f64) -> Gate {
        Gate::SingleSpin { qubit, axis, angle }
    }

    /// Coupling on an unordered pair; stored as `k < l`.
    pub fn coupling(k: usize, l: usize, angle: f64) -> Gate {
        Gate::Coupling {
            qubits: [k.min(l), k.max(l)],
            angle,
        }
    }

    pub fn selective(qubits: Vec<usize>, labels: Vec<u8>, angle: f64) -> Gate {
        Gate::Selective {
            qubits,
            labels,
            angle,
        }
    }

    pub fn angle(&self) -> f64 {
        match self {
            Gate::SingleSpin { angle, .. }
            | Gate::Coupling { angle, .. }
            | Gate::Selective { angle, .. } => *angle,
        }
    }

    pub fn inverse(&self) -> Gate {
        let mut g = self.clone();
        match &mut g {
            Gate::SingleSpin { angle, .. }
            | Gate::Coupling { angle, .. }
            | Gate::Selective { angle, .. } => *angle = -*angle,
        }
        g
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(
            self,
            Gate::SingleSpin {
                axis: Axis::X | Axis::Y,
                ..
            }
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |q: usize| {
            if q == 0 || q > n {
                Err(Error::QubitIndex { qubit: q, n })
            } else {
                Ok(())
            }
        };
        match self {
            Gate::SingleSpin { qubit, .. } => check(*qubit),
            Gate::Coupling { qubits, .. } => {
                check(qubits[0])?;
                check(qubits[1])?;
                if qubits[0] >= qubits[1] {
                    return Err(Error::InvalidQubitSet(qubits.to_vec()));
                }
                Ok(())
            }
            Gate::Selective { qubits, labels, .. } => {
                for &q in qubits {
                    check(q)?;
                }
                if qubits.is_empty() || qubits.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidQubitSet(qubits.clone()));
                }
                if labels.len() != qubits.len() || labels.iter().any(|&a| a > 1) {
                    return Err(Error::InvalidQubitSet(qubits.clone()));
                }
                Ok(())
            }
        }
    }

    /// Applies the gate in place to a binary-ordered state of `n` qubits.
    fn apply(&self, n: usize, state: &mut [C64]) {
        let bit = |q: usize| n - q;
        match self {
            Gate::SingleSpin { qubit, axis, angle } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                // cos(θ/2) E - i sin(θ/2) σ_μ
                let m: [[C64; 2]; 2] = match axis {
                    Axis::X => [
                        [C64::new(c, 0.0), C64::new(0.0, -s)],
                        [C64::new(0.0, -s), C64::new(c, 0.0)],
                    ],
                    Axis::Y => [
                        [C64::new(c, 0.0), C64::new(-s, 0.0)],
                        [C64::new(s, 0.0), C64::new(c, 0.0)],
                    ],
                    Axis::Z => [
                        [C64::new(c, -s), ZERO],
                        [ZERO, C64::new(c, s)],
                    ],
                };
                let stride = 1usize << bit(*qubit);
                for i in 0..state.len() {
                    if i & stride == 0 {
                        let (a0, a1) = (state[i], state[i | stride]);
                        state[i] = m[0][0] * a0 + m[0][1] * a1;
                        state[i | stride] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
            _ => {
                for (i, a) in state.iter_mut().enumerate() {
                    *a *= self.diagonal_phase(n, i);
                }
            }
        }
    }

    /// Diagonal entry at binary index `i` (diagonal gates only).
    fn diagonal_phase(&self, n: usize, i: usize) -> C64 {
        let bit_of = |q: usize| (i >> (n - q)) & 1;
        match self {
            Gate::SingleSpin { qubit, angle, .. } => {
                let z = 1.0 - 2.0 * bit_of(*qubit) as f64;
                C64::from_polar(1.0, -angle * z / 2.0)
            }
            Gate::Coupling { qubits, angle } => {
                let zz = if bit_of(qubits[0]) == bit_of(qubits[1]) {
                    1.0
                } else {
                    -1.0
                };
                C64::from_polar(1.0, -angle * zz / 2.0)
            }
            Gate::Selective {
                qubits,
                labels,
                angle,
            } => {
                if qubits
                    .iter()
                    .zip(labels)
                    .all(|(&q, &a)| bit_of(q) as u8 == a)
                {
                    C64::from_polar(1.0, -angle)
                } else {
                    ONE
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::SingleSpin { qubit, axis, angle } => write!(f, "R{axis}({qubit}; {angle})"),
            Gate::Coupling { qubits, angle } => {
                write!(f, "ZZ({},{}; {angle})", qubits[0], qubits[1])
            }
            Gate::Selective {
                qubits,
                labels,
                angle,
            } => {
                let label: String = labels.iter().map(|a| char::from(b'0' + a)).collect();
                write!(f, "C[{label}]{qubits:?}({angle})")
            }
        }
    }
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Ordered gate list; the first gate acts first. The overall operator carries
/// an extra factor `e^{i global_phase}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub n: usize,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub global_phase: f64,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, provenance: impl Into<String>) -> Self {
        Self {
            n,
            provenance: provenance.into(),
            global_phase: 0.0,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, provenance: impl Into<String>, gates: Vec<Gate>) -> Result<Self> {
        let c = Self {
            n,
            provenance: provenance.into(),
            global_phase: 0.0,
            gates,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n))
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// Appends `other` so it acts after `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        self.global_phase += other.global_phase;
        Ok(())
    }

    pub fn then(mut self, other: &Circuit) -> Result<Circuit> {
        self.append(other)?;
        Ok(self)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            provenance: format!("inverse({})", self.provenance),
            global_phase: -self.global_phase,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.gates.iter().all(Gate::is_diagonal)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [n={}, {} gates]", self.provenance, self.n, self.len())?;
        if self.global_phase != 0.0 {
            write!(f, " phase {}", self.global_phase)?;
        }
        for g in &self.gates {
            write!(f, "\n  {g}")?;
        }
        Ok(())
    }
}

/// Dense matrix of one gate on `n` qubits.
pub fn gate_to_dense(g: &Gate, n: usize) -> Result<DenseOperator> {
    let c = Circuit::from_gates(n, "gate", vec![g.clone()])?;
    circuit_to_dense(&c)
}

/// Product of gate matrices, later gates multiplying on the left.
pub fn circuit_to_dense(c: &Circuit) -> Result<DenseOperator> {
    if c.n > MAX_DENSE_QUBITS {
        return Err(Error::QubitCount {
            n: c.n,
            min: 0,
            max: MAX_DENSE_QUBITS,
        });
    }
    c.validate()?;
    let dim = 1usize << c.n;
    let phase = C64::from_polar(1.0, c.global_phase);
    if c.is_diagonal() {
        let diag: Vec<C64> = (0..dim)
            .map(|i| {
                c.gates
                    .iter()
                    .fold(phase, |acc, g| acc * g.diagonal_phase(c.n, i))
            })
            .collect();
        return Ok(DenseOperator::diagonal(&diag));
    }
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let mut column = vec![ZERO; dim];
    for j in 0..dim {
        column.fill(ZERO);
        column[j] = phase;
        for g in &c.gates {
            g.apply(c.n, &mut column);
        }
        for (i, &v) in column.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(DenseOperator::from_matrix(m))
}

/// Runs the circuit on a binary-ordered state vector.
pub fn apply_to_state(c: &Circuit, state: &[C64]) -> Result<Vec<C64>> {
    if c.n > MAX_STATE_QUBITS {
        return Err(Error::QubitCount {
            n: c.n,
            min: 0,
            max: MAX_STATE_QUBITS,
        });
    }
    if state.len() != 1usize << c.n {
        return Err(Error::DimensionMismatch {
            expected: 1usize << c.n,
            found: state.len(),
        });
    }
    c.validate()?;
    let phase = C64::from_polar(1.0, c.global_phase);
    let mut out: Vec<C64> = state.iter().map(|&a| a * phase).collect();
    for g in &c.gates {
        g.apply(c.n, &mut out);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub single: usize,
    pub coupling: usize,
    pub selective: usize,
    /// Selective gates keyed by subset size `m`.
    pub selective_by_size: BTreeMap<usize, usize>,
    pub total: usize,
}

pub fn count(c: &Circuit) -> GateCountReport {
    let mut r = GateCountReport::default();
    for g in &c.gates {
        match g {
            Gate::SingleSpin { .. } => r.single += 1,
            Gate::Coupling { .. } => r.coupling += 1,
            Gate::Selective { qubits, .. } => {
                r.selective += 1;
                *r.selective_by_size.entry(qubits.len()).or_default() += 1;
            }
        }
    }
    r.total = c.gates.len();
    r
}

/// Pretty-printed JSON with shortest round-trip angle literals.
pub fn serialize(c: &Circuit) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(c).expect("circuits serialize");
    out.push(b'\n');
    out
}

pub fn deserialize(bytes: &[u8]) -> Result<Circuit> {
    let c: Circuit = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    c.validate()?;
    Ok(c)
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line - 1)
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}
