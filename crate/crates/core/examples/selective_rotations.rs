//! Selective rotations: normalization to the all-zero label and a mixed
//! product term lowered to gates.

use mqsynth::circuit::{circuit_to_dense, count, gate_to_dense, Gate};
use mqsynth::elementary::{normalize_selective, synth_basic_unitary, synth_zero_quantum};
use mqsynth::operator::{expm_hermitian, phase_aligned_distance, Lower, ProductTerm, SpinFactor};

fn main() -> mqsynth::Result<()> {
    let n = 4;
    // C_{10}^{2,4}(θ): phase on qubit 2 = 1, qubit 4 = 0
    let norm = normalize_selective(&[2, 4], &[1, 0], 0.8, n)?;
    println!("flips {:?}, swaps {:?}", norm.flips, norm.swaps);
    let direct = gate_to_dense(&Gate::selective(vec![2, 4], vec![1, 0], 0.8), n)?;
    let via = circuit_to_dense(&norm.into_circuit())?;
    println!("normalized form deviation: {:.1e}", phase_aligned_distance(&via, &direct)?);

    let v = synth_zero_quantum(1, 3, std::f64::consts::PI, n)?;
    println!("V_13(π): {} gates", v.len());

    let term = ProductTerm::new(
        2.0,
        vec![SpinFactor::IX, SpinFactor::DOWN, SpinFactor::E, SpinFactor::IY],
    );
    let c = synth_basic_unitary(&term, 0.6, n)?;
    let err = phase_aligned_distance(&circuit_to_dense(&c)?, &expm_hermitian(&term.lower(n)?, 0.6)?)?;
    println!("exp(-iθ {term}): {:?}, deviation {err:.1e}", count(&c));
    Ok(())
}
