//! exp(-iθ 2^{m-1} I_z...I_z) from couplings and π/2 pulses.

use mqsynth::circuit::{circuit_to_dense, count};
use mqsynth::elementary::synth_multibody_zz;
use mqsynth::operator::{expm_hermitian, Lower, ProductTerm, SpinFactor};

fn main() -> mqsynth::Result<()> {
    let (n, theta) = (5, 0.42);
    let qubits = [1, 2, 4, 5];
    let circuit = synth_multibody_zz(&qubits, theta, n)?;
    println!("{circuit}");

    let mut factors = vec![SpinFactor::E; n];
    qubits.iter().for_each(|&q| factors[q - 1] = SpinFactor::IZ);
    let h = ProductTerm::new(8.0, factors).lower(n)?;
    let err = circuit_to_dense(&circuit)?.max_diff(&expm_hermitian(&h, theta)?)?;
    println!("gates: {:?}", count(&circuit));
    println!("max deviation from exp(-iθH): {err:.1e}");
    Ok(())
}
