//! Product operators, their dense lowering and spectral exponentials.

use mqsynth::operator::{anticommutator, expm_hermitian, Lower, ProductTerm, SpinFactor};

fn main() -> mqsynth::Result<()> {
    // 2 I_1x I_2y and the projector product |0><0| ⊗ I_x
    let a = ProductTerm::new(2.0, vec![SpinFactor::IX, SpinFactor::IY]);
    let b = ProductTerm::new(1.0, vec![SpinFactor::UP, SpinFactor::IX]);
    println!("A = {a}\nB = {b}");

    let (da, db) = (a.lower(2)?, b.lower(2)?);
    println!("spectral norm of A: {}", da.spectral_norm());
    println!("eigenvalues of B: {:?}", db.hermitian_eigenvalues()?);
    println!("[A, B]_+ max entry: {}", anticommutator(&da, &db)?.max_abs());

    let u = expm_hermitian(&da, std::f64::consts::PI)?;
    println!("exp(-iπA) unitarity deviation: {:.1e}", u.unitarity_deviation());
    Ok(())
}
