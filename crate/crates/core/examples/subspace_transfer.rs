//! Moving a random state of S(m) into the largest subspace with U_pm(π).

use mqsynth::circuit::{circuit_to_dense, count};
use mqsynth::layout::{build_layout, subspace_support, BasisOrdering};
use mqsynth::operator::phase_aligned_distance;
use mqsynth::transfer::{
    build_qpm, choose_k, random_subspace_state, synth_upm, transfer_state, upm_dense_oracle, GmRealization,
    TransferSpec,
};

fn main() -> mqsynth::Result<()> {
    let layout = build_layout(6)?;
    for m in 0..layout.peak() {
        let choice = choose_k(&layout, m, layout.peak())?;
        println!(
            "m={m}: window {}..={}, k = {} ({:?}), m0 = {:?}",
            choice.window.k_min, choice.window.k_max, choice.k, choice.regime, choice.m0
        );
    }

    let spec = TransferSpec::new(&layout, 2)?.with_trotter(2)?;
    let q = build_qpm(&layout, 2, spec.resolve_k()?)?;
    println!("Q_pm pairs: {:?}", &q.pairs[..4]);

    let circuit = synth_upm(&spec, GmRealization::Block)?;
    let err = phase_aligned_distance(&circuit_to_dense(&circuit)?, &upm_dense_oracle(&spec)?)?;
    println!("U_pm circuit: {:?}, deviation {err:.1e}", count(&circuit));

    let psi = random_subspace_state(&layout, 2, 7)?;
    let out = transfer_state(&psi, &spec, false)?;
    println!("before {:?}", subspace_support(&psi, &layout, BasisOrdering::WeightLex)?);
    println!("after  {:?}", subspace_support(&out, &layout, BasisOrdering::WeightLex)?);
    Ok(())
}
