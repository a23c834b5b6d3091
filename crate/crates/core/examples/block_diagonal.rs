//! exp(-iθ g_m) by parity reduction versus one selective rotation per state.

use std::f64::consts::PI;

use mqsynth::circuit::{circuit_to_dense, count};
use mqsynth::generators::{build_diag, naive_gm, synth_block_diagonal, DiagSpec, GmSpec};
use mqsynth::layout::{build_layout, BasisOrdering};
use mqsynth::operator::expm_hermitian;

fn main() -> mqsynth::Result<()> {
    let layout = build_layout(6)?;
    for m in 0..=6 {
        let spec = GmSpec::new(&layout, m)?;
        let block = synth_block_diagonal(&spec.position_block(), PI);
        let naive = naive_gm(&spec, PI, BasisOrdering::WeightLex)?;
        let oracle = expm_hermitian(&build_diag(&DiagSpec::Gm(spec.clone()), BasisOrdering::WeightLex)?, PI)?;
        let err = circuit_to_dense(&block)?.max_diff(&oracle)?;
        println!(
            "m={m}: block {} selective, naive {} selective, deviation {err:.1e}",
            count(&block).selective,
            count(&naive).selective
        );
    }
    Ok(())
}
