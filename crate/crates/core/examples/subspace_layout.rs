//! Weight subspaces of a 4-qubit register and the weight-lex bridge.

use mqsynth::layout::{build_layout, permutation_dense, subspace_support, BasisOrdering, BasisPermutation};
use mqsynth::operator::C64;

fn main() -> mqsynth::Result<()> {
    let layout = build_layout(4)?;
    print!("{layout}");

    let perm = BasisPermutation::new(&layout);
    println!("position -> binary index: {:?}", perm.forward_map());

    // |0110> sits at weight-lex position 7
    let mut state = vec![C64::new(0.0, 0.0); 16];
    state[0b0110] = C64::new(1.0, 0.0);
    let weight_order = perm.state_to_weight_order(&state);
    let pos = weight_order.iter().position(|a| a.norm() > 0.5).unwrap();
    println!("|0110> -> position {pos}");
    println!("support: {:?}", subspace_support(&state, &layout, BasisOrdering::Binary)?);

    let p = permutation_dense(&layout)?;
    println!("P is a permutation: unitarity deviation {:.1e}", p.unitarity_deviation());
    Ok(())
}
