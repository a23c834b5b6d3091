//! Anti-diagonal generators: tensor expansion, U_k, and exp(-iθ b_k).

use mqsynth::circuit::circuit_to_dense;
use mqsynth::generators::{bk_path, build_b, expand_b, plan_bk, plan_uk, synth_bk, uk_factor_indices, AntiDiagonalSpec};
use mqsynth::operator::{expm_hermitian, Lower};

fn main() -> mqsynth::Result<()> {
    let n = 4;
    let spec = AntiDiagonalSpec::new(n, 3)?;
    let expansion = expand_b(&spec);
    for t in &expansion.terms {
        println!("  {t}");
    }
    println!("b_3 expansion exact: {}", expansion.lower(n)?.max_diff(&build_b(&spec)?)? == 0.0);

    println!("U_11 factors: {:?}, basic ops {}", uk_factor_indices(11), plan_uk(11, n)?.basic_op_count());

    for k in [8, 6, 11, -11] {
        let spec = AntiDiagonalSpec::new(n, k)?;
        let plan = plan_bk(&spec, 0.5, 2)?;
        let c = synth_bk(k, 0.5, 2, n)?;
        let err = circuit_to_dense(&c)?.max_diff(&expm_hermitian(&build_b(&spec)?, 0.5)?)?;
        println!(
            "B_{k}: {:?}, {} basic ops, {} gates, deviation {err:.1e}",
            bk_path(&spec),
            plan.basic_op_count(),
            c.len()
        );
    }
    Ok(())
}
