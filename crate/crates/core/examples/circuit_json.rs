//! Circuit JSON round trip.

use mqsynth::circuit::{deserialize, serialize};
use mqsynth::generators::synth_bk;

fn main() -> mqsynth::Result<()> {
    let c = synth_bk(-5, 0.25, 1, 3)?;
    let bytes = serialize(&c);
    print!("{}", String::from_utf8_lossy(&bytes));
    let back = deserialize(&bytes)?;
    assert_eq!(serialize(&back), bytes);
    eprintln!("round trip identical ({} gates)", back.len());

    match deserialize(br#"{"n": 2, "provenance": "bad", "gates": [{"gate": "zz", "qubits": [1, 1], "angle": 0.5}]}"#) {
        Err(e) => eprintln!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
