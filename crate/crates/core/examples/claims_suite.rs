//! A small claims sweep written as JSON lines to stdout.

use mqsynth::claims::{any_failed, run_claims_suite, write_jsonl, KPolicy, SweepConfig};

fn main() -> mqsynth::Result<()> {
    let config = SweepConfig {
        n_max: 4,
        count_n_max: 10,
        k_policy: KPolicy::ExhaustiveWindow,
        ..SweepConfig::default()
    };
    let results = run_claims_suite(&config)?;
    write_jsonl(&results, std::io::stdout().lock()).expect("stdout");
    eprintln!("{} results, any fail: {}", results.len(), any_failed(&results));
    Ok(())
}
