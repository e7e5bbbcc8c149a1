//! Runs the three-way training ablation on the seeded synthetic world and
//! prints the bias table.
//!
//! ```text
//! cargo run --release --example ablation [world-seed]
//! ```

use fairtrip::ablation::SyntheticAblation;
use fairtrip::trainer::TrainMode;

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let run = SyntheticAblation::with_seed(seed).run()?;
    println!("forge: {:?}", run.forge_stats);
    println!("{}", run.outcome.table());
    for mode in TrainMode::ALL {
        let row = run.outcome.row(mode);
        let last = row.log.last().expect("at least one epoch");
        println!(
            "{:<13} s_ap {:.3}  s_an {:+.3}  overall SS {:.2}  LM {:.2}",
            mode.as_str(),
            last.mean_s_ap,
            last.mean_s_an,
            row.report.overall.ss,
            row.report.overall.lm
        );
    }
    Ok(())
}
