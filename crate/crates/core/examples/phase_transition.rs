//! A small phase-transition sweep written as CSV to stdout.

use neighborly::harness::{phase_csv, run_phase_transition, ExperimentConfig};

fn main() -> neighborly::Result<()> {
    let cfg = ExperimentConfig {
        n: 30,
        big_n: 60,
        m_grid: (0..=18).step_by(3).collect(),
        trials: 40,
        seed: 1,
        rip_trials: 20,
        ..ExperimentConfig::default()
    };
    print!("{}", phase_csv(&run_phase_transition(&cfg)?)?);
    Ok(())
}
