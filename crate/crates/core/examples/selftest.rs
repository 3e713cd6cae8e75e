//! Run the quick self-test battery and print one line per check.

use neighborly::harness::{run_selftest, SelftestOptions, Tier};

fn main() -> neighborly::Result<()> {
    let r = run_selftest(Tier::Quick, &SelftestOptions::default())?;
    for c in &r.checks {
        println!("{:<26} {:<5} {:>7} cases {:>7.2}s", c.name, c.pass, c.cases, c.seconds);
    }
    println!("overall: {}", if r.pass { "pass" } else { "FAIL" });
    Ok(())
}
