// Two pure states with overlap 0.5: build the two-stage strategy and check
// the simulated copy count against `1/λ_min⁺(W)`.

use std::error::Error;

use useqd::ensembles::{gen_two_state, Ensemble};
use useqd::simulator::{closed_form_expected_copies, run_trials, SimConfig};
use useqd::strategy::{build_strategy, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let e = gen_two_state(0.5)?;
    let strategy = build_strategy(&e, 1, &StrategyOptions::default())?;
    let expected = closed_form_expected_copies(&strategy);

    let report = run_trials(&strategy, &e, &SimConfig::new(20_000, 10_000, 1))?;
    for (s, stats) in report.per_hypothesis.iter().enumerate() {
        println!(
            "state {}: success {:.4}, E[L] {:.4}, simulated {:.4} ± {:.4}",
            stats.hypothesis,
            strategy.success_probs()[s],
            expected[s],
            stats.mean_copies,
            stats.std_error
        );
        assert!((stats.mean_copies - expected[s]).abs() < 5.0 * stats.std_error);
    }
    // zero error is structural, not statistical
    assert_eq!(report.errors, 0);
    assert_eq!(e.len(), 2);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
