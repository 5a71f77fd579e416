// Turning sequential methods into fixed-length ones: parallel groups for a
// zero-error method, majority voting for a method that may err.

use std::error::Error;

use useqd::ensembles::{gen_two_state, Ensemble};
use useqd::simulator::{
    fixed_length_groups, fixed_length_majority, FixedLengthConfig, NoisyOracleStrategy,
    Sequential, TwoStageSampler,
};
use useqd::strategy::{build_strategy, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let e = gen_two_state(0.5)?;
    let s = build_strategy(&e, 1, &StrategyOptions::default())?;
    let method = Sequential(TwoStageSampler::new(&s, &e)?);
    let max_expected = 1.0 / s.success_probs().iter().cloned().fold(f64::INFINITY, f64::min);

    for groups in 1..=3 {
        let r = fixed_length_groups(
            &method,
            e.priors(),
            max_expected,
            &FixedLengthConfig::new(groups, 3, 20_000, groups),
        )?;
        println!(
            "A = {groups}, K = 3: {} copies per group, error {:.5} (bound {:.5})",
            r.budget_per_group, r.error_rate, r.bound
        );
        assert!(r.within_bound);
    }

    let noisy = NoisyOracleStrategy::new(0.5, 0.05, 3)?;
    let r = fixed_length_majority(&noisy, &FixedLengthConfig::new(15, 7, 5_000, 4))?;
    println!("majority of 15 segments: error {:.5} (bound {:.5})", r.error_rate, r.bound);
    assert!(r.within_bound);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
