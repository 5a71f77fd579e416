// Three qubit states are linearly dependent, so no single-copy strategy
// exists. Measuring blocks of `k` copies fixes that.

use std::error::Error;

use useqd::ensembles::gen_random;
use useqd::simulator::{closed_form_expected_copies, run_trials, SimConfig};
use useqd::strategy::{build_strategy, build_strategy_auto, StrategyError, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let e = gen_random(3, 2, 7)?;
    let opts = StrategyOptions::default();
    match build_strategy(&e, 1, &opts) {
        Err(StrategyError::LinearlyDependent { rank, suggested_k, .. }) => {
            println!("k = 1: rank {rank} < 3, try k = {suggested_k}");
        }
        other => panic!("expected a dependence error, got {other:?}"),
    }

    let s = build_strategy_auto(&e, 1, &opts)?;
    println!("k = {} works", s.k());
    let r = run_trials(&s, &e, &SimConfig::new(10_000, 100_000, 3))?;
    for (stats, el) in r.per_hypothesis.iter().zip(closed_form_expected_copies(&s)) {
        println!("state {}: E[L] {el:.3}, simulated {:.3}", stats.hypothesis, stats.mean_copies);
        // copies are always a multiple of k
        assert!(stats.mean_copies >= s.k() as f64);
    }
    assert_eq!(r.errors, 0);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
