// Method transformers: truncation adds an inconclusive outcome, restarts
// remove it, and a Bernoulli gate trades copies for inconclusiveness.

use std::error::Error;

use useqd::ensembles::{gen_two_state, Ensemble};
use useqd::simulator::{
    simulate, BernoulliInconclusive, Restart, Sequential, SequentialMethod, SimConfig,
    TwoStageSampler, Truncated,
};
use useqd::strategy::{build_strategy, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let e = gen_two_state(0.5)?;
    let s = build_strategy(&e, 1, &StrategyOptions::default())?;
    let base = Sequential(TwoStageSampler::new(&s, &e)?);
    let cfg = SimConfig::new(20_000, 1 << 30, 2);

    let truncated = Truncated::new(&base, 2)?;
    println!(
        "cap 2: E[L] {:.3}, P(I) {:.3}",
        truncated.expected_copies(0).unwrap(),
        truncated.inconclusive_probability(0).unwrap()
    );
    let r = simulate(&truncated, e.priors(), &cfg)?;
    println!("  simulated inconclusive rate {:.4}", r.inconclusive as f64 / r.trials as f64);

    let restarted = Restart::new(truncated)?;
    let r = simulate(&restarted, e.priors(), &cfg)?;
    println!(
        "restarted: E[L] {:.3}, simulated {:.3}, inconclusive {}",
        restarted.expected_copies(0).unwrap(),
        r.mean_copies,
        r.inconclusive
    );
    assert_eq!(r.inconclusive, 0);

    let gated = BernoulliInconclusive::new(&base, 0.3)?;
    let r = simulate(&gated, e.priors(), &cfg)?;
    println!(
        "gate p = 0.3: E[L] {:.3}, simulated {:.3}",
        gated.expected_copies(0).unwrap(),
        r.mean_copies
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
