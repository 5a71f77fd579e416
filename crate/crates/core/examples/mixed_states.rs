// Mixed states: the support condition decides whether any zero-error
// sequential method exists.

use std::error::Error;

use useqd::bounds::mixed_bounds_report;
use useqd::ensembles::{check_support_condition, gen_random_mixed};
use useqd::simulator::{run_trials, SimConfig};
use useqd::strategy::{build_strategy_mixed, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let opts = StrategyOptions::default();

    let e = gen_random_mixed(&[1, 2], 3, 11)?;
    let support = check_support_condition(&e, &opts.tol)?;
    assert!(support.holds);
    let s = build_strategy_mixed(&e, &opts)?;
    let r = run_trials(&s, &e, &SimConfig::new(10_000, 100_000, 5))?;
    println!("ranks [1, 2] in ℂ³: success {:?}", s.success_probs());
    println!("simulated mean copies {:.3}, errors {}", r.mean_copies, r.errors);
    assert_eq!(r.errors, 0);

    let b = mixed_bounds_report(&e, 0.0, &opts)?;
    println!("fidelity {:.4}, lower bound {:.4}", b.max_fidelity, b.th1_mixed_lower);
    assert!(b.passed());

    // a full-rank state contains every other support
    let bad = gen_random_mixed(&[1, 3], 3, 12)?;
    let b = mixed_bounds_report(&bad, 0.0, &opts)?;
    println!("ranks [1, 3]: {}", b.warnings.join("; "));
    assert!(!b.support.holds && b.closed_form_el.is_none());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
