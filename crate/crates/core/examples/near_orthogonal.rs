// States `ε`-close to an orthonormal basis with `ε = 1/(2N²)` need fewer
// than three copies on average, whatever `N`.

use std::error::Error;

use useqd::ensembles::{auto_eps, gen_near_orthogonal};
use useqd::simulator::{run_trials, SimConfig};
use useqd::strategy::{build_strategy, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    for n in [2, 4, 8, 16] {
        let e = gen_near_orthogonal(n, auto_eps(n))?;
        let s = build_strategy(&e, 1, &StrategyOptions::default())?;
        let r = run_trials(&s, &e, &SimConfig::new(5_000, 1_000, n as u64))?;
        println!("N = {n:2}: max mean copies {:.4}", r.max_mean_copies);
        assert!(r.max_mean_copies < 3.0);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
