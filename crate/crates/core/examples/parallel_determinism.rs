// Every trial owns its random stream, so the report does not depend on
// how trials are split across threads.

use std::error::Error;

use useqd::ensembles::gen_random;
use useqd::simulator::{run_trials, SimConfig};
use useqd::strategy::{build_strategy, StrategyOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let e = gen_random(4, 4, 21)?;
    let s = build_strategy(&e, 1, &StrategyOptions::default())?;
    let cfg = SimConfig::new(20_000, 100_000, 99);

    let serial = run_trials(&s, &e, &cfg)?.to_json();
    for shards in [2, 7, 32] {
        let parallel = run_trials(&s, &e, &cfg.with_shards(shards))?.to_json();
        assert_eq!(serial, parallel);
        println!("{shards:2} shards: identical report");
    }
    let other = run_trials(&s, &e, &cfg.with_stream(1))?.to_json();
    assert_ne!(serial, other);
    println!("a different stream gives different samples");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
