// Lower and upper bounds on the expected number of copies, next to the
// implemented strategy's closed form.

use std::error::Error;

use useqd::bounds::{bounds_report, corollary1_lower, theorem2_upper, theorem3_lower, BoundsOptions};
use useqd::ensembles::{gen_random, gen_two_state};
use useqd::linalg::TolerancePolicy;

pub fn run() -> Result<(), Box<dyn Error>> {
    let pol = TolerancePolicy::default();
    let r = bounds_report(&gen_two_state(0.5)?, &BoundsOptions::default(), &pol)?;
    println!(
        "pair c = 0.5: lower {:.4} ≤ E[L] {:.4} ≤ upper {:.4}",
        r.th1_lower, r.closed_form_el, r.th2_upper.value
    );
    assert!(r.passed());

    let e = gen_random(4, 5, 2)?;
    let r = bounds_report(&e, &BoundsOptions::default(), &pol)?;
    println!("{}", r.to_json());
    for c in r.certificate.checks.iter() {
        println!("{:40} {}", c.name, if c.passed { "ok" } else { "FAILED" });
    }

    for n in [2, 4, 8, 16] {
        println!("N = {n:2}, c = 0.5: upper {:.4}", theorem2_upper(n, 0.5, 0.0)?.value);
    }
    println!("one-shot error floor, N = 2, c = 0.6: {}", corollary1_lower(2, 0.6));
    println!("bounded-error lower bound, c = 0.9, Pe = 0.1: {:.4}", theorem3_lower(0.9, 0.1)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
