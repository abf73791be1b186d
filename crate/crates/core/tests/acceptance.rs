//! The ten acceptance criteria at their stated tolerances and time limits.
//! Prints one line per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Duration;

use worldtube::suite::{self, Check, Scenario};

const SEED: u64 = 20_240_601;

struct Criterion {
    number: usize,
    title: &'static str,
    limit: Duration,
    run: fn(&Scenario) -> Check,
}

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { number: 1, title: "boost algebra", limit: s(1), run: |_| suite::boost_algebra(1000, SEED) },
        Criterion { number: 2, title: "boost derivative identity", limit: s(1), run: |_| suite::boost_derivative(SEED) },
        Criterion { number: 3, title: "measure formula", limit: s(10), run: |_| suite::measure_formula(SEED) },
        Criterion { number: 4, title: "moment identities", limit: s(1), run: |_| suite::moment_identities(8, 16, SEED) },
        Criterion { number: 5, title: "retardation", limit: s(10), run: |_| suite::retardation(10_000, SEED) },
        Criterion {
            number: 6,
            title: "inertial equivalence",
            limit: s(60),
            run: |_| suite::inertial_equivalence(20, 16, 32, SEED),
        },
        Criterion { number: 7, title: "accelerated inequality", limit: s(600), run: suite::accelerated_inequality },
        Criterion { number: 8, title: "leading-order law", limit: s(1800), run: suite::leading_order_law },
        Criterion { number: 9, title: "wave equation", limit: s(10), run: |_| suite::wave_equation(20, SEED) },
        Criterion {
            number: 10,
            title: "inertial prediction vanishes",
            limit: s(60),
            run: suite::inertial_prediction_vanishes,
        },
    ]
}

fn main() -> ExitCode {
    let scenario = Scenario::standard();
    let mut failed = 0;
    for c in criteria() {
        let check = (c.run)(&scenario);
        let in_time = check.seconds <= c.limit.as_secs_f64();
        let ok = check.passed && in_time;
        failed += usize::from(!ok);
        println!(
            "[{}] {:>2}. {:<30} value {:.3e} (tolerance {:.1e}), {:.2} s (limit {} s){}; {}",
            if ok { "PASS" } else { "FAIL" },
            c.number,
            c.title,
            check.value,
            check.tolerance,
            check.seconds,
            c.limit.as_secs(),
            if in_time { "" } else { ", over time limit" },
            check.detail,
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
