//! Cat and mouse: both reach the hole at t = 10, and exploration finds both winners.
use hytccp::corpus;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::lang::parse_constraint;
use hytccp::rational::render;

fn main() {
    let setup = corpus::catmouse().expect("corpus program parses");
    let trace = explorer::run(&setup.program, &setup.entry, setup.store.clone(), &Policy::Urgent { seed: 0 }, &Limits::default())
        .expect("no run-time error");
    let times = trace.times();
    for signal in ["go", "end_m", "end_c", "win_m", "win_c"] {
        let goal = parse_constraint(signal).expect("signal");
        match (0..=trace.steps.len()).find(|i| trace.store_at(*i).entails(&goal)) {
            Some(i) => println!("{signal:<6} at t = {}", render(&times[i])),
            None => println!("{signal:<6} never"),
        }
    }

    let ex = explorer::enumerate(&setup.program, &setup.entry, setup.store, &Limits { max_depth: 40, ..Limits::default() })
        .expect("no run-time error");
    println!("\n{} maximal traces (depth limit hit: {})", ex.traces.len(), ex.truncated);
    for (store, n) in ex.outcomes() {
        println!("  {n} x {store}");
    }
}
