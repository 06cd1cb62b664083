//! Validating traces after the fact, including a tampered one.
use hytccp::corpus;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::rational::int;

fn main() {
    let setup = corpus::cooler().expect("corpus program parses");
    let limits = Limits { max_time: Some(int(20)), ..Limits::default() };
    let trace = explorer::run(&setup.program, &setup.entry, setup.store, &Policy::Urgent { seed: 0 }, &limits)
        .expect("no run-time error");
    println!("{} steps: {:?}", trace.steps.len(), explorer::check(&trace));

    // move the temperature off its line in one continuous step
    let mut bad = trace.clone();
    let i = bad.steps.iter().position(|s| s.label.duration().is_some()).expect("a continuous step");
    if let hytccp::cstore::ContinuousStore::Map(m) = &mut bad.steps[i].store.continuous {
        for e in m.values_mut() {
            e.value += int(1);
        }
    }
    match explorer::check(&bad) {
        Ok(()) => println!("tampered trace accepted?"),
        Err(v) => println!("tampered trace rejected at step {}: {}", v.step, v.message),
    }
}
