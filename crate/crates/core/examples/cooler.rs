//! The cooler: a two-mode thermostat kept between 26 and 30 degrees.
use hytccp::corpus;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::rational::int;
use hytccp::trace_io;

fn main() {
    let setup = corpus::cooler().expect("corpus program parses");
    let limits = Limits { max_time: Some(int(25)), ..Limits::default() };
    let trace = explorer::run(&setup.program, &setup.entry, setup.store, &Policy::Urgent { seed: 0 }, &limits)
        .expect("no run-time error");
    print!("{}", trace_io::to_text(&trace));

    println!("\nwithout repeated stores:");
    for s in trace.behaviour() {
        println!("  {s}");
    }
}
