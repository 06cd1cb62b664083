//! Trace documents (JSON lines) and sampled trajectories (CSV).
use hytccp::corpus;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::rational::{int, ratio};
use hytccp::trace_io::{self, Provenance, TraceDocument};

fn main() {
    let setup = corpus::cooler().expect("corpus program parses");
    let policy = Policy::Urgent { seed: 0 };
    let limits = Limits { max_time: Some(int(11)), ..Limits::default() };
    let trace = explorer::run(&setup.program, &setup.entry, setup.store, &policy, &limits).expect("no run-time error");

    let prov = Provenance {
        program: "cooler".into(),
        source: corpus::COOLER.into(),
        policy: policy.to_string(),
        limits: limits.to_string(),
    };
    let jsonl = trace_io::to_document(&trace.coalesce(), &prov).to_jsonl();
    for line in jsonl.lines().take(3) {
        println!("{line}");
    }
    println!("... {} lines", jsonl.lines().count());

    // documents read back into traces with exact numbers
    let back = TraceDocument::from_jsonl(&jsonl).expect("document parses").to_trace().expect("valid trace");
    println!("read back {} steps, total time {}", back.steps.len(), back.total_time());

    print!("\n{}", trace_io::samples_csv(&trace_io::to_samples(&back, &ratio(3, 2))));
}
