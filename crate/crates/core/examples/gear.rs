//! Gear shift under random scheduling: the speed stays within [0, 100].
use hytccp::constraints::Var;
use hytccp::corpus;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::rational::{int, render, Rational};

fn main() {
    let setup = corpus::gear().expect("corpus program parses");
    // the watcher can emit signals forever without time passing, so cap the steps
    let limits = Limits { max_time: Some(int(60)), max_steps: 400, ..Limits::default() };
    let v = Var::new("V");
    for seed in 0..8 {
        let policy = Policy::Random { seed, step: int(1) };
        let trace = explorer::run(&setup.program, &setup.entry, setup.store.clone(), &policy, &limits)
            .expect("no run-time error");
        let speeds: Vec<Rational> =
            (0..=trace.steps.len()).filter_map(|i| trace.store_at(i).continuous.get(&v).map(|e| e.value.clone())).collect();
        let lo = speeds.iter().min().cloned().unwrap_or_default();
        let hi = speeds.iter().max().cloned().unwrap_or_default();
        let gears = trace.final_store().discrete.render();
        let g = gears.split(" /\\ ").find(|p| p.starts_with("G =")).unwrap_or("G unknown");
        println!(
            "seed {seed}: t = {:>5}, V in [{}, {}], {} ({})",
            render(&trace.total_time()),
            render(&lo),
            render(&hi),
            g,
            trace.terminal.as_str()
        );
    }
}
