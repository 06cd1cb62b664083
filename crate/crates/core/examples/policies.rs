//! How the scheduling policy picks durations when several are admissible.
use hytccp::explorer::{self, Limits, Policy};
use hytccp::hstore::HybridStore;
use hytccp::lang;
use hytccp::rational::{int, ratio, render};

// the tank may be refilled any time before it runs dry
const SOURCE: &str = "
cvar L.
init :- exists L (change(L, 10, -1) || tank(L)).
tank(L) :- cask(L >= 0) + ask(L <= 4) -> (tell(refilled) || change(L, 10, _)).
";

fn main() {
    let program = lang::parse(SOURCE).expect("program parses");
    let entry = program.open_entry();
    let limits = Limits { max_steps: 50, ..Limits::default() };
    let policies = [
        Policy::Urgent { seed: 0 },
        Policy::Lazy { seed: 0 },
        Policy::Random { seed: 1, step: int(1) },
        Policy::Random { seed: 2, step: ratio(1, 2) },
    ];
    for policy in policies {
        let trace = explorer::run(&program, &entry, HybridStore::default(), &policy, &limits).expect("no run-time error");
        let coalesced = trace.coalesce();
        let taus: Vec<String> = coalesced.steps.iter().filter_map(|s| s.label.duration()).map(render).collect();
        println!("{policy:<28} durations [{}] -> {}", taus.join(", "), trace.terminal.as_str());
    }
}
