//! Hybrid stores: extended entailment, dwell times and guard events.
use hytccp::constraints::Var;
use hytccp::cstore::ContinuousStore;
use hytccp::hstore::HybridStore;
use hytccp::lang::parse_constraint;
use hytccp::rational::{int, render};

fn main() {
    let c = |s: &str| parse_constraint(s).expect("valid constraint");
    let store = HybridStore::new(c("St = [off|_] /\\ T >= 26 /\\ T <= 30"), ContinuousStore::singleton(Var::new("T"), int(29), int(2)));
    println!("{store}");
    println!("consistent: {}", store.is_consistent());
    // the current value of T takes part in entailment
    println!("entails T = 29: {}", store.entails(&c("T = 29")));
    println!("entails T < 29: {}", store.entails(&c("T < 29")));

    // how long can time pass while an invariant holds?
    for inv in ["St = [off|_] /\\ T <= 30", "T < 30", "St = [on|_]", "T >= 0"] {
        println!("max dwell under {inv:<26} {}", store.max_duration(&c(inv)));
    }

    // when does a guard become entailed?
    let times = store.all_event_times(&[c("T = 30")]);
    println!("T = 30 first holds after {}", times.first().map(render).unwrap_or_default());
    let later = store.project(&times[0]);
    println!("then: {later}, guard entailed: {}", later.entails(&c("T = 30")));
}
