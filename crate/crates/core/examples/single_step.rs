//! One transition at a time: maximal parallelism and the two kinds of step.
use hytccp::engine::{Configuration, Engine};
use hytccp::hstore::HybridStore;
use hytccp::lang;
use hytccp::rational::render;

const SOURCE: &str = "
cvar X.
init :- exists X (change(X, 0, 1) || tell(go) || watch(X)).
watch(X) :- ask(go) -> (cask(X <= 2) + ask(X = 2) -> tell(done)).
";

fn main() {
    let program = lang::parse(SOURCE).expect("program parses");
    let engine = Engine::new(&program);
    let mut cfg = Configuration::new(program.open_entry(), HybridStore::default());
    for n in 0..6 {
        println!("{n}: {}", cfg.observable());
        println!("   agent {}", cfg.agent);
        let succ = engine.successors(&cfg).expect("no run-time error");
        if let Some(c) = &succ.continuous {
            println!("   time may pass: {}", c.bound);
        }
        println!("   {} discrete successor(s)", succ.discrete.len());
        // every enabled agent moves at once; if none can, let time pass
        cfg = match (succ.discrete.into_iter().next(), succ.continuous) {
            (Some(s), _) => s.config,
            (None, Some(c)) => {
                let tau = cfg.store.all_event_times(&c.guards).into_iter().next().expect("a next event");
                println!("   tau = {}", render(&tau));
                c.advance(&cfg, &tau)
            }
            (None, None) => break,
        };
    }
}
