//! Parsing and pretty-printing programs, with located errors.
use hytccp::lang;

const SOURCE: &str = "
% a thermostat that switches once
cvar H.
init :- exists H (change(H, 18, 1) || heat(H)).
heat(H) :- cask(H <= 21) + ask(H = 21) -> (tell(done) || change(H, _, 0)).
";

fn main() {
    let program = lang::parse(SOURCE).expect("program parses");
    println!("declarations: {}", program.signatures().join(", "));
    println!("continuous: {:?}", program.continuous_names());
    print!("{program}");

    // printing then parsing again gives the same program
    assert_eq!(lang::parse(&program.to_string()).expect("reparses"), program);

    for broken in [
        "init :- tell(x = 1",
        "init :- heat(X).",
        "init :- p(X, Y).\np(X) :- stop.",
        "p :- stop.",
    ] {
        match lang::parse(broken) {
            Ok(_) => println!("unexpectedly fine: {broken}"),
            Err(e) => println!("error: {e}"),
        }
    }
}
