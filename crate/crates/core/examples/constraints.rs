//! Entailment, hiding and streams in the discrete constraint system.
use hytccp::constraints::Var;
use hytccp::lang::parse_constraint;

fn main() {
    let c = |s: &str| parse_constraint(s).expect("valid constraint");

    // linear arithmetic over the rationals
    let store = c("x + y <= 4 /\\ x >= 1 /\\ y >= 1");
    println!("{store}");
    for goal in ["x <= 3", "x < 3", "x + 2*y <= 7", "x = 1"] {
        println!("  entails {goal:<12} {}", store.entails(&c(goal)));
    }

    // hiding projects a variable out (Fourier-Motzkin underneath)
    let hidden = store.hide(&Var::new("y"));
    println!("exists y: {}", hidden.render());

    // streams: partially instantiated lists with a free tail
    let st = c("St = [off|S1] /\\ S1 = [on|_]");
    println!("{}", st.render());
    println!("  entails St = [off,on|_]  {}", st.entails(&c("St = [off,on|_]")));
    println!("  entails St = [on|_]      {}", st.entails(&c("St = [on|_]")));
    println!("  entails St != [on|_]     {}", st.entails(&c("St != [on|_]")));

    // signals are plain atoms
    let s = c("go /\\ end_m");
    println!("{s}: entails go {}, entails end_c {}", s.entails(&c("go")), s.entails(&c("end_c")));

    // inconsistency is the top of the lattice
    let bad = c("x > 2").conjoin(&c("x < 1"));
    println!("x > 2 /\\ x < 1 is false: {}", bad.is_false());
}
