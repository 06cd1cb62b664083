//! The continuous store: merge, update, hiding and projection in time.
use hytccp::constraints::Var;
use hytccp::cstore::ContinuousStore;
use hytccp::rational::{int, ratio};

fn main() {
    let t = ContinuousStore::singleton(Var::new("T"), int(29), int(2));
    let p = ContinuousStore::singleton(Var::new("P"), int(0), ratio(1, 3));

    let both = t.merge(&p);
    println!("T ⊕ P          = {both}");
    println!("after 3/2      = {}", both.project(&ratio(3, 2)));

    // merging two different entries for one variable is inconsistent
    let clash = t.merge(&ContinuousStore::singleton(Var::new("T"), int(30), int(2)));
    println!("clash          = {clash}");

    // update replaces entries (this is what `change` does)
    let cooled = both.update(&ContinuousStore::singleton(Var::new("T"), int(30), ratio(-1, 2)));
    println!("T <- (30,-1/2) = {cooled}");
    println!("hide P         = {}", cooled.hide(&Var::new("P")));
    match cooled.set_value(&Var::new("Q"), int(1)) {
        Ok(s) => println!("{s}"),
        Err(e) => println!("set_value: {e}"),
    }
}
