//! The bundled example programs, with the entry points and initial stores
//! their documented runs start from.

use crate::cstore::ContinuousStore;
use crate::constraints::{Constraint, Var};
use crate::hstore::HybridStore;
use crate::lang::{self, Agent, LangError, Program};
use crate::rational::int;

pub const COOLER: &str = include_str!("../../../corpus/cooler.hyt");
pub const CATMOUSE: &str = include_str!("../../../corpus/catmouse.hyt");
pub const GEAR: &str = include_str!("../../../corpus/gear.hyt");

/// `(name, source)` for every bundled program.
pub const ALL: [(&str, &str); 3] = [("cooler", COOLER), ("catmouse", CATMOUSE), ("gear", GEAR)];

pub fn source(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// A program together with where a run of it starts.
#[derive(Clone, Debug)]
pub struct Setup {
    pub program: Program,
    pub entry: Agent,
    pub store: HybridStore,
}

/// `cooler(St, T)` from `St = [off|_] /\ 26 <= T <= 30` with T at 29 rising
/// at +2. Running `init` instead reaches the same behaviour but keeps St and
/// T local, so nothing would be observable.
pub fn cooler() -> Result<Setup, LangError> {
    let program = lang::parse(COOLER)?;
    let entry = lang::parse_agent("cooler(St, T)", &program)?;
    let discrete = lang::parse_constraint("St = [off|_] /\\ T >= 26 /\\ T <= 30")?;
    let c = ContinuousStore::singleton(Var::new("T"), int(29), int(2));
    Ok(Setup { program, entry, store: HybridStore::new(discrete, c) })
}

/// `init` from the empty store; the race's signals are all global.
pub fn catmouse() -> Result<Setup, LangError> {
    let program = lang::parse(CATMOUSE)?;
    let entry = program.entry.clone();
    Ok(Setup { program, entry, store: HybridStore::new(Constraint::truth(), ContinuousStore::truth()) })
}

/// The body of `init` with V, G and WG global, so the gear stream and the
/// speed stay observable.
pub fn gear() -> Result<Setup, LangError> {
    let program = lang::parse(GEAR)?;
    let entry = program.open_entry();
    Ok(Setup { program, entry, store: HybridStore::new(Constraint::truth(), ContinuousStore::truth()) })
}

pub fn setup(name: &str) -> Option<Result<Setup, LangError>> {
    match name {
        "cooler" => Some(cooler()),
        "catmouse" => Some(catmouse()),
        "gear" => Some(gear()),
        _ => None,
    }
}
