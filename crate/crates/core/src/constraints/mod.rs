//! The discrete constraint system: conjunctions of linear rational relations,
//! stream-term (dis)equations and propositional signals, with lub, entailment
//! and existential hiding.
//!
//! Entailment combines union-find unification on terms with Fourier–Motzkin
//! elimination on the linear residue. Semantic equality is mutual entailment;
//! the canonical form produced by [`Constraint::conjoin`] is best-effort.

pub mod linear;
mod solve;
pub mod term;

pub use linear::{Canon, Linear, Rel};
pub use term::{Term, Var};

use solve::{anonymous_vars, Solved};
use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::rc::Rc;
use std::sync::Arc;

/// Solved forms are reused heavily (every guard is checked against the same
/// store), so they are memoized per thread.
struct Cached {
    solved: Option<Solved>,
    vars: OnceCell<BTreeSet<Var>>,
    canonical: OnceCell<Constraint>,
}

const CACHE_LIMIT: usize = 1024;

thread_local! {
    static SOLVED: RefCell<HashMap<Vec<Atom>, Rc<Cached>>> = RefCell::new(HashMap::new());
}

type Extensions = HashMap<(usize, Vec<Atom>), (Rc<Cached>, Rc<Cached>)>;

thread_local! {
    // keyed by the base entry's address; the base is kept alive in the value
    static EXTENDED: RefCell<Extensions> = RefCell::new(HashMap::new());
}

fn extend_cached(base: &Rc<Cached>, extra: &[Atom]) -> Rc<Cached> {
    let key = (Rc::as_ptr(base) as usize, extra.to_vec());
    if let Some((_, hit)) = EXTENDED.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let solved = base.solved.as_ref().and_then(|s| s.extend(extra));
    let entry = Rc::new(Cached { solved, vars: OnceCell::new(), canonical: OnceCell::new() });
    EXTENDED.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(key, (base.clone(), entry.clone()));
    });
    entry
}

fn solve_cached(atoms: &[Atom]) -> Rc<Cached> {
    if let Some(hit) = SOLVED.with(|c| c.borrow().get(atoms).cloned()) {
        return hit;
    }
    let entry = Rc::new(Cached { solved: Solved::solve(atoms), vars: OnceCell::new(), canonical: OnceCell::new() });
    SOLVED.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(atoms.to_vec(), entry.clone());
    });
    entry
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Lin(Linear),
    Eq(Term, Term),
    Neq(Term, Term),
    Signal(Arc<str>),
}

impl Atom {
    pub fn signal(name: &str) -> Atom {
        Atom::Signal(Arc::from(name))
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Atom::Lin(l) => out.extend(l.vars().cloned()),
            Atom::Eq(a, b) | Atom::Neq(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Atom::Signal(_) => {}
        }
    }

    pub fn rename(&self, f: &impl Fn(&Var) -> Option<Var>) -> Atom {
        match self {
            Atom::Lin(l) => match l.substitute(&|x| linear::LinValue::Var(f(x).unwrap_or_else(|| x.clone()))) {
                Canon::Atom(a) => Atom::Lin(a),
                // renaming can merge variables (x - y = 0 under x,y -> z)
                Canon::Constant(true) => Atom::Eq(Term::Nil, Term::Nil),
                Canon::Constant(false) => Atom::Eq(Term::Nil, Term::sym("false")),
            },
            Atom::Eq(a, b) => Atom::Eq(a.rename(f), b.rename(f)),
            Atom::Neq(a, b) => Atom::Neq(a.rename(f), b.rename(f)),
            Atom::Signal(s) => Atom::Signal(s.clone()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Lin(l) => write!(f, "{l}"),
            Atom::Eq(a, b) => write!(f, "{a} = {b}"),
            Atom::Neq(a, b) => write!(f, "{a} != {b}"),
            Atom::Signal(s) => f.write_str(s),
        }
    }
}

/// An element of the constraint lattice: `False` or a finite conjunction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Constraint {
    False,
    Atoms(Vec<Atom>),
}

impl Default for Constraint {
    fn default() -> Self {
        Constraint::truth()
    }
}

impl Constraint {
    pub fn truth() -> Constraint {
        Constraint::Atoms(Vec::new())
    }

    /// A conjunction taken as written (no canonicalization).
    pub fn from_atoms(atoms: Vec<Atom>) -> Constraint {
        Constraint::Atoms(atoms)
    }

    pub fn atom(a: Atom) -> Constraint {
        Constraint::Atoms(vec![a])
    }

    pub fn atoms(&self) -> &[Atom] {
        match self {
            Constraint::False => &[],
            Constraint::Atoms(a) => a,
        }
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Constraint::False)
    }

    pub fn is_trivially_true(&self) -> bool {
        matches!(self, Constraint::Atoms(a) if a.is_empty())
    }

    fn cached(&self) -> Option<Rc<Cached>> {
        match self {
            Constraint::False => None,
            Constraint::Atoms(a) => Some(solve_cached(a)).filter(|c| c.solved.is_some()),
        }
    }

    fn from_solved(s: &Solved, hidden: &BTreeSet<Var>) -> Constraint {
        match s.to_atoms(hidden) {
            Some(atoms) => Constraint::Atoms(atoms),
            None => Constraint::False,
        }
    }

    /// Canonical form of this constraint (`False` when unsatisfiable).
    pub fn canonical(&self) -> Constraint {
        match self.cached() {
            Some(c) => c
                .canonical
                .get_or_init(|| Constraint::from_solved(c.solved.as_ref().expect("satisfiable"), &BTreeSet::new()))
                .clone(),
            None => Constraint::False,
        }
    }

    /// Least upper bound `self ∧ other`.
    pub fn conjoin(&self, other: &Constraint) -> Constraint {
        match (self, other) {
            (Constraint::False, _) | (_, Constraint::False) => Constraint::False,
            (Constraint::Atoms(a), Constraint::Atoms(b)) => {
                let mut all = a.clone();
                all.extend(b.iter().cloned());
                Constraint::Atoms(all).canonical()
            }
        }
    }

    /// `self ⊢ other`. Anonymous variables of `other` that do not occur in
    /// `self` are read existentially, so `St = [off|_]` is entailed by
    /// `St = [off|T]`.
    pub fn entails(&self, other: &Constraint) -> bool {
        let Some(c) = self.cached() else {
            return true;
        };
        let goal = match other {
            Constraint::False => return false,
            Constraint::Atoms(a) => a,
        };
        entails_solved(&c, goal)
    }

    /// `self ∧ extra ⊢ goal`, reusing the solved form of `self`.
    pub fn entails_under(&self, extra: &Constraint, goal: &Constraint) -> bool {
        let Some(c) = self.cached_with(extra) else {
            return true;
        };
        match goal {
            Constraint::False => false,
            Constraint::Atoms(a) => entails_solved(&c, a),
        }
    }

    /// Whether `self ∧ extra` is satisfiable, reusing the solved form of `self`.
    pub fn satisfiable_with(&self, extra: &Constraint) -> bool {
        self.cached_with(extra).is_some()
    }

    fn cached_with(&self, extra: &Constraint) -> Option<Rc<Cached>> {
        let base = self.cached()?;
        match extra {
            Constraint::False => None,
            Constraint::Atoms(e) if e.is_empty() => Some(base),
            Constraint::Atoms(e) => Some(extend_cached(&base, e)).filter(|c| c.solved.is_some()),
        }
    }

    /// Existential projection of `x`.
    pub fn hide(&self, x: &Var) -> Constraint {
        self.hide_all(&BTreeSet::from([x.clone()]))
    }

    pub fn hide_all(&self, xs: &BTreeSet<Var>) -> Constraint {
        match self.cached() {
            None => Constraint::False,
            Some(c) => {
                let s = c.solved.as_ref().expect("satisfiable");
                if c.vars.get_or_init(|| s.vars()).is_disjoint(xs) {
                    self.canonical()
                } else {
                    Constraint::from_solved(s, xs)
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            a.vars_into(&mut out);
        }
        out
    }

    pub fn mentions(&self, x: &Var) -> bool {
        self.vars().contains(x)
    }

    pub fn rename(&self, f: &impl Fn(&Var) -> Option<Var>) -> Constraint {
        match self {
            Constraint::False => Constraint::False,
            Constraint::Atoms(a) => Constraint::Atoms(a.iter().map(|x| x.rename(f)).collect()),
        }
    }

    /// Mutual entailment.
    pub fn equivalent(&self, other: &Constraint) -> bool {
        self.entails(other) && other.entails(self)
    }

    /// Canonical rendering: atoms sorted lexicographically, joined by `/\`.
    pub fn render(&self) -> String {
        match self.canonical() {
            Constraint::False => "false".to_string(),
            Constraint::Atoms(a) => normalize_anonymous(&render_atoms(&a, true)),
        }
    }
}

fn entails_solved(c: &Cached, goal: &[Atom]) -> bool {
    let s = c.solved.as_ref().expect("satisfiable");
    let own = c.vars.get_or_init(|| s.vars());
    // each `_` of a goal is its own existential, even when a separately parsed
    // store happens to use the same internal name
    let apart = |v: &Var| v.is_anonymous().then(|| Var::new(format!("_?{}", v.name())));
    let renamed: Vec<Atom>;
    let goal = if goal.iter().any(|a| atom_has_anonymous(a)) {
        renamed = goal.iter().map(|a| a.rename(&apart)).collect();
        &renamed[..]
    } else {
        goal
    };
    goal.iter().all(|atom| match atom {
        Atom::Signal(name) => s.signals.contains(name),
        Atom::Lin(l) => s.entails_linear(l),
        Atom::Eq(l, r) => {
            let ex: BTreeSet<Var> = anonymous_vars(&[l, r]).into_iter().filter(|v| !own.contains(v)).collect();
            s.entails_eq(l, r, &ex)
        }
        // the store's own disequations count too: `Z != []` entails itself
        Atom::Neq(l, r) => !s.compatible(l, r) || s.extend(&[Atom::Eq(l.clone(), r.clone())]).is_none(),
    })
}

fn atom_has_anonymous(a: &Atom) -> bool {
    let mut vs = BTreeSet::new();
    a.vars_into(&mut vs);
    vs.iter().any(Var::is_anonymous)
}

/// Renames every anonymous variable (`_…`) to `_1, _2, …` in order of first
/// appearance, so renderings do not depend on internal fresh names.
pub fn normalize_anonymous(text: &str) -> String {
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut out = String::with_capacity(text.len());
    let chars: Vec<char> = text.chars().collect();
    let ident = |c: char| c.is_alphanumeric() || c == '_' || c == '#' || c == '\'';
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let starts_word = i == 0 || !ident(chars[i - 1]);
        if c == '_' && starts_word {
            let mut j = i + 1;
            while j < chars.len() && ident(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let next = names.len() + 1;
            let n = *names.entry(word).or_insert(next);
            let _ = write!(out, "_{n}");
            i = j;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn render_atoms(atoms: &[Atom], sort: bool) -> String {
    if atoms.is_empty() {
        return "true".to_string();
    }
    let mut parts: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
    if sort {
        parts.sort();
    }
    parts.join(" /\\ ")
}

/// Renders atoms in their stored order.
impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::False => f.write_str("false"),
            Constraint::Atoms(a) => f.write_str(&render_atoms(a, false)),
        }
    }
}
