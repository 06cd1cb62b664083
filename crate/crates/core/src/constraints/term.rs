use crate::rational::{self, Rational};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A variable name. Names starting with `_` are anonymous: they are never
/// referenced by name outside the atom that introduced them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_anonymous(&self) -> bool {
        self.0.starts_with('_')
    }

    /// Name without any `#n` freshening suffix.
    pub fn base(&self) -> &str {
        match self.0.find('#') {
            Some(i) => &self.0[..i],
            None => &self.0,
        }
    }

    pub fn freshened(&self, counter: u64) -> Var {
        Var::new(format!("{}#{}", self.base(), counter))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Herbrand terms: numbers, symbols, variables and stream cells.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Num(Rational),
    Sym(Arc<str>),
    Var(Var),
    Nil,
    Cons(Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn sym(name: &str) -> Term {
        Term::Sym(Arc::from(name))
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Cons(Arc::new(head), Arc::new(tail))
    }

    /// Builds `[h1, ..., hn | tail]`.
    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, h| Term::cons(h, acc))
    }

    pub fn is_constructor(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Cons(h, t) => {
                h.vars_into(out);
                t.vars_into(out);
            }
            _ => {}
        }
    }

    pub fn mentions(&self, x: &Var) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::Cons(h, t) => h.mentions(x) || t.mentions(x),
            _ => false,
        }
    }

    pub fn rename(&self, f: &impl Fn(&Var) -> Option<Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v).unwrap_or_else(|| v.clone())),
            Term::Cons(h, t) => Term::cons(h.rename(f), t.rename(f)),
            other => other.clone(),
        }
    }

    pub fn substitute(&self, x: &Var, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == x => by.clone(),
            Term::Cons(h, t) => Term::cons(h.substitute(x, by), t.substitute(x, by)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(r) => f.write_str(&rational::render(r)),
            Term::Sym(s) => f.write_str(s),
            Term::Var(v) => write!(f, "{v}"),
            Term::Nil => f.write_str("[]"),
            Term::Cons(..) => {
                let mut items = Vec::new();
                let mut cur = self;
                while let Term::Cons(h, t) = cur {
                    items.push(h.to_string());
                    cur = t;
                }
                match cur {
                    Term::Nil => write!(f, "[{}]", items.join(",")),
                    tail => write!(f, "[{}|{}]", items.join(","), tail),
                }
            }
        }
    }
}
