//! The continuous store: a non-monotonic map from continuous variables to
//! their current value and constant flow.

use crate::constraints::Var;
use crate::rational::{self, Rational};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Entry {
    pub value: Rational,
    pub flow: Rational,
}

impl Entry {
    pub fn new(value: Rational, flow: Rational) -> Self {
        Entry { value, flow }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown continuous variable {0}")]
pub struct UnknownVariable(pub Var);

/// Either the inconsistent store or a finite map (the empty map is `true~`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ContinuousStore {
    False,
    Map(BTreeMap<Var, Entry>),
}

impl Default for ContinuousStore {
    fn default() -> Self {
        ContinuousStore::truth()
    }
}

impl ContinuousStore {
    pub fn truth() -> Self {
        ContinuousStore::Map(BTreeMap::new())
    }

    pub fn singleton(x: Var, value: Rational, flow: Rational) -> Self {
        ContinuousStore::Map(BTreeMap::from([(x, Entry::new(value, flow))]))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Var, Entry)>) -> Self {
        ContinuousStore::Map(entries.into_iter().collect())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, ContinuousStore::False)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Var, &Entry)> {
        match self {
            ContinuousStore::False => None,
            ContinuousStore::Map(m) => Some(m.iter()),
        }
        .into_iter()
        .flatten()
    }

    pub fn get(&self, x: &Var) -> Option<&Entry> {
        match self {
            ContinuousStore::False => None,
            ContinuousStore::Map(m) => m.get(x),
        }
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.get(x).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `⊕`: union of the maps, inconsistent on any disagreement.
    pub fn merge(&self, other: &ContinuousStore) -> ContinuousStore {
        let (ContinuousStore::Map(a), ContinuousStore::Map(b)) = (self, other) else {
            return ContinuousStore::False;
        };
        let mut out = a.clone();
        for (x, e) in b {
            match a.get(x) {
                Some(existing) if existing != e => return ContinuousStore::False,
                _ => {
                    out.insert(x.clone(), e.clone());
                }
            }
        }
        ContinuousStore::Map(out)
    }

    /// Deletes the information about `x`.
    pub fn hide(&self, x: &Var) -> ContinuousStore {
        match self {
            ContinuousStore::False => ContinuousStore::False,
            ContinuousStore::Map(m) => {
                let mut m = m.clone();
                m.remove(x);
                ContinuousStore::Map(m)
            }
        }
    }

    /// `c̃[v/x]`: replaces the value of `x`, keeping its flow.
    pub fn set_value(&self, x: &Var, v: Rational) -> Result<ContinuousStore, UnknownVariable> {
        match self {
            ContinuousStore::Map(m) if m.contains_key(x) => {
                let mut m = m.clone();
                if let Some(e) = m.get_mut(x) {
                    e.value = v;
                }
                Ok(ContinuousStore::Map(m))
            }
            _ => Err(UnknownVariable(x.clone())),
        }
    }

    /// `⊲`: hides the variables shared with `other`, then merges `other`.
    pub fn update(&self, other: &ContinuousStore) -> ContinuousStore {
        let mut base = self.clone();
        for (x, _) in other.entries() {
            base = base.hide(x);
        }
        base.merge(other)
    }

    /// `c̃_τ`: every value advances by `flow·τ`.
    pub fn project(&self, tau: &Rational) -> ContinuousStore {
        match self {
            ContinuousStore::False => ContinuousStore::False,
            ContinuousStore::Map(m) => ContinuousStore::Map(
                m.iter()
                    .map(|(x, e)| (x.clone(), Entry::new(&e.value + &e.flow * tau, e.flow.clone())))
                    .collect(),
            ),
        }
    }

    pub fn restrict(&self, keep: impl Fn(&Var) -> bool) -> ContinuousStore {
        match self {
            ContinuousStore::False => ContinuousStore::False,
            ContinuousStore::Map(m) => {
                ContinuousStore::Map(m.iter().filter(|(x, _)| keep(x)).map(|(x, e)| (x.clone(), e.clone())).collect())
            }
        }
    }

    /// Canonical rendering `{x↦(v,f), ...}` sorted by variable.
    pub fn render(&self) -> String {
        match self {
            ContinuousStore::False => "false~".to_string(),
            ContinuousStore::Map(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(x, e)| format!("{x}↦({},{})", rational::render(&e.value), rational::render(&e.flow)))
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

impl fmt::Display for ContinuousStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
