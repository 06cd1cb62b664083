//! The hybrid store `⟨c, c̃⟩`: consistency, extended entailment, continuous
//! projection and exact dwell-time computation.

use crate::constraints::{Atom, Canon, Constraint, Linear, Rel, Term, Var};
use crate::cstore::ContinuousStore;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HybridStore {
    pub discrete: Constraint,
    pub continuous: ContinuousStore,
}

/// Supremum of the admissible dwell times of a continuous transition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MaxDuration {
    /// No strictly positive duration qualifies.
    None,
    Unbounded,
    /// Admissible set is `(0, tau]`, or `(0, tau)` when `strict`.
    PositiveBound { tau: Rational, strict: bool },
}

impl MaxDuration {
    pub fn bound(tau: Rational) -> Self {
        MaxDuration::PositiveBound { tau, strict: false }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, MaxDuration::None)
    }

    pub fn admits(&self, t: &Rational) -> bool {
        if !t.is_positive() {
            return false;
        }
        match self {
            MaxDuration::None => false,
            MaxDuration::Unbounded => true,
            MaxDuration::PositiveBound { tau, strict } => {
                if *strict {
                    t < tau
                } else {
                    t <= tau
                }
            }
        }
    }

    /// Intersection of two admissible sets (both are intervals starting at 0).
    pub fn meet(&self, other: &MaxDuration) -> MaxDuration {
        use MaxDuration::*;
        match (self, other) {
            (None, _) | (_, None) => None,
            (Unbounded, x) | (x, Unbounded) => x.clone(),
            (PositiveBound { tau: a, strict: sa }, PositiveBound { tau: b, strict: sb }) => {
                if a < b {
                    self.clone()
                } else if b < a {
                    other.clone()
                } else {
                    PositiveBound { tau: a.clone(), strict: *sa || *sb }
                }
            }
        }
    }

    /// Union of two admissible sets.
    pub fn join(&self, other: &MaxDuration) -> MaxDuration {
        use MaxDuration::*;
        match (self, other) {
            (None, x) | (x, None) => x.clone(),
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (PositiveBound { tau: a, strict: sa }, PositiveBound { tau: b, strict: sb }) => {
                if a > b {
                    self.clone()
                } else if b > a {
                    other.clone()
                } else {
                    PositiveBound { tau: a.clone(), strict: *sa && *sb }
                }
            }
        }
    }
}

impl fmt::Display for MaxDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxDuration::None => f.write_str("none"),
            MaxDuration::Unbounded => f.write_str("unbounded"),
            MaxDuration::PositiveBound { tau, strict } => {
                write!(f, "{}{}", if *strict { "<" } else { "<=" }, rational::render(tau))
            }
        }
    }
}

/// Linear reading of an atom, when it has one.
fn linear_view(a: &Atom) -> Option<Linear> {
    let one = Rational::one;
    let canon = match a {
        Atom::Lin(l) => return Some(l.clone()),
        Atom::Eq(Term::Var(x), Term::Var(y)) | Atom::Neq(Term::Var(x), Term::Var(y)) => {
            Linear::new(BTreeMap::from([(x.clone(), one()), (y.clone(), -one())]), Rel::Eq, Rational::zero())
        }
        Atom::Eq(Term::Var(x), Term::Num(k))
        | Atom::Eq(Term::Num(k), Term::Var(x))
        | Atom::Neq(Term::Var(x), Term::Num(k))
        | Atom::Neq(Term::Num(k), Term::Var(x)) => Linear::new(BTreeMap::from([(x.clone(), one())]), Rel::Eq, k.clone()),
        _ => return None,
    };
    match canon {
        Canon::Atom(l) => Some(l),
        Canon::Constant(_) => None,
    }
}

impl HybridStore {
    pub fn new(discrete: Constraint, continuous: ContinuousStore) -> Self {
        HybridStore { discrete, continuous }
    }

    /// `⋀ x = c̃(x).v`.
    pub fn value_constraint(&self) -> Constraint {
        Constraint::from_atoms(
            self.continuous
                .entries()
                .map(|(x, e)| Atom::Lin(Linear::single(x.clone(), Rel::Eq, e.value.clone())))
                .collect(),
        )
    }

    /// The discrete store merged with the current continuous values.
    pub fn valued(&self) -> Constraint {
        if self.continuous.is_false() {
            return Constraint::False;
        }
        self.discrete.conjoin(&self.value_constraint())
    }

    pub fn is_consistent(&self) -> bool {
        !self.continuous.is_false() && self.discrete.satisfiable_with(&self.value_constraint())
    }

    /// Extended entailment `⟨c, c̃⟩ ⊨̃ d`.
    pub fn entails(&self, d: &Constraint) -> bool {
        self.continuous.is_false() || self.discrete.entails_under(&self.value_constraint(), d)
    }

    pub fn project(&self, tau: &Rational) -> HybridStore {
        HybridStore { discrete: self.discrete.clone(), continuous: self.continuous.project(tau) }
    }

    fn status(&self, t: &Rational, goal: &Constraint, with_consistency: bool) -> bool {
        let at = self.project(t);
        if !at.is_consistent() {
            return !with_consistency;
        }
        at.entails(goal)
    }

    /// Times `τ > 0` at which the sign of some projected linear relation
    /// relevant to `goals` (or to consistency) changes.
    fn critical_times(&self, goals: &[&Constraint]) -> Vec<Rational> {
        let cont: BTreeMap<&Var, &crate::cstore::Entry> = self.continuous.entries().collect();
        if cont.is_empty() {
            return Vec::new();
        }
        let base: Vec<Linear> = match self.discrete.canonical() {
            Constraint::False => return Vec::new(),
            Constraint::Atoms(a) => a.iter().filter_map(linear_view).collect(),
        };
        let mut systems: Vec<Vec<Linear>> = vec![base.clone()];
        for g in goals {
            for a in g.atoms() {
                if let Some(l) = linear_view(a) {
                    for neg in l.negation() {
                        let mut sys = base.clone();
                        sys.push(neg);
                        systems.push(sys);
                    }
                    let mut sys = base.clone();
                    sys.push(l);
                    systems.push(sys);
                }
            }
        }
        let mut out = BTreeSet::new();
        for sys in systems {
            let others: BTreeSet<Var> =
                sys.iter().flat_map(|a| a.vars().cloned()).filter(|v| !cont.contains_key(v)).collect();
            let Some(projected) = crate::constraints::linear::project_out(&sys, &others) else {
                continue;
            };
            for a in projected {
                let mut offset = Rational::zero();
                let mut slope = Rational::zero();
                for (x, k) in a.coeffs() {
                    let e = cont[x];
                    offset += k * &e.value;
                    slope += k * &e.flow;
                }
                if !slope.is_zero() {
                    let t = (a.rhs() - offset) / slope;
                    if t.is_positive() {
                        out.insert(t);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Supremum of `τ` such that every `τ' ∈ [0, τ]` keeps the store
    /// consistent and entails `inv`.
    pub fn max_duration(&self, inv: &Constraint) -> MaxDuration {
        let zero = Rational::zero();
        if !self.status(&zero, inv, true) {
            return MaxDuration::None;
        }
        let mut prev = zero.clone();
        for t in self.critical_times(&[inv]) {
            let mid = (&prev + &t) / Rational::from_integer(2.into());
            if !self.status(&mid, inv, true) {
                return if prev.is_zero() { MaxDuration::None } else { MaxDuration::bound(prev) };
            }
            if !self.status(&t, inv, true) {
                return MaxDuration::PositiveBound { tau: t, strict: true };
            }
            prev = t;
        }
        let beyond = &prev + Rational::one();
        if self.status(&beyond, inv, true) {
            MaxDuration::Unbounded
        } else if prev.is_zero() {
            MaxDuration::None
        } else {
            MaxDuration::bound(prev)
        }
    }

    /// Sorted times in `(0, horizon]` at which the entailment status of some
    /// guard flips.
    pub fn event_times(&self, guards: &[Constraint], horizon: &Rational) -> Vec<Rational> {
        self.all_event_times(guards).into_iter().filter(|t| t <= horizon).collect()
    }

    /// Every positive time at which the entailment status of some guard flips.
    pub fn all_event_times(&self, guards: &[Constraint]) -> Vec<Rational> {
        let two = Rational::from_integer(2.into());
        let mut out = BTreeSet::new();
        for g in guards {
            let cands = self.critical_times(&[g]);
            let mut prev = Rational::zero();
            for (i, t) in cands.iter().enumerate() {
                let here = self.status(t, g, false);
                let before = self.status(&((&prev + t) / &two), g, false);
                let next = cands.get(i + 1).cloned().unwrap_or_else(|| t + Rational::one());
                let after = self.status(&((t + &next) / &two), g, false);
                if here != before || here != after {
                    out.insert(t.clone());
                }
                prev = t.clone();
            }
        }
        out.into_iter().collect()
    }

    /// Canonical `⟨c ‖ c̃⟩` rendering.
    pub fn render(&self) -> String {
        format!("⟨{} ‖ {}⟩", self.discrete.render(), self.continuous.render())
    }
}

impl fmt::Display for HybridStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_constraint;
    use crate::rational::{int, ratio};

    fn c(text: &str) -> Constraint {
        parse_constraint(text).unwrap()
    }

    fn hs(d: &str, entries: &[(&str, Rational, Rational)]) -> HybridStore {
        HybridStore::new(
            c(d),
            ContinuousStore::from_entries(
                entries.iter().map(|(x, v, f)| (Var::new(x), crate::cstore::Entry::new(v.clone(), f.clone()))),
            ),
        )
    }

    #[test]
    fn consistency() {
        assert!(hs("T >= 26 /\\ T <= 30", &[("T", int(29), int(2))]).is_consistent());
        assert!(!hs("T >= 26 /\\ T <= 30", &[("T", int(31), int(2))]).is_consistent());
        assert!(HybridStore::default().is_consistent());
    }

    #[test]
    fn extended_entailment() {
        let s = hs("St = [off|_]", &[("T", int(30), int(2))]);
        assert!(s.entails(&c("St = [off|_] /\\ T = 30")));
        assert!(!hs("true", &[("T", int(29), int(2))]).entails(&c("T = 30")));
        assert!(s.entails(&Constraint::truth()));
    }

    #[test]
    fn projection() {
        let s = hs("x > 10", &[("y", int(2), int(5))]);
        assert_eq!(s.project(&int(3)), hs("x > 10", &[("y", int(17), int(5))]));
        assert_eq!(s.project(&int(0)), s);
        let cool = hs("T >= 26 /\\ T <= 30", &[("T", int(29), int(2))]);
        assert_eq!(cool.project(&ratio(1, 2)).continuous, hs("true", &[("T", int(30), int(2))]).continuous);
    }

    #[test]
    fn dwell_of_cooler_phases() {
        let heating = hs("St = [off|_] /\\ T >= 26 /\\ T <= 30", &[("T", int(29), int(2))]);
        assert_eq!(heating.max_duration(&c("St = [off|_] /\\ T <= 30")), MaxDuration::bound(ratio(1, 2)));
        let cooling = hs("St = [off,on|_] /\\ T >= 26 /\\ T <= 30", &[("T", int(30), ratio(-1, 2))]);
        assert_eq!(cooling.max_duration(&c("St = [off,on|_] /\\ T >= 26")), MaxDuration::bound(int(8)));
        assert_eq!(hs("true", &[("x", int(0), int(0))]).max_duration(&c("x <= 1")), MaxDuration::Unbounded);
    }

    #[test]
    fn dwell_none_and_strict() {
        assert_eq!(hs("true", &[("x", int(1), int(1))]).max_duration(&c("x <= 1")), MaxDuration::None);
        assert_eq!(hs("true", &[("x", int(2), int(0))]).max_duration(&c("x <= 1")), MaxDuration::None);
        assert_eq!(
            hs("true", &[("x", int(0), int(1))]).max_duration(&c("x < 1")),
            MaxDuration::PositiveBound { tau: int(1), strict: true }
        );
    }

    #[test]
    fn consistency_caps_dwell() {
        let s = hs("V <= 100", &[("V", int(90), int(5))]);
        assert_eq!(s.max_duration(&Constraint::truth()), MaxDuration::bound(int(2)));
    }

    #[test]
    fn events() {
        let run = hs("true", &[("M", int(0), int(10))]);
        assert_eq!(run.event_times(&[c("M = 50")], &int(100)), vec![int(5)]);
        let heat = hs("true", &[("T", int(29), int(2))]);
        assert_eq!(heat.event_times(&[c("T = 30")], &int(10)), vec![ratio(1, 2)]);
        assert!(heat.event_times(&[c("go")], &int(10)).is_empty());
    }
}
