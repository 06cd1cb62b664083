//! Solved forms: union of term unification and a linear residue.

use super::linear::{self, Canon, LinValue, Linear, Rel};
use super::term::{Term, Var};
use super::Atom;
use crate::rational::Rational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub(crate) enum Bind {
    Bind,
    Skip,
    Fail,
}

#[derive(Clone, Default, Debug)]
pub(crate) struct Subst {
    bind: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = &cur {
            match self.bind.get(v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn occurs(&self, x: &Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => &v == x,
            Term::Cons(h, tl) => self.occurs(x, &h) || self.occurs(x, &tl),
            _ => false,
        }
    }

    fn try_bind(&mut self, v: &Var, t: &Term, policy: &mut dyn FnMut(&Var, &Term) -> Bind) -> Option<bool> {
        match policy(v, t) {
            Bind::Bind => {
                if self.occurs(v, t) {
                    return Some(false);
                }
                self.bind.insert(v.clone(), t.clone());
                Some(true)
            }
            Bind::Skip => Some(true),
            Bind::Fail => None,
        }
    }

    pub fn unify(&mut self, a: &Term, b: &Term, policy: &mut dyn FnMut(&Var, &Term) -> Bind) -> bool {
        let a = self.walk(a);
        let b = self.walk(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), Term::Var(y)) => match self.try_bind(x, &b, policy) {
                Some(ok) => ok,
                None => self.try_bind(y, &a, policy).unwrap_or(false),
            },
            (Term::Var(x), _) => self.try_bind(x, &b, policy).unwrap_or(false),
            (_, Term::Var(y)) => self.try_bind(y, &a, policy).unwrap_or(false),
            (Term::Cons(h1, t1), Term::Cons(h2, t2)) => {
                self.unify(h1, h2, policy) && self.unify(t1, t2, policy)
            }
            _ => a == b,
        }
    }

    pub fn unify_any(&mut self, a: &Term, b: &Term) -> bool {
        self.unify(a, b, &mut |_, _| Bind::Bind)
    }
}

/// A satisfiable conjunction in solved form.
#[derive(Clone, Debug)]
pub(crate) struct Solved {
    pub subst: Subst,
    /// Linear residue over unbound root variables (no `x = k` bindings).
    pub linear: Vec<Linear>,
    pub neqs: Vec<(Term, Term)>,
    pub signals: BTreeSet<Arc<str>>,
}

enum LinTarget {
    Const(Rational),
    Var(Var),
    Clash,
}

impl Solved {
    fn lin_target(&self, x: &Var) -> LinTarget {
        match self.subst.walk(&Term::Var(x.clone())) {
            Term::Num(k) => LinTarget::Const(k),
            Term::Var(v) => LinTarget::Var(v),
            _ => LinTarget::Clash,
        }
    }

    /// Rewrites `a` over root variables; `None` if a variable is bound to a
    /// non-numeric constructor.
    pub fn substitute_linear(&self, a: &Linear) -> Option<Canon> {
        if a.vars().any(|x| matches!(self.lin_target(x), LinTarget::Clash)) {
            return None;
        }
        Some(a.substitute(&|x| match self.lin_target(x) {
            LinTarget::Const(k) => LinValue::Const(k),
            LinTarget::Var(v) => LinValue::Var(v),
            LinTarget::Clash => unreachable!(),
        }))
    }

    pub fn solve(atoms: &[Atom]) -> Option<Solved> {
        let empty = Solved { subst: Subst::default(), linear: Vec::new(), neqs: Vec::new(), signals: BTreeSet::new() };
        empty.extend(atoms)
    }

    /// Solved form of `self ∧ atoms`.
    pub fn extend(&self, atoms: &[Atom]) -> Option<Solved> {
        let mut subst = self.subst.clone();
        let mut lins = self.linear.clone();
        let mut neqs = self.neqs.clone();
        let mut signals = self.signals.clone();
        for a in atoms {
            match a {
                Atom::Eq(l, r) => {
                    if !subst.unify_any(l, r) {
                        return None;
                    }
                }
                Atom::Lin(l) => lins.push(l.clone()),
                Atom::Neq(l, r) => neqs.push((l.clone(), r.clone())),
                Atom::Signal(s) => {
                    signals.insert(s.clone());
                }
            }
        }
        let mut solved = Solved { subst, linear: Vec::new(), neqs: Vec::new(), signals };
        // propagate single-variable equalities into the unifier until stable
        loop {
            let mut residue = Vec::new();
            let mut bound_any = false;
            for l in &lins {
                match solved.substitute_linear(l)? {
                    Canon::Constant(true) => {}
                    Canon::Constant(false) => return None,
                    Canon::Atom(a) => {
                        if let Some((x, k)) = a.as_binding() {
                            if !solved.subst.unify_any(&Term::Var(x.clone()), &Term::Num(k.clone())) {
                                return None;
                            }
                            bound_any = true;
                        } else {
                            residue.push(a);
                        }
                    }
                }
            }
            lins = residue;
            if !bound_any {
                break;
            }
        }
        let mut dedup: Vec<Linear> = lins.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if !linear::satisfiable(&dedup) {
            return None;
        }
        dedup = linear::remove_redundant(dedup);
        solved.linear = dedup;
        for (l, r) in neqs {
            let existential = anonymous_vars(&[&l, &r]);
            if solved.entails_eq(&l, &r, &existential) {
                return None;
            }
            if !solved.compatible(&l, &r) {
                // already guaranteed to differ
                continue;
            }
            solved.neqs.push((l, r));
        }
        Some(solved)
    }

    /// Whether `self ∧ l = r` is satisfiable.
    pub fn compatible(&self, l: &Term, r: &Term) -> bool {
        let mut subst = self.subst.clone();
        if !subst.unify_any(l, r) {
            return false;
        }
        let probe = Solved { subst, linear: Vec::new(), neqs: Vec::new(), signals: BTreeSet::new() };
        let mut rows = Vec::new();
        for a in &self.linear {
            match probe.substitute_linear(a) {
                None => return false,
                Some(Canon::Constant(false)) => return false,
                Some(Canon::Constant(true)) => {}
                Some(Canon::Atom(a)) => rows.push(a),
            }
        }
        linear::satisfiable(&rows)
    }

    pub fn entails_linear(&self, a: &Linear) -> bool {
        match self.substitute_linear(a) {
            None => false,
            Some(Canon::Constant(b)) => b,
            Some(Canon::Atom(a)) => linear::entails(&self.linear, &a),
        }
    }

    /// `self ⊢ ∃existential. l = r`.
    pub fn entails_eq(&self, l: &Term, r: &Term, existential: &BTreeSet<Var>) -> bool {
        let mut subst = self.subst.clone();
        let linear = &self.linear;
        let mut policy = |v: &Var, t: &Term| -> Bind {
            if existential.contains(v) {
                return Bind::Bind;
            }
            let implied = match t {
                Term::Num(k) => Some(Linear::single(v.clone(), Rel::Eq, k.clone())),
                Term::Var(u) => match Linear::new(
                    BTreeMap::from([(v.clone(), Rational::one()), (u.clone(), -Rational::one())]),
                    Rel::Eq,
                    Rational::from_integer(0.into()),
                ) {
                    Canon::Atom(a) => Some(a),
                    Canon::Constant(_) => None,
                },
                _ => None,
            };
            match implied {
                Some(a) if linear::entails(linear, &a) => Bind::Skip,
                _ => Bind::Fail,
            }
        };
        subst.unify(l, r, &mut policy)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (k, t) in &self.subst.bind {
            out.insert(k.clone());
            t.vars_into(&mut out);
        }
        for a in &self.linear {
            out.extend(a.vars().cloned());
        }
        for (l, r) in &self.neqs {
            l.vars_into(&mut out);
            r.vars_into(&mut out);
        }
        out
    }

    fn root(&self, x: &Var) -> Var {
        let mut cur = x.clone();
        while let Some(Term::Var(next)) = self.subst.bind.get(&cur) {
            cur = next.clone();
        }
        cur
    }

    /// Renders the solved form back to atoms, existentially quantifying
    /// `hidden`. Returns `None` when projection exposes an inconsistency.
    pub fn to_atoms(&self, hidden: &BTreeSet<Var>) -> Option<Vec<Atom>> {
        let all = self.vars();
        let visible = |v: &Var| !v.is_anonymous() && !hidden.contains(v);
        // class root -> members
        let mut members: BTreeMap<Var, Vec<Var>> = BTreeMap::new();
        for v in &all {
            members.entry(self.root(v)).or_default().push(v.clone());
        }
        let rep_of: BTreeMap<Var, Option<Var>> = members
            .iter()
            .map(|(r, ms)| (r.clone(), ms.iter().filter(|m| visible(m)).min().cloned()))
            .collect();
        // unbound hidden roots mentioned inside terms become anonymous
        let anon_name = |v: &Var| -> Var {
            if v.is_anonymous() {
                v.clone()
            } else {
                Var::new(format!("_{}", v.name()))
            }
        };
        let bound_term = |r: &Var| self.subst.bind.get(r).cloned();

        struct Ctx<'a> {
            s: &'a Solved,
            rep_of: &'a BTreeMap<Var, Option<Var>>,
            members: &'a BTreeMap<Var, Vec<Var>>,
        }
        fn show(ctx: &Ctx<'_>, t: &Term, anon_name: &dyn Fn(&Var) -> Var, renamed: &mut BTreeSet<Var>) -> Term {
            match t {
                Term::Var(x) => {
                    let r = ctx.s.root(x);
                    if let Some(Some(rep)) = ctx.rep_of.get(&r) {
                        return Term::Var(rep.clone());
                    }
                    match ctx.s.subst.bind.get(&r) {
                        Some(t) => show(ctx, t, anon_name, renamed),
                        None => {
                            let m = ctx.members.get(&r).and_then(|ms| ms.iter().min()).cloned().unwrap_or(r);
                            renamed.insert(m.clone());
                            Term::Var(anon_name(&m))
                        }
                    }
                }
                Term::Cons(h, tl) => Term::cons(show(ctx, h, anon_name, renamed), show(ctx, tl, anon_name, renamed)),
                other => other.clone(),
            }
        }
        let ctx = Ctx { s: self, rep_of: &rep_of, members: &members };
        let mut renamed: BTreeSet<Var> = BTreeSet::new();
        let mut out: Vec<Atom> = Vec::new();

        for (root, ms) in &members {
            let Some(Some(rep)) = rep_of.get(root) else { continue };
            match bound_term(root) {
                Some(Term::Num(k)) => {
                    for m in ms.iter().filter(|m| visible(m)) {
                        out.push(Atom::Lin(Linear::single(m.clone(), Rel::Eq, k.clone())));
                    }
                }
                Some(t) => {
                    let shown = match &t {
                        Term::Cons(h, tl) => Term::cons(
                            show(&ctx, h, &anon_name, &mut renamed),
                            show(&ctx, tl, &anon_name, &mut renamed),
                        ),
                        other => other.clone(),
                    };
                    out.push(Atom::Eq(Term::Var(rep.clone()), shown));
                    for m in ms.iter().filter(|m| visible(m) && *m != rep) {
                        out.push(Atom::Eq(Term::Var(m.clone()), Term::Var(rep.clone())));
                    }
                }
                None => {
                    for m in ms.iter().filter(|m| visible(m) && *m != rep) {
                        out.push(Atom::Eq(Term::Var(m.clone()), Term::Var(rep.clone())));
                    }
                }
            }
        }
        // neqs that mention a quantified unbound variable are dropped
        let mut neq_out = Vec::new();
        for (l, r) in &self.neqs {
            let mut local = BTreeSet::new();
            let l2 = show(&ctx, l, &anon_name, &mut local);
            let r2 = show(&ctx, r, &anon_name, &mut local);
            let own_anon = anonymous_vars(&[l, r]);
            let leaks = local.iter().any(|v| !own_anon.contains(v) && !v.is_anonymous());
            if !leaks {
                neq_out.push(Atom::Neq(l2, r2));
            }
        }
        // linear residue: map roots to representatives, project the rest
        let mut lin_rows = Vec::new();
        let mut eliminate = BTreeSet::new();
        for a in &self.linear {
            let mapped = a.substitute(&|x| {
                let r = self.root(x);
                match rep_of.get(&r) {
                    Some(Some(rep)) => LinValue::Var(rep.clone()),
                    _ => {
                        let m = members.get(&r).and_then(|ms| ms.iter().min()).cloned().unwrap_or(r);
                        LinValue::Var(m)
                    }
                }
            });
            match mapped {
                Canon::Atom(a) => lin_rows.push(a),
                Canon::Constant(true) => {}
                Canon::Constant(false) => return None,
            }
        }
        for a in &lin_rows {
            for x in a.vars() {
                if !visible(x) && !x.is_anonymous() && !renamed.contains(x) {
                    eliminate.insert(x.clone());
                }
            }
        }
        let projected = linear::project_out(&lin_rows, &eliminate)?;
        let projected = linear::remove_redundant(projected);
        for a in projected {
            let renamed_atom = a.substitute(&|x| {
                if renamed.contains(x) {
                    LinValue::Var(anon_name(x))
                } else {
                    LinValue::Var(x.clone())
                }
            });
            if let Canon::Atom(a) = renamed_atom {
                out.push(Atom::Lin(a));
            }
        }
        out.extend(neq_out);
        out.extend(self.signals.iter().map(|s| Atom::Signal(s.clone())));
        let mut keyed: Vec<(String, Atom)> = out.into_iter().map(|a| (a.to_string(), a)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        Some(keyed.into_iter().map(|(_, a)| a).collect())
    }
}

pub(crate) fn anonymous_vars(terms: &[&Term]) -> BTreeSet<Var> {
    let mut all = BTreeSet::new();
    for t in terms {
        t.vars_into(&mut all);
    }
    all.into_iter().filter(|v| v.is_anonymous()).collect()
}
