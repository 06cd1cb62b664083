// Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use hytccp::constraints::{Atom, Canon, Constraint, Linear, Rel, Term, Var};
use hytccp::cstore::{ContinuousStore, Entry};
use hytccp::lang::{Agent, Branch, Declaration, Program, Setting};
use hytccp::rational::{int, ratio, Rational};
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const RELS: [Rel; 5] = [Rel::Eq, Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt];

/// A linear atom kept in plain form for the oracle: `Σ coeffs[i]·vars[i] rel rhs`.
#[derive(Clone, Debug)]
pub struct LinAtom {
    pub coeffs: Vec<i64>,
    pub rel: Rel,
    pub rhs: i64,
}

impl LinAtom {
    pub fn random(rng: &mut impl Rng, nvars: usize) -> LinAtom {
        loop {
            let coeffs: Vec<i64> = (0..nvars).map(|_| if rng.gen_bool(0.6) { rng.gen_range(-3..=3) } else { 0 }).collect();
            if coeffs.iter().any(|k| *k != 0) {
                return LinAtom { coeffs, rel: *RELS.choose(rng).unwrap(), rhs: rng.gen_range(-6..=6) };
            }
        }
    }

    /// The library's view of this atom over `names`.
    pub fn to_atom(&self, names: &[&str]) -> Option<Atom> {
        let coeffs: BTreeMap<Var, Rational> = self
            .coeffs
            .iter()
            .zip(names)
            .filter(|(k, _)| **k != 0)
            .map(|(k, n)| (Var::new(n), int(*k)))
            .collect();
        match Linear::new(coeffs, self.rel, int(self.rhs)) {
            Canon::Atom(l) => Some(Atom::Lin(l)),
            Canon::Constant(_) => None,
        }
    }

    pub fn holds_at(&self, values: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(values).map(|(k, v)| int(*k) * v).sum();
        self.rel.holds(&lhs, &int(self.rhs))
    }
}

pub fn conj(atoms: &[LinAtom], names: &[&str]) -> Constraint {
    Constraint::from_atoms(atoms.iter().filter_map(|a| a.to_atom(names)).collect())
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Kind {
    Le,
    Lt,
}

#[derive(Clone, Debug)]
struct Row {
    a: Vec<Rational>,
    kind: Kind,
    b: Rational,
}

fn rows_of(atom: &LinAtom) -> Vec<Row> {
    let a: Vec<Rational> = atom.coeffs.iter().map(|k| int(*k)).collect();
    let neg: Vec<Rational> = a.iter().map(|k| -k).collect();
    let b = int(atom.rhs);
    match atom.rel {
        Rel::Le => vec![Row { a, kind: Kind::Le, b }],
        Rel::Lt => vec![Row { a, kind: Kind::Lt, b }],
        Rel::Ge => vec![Row { a: neg, kind: Kind::Le, b: -b }],
        Rel::Gt => vec![Row { a: neg, kind: Kind::Lt, b: -b }],
        Rel::Eq => vec![Row { a, kind: Kind::Le, b: b.clone() }, Row { a: neg, kind: Kind::Le, b: -b }],
    }
}

/// Fourier–Motzkin satisfiability over the rationals, written from scratch.
fn fm_sat(mut rows: Vec<Row>, nvars: usize) -> bool {
    for j in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.a[j].is_positive() {
                pos.push(r);
            } else if r.a[j].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for p in &pos {
            for q in &neg {
                let (mp, mq) = (-q.a[j].clone(), p.a[j].clone());
                let a = p.a.iter().zip(&q.a).map(|(x, y)| x * &mp + y * &mq).collect();
                let kind = if p.kind == Kind::Lt || q.kind == Kind::Lt { Kind::Lt } else { Kind::Le };
                rest.push(Row { a, kind, b: &p.b * &mp + &q.b * &mq });
            }
        }
        rows = rest;
    }
    rows.iter().all(|r| match r.kind {
        Kind::Le => !r.b.is_negative(),
        Kind::Lt => r.b.is_positive(),
    })
}

pub fn oracle_sat(atoms: &[LinAtom], nvars: usize) -> bool {
    fm_sat(atoms.iter().flat_map(rows_of).collect(), nvars)
}

/// `atoms ⊢ goal`: every strict side of the goal's negation is unsatisfiable.
pub fn oracle_entails(atoms: &[LinAtom], goal: &LinAtom, nvars: usize) -> bool {
    let flip = |rel| LinAtom { coeffs: goal.coeffs.clone(), rel, rhs: goal.rhs };
    let negations = match goal.rel {
        Rel::Le => vec![flip(Rel::Gt)],
        Rel::Lt => vec![flip(Rel::Ge)],
        Rel::Ge => vec![flip(Rel::Lt)],
        Rel::Gt => vec![flip(Rel::Le)],
        Rel::Eq => vec![flip(Rel::Lt), flip(Rel::Gt)],
    };
    negations.into_iter().all(|n| {
        let mut all = atoms.to_vec();
        all.push(n);
        !oracle_sat(&all, nvars)
    })
}

const SYMS: [&str; 3] = ["a", "b", "c"];
const TVARS: [&str; 3] = ["X", "Y", "Z"];
const LVARS: [&str; 3] = ["x", "y", "z"];

fn random_term(rng: &mut impl Rng, depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 2 } else { 4 }) {
        0 => Term::var(TVARS.choose(rng).unwrap()),
        1 => Term::sym(SYMS.choose(rng).unwrap()),
        2 => Term::cons(Term::sym(SYMS.choose(rng).unwrap()), random_term(rng, depth - 1)),
        _ => Term::Nil,
    }
}

/// A mixed atom: linear over x, y, z, a term (dis)equation over X, Y, Z, or a signal.
pub fn random_atom(rng: &mut impl Rng) -> Atom {
    match rng.gen_range(0..10) {
        0..=4 => loop {
            if let Some(a) = LinAtom::random(rng, 3).to_atom(&LVARS) {
                break a;
            }
        },
        5..=7 => Atom::Eq(Term::var(TVARS.choose(rng).unwrap()), random_term(rng, 2)),
        8 => Atom::Neq(Term::var(TVARS.choose(rng).unwrap()), random_term(rng, 1)),
        _ => Atom::signal(["go", "stop_s"].choose(rng).unwrap()),
    }
}

pub fn random_constraint(rng: &mut impl Rng) -> Constraint {
    if rng.gen_ratio(1, 25) {
        return Constraint::False;
    }
    let n = rng.gen_range(0..=4);
    Constraint::from_atoms((0..n).map(|_| random_atom(rng)).collect())
}

pub fn random_var(rng: &mut impl Rng) -> Var {
    Var::new(if rng.gen_bool(0.5) { LVARS.choose(rng).unwrap() } else { TVARS.choose(rng).unwrap() })
}

pub fn small_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(-12..=12), rng.gen_range(1..=4))
}

pub fn random_cstore(rng: &mut impl Rng) -> ContinuousStore {
    if rng.gen_ratio(1, 20) {
        return ContinuousStore::False;
    }
    let mut entries = Vec::new();
    for name in ["u", "v", "w"] {
        if rng.gen_bool(0.5) {
            // few distinct values so that merges agree often enough
            let value = int(rng.gen_range(-1..=1));
            let flow = int(rng.gen_range(-1..=1));
            entries.push((Var::new(name), Entry::new(value, flow)));
        }
    }
    ContinuousStore::from_entries(entries)
}

/// Declarations p/1, q/2 and init/0; X, Y, Z are discrete, u and w continuous.
pub fn random_program(rng: &mut impl Rng) -> Program {
    let mut declarations = BTreeMap::new();
    declarations.insert("p".to_string(), Declaration { params: vec![Var::new("X")], body: random_agent(rng, 3) });
    declarations.insert(
        "q".to_string(),
        Declaration { params: vec![Var::new("X"), Var::new("u")], body: random_agent(rng, 3) },
    );
    declarations.insert("init".to_string(), Declaration { params: Vec::new(), body: random_agent(rng, 4) });
    let cvars: BTreeSet<Var> = if rng.gen_bool(0.5) { BTreeSet::from([Var::new("u")]) } else { BTreeSet::new() };
    Program { declarations, cvars, entry: Agent::call("init", &[]) }
}

fn discrete_constraint(rng: &mut impl Rng) -> Constraint {
    let n = rng.gen_range(1..=3);
    let atoms = (0..n)
        .map(|_| match rng.gen_range(0..4) {
            0 => Atom::Eq(Term::var(TVARS.choose(rng).unwrap()), random_term(rng, 2)),
            1 => Atom::Neq(Term::var(TVARS.choose(rng).unwrap()), Term::sym(SYMS.choose(rng).unwrap())),
            2 => Atom::signal("go"),
            _ => loop {
                // linear atoms only over the continuous names u, w
                if let Some(a) = LinAtom::random(rng, 2).to_atom(&["u", "w"]) {
                    break a;
                }
            },
        })
        .collect();
    Constraint::from_atoms(atoms)
}

fn setting(rng: &mut impl Rng) -> Setting {
    if rng.gen_ratio(1, 4) {
        Setting::Keep
    } else {
        Setting::To(small_rational(rng))
    }
}

pub fn random_agent(rng: &mut impl Rng, depth: usize) -> Agent {
    let leaf = depth == 0;
    match rng.gen_range(0..if leaf { 4 } else { 9 }) {
        0 => Agent::Stop,
        1 => Agent::Tell(discrete_constraint(rng)),
        2 => Agent::Change { var: Var::new(["u", "w"].choose(rng).unwrap()), value: setting(rng), flow: setting(rng) },
        3 => {
            if rng.gen_bool(0.5) {
                Agent::Call { name: "p".into(), args: vec![Var::new(TVARS.choose(rng).unwrap())] }
            } else {
                Agent::Call { name: "q".into(), args: vec![Var::new(TVARS.choose(rng).unwrap()), Var::new("w")] }
            }
        }
        4 | 5 => Agent::par(random_agent(rng, depth - 1), random_agent(rng, depth - 1)),
        6 => Agent::now(discrete_constraint(rng), random_agent(rng, depth - 1), random_agent(rng, depth - 1)),
        7 => Agent::hide(Var::new(TVARS.choose(rng).unwrap()), random_agent(rng, depth - 1)),
        _ => {
            let n = rng.gen_range(1..=3);
            Agent::Choice(
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.7) {
                            Branch::Ask(discrete_constraint(rng), random_agent(rng, depth - 1))
                        } else {
                            Branch::Cask(discrete_constraint(rng))
                        }
                    })
                    .collect(),
            )
        }
    }
}

/// Reads the elements of a stream `name = [e1,e2,...|_]` from a rendered store.
pub fn stream(render: &str, name: &str) -> Vec<String> {
    let key = format!("{name} = [");
    let Some(start) = render.find(&key).map(|i| i + key.len()) else {
        return Vec::new();
    };
    let rest = &render[start..];
    let end = rest.find(['|', ']']).unwrap_or(rest.len());
    rest[..end].split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}
