//! Linear relations over exact rationals and their Fourier–Motzkin procedures.

use super::term::Var;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    fn flipped(self) -> Rel {
        match self {
            Rel::Eq => Rel::Eq,
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

/// `Σ coeffs[x]·x  rel  rhs`, kept in canonical form by [`Linear::new`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Linear {
    coeffs: BTreeMap<Var, Rational>,
    rel: Rel,
    rhs: Rational,
}

/// Result of canonicalizing a linear relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Canon {
    Atom(Linear),
    Constant(bool),
}

impl Linear {
    /// Canonicalizes: zero coefficients dropped, leading coefficient scaled to
    /// `1` (flipping the relation when dividing by a negative number).
    pub fn new(coeffs: BTreeMap<Var, Rational>, rel: Rel, rhs: Rational) -> Canon {
        let coeffs: BTreeMap<Var, Rational> =
            coeffs.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        let Some(lead) = coeffs.values().next().cloned() else {
            return Canon::Constant(rel.holds(&Rational::zero(), &rhs));
        };
        let rel = if lead.is_negative() { rel.flipped() } else { rel };
        let coeffs = coeffs.into_iter().map(|(v, a)| (v, a / &lead)).collect();
        Canon::Atom(Linear { coeffs, rel, rhs: rhs / lead })
    }

    pub fn single(x: Var, rel: Rel, rhs: Rational) -> Linear {
        match Linear::new(BTreeMap::from([(x, Rational::one())]), rel, rhs) {
            Canon::Atom(a) => a,
            Canon::Constant(_) => unreachable!("unit coefficient"),
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Rational> {
        &self.coeffs
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, x: &Var) -> bool {
        self.coeffs.contains_key(x)
    }

    /// `Some((x, k))` when the relation is `x = k`.
    pub fn as_binding(&self) -> Option<(&Var, &Rational)> {
        if self.rel == Rel::Eq && self.coeffs.len() == 1 {
            let (x, _) = self.coeffs.iter().next()?;
            Some((x, &self.rhs))
        } else {
            None
        }
    }

    /// Substitutes each variable by either a constant or another variable.
    pub fn substitute(&self, f: &impl Fn(&Var) -> LinValue) -> Canon {
        let mut coeffs: BTreeMap<Var, Rational> = BTreeMap::new();
        let mut rhs = self.rhs.clone();
        for (x, a) in &self.coeffs {
            match f(x) {
                LinValue::Const(k) => rhs -= a * k,
                LinValue::Var(y) => *coeffs.entry(y).or_insert_with(Rational::zero) += a,
            }
        }
        Linear::new(coeffs, self.rel, rhs)
    }

    pub fn eval(&self, env: &impl Fn(&Var) -> Option<Rational>) -> Option<bool> {
        let mut lhs = Rational::zero();
        for (x, a) in &self.coeffs {
            lhs += a * env(x)?;
        }
        Some(self.rel.holds(&lhs, &self.rhs))
    }

    /// The relation as one or two rows `Σ a·x (<|<=|=) b`.
    pub(crate) fn rows(&self) -> Vec<Row> {
        let neg: BTreeMap<Var, Rational> =
            self.coeffs.iter().map(|(v, a)| (v.clone(), -a.clone())).collect();
        match self.rel {
            Rel::Eq => vec![Row { coeffs: self.coeffs.clone(), kind: RowKind::Eq, rhs: self.rhs.clone() }],
            Rel::Le => vec![Row { coeffs: self.coeffs.clone(), kind: RowKind::Le, rhs: self.rhs.clone() }],
            Rel::Lt => vec![Row { coeffs: self.coeffs.clone(), kind: RowKind::Lt, rhs: self.rhs.clone() }],
            Rel::Ge => vec![Row { coeffs: neg, kind: RowKind::Le, rhs: -self.rhs.clone() }],
            Rel::Gt => vec![Row { coeffs: neg, kind: RowKind::Lt, rhs: -self.rhs.clone() }],
        }
    }

    /// The complementary relations whose disjunction is the negation.
    pub fn negation(&self) -> Vec<Linear> {
        let rels: &[Rel] = match self.rel {
            Rel::Eq => &[Rel::Lt, Rel::Gt],
            Rel::Le => &[Rel::Gt],
            Rel::Lt => &[Rel::Ge],
            Rel::Ge => &[Rel::Lt],
            Rel::Gt => &[Rel::Le],
        };
        rels.iter()
            .map(|&r| Linear { coeffs: self.coeffs.clone(), rel: r, rhs: self.rhs.clone() })
            .collect()
    }
}

pub enum LinValue {
    Const(Rational),
    Var(Var),
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.coeffs.iter().enumerate() {
            let (sign, mag) = if a.is_negative() { ("-", -a.clone()) } else { ("+", a.clone()) };
            match (i, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                (_, s) => write!(f, " {s} ")?,
            }
            if mag.is_one() {
                write!(f, "{x}")?;
            } else {
                write!(f, "{}*{x}", rational::render(&mag))?;
            }
        }
        write!(f, " {} {}", self.rel.symbol(), rational::render(&self.rhs))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) enum RowKind {
    Eq,
    Le,
    Lt,
}

/// Internal row `Σ a·x kind b`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) struct Row {
    pub coeffs: BTreeMap<Var, Rational>,
    pub kind: RowKind,
    pub rhs: Rational,
}

impl Row {
    fn normalized(mut self) -> Row {
        self.coeffs.retain(|_, a| !a.is_zero());
        if let Some(lead) = self.coeffs.values().next().cloned() {
            let scale = lead.abs();
            for a in self.coeffs.values_mut() {
                *a /= &scale;
            }
            self.rhs /= &scale;
            if self.kind == RowKind::Eq && lead.is_negative() {
                for a in self.coeffs.values_mut() {
                    *a = -a.clone();
                }
                self.rhs = -self.rhs.clone();
            }
        }
        self
    }

    fn constant_holds(&self) -> bool {
        let zero = Rational::zero();
        match self.kind {
            RowKind::Eq => zero == self.rhs,
            RowKind::Le => zero <= self.rhs,
            RowKind::Lt => zero < self.rhs,
        }
    }

    fn into_linear(self) -> Canon {
        let rel = match self.kind {
            RowKind::Eq => Rel::Eq,
            RowKind::Le => Rel::Le,
            RowKind::Lt => Rel::Lt,
        };
        Linear::new(self.coeffs, rel, self.rhs)
    }
}

/// Substitutes `x := (rhs - Σ others) / a` taken from equality `eq` into `row`.
fn eliminate_with_eq(row: &Row, eq: &Row, x: &Var) -> Row {
    let Some(b) = row.coeffs.get(x).cloned() else {
        return row.clone();
    };
    let a = &eq.coeffs[x];
    let factor = b / a;
    let mut coeffs = row.coeffs.clone();
    for (v, c) in &eq.coeffs {
        *coeffs.entry(v.clone()).or_insert_with(Rational::zero) -= &factor * c;
    }
    coeffs.remove(x);
    Row { coeffs, kind: row.kind, rhs: &row.rhs - &factor * &eq.rhs }.normalized()
}

/// Projects `x` out of `rows`. Returns `None` if a contradiction surfaces.
fn eliminate(rows: Vec<Row>, x: &Var) -> Option<Vec<Row>> {
    if let Some(pos) = rows.iter().position(|r| r.kind == RowKind::Eq && r.coeffs.contains_key(x)) {
        let eq = rows[pos].clone();
        let out: Vec<Row> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, r)| eliminate_with_eq(r, &eq, x))
            .collect();
        return tidy(out);
    }
    let mut keep = Vec::new();
    let mut upper = Vec::new(); // a > 0: x <= ...
    let mut lower = Vec::new(); // a < 0: x >= ...
    for r in rows {
        match r.coeffs.get(x).map(|a| a.is_positive()) {
            None => keep.push(r),
            Some(true) => upper.push(r),
            Some(false) => lower.push(r),
        }
    }
    for u in &upper {
        for l in &lower {
            let au = u.coeffs[x].clone();
            let al = -l.coeffs[x].clone();
            let mut coeffs: BTreeMap<Var, Rational> = BTreeMap::new();
            for (v, c) in &u.coeffs {
                *coeffs.entry(v.clone()).or_insert_with(Rational::zero) += c / &au;
            }
            for (v, c) in &l.coeffs {
                *coeffs.entry(v.clone()).or_insert_with(Rational::zero) += c / &al;
            }
            coeffs.remove(x);
            let kind = if u.kind == RowKind::Lt || l.kind == RowKind::Lt { RowKind::Lt } else { RowKind::Le };
            keep.push(Row { coeffs, kind, rhs: &u.rhs / &au + &l.rhs / &al }.normalized());
        }
    }
    tidy(keep)
}

/// Drops satisfied constant rows and duplicates; `None` on a false constant row.
fn tidy(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut set = BTreeSet::new();
    for r in rows {
        if r.coeffs.is_empty() {
            if !r.constant_holds() {
                return None;
            }
        } else {
            set.insert(r);
        }
    }
    Some(set.into_iter().collect())
}

fn rows_of(atoms: &[Linear]) -> Vec<Row> {
    atoms.iter().flat_map(|a| a.rows()).map(Row::normalized).collect()
}

/// Satisfiability over the rationals of a conjunction of linear relations.
pub fn satisfiable(atoms: &[Linear]) -> bool {
    let Some(mut rows) = tidy(rows_of(atoms)) else {
        return false;
    };
    loop {
        // prefer equalities, then the variable with the fewest bound pairs
        let vars: BTreeSet<Var> = rows.iter().flat_map(|r| r.coeffs.keys().cloned()).collect();
        let Some(x) = pick_variable(&rows, &vars) else {
            return true;
        };
        match eliminate(rows, &x) {
            Some(next) => rows = next,
            None => return false,
        }
    }
}

fn pick_variable(rows: &[Row], vars: &BTreeSet<Var>) -> Option<Var> {
    if let Some(r) = rows.iter().find(|r| r.kind == RowKind::Eq) {
        return r.coeffs.keys().next().cloned();
    }
    vars.iter()
        .min_by_key(|x| {
            let pos = rows.iter().filter(|r| r.coeffs.get(*x).is_some_and(|a| a.is_positive())).count();
            let neg = rows.iter().filter(|r| r.coeffs.get(*x).is_some_and(|a| a.is_negative())).count();
            pos * neg
        })
        .cloned()
}

/// Existentially projects `xs` out of the conjunction. `None` if unsatisfiable.
pub fn project_out(atoms: &[Linear], xs: &BTreeSet<Var>) -> Option<Vec<Linear>> {
    let mut rows = tidy(rows_of(atoms))?;
    for x in xs {
        rows = eliminate(rows, x)?;
    }
    let mut out = BTreeSet::new();
    for r in rows {
        match r.into_linear() {
            Canon::Atom(a) => {
                out.insert(a);
            }
            Canon::Constant(true) => {}
            Canon::Constant(false) => return None,
        }
    }
    Some(out.into_iter().collect())
}

/// `atoms ⊢ goal` over the rationals (assuming `atoms` satisfiable).
pub fn entails(atoms: &[Linear], goal: &Linear) -> bool {
    goal.negation().into_iter().all(|neg| {
        let mut sys = atoms.to_vec();
        sys.push(neg);
        !satisfiable(&sys)
    })
}

/// Removes atoms entailed by the remaining ones, scanning in order.
pub fn remove_redundant(atoms: Vec<Linear>) -> Vec<Linear> {
    let mut kept = atoms;
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<Linear> =
            kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a.clone()).collect();
        if entails(&others, &kept[i]) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}
