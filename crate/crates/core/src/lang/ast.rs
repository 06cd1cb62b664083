use crate::constraints::{Constraint, Var};
use crate::hstore::HybridStore;
use crate::rational::Rational;
use std::collections::{BTreeMap, BTreeSet};

/// New value or flow given to `change`; `Keep` is the `_` wildcard.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Setting {
    Keep,
    To(Rational),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Branch {
    /// `ask(c) -> A`
    Ask(Constraint, Agent),
    /// `cask(inv)`
    Cask(Constraint),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Agent {
    Stop,
    Tell(Constraint),
    Parallel(Box<Agent>, Box<Agent>),
    Now { cond: Constraint, then: Box<Agent>, otherwise: Box<Agent> },
    /// `exists x (A)` with its local store, `⟨true, true~⟩` when written.
    Hide { var: Var, body: Box<Agent>, local: HybridStore },
    Call { name: String, args: Vec<Var> },
    Change { var: Var, value: Setting, flow: Setting },
    /// Branches in source order: `ask` and `cask` may interleave.
    Choice(Vec<Branch>),
}

impl Agent {
    pub fn par(a: Agent, b: Agent) -> Agent {
        Agent::Parallel(Box::new(a), Box::new(b))
    }

    pub fn hide(var: Var, body: Agent) -> Agent {
        Agent::Hide { var, body: Box::new(body), local: HybridStore::default() }
    }

    pub fn now(cond: Constraint, then: Agent, otherwise: Agent) -> Agent {
        Agent::Now { cond, then: Box::new(then), otherwise: Box::new(otherwise) }
    }

    pub fn call(name: &str, args: &[&str]) -> Agent {
        Agent::Call { name: name.to_string(), args: args.iter().map(Var::new).collect() }
    }

    pub fn asks(&self) -> Vec<(&Constraint, &Agent)> {
        match self {
            Agent::Choice(bs) => bs
                .iter()
                .filter_map(|b| match b {
                    Branch::Ask(c, a) => Some((c, a)),
                    Branch::Cask(_) => None,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn casks(&self) -> Vec<&Constraint> {
        match self {
            Agent::Choice(bs) => bs
                .iter()
                .filter_map(|b| match b {
                    Branch::Cask(c) => Some(c),
                    Branch::Ask(..) => None,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Flattens nested parallel composition into its components.
    pub fn components(&self) -> Vec<&Agent> {
        match self {
            Agent::Parallel(a, b) => {
                let mut out = a.components();
                out.extend(b.components());
                out
            }
            other => vec![other],
        }
    }

    /// Whether the agent has terminated successfully.
    pub fn is_stopped(&self) -> bool {
        match self {
            Agent::Stop => true,
            Agent::Parallel(a, b) => a.is_stopped() && b.is_stopped(),
            Agent::Hide { body, .. } => body.is_stopped(),
            _ => false,
        }
    }

    /// Renames free variables; bound (hidden) variables shadow the mapping.
    pub fn rename(&self, f: &dyn Fn(&Var) -> Option<Var>) -> Agent {
        match self {
            Agent::Stop => Agent::Stop,
            Agent::Tell(c) => Agent::Tell(c.rename(&|v| f(v))),
            Agent::Parallel(a, b) => Agent::par(a.rename(f), b.rename(f)),
            Agent::Now { cond, then, otherwise } => {
                Agent::now(cond.rename(&|v| f(v)), then.rename(f), otherwise.rename(f))
            }
            Agent::Hide { var, body, local } => {
                let inner = |v: &Var| if v == var { None } else { f(v) };
                Agent::Hide { var: var.clone(), body: Box::new(body.rename(&inner)), local: local.clone() }
            }
            Agent::Call { name, args } => Agent::Call {
                name: name.clone(),
                args: args.iter().map(|a| f(a).unwrap_or_else(|| a.clone())).collect(),
            },
            Agent::Change { var, value, flow } => Agent::Change {
                var: f(var).unwrap_or_else(|| var.clone()),
                value: value.clone(),
                flow: flow.clone(),
            },
            Agent::Choice(bs) => Agent::Choice(
                bs.iter()
                    .map(|b| match b {
                        Branch::Ask(c, a) => Branch::Ask(c.rename(&|v| f(v)), a.rename(f)),
                        Branch::Cask(c) => Branch::Cask(c.rename(&|v| f(v))),
                    })
                    .collect(),
            ),
        }
    }

    /// All variables occurring in the agent, bound or free.
    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Agent::Stop => {}
            Agent::Tell(c) => out.extend(c.vars()),
            Agent::Parallel(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Agent::Now { cond, then, otherwise } => {
                out.extend(cond.vars());
                then.vars_into(out);
                otherwise.vars_into(out);
            }
            Agent::Hide { var, body, .. } => {
                out.insert(var.clone());
                body.vars_into(out);
            }
            Agent::Call { args, .. } => out.extend(args.iter().cloned()),
            Agent::Change { var, .. } => {
                out.insert(var.clone());
            }
            Agent::Choice(bs) => {
                for b in bs {
                    match b {
                        Branch::Ask(c, a) => {
                            out.extend(c.vars());
                            a.vars_into(out);
                        }
                        Branch::Cask(c) => out.extend(c.vars()),
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Discrete,
    Continuous,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Declaration {
    pub params: Vec<Var>,
    pub body: Agent,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub declarations: BTreeMap<String, Declaration>,
    /// Names declared continuous by a `cvar` line.
    pub cvars: BTreeSet<Var>,
    pub entry: Agent,
}

impl Program {
    /// The body of `init` with its outermost `exists` blocks removed, so the
    /// variables it introduces stay observable during a run.
    pub fn open_entry(&self) -> Agent {
        let mut body = match self.declarations.get("init") {
            Some(d) => &d.body,
            None => return self.entry.clone(),
        };
        while let Agent::Hide { body: inner, .. } = body {
            body = inner;
        }
        body.clone()
    }

    /// Kind of a variable name: continuous when declared so or changed anywhere.
    pub fn kind_of(&self, x: &Var) -> Kind {
        if self.continuous_names().contains(x.base()) {
            Kind::Continuous
        } else {
            Kind::Discrete
        }
    }

    pub fn continuous_names(&self) -> BTreeSet<String> {
        fn walk(a: &Agent, out: &mut BTreeSet<String>) {
            match a {
                Agent::Change { var, .. } => {
                    out.insert(var.base().to_string());
                }
                Agent::Parallel(x, y) => {
                    walk(x, out);
                    walk(y, out);
                }
                Agent::Now { then, otherwise, .. } => {
                    walk(then, out);
                    walk(otherwise, out);
                }
                Agent::Hide { body, .. } => walk(body, out),
                Agent::Choice(bs) => {
                    for b in bs {
                        if let Branch::Ask(_, a) = b {
                            walk(a, out);
                        }
                    }
                }
                _ => {}
            }
        }
        let mut out: BTreeSet<String> = self.cvars.iter().map(|v| v.base().to_string()).collect();
        for d in self.declarations.values() {
            walk(&d.body, &mut out);
        }
        walk(&self.entry, &mut out);
        out
    }

    /// `name/arity` listing in name order.
    pub fn signatures(&self) -> Vec<String> {
        self.declarations.iter().map(|(n, d)| format!("{n}/{}", d.params.len())).collect()
    }
}
