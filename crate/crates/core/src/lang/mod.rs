//! Surface syntax for hy-tccp programs: `.hyt` source to [`Program`] and back.
//!
//! ```text
//! cooler(St, T) :- exists St1 (
//!     cask(St = [off|_] /\ T <= 30)
//!   + ask(St = [off|_] /\ T = 30) -> (tell(St = [off|St1]) || cooler(St1, T))
//! ).
//! ```

mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::{Agent, Branch, Declaration, Kind, Program, Setting};

use crate::constraints::{Atom, Constraint, Term, Var};
use parser::Parser;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: call to undeclared process {name}/{arity}")]
    UnboundProcess { name: String, arity: usize, line: usize, col: usize },
    #[error("{line}:{col}: {name} expects {expected} argument(s), got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize, line: usize, col: usize },
    #[error("variable {0} is used both as a discrete stream and as a continuous variable")]
    KindClash(String),
    #[error("no entry declaration init/0")]
    MissingEntry,
}

/// Parses a whole program; the entry agent is the call `init`.
pub fn parse(source: &str) -> Result<Program, LangError> {
    let mut p = Parser::new(source)?;
    let (declarations, cvars) = p.program()?;
    let program = Program { declarations, cvars, entry: Agent::call("init", &[]) };
    check_calls(&program, &p.calls)?;
    match program.declarations.get("init") {
        Some(d) if d.params.is_empty() => {}
        _ => return Err(LangError::MissingEntry),
    }
    check_kinds(&program)?;
    Ok(program)
}

/// Parses an agent to be run against `program`'s declarations.
pub fn parse_agent(source: &str, program: &Program) -> Result<Agent, LangError> {
    let mut p = Parser::new(source)?;
    let agent = p.agent()?;
    p.finish()?;
    check_calls(program, &p.calls)?;
    Ok(agent)
}

/// Parses a conjunction such as `x > 5 /\ St = [off|_] /\ go`.
pub fn parse_constraint(source: &str) -> Result<Constraint, LangError> {
    let mut p = Parser::new(source)?;
    let c = p.constraint()?;
    p.finish()?;
    Ok(c)
}

fn check_calls(program: &Program, calls: &[parser::CallSite]) -> Result<(), LangError> {
    for c in calls {
        match program.declarations.get(&c.name) {
            None => {
                return Err(LangError::UnboundProcess {
                    name: c.name.clone(),
                    arity: c.arity,
                    line: c.line,
                    col: c.col,
                })
            }
            Some(d) if d.params.len() != c.arity => {
                return Err(LangError::ArityMismatch {
                    name: c.name.clone(),
                    expected: d.params.len(),
                    found: c.arity,
                    line: c.line,
                    col: c.col,
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

fn check_kinds(program: &Program) -> Result<(), LangError> {
    fn term_vars(c: &Constraint, out: &mut BTreeSet<String>) {
        for a in c.atoms() {
            if let Atom::Eq(l, r) | Atom::Neq(l, r) = a {
                let structured = |t: &Term| t.is_constructor() || matches!(t, Term::Sym(_));
                if structured(l) || structured(r) {
                    let mut vs = BTreeSet::new();
                    l.vars_into(&mut vs);
                    r.vars_into(&mut vs);
                    out.extend(vs.iter().map(|v: &Var| v.base().to_string()));
                }
            }
        }
    }
    fn walk(a: &Agent, out: &mut BTreeSet<String>) {
        match a {
            Agent::Tell(c) => term_vars(c, out),
            Agent::Parallel(x, y) => {
                walk(x, out);
                walk(y, out);
            }
            Agent::Now { cond, then, otherwise } => {
                term_vars(cond, out);
                walk(then, out);
                walk(otherwise, out);
            }
            Agent::Hide { body, .. } => walk(body, out),
            Agent::Choice(bs) => {
                for b in bs {
                    match b {
                        Branch::Ask(c, body) => {
                            term_vars(c, out);
                            walk(body, out);
                        }
                        Branch::Cask(c) => term_vars(c, out),
                    }
                }
            }
            _ => {}
        }
    }
    let mut discrete = BTreeSet::new();
    for d in program.declarations.values() {
        walk(&d.body, &mut discrete);
    }
    let continuous = program.continuous_names();
    match discrete.intersection(&continuous).next() {
        Some(name) => Err(LangError::KindClash(name.clone())),
        None => Ok(()),
    }
}
