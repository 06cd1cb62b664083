use super::ast::{Agent, Branch, Program, Setting};
use crate::rational;
use std::fmt::{self, Write};

fn setting(s: &Setting) -> String {
    match s {
        Setting::Keep => "_".to_string(),
        Setting::To(r) => rational::render(r),
    }
}

/// Writes `a`; `primary` asks for parentheses around `||` and choices.
fn write_agent(out: &mut String, a: &Agent, primary: bool) {
    match a {
        Agent::Stop => out.push_str("stop"),
        Agent::Tell(c) => {
            let _ = write!(out, "tell({c})");
        }
        Agent::Parallel(l, r) => {
            if primary {
                out.push('(');
            }
            write_agent(out, l, false);
            out.push_str(" || ");
            write_agent(out, r, matches!(**r, Agent::Parallel(..)));
            if primary {
                out.push(')');
            }
        }
        Agent::Now { cond, then, otherwise } => {
            let _ = write!(out, "now {cond} then ");
            write_agent(out, then, true);
            out.push_str(" else ");
            write_agent(out, otherwise, true);
        }
        Agent::Hide { var, body, .. } => {
            let mut vars = vec![var.to_string()];
            let mut inner: &Agent = body;
            while let Agent::Hide { var, body, .. } = inner {
                vars.push(var.to_string());
                inner = body;
            }
            let _ = write!(out, "exists {} (", vars.join(", "));
            write_agent(out, inner, false);
            out.push(')');
        }
        Agent::Call { name, args } => {
            out.push_str(name);
            if !args.is_empty() {
                let args: Vec<String> = args.iter().map(|v| v.to_string()).collect();
                let _ = write!(out, "({})", args.join(", "));
            }
        }
        Agent::Change { var, value, flow } => {
            let _ = write!(out, "change({var}, {}, {})", setting(value), setting(flow));
        }
        Agent::Choice(branches) => {
            if primary {
                out.push('(');
            }
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                match b {
                    Branch::Ask(c, body) => {
                        let _ = write!(out, "ask({c}) -> ");
                        write_agent(out, body, true);
                    }
                    Branch::Cask(c) => {
                        let _ = write!(out, "cask({c})");
                    }
                }
            }
            if primary {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_agent(&mut s, self, false);
        f.write_str(&s)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.cvars.is_empty() {
            let names: Vec<String> = self.cvars.iter().map(|v| v.to_string()).collect();
            writeln!(f, "cvar {}.", names.join(", "))?;
        }
        for (name, d) in &self.declarations {
            f.write_str(name)?;
            if !d.params.is_empty() {
                let ps: Vec<String> = d.params.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", ps.join(", "))?;
            }
            writeln!(f, " :- {}.", d.body)?;
        }
        Ok(())
    }
}
