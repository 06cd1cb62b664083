//! One-step successor derivation for hy-tccp configurations.
//!
//! Every agent reads the same input store and reports what it would add
//! (told constraints, continuous changes) rather than a whole new store; the
//! parallel composition then applies all contributions at once. This is the
//! maximal-parallelism reading of the rules: components never see each
//! other's writes inside a step, and two `change`s of one variable that
//! disagree make the successor inconsistent.
//!
//! Local variables are scoped by renaming: the first time `exists x (A)`
//! moves, `x` is replaced by a globally fresh name that is recorded as hidden
//! in the configuration. The full store therefore mentions hidden variables;
//! [`Configuration::observable`] projects them away.

use crate::constraints::{Constraint, Var};
use crate::cstore::{ContinuousStore, Entry};
use crate::hstore::{HybridStore, MaxDuration};
use crate::lang::{Agent, Branch, Program, Setting};
use crate::rational::{self, Rational};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("no declaration {0}/{1}")]
    MissingDeclaration(String, usize),
    #[error("change({0}, _, ..) keeps a value, but {0} has none in the continuous store")]
    NoCurrentValue(Var),
    #[error("the initial store is inconsistent")]
    InconsistentInitialStore,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum StepLabel {
    Discrete,
    Continuous(Rational),
}

impl StepLabel {
    pub fn duration(&self) -> Option<&Rational> {
        match self {
            StepLabel::Discrete => None,
            StepLabel::Continuous(t) => Some(t),
        }
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Discrete => f.write_str("sigma"),
            StepLabel::Continuous(t) => write!(f, "tau={}", rational::render(t)),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    pub agent: Agent,
    pub store: HybridStore,
    /// Fresh names introduced for opened `exists` blocks.
    pub hidden: BTreeSet<Var>,
    /// Next fresh-name counter.
    pub fresh: u64,
}

impl Configuration {
    pub fn new(agent: Agent, store: HybridStore) -> Self {
        Configuration { agent, store, hidden: BTreeSet::new(), fresh: 0 }
    }

    /// The global store with every hidden variable projected out.
    pub fn observable(&self) -> HybridStore {
        if self.hidden.is_empty() {
            return HybridStore::new(self.store.discrete.canonical(), self.store.continuous.clone());
        }
        HybridStore::new(
            self.store.discrete.hide_all(&self.hidden),
            self.store.continuous.restrict(|x| !self.hidden.contains(x)),
        )
    }

    /// Projects out hidden variables the agent no longer mentions; they
    /// cannot influence any later step, and dropping them keeps the store
    /// from growing with every recursive call.
    fn collect(mut self) -> Configuration {
        let mut live = BTreeSet::new();
        self.agent.vars_into(&mut live);
        let dead: BTreeSet<Var> = self.hidden.difference(&live).cloned().collect();
        if dead.is_empty() {
            return self;
        }
        self.store = HybridStore::new(
            self.store.discrete.hide_all(&dead),
            self.store.continuous.restrict(|x| !dead.contains(x)),
        );
        self.hidden.retain(|x| !dead.contains(x));
        self
    }

    /// Memoization key: agent text plus canonical store.
    pub fn key(&self) -> String {
        format!("{} @ {}", self.agent, self.store.render())
    }
}

/// A discrete move of one agent: its continuation and its contribution.
#[derive(Clone, Debug)]
pub struct Move {
    pub agent: Agent,
    pub told: Vec<Constraint>,
    pub changes: Vec<(Var, Entry)>,
    /// `ask` guards that were entailed to enable this move.
    pub fired: Vec<Constraint>,
    pub opened: Vec<Var>,
}

impl Move {
    fn to(agent: Agent) -> Move {
        Move { agent, told: Vec::new(), changes: Vec::new(), fired: Vec::new(), opened: Vec::new() }
    }

    fn join(mut self, other: Move, agent: Agent) -> Move {
        self.agent = agent;
        self.told.extend(other.told);
        self.changes.extend(other.changes);
        self.fired.extend(other.fired);
        self.opened.extend(other.opened);
        self
    }
}

/// The continuous capability of an agent.
#[derive(Clone, Debug)]
pub struct Dwell {
    pub bound: MaxDuration,
    /// The agent after any admissible duration.
    pub residual: Agent,
    /// Guards and invariants whose status changes mark events.
    pub guards: Vec<Constraint>,
    pub opened: Vec<Var>,
}

#[derive(Clone, Debug, Default)]
pub struct StepOptions {
    pub discrete: Vec<Move>,
    pub continuous: Option<Dwell>,
}

impl StepOptions {
    pub fn blocked(&self) -> bool {
        self.discrete.is_empty() && self.continuous.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Successor {
    pub config: Configuration,
    /// The told constraints or changes clashed with the store.
    pub inconsistent: bool,
    pub fired: Vec<Constraint>,
}

/// A global continuous option; instantiate it with [`ContinuousOption::advance`].
#[derive(Clone, Debug)]
pub struct ContinuousOption {
    pub bound: MaxDuration,
    pub guards: Vec<Constraint>,
    residual: Agent,
    opened: Vec<Var>,
    fresh: u64,
}

impl ContinuousOption {
    /// The configuration after dwelling `tau` from `from`.
    pub fn advance(&self, from: &Configuration, tau: &Rational) -> Configuration {
        let mut hidden = from.hidden.clone();
        hidden.extend(self.opened.iter().cloned());
        Configuration { agent: self.residual.clone(), store: from.store.project(tau), hidden, fresh: self.fresh }.collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Successors {
    pub discrete: Vec<Successor>,
    pub continuous: Option<ContinuousOption>,
}

impl Successors {
    pub fn blocked(&self) -> bool {
        self.discrete.is_empty() && self.continuous.is_none()
    }
}

pub struct Engine<'p> {
    program: &'p Program,
}

fn next(fresh: &mut u64) -> u64 {
    *fresh += 1;
    *fresh
}

impl<'p> Engine<'p> {
    pub fn new(program: &'p Program) -> Self {
        Engine { program }
    }

    pub fn program(&self) -> &Program {
        self.program
    }

    /// Options of one agent in `store`. Parallel nodes are composed
    /// recursively, so this also serves nested compositions.
    pub fn agent_options(&self, agent: &Agent, store: &HybridStore, fresh: &mut u64) -> Result<StepOptions, EngineError> {
        match agent {
            Agent::Stop => Ok(StepOptions::default()),
            Agent::Tell(c) => {
                let mut m = Move::to(Agent::Stop);
                m.told.push(c.clone());
                Ok(StepOptions { discrete: vec![m], continuous: None })
            }
            Agent::Change { var, value, flow } => {
                let current = store.continuous.get(var);
                let pick = |s: &Setting, old: Option<&Rational>| match s {
                    Setting::To(v) => Ok(v.clone()),
                    Setting::Keep => old.cloned().ok_or_else(|| EngineError::NoCurrentValue(var.clone())),
                };
                let entry = Entry::new(pick(value, current.map(|e| &e.value))?, pick(flow, current.map(|e| &e.flow))?);
                let mut m = Move::to(Agent::Stop);
                m.changes.push((var.clone(), entry));
                Ok(StepOptions { discrete: vec![m], continuous: None })
            }
            Agent::Call { name, args } => {
                let decl = self
                    .program
                    .declarations
                    .get(name)
                    .filter(|d| d.params.len() == args.len())
                    .ok_or_else(|| EngineError::MissingDeclaration(name.clone(), args.len()))?;
                let env: BTreeMap<Var, Var> = decl.params.iter().cloned().zip(args.iter().cloned()).collect();
                let mut locals = BTreeMap::new();
                let body = freshen(&decl.body, &env, &mut locals, fresh);
                Ok(StepOptions { discrete: vec![Move::to(body)], continuous: None })
            }
            Agent::Choice(branches) => {
                let mut discrete = Vec::new();
                let mut bound = MaxDuration::None;
                let mut guards = Vec::new();
                for b in branches {
                    match b {
                        Branch::Ask(c, body) => {
                            guards.push(c.clone());
                            if store.entails(c) {
                                let mut m = Move::to(body.clone());
                                m.fired.push(c.clone());
                                discrete.push(m);
                            }
                        }
                        Branch::Cask(inv) => {
                            guards.push(inv.clone());
                            bound = bound.join(&store.max_duration(inv));
                        }
                    }
                }
                let continuous = (!bound.is_none()).then(|| Dwell {
                    bound,
                    residual: agent.clone(),
                    guards,
                    opened: Vec::new(),
                });
                Ok(StepOptions { discrete, continuous })
            }
            Agent::Now { cond, then, otherwise } => {
                let holds = store.entails(cond);
                let chosen: &Agent = if holds { then } else { otherwise };
                let mut opts = self.agent_options(chosen, store, fresh)?;
                if opts.blocked() {
                    // the condition is decided now even though the branch cannot move
                    return Ok(StepOptions { discrete: vec![Move::to(chosen.clone())], continuous: None });
                }
                if let Some(d) = &mut opts.continuous {
                    d.guards.push(cond.clone());
                    if let Some(e) = store.all_event_times(std::slice::from_ref(cond)).into_iter().next() {
                        let flips_at_e = store.project(&e).entails(cond) != holds;
                        d.bound = d.bound.meet(&MaxDuration::PositiveBound { tau: e, strict: flips_at_e });
                    }
                }
                Ok(opts)
            }
            Agent::Hide { var, body, .. } => {
                let x = var.freshened(next(fresh));
                let renamed = body.rename(&|v| (v == var).then(|| x.clone()));
                let mut opts = self.agent_options(&renamed, store, fresh)?;
                for m in &mut opts.discrete {
                    m.opened.push(x.clone());
                }
                if let Some(d) = &mut opts.continuous {
                    d.opened.push(x.clone());
                }
                Ok(opts)
            }
            Agent::Parallel(a, b) => {
                let oa = self.agent_options(a, store, fresh)?;
                let ob = self.agent_options(b, store, fresh)?;
                Ok(compose(a, b, oa, ob))
            }
        }
    }

    /// All global successors of `cfg`: every maximal-parallel discrete step
    /// plus, when time may pass, the admissible continuous option.
    pub fn successors(&self, cfg: &Configuration) -> Result<Successors, EngineError> {
        let mut fresh = cfg.fresh;
        let opts = self.agent_options(&cfg.agent, &cfg.store, &mut fresh)?;
        let discrete = opts.discrete.into_iter().map(|m| apply(cfg, m, fresh)).collect();
        let continuous = opts.continuous.map(|d| ContinuousOption {
            bound: d.bound,
            guards: d.guards,
            residual: d.residual,
            opened: d.opened,
            fresh,
        });
        Ok(Successors { discrete, continuous })
    }
}

/// Maximal parallelism: every side with a discrete move fires; time passes
/// only if each side can dwell or is blocked.
/// `a || b` with terminated sides dropped (`stop || A` behaves as `A`).
fn par_live(a: Agent, b: Agent) -> Agent {
    match (a, b) {
        (Agent::Stop, x) | (x, Agent::Stop) => x,
        (a, b) => Agent::par(a, b),
    }
}

fn compose(a: &Agent, b: &Agent, oa: StepOptions, ob: StepOptions) -> StepOptions {
    let a_only_discrete = !oa.discrete.is_empty() && oa.continuous.is_none();
    let b_only_discrete = !ob.discrete.is_empty() && ob.continuous.is_none();
    let mut discrete = Vec::new();
    match (oa.discrete.is_empty(), ob.discrete.is_empty()) {
        (true, true) => {}
        (false, true) => {
            for m in oa.discrete {
                let agent = par_live(m.agent.clone(), b.clone());
                discrete.push(Move { agent, ..m });
            }
        }
        (true, false) => {
            for m in ob.discrete {
                let agent = par_live(a.clone(), m.agent.clone());
                discrete.push(Move { agent, ..m });
            }
        }
        (false, false) => {
            for ma in &oa.discrete {
                for mb in &ob.discrete {
                    let agent = par_live(ma.agent.clone(), mb.agent.clone());
                    discrete.push(ma.clone().join(mb.clone(), agent));
                }
            }
        }
    }
    let continuous = if a_only_discrete || b_only_discrete {
        None
    } else {
        match (oa.continuous, ob.continuous) {
            (None, None) => None,
            (Some(da), None) => Some(Dwell { residual: par_live(da.residual, b.clone()), ..da }),
            (None, Some(db)) => Some(Dwell { residual: par_live(a.clone(), db.residual), ..db }),
            (Some(da), Some(db)) => {
                let bound = da.bound.meet(&db.bound);
                let mut guards = da.guards;
                guards.extend(db.guards);
                let mut opened = da.opened;
                opened.extend(db.opened);
                (!bound.is_none()).then(|| Dwell { bound, residual: par_live(da.residual, db.residual), guards, opened })
            }
        }
    };
    StepOptions { discrete, continuous }
}

fn apply(cfg: &Configuration, m: Move, fresh: u64) -> Successor {
    let mut atoms = Vec::new();
    let mut falsum = false;
    for c in &m.told {
        match c {
            Constraint::False => falsum = true,
            Constraint::Atoms(a) => atoms.extend(a.iter().cloned()),
        }
    }
    let discrete = if falsum {
        Constraint::False
    } else if atoms.is_empty() {
        cfg.store.discrete.clone()
    } else {
        cfg.store.discrete.conjoin(&Constraint::from_atoms(atoms))
    };
    let mut delta = ContinuousStore::truth();
    for (x, e) in &m.changes {
        delta = delta.merge(&ContinuousStore::singleton(x.clone(), e.value.clone(), e.flow.clone()));
    }
    let continuous = if delta.is_false() { ContinuousStore::False } else { cfg.store.continuous.update(&delta) };
    let store = HybridStore::new(discrete, continuous);
    let inconsistent = store.discrete.is_false() || store.continuous.is_false() || !store.is_consistent();
    let mut hidden = cfg.hidden.clone();
    hidden.extend(m.opened);
    let config = Configuration { agent: m.agent, store, hidden, fresh };
    let config = if inconsistent { config } else { config.collect() };
    Successor { config, inconsistent, fired: m.fired }
}

/// Instantiates a declaration body: parameters become the arguments, every
/// other variable (free locals, `_`, and `exists` binders) gets a fresh name.
fn freshen(a: &Agent, env: &BTreeMap<Var, Var>, locals: &mut BTreeMap<Var, Var>, fresh: &mut u64) -> Agent {
    fn lookup(v: &Var, env: &BTreeMap<Var, Var>, locals: &mut BTreeMap<Var, Var>, fresh: &mut u64) -> Var {
        if let Some(x) = env.get(v) {
            return x.clone();
        }
        locals.entry(v.clone()).or_insert_with(|| v.freshened(next(fresh))).clone()
    }
    let rename_constraint = |c: &Constraint, locals: &mut BTreeMap<Var, Var>, fresh: &mut u64| -> Constraint {
        let map: BTreeMap<Var, Var> = c.vars().into_iter().map(|v| (v.clone(), lookup(&v, env, locals, fresh))).collect();
        c.rename(&|v| map.get(v).cloned())
    };
    match a {
        Agent::Stop => Agent::Stop,
        Agent::Tell(c) => Agent::Tell(rename_constraint(c, locals, fresh)),
        Agent::Now { cond, then, otherwise } => {
            let cond = rename_constraint(cond, locals, fresh);
            Agent::now(cond, freshen(then, env, locals, fresh), freshen(otherwise, env, locals, fresh))
        }
        Agent::Choice(bs) => {
            let mut out = Vec::with_capacity(bs.len());
            for b in bs {
                out.push(match b {
                    Branch::Ask(c, body) => {
                        let c = rename_constraint(c, locals, fresh);
                        Branch::Ask(c, freshen(body, env, locals, fresh))
                    }
                    Branch::Cask(c) => Branch::Cask(rename_constraint(c, locals, fresh)),
                });
            }
            Agent::Choice(out)
        }
        Agent::Call { name, args } => {
            let args = args.iter().map(|v| lookup(v, env, locals, fresh)).collect();
            Agent::Call { name: name.clone(), args }
        }
        Agent::Change { var, value, flow } => {
            Agent::Change { var: lookup(var, env, locals, fresh), value: value.clone(), flow: flow.clone() }
        }
        Agent::Parallel(x, y) => Agent::par(freshen(x, env, locals, fresh), freshen(y, env, locals, fresh)),
        Agent::Hide { var, body, local } => {
            let x = var.freshened(next(fresh));
            let mut inner = env.clone();
            inner.insert(var.clone(), x.clone());
            Agent::Hide { var: x, body: Box::new(freshen(body, &inner, locals, fresh)), local: local.clone() }
        }
    }
}
