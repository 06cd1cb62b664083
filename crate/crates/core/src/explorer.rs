//! Resolving non-determinism: seeded single runs, bounded enumeration,
//! coalescing of continuous steps, and an independent trace checker.

use crate::constraints::{Constraint, Var};
use crate::engine::{Configuration, ContinuousOption, Engine, EngineError, StepLabel};
use crate::hstore::{HybridStore, MaxDuration};
use crate::lang::{Agent, Program};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Policy {
    /// Fire enabled discrete steps first, else advance to the earliest
    /// event; the seed picks among discrete successors.
    Urgent { seed: u64 },
    /// Let time pass as long as admissible before firing anything.
    Lazy { seed: u64 },
    /// Durations drawn from the events plus multiples of `step`.
    Random { seed: u64, step: Rational },
    /// Always the first option (leftmost path of the enumeration).
    Exhaustive { max_depth: usize, grid: Option<Rational> },
}

impl Policy {
    fn seed(&self) -> u64 {
        match self {
            Policy::Urgent { seed } | Policy::Lazy { seed } | Policy::Random { seed, .. } => *seed,
            Policy::Exhaustive { .. } => 0,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Urgent { seed } => write!(f, "urgent(seed={seed})"),
            Policy::Lazy { seed } => write!(f, "lazy(seed={seed})"),
            Policy::Random { seed, step } => write!(f, "random(seed={seed},step={})", rational::render(step)),
            Policy::Exhaustive { max_depth, grid } => match grid {
                Some(g) => write!(f, "exhaustive(depth={max_depth},grid={})", rational::render(g)),
                None => write!(f, "exhaustive(depth={max_depth})"),
            },
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Limits {
    pub max_steps: usize,
    pub max_time: Option<Rational>,
    pub max_depth: usize,
    /// Consecutive discrete steps allowed without time progress.
    pub zeno: usize,
    /// Extra duration grid for enumeration.
    pub grid: Option<Rational>,
    /// Cap on the number of enumerated traces.
    pub max_traces: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 10_000, max_time: None, max_depth: 40, zeno: 10_000, grid: None, max_traces: 100_000 }
    }
}

impl fmt::Display for Limits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let time = self.max_time.as_ref().map(rational::render).unwrap_or_else(|| "none".into());
        write!(f, "max_steps={} max_time={} max_depth={}", self.max_steps, time, self.max_depth)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Terminal {
    Success,
    Suspended,
    Inconsistent,
    LimitReached,
}

impl Terminal {
    pub fn as_str(self) -> &'static str {
        match self {
            Terminal::Success => "success",
            Terminal::Suspended => "suspended",
            Terminal::Inconsistent => "inconsistent",
            Terminal::LimitReached => "limit-reached",
        }
    }

    pub fn parse(s: &str) -> Option<Terminal> {
        [Terminal::Success, Terminal::Suspended, Terminal::Inconsistent, Terminal::LimitReached]
            .into_iter()
            .find(|t| t.as_str() == s)
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub label: StepLabel,
    /// Observable store after the step.
    pub store: HybridStore,
    /// `ask` guards fired by this step.
    pub fired: Vec<Constraint>,
    /// Full store (hidden variables included) after the step, when known.
    pub full: Option<HybridStore>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: HybridStore,
    pub initial_full: Option<HybridStore>,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn total_time(&self) -> Rational {
        self.steps.iter().filter_map(|s| s.label.duration()).fold(Rational::zero(), |acc, t| acc + t)
    }

    /// Cumulative time before each step and after the last one.
    pub fn times(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero()];
        let mut now = Rational::zero();
        for s in &self.steps {
            if let Some(t) = s.label.duration() {
                now += t;
            }
            out.push(now.clone());
        }
        out
    }

    /// Store after `i` steps (`0` is the initial store).
    pub fn store_at(&self, i: usize) -> &HybridStore {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].store
        }
    }

    pub fn final_store(&self) -> &HybridStore {
        self.store_at(self.steps.len())
    }

    /// Merges adjacent continuous steps into one of summed duration.
    pub fn coalesce(&self) -> Trace {
        let mut steps: Vec<TraceStep> = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            if let (Some(last), StepLabel::Continuous(t)) = (steps.last_mut(), &s.label) {
                if let StepLabel::Continuous(prev) = &last.label {
                    last.label = StepLabel::Continuous(prev + t);
                    last.store = s.store.clone();
                    last.full = s.full.clone();
                    continue;
                }
            }
            steps.push(s.clone());
        }
        Trace { steps, ..self.clone() }
    }

    /// Store-only behaviour: consecutive equal stores collapsed.
    pub fn behaviour(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for i in 0..=self.steps.len() {
            let r = self.store_at(i).render();
            if out.last() != Some(&r) {
                out.push(r);
            }
        }
        out
    }
}

fn tie_break(rng: &mut ChaCha8Rng, policy: &Policy, n: usize) -> usize {
    match policy {
        Policy::Exhaustive { .. } => 0,
        _ if n <= 1 => 0,
        _ => rng.gen_range(0..n),
    }
}

fn half(r: &Rational) -> Rational {
    r / Rational::from_integer(2.into())
}

/// Candidate durations for a continuous option: event times, the closed
/// bound, grid points, and the remaining time budget, all admissible.
pub fn duration_candidates(
    cfg: &Configuration,
    opt: &ContinuousOption,
    remaining: Option<&Rational>,
    grid: Option<&Rational>,
) -> Vec<Rational> {
    let admissible = |t: &Rational| opt.bound.admits(t) && remaining.is_none_or(|r| t <= r);
    let mut out: Vec<Rational> = cfg.store.all_event_times(&opt.guards).into_iter().filter(|t| admissible(t)).collect();
    let horizon = match &opt.bound {
        MaxDuration::PositiveBound { tau, strict } => {
            if !strict && admissible(tau) {
                out.push(tau.clone());
            }
            Some(tau.clone())
        }
        _ => None,
    };
    let limit = match (horizon, remaining) {
        (Some(h), Some(r)) => Some(if &h < r { h } else { r.clone() }),
        (Some(h), None) => Some(h),
        (None, r) => r.cloned(),
    };
    if let Some(r) = remaining {
        if admissible(r) {
            out.push(r.clone());
        }
    }
    if let Some(step) = grid.filter(|g| g.is_positive()) {
        let mut t = step.clone();
        let mut count = 0;
        while count < 1000 && limit.as_ref().is_none_or(|l| &t <= l) {
            if admissible(&t) {
                out.push(t.clone());
            }
            t += step;
            count += 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

fn pick_duration(
    policy: &Policy,
    cfg: &Configuration,
    opt: &ContinuousOption,
    remaining: Option<&Rational>,
    rng: &mut ChaCha8Rng,
) -> Option<Rational> {
    if remaining.is_some_and(|r| !r.is_positive()) {
        return None;
    }
    let grid = match policy {
        Policy::Random { step, .. } => Some(step),
        _ => None,
    };
    let mut cands = duration_candidates(cfg, opt, remaining, grid);
    if cands.is_empty() {
        // strict bound with nothing below it: approach halfway
        if let MaxDuration::PositiveBound { tau, strict: true } = &opt.bound {
            let t = half(tau);
            if remaining.is_none_or(|r| &t <= r) {
                cands.push(t);
            }
        }
    }
    if cands.is_empty() {
        return None;
    }
    match policy {
        Policy::Urgent { .. } | Policy::Exhaustive { .. } => cands.first().cloned(),
        Policy::Lazy { .. } => match &opt.bound {
            MaxDuration::PositiveBound { tau, strict: true } => {
                let below = cands.iter().rev().find(|t| *t < tau).cloned().unwrap_or_else(Rational::zero);
                let mid = half(&(below + tau));
                Some(match remaining {
                    Some(r) if r < &mid => r.clone(),
                    _ => mid,
                })
            }
            _ => cands.last().cloned(),
        },
        Policy::Random { .. } => {
            let i = rng.gen_range(0..cands.len());
            Some(cands[i].clone())
        }
    }
}

/// One run of `entry` from `init` under `policy`.
pub fn run(
    program: &Program,
    entry: &Agent,
    init: HybridStore,
    policy: &Policy,
    limits: &Limits,
) -> Result<Trace, EngineError> {
    if !init.is_consistent() {
        return Err(EngineError::InconsistentInitialStore);
    }
    let engine = Engine::new(program);
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed());
    let mut cfg = Configuration::new(entry.clone(), init);
    let mut trace =
        Trace { initial: cfg.observable(), initial_full: Some(cfg.store.clone()), steps: Vec::new(), terminal: Terminal::LimitReached };
    let mut elapsed = Rational::zero();
    let mut sigma_run = 0usize;
    trace.terminal = loop {
        if cfg.agent.is_stopped() {
            break Terminal::Success;
        }
        if trace.steps.len() >= limits.max_steps {
            break Terminal::LimitReached;
        }
        let succ = engine.successors(&cfg)?;
        if succ.blocked() {
            break Terminal::Suspended;
        }
        let remaining = limits.max_time.as_ref().map(|m| m - &elapsed);
        let tau = succ.continuous.as_ref().and_then(|c| pick_duration(policy, &cfg, c, remaining.as_ref(), &mut rng));
        let take_sigma = match (succ.discrete.is_empty(), tau.is_some()) {
            (false, false) => true,
            (true, true) => false,
            (true, false) => break Terminal::LimitReached,
            // urgent runs fire what is enabled, lazy ones let time pass
            (false, true) => match policy {
                Policy::Urgent { .. } | Policy::Exhaustive { .. } => true,
                Policy::Lazy { .. } => false,
                Policy::Random { .. } => rng.gen_bool(0.5),
            },
        };
        if take_sigma {
            sigma_run += 1;
            if sigma_run > limits.zeno {
                break Terminal::LimitReached;
            }
            let i = tie_break(&mut rng, policy, succ.discrete.len());
            let s = succ.discrete.into_iter().nth(i).expect("index in range");
            trace.steps.push(TraceStep {
                label: StepLabel::Discrete,
                store: s.config.observable(),
                fired: s.fired,
                full: Some(s.config.store.clone()),
            });
            if s.inconsistent {
                break Terminal::Inconsistent;
            }
            cfg = s.config;
        } else {
            let tau = tau.expect("checked above");
            let opt = succ.continuous.expect("checked above");
            sigma_run = 0;
            cfg = opt.advance(&cfg, &tau);
            elapsed += &tau;
            trace.steps.push(TraceStep {
                label: StepLabel::Continuous(tau),
                store: cfg.observable(),
                fired: Vec::new(),
                full: Some(cfg.store.clone()),
            });
        }
    };
    Ok(trace)
}

type Suffixes = Rc<Vec<(Vec<TraceStep>, Terminal)>>;

/// Maximal traces reachable within `limits.max_depth` steps, durations drawn
/// from event times, closed bounds and the optional grid. Every prefix of a
/// returned trace is itself a behaviour.
#[derive(Clone, Debug)]
pub struct Exploration {
    pub traces: Vec<Trace>,
    /// Some path was cut by the depth limit or the trace cap.
    pub truncated: bool,
}

impl Exploration {
    /// Distinct final observable stores with their trace counts.
    pub fn outcomes(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for t in &self.traces {
            *out.entry(t.final_store().render()).or_insert(0) += 1;
        }
        out
    }

    pub fn terminal_histogram(&self) -> BTreeMap<Terminal, usize> {
        let mut out = BTreeMap::new();
        for t in &self.traces {
            *out.entry(t.terminal).or_insert(0) += 1;
        }
        out
    }
}

struct Enumerator<'p> {
    engine: Engine<'p>,
    limits: &'p Limits,
    memo: HashMap<(String, usize), Suffixes>,
    produced: usize,
    truncated: bool,
}

impl Enumerator<'_> {
    fn explore(&mut self, cfg: &Configuration, depth: usize) -> Result<Suffixes, EngineError> {
        let key = (cfg.key(), depth);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut out = Vec::new();
        if cfg.agent.is_stopped() {
            out.push((Vec::new(), Terminal::Success));
        } else if depth == 0 || self.produced >= self.limits.max_traces {
            self.truncated = true;
            out.push((Vec::new(), Terminal::LimitReached));
        } else {
            let succ = self.engine.successors(cfg)?;
            let mut children: Vec<(TraceStep, Option<Configuration>)> = Vec::new();
            for s in succ.discrete {
                let step = TraceStep {
                    label: StepLabel::Discrete,
                    store: s.config.observable(),
                    fired: s.fired,
                    full: Some(s.config.store.clone()),
                };
                children.push((step, (!s.inconsistent).then_some(s.config)));
            }
            let mut dwell_without_events = false;
            if let Some(opt) = &succ.continuous {
                let cands = duration_candidates(cfg, opt, self.limits.max_time.as_ref(), self.limits.grid.as_ref());
                dwell_without_events = cands.is_empty();
                for tau in cands {
                    let next = opt.advance(cfg, &tau);
                    let step = TraceStep {
                        label: StepLabel::Continuous(tau),
                        store: next.observable(),
                        fired: Vec::new(),
                        full: Some(next.store.clone()),
                    };
                    children.push((step, Some(next)));
                }
            }
            if children.is_empty() {
                let tag = if dwell_without_events { Terminal::LimitReached } else { Terminal::Suspended };
                out.push((Vec::new(), tag));
            }
            for (step, next) in children {
                match next {
                    None => out.push((vec![step], Terminal::Inconsistent)),
                    Some(next) => {
                        for (rest, tag) in self.explore(&next, depth - 1)?.iter() {
                            let mut steps = Vec::with_capacity(rest.len() + 1);
                            steps.push(step.clone());
                            steps.extend(rest.iter().cloned());
                            out.push((steps, *tag));
                        }
                    }
                }
            }
        }
        self.produced = self.produced.max(out.len());
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Bounded enumeration of the small-step behaviours of `entry` from `init`.
pub fn enumerate(program: &Program, entry: &Agent, init: HybridStore, limits: &Limits) -> Result<Exploration, EngineError> {
    if !init.is_consistent() {
        return Err(EngineError::InconsistentInitialStore);
    }
    let cfg = Configuration::new(entry.clone(), init);
    let mut e = Enumerator { engine: Engine::new(program), limits, memo: HashMap::new(), produced: 0, truncated: false };
    let suffixes = e.explore(&cfg, limits.max_depth)?;
    let initial = cfg.observable();
    let traces = suffixes
        .iter()
        .map(|(steps, terminal)| Trace {
            initial: initial.clone(),
            initial_full: Some(cfg.store.clone()),
            steps: steps.clone(),
            terminal: *terminal,
        })
        .collect();
    Ok(Exploration { traces, truncated: e.truncated })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step}: {message}")]
pub struct Violation {
    pub step: usize,
    pub message: String,
}

/// Re-verifies a trace against the semantics, independently of the engine:
/// discrete steps only add information and fire entailed guards; continuous
/// steps keep the discrete store and move values exactly linearly.
pub fn check(trace: &Trace) -> Result<(), Violation> {
    for (i, step) in trace.steps.iter().enumerate() {
        let prev = trace.store_at(i);
        let fail = |message: String| Err(Violation { step: i + 1, message });
        match &step.label {
            StepLabel::Discrete => {
                if !step.store.discrete.entails(&prev.discrete) {
                    return fail(format!("discrete store shrank: {} after {}", step.store.discrete.render(), prev.discrete.render()));
                }
                let prev_full = if i == 0 { trace.initial_full.as_ref() } else { trace.steps[i - 1].full.as_ref() };
                if let Some(pf) = prev_full {
                    if let Some(g) = step.fired.iter().find(|g| !pf.entails(g)) {
                        return fail(format!("fired guard {g} was not entailed"));
                    }
                    if let Some(f) = &step.full {
                        // dead local variables are projected out between steps
                        let gone: BTreeSet<Var> = pf.discrete.vars().difference(&f.discrete.vars()).cloned().collect();
                        if !f.discrete.entails(&pf.discrete.hide_all(&gone)) {
                            return fail("full discrete store shrank".to_string());
                        }
                    }
                }
            }
            StepLabel::Continuous(tau) => {
                if !tau.is_positive() {
                    return fail(format!("non-positive duration {}", rational::render(tau)));
                }
                if step.store.discrete.render() != prev.discrete.render() {
                    return fail("continuous step changed the discrete store".to_string());
                }
                let mut expected = prev.continuous.clone();
                if let crate::cstore::ContinuousStore::Map(m) = &mut expected {
                    for e in m.values_mut() {
                        e.value = &e.value + &e.flow * tau;
                    }
                }
                if step.store.continuous != expected {
                    return fail(format!("values did not move linearly: {} from {}", step.store.continuous, prev.continuous));
                }
            }
        }
    }
    Ok(())
}
