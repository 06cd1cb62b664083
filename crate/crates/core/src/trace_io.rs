//! Trace documents: line-delimited JSON for golden files and diffing, an
//! aligned text view for people, and piecewise-linear CSV samples for plots.
//!
//! Exact rationals are authoritative (`num`/`den`); `dec` fields are a
//! 20-significant-digit display aid only.

use crate::constraints::{normalize_anonymous, Var};
use crate::cstore::{ContinuousStore, Entry};
use crate::engine::StepLabel;
use crate::explorer::{Terminal, Trace, TraceStep};
use crate::hstore::HybridStore;
use crate::lang::{self, LangError};
use crate::rational::{self, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("bad constraint in trace: {0}")]
    Constraint(#[from] LangError),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Number {
    pub num: String,
    pub den: String,
    pub dec: String,
}

impl Number {
    pub fn new(r: &Rational) -> Self {
        Number { num: r.numer().to_string(), den: r.denom().to_string(), dec: rational::decimal20(r) }
    }

    pub fn exact(&self) -> Option<Rational> {
        let n = BigInt::from_str(&self.num).ok()?;
        let d = BigInt::from_str(&self.den).ok()?;
        (!d.is_zero()).then(|| Rational::new(n, d))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct EntryRecord {
    pub var: String,
    pub value: Number,
    pub flow: Number,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct StoreRecord {
    pub discrete: String,
    /// `None` for the inconsistent continuous store.
    pub continuous: Option<Vec<EntryRecord>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub program: String,
    pub sha256: String,
    pub policy: String,
    pub limits: String,
    pub initial: StoreRecord,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub index: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<Number>,
    /// Cumulative time after the step.
    pub time: Number,
    pub store: StoreRecord,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub fired: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Footer {
    pub terminal: String,
    pub steps: usize,
    pub total_time: Number,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record {
    Header(Header),
    Step(StepRecord),
    End(Footer),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceDocument {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    pub footer: Footer,
}

/// Where a trace came from, for the document header.
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub program: String,
    pub source: String,
    pub policy: String,
    pub limits: String,
}

/// Canonical, fresh-name independent rendering of a hybrid store.
pub fn render_store(s: &HybridStore) -> String {
    s.render()
}

fn store_record(s: &HybridStore) -> StoreRecord {
    let continuous = match &s.continuous {
        ContinuousStore::False => None,
        c => Some(
            c.entries()
                .map(|(x, e)| EntryRecord { var: x.to_string(), value: Number::new(&e.value), flow: Number::new(&e.flow) })
                .collect(),
        ),
    };
    StoreRecord { discrete: s.discrete.render(), continuous }
}

pub fn sha256_hex(source: &str) -> String {
    format!("{:x}", Sha256::digest(source.as_bytes()))
}

/// Structured form of `trace`.
pub fn to_document(trace: &Trace, prov: &Provenance) -> TraceDocument {
    let times = trace.times();
    let steps = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| StepRecord {
            index: i + 1,
            label: match s.label {
                StepLabel::Discrete => "sigma".into(),
                StepLabel::Continuous(_) => "tau".into(),
            },
            tau: s.label.duration().map(Number::new),
            time: Number::new(&times[i + 1]),
            store: store_record(&s.store),
            fired: s.fired.iter().map(|g| normalize_anonymous(&g.to_string())).collect(),
        })
        .collect();
    TraceDocument {
        header: Header {
            program: prov.program.clone(),
            sha256: sha256_hex(&prov.source),
            policy: prov.policy.clone(),
            limits: prov.limits.clone(),
            initial: store_record(&trace.initial),
        },
        steps,
        footer: Footer {
            terminal: trace.terminal.as_str().into(),
            steps: trace.steps.len(),
            total_time: Number::new(&trace.total_time()),
        },
    }
}

impl TraceDocument {
    /// One JSON record per line: header, steps, end.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut line = |r: &Record| {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        };
        line(&Record::Header(self.header.clone()));
        for s in &self.steps {
            line(&Record::Step(s.clone()));
        }
        line(&Record::End(self.footer.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<TraceDocument, TraceIoError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut footer = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let malformed = |message: &str| TraceIoError::Malformed { line, message: message.into() };
            if footer.is_some() {
                return Err(malformed("record after end"));
            }
            match serde_json::from_str(raw).map_err(|source| TraceIoError::Json { line, source })? {
                Record::Header(h) if header.is_none() => header = Some(h),
                Record::Header(_) => return Err(malformed("duplicate header")),
                Record::Step(_) if header.is_none() => return Err(malformed("step before header")),
                Record::Step(s) => steps.push(s),
                Record::End(f) => footer = Some(f),
            }
        }
        let eof = text.lines().count();
        let header = header.ok_or(TraceIoError::Malformed { line: eof, message: "missing header".into() })?;
        let footer = footer.ok_or(TraceIoError::Malformed { line: eof, message: "missing end record".into() })?;
        Ok(TraceDocument { header, steps, footer })
    }

    /// Rebuilds the trace (observable stores only).
    pub fn to_trace(&self) -> Result<Trace, TraceIoError> {
        let initial = parse_store(&self.header.initial, 1)?;
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let line = i + 2;
            let label = match (s.label.as_str(), &s.tau) {
                ("sigma", None) => StepLabel::Discrete,
                ("tau", Some(t)) => StepLabel::Continuous(exact(t, line)?),
                _ => return Err(TraceIoError::Malformed { line, message: format!("bad label {}", s.label) }),
            };
            let fired = s.fired.iter().map(|g| lang::parse_constraint(g)).collect::<Result<_, _>>()?;
            steps.push(TraceStep { label, store: parse_store(&s.store, line)?, fired, full: None });
        }
        let line = self.steps.len() + 2;
        let terminal = Terminal::parse(&self.footer.terminal)
            .ok_or_else(|| TraceIoError::Malformed { line, message: format!("unknown terminal {}", self.footer.terminal) })?;
        Ok(Trace { initial, initial_full: None, steps, terminal })
    }
}

fn exact(n: &Number, line: usize) -> Result<Rational, TraceIoError> {
    n.exact().ok_or_else(|| TraceIoError::Malformed { line, message: format!("bad number {}/{}", n.num, n.den) })
}

fn parse_store(r: &StoreRecord, line: usize) -> Result<HybridStore, TraceIoError> {
    let discrete = lang::parse_constraint(&r.discrete)?;
    let continuous = match &r.continuous {
        None => ContinuousStore::False,
        Some(entries) => {
            let mut out = Vec::with_capacity(entries.len());
            for e in entries {
                out.push((Var::new(&e.var), Entry::new(exact(&e.value, line)?, exact(&e.flow, line)?)));
            }
            ContinuousStore::from_entries(out)
        }
    };
    Ok(HybridStore::new(discrete, continuous))
}

/// Aligned human-readable listing.
pub fn to_text(trace: &Trace) -> String {
    let times = trace.times();
    let mut rows: Vec<[String; 4]> = vec![["#".into(), "time".into(), "step".into(), "store".into()]];
    rows.push(["0".into(), "0".into(), "".into(), render_store(&trace.initial)]);
    for (i, s) in trace.steps.iter().enumerate() {
        rows.push([(i + 1).to_string(), rational::render(&times[i + 1]), s.label.to_string(), render_store(&s.store)]);
    }
    let w: Vec<usize> = (0..3).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let _ = writeln!(out, "{:>w0$}  {:>w1$}  {:<w2$}  {}", r[0], r[1], r[2], r[3], w0 = w[0], w1 = w[1], w2 = w[2]);
    }
    let _ = writeln!(out, "terminal: {}, total time {}", trace.terminal, rational::render(&trace.total_time()));
    out
}

/// One point of a sampled trajectory; event rows of stores without
/// continuous variables carry no variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub time: Rational,
    pub var: Option<Var>,
    pub value: Option<Rational>,
}

/// Piecewise-linear samples at every multiple of `step` and at every step
/// boundary, computed exactly from the stored values and flows.
pub fn to_samples(trace: &Trace, step: &Rational) -> Vec<Sample> {
    assert!(step.is_positive(), "sampling step must be positive");
    let times = trace.times();
    let mut out: Vec<Sample> = Vec::new();
    let push = |out: &mut Vec<Sample>, time: &Rational, store: &ContinuousStore| {
        let before = out.len();
        for (x, e) in store.entries() {
            let s = Sample { time: time.clone(), var: Some(x.clone()), value: Some(e.value.clone()) };
            if !out.iter().rev().take_while(|p| p.time == *time).any(|p| p == &s) {
                out.push(s);
            }
        }
        if out.len() == before && store.is_empty() {
            let s = Sample { time: time.clone(), var: None, value: None };
            if out.last() != Some(&s) {
                out.push(s);
            }
        }
    };
    let mut grid = step.clone();
    for i in 0..=trace.steps.len() {
        let at = &times[i];
        let store = &trace.store_at(i).continuous;
        push(&mut out, at, store);
        if let Some(StepLabel::Continuous(tau)) = trace.steps.get(i).map(|s| &s.label) {
            let end = at + tau;
            while grid <= *at {
                grid += step;
            }
            while grid < end {
                push(&mut out, &grid, &store.project(&(&grid - at)));
                grid += step;
            }
        }
    }
    out
}

pub fn samples_csv(samples: &[Sample]) -> String {
    let mut out = String::from("time,variable,value,time_decimal,value_decimal\n");
    for s in samples {
        let var = s.var.as_ref().map(|v| v.to_string()).unwrap_or_default();
        let (value, value_dec) = match &s.value {
            Some(v) => (rational::render(v), rational::decimal20(v)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{},{}", rational::render(&s.time), var, value, rational::decimal20(&s.time), value_dec);
    }
    out
}
