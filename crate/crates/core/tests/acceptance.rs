// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

mod common;

use common::{conj, oracle_entails, oracle_sat, LinAtom};
use hytccp::constraints::{Constraint, Rel, Var};
use hytccp::corpus;
use hytccp::cstore::ContinuousStore;
use hytccp::explorer::{self, Limits, Policy, Trace};
use hytccp::hstore::{HybridStore, MaxDuration};
use hytccp::lang::{self, parse_constraint};
use hytccp::rational::{int, ratio, render, Rational};
use hytccp::trace_io::{self, Provenance, TraceDocument};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(text: &str) -> Constraint {
    parse_constraint(text).expect("test constraint parses")
}

fn value_of(s: &HybridStore, x: &str) -> Option<(Rational, Rational)> {
    s.continuous.get(&Var::new(x)).map(|e| (e.value.clone(), e.flow.clone()))
}

// ---------------------------------------------------------------- 1

/// Closed form of the cooler: from (off, 29, +2) the stores visited, each
/// as (stream of modes, T, flow), ignoring how many steps revisit them.
fn cooler_oracle(switches: usize) -> (Vec<(Vec<&'static str>, Rational, Rational)>, Vec<Rational>) {
    let (lo, hi) = (int(26), int(30));
    let mut modes = vec!["off"];
    let (mut t, mut flow) = (int(29), int(2));
    let mut stores = vec![(modes.clone(), t.clone(), flow.clone())];
    let mut dwell = Vec::new();
    for _ in 0..switches {
        let target = if flow > Rational::zero() { hi.clone() } else { lo.clone() };
        dwell.push((&target - &t) / &flow);
        t = target;
        stores.push((modes.clone(), t.clone(), flow.clone()));
        let on = *modes.last().unwrap() == "off";
        modes.push(if on { "on" } else { "off" });
        flow = if on { ratio(-1, 2) } else { int(2) };
        stores.push((modes.clone(), t.clone(), flow.clone()));
    }
    (stores, dwell)
}

fn criterion_1(traces: &mut Vec<(String, Trace)>) -> Outcome {
    let s = corpus::cooler().map_err(|e| e.to_string())?;
    let (expected, dwell) = cooler_oracle(6);
    let horizon: Rational = dwell.iter().sum();
    let limits = Limits { max_time: Some(horizon.clone()), ..Limits::default() };
    let trace = explorer::run(&s.program, &s.entry, s.store, &Policy::Urgent { seed: 0 }, &limits)
        .map_err(|e| e.to_string())?;

    let taus: Vec<Rational> = trace.coalesce().steps.iter().filter_map(|s| s.label.duration().cloned()).collect();
    ensure(taus == dwell, || format!("durations {:?}, expected {:?}", strs(&taus), strs(&dwell)))?;
    ensure(dwell[..6] == [ratio(1, 2), int(8), int(2), int(8), int(2), int(8)], || "oracle period".into())?;

    // stores modulo stuttering
    let bounds = c("T >= 26 /\\ T <= 30");
    let mut seen: Vec<(Vec<String>, Rational, Rational)> = Vec::new();
    for i in 0..=trace.steps.len() {
        let st = trace.store_at(i);
        ensure(st.discrete.entails(&bounds), || format!("step {i}: bounds lost"))?;
        let (v, f) = value_of(st, "T").ok_or(format!("step {i}: T missing"))?;
        let item = (common::stream(&st.discrete.render(), "St"), v, f);
        if seen.last() != Some(&item) {
            seen.push(item);
        }
    }
    let want: Vec<(Vec<String>, Rational, Rational)> =
        expected.iter().map(|(m, v, f)| (m.iter().map(|s| s.to_string()).collect(), v.clone(), f.clone())).collect();
    ensure(seen == want, || format!("stores differ: got {} distinct, expected {}", seen.len(), want.len()))?;

    // σ-structure at each switch: unchanged-store steps, then the extension
    let mut stutters_before = Vec::new();
    let mut stutters_after = Vec::new();
    let labels: Vec<(bool, String)> = trace.steps.iter().map(|s| (s.label.duration().is_some(), s.store.render())).collect();
    let mut i = 0;
    while i < labels.len() {
        if labels[i].0 {
            let mut j = i + 1;
            let (mut before, mut after, mut extended) = (0, 0, false);
            while j < labels.len() && !labels[j].0 {
                let same = labels[j].1 == labels[j - 1].1;
                match (same, extended) {
                    (true, false) => before += 1,
                    (true, true) => after += 1,
                    (false, _) => extended = true,
                }
                j += 1;
            }
            if extended {
                stutters_before.push(before);
                stutters_after.push(after);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    ensure(stutters_before.len() == 6 && stutters_before.iter().all(|b| *b >= 1), || {
        format!("switch structure {stutters_before:?}")
    })?;
    traces.push(("cooler".into(), trace));
    Ok(format!(
        "durations 1/2,8,2,8,2,8 exact; {} stores match modulo stuttering; \
         unchanged σ per switch: {} before + {} after the extension (published trace: 1 + 1)",
        want.len(),
        stutters_before[0],
        stutters_after[0]
    ))
}

fn strs(v: &[Rational]) -> Vec<String> {
    v.iter().map(render).collect()
}

// ---------------------------------------------------------------- 2

fn first_entailing(trace: &Trace, goal: &Constraint) -> Option<Rational> {
    let times = trace.times();
    (0..=trace.steps.len()).find(|i| trace.store_at(*i).entails(goal)).map(|i| times[i].clone())
}

fn criterion_2(traces: &mut Vec<(String, Trace)>) -> Outcome {
    let s = corpus::catmouse().map_err(|e| e.to_string())?;
    // closed-form kinematics: mouse 10 m/s from 0, go at 50 m; cat 20 m/s from go
    let (vm, vc, half, length) = (int(10), int(20), int(50), int(100));
    let t_go = &half / &vm;
    let t_mouse = &length / &vm;
    let t_cat = &t_go + &length / &vc;

    let limits = Limits { max_steps: 500, ..Limits::default() };
    let trace = explorer::run(&s.program, &s.entry, s.store.clone(), &Policy::Urgent { seed: 0 }, &limits)
        .map_err(|e| e.to_string())?;
    let go = first_entailing(&trace, &c("go"));
    let end_m = first_entailing(&trace, &c("end_m"));
    let end_c = first_entailing(&trace, &c("end_c"));
    ensure(go.as_ref() == Some(&t_go), || format!("go at {go:?}"))?;
    ensure(end_m.as_ref() == Some(&t_mouse), || format!("end_m at {end_m:?}"))?;
    ensure(end_c.as_ref() == Some(&t_cat), || format!("end_c at {end_c:?}"))?;
    traces.push(("catmouse".into(), trace));

    let ex = explorer::enumerate(&s.program, &s.entry, s.store, &Limits { max_depth: 40, ..Limits::default() })
        .map_err(|e| e.to_string())?;
    let (win_m, win_c) = (c("win_m"), c("win_c"));
    let mut classes = std::collections::BTreeSet::new();
    for t in &ex.traces {
        ensure(t.total_time() >= t_mouse, || format!("a trace stops at {}", render(&t.total_time())))?;
        let f = t.final_store();
        let (m, k) = (f.entails(&win_m), f.entails(&win_c));
        ensure(!(m && k), || "both winners".into())?;
        classes.insert((m, k));
    }
    let outcomes = ex.outcomes();
    ensure(classes == [(false, true), (true, false)].into(), || format!("classes {classes:?}"))?;
    ensure(outcomes.len() == 2, || format!("{} outcome classes", outcomes.len()))?;
    for t in ex.traces.iter().take(2) {
        traces.push(("catmouse/explore".into(), t.clone()));
    }
    Ok(format!(
        "go at {}, end_m and end_c at {}; {} traces, 2 outcome classes (win_m | win_c), none both",
        render(&t_go),
        render(&t_mouse),
        ex.traces.len()
    ))
}

// ---------------------------------------------------------------- 3

fn criterion_3(traces: &mut Vec<(String, Trace)>) -> Outcome {
    let s = corpus::gear().map_err(|e| e.to_string())?;
    let (lo, hi) = (int(0), int(100));
    let limits = Limits { max_time: Some(int(60)), max_steps: 400, ..Limits::default() };
    let (mut points, mut samples, mut ups, mut downs, mut danger) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let (mut reached_down2, mut latest) = (0usize, Rational::zero());
    for seed in 0..50u64 {
        let policy = Policy::Random { seed, step: int(1) };
        let trace = explorer::run(&s.program, &s.entry, s.store.clone(), &policy, &limits).map_err(|e| e.to_string())?;
        for i in 0..=trace.steps.len() {
            if let Some((v, _)) = value_of(trace.store_at(i), "V") {
                points += 1;
                ensure(v >= lo && v <= hi, || format!("seed {seed} step {i}: V = {}", render(&v)))?;
            }
        }
        for (i, step) in trace.steps.iter().enumerate() {
            let prev = trace.store_at(i);
            match step.label.duration() {
                Some(tau) => {
                    let (v0, f) = value_of(prev, "V").ok_or("V missing before a continuous step")?;
                    for k in 0..1000 {
                        let t = tau * ratio(k, 999);
                        let v = &v0 + &f * t;
                        samples += 1;
                        ensure(v >= lo && v <= hi, || format!("seed {seed} step {}: V = {} inside", i + 1, render(&v)))?;
                    }
                }
                None => {
                    let before = common::stream(&prev.discrete.render(), "G");
                    let after = common::stream(&step.store.discrete.render(), "G");
                    if after.len() == before.len() + 1 && !before.is_empty() {
                        let (from, to) = (before.last().unwrap().as_str(), after.last().unwrap().as_str());
                        let v = value_of(prev, "V").map(|(v, _)| v).ok_or("V missing at a shift")?;
                        let need = match (from, to) {
                            ("up1", "up2") => Some(int(20)),
                            ("up2", "up3") => Some(int(60)),
                            ("down2", "down1") => Some(int(20)),
                            _ => None,
                        };
                        match need {
                            Some(n) => {
                                ensure(v == n, || format!("seed {seed}: {from}->{to} at V = {}", render(&v)))?;
                                if to.starts_with("up") {
                                    ups += 1
                                } else {
                                    downs += 1
                                }
                            }
                            None => danger += 1,
                        }
                    }
                }
            }
        }
        if common::stream(&trace.final_store().discrete.render(), "G").iter().any(|g| g == "down2") {
            reached_down2 += 1;
        }
        latest = latest.max(trace.total_time());
        if seed < 5 {
            traces.push((format!("gear/{seed}"), trace));
        }
    }
    Ok(format!(
        "50 runs (latest time reached {}), {points} points + {samples} samples within [0,100]; \
         {ups} upshifts at V in {{20,60}}, {downs} downshifts 2->1 at V = 20 ({reached_down2} runs reach down2), \
         {danger} danger-triggered shifts",
        render(&latest)
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = common::rng(4);
    let n = 500;
    let eq = |a: &Constraint, b: &Constraint| a.equivalent(b);
    let (mut laws, mut entailed_pairs) = (0usize, 0usize);
    for i in 0..n {
        let (a, b, d) = (common::random_constraint(&mut rng), common::random_constraint(&mut rng), common::random_constraint(&mut rng));
        let (x, y) = (common::random_var(&mut rng), common::random_var(&mut rng));
        let fail = |law: &str| format!("instance {i}: {law} fails for {a} / {b} / {d} with {x}, {y}");
        // cylindric axioms
        ensure(a.entails(&a.hide(&x)), || fail("(a) c |- Ex c"))?;
        let weaker = Constraint::from_atoms(a.atoms().iter().filter(|_| rng.gen_bool(0.5)).cloned().collect());
        let sub = if a.is_false() { b.clone() } else { weaker };
        if a.entails(&sub) {
            entailed_pairs += 1;
            ensure(a.hide(&x).entails(&sub.hide(&x)), || fail("(b) monotonicity"))?;
        }
        if a.entails(&b) {
            ensure(a.hide(&x).entails(&b.hide(&x)), || fail("(b) monotonicity"))?;
        }
        ensure(eq(&a.conjoin(&b.hide(&x)).hide(&x), &a.hide(&x).conjoin(&b.hide(&x))), || fail("(c)"))?;
        ensure(eq(&a.hide(&y).hide(&x), &a.hide(&x).hide(&y)), || fail("(d)"))?;
        // lattice
        ensure(eq(&a.conjoin(&b), &b.conjoin(&a)), || fail("commutativity"))?;
        ensure(eq(&a.conjoin(&b).conjoin(&d), &a.conjoin(&b.conjoin(&d))), || fail("associativity"))?;
        ensure(eq(&a.conjoin(&a), &a), || fail("idempotence"))?;
        ensure(eq(&a.conjoin(&Constraint::truth()), &a), || fail("true is neutral"))?;
        ensure(a.conjoin(&Constraint::False).is_false(), || fail("false absorbs"))?;
        ensure(a.entails(&Constraint::truth()) && Constraint::False.entails(&a), || fail("bounds"))?;
        let ab = a.conjoin(&b);
        ensure(ab.entails(&a) && ab.entails(&b), || fail("upper bound"))?;
        ensure(ab.conjoin(&d).entails(&ab), || fail("least upper bound"))?;
        // entailment preorder
        ensure(a.entails(&a), || fail("reflexivity"))?;
        let abd = ab.conjoin(&d);
        ensure(abd.entails(&ab) && ab.entails(&a) && abd.entails(&a), || fail("transitivity"))?;
        if a.entails(&b) && b.entails(&d) {
            ensure(a.entails(&d), || fail("transitivity"))?;
        }
        laws += 17;
    }

    let names = ["x", "y", "z"];
    let (mut yes, mut agree_sat) = (0usize, 0usize);
    for i in 0..1000 {
        let nvars = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=6);
        let atoms: Vec<LinAtom> = (0..k).map(|_| LinAtom::random(&mut rng, nvars)).collect();
        let goal = if rng.gen_bool(0.5) {
            LinAtom::random(&mut rng, nvars)
        } else {
            // a relaxed copy of a premise is entailed more often than not
            let mut g = atoms.choose(&mut rng).unwrap().clone();
            g.rhs += match g.rel {
                Rel::Le | Rel::Lt => rng.gen_range(0..=2),
                Rel::Ge | Rel::Gt => -rng.gen_range(0..=2),
                Rel::Eq => 0,
            };
            g
        };
        let lib = conj(&atoms, &names).entails(&conj(std::slice::from_ref(&goal), &names));
        let oracle = oracle_entails(&atoms, &goal, nvars);
        ensure(lib == oracle, || format!("instance {i}: {atoms:?} |- {goal:?}: library {lib}, oracle {oracle}"))?;
        let sat = conj(&atoms, &names).satisfiable_with(&Constraint::truth());
        ensure(sat == oracle_sat(&atoms, nvars), || format!("instance {i}: satisfiability differs for {atoms:?}"))?;
        yes += oracle as usize;
        agree_sat += 1;
    }
    Ok(format!(
        "{laws} law checks over {n} instances ({entailed_pairs} monotonicity premises), 0 failures; \
         FM oracle agrees on 1000 entailments ({yes} entailed) and {agree_sat} satisfiability checks"
    ))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let mut rng = common::rng(5);
    let t = ContinuousStore::truth();
    let f = ContinuousStore::False;
    let mut checks = 0usize;
    for i in 0..500 {
        let (a, b, d) = (common::random_cstore(&mut rng), common::random_cstore(&mut rng), common::random_cstore(&mut rng));
        let (s, u) = (common::small_rational(&mut rng), common::small_rational(&mut rng));
        let fail = |law: &str| format!("instance {i}: {law} fails for {a} / {b} / {d}");
        ensure(a.merge(&b) == b.merge(&a), || fail("merge commutativity"))?;
        ensure(a.merge(&b).merge(&d) == a.merge(&b.merge(&d)), || fail("merge associativity"))?;
        ensure(a.merge(&t) == a && t.merge(&a) == a, || fail("merge identity"))?;
        ensure(a.merge(&f).is_false() && f.merge(&a).is_false(), || fail("merge absorption"))?;
        ensure(a.project(&Rational::zero()) == a, || fail("projection at 0"))?;
        ensure(a.project(&s).project(&u) == a.project(&(&s + &u)), || fail("projection semigroup"))?;
        ensure(a.update(&t) == a, || fail("update by true"))?;
        if !b.is_false() {
            ensure(t.update(&b) == b, || fail("update of true"))?;
            let r = a.update(&b);
            ensure(r.update(&b) == r, || fail("update idempotence"))?;
            if !a.is_false() {
                for (x, e) in b.entries() {
                    ensure(r.get(x) == Some(e), || fail("update overrides"))?;
                }
                for (x, e) in a.entries() {
                    if !b.contains(x) {
                        ensure(r.get(x) == Some(e), || fail("update keeps"))?;
                    }
                }
                let dom = a.entries().map(|(x, _)| x.clone()).chain(b.entries().map(|(x, _)| x.clone()));
                ensure(r.len() == dom.collect::<std::collections::BTreeSet<_>>().len(), || fail("update domain"))?;
            }
        }
        ensure(a.update(&f).is_false() && f.update(&a).is_false(), || fail("update with false"))?;
        checks += 12;
    }
    Ok(format!("{checks} checks over 500 instances, 0 failures"))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let mut rng = common::rng(6);
    let names = ["u", "w"];
    let (mut bounded, mut unbounded, mut none) = (0usize, 0usize, 0usize);
    for i in 0..500 {
        let start: Vec<i64> = (0..2).map(|_| rng.gen_range(-6..=6)).collect();
        let v0: Vec<Rational> = start.iter().map(|v| int(*v)).collect();
        let fl: Vec<Rational> = (0..2).map(|_| int(rng.gen_range(-2..=2))).collect();
        // most atoms hold initially, with a little slack, so the dwell is usually positive
        let atom = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut a = LinAtom::random(rng, 2);
            if a.rel == Rel::Eq && rng.gen_bool(0.7) {
                a.rel = Rel::Le;
            }
            if rng.gen_bool(0.8) {
                let lhs: i64 = a.coeffs.iter().zip(&start).map(|(k, v)| k * v).sum();
                let strict = matches!(a.rel, Rel::Lt | Rel::Gt);
                let slack = rng.gen_range(if strict { 1 } else { 0 }..=4);
                a.rhs = match a.rel {
                    Rel::Le | Rel::Lt => lhs + slack,
                    Rel::Ge | Rel::Gt => lhs - slack,
                    Rel::Eq => lhs,
                };
            }
            a
        };
        let disc: Vec<LinAtom> = (0..rng.gen_range(0..=2)).map(|_| atom(&mut rng)).collect();
        let inv: Vec<LinAtom> = (0..rng.gen_range(1..=3)).map(|_| atom(&mut rng)).collect();
        let cont = ContinuousStore::from_entries(
            names.iter().zip(v0.iter().zip(&fl)).map(|(n, (v, f))| (Var::new(n), hytccp::cstore::Entry::new(v.clone(), f.clone()))),
        );
        let store = HybridStore::new(conj(&disc, &names), cont);
        // oracle: both variables are valued, so every atom is a plain test
        let ok = |t: &Rational| {
            let vals: Vec<Rational> = v0.iter().zip(&fl).map(|(v, f)| v + f * t).collect();
            disc.iter().chain(&inv).all(|a| a.holds_at(&vals))
        };
        let fail = |m: String| format!("instance {i}: {m} (disc {disc:?}, inv {inv:?}, values {v0:?}, flows {fl:?})");
        match store.max_duration(&conj(&inv, &names)) {
            MaxDuration::PositiveBound { tau, strict } => {
                bounded += 1;
                for k in 0..=1000 {
                    if strict && k == 1000 {
                        continue;
                    }
                    let t = &tau * ratio(k, 1000);
                    ensure(ok(&t), || fail(format!("bound {} but fails at {}", render(&tau), render(&t))))?;
                }
                if strict {
                    ensure(!ok(&tau), || fail(format!("strict bound {} holds at the bound", render(&tau))))?;
                } else {
                    let past = &tau + ratio(1, 1_000_000);
                    ensure(!ok(&past), || fail(format!("bound {} still holds just after", render(&tau))))?;
                }
            }
            MaxDuration::Unbounded => {
                unbounded += 1;
                for t in [int(0), int(1), int(1_000_000)] {
                    ensure(ok(&t), || fail(format!("unbounded but fails at {}", render(&t))))?;
                }
            }
            MaxDuration::None => {
                none += 1;
                // the admissible set is an interval, so holding at 0 and later means a positive dwell
                for t in [int(1), int(1_000_000), ratio(1, 1_000_000_000)] {
                    ensure(!(ok(&Rational::zero()) && ok(&t)), || fail(format!("none but holds on [0,{}]", render(&t))))?;
                }
            }
        }
    }
    Ok(format!("500 pairs: {bounded} bounded, {unbounded} unbounded, {none} none; 0 failures"))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let limits = Limits { max_time: Some(int(30)), max_steps: 300, ..Limits::default() };
    let policies = [
        Policy::Urgent { seed: 0 },
        Policy::Lazy { seed: 1 },
        Policy::Random { seed: 7, step: int(1) },
        Policy::Random { seed: 8, step: ratio(1, 2) },
    ];
    let mut docs = 0;
    for (name, source) in corpus::ALL {
        for policy in &policies {
            let doc = || -> Result<String, String> {
                let s = corpus::setup(name).unwrap().map_err(|e| e.to_string())?;
                let trace = explorer::run(&s.program, &s.entry, s.store, policy, &limits).map_err(|e| e.to_string())?;
                let prov = Provenance {
                    program: name.into(),
                    source: source.into(),
                    policy: policy.to_string(),
                    limits: limits.to_string(),
                };
                Ok(trace_io::to_document(&trace, &prov).to_jsonl())
            };
            let (one, two) = (doc()?, doc()?);
            ensure(one == two, || format!("{name} under {policy}: documents differ"))?;
            let back = TraceDocument::from_jsonl(&one).map_err(|e| e.to_string())?;
            ensure(back.to_jsonl() == one, || format!("{name} under {policy}: document does not round-trip"))?;
            back.to_trace().map_err(|e| format!("{name}: {e}"))?;
            docs += 1;
        }
    }
    Ok(format!("{docs} (program, policy) pairs byte-identical across two runs and round-trip through JSONL"))
}

// ---------------------------------------------------------------- 8

/// Trace validation written against the semantics, not the engine.
fn validate(trace: &Trace) -> Result<(), String> {
    let mut prev_full = trace.initial_full.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let prev = trace.store_at(i);
        let at = |m: String| format!("step {}: {m}", i + 1);
        match step.label.duration() {
            None => {
                ensure(step.store.discrete.entails(&prev.discrete), || at("discrete store not monotone".into()))?;
                if let (Some(pf), Some(full)) = (&prev_full, &step.full) {
                    let gone: std::collections::BTreeSet<Var> =
                        pf.discrete.vars().difference(&full.discrete.vars()).cloned().collect();
                    ensure(full.discrete.entails(&pf.discrete.hide_all(&gone)), || at("full discrete store not monotone".into()))?;
                    for g in &step.fired {
                        ensure(pf.entails(g), || at(format!("guard {g} fired without being entailed")))?;
                    }
                }
            }
            Some(tau) => {
                ensure(*tau > Rational::zero(), || at("non-positive duration".into()))?;
                ensure(step.store.discrete.equivalent(&prev.discrete), || at("discrete store moved".into()))?;
                ensure(step.store.continuous.len() == prev.continuous.len(), || at("domain changed".into()))?;
                for (x, e) in prev.continuous.entries() {
                    let n = step.store.continuous.get(x).ok_or(at(format!("{x} vanished")))?;
                    ensure(n.flow == e.flow && n.value == &e.value + &e.flow * tau, || at(format!("{x} off its line")))?;
                }
            }
        }
        if trace.terminal != explorer::Terminal::Inconsistent || i + 1 < trace.steps.len() {
            ensure(step.store.is_consistent(), || at("inconsistent store".into()))?;
        }
        prev_full = step.full.clone();
    }
    Ok(())
}

fn criterion_8(traces: &[(String, Trace)]) -> Outcome {
    let mut steps = 0;
    for (name, t) in traces {
        validate(t).map_err(|e| format!("{name}: {e}"))?;
        explorer::check(t).map_err(|v| format!("{name}: library checker: step {}: {}", v.step, v.message))?;
        steps += t.steps.len();
    }
    Ok(format!("{} traces, {steps} steps valid", traces.len()))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    for (name, source) in corpus::ALL {
        let p1 = lang::parse(source).map_err(|e| format!("{name}: {e}"))?;
        let text = p1.to_string();
        let p2 = lang::parse(&text).map_err(|e| format!("{name} reprinted: {e}\n{text}"))?;
        ensure(p2.to_string() == text, || format!("{name}: printing is not a fixpoint"))?;
        ensure(p1 == p2, || format!("{name}: reparse differs"))?;
    }
    let mut rng = common::rng(9);
    for i in 0..300 {
        let ast = common::random_program(&mut rng);
        let text = ast.to_string();
        let p1 = lang::parse(&text).map_err(|e| format!("generated #{i}: {e}\n{text}"))?;
        let again = p1.to_string();
        let p2 = lang::parse(&again).map_err(|e| format!("generated #{i} reprinted: {e}\n{again}"))?;
        ensure(p1 == p2 && p2.to_string() == again, || format!("generated #{i}: not a fixpoint\n{text}\n{again}"))?;
    }
    Ok("3 corpus programs and 300 generated programs reach a parse/print fixpoint".into())
}

fn report(n: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let result = match (result, limit) {
        (Ok(msg), Some(l)) if took > l => Err(format!("{msg}; took {took:.2?}, limit {l:?}")),
        (r, _) => r,
    };
    match &result {
        Ok(msg) => println!("criterion {n} PASS  {title} ({took:.2?}): {msg}"),
        Err(msg) => println!("criterion {n} FAIL  {title} ({took:.2?}): {msg}"),
    }
    result.is_ok()
}

fn main() -> ExitCode {
    let mut traces = Vec::new();
    let mut ok = true;
    ok &= report(1, "cooler golden trace", Some(Duration::from_secs(1)), || criterion_1(&mut traces));
    ok &= report(2, "cat-and-mouse tie", Some(Duration::from_secs(5)), || criterion_2(&mut traces));
    ok &= report(3, "gear-shift safety", None, || criterion_3(&mut traces));
    ok &= report(4, "constraint-system laws", None, criterion_4);
    ok &= report(5, "continuous-store algebra", None, criterion_5);
    ok &= report(6, "max_duration vs sampling", None, criterion_6);
    ok &= report(7, "determinism and serialization", None, criterion_7);
    ok &= report(8, "semantics checker", None, || criterion_8(&traces));
    ok &= report(9, "parser round-trip", None, criterion_9);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
