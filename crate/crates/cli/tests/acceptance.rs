//! Acceptance criteria. Prints one PASS/FAIL line per criterion and fails
//! if any criterion fails.

mod oracle;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use morphounify_core::constraints::pending_goals;
use morphounify_core::syntax::parse_desc;
use morphounify_core::{Desc, DescBody, Engine, Fs, GoalState, Licensing, Store, TypeHierarchy, TypeId, STRING, TOP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random well-typed pairs required by the unification criterion.
const ALGEBRA_PAIRS: usize = 1000;
const ALGEBRA_MAX_DEPTH: usize = 4;
const ALGEBRA_SEED: u64 = 0x5eed_0001;
/// Longest surface string in the bidirectionality sweep.
const SWEEP_MAX_LEN: usize = 6;
/// Longest list in the append criterion.
const APPEND_MAX_LEN: usize = 4;
/// Whole suite budget.
const TIME_BUDGET_SECS: u64 = 60;

type Outcome = Result<String, String>;
type Split = (Option<Vec<String>>, Option<Vec<String>>);
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn list_items(fs: &Fs, path: &str) -> Option<Vec<String>> {
    let mut cur = fs.get(path)?;
    let mut out = Vec::new();
    loop {
        let n = fs.node(cur);
        match n.ty.as_str() {
            "elist" => return Some(out),
            "nelist" => {
                out.push(fs.node(*n.features.get("first")?).ty.clone());
                cur = *n.features.get("rest")?;
            }
            _ => return None,
        }
    }
}

fn list_desc(items: &[&str]) -> Desc {
    Desc {
        tag: None,
        body: DescBody::List {
            items: items.iter().map(|s| Desc::ty(s)).collect(),
            tail: None,
        },
    }
}

// ---- 1 ----

const FULL_MORPH: &str = r#"
rightfunctor [mstring: "rAt+t",
              stem: #1 "rat",
              affix: "+t",
              mhead: verb_form [epenthese: #3 '-', person: 3,
                                tense: tense_pres, umlaut: #2 aou_umlaut],
              arg: marg [mstring: "rAt",
                         stem: #1,
                         mhead: verb_stem [epenthese: #3, person: 3, umlaut: #2]]]"#;

fn criterion_1(engine: &Engine) -> Outcome {
    let a = engine.analyze_word("rät").map_err(|e| e.to_string())?;
    ensure(a.results.len() == 1, || format!("{} analyses", a.results.len()))?;
    let r = &a.results[0];
    let expect = [
        ("phon", "rät"),
        ("morph:mstring", "rAt+t"),
        ("morph:stem", "rat"),
        ("morph:affix", "+t"),
    ];
    for (p, v) in expect {
        ensure(r.string_at(p) == Some(v), || format!("{p} is {:?}", r.string_at(p)))?;
    }
    let types = [
        ("morph:mhead", "verb_form"),
        ("morph:mhead:epenthese", "-"),
        ("morph:mhead:person", "3"),
        ("morph:mhead:tense", "tense_pres"),
        ("morph:mhead:umlaut", "aou_umlaut"),
    ];
    for (p, v) in types {
        ensure(r.type_at(p) == Some(v), || format!("{p} is {:?}", r.type_at(p)))?;
    }
    ensure(r.shared("morph:stem", "morph:arg:stem"), || "stem not shared".into())?;
    let mut store = engine.store();
    let reference = store.build_str(FULL_MORPH).map_err(|e| e.to_string())?;
    let reference = store.extract(reference);
    let morph = r.sub("morph").ok_or("no morph")?;
    ensure(morph.equivalent(&reference, &engine.grammar.types), || {
        format!("morph not isomorphic to the reference:\n{}\nvs\n{}", morph.to_avm(), reference.to_avm())
    })?;
    Ok("one analysis, isomorphic to the reference structure".into())
}

// ---- 2 ----

fn criterion_2(engine: &Engine) -> Outcome {
    for (surface, lexical) in [("sagt", "sag+t"), ("badet", "bad+t"), ("rät", "rAt+t")] {
        let a = engine.analyze_word(surface).map_err(|e| e.to_string())?;
        ensure(a.results.len() == 1, || format!("{surface}: {} analyses", a.results.len()))?;
        let got = a.results[0].string_at("morph:mstring");
        ensure(got == Some(lexical), || format!("{surface}: mstring {got:?}"))?;
        let spec = parse_desc(&format!("word [morph: [mstring: \"{lexical}\"]]")).unwrap();
        let g = engine.generate_word(&spec).map_err(|e| e.to_string())?;
        ensure(g.forms == [surface], || format!("{lexical} generates {:?}", g.forms))?;
        let back = engine.generate_from(&a.results[0]).map_err(|e| e.to_string())?;
        ensure(back.forms == [surface], || format!("{surface} regenerates {:?}", back.forms))?;
    }
    for bad in ["ratet", "rätet", "rätt", "bät"] {
        ensure(oracle::analyses(bad).is_empty(), || format!("oracle accepts {bad}"))?;
        let a = engine.analyze_word(bad).map_err(|e| e.to_string())?;
        ensure(a.results.is_empty(), || format!("{bad}: {} analyses", a.results.len()))?;
    }
    Ok("3 round trips, 4 rejections confirmed by the oracle".into())
}

// ---- 3 ----

fn strings_up_to(alphabet: &[char], max: usize, first: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer = vec![first.to_string()];
    for _ in 1..=max {
        out.extend(layer.iter().cloned());
        if out.last().is_some_and(|s| s.chars().count() == max) {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
    }
    out
}

fn criterion_3(engine: &Engine) -> Outcome {
    let alphabet = oracle::SURFACE_ALPHABET;
    let accepted: Vec<(String, Vec<Fs>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = alphabet
            .iter()
            .map(|&c| {
                scope.spawn(move || {
                    let mut found = Vec::new();
                    for w in strings_up_to(alphabet, SWEEP_MAX_LEN, c) {
                        let a = engine.analyze_word(&w).expect("surface alphabet");
                        if !a.results.is_empty() {
                            found.push((w, a.results));
                        }
                    }
                    found
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let engine_set: BTreeSet<String> = accepted.iter().map(|(w, _)| w.clone()).collect();
    let oracle_set: BTreeSet<String> = oracle::language()
        .into_keys()
        .filter(|w| w.chars().count() <= SWEEP_MAX_LEN)
        .collect();
    ensure(engine_set == oracle_set, || {
        format!("engine accepts {engine_set:?}, oracle {oracle_set:?}")
    })?;
    let mut checked = 0;
    for (w, results) in &accepted {
        for r in results {
            let g = engine.generate_from(r).map_err(|e| e.to_string())?;
            ensure(g.forms.contains(w), || format!("{w} regenerates {:?}", g.forms))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{} accepted forms ({checked} analyses), all regenerate; sets agree with the oracle",
        engine_set.len()
    ))
}

// ---- 4 ----

struct Gen<'a> {
    types: &'a TypeHierarchy,
    rng: ChaCha8Rng,
    tags: Vec<(u32, TypeId)>,
}

impl Gen<'_> {
    fn pick_subtype(&mut self, t: TypeId) -> TypeId {
        let mut cur = t;
        loop {
            let kids = self.types.children(cur);
            if kids.is_empty() || self.rng.gen_bool(0.35) {
                return cur;
            }
            cur = kids[self.rng.gen_range(0..kids.len())];
        }
    }

    fn desc(&mut self, t: TypeId, depth: usize) -> Desc {
        if t == STRING {
            let pool = ["rat", "sag", "+t", "a"];
            return Desc::string(pool[self.rng.gen_range(0..pool.len())]);
        }
        let c = self.pick_subtype(t);
        if self.rng.gen_bool(0.1) {
            if let Some(&(k, _)) = self.tags.iter().find(|(_, ty)| *ty == c) {
                return Desc {
                    tag: Some(k),
                    body: DescBody::Any,
                };
            }
        }
        let mut feats = Vec::new();
        if depth > 0 {
            let approp: Vec<_> = self.types.approp(c).iter().map(|(&f, &v)| (f, v)).collect();
            for (f, v) in approp {
                if self.rng.gen_bool(0.5) {
                    feats.push((vec![self.types.feature_name(f).to_string()], self.desc(v, depth - 1)));
                }
            }
        }
        let tag = if self.rng.gen_bool(0.15) {
            let k = self.tags.len() as u32 + 1;
            self.tags.push((k, c));
            Some(k)
        } else {
            None
        };
        Desc {
            tag,
            body: DescBody::Avm {
                ty: Some(self.types.name(c).to_string()),
                feats,
            },
        }
    }

    fn root(&mut self) -> (Desc, Desc) {
        let all: Vec<TypeId> = self.types.types().filter(|&t| t != TOP && t != STRING).collect();
        let t = all[self.rng.gen_range(0..all.len())];
        self.tags.clear();
        let a = self.desc(t, ALGEBRA_MAX_DEPTH);
        self.tags.clear();
        let b = self.desc(t, ALGEBRA_MAX_DEPTH);
        (a, b)
    }
}

fn unify_fresh(engine: &Engine, first: &Desc, second: &Desc) -> Result<Option<Fs>, String> {
    let mut s = engine.store();
    let a = s.build(first).map_err(|e| format!("build: {e}"))?;
    let b = s.build(second).map_err(|e| format!("build: {e}"))?;
    match s.unify(a, b) {
        Ok(n) => Ok(Some(s.extract(n))),
        Err(e) if e.is_clash() => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

fn criterion_4(engine: &Engine) -> Outcome {
    let types = &engine.grammar.types;
    let mut gen = Gen {
        types,
        rng: ChaCha8Rng::seed_from_u64(ALGEBRA_SEED),
        tags: Vec::new(),
    };
    let (mut pairs, mut succeeded, mut attempts) = (0, 0, 0);
    while pairs < ALGEBRA_PAIRS {
        attempts += 1;
        ensure(attempts < 50 * ALGEBRA_PAIRS, || "too few well-typed pairs".into())?;
        let (da, db) = gen.root();
        let mut s = engine.store();
        let (Ok(a), Ok(b)) = (s.build(&da), s.build(&db)) else {
            continue;
        };
        pairs += 1;
        // failure atomicity: a failed unify leaves the store as it was, and
        // undoing a successful one restores it
        let before = s.snapshot();
        let cp = s.checkpoint();
        let ab = s.unify(a, b);
        let merged = ab.as_ref().ok().map(|&n| s.extract(n));
        if ab.is_ok() {
            succeeded += 1;
            s.undo_to(cp).map_err(|e| e.to_string())?;
        }
        s.release(cp).map_err(|e| e.to_string())?;
        ensure(s.snapshot() == before, || format!("store changed after unify/undo of\n{da}\n{db}"))?;
        // order
        let ba = unify_fresh(engine, &db, &da)?;
        match (&merged, &ba) {
            (None, None) => {}
            (Some(x), Some(y)) if x.equivalent(y, types) => {}
            _ => return Err(format!("order matters for\n{da}\n{db}")),
        }
        // idempotence
        let mut s = engine.store();
        let alone = s.build(&da).map(|n| s.extract(n)).map_err(|e| e.to_string())?;
        let aa = unify_fresh(engine, &da, &da)?;
        ensure(aa.as_ref().is_some_and(|x| x.equivalent(&alone, types)), || {
            format!("a ⊔ a ≠ a for\n{da}")
        })?;
    }
    Ok(format!("{pairs} pairs ({succeeded} unifiable, {} clashing)", pairs - succeeded))
}

// ---- 5 ----

fn criterion_5(engine: &Engine) -> Outcome {
    let symbols = ["1", "2", "3"];
    let lists = oracle::all_lists(&symbols, APPEND_MAX_LEN);
    let strs = |l: &[&str]| l.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    // forward
    for x in &lists {
        for y in &lists {
            let mut s = engine.store();
            let xn = s.build(&list_desc(x)).unwrap();
            let yn = s.build(&list_desc(y)).unwrap();
            let zn = s.new_node(TOP);
            s.call("fs_append", &[xn, yn, zn]).map_err(|e| format!("forward {x:?} {y:?}: {e}"))?;
            let got = list_items(&s.extract(zn), "");
            ensure(got == Some(strs(&oracle::append(x, y))), || format!("append({x:?}, {y:?}) = {got:?}"))?;
            ensure(pending_goals(&s).is_empty(), || format!("forward {x:?} {y:?} left goals"))?;
        }
    }
    // backward
    for z in &lists {
        let mut s = engine.store();
        let zn = s.build(&list_desc(z)).unwrap();
        let (xn, yn) = (s.new_node(TOP), s.new_node(TOP));
        s.call("fs_append", &[xn, yn, zn]).map_err(|e| e.to_string())?;
        let sols = engine.solve(&mut s, &[xn, yn]).map_err(|e| e.to_string())?;
        let got: BTreeSet<Split> =
            sols.iter().map(|v| (list_items(&v[0], ""), list_items(&v[1], ""))).collect();
        let want: BTreeSet<_> = (0..=z.len())
            .map(|k| (Some(strs(&z[..k])), Some(strs(&z[k..]))))
            .collect();
        ensure(sols.len() == want.len() && got == want, || format!("splits of {z:?}: {got:?}"))?;
    }
    // checking
    let mut checks = 0;
    for x in &lists {
        for y in lists.iter().filter(|y| x.len() + y.len() <= APPEND_MAX_LEN) {
            let xy = oracle::append(x, y);
            for z in &lists {
                let mut s = engine.store();
                let xn = s.build(&list_desc(x)).unwrap();
                let yn = s.build(&list_desc(y)).unwrap();
                let zn = s.build(&list_desc(z)).unwrap();
                let ok = s.call("fs_append", &[xn, yn, zn]).is_ok();
                ensure(ok == (xy == *z), || format!("append({x:?}, {y:?}, {z:?}) gave {ok}"))?;
                checks += 1;
            }
        }
    }
    // untyped first argument: delays, enumerates nothing
    for z in [&lists[0], lists.last().unwrap()] {
        let mut s = engine.store();
        let zn = s.build(&list_desc(z)).unwrap();
        let (xn, yn) = (s.new_node(TOP), s.new_node(TOP));
        let nodes = s.node_count();
        s.call("fs_append", &[xn, yn, zn]).map_err(|e| e.to_string())?;
        let delayed: Vec<_> = pending_goals(&s)
            .into_iter()
            .filter(|&g| s.goal(g).state == GoalState::Delayed)
            .collect();
        ensure(delayed.len() == 2, || format!("{} delayed goals", delayed.len()))?;
        ensure(s.type_name(xn) == "top" && s.type_name(yn) == "top", || "arguments instantiated".into())?;
        ensure(s.node_count() < nodes + 8, || "store grew while delaying".into())?;
    }
    Ok(format!(
        "{} forward, {} backward, {checks} checking cases; untyped first argument delays",
        lists.len() * lists.len(),
        lists.len()
    ))
}

// ---- 6 ----

fn criterion_6(engine: &Engine) -> Outcome {
    let types = &engine.grammar.types;
    let hfp = engine
        .grammar
        .constraints
        .principle("head_feature_principle")
        .ok_or("no head feature principle")?;
    let fired = |s: &mut Store<'_>| {
        s.take_trace()
            .iter()
            .filter(|l| l.contains("head_feature_principle") && l.contains("fire"))
            .count()
    };
    let mut s = engine.store();
    s.enable_trace();
    let n = s.new_node(TOP);
    s.license(n).map_err(|e| e.to_string())?;
    let Some(Licensing::Delayed(g)) = s.licensing(n, hfp) else {
        return Err(format!("licensing is {:?}", s.licensing(n, hfp)));
    };
    ensure(pending_goals(&s).contains(&g), || "goal not on the agenda".into())?;
    ensure(s.goal(g).state == GoalState::Delayed, || "goal not delayed".into())?;
    ensure(fired(&mut s) == 0, || "fired while undetermined".into())?;
    let cp = s.checkpoint();
    s.coerce(n, types.type_id("headed_phrase").unwrap()).map_err(|e| e.to_string())?;
    ensure(s.licensing(n, hfp) == Some(Licensing::Fired), || "not fired".into())?;
    ensure(s.goal(g).state == GoalState::Done, || "goal not done".into())?;
    let head = s.path_get_str(n, "synsem:loc:cat:head").map_err(|e| e.to_string())?;
    let v = s.new_node(types.type_id("verbal").unwrap());
    s.unify(head, v).map_err(|e| e.to_string())?;
    let fs = s.extract(n);
    ensure(fs.shared("synsem:loc:cat:head", "dtrs:head_dtr:synsem:loc:cat:head"), || "head not shared".into())?;
    ensure(fs.type_at("dtrs:head_dtr:synsem:loc:cat:head") == Some("verbal"), || "refinement lost".into())?;
    let count = fired(&mut s);
    ensure(count == 1, || format!("fired {count} times"))?;
    s.undo_to(cp).map_err(|e| e.to_string())?;
    s.release(cp).map_err(|e| e.to_string())?;
    s.coerce(n, types.type_id("word").unwrap()).map_err(|e| e.to_string())?;
    ensure(s.licensing(n, hfp) == Some(Licensing::Discarded), || "not discarded".into())?;
    ensure(s.goal(g).state == GoalState::Discarded, || "goal not discarded".into())?;
    ensure(fired(&mut s) == 0, || "fired on word".into())?;
    Ok("delayed on top, fired once on headed_phrase, discarded on word".into())
}

// ---- 7 ----

fn sign_with(engine: &Engine, synsem: &str) -> Fs {
    let mut s = engine.store();
    let n = s.build_str(&format!("sign [synsem: {synsem}]")).expect("well-typed sign");
    s.extract(n)
}

fn criterion_7(engine: &Engine) -> Outcome {
    let cats = ["np", "pp"];
    let subcats = oracle::all_lists(&cats, 3);
    let mut cases = 0;
    for head_sc in &subcats {
        let head = sign_with(
            engine,
            &format!("synsem [loc: [cat: [head: verbal, subcat: <{}>]]]", head_sc.join(", ")),
        );
        for comps in &subcats {
            let comp_fs: Vec<Fs> = comps.iter().map(|c| sign_with(engine, c)).collect();
            let results = engine.head_complement(&head, &comp_fs).map_err(|e| e.to_string())?;
            cases += 1;
            match oracle::phrase_subcat(head_sc, comps) {
                None => ensure(results.is_empty(), || {
                    format!("head {head_sc:?} comps {comps:?}: {} phrases", results.len())
                })?,
                Some(want) => {
                    ensure(results.len() == 1, || {
                        format!("head {head_sc:?} comps {comps:?}: {} phrases", results.len())
                    })?;
                    let p = &results[0];
                    let got = list_items(p, "synsem:loc:cat:subcat");
                    let want: Vec<String> = want.iter().map(|s| s.to_string()).collect();
                    ensure(got.as_ref() == Some(&want), || {
                        format!("head {head_sc:?} comps {comps:?}: subcat {got:?}, want {want:?}")
                    })?;
                    ensure(p.shared("synsem:loc:cat:head", "dtrs:head_dtr:synsem:loc:cat:head"), || {
                        "head features not shared".into()
                    })?;
                    ensure(p.type_at("synsem:loc:cat:head") == Some("verbal"), || "phrase head not verbal".into())?;
                }
            }
        }
    }
    Ok(format!("{cases} head/complement combinations"))
}

// ---- 8 ----

fn cli_suite() -> Vec<u8> {
    let bin = env!("CARGO_BIN_EXE_morphounify");
    let runs: &[&[&str]] = &[
        &["analyze", "rät"],
        &["analyze", "sagt"],
        &["analyze", "badet"],
        &["analyze", "rätst", "--format", "json"],
        &["analyze", "rätet"],
        &["analyze", "ratet"],
        &["analyze", "xyz%"],
        &["generate", "stem=rat", "person=3", "tense=pres"],
        &["generate", "stem=sag", "person=3", "tense=pres"],
        &["generate", "stem=bad", "person=3", "tense=pres"],
        &["generate", "stem=bad"],
        &["generate", "person=3"],
        &["check"],
        &["analyze", "rät", "--trace"],
    ];
    let mut out = Vec::new();
    for args in runs {
        let o = Command::new(bin).args(*args).output().expect("run cli");
        out.extend(format!("$ {}\nexit {:?}\n", args.join(" "), o.status.code()).bytes());
        out.extend(o.stdout);
        out.extend(o.stderr);
    }
    out
}

fn criterion_8() -> Outcome {
    let first = cli_suite();
    let second = cli_suite();
    ensure(first == second, || "CLI output differs between runs".into())?;
    Ok(format!("{} bytes identical across two runs", first.len()))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let engine = Engine::demo();
    let criteria: Vec<Criterion<'_>> = vec![
        ("reference analysis of rät", Box::new(|| criterion_1(&engine))),
        ("paradigm round trips and rejections", Box::new(|| criterion_2(&engine))),
        ("bidirectionality sweep", Box::new(|| criterion_3(&engine))),
        ("unification algebra", Box::new(|| criterion_4(&engine))),
        ("fs_append in all modes", Box::new(|| criterion_5(&engine))),
        ("delay tri-state", Box::new(|| criterion_6(&engine))),
        ("head feature and subcat principles", Box::new(|| criterion_7(&engine))),
        ("deterministic CLI output", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({:.2?})", i + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    let elapsed = start.elapsed();
    println!("acceptance suite finished in {elapsed:.2?}");
    assert!(elapsed.as_secs() < TIME_BUDGET_SECS, "suite exceeded {TIME_BUDGET_SECS}s");
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
