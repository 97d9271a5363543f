use std::path::Path;
use std::process::{Command, Output};

use morphounify_core::{demo, Engine, Fs};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphounify")).args(args).output().expect("run cli")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn analyze_exit_codes() {
    let o = run(&["analyze", "rät"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\"rAt+t\"") && out.contains("aou_umlaut") && out.contains("#1"), "{out}");

    let o = run(&["analyze", "rätet"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "no analysis\n");

    let o = run(&["analyze", "xyz%"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not in the surface alphabet"));
}

#[test]
fn input_is_normalized() {
    let composed = run(&["analyze", "rät"]);
    let decomposed = run(&["analyze", "ra\u{308}t"]);
    assert_eq!(decomposed.status.code(), Some(0));
    assert_eq!(stdout(&composed), stdout(&decomposed));
}

#[test]
fn generate_examples() {
    for (stem, form) in [("rat", "rät"), ("sag", "sagt"), ("bad", "badet")] {
        let o = run(&["generate", &format!("stem={stem}"), "person=3", "tense=pres"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o), format!("{form}\n"));
    }
    let o = run(&["generate", "stem=bad", "--format", "json"]);
    let forms: Vec<String> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(forms.len(), 2);

    let o = run(&["generate", "person=3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("morphology constraint still delayed"));

    let o = run(&["generate", "stem=bad", "person=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "no surface form\n");

    let o = run(&["generate", "colour=red"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["generate", "stem"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_round_trips() {
    let o = run(&["analyze", "rät", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let values: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(values.len(), 1);
    let fs = Fs::from_json(&values[0].to_string()).unwrap();
    let engine = Engine::demo();
    let mut s = engine.store();
    let n = s.load_fs(&fs).unwrap();
    let rebuilt = s.extract(n);
    let direct = engine.analyze_word("rät").unwrap().results.remove(0);
    assert!(rebuilt.equivalent(&direct, &engine.grammar.types));
    let avm = stdout(&run(&["analyze", "rät"]));
    assert_eq!(avm.trim_end(), rebuilt.to_avm().trim_end());
}

#[test]
fn check_demo_is_clean() {
    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok\n");
}

#[test]
fn check_reports_rule_errors() {
    let dir = tempfile::tempdir().unwrap();
    let undeclared = write(dir.path(), "undeclared.tl", &demo::RULES.replace("dental <=>", "labial <=>"));
    let o = run(&["--rules", &undeclared, "check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("labial"), "{}", stdout(&o));

    let conflict = format!("{}\npair t:e;\n_ <=> t:e <=> ['+':0, t:t].\n", demo::RULES);
    let conflict = write(dir.path(), "conflict.tl", &conflict);
    let o = run(&["--rules", &conflict, "check"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("error:") && out.lines().count() == 1, "{out}");

    let o = run(&["--rules", &conflict, "analyze", "rät"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_lexicon_problems() {
    let dir = tempfile::tempdir().unwrap();
    let lexemes = demo::LEXEMES.lines().filter(|l| !l.contains("\"bad\"")).collect::<Vec<_>>().join("\n");
    let lexemes = write(dir.path(), "lexemes.lex", &lexemes);
    let o = run(&["--lexemes", &lexemes, "check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("warning:") && stdout(&o).contains("bad"));
    // the word still analyzes, with a warning
    let o = run(&["--lexemes", &lexemes, "analyze", "badet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning: no lexeme entry"));
}

#[test]
fn missing_file_is_a_load_error() {
    let o = run(&["--grammar", "/nonexistent/grammar.tfs", "analyze", "rät"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn trace_goes_to_stderr() {
    let quiet = run(&["analyze", "rät"]);
    let traced = run(&["analyze", "rät", "--trace"]);
    assert!(stderr(&quiet).is_empty());
    assert!(stderr(&traced).lines().any(|l| l.starts_with("trace:")));
    assert_eq!(stdout(&quiet), stdout(&traced));
}

#[test]
fn explicit_files_match_the_builtin_demo() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "grammar.tfs", demo::GRAMMAR);
    let r = write(dir.path(), "rules.tl", demo::RULES);
    let m = write(dir.path(), "morphs.lex", demo::MORPHS);
    let l = write(dir.path(), "lexemes.lex", demo::LEXEMES);
    let o = run(&["--grammar", &g, "--rules", &r, "--morphs", &m, "--lexemes", &l, "analyze", "badet"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), stdout(&run(&["analyze", "badet"])));
}
