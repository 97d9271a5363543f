use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use morphounify_core::{check, demo, Desc, Engine, Source};
use unicode_normalization::UnicodeNormalization;

/// Word analysis and generation with typed feature structures and
/// two-level morphology. Files not given default to the built-in German
/// demonstration grammar.
#[derive(Parser, Debug)]
#[command(name = "morphounify", version)]
struct Cli {
    #[arg(long, global = true, value_name = "FILE")]
    grammar: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    rules: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    morphs: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    lexemes: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Avm)]
    format: Format,
    /// Longest run of null characters on either tape.
    #[arg(long, global = true, default_value_t = 2)]
    max_nulls: usize,
    /// Print rule commitments and goal wake-ups to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a surface word form.
    Analyze { word: String },
    /// Generate surface forms from feature assignments such as
    /// `stem=rat person=3 tense=pres`.
    Generate {
        #[arg(required = true, value_name = "KEY=VALUE")]
        assignments: Vec<String>,
    },
    /// Validate grammar, rules and lexicons.
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Avm,
    Json,
}

struct Inputs {
    files: [(String, String); 4],
}

impl Inputs {
    fn read(cli: &Cli) -> Result<Inputs, String> {
        let read = |path: &Option<PathBuf>, name: &str, builtin: &str| -> Result<(String, String), String> {
            match path {
                Some(p) => fs::read_to_string(p)
                    .map(|t| (p.display().to_string(), t))
                    .map_err(|e| format!("{}: {e}", p.display())),
                None => Ok((name.to_string(), builtin.to_string())),
            }
        };
        Ok(Inputs {
            files: [
                read(&cli.grammar, "grammar.tfs", demo::GRAMMAR)?,
                read(&cli.rules, "rules.tl", demo::RULES)?,
                read(&cli.morphs, "morphs.lex", demo::MORPHS)?,
                read(&cli.lexemes, "lexemes.lex", demo::LEXEMES)?,
            ],
        })
    }

    fn sources(&self) -> [Source<'_>; 4] {
        self.files.each_ref().map(|(n, t)| Source::new(n, t))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = run(&cli, &mut out);
    let _ = out.flush();
    ExitCode::from(code)
}

fn run(cli: &Cli, out: &mut impl Write) -> u8 {
    let inputs = match Inputs::read(cli) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let [g, r, m, l] = inputs.sources();
    if let Command::Check = cli.command {
        let report = check(g, r, m, l);
        for e in &report.errors {
            let _ = writeln!(out, "error: {e}");
        }
        for w in &report.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if report.is_clean() {
            let _ = writeln!(out, "ok");
            return 0;
        }
        return 1;
    }
    let mut engine = match Engine::load(g, r, m, l) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    engine.config.max_nulls = cli.max_nulls;
    engine.config.trace = cli.trace;
    match &cli.command {
        Command::Analyze { word } => analyze(&engine, cli.format, &word.nfc().collect::<String>(), out),
        Command::Generate { assignments } => generate(&engine, cli.format, assignments, out),
        Command::Check => unreachable!(),
    }
}

fn report(warnings: &[String], trace: &[String]) {
    for t in trace {
        eprintln!("trace: {t}");
    }
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn analyze(engine: &Engine, format: Format, word: &str, out: &mut impl Write) -> u8 {
    let analysis = match engine.analyze_word(word) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    report(&analysis.warnings, &analysis.trace);
    if analysis.results.is_empty() {
        let _ = writeln!(out, "no analysis");
        return 1;
    }
    match format {
        Format::Avm => {
            for (i, fs) in analysis.results.iter().enumerate() {
                if i > 0 {
                    let _ = writeln!(out);
                }
                let _ = writeln!(out, "{}", fs.to_avm().trim_end());
            }
        }
        Format::Json => {
            let values: Vec<serde_json::Value> = analysis
                .results
                .iter()
                .map(|fs| serde_json::from_str(&fs.to_json()).expect("valid json"))
                .collect();
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&values).expect("serializable"));
        }
    }
    0
}

/// Turns `key=value` assignments into a partial word description. `stem`
/// is the morph stem, keys with `:` are paths from the word, and any other
/// key is a feature of the morphological head. A value names a type, or
/// `key_value` names one, or else it is a string.
fn word_spec(engine: &Engine, assignments: &[String]) -> Result<Desc, String> {
    let types = &engine.grammar.types;
    let mut feats: Vec<(String, Desc)> = Vec::new();
    for a in assignments {
        let a: String = a.nfc().collect();
        let Some((key, value)) = a.split_once('=') else {
            return Err(format!("`{a}` is not of the form KEY=VALUE"));
        };
        let (key, value) = (key.trim(), value.trim());
        let path = if key == "stem" {
            "morph:stem".to_string()
        } else if key.contains(':') || key.contains('|') {
            key.replace('|', ":")
        } else {
            format!("morph:mhead:{key}")
        };
        if let Some(f) = path.split(':').find(|f| types.feature(f).is_none()) {
            return Err(format!("unknown feature `{f}` in `{a}`"));
        }
        let last = path.rsplit(':').next().unwrap_or(key);
        let desc = if key == "stem" {
            Desc::string(value)
        } else if types.lookup(value).is_some() {
            Desc::ty(value)
        } else if types.lookup(&format!("{last}_{value}")).is_some() {
            Desc::ty(&format!("{last}_{value}"))
        } else {
            Desc::string(value)
        };
        feats.push((path, desc));
    }
    Ok(Desc::avm(
        Some("word"),
        feats.iter().map(|(p, d)| (p.as_str(), d.clone())).collect(),
    ))
}

fn generate(engine: &Engine, format: Format, assignments: &[String], out: &mut impl Write) -> u8 {
    let spec = match word_spec(engine, assignments) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let generation = match engine.generate_word(&spec) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    report(&generation.warnings, &generation.trace);
    if generation.forms.is_empty() {
        if generation.insufficient {
            eprintln!("morphology constraint still delayed: the description does not determine a stem or lexical string");
        } else {
            let _ = writeln!(out, "no surface form");
        }
        return 1;
    }
    match format {
        Format::Avm => {
            for f in &generation.forms {
                let _ = writeln!(out, "{f}");
            }
        }
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&generation.forms).expect("serializable"));
        }
    }
    0
}
