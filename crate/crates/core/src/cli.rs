//! Command-line entry points: scenario runs, the KB query REPL and trace
//! comparison.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::kb::{ExtensionKey, Literal, Profile, ProfileKind, Taxonomy, UpdateOp};
use crate::session::{self, load_program, LoadError, RunConfig, RunStatus, StdinChannel};
use crate::sitlog::{dummy_functions, format_history, format_trace, EchoingSpeech, Engine, Interaction, Perceived};
use crate::term::{parse_clauses, parse_term, write_compact, Term};
use crate::world::ScriptedReplies;

pub const EXIT_OK: i32 = 0;
pub const EXIT_LOAD: i32 = 1;
pub const EXIT_GIVE_UP: i32 = 2;
/// The trace differs from the golden file.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "butler", version, about = "Service-robot cognition engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario, or a bare dialogue-model program.
    Run(RunArgs),
    /// Query a knowledge base interactively.
    Kb {
        kb: PathBuf,
        /// Read commands from this file instead of standard input.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Compare a trace with a golden file.
    TraceCheck { trace: PathBuf, golden: PathBuf },
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Dialogue-model files; repeat to load several.
    #[arg(long)]
    pub program: Vec<PathBuf>,
    #[arg(long)]
    pub kb: Option<PathBuf>,
    #[arg(long)]
    pub cost_model: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Type the user's replies instead of using the scenario script.
    #[arg(long)]
    pub interactive: bool,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub record_out: Option<PathBuf>,
    /// Compare the trace with this file after the run.
    #[arg(long)]
    pub golden: Option<PathBuf>,
    /// Initial pipe of a program run without a scenario.
    #[arg(long, default_value = "empty")]
    pub pipe: String,
    /// Input list of a program run without a scenario, e.g. `[a, b(c)]`.
    #[arg(long)]
    pub script: Option<String>,
}

pub fn main_with(cli: Cli, out: &mut dyn Write) -> i32 {
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args, out),
        Command::Kb { kb, script } => match script {
            Some(p) => match std::fs::File::open(&p) {
                Ok(f) => cmd_kb(&kb, std::io::BufReader::new(f), out),
                Err(e) => fail(out, &LoadError { path: p, message: e.to_string() }),
            },
            None => cmd_kb(&kb, std::io::stdin().lock(), out),
        },
        Command::TraceCheck { trace, golden } => cmd_trace_check(&trace, &golden, out),
    };
    out.flush().ok();
    code
}

fn fail(out: &mut dyn Write, e: &LoadError) -> i32 {
    writeln!(out, "error: {e}").ok();
    EXIT_LOAD
}

fn write_file(path: &Path, text: &str, out: &mut dyn Write) -> Result<(), i32> {
    std::fs::write(path, text).map_err(|e| fail(out, &LoadError { path: path.to_path_buf(), message: e.to_string() }))
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> i32 {
    let (trace, code) = match &args.scenario {
        Some(scenario) => match run_scenario(args, scenario, out) {
            Ok(r) => r,
            Err(code) => return code,
        },
        None => match run_program(args, out) {
            Ok(r) => r,
            Err(code) => return code,
        },
    };
    if let Some(p) = &args.trace_out {
        if let Err(c) = write_file(p, &trace, out) {
            return c;
        }
    }
    if let Some(g) = &args.golden {
        let golden = match std::fs::read_to_string(g) {
            Ok(s) => s,
            Err(e) => return fail(out, &LoadError { path: g.clone(), message: e.to_string() }),
        };
        if let Err(msg) = compare_traces(&trace, &golden) {
            writeln!(out, "trace differs from {}: {msg}", g.display()).ok();
            return EXIT_MISMATCH;
        }
        writeln!(out, "trace matches {}", g.display()).ok();
    }
    code
}

fn run_scenario(args: &RunArgs, scenario: &Path, out: &mut dyn Write) -> Result<(String, i32), i32> {
    let config = RunConfig {
        scenario: scenario.to_path_buf(),
        programs: args.program.clone(),
        kb: args.kb.clone(),
        cost_model: args.cost_model.clone(),
        seed: args.seed,
    };
    let prepared = config.prepare().map_err(|e| fail(out, &e))?;
    let report = if args.interactive {
        session::run(&prepared, Box::new(StdinChannel), true)
    } else {
        session::run(&prepared, Box::new(ScriptedReplies(prepared.scenario.replies.iter().cloned().collect())), false)
    };
    if !args.interactive {
        for u in &report.transcript {
            writeln!(out, "{u}").ok();
        }
    }
    if let Some(p) = &args.record_out {
        write_file(p, &report.record.to_jsonl(), out)?;
    }
    let code = match &report.status {
        RunStatus::Done => {
            writeln!(out, "done: {} inference cycle(s)", report.cycles).ok();
            EXIT_OK
        }
        RunStatus::GiveUp(reason) => {
            writeln!(out, "gave up: {reason}").ok();
            EXIT_GIVE_UP
        }
    };
    Ok((report.trace, code))
}

/// Lines typed at the terminal, parsed as terms.
struct StdinInput;

impl Interaction for StdinInput {
    fn perceive(&mut self, _kind: &str, expectations: &[Term]) -> crate::sitlog::Result<Perceived> {
        let shown: Vec<String> = expectations.iter().map(write_compact).collect();
        print!("[{}] > ", shown.join(" | "));
        std::io::stdout().flush().ok();
        let mut line = String::new();
        if std::io::stdin().lock().read_line(&mut line).unwrap_or(0) == 0 {
            return Ok(Perceived::Exhausted);
        }
        let line = line.trim().trim_end_matches('.');
        let input = parse_term(line).unwrap_or_else(|_| Term::sym(line));
        Ok(match crate::sitlog::match_expectation(expectations, &input) {
            Some((k, _)) => Perceived::Arc(k, input),
            None => Perceived::NoMatch(input),
        })
    }

    fn perform(&mut self, action: &Term) -> crate::sitlog::Result<()> {
        println!("{}", write_compact(action));
        Ok(())
    }
}

/// A program run with the demo user functions, for programs that need no
/// world.
fn run_program(args: &RunArgs, out: &mut dyn Write) -> Result<(String, i32), i32> {
    if args.program.is_empty() {
        writeln!(out, "error: give --scenario or at least one --program").ok();
        return Err(EXIT_LOAD);
    }
    let program = load_program(&args.program).map_err(|e| fail(out, &e))?;
    let bad = |what: &str, e: &dyn std::fmt::Display| {
        LoadError { path: PathBuf::from(format!("--{what}")), message: e.to_string() }
    };
    let pipe = parse_term(&args.pipe).map_err(|e| fail(out, &bad("pipe", &e)))?;
    let mut io: Box<dyn Interaction> = if args.interactive {
        Box::new(StdinInput)
    } else {
        let script = args.script.as_deref().unwrap_or("[]");
        let t = parse_term(script).map_err(|e| fail(out, &bad("script", &e)))?;
        let items = t.as_list().ok_or_else(|| fail(out, &bad("script", &"expected a list")))?;
        Box::new(EchoingSpeech::new(items.to_vec()))
    };
    let mut engine = Engine::with_functions(&program, dummy_functions());
    match engine.run(pipe, io.as_mut()) {
        Ok(outcome) => {
            let trace = format_trace(&outcome);
            write!(out, "{trace}").ok();
            Ok((trace, EXIT_OK))
        }
        Err(e) => {
            let trace = format_history(engine.history());
            write!(out, "{trace}").ok();
            writeln!(out, "gave up: {e}").ok();
            Ok((trace, EXIT_GIVE_UP))
        }
    }
}

fn normalize(s: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = s.lines().map(str::trim_end).collect();
    while lines.last() == Some(&"") {
        lines.pop();
    }
    lines
}

/// Equal up to trailing whitespace; otherwise names the first differing line.
pub fn compare_traces(trace: &str, golden: &str) -> Result<(), String> {
    let (a, b) = (normalize(trace), normalize(golden));
    for i in 0..a.len().max(b.len()) {
        let (x, y) = (a.get(i), b.get(i));
        if x != y {
            return Err(format!(
                "line {}: expected {:?}, found {:?}",
                i + 1,
                y.copied().unwrap_or("<end of file>"),
                x.copied().unwrap_or("<end of file>")
            ));
        }
    }
    Ok(())
}

pub fn cmd_trace_check(trace: &Path, golden: &Path, out: &mut dyn Write) -> i32 {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| LoadError { path: p.to_path_buf(), message: e.to_string() });
    let (t, g) = match (read(trace), read(golden)) {
        (Ok(t), Ok(g)) => (t, g),
        (Err(e), _) | (_, Err(e)) => return fail(out, &e),
    };
    match compare_traces(&t, &g) {
        Ok(()) => {
            writeln!(out, "identical").ok();
            EXIT_OK
        }
        Err(msg) => {
            writeln!(out, "{msg}").ok();
            EXIT_MISMATCH
        }
    }
}

pub fn cmd_kb(path: &Path, input: impl BufRead, out: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(out, &LoadError { path: path.to_path_buf(), message: e.to_string() }),
    };
    let mut kb = match Taxonomy::load(&text) {
        Ok(kb) => kb,
        Err(e) => return fail(out, &LoadError { path: path.to_path_buf(), message: e.to_string() }),
    };
    for line in input.lines() {
        let Ok(line) = line else { break };
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if matches!(line, "quit" | "exit") {
            break;
        }
        match kb_command(&mut kb, line) {
            Ok(reply) => writeln!(out, "{reply}").ok(),
            Err(e) => writeln!(out, "error: {e}").ok(),
        };
    }
    EXIT_OK
}

const KB_HELP: &str = "\
ask S L            yes, no or unknown
class C | prop L | rel L | expl L
                   extension of a class, property, relation or explanation
classes I | props I | rels I | expls I
                   profile of an individual
closure I          every literal that holds for I
preferred S A [K]  preferred value of A, with known literals K
values S A [K]     preferred value list of A
abduce S L         explanation of an observed literal
explain S A        explanation of the preferred value of A
update OP PAYLOAD  add_class, remove_class, add_individual, remove_individual,
                   assert, retract or set
dump               the KB in load format";

fn literal(t: &Term) -> Result<Literal, String> {
    Literal::from_term(t).ok_or_else(|| format!("not a literal: {t}"))
}

fn known(rest: &[Term]) -> Result<Vec<Literal>, String> {
    match rest {
        [] => Ok(Vec::new()),
        [t] => t.as_list().map_or_else(|| Ok(vec![literal(t)?]), |l| l.iter().map(literal).collect()),
        _ => Err("too many arguments".into()),
    }
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

/// One REPL command.
pub fn kb_command(kb: &mut Taxonomy, line: &str) -> Result<String, String> {
    let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    if cmd == "update" {
        let (op, payload) = rest.split_once(char::is_whitespace).ok_or("usage: update OP PAYLOAD")?;
        let op = UpdateOp::parse(op).ok_or_else(|| format!("unknown update {op}"))?;
        let p = parse_term(payload.trim()).map_err(|e| e.to_string())?;
        kb.update_in_place(op, &p).map_err(|e| e.to_string())?;
        return Ok("ok".into());
    }
    let args = if rest.is_empty() {
        Vec::new()
    } else {
        parse_clauses(&format!("args({}).", rest.split_whitespace().collect::<Vec<_>>().join(", ")))
            .map_err(|e| e.to_string())?
            .into_iter()
            .next()
            .map(|t| t.args().to_vec())
            .unwrap_or_default()
    };
    let subject = |i: usize| -> Result<String, String> {
        args.get(i).and_then(Term::as_symbol).map(str::to_string).ok_or_else(|| "missing subject".to_string())
    };
    let members = |key: ExtensionKey| -> Result<String, String> {
        let ms = kb.extension_of(&key).map_err(|e| e.to_string())?;
        Ok(list(ms.into_iter().map(|m| match m.explanation {
            Some(e) => format!("{}: {}", m.id, write_compact(&e.to_term())),
            None => m.id,
        })))
    };
    let profile = |kind: ProfileKind| -> Result<String, String> {
        Ok(match kb.profile_of_individual(kind, &subject(0)?).map_err(|e| e.to_string())? {
            Profile::Classes(cs) => list(cs),
            Profile::Literals(ls) => list(ls.iter().map(|l| write_compact(&l.to_term()))),
            Profile::Explanations(es) => list(es.iter().map(|e| write_compact(&e.to_term()))),
        })
    };
    let lit_arg = |i: usize| args.get(i).ok_or("missing literal".to_string()).and_then(literal);
    match cmd {
        "help" => Ok(KB_HELP.into()),
        "ask" => Ok(kb.ask(&subject(0)?, &lit_arg(1)?).map_err(|e| e.to_string())?.to_string()),
        "class" => members(ExtensionKey::Class(subject(0)?)),
        "prop" => members(ExtensionKey::Property(lit_arg(0)?)),
        "rel" => members(ExtensionKey::Relation(lit_arg(0)?)),
        "expl" => members(ExtensionKey::Explanation(lit_arg(0)?)),
        "classes" => profile(ProfileKind::Classes),
        "props" => profile(ProfileKind::Properties),
        "rels" => profile(ProfileKind::Relations),
        "expls" => profile(ProfileKind::Explanations),
        "closure" => {
            let c = kb.resolve_closure(&subject(0)?).map_err(|e| e.to_string())?;
            Ok(list(c.iter().map(|l| write_compact(&l.to_term()))))
        }
        "preferred" => {
            let v = kb.preferred_value(&subject(0)?, &subject(1)?, &known(&args[2.min(args.len())..])?);
            Ok(v.map_err(|e| e.to_string())?.map_or_else(|| "none".to_string(), |t| write_compact(&t)))
        }
        "values" => {
            let v = kb.preferred_value_list(&subject(0)?, &subject(1)?, &known(&args[2.min(args.len())..])?);
            Ok(list(v.map_err(|e| e.to_string())?.iter().map(write_compact)))
        }
        "abduce" => explain(kb, &subject(0)?, &lit_arg(1)?),
        "explain" => {
            let (s, a) = (subject(0)?, subject(1)?);
            let v = kb.preferred_value(&s, &a, &[]).map_err(|e| e.to_string())?;
            let v = v.ok_or_else(|| format!("{s} has no value for {a}"))?;
            explain(kb, &s, &Literal::pair(a, v))
        }
        "dump" => Ok(kb.dump()),
        other => Err(format!("unknown command `{other}`; try help")),
    }
}

fn explain(kb: &Taxonomy, subject: &str, observed: &Literal) -> Result<String, String> {
    match kb.abduce(subject, observed).map_err(|e| e.to_string())? {
        None => Ok("none".into()),
        Some(e) => {
            let cause = match e.antecedents.as_slice() {
                [] => "-".to_string(),
                ls => ls.iter().map(|l| write_compact(&l.to_term())).collect::<Vec<_>>().join(", "),
            };
            Ok(format!("{cause} (weight {})", e.weight))
        }
    }
}
