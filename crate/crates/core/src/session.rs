//! Scenario loading and the shared runtime behind dialogue-model user
//! functions: world, KB, reply channel and run record.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::inference::{FloatCostModel, Obligation};
use crate::kb::Taxonomy;
use crate::prefs::HomeState;
use crate::record::{Event, Record};
use crate::sitlog::{
    format_trace, match_expectation, Engine, EngineError, Functions, Interaction, Perceived, Program, RunOutcome,
};
use crate::term::{parse_clauses, parse_term, write_compact, Term};
use crate::world::{Channel, Notification, Observation, ScriptedReplies, Utterance, WorldState};

/// A file that could not be read or parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl std::error::Error for LoadError {}

fn load_err(path: &Path, e: impl fmt::Display) -> LoadError {
    LoadError { path: path.to_path_buf(), message: e.to_string() }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| load_err(path, e))
}

/// Which see notifications the robot speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notify {
    All,
    /// Only exceptions about the object being looked for.
    Sought,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    pub name: String,
    pub kb: Option<PathBuf>,
    pub programs: Vec<PathBuf>,
    pub cost_model: Option<PathBuf>,
    pub world: WorldState,
    pub replies: Vec<Term>,
    pub user: String,
    pub preferences: Vec<Vec<String>>,
    pub notify: Notify,
}

fn symbols(t: &Term) -> Option<Vec<String>> {
    t.as_list()?.iter().map(|x| x.as_symbol().map(str::to_string)).collect()
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, LoadError> {
        let clauses = parse_clauses(&read(path)?).map_err(|e| load_err(path, e))?;
        let world = WorldState::from_terms(&clauses).map_err(|e| load_err(path, e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let file = |t: &Term| t.as_symbol().map(|s| dir.join(s)).ok_or_else(|| load_err(path, format!("bad path {t}")));
        let mut sc = Scenario {
            path: path.to_path_buf(),
            name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            kb: None,
            programs: Vec::new(),
            cost_model: None,
            world,
            replies: Vec::new(),
            user: "user".into(),
            preferences: Vec::new(),
            notify: Notify::All,
        };
        for c in &clauses {
            match (c.name(), c.args()) {
                (Some("name"), [n]) => sc.name = write_compact(n),
                (Some("kb"), [p]) => sc.kb = Some(file(p)?),
                (Some("program"), [p]) => sc.programs.push(file(p)?),
                (Some("cost_model"), [p]) => sc.cost_model = Some(file(p)?),
                (Some("replies"), [r]) => {
                    sc.replies = r.as_list().ok_or_else(|| load_err(path, "replies must be a list"))?.to_vec()
                }
                (Some("user"), [u]) => sc.user = write_compact(u),
                (Some("preferences"), [ps]) => {
                    sc.preferences = ps
                        .as_list()
                        .and_then(|items| items.iter().map(symbols).collect())
                        .ok_or_else(|| load_err(path, "preferences must be a list of symbol lists"))?
                }
                (Some("notify"), [n]) => {
                    sc.notify = match n.as_symbol() {
                        Some("all") => Notify::All,
                        Some("sought") => Notify::Sought,
                        _ => return Err(load_err(path, format!("bad notify mode {n}"))),
                    }
                }
                _ => {}
            }
        }
        Ok(sc)
    }
}

/// Paths and overrides for one run.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub programs: Vec<PathBuf>,
    pub kb: Option<PathBuf>,
    pub cost_model: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Everything a run needs, loaded and cross-checked.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub program: Program,
    pub kb: Taxonomy,
    pub cost: FloatCostModel,
    pub seed: u64,
}

/// Programs are concatenated before validation, so libraries of recovery
/// models need no `main` of their own.
pub fn load_program(paths: &[PathBuf]) -> Result<Program, LoadError> {
    let mut clauses = Vec::new();
    for p in paths {
        clauses.extend(parse_clauses(&read(p)?).map_err(|e| load_err(p, e))?);
    }
    let first = paths.first().cloned().unwrap_or_default();
    Program::from_terms(&clauses).map_err(|e| load_err(&first, e))
}

impl RunConfig {
    pub fn prepare(&self) -> Result<Prepared, LoadError> {
        let scenario = Scenario::load(&self.scenario)?;
        let kb_path = self
            .kb
            .clone()
            .or_else(|| scenario.kb.clone())
            .ok_or_else(|| load_err(&self.scenario, "no knowledge base given"))?;
        let kb = Taxonomy::load(&read(&kb_path)?).map_err(|e| load_err(&kb_path, e))?;
        scenario.world.check_against(&kb).map_err(|e| load_err(&self.scenario, e))?;
        let programs = if self.programs.is_empty() { scenario.programs.clone() } else { self.programs.clone() };
        if programs.is_empty() {
            return Err(load_err(&self.scenario, "no dialogue-model program given"));
        }
        let program = load_program(&programs)?;
        let cost = match self.cost_model.clone().or_else(|| scenario.cost_model.clone()) {
            Some(p) => FloatCostModel::load(&read(&p)?).map_err(|e| load_err(&p, e))?,
            None => FloatCostModel::new(0.0),
        };
        let seed = self.seed.unwrap_or(scenario.world.rng_seed);
        Ok(Prepared { scenario, program, kb, cost, seed })
    }
}

/// Replies typed on standard input, one term per line.
pub struct StdinChannel;

impl Channel for StdinChannel {
    fn reply(&mut self, prompt: &str) -> Option<Term> {
        print!("[{prompt}] user> ");
        std::io::stdout().flush().ok();
        let mut line = String::new();
        if std::io::stdin().lock().read_line(&mut line).ok()? == 0 {
            return None;
        }
        let line = line.trim().trim_end_matches('.');
        Some(parse_term(line).unwrap_or_else(|_| Term::sym(line)))
    }
}

/// Inputs of the inference cycle carried across cycles.
#[derive(Debug, Clone, Default)]
pub struct InferenceContext {
    pub previous_shelves: Vec<(String, BTreeSet<String>)>,
    pub objects_placed: BTreeSet<String>,
    pub pending: Vec<Obligation>,
}

pub struct Session {
    pub world: WorldState,
    pub kb: Taxonomy,
    pub channel: Box<dyn Channel>,
    pub record: Record,
    pub rng: ChaCha8Rng,
    pub cost: FloatCostModel,
    pub ctx: InferenceContext,
    pub cycles: usize,
    pub user: String,
    pub preferences: Vec<Vec<String>>,
    pub notify: Notify,
    pub home: HomeState,
    /// Shelf inspected since the robot last arrived somewhere.
    pub seen_at: Option<String>,
    pub last_question: String,
    pub gave_up: Option<String>,
    /// Print the conversation as it happens.
    pub echo: bool,
}

impl Session {
    pub fn new(p: &Prepared, channel: Box<dyn Channel>) -> Session {
        let mut record = Record::default();
        record.push(Event::Seed { seed: p.seed });
        Session {
            world: p.scenario.world.clone(),
            kb: p.kb.clone(),
            channel,
            record,
            rng: ChaCha8Rng::seed_from_u64(p.seed),
            cost: p.cost.clone(),
            ctx: InferenceContext::default(),
            cycles: 0,
            user: p.scenario.user.clone(),
            preferences: p.scenario.preferences.clone(),
            notify: p.scenario.notify,
            home: HomeState::default(),
            seen_at: None,
            last_question: String::new(),
            gave_up: None,
            echo: false,
        }
    }

    /// Printed name from the KB `name` property, or the id itself.
    pub fn display_name(&self, id: &str) -> String {
        match self.kb.preferred_value(id, "name", &[]) {
            Ok(Some(t)) => text_of(&t),
            _ => format!("the {id}"),
        }
    }
}

/// Plain text of a term: symbols unquoted.
pub fn text_of(t: &Term) -> String {
    match t {
        Term::Symbol(s) => s.clone(),
        other => write_compact(other),
    }
}

/// Replaces each `~w` in `template` with the next argument.
pub fn format_text(template: &str, args: &[Term]) -> String {
    let mut out = String::new();
    let mut rest = template;
    let mut it = args.iter();
    while let Some(i) = rest.find("~w") {
        out.push_str(&rest[..i]);
        if let Some(a) = it.next() {
            out.push_str(&text_of(a));
        }
        rest = &rest[i + 2..];
    }
    out.push_str(rest);
    out
}

/// Outcome of a robot step performed on behalf of a dialogue model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flow {
    Ok,
    /// A behavior error kind left for the caller.
    Failed(String),
    GiveUp(String),
}

/// Attempts allowed per failing move before giving up.
pub const MAX_RECOVERY: usize = 2;

pub(crate) fn host(e: impl fmt::Display) -> EngineError {
    EngineError::Host(e.to_string())
}

/// Session plus the program, shared by every engine of a run.
#[derive(Clone)]
pub struct Runtime {
    pub session: Rc<RefCell<Session>>,
    pub program: Rc<Program>,
}

impl Runtime {
    pub fn new(session: Session, program: Program) -> Runtime {
        Runtime { session: Rc::new(RefCell::new(session)), program: Rc::new(program) }
    }

    /// Every host function: common ones, dispatch and the home workflows.
    pub fn functions(&self) -> Functions<'static> {
        let mut fs = Functions::new();
        let rt = self.clone();
        fs.register("fmt", move |args: &[Term], _| match args {
            [Term::Symbol(t), vals] => {
                let vals = vals.as_list().map(<[Term]>::to_vec).unwrap_or_else(|| vec![vals.clone()]);
                Ok(Term::sym(format_text(t, &vals)))
            }
            _ => Err(host("fmt expects a template and a list")),
        });
        fs.register("name", move |args: &[Term], _| match args {
            [t] => Ok(Term::sym(rt.session.borrow().display_name(&text_of(t)))),
            _ => Err(host("name expects one argument")),
        });
        let rt = self.clone();
        fs.register("user_name", move |_: &[Term], _| Ok(Term::sym(rt.session.borrow().user.clone())));
        crate::inference::register_functions(&mut fs, self);
        crate::prefs::register_functions(&mut fs, self);
        fs
    }

    pub fn io(&self) -> SessionIo {
        SessionIo { rt: self.clone() }
    }

    pub fn has_model(&self, name: &str) -> bool {
        self.program.model(name).is_some()
    }

    /// Runs one dialogue model to its final situation, returning its id.
    pub fn run_dm(&self, model: &str, pipe: Term) -> Result<(Term, RunOutcome), EngineError> {
        let prog = Rc::clone(&self.program);
        let mut engine = Engine::with_functions(&prog, self.functions());
        let mut io = self.io();
        let out = engine.run_model(model, pipe, &mut io)?;
        let fin = out.history.last().map(|h| h.situation.clone()).unwrap_or_else(|| Term::sym("is"));
        Ok((fin, out))
    }

    pub fn record(&self, e: Event) {
        self.session.borrow_mut().record.push(e);
    }

    pub fn say(&self, text: &str) {
        let mut s = self.session.borrow_mut();
        s.world.behavior_say(text);
        s.record.push(Event::Say { text: text.to_string() });
        if s.echo {
            println!("robot> {text}");
        }
    }

    pub fn ask(&self, text: &str) {
        let mut s = self.session.borrow_mut();
        s.world.record_question(text);
        s.last_question = text.to_string();
        s.record.push(Event::Ask { text: text.to_string() });
        if s.echo {
            println!("robot> {text}");
        }
    }

    pub fn name(&self, id: &str) -> String {
        self.session.borrow().display_name(id)
    }

    pub fn give_up(&self, reason: &str) {
        let mut s = self.session.borrow_mut();
        if s.gave_up.is_none() {
            s.gave_up = Some(reason.to_string());
            s.record.push(Event::GiveUp { reason: reason.to_string() });
        }
    }

    fn behavior(&self, b: Term, status: &impl fmt::Display) {
        self.record(Event::Behavior { behavior: b, status: status.to_string() });
    }

    /// Moves with the recovery protocol named after the error kind, if the
    /// program has one.
    pub fn do_move(&self, target: &str) -> Flow {
        let call = Term::compound("move", vec![Term::sym(target)]);
        for attempt in 0.. {
            let r = {
                let mut s = self.session.borrow_mut();
                let before = s.world.robot_at.clone();
                let r = s.world.behavior_move(target);
                if s.world.robot_at != before {
                    s.seen_at = None;
                }
                r
            };
            let r = match r {
                Ok(r) => r,
                Err(e) => return Flow::GiveUp(e.to_string()),
            };
            self.behavior(call.clone(), &r.status);
            let Some(kind) = r.error_kind().map(str::to_string) else {
                return Flow::Ok;
            };
            if attempt >= MAX_RECOVERY || !self.has_model(&kind) {
                return Flow::GiveUp(format!("cannot move to {target}: {kind}"));
            }
            let outcome = match self.run_dm(&kind, call.clone()) {
                Ok((fin, _)) => fin,
                Err(e) => Term::compound("error", vec![Term::sym(e.to_string())]),
            };
            self.record(Event::Recovery { protocol: kind.clone(), attempt: attempt + 1, outcome: outcome.clone() });
            if !outcome.is_symbol("recovered") {
                return Flow::GiveUp(format!("recovery from {kind} failed"));
            }
        }
        unreachable!("the loop returns")
    }

    /// `find(user)`: goes to where the user is.
    pub fn find_user(&self) -> Flow {
        let r = {
            let mut s = self.session.borrow_mut();
            s.seen_at = None;
            s.world.behavior_find("user")
        };
        match r {
            Ok(r) => {
                self.behavior(Term::compound("find", vec![Term::sym("user")]), &r.status);
                match r.error_kind() {
                    None => Flow::Ok,
                    Some(k) => Flow::GiveUp(format!("cannot find the user: {k}")),
                }
            }
            Err(e) => Flow::GiveUp(e.to_string()),
        }
    }

    /// Inspects the shelf the robot stands at unless it already did since
    /// arriving, discharging the cognitive obligations of the observation.
    pub fn ensure_seen(&self, sought: Option<&str>) -> Result<Option<Observation>, EngineError> {
        let (obs, notes, mode) = {
            let mut guard = self.session.borrow_mut();
            let s = &mut *guard;
            let at = s.world.robot_at.clone();
            if !s.world.shelves.contains_key(&at) || s.seen_at.as_deref() == Some(at.as_str()) {
                return Ok(None);
            }
            let (obs, mut notes) = s.world.behavior_see(&mut s.kb, &at).map_err(host)?;
            // the object looked for is expected here whatever the KB says
            if let Some(o) = sought.filter(|o| !obs.p.contains(*o) && s.kb.individual(o).is_some()) {
                use crate::kb::{Kind, Literal, WeightedClause};
                let not_here = Literal::pair("loc", Term::sym(at.clone())).negate();
                if !crate::world::has_fact(&s.kb, o, &not_here) {
                    s.kb.assert_clause(o, Kind::Property, WeightedClause::fact(not_here, 0)).map_err(host)?;
                    notes.push(Notification::Exception { object: o.to_string(), shelf: at.clone() });
                }
            }
            s.seen_at = Some(at.clone());
            s.record.push(Event::Behavior { behavior: Term::compound("see", vec![Term::sym(at.clone())]), status: "ok".into() });
            s.record.push(Event::Observation { observation: obs.clone() });
            for n in &notes {
                s.record.push(Event::Notification { note: n.clone() });
            }
            match s.ctx.previous_shelves.iter_mut().find(|(sh, _)| *sh == at) {
                Some(entry) => entry.1 = obs.p.clone(),
                None => s.ctx.previous_shelves.push((at.clone(), obs.p.clone())),
            }
            s.home.seen.extend(obs.p.iter().cloned());
            for o in &obs.m {
                let Some(home) = s.world.class_shelf(&s.kb, o) else { continue };
                let known = s.ctx.pending.iter().any(|p| p.object() == o);
                if !known && !s.ctx.objects_placed.contains(o) {
                    s.ctx.pending.push(Obligation::place(o, &home));
                }
            }
            (obs, notes, s.notify)
        };
        for n in notes {
            match &n {
                Notification::Exception { object, shelf } if mode == Notify::All || Some(object.as_str()) == sought => {
                    let text = format!("The {object} is not in {}.", self.name(shelf));
                    self.say(&text);
                }
                Notification::Misplaced { object, shelf } if mode == Notify::All => {
                    let text = format!("The {object} should not be in {}.", self.name(shelf));
                    self.say(&text);
                }
                _ => {}
            }
        }
        Ok(Some(obs))
    }

    /// Takes `object` at the current shelf, announcing the hand.
    pub fn take(&self, object: &str) -> Flow {
        let hand = self.session.borrow().world.hand_for(object);
        let here = {
            let s = self.session.borrow();
            s.world.on_shelf(&s.world.robot_at).contains(object)
        };
        if let (Some(h), true) = (hand, here) {
            self.say(&format!("Attempting to grab the {object} with my {h} arm."));
        }
        let r = self.session.borrow_mut().world.behavior_take(object);
        let r = match r {
            Ok(r) => r,
            Err(e) => return Flow::GiveUp(e.to_string()),
        };
        self.behavior(Term::compound("take", vec![Term::sym(object)]), &r.status);
        match r.error_kind() {
            None => {
                self.say(&format!("I took the {object}."));
                Flow::Ok
            }
            Some(k) => Flow::Failed(k.to_string()),
        }
    }

    /// Hands `object` over or puts it on a shelf, with the KB bookkeeping of
    /// a placement.
    pub fn deliver(&self, object: &str, target: &str) -> Flow {
        let r = self.session.borrow_mut().world.behavior_deliver(object, target);
        let r = match r {
            Ok(r) => r,
            Err(e) => return Flow::GiveUp(e.to_string()),
        };
        let call = Term::compound("deliver", vec![Term::sym(object), Term::sym(target)]);
        self.behavior(call, &r.status);
        if let Some(k) = r.error_kind() {
            return Flow::Failed(k.to_string());
        }
        let at = self.session.borrow().world.robot_at.clone();
        self.record(Event::Delivered { object: object.into(), to: target.into(), at });
        if target == "user" {
            self.say(&format!("Here is the {object}."));
            return Flow::Ok;
        }
        if let Err(e) = self.placed(object, target) {
            return Flow::GiveUp(e.to_string());
        }
        self.say(&format!("I put the {object} in its right shelf."));
        Flow::Ok
    }

    /// Beliefs after `object` was put on `shelf` by the robot itself.
    fn placed(&self, object: &str, shelf: &str) -> Result<(), crate::kb::KbError> {
        use crate::kb::{Clause, Literal};
        let mut guard = self.session.borrow_mut();
        let s = &mut *guard;
        s.kb.set_value(object, "last_seen", Term::sym(shelf))?;
        let misplaced = Clause::Fact(Literal::label("misplaced"));
        if crate::world::has_fact(&s.kb, object, &Literal::label("misplaced")) {
            s.kb.retract_clause(object, &misplaced)?;
        }
        let not_here = Literal::pair("loc", Term::sym(shelf)).negate();
        if crate::world::has_fact(&s.kb, object, &not_here) {
            s.kb.retract_clause(object, &Clause::Fact(not_here))?;
        }
        s.record.push(Event::KbUpdate {
            subject: object.into(),
            update: Term::op("=>", Term::sym("last_seen"), Term::sym(shelf)),
        });
        s.ctx.pending.retain(|p| p.object() != object);
        s.ctx.objects_placed.insert(object.to_string());
        if let Some(entry) = s.ctx.previous_shelves.iter_mut().find(|(sh, _)| sh == shelf) {
            entry.1.insert(object.to_string());
        }
        Ok(())
    }
}

/// Engine-facing side of the session: `listen` situations read the reply
/// channel, `say`/`ask`/`screen` actions speak.
pub struct SessionIo {
    rt: Runtime,
}

impl Interaction for SessionIo {
    fn perceive(&mut self, kind: &str, expectations: &[Term]) -> crate::sitlog::Result<Perceived> {
        if kind != "listen" && kind != "speech" {
            return Err(host(format!("no perception for situations of type `{kind}`")));
        }
        let reply = {
            let mut guard = self.rt.session.borrow_mut();
            let s = &mut *guard;
            let prompt = s.last_question.clone();
            let Some(r) = s.channel.reply(&prompt) else {
                return Ok(Perceived::Exhausted);
            };
            s.world.record_reply(&r);
            s.record.push(Event::Reply { reply: r.clone() });
            r
        };
        Ok(match match_expectation(expectations, &reply) {
            Some((k, _)) => Perceived::Arc(k, reply),
            None => Perceived::NoMatch(reply),
        })
    }

    fn perform(&mut self, action: &Term) -> crate::sitlog::Result<()> {
        match (action.name(), action.args()) {
            (Some("say" | "screen"), [t]) => self.rt.say(&text_of(t)),
            (Some("ask"), [t]) => self.rt.ask(&text_of(t)),
            _ => {}
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Done,
    GiveUp(String),
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: RunStatus,
    pub record: Record,
    /// Task history of the main program.
    pub trace: String,
    pub transcript: Vec<Utterance>,
    pub kb: Taxonomy,
    pub world: WorldState,
    pub cycles: usize,
}

/// Runs the scenario's `main` model to completion.
pub fn run(p: &Prepared, channel: Box<dyn Channel>, echo: bool) -> RunReport {
    let mut session = Session::new(p, channel);
    session.echo = echo;
    let rt = Runtime::new(session, p.program.clone());
    let prog = Rc::clone(&rt.program);
    let mut engine = Engine::with_functions(&prog, rt.functions());
    let mut io = rt.io();
    let result = engine.run(Term::sym("start"), &mut io);
    let trace = match &result {
        Ok(out) => format_trace(out),
        Err(_) => crate::sitlog::format_history(engine.history()),
    };
    if let Err(e) = &result {
        rt.give_up(&e.to_string());
    }
    drop(engine);
    let mut s = rt.session.borrow_mut();
    let trace = trace + &cycle_lines(&s.record);
    let status = match s.gave_up.clone() {
        Some(r) => RunStatus::GiveUp(r),
        None => {
            s.record.push(Event::Done);
            RunStatus::Done
        }
    };
    RunReport {
        status,
        record: s.record.clone(),
        trace,
        transcript: s.world.transcript.clone(),
        kb: s.kb.clone(),
        world: s.world.clone(),
        cycles: s.cycles,
    }
}

/// One line per inference cycle, appended to the main model's trace since
/// the cycles run inside user functions and leave no situation of their own.
fn cycle_lines(record: &Record) -> String {
    record
        .events
        .iter()
        .filter_map(|e| match e {
            Event::Cycle { depth, goal, shelf } => Some(format!("Inference Cycle {depth}: {goal} at {shelf}\n")),
            _ => None,
        })
        .collect()
}

/// Scripted run with the scenario's own replies.
pub fn run_scripted(p: &Prepared) -> RunReport {
    run(p, Box::new(ScriptedReplies(p.scenario.replies.iter().cloned().collect())), false)
}
