//! Oracles and instance generators shared by the integration tests and the
//! acceptance suite. Each oracle is written from the contract, not from the
//! implementation it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;

use butler::inference::{check_plan, decide, plan, Action, FloatCostModel, InferenceError, Objective, Obligation, PlanProblem, PlanSettings};
use butler::kb::{Clause, Kind, Literal, QueryAnswer, Taxonomy, WeightedClause};
use butler::term::{parse_clauses, parse_term, print_term, writeq_compact, Term};
use butler::world::{Hand, Holder, WorldState};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

// ---------------------------------------------------------------- decide

/// Every subset of the pending costs, best first under the contract:
/// objective on cost, then fewer members, then the first index list.
fn decide_brute(to: i64, pending: &[i64], r_max: i64, objective: Objective) -> Option<(Vec<usize>, i64)> {
    if to > r_max {
        return None;
    }
    let mut all: Vec<(Vec<usize>, i64)> = Vec::new();
    for mask in 0u32..(1 << pending.len()) {
        let chosen: Vec<usize> = (0..pending.len()).filter(|i| mask >> i & 1 == 1).collect();
        let cost = to + chosen.iter().map(|&i| pending[i]).sum::<i64>();
        if cost <= r_max {
            all.push((chosen, cost));
        }
    }
    all.sort_by(|a, b| {
        let by_cost = match objective {
            Objective::Max => b.1.cmp(&a.1),
            Objective::Min => a.1.cmp(&b.1),
        };
        by_cost.then(a.0.len().cmp(&b.0.len())).then(a.0.cmp(&b.0))
    });
    all.into_iter().next()
}

/// One random decision instance with at most six pending obligations.
pub fn decide_case(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(0..=6);
    let to = rng.gen_range(1..=20i64);
    let pending: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
    let r_max = rng.gen_range(0..=90i64);
    let objective = if rng.gen_bool(0.5) { Objective::Max } else { Objective::Min };
    let r = Ratio::from_integer;
    let costs: Vec<Ratio<i64>> = pending.iter().map(|&c| r(c)).collect();
    let got = decide(&r(to), &costs, &r(r_max), objective);
    let want = decide_brute(to, &pending, r_max, objective);
    match (got, want) {
        (Err(InferenceError::BudgetTooSmall { .. }), None) => Ok(()),
        (Ok(d), Some((chosen, cost))) if d.chosen == chosen && d.cost == r(cost) => Ok(()),
        (got, want) => Err(format!(
            "to {to}, pending {pending:?}, r_max {r_max}, {objective:?}: got {got:?}, expected {want:?}"
        )),
    }
}

// ---------------------------------------------------------------- planning

const CLIENT: &str = "counter";

#[derive(Debug, Clone)]
pub struct PlanInstance {
    pub world: WorldState,
    pub problem: PlanProblem,
}

/// Up to three obligations over four shelves and a client counter, with
/// random distances, sources and held objects.
pub fn plan_instance(seed: u64) -> PlanInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shelves: Vec<String> = (1..=4).map(|i| format!("s{i}")).collect();
    let mut places = vec![CLIENT.to_string()];
    places.extend(shelves.iter().cloned());
    let k = rng.gen_range(1..=3);
    let mut obligations = Vec::new();
    let mut held = Vec::new();
    let mut on: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in 0..k {
        let o = format!("o{i}");
        let ob = if rng.gen_bool(0.5) {
            Obligation::serve(&o)
        } else {
            Obligation::place(&o, shelves.choose(&mut rng).unwrap())
        };
        let source = if held.len() < 2 && rng.gen_bool(0.25) {
            held.push(o.clone());
            None
        } else {
            let s = shelves.choose(&mut rng).unwrap().clone();
            on.entry(s.clone()).or_default().push(o.clone());
            Some(s)
        };
        obligations.push((ob, source));
    }
    let start = places.choose(&mut rng).unwrap().clone();
    let mut text = format!("rooms([store]). points([{CLIENT}]). robot_at({start}). user_at({CLIENT}). seed(1).\n");
    for s in &shelves {
        text.push_str(&format!("shelf({s}, c_{s}, store).\n"));
    }
    for (i, a) in places.iter().enumerate() {
        for b in &places[i + 1..] {
            text.push_str(&format!("distance({a}, {b}, {}).\n", rng.gen_range(1..=6)));
        }
    }
    for (s, objs) in &on {
        text.push_str(&format!("on({s}, [{}]).\n", objs.join(", ")));
    }
    let mut world = WorldState::from_terms(&parse_clauses(&text).expect("generated scenario parses")).expect("generated world");
    for (o, hand) in held.iter().zip([Hand::Right, Hand::Left]) {
        match hand {
            Hand::Right => world.right = Some(o.clone()),
            Hand::Left => world.left = Some(o.clone()),
        }
        world.placement.insert(o.clone(), Holder::Hand(hand));
    }
    let problem = PlanProblem { start, right: world.right.clone(), left: world.left.clone(), obligations };
    PlanInstance { world, problem }
}

pub fn plan_model() -> FloatCostModel {
    FloatCostModel::new(1e9)
        .with("move", 1.0, 0.95)
        .with("take", 3.0, 0.9)
        .with("search", 1.0, 0.9)
        .with("deliver", 2.0, 1.0)
}

/// Robot state of the breadth-first oracle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    at: String,
    right: Option<String>,
    left: Option<String>,
    open: Vec<bool>,
    pool: Vec<Action>,
    after_nav: bool,
}

fn nav(a: &Action) -> bool {
    matches!(a, Action::Move(_) | Action::SearchClient)
}

/// Contract preconditions: no two navigation steps in a row, navigation
/// changes the place, takes need a free hand at the object's source, and
/// deliveries need the object in hand at its destination.
fn oracle_step(p: &PlanProblem, n: &Node, a: &Action) -> Option<Node> {
    let mut m = n.clone();
    let holds = |o: &str| n.right.as_deref() == Some(o) || n.left.as_deref() == Some(o);
    let open_for = |o: &str| (0..p.obligations.len()).find(|&i| n.open[i] && p.obligations[i].0.object() == o);
    match a {
        Action::Move(s) => {
            if n.after_nav || *s == n.at {
                return None;
            }
            m.at = s.clone();
        }
        Action::SearchClient => {
            if n.after_nav || n.at == CLIENT {
                return None;
            }
            m.at = CLIENT.to_string();
        }
        Action::SearchObject(_) => return None,
        Action::Take(o) => {
            let i = open_for(o)?;
            if holds(o) || p.obligations[i].1.as_deref() != Some(n.at.as_str()) {
                return None;
            }
            if n.right.is_none() {
                m.right = Some(o.clone());
            } else if n.left.is_none() {
                m.left = Some(o.clone());
            } else {
                return None;
            }
        }
        Action::Deliver(o) => {
            let i = open_for(o)?;
            let dest = match &p.obligations[i].0 {
                Obligation::Serve { .. } => CLIENT.to_string(),
                Obligation::Place { shelf, .. } => shelf.clone(),
            };
            if !holds(o) || dest != n.at {
                return None;
            }
            if n.right.as_deref() == Some(o.as_str()) {
                m.right = None;
            } else {
                m.left = None;
            }
            m.open[i] = false;
        }
    }
    let k = m.pool.iter().position(|b| b == a)?;
    m.pool.remove(k);
    m.after_nav = nav(a);
    Some(m)
}

fn oracle_start(p: &PlanProblem) -> Node {
    let mut pool = p.actions();
    pool.sort();
    Node {
        at: p.start.clone(),
        right: p.right.clone(),
        left: p.left.clone(),
        open: vec![true; p.obligations.len()],
        pool,
        after_nav: false,
    }
}

/// Length of the shortest precondition-respecting plan, if any.
pub fn bfs_min_len(p: &PlanProblem) -> Option<usize> {
    let start = oracle_start(p);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    seen.insert(start);
    while let Some((n, d)) = queue.pop_front() {
        if n.open.iter().all(|o| !o) {
            return Some(d);
        }
        let mut tried = BTreeSet::new();
        for a in &n.pool {
            if !tried.insert(a.clone()) {
                continue;
            }
            if let Some(m) = oracle_step(p, &n, a) {
                if seen.insert(m.clone()) {
                    queue.push_back((m, d + 1));
                }
            }
        }
    }
    None
}

/// Replays `plan` under the oracle's own preconditions.
pub fn oracle_replay(p: &PlanProblem, plan: &[Action]) -> Result<(), String> {
    let mut n = oracle_start(p);
    for (i, a) in plan.iter().enumerate() {
        n = oracle_step(p, &n, a).ok_or_else(|| format!("step {i} ({a}) is not allowed"))?;
    }
    if n.open.iter().any(|o| *o) {
        return Err("obligations left open".into());
    }
    Ok(())
}

/// Runs the plan's behaviors in the simulated world and checks where every
/// object ends up.
pub fn execute_in_world(inst: &PlanInstance, plan: &[Action]) -> Result<(), String> {
    let mut w = inst.world.clone();
    for b in inst.problem.behaviors(plan) {
        let arg = |i: usize| b.args()[i].as_symbol().unwrap().to_string();
        let r = match b.name() {
            Some("move") => w.behavior_move(&arg(0)),
            Some("take") => w.behavior_take(&arg(0)),
            Some("find") => w.behavior_find(&arg(0)),
            Some("deliver") => w.behavior_deliver(&arg(0), &arg(1)),
            _ => return Err(format!("unexpected behavior {b}")),
        }
        .map_err(|e| e.to_string())?;
        if !r.is_ok() {
            return Err(format!("{b} failed: {}", r.status));
        }
    }
    for (o, _) in &inst.problem.obligations {
        let want = match o {
            Obligation::Serve { object } => (object, Holder::Delivered("user".into())),
            Obligation::Place { object, shelf } => (object, Holder::Shelf(shelf.clone())),
        };
        if w.placement.get(want.0) != Some(&want.1) {
            return Err(format!("{} ended at {:?}", want.0, w.placement.get(want.0)));
        }
    }
    Ok(())
}

/// Emitted plans replay cleanly, resolve everything in the world, and agree
/// with the oracle on solvability; short instances stay within two actions
/// of the oracle's minimum.
pub fn plan_case(seed: u64) -> Result<(), String> {
    let inst = plan_instance(seed);
    let p = &inst.problem;
    let got = plan(p, &plan_model(), &inst.world, PlanSettings::default());
    let small = p.actions().len() <= 8;
    let min = if small { bfs_min_len(p) } else { None };
    match got {
        Ok(actions) => {
            check_plan(p, &actions, &inst.world).map_err(|e| format!("checker: {e}"))?;
            oracle_replay(p, &actions).map_err(|e| format!("oracle replay: {e}"))?;
            execute_in_world(&inst, &actions).map_err(|e| format!("world: {e}"))?;
            if small {
                let m = min.ok_or("planner found a plan the oracle says cannot exist")?;
                if actions.len() > m + 2 {
                    return Err(format!("plan of {} actions, oracle minimum {m}", actions.len()));
                }
            }
            Ok(())
        }
        Err(InferenceError::NoPlan) => match (small, min) {
            (true, Some(m)) => Err(format!("no plan, but the oracle found one of {m} actions")),
            (true, None) => Ok(()),
            (false, _) => Err("no plan for an instance with more than 8 actions".into()),
        },
        Err(e) => Err(e.to_string()),
    }
}

// ---------------------------------------------------------------- KB

const LABELS: [&str; 3] = ["p", "q", "r"];
const COLORS: [&str; 3] = ["red", "green", "blue"];
/// Four levels below `top`.
const CLASSES: [(&str, &str); 5] = [("a", "top"), ("b", "a"), ("c", "b"), ("d", "c"), ("e", "b")];
const INDIVIDUALS: [(&str, &str); 4] = [("i1", "d"), ("i2", "c"), ("i3", "e"), ("i4", "a")];

fn random_literal(rng: &mut ChaCha8Rng) -> Literal {
    let lit = if rng.gen_bool(0.6) {
        Literal::label(*LABELS.choose(rng).unwrap())
    } else {
        Literal::pair("color", Term::sym(*COLORS.choose(rng).unwrap()))
    };
    if rng.gen_bool(0.4) {
        lit.negate()
    } else {
        lit
    }
}

pub fn vocabulary() -> Vec<Literal> {
    let mut out: Vec<Literal> = LABELS.iter().map(|l| Literal::label(*l)).collect();
    out.extend(COLORS.iter().map(|c| Literal::pair("color", Term::sym(*c))));
    let negs: Vec<Literal> = out.iter().map(Literal::negate).collect();
    out.extend(negs);
    out
}

pub fn fuzz_taxonomy() -> Taxonomy {
    let mut text = String::from("[class(top, none, [], [], [])");
    for (c, m) in CLASSES {
        let inds: Vec<String> = INDIVIDUALS
            .iter()
            .filter(|(_, k)| *k == c)
            .map(|(i, _)| format!("[id=>{i}, [], []]"))
            .collect();
        text.push_str(&format!(", class({c}, {m}, [], [], [{}])", inds.join(", ")));
    }
    text.push(']');
    Taxonomy::load(&text).expect("fuzz taxonomy loads")
}

fn subjects() -> Vec<&'static str> {
    CLASSES.iter().map(|(c, _)| *c).chain(INDIVIDUALS.iter().map(|(i, _)| *i)).collect()
}

/// Applies one random update; conditional defaults only when allowed.
fn random_update(kb: &mut Taxonomy, rng: &mut ChaCha8Rng, conditional: bool) {
    let subject = *subjects().choose(rng).unwrap();
    let w = rng.gen_range(0..=3);
    let _ = match rng.gen_range(0..10) {
        0..=4 => kb.assert_clause(subject, Kind::Property, WeightedClause::fact(random_literal(rng), w)),
        5 | 6 => {
            let ants = if conditional && rng.gen_bool(0.5) { vec![random_literal(rng)] } else { vec![] };
            kb.assert_clause(subject, Kind::Property, WeightedClause::default(ants, random_literal(rng), w + 1))
        }
        7 => {
            let clauses: Vec<Clause> = kb
                .individual(subject)
                .map(|i| i.props.iter().map(|c| c.clause.clone()).collect())
                .or_else(|| kb.class(subject).map(|c| c.props.iter().map(|c| c.clause.clone()).collect()))
                .unwrap_or_default();
            match clauses.choose(rng) {
                Some(c) => kb.retract_clause(subject, c),
                None => Ok(()),
            }
        }
        8 => kb.set_value(subject, "color", Term::sym(*COLORS.choose(rng).unwrap())),
        _ => kb.clear_value(subject, "color"),
    };
}

/// Priority of a candidate literal: facts before defaults; facts by
/// specificity then weight, defaults by weight then specificity; then
/// declaration order.
type Priority = (u8, u32, u32, usize);

fn candidates(kb: &Taxonomy, id: &str) -> Option<Vec<(Literal, Priority)>> {
    let path = kb.path(id).ok()?;
    let mut out = Vec::new();
    let mut decl = 0;
    for (depth, node) in path.iter().enumerate() {
        let props = kb
            .individual(node)
            .map(|i| i.props.clone())
            .or_else(|| kb.class(node).map(|c| c.props.clone()))?;
        for c in props {
            decl += 1;
            match c.clause {
                Clause::Fact(l) => out.push((l, (0, depth as u32, c.weight, decl))),
                Clause::Default(d) if d.antecedents.is_empty() => {
                    out.push((d.consequent, (1, c.weight, depth as u32, decl)))
                }
                Clause::Default(_) => return None,
            }
        }
    }
    Some(out)
}

/// Two literals cannot both be held: complements, two values of one
/// attribute, or the same literal twice.
fn clash(x: &Literal, y: &Literal) -> bool {
    *x == y.negate() || x == y || (!x.negated && !y.negated && x.attr == y.attr)
}

/// Enumerates every consistent subset of the candidates and keeps the ones
/// where each excluded literal is defeated by an included one of higher
/// priority. Specificity must single out exactly one.
pub fn closure_oracle(kb: &Taxonomy, id: &str) -> Option<Result<BTreeSet<Literal>, String>> {
    let cands = candidates(kb, id)?;
    if cands.len() > 8 {
        return None;
    }
    // same node, same weight, complementary facts: no extension is preferred
    for (i, (x, px)) in cands.iter().enumerate() {
        for (y, py) in &cands[i + 1..] {
            if px.0 == 0 && py.0 == 0 && px.1 == py.1 && px.2 == py.2 && *x == y.negate() {
                return Some(Err("same-level conflict".into()));
            }
        }
    }
    let n = cands.len();
    let mut chosen = Vec::new();
    for mask in 0u32..(1 << n) {
        let inn = |i: usize| mask >> i & 1 == 1;
        let consistent = (0..n).all(|i| (i + 1..n).all(|j| !(inn(i) && inn(j) && clash(&cands[i].0, &cands[j].0))));
        if !consistent {
            continue;
        }
        let defeated = (0..n).filter(|&i| !inn(i)).all(|i| {
            (0..n).any(|j| inn(j) && cands[j].1 < cands[i].1 && clash(&cands[j].0, &cands[i].0))
        });
        if defeated {
            chosen.push((0..n).filter(|&i| inn(i)).map(|i| cands[i].0.clone()).collect::<BTreeSet<_>>());
        }
    }
    Some(match chosen.as_slice() {
        [one] => Ok(one.clone()),
        other => Err(format!("{} preferred extensions", other.len())),
    })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct KbFuzzStats {
    pub queries: usize,
    pub oracle_checks: usize,
}

/// One random update sequence. After every step no subject answers yes to
/// a literal and its complement; on default-free-of-antecedent KBs with at
/// most eight literals per subject the closure equals the oracle's.
pub fn kb_fuzz_case(seed: u64, stats: &mut KbFuzzStats) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conditional = rng.gen_bool(0.5);
    let mut kb = fuzz_taxonomy();
    let steps = rng.gen_range(1..=12);
    for step in 0..steps {
        random_update(&mut kb, &mut rng, conditional);
        for s in subjects() {
            for l in vocabulary().into_iter().filter(|l| !l.negated) {
                let (Ok(a), Ok(b)) = (kb.ask(s, &l), kb.ask(s, &l.negate())) else { continue };
                stats.queries += 1;
                if a == QueryAnswer::Yes && b == QueryAnswer::Yes {
                    return Err(format!("step {step}: {s} answers yes to {l} and its complement"));
                }
            }
        }
    }
    for s in subjects() {
        let Some(want) = closure_oracle(&kb, s) else { continue };
        stats.oracle_checks += 1;
        let got = kb.resolve_closure(s).map(|c| c.into_iter().collect::<BTreeSet<_>>());
        match (got, want) {
            (Ok(g), Ok(w)) if g == w => {}
            (Err(_), Err(_)) => {}
            (g, w) => return Err(format!("{s}: closure {g:?}, oracle {w:?}\n{}", kb.dump())),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- round trip

/// Every shipped data file with its clause list.
pub fn shipped_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut dirs = vec![data("")];
    while let Some(d) = dirs.pop() {
        for e in std::fs::read_dir(&d).expect("data dir") {
            let p = e.expect("entry").path();
            if p.is_dir() {
                dirs.push(p);
            } else if matches!(p.extension().and_then(|x| x.to_str()), Some("kb" | "sitlog" | "scenario" | "cm")) {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

pub fn round_trip_file(path: &PathBuf) -> Result<usize, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let clauses = parse_clauses(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for c in &clauses {
        for printed in [print_term(c), writeq_compact(c)] {
            let back = parse_term(&printed).map_err(|e| format!("{}: reparse failed: {e}", path.display()))?;
            if back != *c {
                return Err(format!("{}: {printed} does not read back", path.display()));
            }
        }
    }
    Ok(clauses.len())
}

const NAMES: [&str; 8] = ["a", "foo", "shelf_food", "Good Bye", "it's", "-", "=>", "[]x"];
const OPS: [&str; 7] = ["==>", "=>>", "=>", ":", "->", "==", "="];

pub fn random_term(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Term::sym(*NAMES.choose(rng).unwrap()),
            1 => Term::Number(rng.gen_range(-99..100)),
            _ => Term::var(format!("{}{}", ["X", "Var", "_G"].choose(rng).unwrap(), rng.gen_range(0..9))),
        };
    }
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(1..=3);
            Term::compound(*NAMES.choose(rng).unwrap(), (0..n).map(|_| random_term(rng, depth - 1)).collect())
        }
        1 => {
            let n = rng.gen_range(0..=3);
            Term::list((0..n).map(|_| random_term(rng, depth - 1)).collect())
        }
        _ => Term::op(OPS.choose(rng).unwrap(), random_term(rng, depth - 1), random_term(rng, depth - 1)),
    }
}

pub fn term_round_trip(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = random_term(&mut rng, 4);
    for printed in [print_term(&t), writeq_compact(&t)] {
        match parse_term(&printed) {
            Ok(back) if back == t => {}
            other => return Err(format!("{t:?} printed as {printed} reads back as {other:?}")),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- fixtures

use butler::kb::Explanation;
use butler::record::Event;
use butler::session::{load_program, run_scripted, RunConfig, RunReport, RunStatus};
use butler::sitlog::{dummy_functions, format_trace, EchoingSpeech, Engine};

fn lit(text: &str) -> Literal {
    Literal::from_term(&parse_term(text).expect("literal parses")).expect("is a literal")
}

pub fn birds() -> Taxonomy {
    let text = std::fs::read_to_string(data("birds.kb")).expect("birds.kb");
    Taxonomy::load(&text).expect("kb loads")
}

/// The stock birds-and-fish taxonomy answers as documented.
pub fn birds_checks() -> Result<(), String> {
    let kb = birds();
    let yes = QueryAnswer::Yes;
    let no = QueryAnswer::No;
    let unknown = QueryAnswer::Unknown;
    for (s, l, want) in [
        ("birds", "fly", yes),
        ("birds", "swim", no),
        ("fish", "swim", unknown),
        ("penguins", "fly", no),
        ("penguins", "swim", yes),
        ("arthur", "swim", yes),
    ] {
        let got = kb.ask(s, &lit(l)).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("ask({s}, {l}) = {got:?}, expected {want:?}"));
        }
    }
    let live = kb.preferred_value("pete", "live", &[]).map_err(|e| e.to_string())?;
    if live != Some(Term::sym("mexico")) {
        return Err(format!("preferred_value(pete, live) = {live:?}"));
    }
    let ex = kb.abduce("pete", &lit("live=>mexico")).map_err(|e| e.to_string())?;
    match ex {
        Some(Explanation { antecedents, weight: 3, .. }) if antecedents == vec![lit("work=>mexico")] => Ok(()),
        other => Err(format!("abduce(pete, live=>mexico) = {other:?}")),
    }
}

pub const DUMMY_SCRIPT: &str = "[day(tuesday), loop, tuesday, day(monday), finish]";

/// The two-model demo run against its golden trace.
pub fn dummy_trace() -> Result<String, String> {
    let program = load_program(&[data("dummy/dummy.sitlog")]).map_err(|e| e.to_string())?;
    let script = parse_term(DUMMY_SCRIPT).unwrap();
    let mut io = EchoingSpeech::new(script.as_list().unwrap().to_vec());
    let mut engine = Engine::with_functions(&program, dummy_functions());
    let outcome = engine.run(Term::sym("tuesday"), &mut io).map_err(|e| e.to_string())?;
    Ok(format_trace(&outcome))
}

pub fn dummy_checks() -> Result<(), String> {
    let trace = dummy_trace()?;
    let golden = std::fs::read_to_string(data("dummy/dummy.golden")).map_err(|e| e.to_string())?;
    butler::cli::compare_traces(&trace, &golden)?;
    for needle in ["Out Arg: monday", "g_count_fs1==>1", "g_count_fs2==>1"] {
        if !trace.contains(needle) {
            return Err(format!("trace lacks {needle}"));
        }
    }
    Ok(())
}

pub fn run_scenario(rel: &str) -> RunReport {
    let config = RunConfig { scenario: data(rel), ..RunConfig::default() };
    run_scripted(&config.prepare().expect("scenario prepares"))
}

fn check(name: &str, ok: bool, detail: impl FnOnce() -> String) -> (String, Result<(), String>) {
    (name.to_string(), if ok { Ok(()) } else { Err(detail()) })
}

/// The home run: preference resolution, search order, delivery room,
/// abduced cause and the consented location update.
pub fn home_checks(r: &RunReport) -> Vec<(String, Result<(), String>)> {
    let ev = &r.record.events;
    let resolved = ev.iter().any(|e| {
        matches!(e, Event::Resolved { requested, resolved: Some(o), .. }
            if *requested == parse_term("something(drink)").unwrap() && o == "malz")
    });
    let searches: Vec<(String, bool)> = ev
        .iter()
        .filter_map(|e| match e {
            Event::Search { object, shelf, found } if object == "noodles" => Some((shelf.clone(), *found)),
            _ => None,
        })
        .collect();
    let want_search = vec![("shelf_food".to_string(), false), ("shelf_snacks".to_string(), true)];
    let room = ev.iter().any(|e| matches!(e, Event::UserLocation { room } if room == "living_room"));
    let delivered = ev.iter().filter(|e| matches!(e, Event::Delivered { at, .. } if at == "living_room")).count();
    let cause = ev.iter().find_map(|e| match e {
        Event::Abduction { object, cause, .. } if object == "coke" => Some(cause.clone()),
        _ => None,
    });
    let head = r.kb.preferred_value_list("noodles", "loc", &[]).ok().and_then(|l| l.first().cloned());
    vec![
        check("drink request resolved to malz", resolved, || "no Resolved event for something(drink) -> malz".into()),
        check("noodles sought at food, then found at snacks", searches == want_search, || format!("searches {searches:?}")),
        check("user located in the living room", room, || "no UserLocation living_room".into()),
        check("both objects delivered in the living room", delivered == 2, || format!("{delivered} deliveries")),
        check("coke misplaced by the child", cause == Some(parse_term("moved_by=>child").unwrap()), || format!("cause {cause:?}")),
        check("noodles now preferred at the snacks shelf", head == Some(Term::sym("shelf_snacks")), || format!("head {head:?}")),
    ]
}

/// The supermarket run: two cycles, first diagnosis at the closest unseen
/// shelf, then run-out and a substitute offer.
pub fn supermarket_checks(r: &RunReport) -> Vec<(String, Result<(), String>)> {
    let ev = &r.record.events;
    let cycles: Vec<&String> = ev.iter().filter_map(|e| if let Event::Cycle { shelf, .. } = e { Some(shelf) } else { None }).collect();
    let diagnoses: Vec<_> = ev.iter().filter_map(|e| if let Event::Diagnosis { diagnosis } = e { Some(diagnosis) } else { None }).collect();
    let first = match (cycles.first(), diagnoses.first()) {
        (Some(from), Some(d)) => {
            let unseen: Vec<&String> = d.shelves.keys().filter(|s| !d.known.contains(*s)).collect();
            let best = unseen.iter().map(|s| r.world.distance(from, s)).min();
            let at = d.sought_at.clone();
            (at.is_some() && at.as_ref().map(|s| r.world.distance(from, s)) == best, format!("sought at {at:?}, unseen {unseen:?}"))
        }
        _ => (false, "no diagnosis".to_string()),
    };
    let run_out = ev.iter().position(|e| matches!(e, Event::RunOut { object, substitute: Some(_) } if object == "heineken"));
    let offer = ev.iter().position(|e| matches!(e, Event::Offer { object, .. } if object == "heineken"));
    let ended = r.status == RunStatus::Done && matches!((run_out, offer), (Some(a), Some(b)) if a < b);
    vec![
        check("exactly two inference cycles", cycles.len() == 2 && r.cycles == 2, || format!("{} cycles", cycles.len())),
        check("first diagnosis at the closest unseen shelf", first.0, || first.1.clone()),
        check("second cycle concludes run-out with a substitute offer", ended, || format!("run-out {run_out:?}, offer {offer:?}, status {:?}", r.status)),
    ]
}

/// No exception in the final KB denies where the world actually has an
/// object on a shelf.
pub fn kb_matches_world(r: &RunReport) -> Result<(), String> {
    for s in r.world.shelves.keys() {
        for o in r.world.on_shelf(s) {
            let not_here = Literal::pair("loc", Term::sym(s.as_str())).negate();
            if r.kb.individual(&o).map_or(false, |i| i.props.iter().any(|c| c.clause == Clause::Fact(not_here.clone()))) {
                return Err(format!("KB says {o} is not at {s}, but it is"));
            }
        }
    }
    Ok(())
}
