//! Behavior dispatcher: runs the behaviors of a command one at a time,
//! routing known failures to recovery models and missing objects to the
//! inference cycle.

use std::collections::{BTreeMap, VecDeque};

use super::{
    decide_obligations, diagnose, expand_grasp, gpsr_interpret, plan, InferenceError, Obligation, PlanProblem,
    PlanSettings,
};
use crate::kb::{Kind, Literal, QueryAnswer, WeightedClause};
use crate::record::Event;
use crate::session::{host, text_of, Flow, Runtime};
use crate::sitlog::Functions;
use crate::term::{unify, Binding, Term};
use crate::world::{believed_shelf, Holder};

type Outcome<T> = Result<T, String>;

fn flow(f: Flow, what: &str) -> Outcome<()> {
    match f {
        Flow::Ok => Ok(()),
        Flow::Failed(k) => Err(format!("{what} failed: {k}")),
        Flow::GiveUp(r) => Err(r),
    }
}

fn sym(t: &Term) -> Outcome<String> {
    t.as_symbol().map(str::to_string).ok_or_else(|| format!("expected a name, found {t}"))
}

fn objects_of(command: &Term) -> Vec<String> {
    if let Some(items) = command.as_list() {
        return items.iter().flat_map(objects_of).collect();
    }
    match (command.name(), command.args()) {
        (Some("bring"), [o]) | (Some("place"), [o, _]) => vec![text_of(o)],
        _ => Vec::new(),
    }
}

fn describe(rt: &Runtime, command: &Term) -> String {
    if let Some(items) = command.as_list() {
        return items.iter().map(|c| describe(rt, c)).collect::<Vec<_>>().join(" ");
    }
    match (command.name(), command.args()) {
        (Some("bring"), [o]) => format!("Ok. I will bring you the {}.", text_of(o)),
        (Some("place"), [o, s]) => format!("Ok. I will put the {} in {}.", text_of(o), rt.name(&text_of(s))),
        _ => "Ok.".to_string(),
    }
}

/// The goal a pending delivery of `object` serves.
fn goal_for(object: &str, queue: &VecDeque<Term>) -> Obligation {
    queue
        .iter()
        .find_map(|b| match (b.name(), b.args()) {
            (Some("deliver"), [o, t]) if o.is_symbol(object) => Some(match t.as_symbol() {
                Some("user") | None => Obligation::serve(object),
                Some(s) => Obligation::place(object, s),
            }),
            _ => None,
        })
        .unwrap_or_else(|| Obligation::serve(object))
}

/// Executes a structured command. `Err` carries the reason for giving up.
pub fn gpsr_dispatch(rt: &Runtime, command: &Term) -> Outcome<()> {
    let mut queue: VecDeque<Term> = gpsr_interpret(command).map_err(|e| e.to_string())?.into();
    let mut b = Binding::new();
    let mut fresh = 0;
    let mut taken_from: BTreeMap<String, String> = BTreeMap::new();
    while let Some(next) = queue.pop_front() {
        let beh = b.apply(&next);
        match (beh.name(), beh.args()) {
            (Some("acknowledge"), []) => rt.say(&describe(rt, command)),
            (Some("grasp"), [o]) => {
                fresh += 1;
                let s = Term::var(format!("Shelf{fresh}"));
                for x in expand_grasp(o, &s).into_iter().rev() {
                    queue.push_front(x);
                }
            }
            (Some("kb_get_shelf_of_object"), [o, s]) => {
                let o = sym(o)?;
                let shelf = {
                    let sess = rt.session.borrow();
                    believed_shelf(&sess.kb, &sess.world, &o).or_else(|| sess.world.class_shelf(&sess.kb, &o))
                };
                let shelf = shelf.ok_or_else(|| format!("no shelf is known for {o}"))?;
                b = unify(s, &Term::sym(shelf), &b).ok_or("shelf variable already bound")?;
            }
            (Some("move"), [s]) => flow(rt.do_move(&sym(s)?), "move")?,
            (Some("find"), [u]) if u.is_symbol("user") => flow(rt.find_user(), "find")?,
            (Some("find"), [o]) => {
                let o = sym(o)?;
                rt.ensure_seen(Some(&o)).map_err(|e| e.to_string())?;
                let r = rt.session.borrow_mut().world.behavior_find(&o).map_err(|e| e.to_string())?;
                rt.record(Event::Behavior { behavior: beh.clone(), status: r.status.to_string() });
                match r.error_kind() {
                    None => {}
                    Some("not_found") => {
                        let goal = goal_for(&o, &queue);
                        queue = inference_cycle(rt, &o, goal)?.into();
                    }
                    Some(k) => return Err(format!("find {o} failed: {k}")),
                }
            }
            (Some("take"), [o]) => {
                let o = sym(o)?;
                rt.ensure_seen(Some(&o)).map_err(|e| e.to_string())?;
                match rt.take(&o) {
                    Flow::Ok => {
                        taken_from.insert(o.clone(), rt.session.borrow().world.robot_at.clone());
                    }
                    Flow::Failed(k) if k == "not_found" => {
                        let goal = goal_for(&o, &queue);
                        queue = inference_cycle(rt, &o, goal)?.into();
                    }
                    other => flow(other, "take")?,
                }
            }
            (Some("deliver"), [o, t]) => flow(rt.deliver(&sym(o)?, &sym(t)?), "deliver")?,
            (Some("offer"), [sub, o]) => {
                let (sub, o) = (sym(sub)?, sym(o)?);
                let pipe = Term::compound("offer", vec![Term::sym(sub.clone()), Term::sym(o.clone())]);
                let fin = rt.run_dm("offer", pipe).map(|(f, _)| f).map_err(|e| e.to_string())?;
                let accepted = fin.is_symbol("accepted");
                rt.record(Event::Offer { object: o, substitute: sub.clone(), accepted });
                if !accepted {
                    let src = taken_from.get(&sub).cloned().ok_or("declined item has no source")?;
                    queue.retain(|x| !(x.name() == Some("deliver") && x.args().first() == Some(&Term::sym(sub.clone()))));
                    queue.push_front(Term::compound("deliver", vec![Term::sym(sub.clone()), Term::sym(src.clone())]));
                    queue.push_front(Term::compound("move", vec![Term::sym(src)]));
                }
            }
            (Some("say"), [t]) => rt.say(&text_of(t)),
            _ => return Err(format!("unknown behavior {beh}")),
        }
    }
    Ok(())
}

/// Diagnosis, decision and planning for `sought`, missing at the current
/// shelf. Returns the behaviors that replace the rest of the command.
pub fn inference_cycle(rt: &Runtime, sought: &str, goal: Obligation) -> Outcome<Vec<Term>> {
    let (depth, shelf) = {
        let mut s = rt.session.borrow_mut();
        s.cycles += 1;
        (s.cycles, s.world.robot_at.clone())
    };
    rt.record(Event::Cycle { depth, goal: goal.clone(), shelf: shelf.clone() });
    let diagnosis = {
        let mut guard = rt.session.borrow_mut();
        let s = &mut *guard;
        let obs = s.world.observe(&s.kb, &shelf).map_err(|e| e.to_string())?;
        let previous = s.ctx.previous_shelves.clone();
        diagnose(&s.world, &mut s.kb, Some(sought), &obs, &previous, &mut s.rng)
    };
    let d = match diagnosis {
        Ok(d) => d,
        Err(InferenceError::NoUnseenShelves) => return run_out(rt, sought, goal),
        Err(e) => return Err(e.to_string()),
    };
    rt.record(Event::Diagnosis { diagnosis: d.clone() });
    if let Some(at) = &d.sought_at {
        let text = format!("I think the {sought} was placed on {}.", rt.name(at));
        rt.say(&text);
    }

    let s = rt.session.borrow();
    let held = |o: &str| s.world.hand_of(o).is_some();
    let source = |ob: &Obligation| -> Option<String> {
        if held(ob.object()) {
            None
        } else if ob.object() == sought {
            d.sought_at.clone()
        } else {
            d.shelf_of(ob.object()).map(str::to_string)
        }
    };
    let pending: Vec<Obligation> = s
        .ctx
        .pending
        .iter()
        .filter(|p| p.object() != sought && !s.ctx.objects_placed.contains(p.object()))
        .filter(|p| held(p.object()) || source(p).is_some())
        .cloned()
        .collect();
    let (decisions, cost) = decide_obligations(&goal, &pending, &source, &s.cost, &s.world, &s.world.robot_at)
        .map_err(|e| e.to_string())?;
    let problem = PlanProblem {
        start: s.world.robot_at.clone(),
        right: s.world.right.clone(),
        left: s.world.left.clone(),
        obligations: decisions.iter().map(|o| (o.clone(), source(o))).collect(),
    };
    let actions = plan(&problem, &s.cost, &s.world, PlanSettings::default()).map_err(|e| e.to_string())?;
    drop(s);
    let behaviors = problem.behaviors(&actions);
    rt.record(Event::Decision { obligations: decisions, cost });
    rt.record(Event::Plan { behaviors: behaviors.clone() });
    Ok(behaviors)
}

/// Every shelf was inspected: the object ran out. Plans to fetch a
/// substitute and offer it before handing it over.
fn run_out(rt: &Runtime, sought: &str, goal: Obligation) -> Outcome<Vec<Term>> {
    let substitute = {
        let s = rt.session.borrow();
        let named = match s.kb.preferred_value(sought, "substitute", &[]) {
            Ok(Some(t)) => t.as_symbol().map(str::to_string),
            _ => None,
        };
        named.or_else(|| {
            let class = s.kb.classes_of(sought).ok()?.into_iter().next()?;
            s.kb.class(&class)?
                .members
                .iter()
                .find(|m| {
                    *m != sought && !matches!(s.world.placement.get(*m), Some(Holder::Delivered(_)) | None)
                })
                .cloned()
        })
    };
    rt.record(Event::RunOut { object: sought.to_string(), substitute: substitute.clone() });
    {
        let mut s = rt.session.borrow_mut();
        let lit = Literal::label("out_of_stock");
        if s.kb.assert_clause(sought, Kind::Property, WeightedClause::fact(lit.clone(), 0)).is_ok() {
            s.record.push(Event::KbUpdate { subject: sought.to_string(), update: lit.to_term() });
        }
    }
    rt.say(&format!("I think we ran out of the {sought}."));
    let Obligation::Serve { .. } = goal else {
        return Err(format!("{sought} cannot be placed: none is left"));
    };
    let sub = substitute.ok_or_else(|| format!("ran out of {sought} and there is no substitute"))?;
    let s = rt.session.borrow();
    let src = if s.world.hand_of(&sub).is_some() {
        None
    } else {
        Some(
            believed_shelf(&s.kb, &s.world, &sub)
                .or_else(|| s.world.class_shelf(&s.kb, &sub))
                .ok_or_else(|| format!("no shelf is known for {sub}"))?,
        )
    };
    let ob = Obligation::serve(&sub);
    let cost = s
        .cost
        .plan_cost(&super::template(&ob, src.as_deref()), &s.world.robot_at, &s.world)
        .map_err(|e| e.to_string())?;
    let problem = PlanProblem {
        start: s.world.robot_at.clone(),
        right: s.world.right.clone(),
        left: s.world.left.clone(),
        obligations: vec![(ob.clone(), src)],
    };
    let actions = plan(&problem, &s.cost, &s.world, PlanSettings::default()).map_err(|e| e.to_string())?;
    drop(s);
    let mut behaviors = Vec::new();
    for b in problem.behaviors(&actions) {
        if b.name() == Some("deliver") && b.args().first() == Some(&Term::sym(sub.clone())) {
            behaviors.push(Term::compound("offer", vec![Term::sym(sub.clone()), Term::sym(sought)]));
        }
        behaviors.push(b);
    }
    rt.record(Event::Decision { obligations: vec![ob], cost });
    rt.record(Event::Plan { behaviors: behaviors.clone() });
    Ok(behaviors)
}

pub(crate) fn register_functions(fs: &mut Functions<'static>, rt: &Runtime) {
    let r = rt.clone();
    fs.register("gpsr", move |args: &[Term], _| {
        let [cmd] = args else { return Err(host("gpsr expects a command")) };
        Ok(match gpsr_dispatch(&r, cmd) {
            Ok(()) => Term::sym("done"),
            Err(reason) => {
                r.give_up(&reason);
                Term::sym("give_up")
            }
        })
    });
    let r = rt.clone();
    fs.register("inspect", move |args: &[Term], _| {
        let [s] = args else { return Err(host("inspect expects a shelf")) };
        let shelf = text_of(s);
        let start = r.session.borrow().world.robot_at.clone();
        let steps = flow(r.do_move(&shelf), "move")
            .and_then(|_| r.ensure_seen(None).map(|_| ()).map_err(|e| e.to_string()))
            .and_then(|_| flow(r.do_move(&start), "move"));
        Ok(match steps {
            Ok(()) => Term::sym("ok"),
            Err(reason) => {
                r.give_up(&reason);
                Term::sym("give_up")
            }
        })
    });
    let r = rt.clone();
    fs.register("needs_age", move |args: &[Term], _| {
        let [cmd] = args else { return Err(host("needs_age expects a command")) };
        let s = r.session.borrow();
        let restricted = objects_of(cmd)
            .iter()
            .any(|o| s.kb.ask(o, &Literal::label("alcoholic")).map(|a| a == QueryAnswer::Yes).unwrap_or(false));
        Ok(Term::compound(if restricted { "age" } else { "serve" }, vec![cmd.clone()]))
    });
    let r = rt.clone();
    fs.register("task_status", move |_: &[Term], _| {
        Ok(Term::sym(if r.session.borrow().gave_up.is_some() { "gave_up" } else { "finished" }))
    });
}
