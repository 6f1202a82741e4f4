//! Home workflows: preference elicitation, order resolution against the
//! user's preferences, fetching, and reconciling what the robot saw with
//! what it believes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::kb::{Clause, Kind, Literal, Taxonomy, WeightedClause};
use crate::record::Event;
use crate::session::{host, text_of, Flow, Runtime};
use crate::sitlog::{EngineError, Functions};
use crate::term::Term;
use crate::world::has_fact;

/// KB individual standing for the person the robot serves.
const USER: &str = "user";
const FALLBACK_ROOM: &str = "living_room";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Class(String),
    Object(String),
}

impl Request {
    pub fn to_term(&self) -> Term {
        match self {
            Request::Class(c) => Term::compound("something", vec![Term::sym(c.clone())]),
            Request::Object(o) => Term::sym(o.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderItem {
    pub requested: Request,
    pub resolved: String,
    /// `direct`, `preferred` or a similar tag for how it was settled.
    pub source: String,
}

#[derive(Debug, Clone, Default)]
pub struct HomeState {
    /// Every object observed on a shelf during the run.
    pub seen: BTreeSet<String>,
    pub requests: Vec<Request>,
    pub next_request: usize,
    pub order: Vec<OrderItem>,
    pub taken_from: BTreeMap<String, String>,
    pub delivered: Vec<String>,
    group: usize,
    pair: usize,
    wins: Vec<usize>,
    questions: usize,
    discrepancies: Option<VecDeque<Term>>,
}

fn sym_arg(t: &Term) -> Result<String, EngineError> {
    t.as_symbol().map(str::to_string).ok_or_else(|| host(format!("expected a name, found {t}")))
}

fn ok() -> Term {
    Term::sym("ok")
}

fn first_class(kb: &Taxonomy, id: &str) -> Option<String> {
    kb.classes_of(id).ok()?.into_iter().next()
}

/// Most specific class every item belongs to.
fn common_class(kb: &Taxonomy, items: &[String]) -> Option<String> {
    let (head, rest) = items.split_first()?;
    let all: Vec<Vec<String>> = rest.iter().map(|i| kb.classes_of(i).unwrap_or_default()).collect();
    kb.classes_of(head).ok()?.into_iter().find(|c| all.iter().all(|cs| cs.contains(c)))
}

fn symbol_value(kb: &Taxonomy, scope: &str, attr: &str, known: &[Literal]) -> Option<String> {
    kb.preferred_value(scope, attr, known).ok()??.as_symbol().map(str::to_string)
}

/// The KB without `object`'s exceptions: they record where it was missed,
/// not where it belongs.
fn standing(kb: &Taxonomy, object: &str) -> Taxonomy {
    let mut out = kb.clone();
    let missed: Vec<Clause> = kb
        .individual(object)
        .map(|i| {
            i.props
                .iter()
                .filter(|c| matches!(&c.clause, Clause::Fact(l) if l.negated && l.attr == "loc"))
                .map(|c| c.clause.clone())
                .collect()
        })
        .unwrap_or_default();
    for c in &missed {
        out.retract_clause(object, c).expect("clause was just read");
    }
    out
}

/// Pairs of a group in round-robin order.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn join_objects(items: &[String]) -> String {
    let named: Vec<String> = items.iter().map(|o| format!("the {o}")).collect();
    match named.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

impl Runtime {
    fn assert_fact(&self, subject: &str, lit: Literal) -> Result<(), EngineError> {
        let mut s = self.session.borrow_mut();
        if has_fact(&s.kb, subject, &lit) {
            return Ok(());
        }
        s.kb.assert_clause(subject, Kind::Property, WeightedClause::fact(lit.clone(), 0)).map_err(host)?;
        s.record.push(Event::KbUpdate { subject: subject.to_string(), update: lit.to_term() });
        Ok(())
    }

    /// Ranks the items of a finished group by wins and stores the ranking as
    /// weighted `to_serve` defaults on their common class.
    fn settle_group(&self, items: &[String], wins: &[usize]) -> Result<(), EngineError> {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(wins.get(i).copied().unwrap_or(0)));
        let mut s = self.session.borrow_mut();
        let class = common_class(&s.kb, items).ok_or_else(|| host(format!("no common class for {items:?}")))?;
        for (rank, &i) in order.iter().enumerate() {
            let lit = Literal::pair("to_serve", Term::sym(items[i].clone()));
            let w = rank as u32 + 1;
            s.kb.assert_clause(&class, Kind::Property, WeightedClause::default(vec![], lit.clone(), w)).map_err(host)?;
            let update = Term::List(vec![Term::op("=>>", Term::sym("-"), lit.to_term()), Term::Number(w as i64)]);
            s.record.push(Event::KbUpdate { subject: class.clone(), update });
        }
        Ok(())
    }

    fn next_pair(&self) -> Result<Term, EngineError> {
        loop {
            let (items, pair, wins) = {
                let s = self.session.borrow();
                let Some(items) = s.preferences.get(s.home.group) else {
                    return Ok(Term::sym("done"));
                };
                (items.clone(), s.home.pair, s.home.wins.clone())
            };
            let ps = pairs(items.len());
            if let Some(&(i, j)) = ps.get(pair) {
                return Ok(Term::compound("pair", vec![Term::sym(items[i].clone()), Term::sym(items[j].clone())]));
            }
            self.settle_group(&items, &wins)?;
            let mut s = self.session.borrow_mut();
            s.home.group += 1;
            s.home.pair = 0;
            s.home.wins.clear();
        }
    }

    fn pair_prompt(&self, a: &str, b: &str) -> String {
        let mut s = self.session.borrow_mut();
        s.home.questions += 1;
        if s.home.questions == 1 {
            format!("Please tell me what do you like best: {a} or {b}?")
        } else {
            format!("What do you like best: {a} or {b}?")
        }
    }

    fn record_choice(&self, x: &str) -> String {
        let mut s = self.session.borrow_mut();
        let items = s.preferences.get(s.home.group).cloned().unwrap_or_default();
        let known = items.iter().position(|i| i == x);
        if let Some(k) = known {
            if s.home.wins.len() < items.len() {
                s.home.wins.resize(items.len(), 0);
            }
            s.home.wins[k] += 1;
        }
        let first = s.home.group == 0 && s.home.pair == 0;
        s.home.pair += 1;
        match (known, first) {
            (None, _) => "I did not get that, so I will not count it.".to_string(),
            (Some(_), true) => "Excellent! I will recall your choice!".to_string(),
            (Some(_), false) => "Great! I will recall your choice!".to_string(),
        }
    }

    fn take_order(&self, items: &Term) -> Result<Term, EngineError> {
        let list = items.as_list().map(<[Term]>::to_vec).unwrap_or_else(|| vec![items.clone()]);
        let mut requests = Vec::new();
        {
            let s = self.session.borrow();
            for it in &list {
                let req = match (it.name(), it.args()) {
                    (Some("something"), [c]) => Request::Class(sym_arg(c)?),
                    (Some(n), []) if s.kb.class(n).is_some() => Request::Class(n.to_string()),
                    (Some(n), []) if s.kb.individual(n).is_some() => Request::Object(n.to_string()),
                    _ => return Err(host(format!("cannot serve {it}"))),
                };
                requests.push(req);
            }
        }
        {
            let mut s = self.session.borrow_mut();
            s.home.requests = requests;
            s.home.next_request = 0;
        }
        self.assert_fact(USER, Literal::label("asked_comestible"))?;
        Ok(ok())
    }

    /// Settles requests that need no question and returns the situation for
    /// the first one that does, or `done`.
    fn next_order_item(&self) -> Result<Term, EngineError> {
        loop {
            let (req, pref) = {
                let s = self.session.borrow();
                let Some(req) = s.home.requests.get(s.home.next_request).cloned() else {
                    return Ok(Term::sym("done"));
                };
                let class = match &req {
                    Request::Class(c) => c.clone(),
                    Request::Object(o) => first_class(&s.kb, o).unwrap_or_default(),
                };
                let pref = symbol_value(&s.kb, &class, "to_serve", &[])
                    .or_else(|| s.kb.class(&class).and_then(|c| c.members.first().cloned()));
                (req, pref)
            };
            match (&req, pref) {
                (Request::Class(c), Some(p)) => {
                    return Ok(Term::compound("class_item", vec![Term::sym(c.clone()), Term::sym(p)]))
                }
                (Request::Class(c), None) => return Err(host(format!("no member of {c} to serve"))),
                (Request::Object(o), Some(p)) if p != *o => {
                    return Ok(Term::compound("switch_item", vec![Term::sym(o.clone()), Term::sym(p)]))
                }
                (Request::Object(o), _) => self.settle(Some(o.clone()), "direct"),
            }
        }
    }

    fn settle(&self, resolved: Option<String>, source: &str) {
        let mut s = self.session.borrow_mut();
        let i = s.home.next_request;
        let Some(req) = s.home.requests.get(i).cloned() else { return };
        s.home.next_request += 1;
        s.record.push(Event::Resolved { requested: req.to_term(), resolved: resolved.clone(), source: source.into() });
        if let Some(r) = resolved {
            s.home.order.push(OrderItem { requested: req, resolved: r, source: source.into() });
        }
    }

    fn order_summary(&self) -> String {
        let items: Vec<String> = self.session.borrow().home.order.iter().map(|i| i.resolved.clone()).collect();
        if items.is_empty() {
            "Ok. There is nothing for me to bring.".to_string()
        } else {
            format!("Ok. I will bring you {}.", join_objects(&items))
        }
    }

    /// Looks for `object` on the shelves of its current location list,
    /// skipping shelves already searched for it, and takes it.
    fn fetch(&self, object: &str) -> Result<bool, String> {
        self.say(&format!("I will get the {object}."));
        let mut visited = BTreeSet::new();
        loop {
            let next = {
                let s = self.session.borrow();
                let list = s.kb.preferred_value_list(object, "loc", &[]).map_err(|e| e.to_string())?;
                list.iter()
                    .filter_map(Term::as_symbol)
                    .find(|l| s.world.shelves.contains_key(*l) && !visited.contains(*l))
                    .map(str::to_string)
            };
            let Some(shelf) = next else {
                self.say(&format!("I could not find the {object}."));
                return Ok(false);
            };
            visited.insert(shelf.clone());
            flow(self.do_move(&shelf))?;
            self.ensure_seen(Some(object)).map_err(|e| e.to_string())?;
            let found = self.session.borrow().world.on_shelf(&shelf).contains(object);
            self.record(Event::Search { object: object.into(), shelf: shelf.clone(), found });
            if found {
                flow(self.take(object))?;
                self.session.borrow_mut().home.taken_from.insert(object.into(), shelf);
                return Ok(true);
            }
        }
    }

    /// Room the user is expected in, from the user's situation.
    fn user_room(&self) -> String {
        let s = self.session.borrow();
        symbol_value(&s.kb, USER, "found_in", &[]).unwrap_or_else(|| FALLBACK_ROOM.to_string())
    }

    fn hand_over(&self) -> Result<(), String> {
        let room = self.user_room();
        self.record(Event::UserLocation { room: room.clone() });
        flow(self.do_move(&room))?;
        flow(self.find_user())?;
        let held: Vec<String> = {
            let w = &self.session.borrow().world;
            [w.right.clone(), w.left.clone()].into_iter().flatten().collect()
        };
        for o in held {
            flow(self.deliver(&o, "user"))?;
            self.session.borrow_mut().home.delivered.push(o);
        }
        Ok(())
    }

    fn fetch_and_deliver(&self) -> Result<(), String> {
        let items: Vec<String> = self.session.borrow().home.order.iter().map(|i| i.resolved.clone()).collect();
        for (k, o) in items.iter().enumerate() {
            self.fetch(o)?;
            let full = {
                let w = &self.session.borrow().world;
                w.hand_for(items.get(k + 1).map_or("", String::as_str)).is_none()
            };
            let holding = !self.session.borrow().world.holding().is_empty();
            if holding && (full || k + 1 == items.len()) {
                self.hand_over()?;
            }
        }
        Ok(())
    }

    /// Delivered objects taken from somewhere other than their class-level
    /// location, then other seen objects whose last sighting disagrees with
    /// their second-ranked location.
    fn discrepancies(&self) -> VecDeque<Term> {
        let s = self.session.borrow();
        let kb = &s.kb;
        let mut out = VecDeque::new();
        for o in &s.home.delivered {
            let Some(act) = s.home.taken_from.get(o) else { continue };
            let pref = first_class(kb, o).and_then(|c| symbol_value(kb, &c, "loc", &[]));
            if let Some(pref) = pref.filter(|p| p != act) {
                out.push_back(Term::compound("pref_loc", vec![Term::sym(o.clone()), Term::sym(act.clone()), Term::sym(pref)]));
            }
        }
        let requested: BTreeSet<&String> = s.home.order.iter().map(|i| &i.resolved).collect();
        for o in s.home.seen.iter().filter(|o| !requested.contains(o)) {
            if s.world.hand_of(o).is_some() {
                continue;
            }
            let last = symbol_value(kb, o, "last_seen", &[]);
            let raw = standing(kb, o).preferred_value_list_raw(o, "loc", &[]).unwrap_or_default();
            let second = raw.get(1).and_then(Term::as_symbol).map(str::to_string);
            if let (Some(last), Some(right)) = (last, second) {
                if last != right {
                    out.push_back(Term::compound("misplaced", vec![Term::sym(o.clone()), Term::sym(last), Term::sym(right)]));
                }
            }
        }
        out
    }

    fn next_discrepancy(&self) -> Term {
        if self.session.borrow().home.discrepancies.is_none() {
            let d = self.discrepancies();
            self.session.borrow_mut().home.discrepancies = Some(d);
        }
        let mut s = self.session.borrow_mut();
        s.home.discrepancies.as_mut().and_then(VecDeque::pop_front).unwrap_or_else(|| Term::sym("done"))
    }

    fn record_locations(&self, object: &str) {
        let list = self.session.borrow().kb.preferred_value_list(object, "loc", &[]).unwrap_or_default();
        self.record(Event::Locations { object: object.into(), locations: list });
    }

    /// The user prefers `object` where it was actually found.
    fn update_location_pref(&self, object: &str, actual: &str) -> Result<(), EngineError> {
        {
            let mut guard = self.session.borrow_mut();
            let s = &mut *guard;
            let lit = Literal::pair("loc", Term::sym(actual));
            s.kb.assert_clause(object, Kind::Property, WeightedClause::default(vec![], lit.clone(), 1)).map_err(host)?;
            s.record.push(Event::KbUpdate {
                subject: object.into(),
                update: Term::List(vec![Term::op("=>>", Term::sym("-"), lit.to_term()), Term::Number(1)]),
            });
            let misplaced = Literal::label("misplaced");
            if has_fact(&s.kb, object, &misplaced) {
                s.kb.retract_clause(object, &Clause::Fact(misplaced)).map_err(host)?;
            }
        }
        self.record_locations(object);
        Ok(())
    }

    fn explain_misplaced(&self, object: &str) -> Result<String, EngineError> {
        let observed = Literal::label("misplaced");
        self.assert_fact(object, observed.clone())?;
        let e = self.session.borrow().kb.abduce(object, &observed).map_err(host)?;
        let Some(e) = e else {
            return Ok(format!("I do not know how the {object} got there."));
        };
        let cause = match e.antecedents.as_slice() {
            [one] => one.to_term(),
            many => Term::List(many.iter().map(Literal::to_term).collect()),
        };
        self.record(Event::Abduction { object: object.into(), observed: observed.to_term(), cause, weight: e.weight });
        let agent = e.antecedents.first().and_then(|l| l.value.as_ref()).map(text_of);
        Ok(match agent {
            Some(a) => format!("I think that the explanation for this is that the {object} was misplaced there by your {a}."),
            None => format!("I think that the {object} was misplaced there."),
        })
    }

    /// Puts `object` back on its right shelf and returns to the user.
    fn relocate(&self, object: &str, from: &str, to: &str) -> Result<(), String> {
        flow(self.do_move(from))?;
        self.ensure_seen(None).map_err(|e| e.to_string())?;
        flow(self.take(object))?;
        flow(self.do_move(to))?;
        flow(self.deliver(object, to))?;
        self.record_locations(object);
        let room = self.user_room();
        flow(self.do_move(&room))?;
        flow(self.find_user())
    }
}

fn flow(f: Flow) -> Result<(), String> {
    match f {
        Flow::Ok => Ok(()),
        Flow::Failed(k) => Err(format!("behavior failed: {k}")),
        Flow::GiveUp(r) => Err(r),
    }
}

/// `ok`, or `give_up` after recording why.
fn outcome(rt: &Runtime, r: Result<(), String>) -> Term {
    match r {
        Ok(()) => ok(),
        Err(reason) => {
            rt.give_up(&reason);
            Term::sym("give_up")
        }
    }
}

pub(crate) fn register_functions(fs: &mut Functions<'static>, rt: &Runtime) {
    let r = rt.clone();
    fs.register("next_pair", move |_: &[Term], _| r.next_pair());
    let r = rt.clone();
    fs.register("pair_prompt", move |args: &[Term], _| match args {
        [a, b] => Ok(Term::sym(r.pair_prompt(&text_of(a), &text_of(b)))),
        _ => Err(host("pair_prompt expects two items")),
    });
    let r = rt.clone();
    fs.register("record_choice", move |args: &[Term], _| match args {
        [x] => Ok(Term::sym(r.record_choice(&text_of(x)))),
        _ => Err(host("record_choice expects the choice")),
    });
    let r = rt.clone();
    fs.register("arrive_home", move |_: &[Term], _| {
        r.assert_fact(USER, Literal::label("back_from_work"))?;
        Ok(ok())
    });
    let r = rt.clone();
    fs.register("user_fact", move |args: &[Term], _| match args {
        [f] => {
            let lit = Literal::from_term(f).ok_or_else(|| host(format!("not a literal: {f}")))?;
            r.assert_fact(USER, lit)?;
            Ok(ok())
        }
        _ => Err(host("user_fact expects a literal")),
    });
    let r = rt.clone();
    fs.register("take_order", move |args: &[Term], _| match args {
        [items] => r.take_order(items),
        _ => Err(host("take_order expects the requested items")),
    });
    let r = rt.clone();
    fs.register("next_order_item", move |_: &[Term], _| r.next_order_item());
    let r = rt.clone();
    fs.register("settle", move |args: &[Term], _| match args {
        [resolved, source] => {
            let resolved = Some(text_of(resolved)).filter(|x| x != "none");
            r.settle(resolved, &text_of(source));
            Ok(ok())
        }
        _ => Err(host("settle expects the resolved item and its source")),
    });
    let r = rt.clone();
    fs.register("order_summary", move |_: &[Term], _| Ok(Term::sym(r.order_summary())));
    let r = rt.clone();
    fs.register("fetch_and_deliver", move |_: &[Term], _| {
        let res = r.fetch_and_deliver();
        Ok(outcome(&r, res))
    });
    let r = rt.clone();
    fs.register("next_discrepancy", move |_: &[Term], _| Ok(r.next_discrepancy()));
    let r = rt.clone();
    fs.register("update_location_pref", move |args: &[Term], _| match args {
        [o, act] => {
            r.update_location_pref(&sym_arg(o)?, &sym_arg(act)?)?;
            Ok(ok())
        }
        _ => Err(host("update_location_pref expects an object and a location")),
    });
    let r = rt.clone();
    fs.register("explain_misplaced", move |args: &[Term], _| match args {
        [o] => Ok(Term::sym(r.explain_misplaced(&sym_arg(o)?)?)),
        _ => Err(host("explain_misplaced expects an object")),
    });
    let r = rt.clone();
    fs.register("reconcile_status", move |_: &[Term], _| {
        Ok(Term::sym(if r.session.borrow().gave_up.is_some() { "gave_up" } else { "is" }))
    });
    let r = rt.clone();
    fs.register("relocate", move |args: &[Term], _| match args {
        [o, from, to] => {
            let res = r.relocate(&sym_arg(o)?, &sym_arg(from)?, &sym_arg(to)?);
            Ok(outcome(&r, res))
        }
        _ => Err(host("relocate expects an object and two shelves")),
    });
}
