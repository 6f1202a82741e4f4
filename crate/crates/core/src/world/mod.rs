//! Deterministic shelf-and-room world with a behavior library.
//!
//! Behaviors never fail by exception for world conditions: they return a
//! [`BehaviorResult`] whose error kind is drawn from [`catalog`]. Violated
//! call preconditions (unknown names, not standing at the shelf) are
//! [`WorldError`]s.

mod observe;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::kb::{KbError, Taxonomy};
use crate::term::Term;

pub use observe::{believed_shelf, Notification, Observation};
pub(crate) use observe::has_fact;

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown shelf `{0}`")]
    UnknownShelf(String),
    #[error("robot is at `{at}`, not at shelf `{shelf}`")]
    NotAtShelf { at: String, shelf: String },
    #[error("bad scenario entry {0}")]
    Scenario(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

pub type Result<T> = std::result::Result<T, WorldError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hand::Left => "left",
            Hand::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Holder {
    Shelf(String),
    Hand(Hand),
    /// Handed to a person.
    Delivered(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shelf {
    pub id: String,
    pub class: String,
    pub room: String,
}

/// `error(kind)` is raised on the `occurrence`-th call (1-based) of `behavior`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub behavior: String,
    pub occurrence: usize,
    pub kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Robot,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: String,
    pub question: bool,
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = match self.speaker {
            Speaker::Robot => "robot",
            Speaker::User => "user",
        };
        write!(f, "{who}> {}", self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Error(k) => write!(f, "error({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorResult {
    pub status: Status,
    pub payload: Term,
}

impl BehaviorResult {
    fn ok(payload: Term) -> BehaviorResult {
        BehaviorResult { status: Status::Ok, payload }
    }

    fn error(kind: &str) -> BehaviorResult {
        BehaviorResult { status: Status::Error(kind.to_string()), payload: Term::sym("empty") }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn error_kind(&self) -> Option<&str> {
        match &self.status {
            Status::Ok => None,
            Status::Error(k) => Some(k),
        }
    }
}

/// Error kinds each behavior may terminate with.
pub fn catalog(behavior: &str) -> &'static [&'static str] {
    match behavior {
        "move" => &["path_blocked", "door_closed"],
        "take" => &["not_found", "hands_full"],
        "deliver" => &["not_held", "wrong_location"],
        "find" => &["not_found"],
        "ask" => &["no_reply"],
        _ => &[],
    }
}

/// Source of the user's replies.
pub trait Channel {
    fn reply(&mut self, prompt: &str) -> Option<Term>;
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedReplies(pub VecDeque<Term>);

impl Channel for ScriptedReplies {
    fn reply(&mut self, _prompt: &str) -> Option<Term> {
        self.0.pop_front()
    }
}

#[derive(Debug, Clone, Default)]
pub struct WorldState {
    pub rooms: Vec<String>,
    /// Named places that are neither shelves nor rooms.
    pub points: Vec<String>,
    pub shelves: IndexMap<String, Shelf>,
    pub placement: IndexMap<String, Holder>,
    pub robot_at: String,
    pub left: Option<String>,
    pub right: Option<String>,
    pub user_at: String,
    distances: BTreeMap<(String, String), u32>,
    pub injections: Vec<Injection>,
    calls: BTreeMap<String, usize>,
    /// Hand to use when taking a given object.
    pub hand_overrides: IndexMap<String, Hand>,
    pub transcript: Vec<Utterance>,
    pub rng_seed: u64,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn sym_arg<'a>(t: &'a Term, what: &str) -> Result<&'a str> {
    t.as_symbol().ok_or_else(|| WorldError::Scenario(format!("{what}: expected a name, found {t}")))
}

fn sym_list(t: &Term, what: &str) -> Result<Vec<String>> {
    t.as_list()
        .ok_or_else(|| WorldError::Scenario(format!("{what}: expected a list, found {t}")))?
        .iter()
        .map(|x| sym_arg(x, what).map(str::to_string))
        .collect()
}

impl WorldState {
    /// Builds the world from scenario clauses. Clauses other than the world
    /// ones (`rooms/1`, `points/1`, `shelf/3`, `distance/3`, `robot_at/1`,
    /// `user_at/1`, `on/2`, `hand/2`, `inject/3`, `seed/1`) are ignored.
    pub fn from_terms(clauses: &[Term]) -> Result<WorldState> {
        let mut w = WorldState::default();
        for c in clauses {
            let bad = || WorldError::Scenario(c.to_string());
            match (c.name(), c.args()) {
                (Some("rooms"), [rs]) => w.rooms.extend(sym_list(rs, "rooms")?),
                (Some("points"), [ps]) => w.points.extend(sym_list(ps, "points")?),
                (Some("shelf"), [id, class, room]) => {
                    let id = sym_arg(id, "shelf")?.to_string();
                    let shelf = Shelf {
                        id: id.clone(),
                        class: sym_arg(class, "shelf")?.to_string(),
                        room: sym_arg(room, "shelf")?.to_string(),
                    };
                    w.shelves.insert(id, shelf);
                }
                (Some("distance"), [a, b, d]) => {
                    let d = d.as_number().filter(|d| *d >= 0).ok_or_else(bad)? as u32;
                    w.distances.insert(key(sym_arg(a, "distance")?, sym_arg(b, "distance")?), d);
                }
                (Some("robot_at"), [l]) => w.robot_at = sym_arg(l, "robot_at")?.to_string(),
                (Some("user_at"), [l]) => w.user_at = sym_arg(l, "user_at")?.to_string(),
                (Some("on"), [s, objs]) => {
                    let s = sym_arg(s, "on")?.to_string();
                    for o in sym_list(objs, "on")? {
                        if w.placement.insert(o.clone(), Holder::Shelf(s.clone())).is_some() {
                            return Err(WorldError::Scenario(format!("object `{o}` placed twice")));
                        }
                    }
                }
                (Some("hand"), [o, h]) => {
                    let hand = match sym_arg(h, "hand")? {
                        "left" => Hand::Left,
                        "right" => Hand::Right,
                        _ => return Err(bad()),
                    };
                    w.hand_overrides.insert(sym_arg(o, "hand")?.to_string(), hand);
                }
                (Some("inject"), [b, k, kind]) => {
                    let behavior = sym_arg(b, "inject")?.to_string();
                    let kind = sym_arg(kind, "inject")?.to_string();
                    if !catalog(&behavior).contains(&kind.as_str()) {
                        return Err(WorldError::Scenario(format!("`{behavior}` cannot fail with `{kind}`")));
                    }
                    let occurrence = k.as_number().filter(|k| *k >= 1).ok_or_else(bad)? as usize;
                    w.injections.push(Injection { behavior, occurrence, kind });
                }
                (Some("seed"), [s]) => w.rng_seed = s.as_number().ok_or_else(bad)? as u64,
                _ => {}
            }
        }
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        for (o, h) in &self.placement {
            if let Holder::Shelf(s) = h {
                if !self.shelves.contains_key(s) {
                    return Err(WorldError::Scenario(format!("object `{o}` on unknown shelf `{s}`")));
                }
            }
        }
        for s in self.shelves.values() {
            if !self.rooms.contains(&s.room) {
                return Err(WorldError::Scenario(format!("shelf `{}` in unknown room `{}`", s.id, s.room)));
            }
        }
        for l in [&self.robot_at, &self.user_at] {
            if !self.is_location(l) {
                return Err(WorldError::UnknownLocation(l.clone()));
            }
        }
        for (a, b) in self.distances.keys() {
            for l in [a, b] {
                if !self.is_location(l) {
                    return Err(WorldError::UnknownLocation(l.clone()));
                }
            }
        }
        Ok(())
    }

    /// Checks every world object against the KB: it must be an individual.
    pub fn check_against(&self, kb: &Taxonomy) -> Result<()> {
        for o in self.placement.keys() {
            if kb.individual(o).is_none() {
                return Err(WorldError::UnknownObject(o.clone()));
            }
        }
        Ok(())
    }

    pub fn is_location(&self, l: &str) -> bool {
        self.shelves.contains_key(l) || self.rooms.iter().any(|r| r == l) || self.points.iter().any(|p| p == l)
    }

    pub fn locations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.points.clone();
        out.extend(self.rooms.iter().cloned());
        out.extend(self.shelves.keys().cloned());
        out
    }

    /// Symmetric; 0 on the diagonal, 1 for pairs the scenario leaves out.
    pub fn distance(&self, a: &str, b: &str) -> u32 {
        if a == b {
            0
        } else {
            self.distances.get(&key(a, b)).copied().unwrap_or(1)
        }
    }

    pub fn set_distance(&mut self, a: &str, b: &str, d: u32) {
        self.distances.insert(key(a, b), d);
    }

    pub fn on_shelf(&self, shelf: &str) -> BTreeSet<String> {
        self.placement
            .iter()
            .filter(|(_, h)| matches!(h, Holder::Shelf(s) if s == shelf))
            .map(|(o, _)| o.clone())
            .collect()
    }

    pub fn holding(&self) -> Vec<String> {
        self.right.iter().chain(self.left.iter()).cloned().collect()
    }

    pub fn hand_of(&self, object: &str) -> Option<Hand> {
        if self.right.as_deref() == Some(object) {
            Some(Hand::Right)
        } else if self.left.as_deref() == Some(object) {
            Some(Hand::Left)
        } else {
            None
        }
    }

    pub fn shelf(&self, id: &str) -> Result<&Shelf> {
        self.shelves.get(id).ok_or_else(|| WorldError::UnknownShelf(id.to_string()))
    }

    /// Counts the call and returns the injected error kind, if any.
    fn injected(&mut self, behavior: &str) -> Option<String> {
        let n = self.calls.entry(behavior.to_string()).or_insert(0);
        *n += 1;
        let n = *n;
        self.injections
            .iter()
            .find(|i| i.behavior == behavior && i.occurrence == n)
            .map(|i| i.kind.clone())
    }

    pub fn behavior_move(&mut self, target: &str) -> Result<BehaviorResult> {
        if !self.is_location(target) {
            return Err(WorldError::UnknownLocation(target.to_string()));
        }
        if self.robot_at == target {
            return Ok(BehaviorResult::ok(Term::sym(target)));
        }
        if let Some(kind) = self.injected("move") {
            return Ok(BehaviorResult::error(&kind));
        }
        self.robot_at = target.to_string();
        Ok(BehaviorResult::ok(Term::sym(target)))
    }

    /// Hand a take of `object` would use: the scenario override when that
    /// hand is free, else the right hand, else the left.
    pub fn hand_for(&self, object: &str) -> Option<Hand> {
        match (self.hand_overrides.get(object), self.left.is_none(), self.right.is_none()) {
            (_, false, false) => None,
            (Some(Hand::Left), true, _) => Some(Hand::Left),
            (Some(Hand::Right), _, true) => Some(Hand::Right),
            (_, _, true) => Some(Hand::Right),
            _ => Some(Hand::Left),
        }
    }

    /// Takes `object` from the shelf the robot stands at. The right hand is
    /// used when both are free unless the scenario overrides it.
    pub fn behavior_take(&mut self, object: &str) -> Result<BehaviorResult> {
        if let Some(kind) = self.injected("take") {
            return Ok(BehaviorResult::error(&kind));
        }
        if self.left.is_some() && self.right.is_some() {
            return Ok(BehaviorResult::error("hands_full"));
        }
        let here = matches!(self.placement.get(object), Some(Holder::Shelf(s)) if *s == self.robot_at);
        if !here {
            return Ok(BehaviorResult::error("not_found"));
        }
        let hand = self.hand_for(object).expect("a hand is free");
        match hand {
            Hand::Left => self.left = Some(object.to_string()),
            Hand::Right => self.right = Some(object.to_string()),
        }
        self.placement.insert(object.to_string(), Holder::Hand(hand));
        Ok(BehaviorResult::ok(Term::compound("hand", vec![Term::sym(object), Term::sym(hand.to_string())])))
    }

    /// Hands `object` to the user or puts it on a shelf.
    pub fn behavior_deliver(&mut self, object: &str, target: &str) -> Result<BehaviorResult> {
        if target != "user" && !self.shelves.contains_key(target) {
            return Err(WorldError::UnknownLocation(target.to_string()));
        }
        if let Some(kind) = self.injected("deliver") {
            return Ok(BehaviorResult::error(&kind));
        }
        let Some(hand) = self.hand_of(object) else {
            return Ok(BehaviorResult::error("not_held"));
        };
        let place = if target == "user" { &self.user_at } else { target };
        if self.robot_at != *place {
            return Ok(BehaviorResult::error("wrong_location"));
        }
        match hand {
            Hand::Left => self.left = None,
            Hand::Right => self.right = None,
        }
        let holder = if target == "user" {
            Holder::Delivered("user".to_string())
        } else {
            Holder::Shelf(target.to_string())
        };
        self.placement.insert(object.to_string(), holder);
        Ok(BehaviorResult::ok(Term::sym(target)))
    }

    /// `find(user)` goes to where the user is; `find(Object)` checks the
    /// shelf at the robot's position.
    pub fn behavior_find(&mut self, target: &str) -> Result<BehaviorResult> {
        if let Some(kind) = self.injected("find") {
            return Ok(BehaviorResult::error(&kind));
        }
        if target == "user" {
            self.robot_at = self.user_at.clone();
            return Ok(BehaviorResult::ok(Term::sym(self.user_at.clone())));
        }
        if !self.placement.contains_key(target) && !self.is_location(target) {
            // an object the world does not contain
            return Ok(BehaviorResult::error("not_found"));
        }
        match self.placement.get(target) {
            Some(Holder::Shelf(s)) if *s == self.robot_at => Ok(BehaviorResult::ok(Term::sym(s.clone()))),
            _ => Ok(BehaviorResult::error("not_found")),
        }
    }

    pub fn behavior_say(&mut self, text: &str) -> BehaviorResult {
        self.transcript.push(Utterance { speaker: Speaker::Robot, text: text.to_string(), question: false });
        BehaviorResult::ok(Term::sym("empty"))
    }

    /// Says `question` and reads one reply from `channel`.
    pub fn behavior_ask(&mut self, question: &str, channel: &mut dyn Channel) -> BehaviorResult {
        self.record_question(question);
        if let Some(kind) = self.injected("ask") {
            return BehaviorResult::error(&kind);
        }
        match channel.reply(question) {
            Some(r) => {
                self.record_reply(&r);
                BehaviorResult::ok(r)
            }
            None => BehaviorResult::error("no_reply"),
        }
    }

    pub fn record_question(&mut self, text: &str) {
        self.transcript.push(Utterance { speaker: Speaker::Robot, text: text.to_string(), question: true });
    }

    pub fn record_reply(&mut self, reply: &Term) {
        self.transcript.push(Utterance { speaker: Speaker::User, text: reply.to_string(), question: false });
    }

    /// Every question is followed by exactly one user reply, and every
    /// reply answers a question.
    pub fn transcript_balanced(&self) -> bool {
        let mut open = false;
        for u in &self.transcript {
            match u.speaker {
                Speaker::Robot if open => return false,
                Speaker::Robot => open = u.question,
                Speaker::User if !open => return false,
                Speaker::User => open = false,
            }
        }
        !open
    }
}
