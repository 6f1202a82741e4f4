//! JSON-lines run record.

use serde::Serialize;

use crate::inference::{Diagnosis, Obligation};
use crate::term::Term;
use crate::world::{Notification, Observation};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Seed { seed: u64 },
    Behavior { behavior: Term, status: String },
    Say { text: String },
    Ask { text: String },
    Reply { reply: Term },
    Observation { observation: Observation },
    Notification { note: Notification },
    Search { object: String, shelf: String, found: bool },
    Cycle { depth: usize, goal: Obligation, shelf: String },
    Diagnosis { diagnosis: Diagnosis },
    Decision { obligations: Vec<Obligation>, cost: f64 },
    Plan { behaviors: Vec<Term> },
    RunOut { object: String, substitute: Option<String> },
    Offer { object: String, substitute: String, accepted: bool },
    Recovery { protocol: String, attempt: usize, outcome: Term },
    KbUpdate { subject: String, update: Term },
    Resolved { requested: Term, resolved: Option<String>, source: String },
    UserLocation { room: String },
    Delivered { object: String, to: String, at: String },
    Abduction { object: String, observed: Term, cause: Term, weight: u32 },
    Locations { object: String, locations: Vec<Term> },
    GiveUp { reason: String },
    Done,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub events: Vec<Event>,
}

impl Record {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn count(&self, pred: impl Fn(&Event) -> bool) -> usize {
        self.events.iter().filter(|e| pred(e)).count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}
