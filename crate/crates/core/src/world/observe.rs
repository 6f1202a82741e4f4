use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{Holder, Result, WorldError, WorldState};
use crate::kb::{Clause, Kind, Literal, Taxonomy, WeightedClause};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub shelf: String,
    /// Observed.
    pub p: BTreeSet<String>,
    /// Expected here but unseen.
    pub q: BTreeSet<String>,
    /// Observed but not of the shelf's class.
    pub m: BTreeSet<String>,
    /// `q` minus the objects the KB places elsewhere.
    pub missing: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Notification {
    Exception { object: String, shelf: String },
    Misplaced { object: String, shelf: String },
}

impl fmt::Display for Notification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notification::Exception { object, shelf } => write!(f, "exception: {object} not at {shelf}"),
            Notification::Misplaced { object, shelf } => write!(f, "misplaced: {object} at {shelf}"),
        }
    }
}

/// Shelf the KB currently places `object` on.
pub fn believed_shelf(kb: &Taxonomy, w: &WorldState, object: &str) -> Option<String> {
    let v = kb.preferred_value(object, "loc", &[]).ok()??;
    let s = v.as_symbol()?;
    w.shelves.contains_key(s).then(|| s.to_string())
}

impl WorldState {
    /// Shelf designated for the class of `object`.
    pub fn class_shelf(&self, kb: &Taxonomy, object: &str) -> Option<String> {
        let classes = kb.classes_of(object).ok()?;
        self.shelves.values().find(|s| classes.contains(&s.class)).map(|s| s.id.clone())
    }

    /// Objects the robot reasons about: KB individuals of a shelved class
    /// and everything the world contains.
    pub fn universe(&self, kb: &Taxonomy) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.placement.keys().cloned().collect();
        out.extend(kb.individuals().filter(|i| self.class_shelf(kb, &i.id).is_some()).map(|i| i.id.clone()));
        out
    }

    /// Objects the robot itself holds or has handed over.
    fn accounted(&self, object: &str) -> bool {
        matches!(self.placement.get(object), Some(Holder::Hand(_) | Holder::Delivered(_)))
    }

    /// Believed on a shelf other than its class shelf.
    pub fn believed_misplaced(&self, kb: &Taxonomy, object: &str) -> Option<String> {
        let b = believed_shelf(kb, self, object)?;
        (Some(&b) != self.class_shelf(kb, object).as_ref()).then_some(b)
    }

    /// Observation sets of `shelf` against the current KB, without updates.
    pub fn observe(&self, kb: &Taxonomy, shelf: &str) -> Result<Observation> {
        let class = &self.shelf(shelf)?.class;
        let p = self.on_shelf(shelf);
        let mut q = BTreeSet::new();
        let mut mkb = BTreeSet::new();
        for o in self.universe(kb) {
            if self.accounted(&o) {
                continue;
            }
            let home = self.class_shelf(kb, &o);
            let believed = believed_shelf(kb, self, &o);
            let mine = home.as_deref() == Some(shelf);
            if !p.contains(&o) && (mine || believed.as_deref() == Some(shelf)) {
                q.insert(o.clone());
            }
            if let Some(at) = self.believed_misplaced(kb, &o) {
                if mine || at == shelf {
                    mkb.insert(o);
                }
            }
        }
        let m = p
            .iter()
            .filter(|o| !kb.classes_of(o).map(|cs| cs.contains(class)).unwrap_or(false))
            .cloned()
            .collect();
        let missing = q.difference(&mkb).cloned().collect();
        Ok(Observation { shelf: shelf.to_string(), p, q, m, missing })
    }

    /// Inspects the shelf the robot stands at and discharges the cognitive
    /// obligations: exceptions for missing objects, misplaced marks, and
    /// `last_seen` for everything observed. Notifications are emitted only
    /// for KB changes, so repeating it on an unchanged shelf is silent.
    pub fn behavior_see(&mut self, kb: &mut Taxonomy, shelf: &str) -> Result<(Observation, Vec<Notification>)> {
        if self.robot_at != shelf {
            return Err(WorldError::NotAtShelf { at: self.robot_at.clone(), shelf: shelf.to_string() });
        }
        let obs = self.observe(kb, shelf)?;
        let mut notes = Vec::new();
        let not_here = Literal::pair("loc", Term::sym(shelf)).negate();
        for o in &obs.missing {
            if !has_fact(kb, o, &not_here) {
                kb.assert_clause(o, Kind::Property, WeightedClause::fact(not_here.clone(), 0))?;
                notes.push(Notification::Exception { object: o.clone(), shelf: shelf.to_string() });
            }
        }
        let marked: Vec<bool> = obs
            .m
            .iter()
            .map(|o| has_fact(kb, o, &Literal::label("misplaced")) && believed_shelf(kb, self, o).as_deref() == Some(shelf))
            .collect();
        for o in &obs.p {
            if has_fact(kb, o, &not_here) {
                kb.retract_clause(o, &Clause::Fact(not_here.clone()))?;
            }
            if !has_fact(kb, o, &Literal::pair("last_seen", Term::sym(shelf))) {
                kb.set_value(o, "last_seen", Term::sym(shelf))?;
            }
        }
        for (o, done) in obs.m.iter().zip(marked) {
            if !done {
                kb.assert_clause(o, Kind::Property, WeightedClause::fact(Literal::label("misplaced"), 0))?;
                notes.push(Notification::Misplaced { object: o.clone(), shelf: shelf.to_string() });
            }
        }
        Ok((obs, notes))
    }
}

/// A fact stated at the node itself, not inherited.
pub(crate) fn has_fact(kb: &Taxonomy, subject: &str, lit: &Literal) -> bool {
    kb.individual(subject)
        .map(|i| i.props.iter().chain(&i.rels).any(|c| c.clause == Clause::Fact(lit.clone())))
        .unwrap_or(false)
}
