use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{InferenceError, Result};
use crate::kb::{Kind, Literal, Taxonomy, WeightedClause};
use crate::term::Term;
use crate::world::{believed_shelf, has_fact, Holder, Observation, WorldState};

/// Assumed filling of the shelves by the assistant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    /// Every shelf in declaration order with its known or hypothesized content.
    pub shelves: IndexMap<String, BTreeSet<String>>,
    /// Shelves whose content was observed.
    pub known: BTreeSet<String>,
    /// Where each missing object is assumed to be.
    pub hypothesized: BTreeMap<String, String>,
    pub sought_at: Option<String>,
    /// One round of `move(S)` followed by `place(O)` for each object on `S`.
    pub assistant_actions: Vec<Term>,
}

impl Diagnosis {
    pub fn shelf_of(&self, object: &str) -> Option<&str> {
        self.shelves.iter().find(|(_, os)| os.contains(object)).map(|(s, _)| s.as_str())
    }
}

fn assert_new(kb: &mut Taxonomy, subject: &str, lit: Literal) -> Result<()> {
    if !has_fact(kb, subject, &lit) {
        kb.assert_clause(subject, Kind::Property, WeightedClause::fact(lit, 0))?;
    }
    Ok(())
}

/// Hypothesizes the content of the shelves not yet inspected from the
/// failed observation `obs` of `sought` and the shelves seen before.
///
/// The sought object goes to the closest unseen shelf; other missing objects
/// and objects with no believed place are spread uniformly over the other
/// unseen shelves. Known shelves keep their observed content.
pub fn diagnose(
    w: &WorldState,
    kb: &mut Taxonomy,
    sought: Option<&str>,
    obs: &Observation,
    previous: &[(String, BTreeSet<String>)],
    rng: &mut ChaCha8Rng,
) -> Result<Diagnosis> {
    let current = obs.shelf.as_str();
    if let Some(o) = sought {
        assert_new(kb, o, Literal::pair("loc", Term::sym(current)).negate())?;
        if let Some(home) = w.class_shelf(kb, o) {
            assert_new(kb, o, Literal::pair("loc", Term::sym(home)).negate())?;
        }
    }

    let mut known: IndexMap<String, BTreeSet<String>> = previous.iter().cloned().collect();
    known.entry(current.to_string()).or_insert_with(|| obs.p.clone());
    let unseen: Vec<String> = w.shelves.keys().filter(|s| !known.contains_key(*s)).cloned().collect();
    if unseen.is_empty() && sought.is_some() {
        return Err(InferenceError::NoUnseenShelves);
    }
    let seen_objects: BTreeSet<&String> = known.values().flatten().collect();

    let mut shelves: IndexMap<String, BTreeSet<String>> = w
        .shelves
        .keys()
        .map(|s| (s.clone(), known.get(s).cloned().unwrap_or_default()))
        .collect();
    let mut hypothesized = BTreeMap::new();
    let closest = unseen
        .iter()
        .enumerate()
        .min_by_key(|(i, s)| (w.distance(current, s), *i))
        .map(|(_, s)| s.clone());
    let sought_at = match (sought, &closest) {
        (Some(o), Some(s)) => {
            shelves[s].insert(o.to_string());
            hypothesized.insert(o.to_string(), s.clone());
            Some(s.clone())
        }
        _ => None,
    };
    let spread: Vec<String> = match unseen.len() {
        0 | 1 => unseen.clone(),
        _ => unseen.iter().filter(|s| Some(*s) != closest.as_ref()).cloned().collect(),
    };

    let accounted = |o: &str| matches!(w.placement.get(o), Some(Holder::Hand(_) | Holder::Delivered(_)));
    let missing: BTreeSet<&String> = obs.missing.iter().filter(|o| Some(o.as_str()) != sought).collect();
    for o in w.universe(kb) {
        if accounted(&o) || seen_objects.contains(&o) || Some(o.as_str()) == sought {
            continue;
        }
        let believed = believed_shelf(kb, w, &o).filter(|b| !known.contains_key(b));
        let target = match believed {
            Some(b) if !missing.contains(&o) => Some(b),
            _ if spread.is_empty() => None,
            _ => {
                let s = spread[rng.gen_range(0..spread.len())].clone();
                hypothesized.insert(o.clone(), s.clone());
                Some(s)
            }
        };
        if let Some(s) = target {
            shelves[&s].insert(o);
        }
    }

    let assistant_actions = shelves
        .iter()
        .filter(|(_, os)| !os.is_empty())
        .flat_map(|(s, os)| {
            std::iter::once(Term::compound("move", vec![Term::sym(s.clone())]))
                .chain(os.iter().map(|o| Term::compound("place", vec![Term::sym(o.clone())])))
        })
        .collect();
    Ok(Diagnosis { shelves, known: known.keys().cloned().collect(), hypothesized, sought_at, assistant_actions })
}
