use std::fmt;

use super::{Explanation, KbError, Kind, Literal, Result, Taxonomy};
use crate::term::{unify, Binding};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryAnswer {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for QueryAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryAnswer::Yes => "yes",
            QueryAnswer::No => "no",
            QueryAnswer::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionKey {
    Class(String),
    Property(Literal),
    Relation(Literal),
    Explanation(Literal),
}

/// One individual of an extension; `explanation` is set for explanation keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub id: String,
    pub explanation: Option<Explanation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Classes,
    Properties,
    Relations,
    Explanations,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profile {
    Classes(Vec<String>),
    Literals(Vec<Literal>),
    Explanations(Vec<Explanation>),
}

fn matches(pattern: &Literal, lit: &Literal) -> bool {
    unify(&pattern.to_term(), &lit.to_term(), &Binding::new()).is_some()
}

impl Taxonomy {
    /// Three-valued query against the subject's own closure. Positive
    /// attribute-value pairs are functional, so `a=>w` answers `a=>v` with no.
    pub fn ask(&self, subject: &str, literal: &Literal) -> Result<QueryAnswer> {
        let closure = self.resolve_closure(subject)?;
        if closure.iter().any(|l| matches(literal, l)) {
            return Ok(QueryAnswer::Yes);
        }
        let neg = literal.negate();
        if closure.iter().any(|l| matches(&neg, l)) {
            return Ok(QueryAnswer::No);
        }
        if let Some(v) = &literal.value {
            let other_value = closure.iter().any(|l| {
                !l.negated && l.attr == literal.attr && l.value.as_ref().is_some_and(|w| w != v)
            });
            if other_value && v.is_ground() {
                return Ok(if literal.negated { QueryAnswer::Yes } else { QueryAnswer::No });
            }
        }
        Ok(QueryAnswer::Unknown)
    }

    pub fn extension_of(&self, key: &ExtensionKey) -> Result<Vec<Member>> {
        let plain = |id: &str| Member { id: id.to_string(), explanation: None };
        match key {
            ExtensionKey::Class(c) => {
                if !self.classes.contains_key(c) {
                    return Err(KbError::UnknownClass(c.clone()));
                }
                let sub = self.subtree(c);
                Ok(self
                    .individuals
                    .values()
                    .filter(|i| sub.contains(&i.class))
                    .map(|i| plain(&i.id))
                    .collect())
            }
            ExtensionKey::Property(l) | ExtensionKey::Relation(l) => {
                let kind =
                    if matches!(key, ExtensionKey::Property(_)) { Kind::Property } else { Kind::Relation };
                let mut out = Vec::new();
                for id in self.individuals.keys() {
                    if self.literals_of(id, kind)?.iter().any(|x| matches(l, x)) {
                        out.push(plain(id));
                    }
                }
                Ok(out)
            }
            ExtensionKey::Explanation(l) => {
                let mut out = Vec::new();
                for id in self.individuals.keys() {
                    for e in self.explanations_of(id)? {
                        if matches(l, &e.consequent) {
                            out.push(Member { id: id.clone(), explanation: Some(e) });
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Closure literals of one kind (fired defaults carry their list's kind).
    pub fn literals_of(&self, id: &str, kind: Kind) -> Result<Vec<Literal>> {
        let (facts, fired) = self.closure_with(id, &[])?;
        Ok(facts
            .into_iter()
            .filter(|f| f.kind == kind)
            .map(|f| f.literal)
            .chain(fired.into_iter().filter(|f| f.kind == kind).map(|f| f.explanation.consequent))
            .collect())
    }

    /// Mother classes of an individual, nearest first, ending at `top`.
    pub fn classes_of(&self, id: &str) -> Result<Vec<String>> {
        if !self.individuals.contains_key(id) {
            return Err(KbError::UnknownIndividual(id.to_string()));
        }
        Ok(self.path(id)?.into_iter().skip(1).map(String::from).collect())
    }

    pub fn profile_of_individual(&self, kind: ProfileKind, id: &str) -> Result<Profile> {
        if !self.individuals.contains_key(id) {
            return Err(KbError::UnknownIndividual(id.to_string()));
        }
        Ok(match kind {
            ProfileKind::Classes => Profile::Classes(self.classes_of(id)?),
            ProfileKind::Properties => Profile::Literals(self.literals_of(id, Kind::Property)?),
            ProfileKind::Relations => Profile::Literals(self.literals_of(id, Kind::Relation)?),
            ProfileKind::Explanations => Profile::Explanations(self.explanations_of(id)?),
        })
    }
}
