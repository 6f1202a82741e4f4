//! Non-monotonic taxonomy knowledge base.
//!
//! A strict single-parent class hierarchy rooted at `top`. Classes and
//! individuals carry weighted literals (facts) and weighted conditional
//! defaults. Facts are resolved by specificity: a node shadows everything
//! above it, and inside one node the lower weight wins. Defaults are fired
//! in weight order against the resolved facts, chaining through each other.

mod closure;
mod defaults;
mod load;
mod services;
mod update;

#[cfg(test)]
mod tests;

use std::fmt;

use indexmap::IndexMap;

use crate::term::{SyntaxError, Term};

pub use defaults::chain_defaults;
pub use services::{ExtensionKey, Member, Profile, ProfileKind, QueryAnswer};
pub use update::UpdateOp;

/// Name used for the shared variable that `'-'` stands for inside a default.
pub(crate) const DEFAULT_VAR: &str = "V";

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("hierarchy error: {0}")]
    Hierarchy(String),
    #[error("clause error: {0}")]
    Clause(String),
    #[error("unknown subject `{0}`")]
    UnknownSubject(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("unknown target: {0}")]
    UnknownTarget(String),
    #[error("`{subject}` asserts both {literal} and its negation at equal weight")]
    SameLevelConflict { subject: String, literal: Literal },
    #[error("malformed payload: {0}")]
    Payload(String),
}

pub type Result<T> = std::result::Result<T, KbError>;

/// Property or relation list a clause was declared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Property,
    Relation,
}

/// A label (`fly`) or attribute-value pair (`live=>mexico`), possibly negated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub attr: String,
    pub value: Option<Term>,
}

impl Literal {
    pub fn label(attr: impl Into<String>) -> Literal {
        Literal { negated: false, attr: attr.into(), value: None }
    }

    pub fn pair(attr: impl Into<String>, value: impl Into<Term>) -> Literal {
        Literal { negated: false, attr: attr.into(), value: Some(value.into()) }
    }

    pub fn negate(&self) -> Literal {
        Literal { negated: !self.negated, ..self.clone() }
    }

    /// Reads `a`, `a=>v`, `a=>>v` (same as `a=>v`) and `not(l)`.
    /// Double negation collapses.
    pub fn from_term(t: &Term) -> Option<Literal> {
        match t {
            Term::Symbol(s) => Some(Literal::label(s.clone())),
            Term::Compound(f, args) if f == "not" && args.len() == 1 => {
                Literal::from_term(&args[0]).map(|l| l.negate())
            }
            Term::Compound(f, args) if (f == "=>" || f == "=>>") && args.len() == 2 => {
                let attr = args[0].as_symbol()?;
                Some(Literal::pair(attr, args[1].clone()))
            }
            _ => None,
        }
    }

    pub fn to_term(&self) -> Term {
        let body = match &self.value {
            None => Term::sym(self.attr.clone()),
            Some(v) => Term::op("=>", Term::sym(self.attr.clone()), v.clone()),
        };
        if self.negated {
            Term::compound("not", vec![body])
        } else {
            body
        }
    }

    /// Conflict slot: positives are functional per attribute, negatives are
    /// per attribute-value.
    pub(crate) fn slot(&self) -> (bool, &str, Option<&Term>) {
        if self.negated {
            (true, &self.attr, self.value.as_ref())
        } else {
            (false, &self.attr, None)
        }
    }

    pub fn is_ground(&self) -> bool {
        self.value.as_ref().map_or(true, Term::is_ground)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// `antecedents =>> consequent`. Empty antecedents stand for `'-'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalDefault {
    pub antecedents: Vec<Literal>,
    pub consequent: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    Fact(Literal),
    Default(ConditionalDefault),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedClause {
    pub clause: Clause,
    pub weight: u32,
}

impl WeightedClause {
    pub fn fact(literal: Literal, weight: u32) -> WeightedClause {
        WeightedClause { clause: Clause::Fact(literal), weight }
    }

    pub fn default(antecedents: Vec<Literal>, consequent: Literal, weight: u32) -> WeightedClause {
        WeightedClause {
            clause: Clause::Default(ConditionalDefault { antecedents, consequent }),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub id: String,
    pub mother: Option<String>,
    pub props: Vec<WeightedClause>,
    pub rels: Vec<WeightedClause>,
    /// Individual ids in declaration order.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualDef {
    pub id: String,
    pub class: String,
    pub props: Vec<WeightedClause>,
    pub rels: Vec<WeightedClause>,
}

/// A default read backwards: `consequent` holds because of `antecedents`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub consequent: Literal,
    pub antecedents: Vec<Literal>,
    pub weight: u32,
}

impl Explanation {
    /// `Consequent:Antecedents` with a single antecedent unwrapped.
    pub fn to_term(&self) -> Term {
        let ante = match self.antecedents.as_slice() {
            [] => Term::sym("-"),
            [one] => one.to_term(),
            many => Term::List(many.iter().map(Literal::to_term).collect()),
        };
        Term::op(":", self.consequent.to_term(), ante)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub(crate) classes: IndexMap<String, ClassDef>,
    pub(crate) individuals: IndexMap<String, IndividualDef>,
}

impl Taxonomy {
    pub fn class(&self, id: &str) -> Option<&ClassDef> {
        self.classes.get(id)
    }

    pub fn individual(&self, id: &str) -> Option<&IndividualDef> {
        self.individuals.get(id)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn individuals(&self) -> impl Iterator<Item = &IndividualDef> {
        self.individuals.values()
    }

    pub fn is_subject(&self, id: &str) -> bool {
        self.classes.contains_key(id) || self.individuals.contains_key(id)
    }

    /// Subject followed by its ancestors up to `top`.
    pub fn path(&self, id: &str) -> Result<Vec<&str>> {
        let mut out = Vec::new();
        let mut cur = if let Some(ind) = self.individuals.get(id) {
            out.push(ind.id.as_str());
            Some(ind.class.as_str())
        } else if self.classes.contains_key(id) {
            Some(id)
        } else {
            return Err(KbError::UnknownSubject(id.to_string()));
        };
        while let Some(c) = cur {
            let def = &self.classes[c];
            out.push(def.id.as_str());
            cur = def.mother.as_deref();
        }
        Ok(out)
    }

    pub(crate) fn clauses_of(&self, id: &str) -> Option<(&[WeightedClause], &[WeightedClause])> {
        if let Some(ind) = self.individuals.get(id) {
            Some((&ind.props, &ind.rels))
        } else {
            self.classes.get(id).map(|c| (c.props.as_slice(), c.rels.as_slice()))
        }
    }

    pub(crate) fn clauses_of_mut(
        &mut self,
        id: &str,
    ) -> Option<(&mut Vec<WeightedClause>, &mut Vec<WeightedClause>)> {
        if let Some(ind) = self.individuals.get_mut(id) {
            Some((&mut ind.props, &mut ind.rels))
        } else {
            self.classes.get_mut(id).map(|c| (&mut c.props, &mut c.rels))
        }
    }

    /// Ids of `class` and every class below it, in declaration order.
    pub fn subtree(&self, class: &str) -> Vec<String> {
        let mut out = vec![class.to_string()];
        for c in self.classes.values() {
            if let Some(m) = &c.mother {
                if out.contains(m) && !out.contains(&c.id) {
                    out.push(c.id.clone());
                }
            }
        }
        out
    }
}
