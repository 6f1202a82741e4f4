use super::load::{read_clauses, read_weighted};
use super::{
    ClassDef, Clause, IndividualDef, KbError, Kind, Literal, Result, Taxonomy, WeightedClause,
    DEFAULT_VAR,
};
use crate::term::{print_term, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOp {
    /// `class(Id, Mother)` or `class(Id, Mother, Props, Rels, [])`.
    AddClass,
    /// `Id`; the whole subtree and its individuals go with it.
    RemoveClass,
    /// `individual(Class, Id)` or `individual(Class, Id, Props, Rels)`.
    AddIndividual,
    /// `Id`.
    RemoveIndividual,
    /// `clause(Subject, Entry)` or `clause(Subject, relation, Entry)`.
    AssertClause,
    /// Same payload as `AssertClause`; the weight is ignored when matching.
    RetractClause,
    /// `set(Subject, Attr, Value)`: replaces every `Attr=>_` fact at the node.
    SetValue,
}

impl UpdateOp {
    pub fn parse(name: &str) -> Option<UpdateOp> {
        Some(match name {
            "add_class" => UpdateOp::AddClass,
            "remove_class" => UpdateOp::RemoveClass,
            "add_individual" => UpdateOp::AddIndividual,
            "remove_individual" => UpdateOp::RemoveIndividual,
            "assert_clause" | "assert" => UpdateOp::AssertClause,
            "retract_clause" | "retract" => UpdateOp::RetractClause,
            "set_value" | "set" => UpdateOp::SetValue,
            _ => return None,
        })
    }
}

fn payload(msg: impl Into<String>) -> KbError {
    KbError::Payload(msg.into())
}

fn sym<'a>(t: &'a Term) -> Result<&'a str> {
    t.as_symbol().ok_or_else(|| payload(format!("expected symbol, found {t}")))
}

fn items<'a>(t: &'a Term) -> Result<&'a [Term]> {
    t.as_list().ok_or_else(|| payload(format!("expected list, found {t}")))
}

impl Taxonomy {
    /// Returns the updated taxonomy; `self` is untouched.
    pub fn update(&self, op: UpdateOp, payload_term: &Term) -> Result<Taxonomy> {
        let mut next = self.clone();
        next.update_in_place(op, payload_term)?;
        Ok(next)
    }

    /// In-place variant of [`Taxonomy::update`]. On error nothing changes.
    pub fn update_in_place(&mut self, op: UpdateOp, p: &Term) -> Result<()> {
        let mut next = self.clone();
        next.apply(op, p)?;
        *self = next;
        Ok(())
    }

    fn apply(&mut self, op: UpdateOp, p: &Term) -> Result<()> {
        let args = p.args();
        match op {
            UpdateOp::AddClass => {
                let (id, mother, props, rels) = match (p.name(), args) {
                    (Some("class"), [id, m]) => (id, m, &[][..], &[][..]),
                    (Some("class"), [id, m, ps, rs, inds]) if items(inds)?.is_empty() => {
                        (id, m, items(ps)?, items(rs)?)
                    }
                    _ => return Err(payload(format!("expected class(Id, Mother), found {p}"))),
                };
                let mother = sym(mother)?;
                self.insert_class(ClassDef {
                    id: sym(id)?.to_string(),
                    mother: (mother != "none").then(|| mother.to_string()),
                    props: read_clauses(props, Kind::Property)?,
                    rels: read_clauses(rels, Kind::Relation)?,
                    members: Vec::new(),
                })
            }
            UpdateOp::RemoveClass => {
                let id = sym(p)?;
                if id == "top" {
                    return Err(KbError::Hierarchy("cannot remove `top`".into()));
                }
                if !self.classes.contains_key(id) {
                    return Err(KbError::UnknownTarget(format!("class `{id}`")));
                }
                let sub = self.subtree(id);
                self.individuals.retain(|_, i| !sub.contains(&i.class));
                self.classes.retain(|c, _| !sub.contains(c));
                Ok(())
            }
            UpdateOp::AddIndividual => {
                let (class, id, props, rels) = match (p.name(), args) {
                    (Some("individual"), [c, id]) => (c, id, &[][..], &[][..]),
                    (Some("individual"), [c, id, ps, rs]) => (c, id, items(ps)?, items(rs)?),
                    _ => return Err(payload(format!("expected individual(Class, Id), found {p}"))),
                };
                self.insert_individual(IndividualDef {
                    id: sym(id)?.to_string(),
                    class: sym(class)?.to_string(),
                    props: read_clauses(props, Kind::Property)?,
                    rels: read_clauses(rels, Kind::Relation)?,
                })
            }
            UpdateOp::RemoveIndividual => {
                let id = sym(p)?;
                let ind = self
                    .individuals
                    .shift_remove(id)
                    .ok_or_else(|| KbError::UnknownTarget(format!("individual `{id}`")))?;
                self.classes[&ind.class].members.retain(|m| m != id);
                Ok(())
            }
            UpdateOp::AssertClause | UpdateOp::RetractClause => {
                let (subject, kind, entry) = match (p.name(), args) {
                    (Some("clause"), [s, e]) => (s, Kind::Property, e),
                    (Some("clause"), [s, k, e]) if k.is_symbol("relation") => (s, Kind::Relation, e),
                    (Some("clause"), [s, k, e]) if k.is_symbol("property") => (s, Kind::Property, e),
                    _ => return Err(payload(format!("expected clause(Subject, Entry), found {p}"))),
                };
                let subject = sym(subject)?;
                let wc = read_weighted(entry, kind)?;
                if op == UpdateOp::AssertClause {
                    self.assert_clause(subject, kind, wc)
                } else {
                    self.retract_clause(subject, &wc.clause)
                }
            }
            UpdateOp::SetValue => match (p.name(), args) {
                (Some("set"), [s, a, v]) => self.set_value(sym(s)?, sym(a)?, v.clone()),
                _ => Err(payload(format!("expected set(Subject, Attr, Value), found {p}"))),
            },
        }
    }

    /// Adds a clause at `subject`, dropping its complement from the same node.
    pub fn assert_clause(&mut self, subject: &str, kind: Kind, wc: WeightedClause) -> Result<()> {
        let (props, rels) = self
            .clauses_of_mut(subject)
            .ok_or_else(|| KbError::UnknownTarget(format!("subject `{subject}`")))?;
        if let Clause::Fact(l) = &wc.clause {
            let neg = Clause::Fact(l.negate());
            props.retain(|c| c.clause != neg);
            rels.retain(|c| c.clause != neg);
        }
        let list = if kind == Kind::Property { props } else { rels };
        if let Some(existing) = list.iter_mut().find(|c| c.clause == wc.clause) {
            existing.weight = wc.weight;
        } else {
            list.push(wc);
        }
        Ok(())
    }

    pub fn retract_clause(&mut self, subject: &str, clause: &Clause) -> Result<()> {
        let (props, rels) = self
            .clauses_of_mut(subject)
            .ok_or_else(|| KbError::UnknownTarget(format!("subject `{subject}`")))?;
        for list in [props, rels] {
            if let Some(i) = list.iter().position(|c| c.clause == *clause) {
                list.remove(i);
                return Ok(());
            }
        }
        Err(KbError::UnknownTarget(format!("clause at `{subject}`")))
    }

    /// Replaces every positive `attr` fact at `subject` with `attr=>value`.
    pub fn set_value(&mut self, subject: &str, attr: &str, value: Term) -> Result<()> {
        let new = Literal::pair(attr, value);
        let neg = new.negate();
        let (props, rels) = self
            .clauses_of_mut(subject)
            .ok_or_else(|| KbError::UnknownTarget(format!("subject `{subject}`")))?;
        let stale = |c: &WeightedClause| match &c.clause {
            Clause::Fact(l) => (!l.negated && l.attr == attr) || *l == neg,
            Clause::Default(_) => false,
        };
        props.retain(|c| !stale(c));
        rels.retain(|c| !stale(c));
        props.push(WeightedClause::fact(new, 0));
        Ok(())
    }

    /// Removes every positive `attr` fact at `subject`.
    pub fn clear_value(&mut self, subject: &str, attr: &str) -> Result<()> {
        let (props, rels) = self
            .clauses_of_mut(subject)
            .ok_or_else(|| KbError::UnknownTarget(format!("subject `{subject}`")))?;
        let stale = |c: &WeightedClause| matches!(&c.clause, Clause::Fact(l) if !l.negated && l.attr == attr);
        props.retain(|c| !stale(c));
        rels.retain(|c| !stale(c));
        Ok(())
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.classes
            .values()
            .map(|c| {
                let inds = c
                    .members
                    .iter()
                    .map(|m| {
                        let i = &self.individuals[m];
                        Term::List(vec![
                            Term::op("=>", Term::sym("id"), Term::sym(i.id.clone())),
                            clauses_term(&i.props),
                            clauses_term(&i.rels),
                        ])
                    })
                    .collect();
                Term::compound(
                    "class",
                    vec![
                        Term::sym(c.id.clone()),
                        Term::sym(c.mother.clone().unwrap_or_else(|| "none".into())),
                        clauses_term(&c.props),
                        clauses_term(&c.rels),
                        Term::List(inds),
                    ],
                )
            })
            .collect()
    }

    /// KB file text; `Taxonomy::load(&kb.dump())` equals `kb`.
    pub fn dump(&self) -> String {
        let body: Vec<String> = self.to_terms().iter().map(print_term).collect();
        format!("[\n {}\n].\n", body.join(",\n "))
    }
}

fn clauses_term(cs: &[WeightedClause]) -> Term {
    Term::List(cs.iter().map(|c| Term::List(vec![clause_term(&c.clause), Term::Number(c.weight as i64)])).collect())
}

fn default_literal_term(l: &Literal) -> Term {
    let mut l = l.clone();
    if matches!(&l.value, Some(Term::Variable(v)) if v == DEFAULT_VAR) {
        l.value = Some(Term::sym("-"));
    }
    l.to_term()
}

pub(crate) fn clause_term(c: &Clause) -> Term {
    match c {
        Clause::Fact(l) => l.to_term(),
        Clause::Default(d) => {
            let ante = match d.antecedents.as_slice() {
                [] => Term::sym("-"),
                [one] => default_literal_term(one),
                many => Term::List(many.iter().map(default_literal_term).collect()),
            };
            Term::op("=>>", ante, default_literal_term(&d.consequent))
        }
    }
}
