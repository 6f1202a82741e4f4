use indexmap::IndexMap;

use super::{
    ClassDef, Clause, ConditionalDefault, IndividualDef, KbError, Kind, Literal, Result, Taxonomy,
    WeightedClause, DEFAULT_VAR,
};
use crate::term::{parse_clauses, Term};

impl Taxonomy {
    /// Reads a KB file: one list of `class/5` terms (a bare sequence of
    /// `class(...)` clauses is accepted too).
    pub fn load(text: &str) -> Result<Taxonomy> {
        let clauses = parse_clauses(text)?;
        let items: Vec<Term> = match clauses.as_slice() {
            [Term::List(items)] => items.clone(),
            _ => clauses,
        };
        Taxonomy::from_terms(&items)
    }

    pub fn from_terms(items: &[Term]) -> Result<Taxonomy> {
        let mut kb = Taxonomy { classes: IndexMap::new(), individuals: IndexMap::new() };
        for item in items {
            let (class, individuals) = read_class(item)?;
            kb.insert_class(class)?;
            for ind in individuals {
                kb.insert_individual(ind)?;
            }
        }
        kb.validate_root()?;
        Ok(kb)
    }

    pub(crate) fn insert_class(&mut self, class: ClassDef) -> Result<()> {
        if self.classes.contains_key(&class.id) || self.individuals.contains_key(&class.id) {
            return Err(KbError::Hierarchy(format!("duplicate id `{}`", class.id)));
        }
        match &class.mother {
            None if class.id != "top" => {
                return Err(KbError::Hierarchy(format!("class `{}` has no mother", class.id)))
            }
            None if !self.classes.is_empty() => {
                return Err(KbError::Hierarchy("`top` must be declared first".into()))
            }
            Some(_) if class.id == "top" => {
                return Err(KbError::Hierarchy("`top` cannot have a mother".into()))
            }
            Some(m) if !self.classes.contains_key(m) => {
                return Err(KbError::Hierarchy(format!(
                    "class `{}` names unknown or later-declared mother `{m}`",
                    class.id
                )))
            }
            _ => {}
        }
        let mut class = class;
        let members = std::mem::take(&mut class.members);
        self.classes.insert(class.id.clone(), class);
        for m in members {
            if !self.individuals.contains_key(&m) {
                return Err(KbError::Hierarchy(format!("member `{m}` is not declared")));
            }
        }
        Ok(())
    }

    pub(crate) fn insert_individual(&mut self, ind: IndividualDef) -> Result<()> {
        if self.classes.contains_key(&ind.id) || self.individuals.contains_key(&ind.id) {
            return Err(KbError::Hierarchy(format!("duplicate id `{}`", ind.id)));
        }
        let class = self
            .classes
            .get_mut(&ind.class)
            .ok_or_else(|| KbError::UnknownClass(ind.class.clone()))?;
        class.members.push(ind.id.clone());
        self.individuals.insert(ind.id.clone(), ind);
        Ok(())
    }

    fn validate_root(&self) -> Result<()> {
        match self.classes.first() {
            Some((id, _)) if id == "top" => Ok(()),
            _ => Err(KbError::Hierarchy("missing root class `top`".into())),
        }
    }
}

fn symbol<'a>(t: &'a Term, what: &str) -> Result<&'a str> {
    t.as_symbol()
        .ok_or_else(|| KbError::Clause(format!("expected symbol for {what}, found {t}")))
}

fn list<'a>(t: &'a Term, what: &str) -> Result<&'a [Term]> {
    t.as_list()
        .ok_or_else(|| KbError::Clause(format!("expected list for {what}, found {t}")))
}

fn read_class(t: &Term) -> Result<(ClassDef, Vec<IndividualDef>)> {
    let args = match t {
        Term::Compound(f, args) if f == "class" && args.len() == 5 => args,
        _ => return Err(KbError::Clause(format!("expected class/5, found {t}"))),
    };
    let id = symbol(&args[0], "class id")?.to_string();
    let mother = match symbol(&args[1], "mother")? {
        "none" => None,
        m => Some(m.to_string()),
    };
    let props = read_clauses(list(&args[2], "properties")?, Kind::Property)?;
    let rels = read_clauses(list(&args[3], "relations")?, Kind::Relation)?;
    let mut individuals = Vec::new();
    for ind in list(&args[4], "individuals")? {
        individuals.push(read_individual(ind, &id)?);
    }
    Ok((ClassDef { id, mother, props, rels, members: Vec::new() }, individuals))
}

fn read_individual(t: &Term, class: &str) -> Result<IndividualDef> {
    let parts = list(t, "individual")?;
    let (id_term, props, rels) = match parts {
        [id] => (id, &[][..], &[][..]),
        [id, p] => (id, list(p, "properties")?, &[][..]),
        [id, p, r] => (id, list(p, "properties")?, list(r, "relations")?),
        _ => return Err(KbError::Clause(format!("malformed individual {t}"))),
    };
    let id = match id_term.as_op("=>") {
        Some((k, v)) if k.is_symbol("id") => symbol(v, "individual id")?,
        _ => return Err(KbError::Clause(format!("expected id=>Name, found {id_term}"))),
    };
    Ok(IndividualDef {
        id: id.to_string(),
        class: class.to_string(),
        props: read_clauses(props, Kind::Property)?,
        rels: read_clauses(rels, Kind::Relation)?,
    })
}

pub(crate) fn read_clauses(items: &[Term], kind: Kind) -> Result<Vec<WeightedClause>> {
    items.iter().map(|t| read_weighted(t, kind)).collect()
}

/// `[Clause, Weight]`, `[Clause]` or a bare clause (weight 0).
pub(crate) fn read_weighted(t: &Term, kind: Kind) -> Result<WeightedClause> {
    let (body, weight) = match t {
        Term::List(xs) => match xs.as_slice() {
            [c, Term::Number(w)] if *w >= 0 => (c, *w as u32),
            [_, w] => return Err(KbError::Clause(format!("weight must be a non-negative integer, found {w}"))),
            [c] => (c, 0),
            _ => return Err(KbError::Clause(format!("malformed weighted clause {t}"))),
        },
        other => (other, 0),
    };
    Ok(WeightedClause { clause: read_clause(body, kind)?, weight })
}

fn read_clause(t: &Term, kind: Kind) -> Result<Clause> {
    if let Some((ante, cons)) = t.as_op("=>>") {
        let antecedents = read_antecedents(ante)?;
        let consequent = default_literal(cons)?;
        if kind == Kind::Relation {
            if let Some(l) = antecedents.iter().chain([&consequent]).find(|l| l.value.is_none()) {
                return Err(KbError::Clause(format!(
                    "label `{}` in a relation default; relations are attribute-value pairs",
                    l.attr
                )));
            }
        }
        return Ok(Clause::Default(ConditionalDefault { antecedents, consequent }));
    }
    Literal::from_term(t)
        .map(Clause::Fact)
        .ok_or_else(|| KbError::Clause(format!("not a literal: {t}")))
}

fn read_antecedents(t: &Term) -> Result<Vec<Literal>> {
    match t {
        Term::Symbol(s) if s == "-" => Ok(Vec::new()),
        Term::List(items) => items.iter().map(default_literal).collect(),
        other => Ok(vec![default_literal(other)?]),
    }
}

/// A literal inside a default, where the value `'-'` is the shared variable.
fn default_literal(t: &Term) -> Result<Literal> {
    let mut lit =
        Literal::from_term(t).ok_or_else(|| KbError::Clause(format!("not a literal: {t}")))?;
    if matches!(&lit.value, Some(Term::Symbol(s)) if s == "-") {
        lit.value = Some(Term::var(DEFAULT_VAR));
    }
    Ok(lit)
}
