use super::closure::GatheredDefault;
use super::{ConditionalDefault, Explanation, Kind, Literal, Result, Taxonomy};
use crate::term::{unify, Binding, Term};

/// A default that fired, instantiated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fired {
    pub explanation: Explanation,
    pub kind: Kind,
}

/// First binding under which every antecedent is a member of `set`.
fn satisfy(ants: &[Literal], set: &[Literal], env: &Binding) -> Option<Binding> {
    let Some((first, rest)) = ants.split_first() else {
        return Some(env.clone());
    };
    let pattern = first.to_term();
    set.iter().find_map(|lit| {
        let b = unify(&pattern, &lit.to_term(), env)?;
        satisfy(rest, set, &b)
    })
}

fn instantiate(d: &GatheredDefault, b: &Binding) -> Fired {
    let inst = |l: &Literal| Literal::from_term(&b.apply(&l.to_term())).expect("literal shape is preserved");
    Fired {
        explanation: Explanation {
            consequent: inst(&d.default.consequent),
            antecedents: d.default.antecedents.iter().map(inst).collect(),
            weight: d.weight,
        },
        kind: d.kind,
    }
}

/// Backward/forward chaining over weight-sorted defaults. An antecedent holds
/// if it is in `prop`, or in the temporary closure obtained by running the
/// remaining defaults first. Returns the fired defaults in firing order.
pub(crate) fn fire(prop: &[Literal], lcd: &[GatheredDefault]) -> Vec<Fired> {
    let Some((head, more)) = lcd.split_first() else {
        return Vec::new();
    };
    let with = |fired: Fired| {
        let mut next = prop.to_vec();
        next.push(fired.explanation.consequent.clone());
        let mut out = vec![fired];
        out.extend(fire(&next, more));
        out
    };
    if let Some(b) = satisfy(&head.default.antecedents, prop, &Binding::new()) {
        return with(instantiate(head, &b));
    }
    let tem_fired = fire(prop, more);
    let mut tem = prop.to_vec();
    tem.extend(tem_fired.iter().map(|f| f.explanation.consequent.clone()));
    match satisfy(&head.default.antecedents, &tem, &Binding::new()) {
        Some(b) => with(instantiate(head, &b)),
        None => tem_fired,
    }
}

/// `prop` extended with the consequents of every default in `lcd` (sorted by
/// increasing weight) that fires.
pub fn chain_defaults(prop: &[Literal], lcd: &[ConditionalDefault]) -> Vec<Literal> {
    let gathered: Vec<GatheredDefault> = lcd
        .iter()
        .enumerate()
        .map(|(i, d)| GatheredDefault { default: d.clone(), weight: i as u32, kind: Kind::Property })
        .collect();
    let mut out = prop.to_vec();
    out.extend(fire(prop, &gathered).into_iter().map(|f| f.explanation.consequent));
    out
}

fn value_of(lit: &Literal) -> Term {
    lit.value.clone().unwrap_or_else(|| Term::sym(lit.attr.clone()))
}

impl Taxonomy {
    /// Value of `attr` after firing the subject's defaults against its facts
    /// and `known`, keeping the first definition of each attribute.
    pub fn preferred_value(&self, scope: &str, attr: &str, known: &[Literal]) -> Result<Option<Term>> {
        let (facts, fired) = self.closure_with(scope, known)?;
        Ok(facts
            .iter()
            .map(|f| &f.literal)
            .chain(fired.iter().map(|f| &f.explanation.consequent))
            .find(|l| !l.negated && l.attr == attr)
            .map(value_of))
    }

    /// Every value of `attr`, facts first, then fired defaults in weight order,
    /// without removing repeats. Values negated by a fact are skipped.
    pub fn preferred_value_list_raw(&self, id: &str, attr: &str, known: &[Literal]) -> Result<Vec<Term>> {
        let mut facts: Vec<Literal> =
            self.resolved_facts(id)?.into_iter().map(|f| f.literal).collect();
        facts.extend(known.iter().cloned());
        let fired = fire(&facts, &self.gathered_defaults(id)?);
        Ok(facts
            .iter()
            .chain(fired.iter().map(|f| &f.explanation.consequent))
            .filter(|l| !l.negated && l.attr == attr && l.is_ground())
            .filter(|l| !facts.contains(&l.negate()))
            .map(value_of)
            .collect())
    }

    /// `preferred_value_list_raw` with repeats removed, first occurrence kept.
    pub fn preferred_value_list(&self, id: &str, attr: &str, known: &[Literal]) -> Result<Vec<Term>> {
        let mut out: Vec<Term> = Vec::new();
        for v in self.preferred_value_list_raw(id, attr, known)? {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Lowest-weight default of `id` (or an ancestor) whose consequent
    /// unifies with `observed`, read backwards.
    pub fn abduce(&self, id: &str, observed: &Literal) -> Result<Option<Explanation>> {
        let target = observed.to_term();
        Ok(self.gathered_defaults(id)?.iter().find_map(|d| {
            let b = unify(&d.default.consequent.to_term(), &target, &Binding::new())?;
            Some(instantiate(d, &b).explanation)
        }))
    }

    /// Explanations for every default that fired for `id`.
    pub fn explanations_of(&self, id: &str) -> Result<Vec<Explanation>> {
        let (_, fired) = self.closure_with(id, &[])?;
        Ok(fired.into_iter().map(|f| f.explanation).collect())
    }
}
