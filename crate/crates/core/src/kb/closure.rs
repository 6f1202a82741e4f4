use super::{Clause, ConditionalDefault, KbError, Kind, Literal, Result, Taxonomy};
use crate::kb::defaults::{fire, Fired};

/// A resolved literal with the list it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub literal: Literal,
    pub kind: Kind,
    pub weight: u32,
}

/// A default gathered along a subject's path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatheredDefault {
    pub default: ConditionalDefault,
    pub weight: u32,
    pub kind: Kind,
}

/// `set` already holds `lit`'s slot or its complement.
pub(crate) fn blocked(set: &[Literal], lit: &Literal) -> bool {
    let neg = lit.negate();
    set.iter().any(|x| x.slot() == lit.slot() || *x == neg)
}

impl Taxonomy {
    /// Facts of `id` after specificity and weight resolution (defaults not fired).
    pub fn resolved_facts(&self, id: &str) -> Result<Vec<Fact>> {
        let mut out: Vec<Fact> = Vec::new();
        for node in self.path(id)? {
            let (props, rels) = self.clauses_of(node).expect("path yields subjects");
            let mut local: Vec<Fact> = props
                .iter()
                .map(|c| (c, Kind::Property))
                .chain(rels.iter().map(|c| (c, Kind::Relation)))
                .filter_map(|(c, kind)| match &c.clause {
                    Clause::Fact(l) => Some(Fact { literal: l.clone(), kind, weight: c.weight }),
                    Clause::Default(_) => None,
                })
                .collect();
            local.sort_by_key(|f| f.weight);
            for (i, f) in local.iter().enumerate() {
                let neg = f.literal.negate();
                if local[i + 1..].iter().any(|g| g.weight == f.weight && g.literal == neg) {
                    return Err(KbError::SameLevelConflict {
                        subject: node.to_string(),
                        literal: if f.literal.negated { neg } else { f.literal.clone() },
                    });
                }
            }
            for f in local {
                let current: Vec<Literal> = out.iter().map(|f| f.literal.clone()).collect();
                if !blocked(&current, &f.literal) {
                    out.push(f);
                }
            }
        }
        Ok(out)
    }

    /// Defaults of `id` and its ancestors, most specific node first, then
    /// stable-sorted by weight.
    pub fn gathered_defaults(&self, id: &str) -> Result<Vec<GatheredDefault>> {
        let mut out = Vec::new();
        for node in self.path(id)? {
            let (props, rels) = self.clauses_of(node).expect("path yields subjects");
            for (c, kind) in props
                .iter()
                .map(|c| (c, Kind::Property))
                .chain(rels.iter().map(|c| (c, Kind::Relation)))
            {
                if let Clause::Default(d) = &c.clause {
                    out.push(GatheredDefault { default: d.clone(), weight: c.weight, kind });
                }
            }
        }
        out.sort_by_key(|g| g.weight);
        Ok(out)
    }

    /// Resolved facts plus fired defaults that do not clash with them.
    pub(crate) fn closure_with(&self, id: &str, known: &[Literal]) -> Result<(Vec<Fact>, Vec<Fired>)> {
        let mut facts = self.resolved_facts(id)?;
        for k in known {
            let lits: Vec<Literal> = facts.iter().map(|f| f.literal.clone()).collect();
            if !blocked(&lits, k) {
                facts.push(Fact { literal: k.clone(), kind: Kind::Property, weight: 0 });
            }
        }
        let prop: Vec<Literal> = facts.iter().map(|f| f.literal.clone()).collect();
        let fired = fire(&prop, &self.gathered_defaults(id)?);
        let mut accepted: Vec<Fired> = Vec::new();
        let mut seen = prop;
        for f in fired {
            if !f.explanation.consequent.is_ground() || blocked(&seen, &f.explanation.consequent) {
                continue;
            }
            seen.push(f.explanation.consequent.clone());
            accepted.push(f);
        }
        Ok((facts, accepted))
    }

    /// The consistent extension chosen for `id`: resolved facts followed by
    /// the consequents of fired defaults.
    pub fn resolve_closure(&self, id: &str) -> Result<Vec<Literal>> {
        let (facts, fired) = self.closure_with(id, &[])?;
        Ok(facts
            .into_iter()
            .map(|f| f.literal)
            .chain(fired.into_iter().map(|f| f.explanation.consequent))
            .collect())
    }
}
