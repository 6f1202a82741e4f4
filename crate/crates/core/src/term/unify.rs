use std::collections::BTreeMap;

use super::Term;

/// Idempotent substitution: no bound variable occurs in any value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    map: BTreeMap<String, Term>,
}

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Variable(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            Term::List(items) => Term::List(items.iter().map(|a| self.apply(a)).collect()),
            _ => t.clone(),
        }
    }

    /// Binds `var` to `value`, keeping the substitution idempotent.
    /// Fails on an occurs-check violation or a conflicting existing binding.
    pub fn bind(&self, var: &str, value: &Term) -> Option<Binding> {
        unify(&Term::var(var), value, self)
    }

    fn extend(&mut self, var: &str, value: Term) {
        let single = Binding {
            map: BTreeMap::from([(var.to_string(), value.clone())]),
        };
        for v in self.map.values_mut() {
            if v.contains_var(var) {
                *v = single.apply(v);
            }
        }
        self.map.insert(var.to_string(), value);
    }
}

/// Most general unifier of `a` and `b` extending `env`, or `None`.
/// The variable `_` matches anything and never binds.
pub fn unify(a: &Term, b: &Term, env: &Binding) -> Option<Binding> {
    let mut out = env.clone();
    if unify_into(a, b, &mut out) {
        Some(out)
    } else {
        None
    }
}

fn unify_into(a: &Term, b: &Term, env: &mut Binding) -> bool {
    let a = env.apply(a);
    let b = env.apply(b);
    match (&a, &b) {
        (Term::Variable(x), _) if x == "_" => true,
        (_, Term::Variable(y)) if y == "_" => true,
        (Term::Variable(x), Term::Variable(y)) if x == y => true,
        (Term::Variable(x), t) | (t, Term::Variable(x)) => {
            if t.contains_var(x) {
                return false;
            }
            env.extend(x, t.clone());
            true
        }
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, env))
        }
        (Term::List(xs), Term::List(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, env))
        }
        _ => a == b,
    }
}
