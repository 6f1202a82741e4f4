use std::collections::BTreeMap;

use super::{Action, InferenceError, Result};
use crate::scalar::Scalar;
use crate::term::{parse_term, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Most expensive decision within budget.
    Max,
    Min,
}

/// Distances between named places and where the client stands.
pub trait Geometry {
    fn distance(&self, a: &str, b: &str) -> u32;
    fn client_at(&self) -> &str;
}

impl Geometry for crate::world::WorldState {
    fn distance(&self, a: &str, b: &str) -> u32 {
        crate::world::WorldState::distance(self, a, b)
    }

    fn client_at(&self) -> &str {
        &self.user_at
    }
}

/// Per-kind costs (moves and searches per unit distance) and success
/// probabilities in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<T: Scalar> {
    pub costs: BTreeMap<String, T>,
    pub probs: BTreeMap<String, T>,
    pub r_max: T,
    pub objective: Objective,
}

/// `Σ cost / Π prob`; 0 for no steps.
pub fn aggregate<T: Scalar>(steps: impl IntoIterator<Item = (T, T)>) -> T {
    let (sum, prod) = steps
        .into_iter()
        .fold((T::zero(), T::one()), |(s, p), (c, q)| (s + c, p * q));
    sum / prod
}

fn bad(t: &Term) -> InferenceError {
    InferenceError::CostModel(format!("unexpected entry {t}"))
}

impl<T: Scalar> CostModel<T> {
    pub fn new(r_max: T) -> CostModel<T> {
        CostModel { costs: BTreeMap::new(), probs: BTreeMap::new(), r_max, objective: Objective::Max }
    }

    pub fn with(mut self, kind: &str, cost: T, prob: T) -> CostModel<T> {
        self.costs.insert(kind.to_string(), cost);
        self.probs.insert(kind.to_string(), prob);
        self
    }

    /// `[cost(K, N), prob(K, Num, Den), r_max(N), objective(max|min)]`.
    pub fn load(text: &str) -> Result<CostModel<T>> {
        let t = parse_term(text).map_err(|e| InferenceError::CostModel(e.to_string()))?;
        let items = t.as_list().ok_or_else(|| InferenceError::CostModel("expected a list".into()))?;
        let mut m = CostModel::new(T::zero());
        let mut has_budget = false;
        for it in items {
            let num = |x: &Term| x.as_number().filter(|n| *n >= 0).ok_or_else(|| bad(it));
            match (it.name(), it.args()) {
                (Some("cost"), [k, n]) => {
                    m.costs.insert(k.as_symbol().ok_or_else(|| bad(it))?.to_string(), T::ratio(num(n)?, 1));
                }
                (Some("prob"), [k, a, b]) => {
                    let (a, b) = (num(a)?, num(b)?);
                    if a == 0 || a > b {
                        return Err(InferenceError::CostModel(format!("probability out of (0,1]: {it}")));
                    }
                    m.probs.insert(k.as_symbol().ok_or_else(|| bad(it))?.to_string(), T::ratio(a, b));
                }
                (Some("r_max"), [n]) => {
                    m.r_max = T::ratio(num(n)?, 1);
                    has_budget = true;
                }
                (Some("objective"), [o]) => {
                    m.objective = match o.as_symbol() {
                        Some("max") => Objective::Max,
                        Some("min") => Objective::Min,
                        _ => return Err(bad(it)),
                    }
                }
                _ => return Err(bad(it)),
            }
        }
        if !has_budget {
            return Err(InferenceError::CostModel("missing r_max".into()));
        }
        Ok(m)
    }

    fn lookup(&self, kind: &str) -> Result<(T, T)> {
        let c = self.costs.get(kind).ok_or_else(|| InferenceError::UnknownActionKind(kind.to_string()))?;
        let p = self.probs.get(kind).cloned().unwrap_or_else(T::one);
        Ok((c.clone(), p))
    }

    /// Cost and probability of `a` performed from `at`.
    pub fn step(&self, a: &Action, at: &str, geo: &dyn Geometry) -> Result<(T, T)> {
        let (c, p) = self.lookup(a.kind())?;
        Ok(match a {
            Action::Move(s) => (c * T::from_count(geo.distance(at, s)), p),
            Action::SearchClient => (c * T::from_count(geo.distance(at, geo.client_at())), p),
            _ => (c, p),
        })
    }

    /// Restriction function of a plan executed from `start`.
    pub fn plan_cost(&self, plan: &[Action], start: &str, geo: &dyn Geometry) -> Result<T> {
        let mut at = start.to_string();
        let mut steps = Vec::with_capacity(plan.len());
        for a in plan {
            steps.push(self.step(a, &at, geo)?);
            if let Some(l) = a.destination(geo) {
                at = l;
            }
        }
        Ok(aggregate(steps))
    }
}
