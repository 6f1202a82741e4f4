use std::cmp::Ordering;

use super::cost::{CostModel, Geometry, Objective};
use super::plan::template;
use super::{InferenceError, Obligation, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Decision<T> {
    /// Indices into the pending list, ascending.
    pub chosen: Vec<usize>,
    pub cost: T,
}

/// Best subset of `{TO} ∪ pending` that contains `TO` and costs at most
/// `r_max`, a subset costing the sum of its members. Ties go to the smaller
/// subset, then to the lexicographically first index list.
pub fn decide<T: Scalar>(to_cost: &T, pending: &[T], r_max: &T, objective: Objective) -> Result<Decision<T>> {
    if to_cost > r_max {
        return Err(InferenceError::BudgetTooSmall { cost: to_cost.to_string(), r_max: r_max.to_string() });
    }
    assert!(pending.len() < 24, "decision enumeration is exponential in the pending list");
    let mut best = Decision { chosen: Vec::new(), cost: to_cost.clone() };
    for mask in 1u32..(1 << pending.len()) {
        let chosen: Vec<usize> = (0..pending.len()).filter(|i| mask & (1 << i) != 0).collect();
        let cost = chosen.iter().fold(to_cost.clone(), |acc, &i| acc + pending[i].clone());
        if cost > *r_max {
            continue;
        }
        let by_cost = match objective {
            Objective::Max => cost.partial_cmp(&best.cost),
            Objective::Min => best.cost.partial_cmp(&cost),
        }
        .unwrap_or(Ordering::Equal);
        let better = match by_cost {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (chosen.len(), &chosen) < (best.chosen.len(), &best.chosen),
        };
        if better {
            best = Decision { chosen, cost };
        }
    }
    Ok(best)
}

/// Costs every obligation by its template from `start` and decides.
/// `source` gives the shelf an object is taken from; `None` means the robot
/// already holds it.
pub fn decide_obligations<T: Scalar>(
    to: &Obligation,
    pending: &[Obligation],
    source: &dyn Fn(&Obligation) -> Option<String>,
    model: &CostModel<T>,
    geo: &dyn Geometry,
    start: &str,
) -> Result<(Vec<Obligation>, T)> {
    let cost = |o: &Obligation| model.plan_cost(&template(o, source(o).as_deref()), start, geo);
    let to_cost = cost(to)?;
    let costs = pending.iter().map(cost).collect::<Result<Vec<T>>>()?;
    let d = decide(&to_cost, &costs, &model.r_max, model.objective)?;
    let mut out = vec![to.clone()];
    out.extend(d.chosen.iter().map(|&i| pending[i].clone()));
    Ok((out, d.cost))
}
