use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::cost::{CostModel, Geometry};
use super::{Action, InferenceError, Obligation, Result};
use crate::scalar::Scalar;
use crate::term::Term;

/// Basic actions resolving one obligation. `source` is the shelf holding the
/// object, `None` when the robot already carries it.
pub fn template(o: &Obligation, source: Option<&str>) -> Vec<Action> {
    let obj = o.object().to_string();
    let mut out = Vec::new();
    if let Some(s) = source {
        out.push(Action::Move(s.to_string()));
        out.push(Action::Take(obj.clone()));
    }
    match o {
        Obligation::Serve { .. } => out.push(Action::SearchClient),
        Obligation::Place { shelf, .. } => out.push(Action::Move(shelf.clone())),
    }
    out.push(Action::Deliver(obj));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanProblem {
    pub start: String,
    pub right: Option<String>,
    pub left: Option<String>,
    /// Obligations with the shelf their object is taken from.
    pub obligations: Vec<(Obligation, Option<String>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanSettings {
    /// Expanded nodes before giving up.
    pub node_cap: usize,
}

impl Default for PlanSettings {
    fn default() -> PlanSettings {
        PlanSettings { node_cap: 200_000 }
    }
}

impl PlanProblem {
    /// Multiset of basic actions of all obligations.
    pub fn actions(&self) -> Vec<Action> {
        self.obligations.iter().flat_map(|(o, s)| template(o, s.as_deref())).collect()
    }

    fn first_open(&self, remaining: &[usize], object: &str) -> Option<usize> {
        remaining.iter().copied().find(|&i| self.obligations[i].0.object() == object)
    }

    /// Post-processes a plan into dispatcher behaviors.
    pub fn behaviors(&self, plan: &[Action]) -> Vec<Term> {
        let mut remaining: Vec<usize> = (0..self.obligations.len()).collect();
        plan.iter()
            .map(|a| match a {
                Action::Move(s) => Term::compound("move", vec![Term::sym(s.clone())]),
                Action::Take(o) => Term::compound("take", vec![Term::sym(o.clone())]),
                Action::SearchClient => Term::compound("find", vec![Term::sym("user")]),
                Action::SearchObject(o) => Term::compound("find", vec![Term::sym(o.clone())]),
                Action::Deliver(o) => {
                    let target = match self.first_open(&remaining, o) {
                        Some(i) => {
                            remaining.retain(|&j| j != i);
                            match &self.obligations[i].0 {
                                Obligation::Serve { .. } => "user".to_string(),
                                Obligation::Place { shelf, .. } => shelf.clone(),
                            }
                        }
                        None => "user".to_string(),
                    };
                    Term::compound("deliver", vec![Term::sym(o.clone()), Term::sym(target)])
                }
            })
            .collect()
    }
}

/// Robot-side planning state shared by the search and the replay checker.
#[derive(Debug, Clone)]
struct State<'p> {
    problem: &'p PlanProblem,
    at: String,
    right: Option<String>,
    left: Option<String>,
    taken: BTreeSet<String>,
    last: Option<Action>,
    remaining: Vec<usize>,
}

impl<'p> State<'p> {
    fn new(problem: &'p PlanProblem) -> State<'p> {
        State {
            problem,
            at: problem.start.clone(),
            right: problem.right.clone(),
            left: problem.left.clone(),
            taken: problem.right.iter().chain(&problem.left).cloned().collect(),
            last: None,
            remaining: (0..problem.obligations.len()).collect(),
        }
    }

    fn holds(&self, o: &str) -> bool {
        self.right.as_deref() == Some(o) || self.left.as_deref() == Some(o)
    }

    fn hands_full(&self) -> bool {
        self.right.is_some() && self.left.is_some()
    }

    fn target(&self, o: &str, geo: &dyn Geometry) -> Option<String> {
        let i = self.problem.first_open(&self.remaining, o)?;
        Some(match &self.problem.obligations[i].0 {
            Obligation::Serve { .. } => geo.client_at().to_string(),
            Obligation::Place { shelf, .. } => shelf.clone(),
        })
    }

    /// The four preconditions plus location consistency: takes and
    /// deliveries happen where the object is or goes, and a navigation
    /// step must change the robot's place.
    fn allows(&self, a: &Action, geo: &dyn Geometry) -> bool {
        let last = self.last.as_ref();
        match a {
            Action::Move(s) => !last.is_some_and(Action::is_navigation) && *s != self.at,
            Action::SearchClient => !last.is_some_and(Action::is_navigation) && self.at != geo.client_at(),
            Action::SearchObject(_) => {
                !matches!(last, Some(Action::SearchObject(_) | Action::SearchClient)) && !self.hands_full()
            }
            Action::Deliver(o) => {
                self.taken.contains(o) && self.holds(o) && self.target(o, geo).as_deref() == Some(self.at.as_str())
            }
            Action::Take(o) => {
                if self.hands_full() || self.holds(o) {
                    return false;
                }
                let src = self
                    .problem
                    .first_open(&self.remaining, o)
                    .and_then(|i| self.problem.obligations[i].1.as_deref());
                src == Some(self.at.as_str())
            }
        }
    }

    fn apply(&mut self, a: &Action, geo: &dyn Geometry) {
        match a {
            Action::Move(s) => self.at = s.clone(),
            Action::SearchClient => self.at = geo.client_at().to_string(),
            Action::SearchObject(_) => {}
            Action::Take(o) => {
                if self.right.is_none() {
                    self.right = Some(o.clone());
                } else {
                    self.left = Some(o.clone());
                }
                self.taken.insert(o.clone());
            }
            Action::Deliver(o) => {
                if let Some(i) = self.problem.first_open(&self.remaining, o) {
                    self.remaining.retain(|&j| j != i);
                }
                if self.right.as_deref() == Some(o) {
                    self.right = None;
                } else {
                    self.left = None;
                }
            }
        }
        self.last = Some(a.clone());
    }
}

/// Checks a plan against the preconditions at every prefix, the action
/// multiset, and that it resolves every obligation.
pub fn check_plan(problem: &PlanProblem, plan: &[Action], geo: &dyn Geometry) -> std::result::Result<(), String> {
    let mut pool = problem.actions();
    let mut st = State::new(problem);
    for (i, a) in plan.iter().enumerate() {
        let Some(k) = pool.iter().position(|b| b == a) else {
            return Err(format!("step {i}: {a} is not an available basic action"));
        };
        pool.remove(k);
        if !st.allows(a, geo) {
            return Err(format!("step {i}: {a} violates a precondition"));
        }
        st.apply(a, geo);
    }
    if st.remaining.is_empty() {
        Ok(())
    } else {
        Err(format!("{} obligations unresolved", st.remaining.len()))
    }
}

struct Search<'m, 'g, T: Scalar> {
    model: &'m CostModel<T>,
    geo: &'g dyn Geometry,
    cap: usize,
    expanded: usize,
}

impl<T: Scalar> Search<'_, '_, T> {
    fn dfs(&mut self, st: State<'_>, pool: Vec<Action>, path: Vec<Action>, sum: T, prod: T) -> Result<Option<Vec<Action>>> {
        if st.remaining.is_empty() {
            return Ok(Some(path));
        }
        self.expanded += 1;
        if self.expanded > self.cap {
            return Err(InferenceError::NoPlan);
        }
        let score = sum.clone() / prod.clone();
        let mut children = Vec::new();
        for (i, a) in pool.iter().enumerate() {
            if pool[..i].contains(a) || !st.allows(a, self.geo) {
                continue;
            }
            let (c, q) = self.model.step(a, &st.at, self.geo)?;
            let (s2, p2) = (sum.clone() + c, prod.clone() * q);
            let inc = s2.clone() / p2.clone() - score.clone();
            children.push((inc, a.rank(), i, s2, p2));
        }
        children.sort_by(|x, y| {
            x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
        });
        for (_, _, i, s2, p2) in children {
            let mut next = st.clone();
            next.apply(&pool[i], self.geo);
            let mut rest = pool.clone();
            let a = rest.remove(i);
            let mut p = path.clone();
            p.push(a);
            if let Some(found) = self.dfs(next, rest, p, s2, p2)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

/// First solution of a depth-first search over the obligations' basic
/// actions, children ordered by score increment.
pub fn plan<T: Scalar>(
    problem: &PlanProblem,
    model: &CostModel<T>,
    geo: &dyn Geometry,
    settings: PlanSettings,
) -> Result<Vec<Action>> {
    let mut search = Search { model, geo, cap: settings.node_cap, expanded: 0 };
    search
        .dfs(State::new(problem), problem.actions(), Vec::new(), T::zero(), T::one())?
        .ok_or(InferenceError::NoPlan)
}
