//! Deliberative inference: command interpretation, diagnosis, decision
//! under a budget and DFS planning over basic actions.

mod cost;
mod decide;
mod diagnose;
mod dispatch;
mod gpsr;
mod plan;


use std::fmt;

use serde::Serialize;

use crate::term::Term;

pub use cost::{aggregate, CostModel, Geometry, Objective};
pub use decide::{decide, decide_obligations, Decision};
pub use diagnose::{diagnose, Diagnosis};
pub use dispatch::{gpsr_dispatch, inference_cycle};
pub(crate) use dispatch::register_functions;
pub use gpsr::{expand_grasp, gpsr_interpret};
pub use plan::{check_plan, plan, template, PlanProblem, PlanSettings};

/// Cost model over floating point, used for scenario runs.
pub type FloatCostModel = CostModel<f64>;
/// Cost model over exact rationals.
pub type ExactCostModel = CostModel<num_rational::Ratio<i64>>;

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error("unknown command {0}")]
    UnknownCommand(Term),
    #[error("cost model: {0}")]
    CostModel(String),
    #[error("no cost for action kind `{0}`")]
    UnknownActionKind(String),
    #[error("budget {r_max} is below the cost {cost} of the triggering obligation")]
    BudgetTooSmall { cost: String, r_max: String },
    #[error("every shelf has been inspected")]
    NoUnseenShelves,
    #[error("no plan satisfies the preconditions")]
    NoPlan,
    #[error("no source shelf for `{0}`")]
    NoSource(String),
    #[error(transparent)]
    Kb(#[from] crate::kb::KbError),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}

pub type Result<T> = std::result::Result<T, InferenceError>;

/// Basic actions of the planner, in tie-break order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Move(String),
    Take(String),
    SearchClient,
    SearchObject(String),
    Deliver(String),
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Move(_) => "move",
            Action::Take(_) => "take",
            Action::SearchClient | Action::SearchObject(_) => "search",
            Action::Deliver(_) => "deliver",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Action::Move(_) => 0,
            Action::Take(_) => 1,
            Action::SearchClient => 2,
            Action::SearchObject(_) => 3,
            Action::Deliver(_) => 4,
        }
    }

    pub fn is_navigation(&self) -> bool {
        matches!(self, Action::Move(_) | Action::SearchClient)
    }

    /// Where the robot stands afterwards, if the action moves it.
    pub fn destination(&self, geo: &dyn Geometry) -> Option<String> {
        match self {
            Action::Move(s) => Some(s.clone()),
            Action::SearchClient => Some(geo.client_at().to_string()),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Move(s) => write!(f, "move({s})"),
            Action::Take(o) => write!(f, "take({o})"),
            Action::SearchClient => f.write_str("search(client)"),
            Action::SearchObject(o) => write!(f, "search({o})"),
            Action::Deliver(o) => write!(f, "deliver({o})"),
        }
    }
}

/// What an obligation asks for. The client template is labelled `CO` and the
/// shelf template `TO`, following the planner's templates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "goal", rename_all = "lowercase")]
pub enum Obligation {
    /// Hand the object to the client.
    Serve { object: String },
    /// Put the object on its shelf.
    Place { object: String, shelf: String },
}

impl Obligation {
    pub fn serve(o: &str) -> Obligation {
        Obligation::Serve { object: o.to_string() }
    }

    pub fn place(o: &str, s: &str) -> Obligation {
        Obligation::Place { object: o.to_string(), shelf: s.to_string() }
    }

    pub fn object(&self) -> &str {
        match self {
            Obligation::Serve { object } | Obligation::Place { object, .. } => object,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Obligation::Serve { .. } => "CO",
            Obligation::Place { .. } => "TO",
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Obligation::Serve { object } => Term::compound("serve", vec![Term::sym(object.clone())]),
            Obligation::Place { object, shelf } => {
                Term::compound("place", vec![Term::sym(object.clone()), Term::sym(shelf.clone())])
            }
        }
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}
