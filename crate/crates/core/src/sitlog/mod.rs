//! Interpreter for dialogue-model programs.
//!
//! A program is a set of `diag_mod(Id, Situations, Locals)` clauses plus an
//! optional `Global_Vars = [...]` declaration. Execution starts at situation
//! `is` of `main` and walks arcs `Expectation:Action => Next`. Recursive
//! situations push an embedded model; its final situation pops back and is
//! matched against the recursive situation's arcs.

mod demo;
mod engine;
mod eval;
mod model;
mod trace;

#[cfg(test)]
mod tests;

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::term::{SyntaxError, Term};

pub use demo::{dummy_functions, EchoingSpeech};
pub use engine::{instantiate_expectations, match_expectation, Engine, Interaction, Perceived, RunOutcome, ScriptedInput};
pub use eval::{eval_expr, Env};
pub use model::{Arc, DialogueModel, Program, Situation};
pub use trace::{format_history, format_trace};

pub type Store = IndexMap<String, Term>;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("invalid program: {0}")]
    Validation(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("type error: {0}")]
    TypeError(String),
    #[error("no expectation of {dm}:{situation} matches {input}")]
    NoMatch { dm: String, situation: Term, input: Term },
    #[error("input script exhausted at {dm}:{situation}")]
    ScriptExhausted { dm: String, situation: Term },
    #[error("dialogue model `{dm}` has no situation {id}")]
    UnknownSituation { dm: String, id: Term },
    #[error("pipe {pipe} does not match in_arg of {dm}:{situation}")]
    PipeMismatch { dm: String, situation: Term, pipe: Term },
    #[error("{0}")]
    Host(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub dm: String,
    pub situation: Term,
    pub expectation: Term,
    pub action: Term,
    pub depth: usize,
}

impl HistoryEntry {
    /// `Expectation:Action`.
    pub fn transition(&self) -> Term {
        Term::op(":", self.expectation.clone(), self.action.clone())
    }
}

/// Last grounded transition of a history.
pub fn last_transition(history: &[HistoryEntry]) -> Option<Term> {
    history.last().map(HistoryEntry::transition)
}

/// What a user function sees: variable stores and the task history.
pub struct FnCtx<'s> {
    pub locals: &'s mut Store,
    pub globals: &'s mut Store,
    pub history: &'s [HistoryEntry],
}

impl FnCtx<'_> {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.locals.get(var).or_else(|| self.globals.get(var))
    }

    pub fn set(&mut self, var: &str, value: Term) {
        assign(self.locals, self.globals, var, value);
    }

    pub fn last_transition(&self) -> Option<Term> {
        last_transition(self.history)
    }
}

/// Locals shadow globals; a fresh name becomes a local.
pub(crate) fn assign(locals: &mut Store, globals: &mut Store, var: &str, value: Term) {
    if let Some(slot) = locals.get_mut(var) {
        *slot = value;
    } else if let Some(slot) = globals.get_mut(var) {
        *slot = value;
    } else {
        locals.insert(var.to_string(), value);
    }
}

pub type UserFn<'a> = Box<dyn FnMut(&[Term], &mut FnCtx<'_>) -> Result<Term> + 'a>;

/// Registry of host functions reachable through `apply`.
#[derive(Default)]
pub struct Functions<'a> {
    table: HashMap<String, UserFn<'a>>,
}

impl<'a> Functions<'a> {
    pub fn new() -> Functions<'a> {
        Functions { table: HashMap::new() }
    }

    pub fn register(&mut self, name: &str, f: impl FnMut(&[Term], &mut FnCtx<'_>) -> Result<Term> + 'a) {
        self.table.insert(name.to_string(), Box::new(f));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.table.contains_key(name)
    }

    pub fn call(&mut self, name: &str, args: &[Term], cx: &mut FnCtx<'_>) -> Result<Term> {
        let f = self
            .table
            .get_mut(name)
            .ok_or_else(|| EngineError::UnknownFunction(name.to_string()))?;
        f(args, cx)
    }

    pub fn extend(&mut self, other: Functions<'a>) {
        self.table.extend(other.table);
    }
}
