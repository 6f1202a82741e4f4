//! Symbolic terms shared by knowledge-base files, dialogue-model programs,
//! scenario files and the run record.
//!
//! The notation is a small Prolog-like subset: lowercase names and quoted
//! strings are symbols, uppercase names (and `_`) are variables, integers,
//! compounds `f(a, b)`, lists `[a, b]`, and six infix operators:
//!
//! | operator | role                                        |
//! |----------|---------------------------------------------|
//! | `=`      | clause-level binding (`Global_Vars = [...]`)|
//! | `==>`    | attribute / value                           |
//! | `:`      | expectation / action                        |
//! | `=>>`    | conditional default (antecedent, consequent)|
//! | `=>`     | pair arrow, or arc arrow inside `arcs`      |
//! | `->`     | implication                                 |
//! | `==`     | structural equality test                    |

mod parse;
mod print;
mod unify;

use std::fmt;

pub use parse::{parse_clauses, parse_term, SyntaxError};
pub use print::{print_term, write_compact, writeq_compact};
pub use unify::{unify, Binding};

/// Universal symbolic value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Symbol(String),
    Number(i64),
    Variable(String),
    /// Functor and at least one argument.
    Compound(String, Vec<Term>),
    List(Vec<Term>),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    /// Builds a compound; zero arguments collapse to a symbol.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            Term::Symbol(functor)
        } else {
            Term::Compound(functor, args)
        }
    }

    pub fn op(functor: &str, lhs: Term, rhs: Term) -> Term {
        Term::Compound(functor.to_string(), vec![lhs, rhs])
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::List(items)
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<i64> {
        match self {
            Term::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Term]> {
        match self {
            Term::List(items) => Some(items),
            _ => None,
        }
    }

    /// Name of a symbol or the functor of a compound.
    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) => Some(s),
            Term::Compound(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Matches a binary operator application and returns its operands.
    pub fn as_op(&self, functor: &str) -> Option<(&Term, &Term)> {
        match self {
            Term::Compound(f, args) if f == functor && args.len() == 2 => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        matches!(self, Term::Symbol(s) if s == name)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Compound(_, args) | Term::List(args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Variable(v) => v == name,
            Term::Compound(_, args) | Term::List(args) => args.iter().any(|a| a.contains_var(name)),
            _ => false,
        }
    }

    /// Collects variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        fn walk(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Variable(v) if v != "_" => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Term::Compound(_, args) | Term::List(args) => args.iter().for_each(|a| walk(a, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

/// Serialized as its printed form.
impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Term {
        Term::sym(s)
    }
}

impl From<i64> for Term {
    fn from(n: i64) -> Term {
        Term::Number(n)
    }
}

/// Operator table. Higher precedence binds tighter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Left,
    Right,
}

/// Inside the value of an `arcs ==> [...]` attribute the outermost `=>` is
/// the arc arrow and binds loosest; everywhere else it is the pair arrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Normal,
    Arc,
}

pub(crate) const OPERATORS: [&str; 7] = ["==>", "=>>", "=>", "==", "->", "=", ":"];

pub(crate) fn op_info(op: &str, mode: Mode) -> Option<(u8, Assoc)> {
    Some(match op {
        "=" => (1, Assoc::Left),
        "=>" if mode == Mode::Arc => (5, Assoc::Right),
        "==>" => (10, Assoc::Right),
        ":" => (20, Assoc::Right),
        "=>>" => (30, Assoc::Right),
        "=>" => (40, Assoc::Right),
        "->" => (50, Assoc::Right),
        "==" => (60, Assoc::Left),
        _ => return None,
    })
}

pub(crate) fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
