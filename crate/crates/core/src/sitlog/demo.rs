//! Host side of the two-model demo program: user functions and a speech
//! interpreter that can answer with its own last utterance.

use std::collections::VecDeque;

use super::engine::{match_expectation, Interaction, Perceived};
use super::{EngineError, FnCtx, Functions, Result};
use crate::term::Term;

fn arity(name: &str, args: &[Term], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(EngineError::TypeError(format!("{name} expects {n} arguments, got {}", args.len())))
    }
}

/// `f/1`, `g/1`, `h/2` and the conditional `when/3`.
pub fn dummy_functions<'a>() -> Functions<'a> {
    let mut fs = Functions::new();
    fs.register("f", |args: &[Term], cx: &mut FnCtx<'_>| {
        arity("f", args, 1)?;
        let same = cx.get("day") == Some(&args[0]);
        Ok(Term::sym(if same { "ok" } else { "not ok" }))
    });
    fs.register("g", |_: &[Term], cx: &mut FnCtx<'_>| Ok(cx.last_transition().unwrap_or_else(|| Term::sym("empty"))));
    fs.register("h", |args: &[Term], _: &mut FnCtx<'_>| {
        arity("h", args, 2)?;
        Ok(Term::sym(if args[0] == args[1] { "is" } else { "rs" }))
    });
    fs.register("when", |args: &[Term], _: &mut FnCtx<'_>| {
        arity("when", args, 3)?;
        let holds = match args[0].as_op("==") {
            Some((a, b)) => a == b,
            None => args[0].is_symbol("true"),
        };
        Ok(args[if holds { 1 } else { 2 }].clone())
    });
    fs
}

/// Scripted speech where an utterance `p(V)` is followed by an implicit
/// utterance of `V`, which selects an expectation list headed by `V`.
#[derive(Debug, Clone, Default)]
pub struct EchoingSpeech {
    pub inputs: VecDeque<Term>,
    echo: Option<Term>,
}

impl EchoingSpeech {
    pub fn new(inputs: impl IntoIterator<Item = Term>) -> EchoingSpeech {
        EchoingSpeech { inputs: inputs.into_iter().collect(), echo: None }
    }
}

impl Interaction for EchoingSpeech {
    fn perceive(&mut self, _kind: &str, expectations: &[Term]) -> Result<Perceived> {
        if let Some(v) = self.echo.take() {
            let hit = expectations
                .iter()
                .position(|e| e.as_list().and_then(<[Term]>::first) == Some(&v));
            if let Some(k) = hit {
                return Ok(Perceived::Arc(k, expectations[k].clone()));
            }
        }
        let Some(input) = self.inputs.pop_front() else {
            return Ok(Perceived::Exhausted);
        };
        Ok(match match_expectation(expectations, &input) {
            Some((k, _)) => {
                if let [v] = input.args() {
                    self.echo = Some(v.clone());
                }
                Perceived::Arc(k, input)
            }
            None => Perceived::NoMatch(input),
        })
    }
}
