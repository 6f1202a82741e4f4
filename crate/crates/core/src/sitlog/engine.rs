use std::collections::VecDeque;

use super::eval::{eval, Env};
use super::model::{DialogueModel, Program, Situation};
use super::{EngineError, Functions, HistoryEntry, Result, Store};
use crate::term::{unify, Binding, Term};

/// Outcome of one perception: the selected arc and the input that matched it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Perceived {
    Arc(usize, Term),
    NoMatch(Term),
    Exhausted,
}

/// Input providers and action renderers for user-defined situation types.
pub trait Interaction {
    fn perceive(&mut self, kind: &str, expectations: &[Term]) -> Result<Perceived>;

    fn perform(&mut self, _action: &Term) -> Result<()> {
        Ok(())
    }
}

/// First expectation (textual order) that unifies with `input`. A
/// single-element list expectation `[E]` also accepts the bare input `E`.
/// `empty` expectations never match an input.
pub fn match_expectation(expectations: &[Term], input: &Term) -> Option<(usize, Binding)> {
    expectations.iter().enumerate().find_map(|(i, e)| {
        expectation_binding(e, input, &Binding::new()).map(|b| (i, b))
    })
}

fn expectation_binding(e: &Term, input: &Term, env: &Binding) -> Option<Binding> {
    if e.is_symbol("empty") {
        return None;
    }
    unify(e, input, env).or_else(|| match e {
        Term::List(one) if one.len() == 1 => unify(&one[0], input, env),
        _ => None,
    })
}

/// Replays a fixed list of inputs, first match wins.
#[derive(Debug, Clone, Default)]
pub struct ScriptedInput {
    pub inputs: VecDeque<Term>,
    pub consumed: Vec<Term>,
    pub performed: Vec<Term>,
}

impl ScriptedInput {
    pub fn new(inputs: impl IntoIterator<Item = Term>) -> ScriptedInput {
        ScriptedInput { inputs: inputs.into_iter().collect(), ..Default::default() }
    }
}

impl Interaction for ScriptedInput {
    fn perceive(&mut self, _kind: &str, expectations: &[Term]) -> Result<Perceived> {
        let Some(input) = self.inputs.pop_front() else {
            return Ok(Perceived::Exhausted);
        };
        self.consumed.push(input.clone());
        Ok(match match_expectation(expectations, &input) {
            Some((i, _)) => Perceived::Arc(i, input),
            None => Perceived::NoMatch(input),
        })
    }

    fn perform(&mut self, action: &Term) -> Result<()> {
        self.performed.push(action.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub out_arg: Term,
    pub globals: Store,
    pub history: Vec<HistoryEntry>,
    /// Programs that relied on writes made by expectations of arcs that were
    /// not selected.
    pub warnings: Vec<String>,
}

struct Frame {
    model: String,
    locals: Store,
    base: Binding,
    current: Term,
    pipe: Term,
    depth: usize,
}

/// Per-arc instantiated expectation with the state its evaluation produced.
struct ArcEval {
    expectation: Term,
    binding: Binding,
    locals: Store,
    globals: Store,
}

/// Expectations of every arc, each evaluated on its own copy of the stores.
pub fn instantiate_expectations(sit: &Situation, b: &Binding, env: &mut Env<'_, '_>) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for arc in &sit.arcs {
        let mut locals = env.locals.clone();
        let mut globals = env.globals.clone();
        let mut scratch = Env { locals: &mut locals, globals: &mut globals, history: env.history, functions: env.functions };
        let mut bb = b.clone();
        out.push(eval(&arc.expectation, &mut bb, &mut scratch)?);
    }
    Ok(out)
}

pub struct Engine<'p, 'a> {
    program: &'p Program,
    pub functions: Functions<'a>,
    globals: Store,
    history: Vec<HistoryEntry>,
    warnings: Vec<String>,
    pub max_steps: usize,
}

impl<'p, 'a> Engine<'p, 'a> {
    pub fn new(program: &'p Program) -> Engine<'p, 'a> {
        Engine {
            program,
            functions: Functions::new(),
            globals: program.globals.iter().cloned().collect(),
            history: Vec::new(),
            warnings: Vec::new(),
            max_steps: 100_000,
        }
    }

    pub fn with_functions(program: &'p Program, functions: Functions<'a>) -> Engine<'p, 'a> {
        let mut e = Engine::new(program);
        e.functions = functions;
        e
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn globals(&self) -> &Store {
        &self.globals
    }

    pub fn run(&mut self, pipe: Term, io: &mut dyn Interaction) -> Result<RunOutcome> {
        self.run_model("main", pipe, io)
    }

    /// Runs `model` until it reaches a final situation at depth 0.
    pub fn run_model(&mut self, model: &str, pipe: Term, io: &mut dyn Interaction) -> Result<RunOutcome> {
        self.history.clear();
        self.warnings.clear();
        let call = Term::sym(model);
        let mut frames = vec![self.enter(&call, pipe, 0, &Binding::new())?];
        let mut returning: Option<(Term, Term)> = None;
        for _ in 0..self.max_steps {
            let program = self.program;
            let frame = frames.last_mut().expect("frame stack is never empty while running");
            let dm = &program.models[&frame.model];
            let sit = dm.situation(&frame.current).ok_or_else(|| EngineError::UnknownSituation {
                dm: dm.id.clone(),
                id: frame.current.clone(),
            })?;
            let s = self.situation_binding(frame, dm, sit)?;

            if let Some((final_id, out)) = returning.take() {
                let evals = self.eval_expectations(frame, sit, &s)?;
                let Some(k) = evals.iter().position(|a| expectation_binding(&a.expectation, &final_id, &a.binding).is_some()) else {
                    return Err(EngineError::NoMatch { dm: dm.id.clone(), situation: sit.id.clone(), input: final_id });
                };
                frame.pipe = out;
                self.take_arc(frame, sit, evals, k, &final_id, io, false)?;
                continue;
            }

            self.run_prog(frame, sit, &s)?;

            if sit.is_final() {
                let out = self.out_value(frame, sit, &s)?;
                // the requested id is at least as instantiated as the pattern
                let id = frame.current.clone();
                self.history.push(HistoryEntry {
                    dm: dm.id.clone(),
                    situation: id.clone(),
                    expectation: Term::sym("empty"),
                    action: Term::sym("empty"),
                    depth: frame.depth,
                });
                if frame.depth == 0 {
                    return Ok(RunOutcome {
                        out_arg: out,
                        globals: self.globals.clone(),
                        history: self.history.clone(),
                        warnings: self.warnings.clone(),
                    });
                }
                frames.pop();
                returning = Some((id, out));
                continue;
            }

            if sit.is_recursive() {
                let out = self.out_value(frame, sit, &s)?;
                let mut bb = s.clone();
                let call = {
                    let mut env = Env {
                        locals: &mut frame.locals,
                        globals: &mut self.globals,
                        history: &self.history,
                        functions: &mut self.functions,
                    };
                    eval(sit.embedded_dm.as_ref().expect("validated"), &mut bb, &mut env)?
                };
                let depth = frame.depth + 1;
                let callee = self.enter(&call, out, depth, &bb)?;
                frames.push(callee);
                continue;
            }

            let evals = self.eval_expectations(frame, sit, &s)?;
            let all_empty = evals.iter().all(|a| a.expectation.is_symbol("empty"));
            if all_empty {
                self.take_arc(frame, sit, evals, 0, &Term::sym("empty"), io, true)?;
                continue;
            }
            let exps: Vec<Term> = evals.iter().map(|a| a.expectation.clone()).collect();
            match io.perceive(&sit.kind, &exps)? {
                Perceived::Arc(k, input) if k < evals.len() => {
                    if expectation_binding(&evals[k].expectation, &input, &evals[k].binding).is_none() {
                        return Err(EngineError::NoMatch { dm: dm.id.clone(), situation: sit.id.clone(), input });
                    }
                    self.take_arc(frame, sit, evals, k, &input, io, true)?;
                }
                Perceived::Arc(_, input) | Perceived::NoMatch(input) => {
                    match evals.iter().position(|a| a.expectation.is_symbol("empty")) {
                        Some(k) => self.take_arc(frame, sit, evals, k, &Term::sym("empty"), io, true)?,
                        None => {
                            return Err(EngineError::NoMatch { dm: dm.id.clone(), situation: sit.id.clone(), input })
                        }
                    }
                }
                Perceived::Exhausted => {
                    return Err(EngineError::ScriptExhausted { dm: dm.id.clone(), situation: sit.id.clone() })
                }
            }
        }
        Err(EngineError::Host(format!("step limit of {} exceeded", self.max_steps)))
    }

    fn enter(&self, call: &Term, pipe: Term, depth: usize, _caller: &Binding) -> Result<Frame> {
        let name = call.name().unwrap_or("");
        let dm = self
            .program
            .model(name)
            .ok_or_else(|| EngineError::Validation(format!("unknown dialogue model `{name}`")))?;
        let base = if dm.params.is_empty() {
            Binding::new()
        } else {
            unify(&Term::List(dm.params.clone()), &Term::List(call.args().to_vec()), &Binding::new())
                .ok_or_else(|| EngineError::TypeError(format!("cannot call {} with {call}", dm.id)))?
        };
        Ok(Frame {
            model: dm.id.clone(),
            locals: dm.locals.iter().cloned().collect(),
            base,
            current: Term::sym("is"),
            pipe,
            depth,
        })
    }

    fn situation_binding(&self, frame: &Frame, dm: &DialogueModel, sit: &Situation) -> Result<Binding> {
        let mut s = unify(&sit.id, &frame.current, &frame.base).unwrap_or_else(|| frame.base.clone());
        if let Some(pattern) = &sit.in_arg {
            s = unify(pattern, &frame.pipe, &s).ok_or_else(|| EngineError::PipeMismatch {
                dm: dm.id.clone(),
                situation: sit.id.clone(),
                pipe: frame.pipe.clone(),
            })?;
        }
        Ok(s)
    }

    /// `prog` runs on a copy of the situation binding; only store writes persist.
    fn run_prog(&mut self, frame: &mut Frame, sit: &Situation, s: &Binding) -> Result<()> {
        let mut bb = s.clone();
        let mut env = Env {
            locals: &mut frame.locals,
            globals: &mut self.globals,
            history: &self.history,
            functions: &mut self.functions,
        };
        for e in &sit.prog {
            eval(e, &mut bb, &mut env)?;
        }
        Ok(())
    }

    /// Evaluated `out_arg`, or the incoming pipe when absent or unbound.
    fn out_value(&mut self, frame: &mut Frame, sit: &Situation, s: &Binding) -> Result<Term> {
        let Some(out) = &sit.out_arg else {
            return Ok(frame.pipe.clone());
        };
        let mut bb = s.clone();
        let mut env = Env {
            locals: &mut frame.locals,
            globals: &mut self.globals,
            history: &self.history,
            functions: &mut self.functions,
        };
        let v = eval(out, &mut bb, &mut env)?;
        Ok(if matches!(v, Term::Variable(_)) { frame.pipe.clone() } else { v })
    }

    fn eval_expectations(&mut self, frame: &mut Frame, sit: &Situation, s: &Binding) -> Result<Vec<ArcEval>> {
        let mut out = Vec::with_capacity(sit.arcs.len());
        for arc in &sit.arcs {
            let mut locals = frame.locals.clone();
            let mut globals = self.globals.clone();
            let mut bb = s.clone();
            let expectation = {
                let mut env = Env {
                    locals: &mut locals,
                    globals: &mut globals,
                    history: &self.history,
                    functions: &mut self.functions,
                };
                eval(&arc.expectation, &mut bb, &mut env)?
            };
            out.push(ArcEval { expectation, binding: bb, locals, globals });
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn take_arc(
        &mut self,
        frame: &mut Frame,
        sit: &Situation,
        mut evals: Vec<ArcEval>,
        k: usize,
        input: &Term,
        io: &mut dyn Interaction,
        apply_out_arg: bool,
    ) -> Result<()> {
        let others_wrote = evals
            .iter()
            .enumerate()
            .any(|(i, a)| i != k && (a.locals != frame.locals || a.globals != self.globals));
        if others_wrote {
            self.warnings.push(format!(
                "{}:{} expectation of a non-selected arc wrote variables; writes discarded",
                frame.model, sit.id
            ));
        }
        let chosen = evals.swap_remove(k);
        frame.locals = chosen.locals;
        self.globals = chosen.globals;
        let mut s = if input.is_symbol("empty") {
            chosen.binding
        } else {
            expectation_binding(&chosen.expectation, input, &chosen.binding)
                .expect("arc was selected by a matching input")
        };
        let arc = &sit.arcs[k];
        let expectation = s.apply(&chosen.expectation);

        let action = {
            let mut env = Env {
                locals: &mut frame.locals,
                globals: &mut self.globals,
                history: &self.history,
                functions: &mut self.functions,
            };
            let v = eval(&arc.action, &mut s, &mut env)?;
            match (&arc.action, v) {
                (Term::List(src), Term::List(mut vals))
                    if src.len() == 1 && src[0].name() == Some("apply") && src[0].args().len() == 2 =>
                {
                    vals.pop().expect("one element")
                }
                (_, v) => v,
            }
        };
        match &action {
            Term::Symbol(e) if e == "empty" => {}
            Term::List(items) => {
                for a in items {
                    io.perform(a)?;
                }
            }
            a => io.perform(a)?,
        }
        self.history.push(HistoryEntry {
            dm: frame.model.clone(),
            situation: s.apply(&sit.id),
            expectation,
            action,
            depth: frame.depth,
        });

        let next = {
            let mut env = Env {
                locals: &mut frame.locals,
                globals: &mut self.globals,
                history: &self.history,
                functions: &mut self.functions,
            };
            eval(&arc.next, &mut s, &mut env)?
        };
        if apply_out_arg {
            frame.pipe = self.out_value(frame, sit, &s)?;
        }
        frame.current = next;
        Ok(())
    }
}
