use super::{assign, EngineError, FnCtx, Functions, HistoryEntry, Result, Store};
use crate::term::{unify, Binding, Term};

/// Evaluation environment of one dialogue-model frame.
pub struct Env<'s, 'a> {
    pub locals: &'s mut Store,
    pub globals: &'s mut Store,
    pub history: &'s [HistoryEntry],
    pub functions: &'s mut Functions<'a>,
}

impl Env<'_, '_> {
    fn read(&self, var: &str) -> Result<Term> {
        self.locals
            .get(var)
            .or_else(|| self.globals.get(var))
            .cloned()
            .ok_or_else(|| EngineError::UnknownVariable(var.to_string()))
    }
}

fn var_name(t: &Term) -> Result<&str> {
    t.as_symbol()
        .ok_or_else(|| EngineError::TypeError(format!("variable name must be a symbol, found {t}")))
}

fn bind(env: &Binding, pattern: &Term, value: &Term) -> Result<Binding> {
    unify(pattern, value, env)
        .ok_or_else(|| EngineError::TypeError(format!("cannot unify {pattern} with {value}")))
}

/// Evaluates `e` under `b`. Built-ins: `get/2`, `set/2`, `inc/2`, `apply/2`;
/// other compounds and lists evaluate their arguments.
pub fn eval_expr(e: &Term, b: &Binding, env: &mut Env<'_, '_>) -> Result<(Term, Binding)> {
    let mut b = b.clone();
    let v = eval(e, &mut b, env)?;
    Ok((v, b))
}

pub(crate) fn eval(e: &Term, b: &mut Binding, env: &mut Env<'_, '_>) -> Result<Term> {
    match e {
        Term::Variable(_) => Ok(b.apply(e)),
        Term::Symbol(_) | Term::Number(_) => Ok(e.clone()),
        Term::List(items) => Ok(Term::List(
            items.iter().map(|x| eval(x, b, env)).collect::<Result<_>>()?,
        )),
        Term::Compound(f, args) => match (f.as_str(), args.as_slice()) {
            ("get", [var, out]) => {
                let v = env.read(var_name(var)?)?;
                *b = bind(b, out, &v)?;
                Ok(v)
            }
            ("set", [var, value]) => {
                let v = eval(value, b, env)?;
                assign(env.locals, env.globals, var_name(var)?, v.clone());
                Ok(v)
            }
            ("inc", [var, out]) => {
                let name = var_name(var)?;
                let n = env.read(name)?.as_number().ok_or_else(|| {
                    EngineError::TypeError(format!("inc on non-integer variable `{name}`"))
                })?;
                let v = Term::Number(n + 1);
                assign(env.locals, env.globals, name, v.clone());
                *b = bind(b, out, &v)?;
                Ok(v)
            }
            ("apply", [call, vals]) => {
                let vals = eval(vals, b, env)?;
                let (name, formals) = match call {
                    Term::Symbol(s) => (s.as_str(), &[][..]),
                    Term::Compound(g, a) => (g.as_str(), a.as_slice()),
                    other => return Err(EngineError::TypeError(format!("cannot apply {other}"))),
                };
                let vals = vals.as_list().map(<[Term]>::to_vec).unwrap_or_else(|| vec![vals]);
                if !formals.is_empty() {
                    if vals.len() != formals.len() {
                        return Err(EngineError::TypeError(format!(
                            "{name}/{} applied to {} values",
                            formals.len(),
                            vals.len()
                        )));
                    }
                    *b = bind(b, &Term::List(formals.to_vec()), &Term::List(vals.clone()))?;
                }
                let actual: Vec<Term> = if formals.is_empty() {
                    vals
                } else {
                    formals.iter().map(|a| b.apply(a)).collect()
                };
                let mut cx = FnCtx { locals: env.locals, globals: env.globals, history: env.history };
                env.functions.call(name, &actual, &mut cx)
            }
            _ => Ok(Term::Compound(
                f.clone(),
                args.iter().map(|x| eval(x, b, env)).collect::<Result<_>>()?,
            )),
        },
    }
}
