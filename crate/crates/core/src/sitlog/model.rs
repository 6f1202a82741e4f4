use indexmap::IndexMap;

use super::{EngineError, Result};
use crate::term::{parse_clauses, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub expectation: Term,
    pub action: Term,
    /// Concrete situation id or an `apply(...)` expression.
    pub next: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Situation {
    pub id: Term,
    pub kind: String,
    pub in_arg: Option<Term>,
    pub out_arg: Option<Term>,
    pub prog: Vec<Term>,
    pub arcs: Vec<Arc>,
    pub embedded_dm: Option<Term>,
}

impl Situation {
    pub fn is_final(&self) -> bool {
        self.kind == "final"
    }

    pub fn is_recursive(&self) -> bool {
        self.kind == "recursive"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueModel {
    pub id: String,
    /// Formal arguments from `diag_mod(id(Args...), ...)`.
    pub params: Vec<Term>,
    pub situations: Vec<Situation>,
    pub locals: Vec<(String, Term)>,
}

impl DialogueModel {
    /// First situation whose id unifies with `id`.
    pub fn situation(&self, id: &Term) -> Option<&Situation> {
        self.situations
            .iter()
            .find(|s| crate::term::unify(&s.id, id, &Default::default()).is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub models: IndexMap<String, DialogueModel>,
    pub globals: Vec<(String, Term)>,
}

fn invalid(msg: impl Into<String>) -> EngineError {
    EngineError::Validation(msg.into())
}

/// `[name ==> value, ...]`.
fn read_vars(t: &Term, what: &str) -> Result<Vec<(String, Term)>> {
    let items = t.as_list().ok_or_else(|| invalid(format!("{what}: expected a list, found {t}")))?;
    items
        .iter()
        .map(|item| match item.as_op("==>") {
            Some((Term::Symbol(n), v)) => Ok((n.clone(), v.clone())),
            _ => Err(invalid(format!("{what}: expected name ==> value, found {item}"))),
        })
        .collect()
}

fn read_arc(t: &Term) -> Result<Arc> {
    let (label, next) = t.as_op("=>").ok_or_else(|| invalid(format!("arc without `=>`: {t}")))?;
    let (expectation, action) =
        label.as_op(":").ok_or_else(|| invalid(format!("arc label without `:`: {label}")))?;
    Ok(Arc { expectation: expectation.clone(), action: action.clone(), next: next.clone() })
}

fn read_situation(t: &Term) -> Result<Situation> {
    let attrs = t.as_list().ok_or_else(|| invalid(format!("situation must be a list: {t}")))?;
    let mut id = None;
    let mut kind = None;
    let mut sit = Situation {
        id: Term::sym("is"),
        kind: String::new(),
        in_arg: None,
        out_arg: None,
        prog: Vec::new(),
        arcs: Vec::new(),
        embedded_dm: None,
    };
    let mut has_arcs = false;
    for a in attrs {
        let (name, value) = match a.as_op("==>") {
            Some((Term::Symbol(n), v)) => (n.as_str(), v),
            _ => return Err(invalid(format!("situation attribute must be name ==> value: {a}"))),
        };
        match name {
            "id" => id = Some(value.clone()),
            "type" => {
                kind = Some(
                    value
                        .as_symbol()
                        .ok_or_else(|| invalid(format!("type must be a symbol: {value}")))?
                        .to_string(),
                )
            }
            "in_arg" => sit.in_arg = Some(value.clone()),
            "out_arg" => sit.out_arg = Some(value.clone()),
            "prog" => {
                sit.prog = value
                    .as_list()
                    .ok_or_else(|| invalid(format!("prog must be a list: {value}")))?
                    .to_vec()
            }
            "arcs" => {
                has_arcs = true;
                let arcs = value.as_list().ok_or_else(|| invalid(format!("arcs must be a list: {value}")))?;
                sit.arcs = arcs.iter().map(read_arc).collect::<Result<_>>()?;
            }
            "embedded_dm" => sit.embedded_dm = Some(value.clone()),
            other => return Err(invalid(format!("unknown situation attribute `{other}`"))),
        }
    }
    sit.id = id.ok_or_else(|| invalid(format!("situation without id: {t}")))?;
    sit.kind = kind.ok_or_else(|| invalid(format!("situation {} without type", sit.id)))?;
    if sit.is_final() && !sit.arcs.is_empty() {
        return Err(invalid(format!("final situation {} has arcs", sit.id)));
    }
    if !sit.is_final() && !has_arcs {
        return Err(invalid(format!("situation {} has no arcs", sit.id)));
    }
    if sit.is_recursive() && sit.embedded_dm.is_none() {
        return Err(invalid(format!("recursive situation {} has no embedded_dm", sit.id)));
    }
    Ok(sit)
}

fn read_model(args: &[Term]) -> Result<DialogueModel> {
    let [head, sits, locals] = args else {
        return Err(invalid("diag_mod expects three arguments"));
    };
    let (id, params) = match head {
        Term::Symbol(s) => (s.clone(), Vec::new()),
        Term::Compound(f, a) => (f.clone(), a.clone()),
        other => return Err(invalid(format!("bad dialogue-model id {other}"))),
    };
    let sits = sits.as_list().ok_or_else(|| invalid(format!("{id}: situations must be a list")))?;
    Ok(DialogueModel {
        situations: sits.iter().map(read_situation).collect::<Result<_>>()?,
        locals: read_vars(locals, &format!("{id} locals"))?,
        id,
        params,
    })
}

impl Program {
    pub fn load(text: &str) -> Result<Program> {
        Program::from_terms(&parse_clauses(text)?)
    }

    pub fn from_terms(clauses: &[Term]) -> Result<Program> {
        let mut prog = Program::default();
        for c in clauses {
            if let Some((Term::Variable(_), vars)) = c.as_op("=") {
                prog.globals.extend(read_vars(vars, "global variables")?);
                continue;
            }
            match c {
                Term::Compound(f, args) if f == "diag_mod" => {
                    let m = read_model(args)?;
                    if prog.models.contains_key(&m.id) {
                        return Err(invalid(format!("duplicate dialogue model `{}`", m.id)));
                    }
                    prog.models.insert(m.id.clone(), m);
                }
                other => return Err(invalid(format!("expected diag_mod/3 or Global_Vars, found {other}"))),
            }
        }
        prog.validate()?;
        Ok(prog)
    }

    /// Merges the models and globals of `other`; later definitions must not
    /// reuse a model id.
    pub fn merge(&mut self, other: Program) -> Result<()> {
        for (id, m) in other.models {
            if self.models.contains_key(&id) {
                return Err(invalid(format!("duplicate dialogue model `{id}`")));
            }
            self.models.insert(id, m);
        }
        self.globals.extend(other.globals);
        self.validate_models()
    }

    fn validate(&self) -> Result<()> {
        if !self.models.contains_key("main") {
            return Err(invalid("program has no `main` dialogue model"));
        }
        self.validate_models()
    }

    fn validate_models(&self) -> Result<()> {
        for m in self.models.values() {
            let initial = m.situations.iter().filter(|s| s.id.name() == Some("is")).count();
            if initial != 1 {
                return Err(invalid(format!("`{}` must have exactly one `is` situation, has {initial}", m.id)));
            }
            if !m.situations.iter().any(Situation::is_final) {
                return Err(invalid(format!("`{}` has no final situation", m.id)));
            }
            for s in m.situations.iter().filter(|s| s.is_recursive()) {
                let dm = s.embedded_dm.as_ref().and_then(Term::name).unwrap_or("");
                if !self.models.contains_key(dm) {
                    return Err(invalid(format!(
                        "`{}` situation {} embeds unknown dialogue model `{dm}`",
                        m.id, s.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn model(&self, id: &str) -> Option<&DialogueModel> {
        self.models.get(id)
    }
}
