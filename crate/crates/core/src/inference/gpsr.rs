use super::{InferenceError, Result};
use crate::term::Term;

fn sym(s: &str) -> Term {
    Term::sym(s)
}

fn call(name: &str, args: Vec<Term>) -> Term {
    Term::compound(name, args)
}

/// Translates a structured command into dispatcher behaviors. A list of
/// commands is translated item by item and concatenated.
pub fn gpsr_interpret(command: &Term) -> Result<Vec<Term>> {
    if let Some(items) = command.as_list() {
        let mut out = Vec::new();
        for c in items {
            out.extend(gpsr_interpret(c)?);
        }
        return Ok(out);
    }
    match (command.name(), command.args()) {
        (Some("bring"), [o]) => Ok(vec![
            sym("acknowledge"),
            call("grasp", vec![o.clone()]),
            call("find", vec![sym("user")]),
            call("deliver", vec![o.clone(), sym("user")]),
        ]),
        (Some("place"), [o, s]) => Ok(vec![
            sym("acknowledge"),
            call("grasp", vec![o.clone()]),
            call("move", vec![s.clone()]),
            call("deliver", vec![o.clone(), s.clone()]),
        ]),
        _ => Err(InferenceError::UnknownCommand(command.clone())),
    }
}

/// `grasp(O)` as primitive behaviors; `shelf` is usually a variable bound
/// by the KB lookup.
pub fn expand_grasp(object: &Term, shelf: &Term) -> Vec<Term> {
    vec![
        call("kb_get_shelf_of_object", vec![object.clone(), shelf.clone()]),
        call("move", vec![shelf.clone()]),
        call("find", vec![object.clone()]),
        call("take", vec![object.clone()]),
    ]
}
