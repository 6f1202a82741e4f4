use super::{HistoryEntry, RunOutcome, Store};
use crate::term::{write_compact, writeq_compact, Term};

const WIDTH: usize = 40;
const CONT: usize = 6;
const STEP: usize = 8;

fn action_text(t: &Term) -> String {
    match t.as_op(":") {
        Some(_) => format!("({})", write_compact(t)),
        None => write_compact(t),
    }
}

/// Splits `(A:B)` actions after each `:` while the rest does not fit.
fn push_action(lines: &mut Vec<String>, act: &Term, tail: &str) {
    let text = format!("{}{tail}", action_text(act));
    match act.as_op(":") {
        Some((a, b)) if CONT + text.len() > WIDTH => {
            lines.push(format!("({}:", write_compact(a)));
            push_action(lines, b, &format!("){tail}"));
        }
        _ => lines.push(text),
    }
}

fn entry_lines(e: &HistoryEntry) -> Vec<String> {
    let head = format!("{}: ({},{}:", e.dm, writeq_compact(&e.situation), writeq_compact(&e.expectation));
    let act = format!("{})", action_text(&e.action));
    if head.len() + act.len() <= WIDTH {
        return vec![head + &act];
    }
    let mut lines = vec![head];
    push_action(&mut lines, &e.action, ")");
    lines
}

/// Renders a task history, one block per embedded-model invocation.
pub fn format_history(history: &[HistoryEntry]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut prev = 0;
    for (i, e) in history.iter().enumerate() {
        let d = e.depth;
        let pad = STEP * d;
        for (j, line) in entry_lines(e).into_iter().enumerate() {
            let text = if j == 0 {
                if d > prev {
                    format!("{}[{line}", " ".repeat(pad - 1))
                } else {
                    format!("{}{line}", " ".repeat(pad))
                }
            } else {
                format!("{}{line}", " ".repeat(pad + CONT))
            };
            out.push(text);
        }
        let next = history.get(i + 1).map_or(0, |n| n.depth);
        if next < d {
            out.last_mut().expect("entry pushed").push_str(&"]".repeat(d - next));
        }
        prev = d;
    }
    let mut s = out.join("\n");
    if !s.is_empty() {
        s.push('\n');
    }
    s
}

fn format_globals(globals: &Store) -> String {
    let indent = " ".repeat("Out Global Vars: [".len());
    let items: Vec<String> = globals.iter().map(|(k, v)| format!("{k}==>{}", write_compact(v))).collect();
    format!("Out Global Vars: [{}]", items.join(&format!(",\n{indent}")))
}

/// History, a blank line, the output pipe and the final global variables.
pub fn format_trace(outcome: &RunOutcome) -> String {
    format!(
        "{}\nOut Arg: {}\n{}\n",
        format_history(&outcome.history),
        write_compact(&outcome.out_arg),
        format_globals(&outcome.globals)
    )
}
