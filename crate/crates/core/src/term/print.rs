use super::{is_plain_name, op_info, Assoc, Mode, Term};

#[derive(Clone, Copy)]
struct Style {
    quoted: bool,
    spaced: bool,
}

/// Canonical text: quoted symbols, spaced operators (except `:`).
/// `parse_term(&print_term(t)) == t` for every term.
pub fn print_term(t: &Term) -> String {
    render(t, Style { quoted: true, spaced: true })
}

/// Quoted, unspaced rendering (Prolog `writeq` texture).
pub fn writeq_compact(t: &Term) -> String {
    render(t, Style { quoted: true, spaced: false })
}

/// Unquoted, unspaced rendering (Prolog `write` texture). Not parse-stable.
pub fn write_compact(t: &Term) -> String {
    render(t, Style { quoted: false, spaced: false })
}

fn render(t: &Term, style: Style) -> String {
    let mut out = String::new();
    write_term(t, Mode::Normal, 0, &mut out, style);
    out
}

pub(crate) fn quote_symbol(s: &str) -> String {
    if is_plain_name(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "''"))
    }
}

fn symbol(s: &str, out: &mut String, style: Style) {
    if style.quoted {
        out.push_str(&quote_symbol(s));
    } else {
        out.push_str(s);
    }
}

fn infix(t: &Term, mode: Mode) -> Option<(&str, u8, Assoc, &Term, &Term)> {
    match t {
        Term::Compound(f, args) if args.len() == 2 => {
            let (p, a) = op_info(f, mode)?;
            Some((f.as_str(), p, a, &args[0], &args[1]))
        }
        _ => None,
    }
}

/// `min` is the lowest operator precedence allowed without parentheses.
fn write_term(t: &Term, mode: Mode, min: u8, out: &mut String, style: Style) {
    if let Some((op, prec, assoc, lhs, rhs)) = infix(t, mode) {
        if prec < min {
            out.push('(');
            write_term(t, Mode::Normal, 0, out, style);
            out.push(')');
            return;
        }
        let (lmin, rmin) = match assoc {
            Assoc::Right => (prec + 1, prec),
            Assoc::Left => (prec, prec + 1),
        };
        write_term(lhs, mode, lmin, out, style);
        if style.spaced && op != ":" {
            out.push(' ');
            out.push_str(op);
            out.push(' ');
        } else {
            out.push_str(op);
        }
        if op == "==>" && lhs.is_symbol("arcs") {
            if let Term::List(items) = rhs {
                write_seq(items, Mode::Arc, '[', ']', out, style);
                return;
            }
        }
        write_term(rhs, mode, rmin, out, style);
        return;
    }
    match t {
        Term::Symbol(s) => symbol(s, out, style),
        Term::Number(n) => out.push_str(&n.to_string()),
        Term::Variable(v) => out.push_str(v),
        Term::Compound(f, args) => {
            symbol(f, out, style);
            write_seq(args, Mode::Normal, '(', ')', out, style);
        }
        Term::List(items) => write_seq(items, Mode::Normal, '[', ']', out, style),
    }
}

fn write_seq(items: &[Term], mode: Mode, open: char, close: char, out: &mut String, style: Style) {
    out.push(open);
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
            if style.spaced && open == '[' {
                out.push(' ');
            }
        }
        write_term(item, mode, 0, out, style);
    }
    out.push(close);
}
