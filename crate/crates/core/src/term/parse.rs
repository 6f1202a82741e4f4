use std::fmt;

use super::{op_info, Assoc, Mode, Term, OPERATORS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at {}:{}: expected {}, found {}",
            self.line,
            self.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Quoted(String),
    Var(String),
    Int(i64),
    Op(&'static str),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(s) => write!(f, "name `{s}`"),
            Tok::Quoted(s) => write!(f, "quoted '{s}'"),
            Tok::Var(s) => write!(f, "variable `{s}`"),
            Tok::Int(n) => write!(f, "number {n}"),
            Tok::Op(o) => write!(f, "operator `{o}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
    /// Whitespace directly precedes this token.
    spaced: bool,
}

fn err(line: usize, column: usize, expected: &[&str], found: impl Into<String>) -> SyntaxError {
    SyntaxError {
        line,
        column,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            spaced = true;
            continue;
        }
        let (l0, c0) = (line, col);
        let tok = if c.is_ascii_lowercase() || c.is_ascii_uppercase() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_lowercase() {
                Tok::Name(word)
            } else {
                Tok::Var(word)
            }
        } else if c.is_ascii_digit()
            || (c == '-' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit())
        {
            let start = i;
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits
                .parse::<i64>()
                .map_err(|_| err(l0, c0, &["integer"], digits.clone()))?;
            Tok::Int(n)
        } else if c == '\'' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(err(l0, c0, &["closing quote"], "end of input"));
                }
                if chars[i] == '\'' {
                    if i + 1 < chars.len() && chars[i + 1] == '\'' {
                        s.push('\'');
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                s.push(chars[i]);
                bump!();
            }
            Tok::Quoted(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
                for _ in 0..op.len() {
                    bump!();
                }
                Tok::Op(op)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    _ => return Err(err(l0, c0, &["term"], format!("character `{c}`"))),
                };
                bump!();
                t
            }
        };
        out.push(Spanned { tok, line: l0, column: c0, spaced });
        spaced = false;
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col, spaced });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(err(t.line, t.column, &[what], t.tok.to_string()))
        }
    }

    fn expr(&mut self, min_prec: u8, mode: Mode) -> Result<Term, SyntaxError> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op(op) => op,
                _ => break,
            };
            let (prec, assoc) = op_info(op, mode).expect("lexer only emits known operators");
            if prec < min_prec {
                break;
            }
            self.next();
            let rhs_min = match assoc {
                Assoc::Right => prec,
                Assoc::Left => prec + 1,
            };
            let rhs = if op == "==>" && lhs.is_symbol("arcs") {
                self.arcs_value(rhs_min, mode)?
            } else {
                self.expr(rhs_min, mode)?
            };
            lhs = Term::op(op, lhs, rhs);
        }
        Ok(lhs)
    }

    /// The value of `arcs ==> ...`: a list whose elements are read in arc mode.
    fn arcs_value(&mut self, min_prec: u8, mode: Mode) -> Result<Term, SyntaxError> {
        if self.peek().tok != Tok::LBracket {
            return self.expr(min_prec, mode);
        }
        self.next();
        let items = self.sequence(Tok::RBracket, "`]`", Mode::Arc)?;
        Ok(Term::List(items))
    }

    fn sequence(&mut self, close: Tok, what: &str, mode: Mode) -> Result<Vec<Term>, SyntaxError> {
        let mut items = Vec::new();
        if self.peek().tok == close {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.arg(mode)?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                ref tk if *tk == close => break,
                other => return Err(err(t.line, t.column, &["`,`", what], other.to_string())),
            }
        }
        Ok(items)
    }

    /// An argument: a full expression that stops at `,`.
    fn arg(&mut self, mode: Mode) -> Result<Term, SyntaxError> {
        self.expr(0, mode)
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(Term::Number(n)),
            Tok::Var(v) => Ok(Term::Variable(v)),
            Tok::Name(name) | Tok::Quoted(name) => {
                let glued = self.peek().tok == Tok::LParen && !self.peek().spaced;
                if glued {
                    self.next();
                    let args = self.sequence(Tok::RParen, "`)`", Mode::Normal)?;
                    if args.is_empty() {
                        return Err(err(t.line, t.column, &["argument"], "`)`"));
                    }
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Symbol(name))
                }
            }
            Tok::LBracket => Ok(Term::List(self.sequence(Tok::RBracket, "`]`", Mode::Normal)?)),
            Tok::LParen => {
                let inner = self.expr(0, Mode::Normal)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(err(t.line, t.column, &["term"], other.to_string())),
        }
    }
}

/// Parses exactly one term (an optional trailing `.` is accepted).
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let term = p.expr(0, Mode::Normal)?;
    if p.peek().tok == Tok::Dot {
        p.next();
    }
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(err(t.line, t.column, &["operator", "end of input"], t.tok.to_string()));
    }
    Ok(term)
}

/// Parses a sequence of `.`-terminated clauses. The final `.` may be omitted.
pub fn parse_clauses(text: &str) -> Result<Vec<Term>, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut out = Vec::new();
    while p.peek().tok != Tok::Eof {
        out.push(p.expr(0, Mode::Normal)?);
        let t = p.next();
        match t.tok {
            Tok::Dot | Tok::Eof => {}
            other => return Err(err(t.line, t.column, &["`.`", "operator"], other.to_string())),
        }
    }
    Ok(out)
}
