use super::{Dialect, Formula, Kind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("`{symbol}` is not available in the {dialect} dialect")]
    Dialect { symbol: &'static str, dialect: &'static str },
}

const KEYWORDS: &[&str] = &[
    "true", "false", "dia", "box", "I", "X0", "X1", "EU", "EG", "AR", "AF",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Tilde,
    Bar,
    Amp,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '~' => Tok::Tilde,
            '|' => Tok::Bar,
            '&' => Tok::Amp,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    dialect: Dialect,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FormulaError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn gate(&self, symbol: &'static str, needed: Dialect) -> Result<(), FormulaError> {
        if self.dialect.allows(needed) {
            Ok(())
        } else {
            Err(FormulaError::Dialect {
                symbol,
                dialect: self.dialect.name(),
            })
        }
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn args(&mut self, min: usize, max: usize) -> Result<Vec<Formula>, FormulaError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.disjunction()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.disjunction()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if out.len() < min || out.len() > max {
            return self.err(format!("expected {min} to {max} arguments, found {}", out.len()));
        }
        Ok(out)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Tilde => Ok(Formula::neg(self.unary()?)),
            Tok::LParen => {
                let f = self.disjunction()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(Formula::top()),
                "false" => Ok(Formula::bot()),
                "I" => {
                    self.gate("I", Dialect::Rooted)?;
                    Ok(Formula::root())
                }
                "dia" => Ok(Formula::dia(self.unary()?)),
                "box" => Ok(Formula::boxf(self.unary()?)),
                "X0" | "X1" => {
                    self.gate(if name == "X0" { "X0" } else { "X1" }, Dialect::Binary)?;
                    Ok(Formula::x(name == "X1", self.unary()?))
                }
                "EU" | "AF" => {
                    let mut a = self.args(2, 3)?;
                    let c = if a.len() == 3 { a.pop().unwrap() } else { Formula::top() };
                    let b = a.pop().unwrap();
                    let a = a.pop().unwrap();
                    Ok(if name == "EU" {
                        Formula::eu3(a, b, c)
                    } else {
                        Formula::af3(a, b, c)
                    })
                }
                "EG" | "AR" => {
                    let mut a = self.args(2, 2)?;
                    let b = a.pop().unwrap();
                    let a = a.pop().unwrap();
                    Ok(if name == "EG" { Formula::eg(a, b) } else { Formula::ar(a, b) })
                }
                _ => Ok(Formula::var(&name)),
            },
            Tok::End => Err(FormulaError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(FormulaError::Syntax {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Whether `name` can be used as a proposition in concrete syntax.
pub fn is_proposition_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&name)
}

/// Parses a formula, rejecting symbols outside `dialect`.
pub fn parse_formula(text: &str, dialect: Dialect) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        dialect,
    };
    let f = p.disjunction()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(f)
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

pub(super) fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_prec(f, 0, &mut out);
    out
}

fn write_args(name: &str, args: &[&Formula], out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_prec(a, 0, out);
    }
    out.push(')');
}

fn write_prec(f: &Formula, ctx: u8, out: &mut String) {
    let paren = |own: u8| ctx > own;
    match f.kind() {
        Kind::Bot => out.push_str("false"),
        Kind::Top => out.push_str("true"),
        Kind::Root => out.push('I'),
        Kind::Var(n) => out.push_str(n),
        Kind::Neg(a) => {
            out.push('~');
            write_prec(a, PREC_UNARY, out);
        }
        Kind::Dia(a) | Kind::Box(a) | Kind::X(_, a) => {
            out.push_str(match f.kind() {
                Kind::Dia(_) => "dia ",
                Kind::Box(_) => "box ",
                Kind::X(false, _) => "X0 ",
                _ => "X1 ",
            });
            write_prec(a, PREC_UNARY, out);
        }
        Kind::Or(a, b) | Kind::And(a, b) => {
            let (own, sym) = if matches!(f.kind(), Kind::Or(..)) {
                (PREC_OR, " | ")
            } else {
                (PREC_AND, " & ")
            };
            if paren(own) {
                out.push('(');
            }
            write_prec(a, own, out);
            out.push_str(sym);
            write_prec(b, own + 1, out);
            if paren(own) {
                out.push(')');
            }
        }
        Kind::EU(a, b, c) | Kind::AF(a, b, c) => {
            let name = if matches!(f.kind(), Kind::EU(..)) { "EU" } else { "AF" };
            if c.is_top() {
                write_args(name, &[a, b], out)
            } else {
                write_args(name, &[a, b, c], out)
            }
        }
        Kind::EG(a, b) => write_args("EG", &[a, b], out),
        Kind::AR(a, b) => write_args("AR", &[a, b], out),
    }
}
