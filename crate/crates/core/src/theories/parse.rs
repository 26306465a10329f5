//! Text syntax for formulas.
//!
//! Atoms: `x<1 y0`, `x<2 y0`, `x=y0`, `x E(m,n) y0` (`<` alone means `<1`,
//! `x` and `y` alone mean `x0` and `y0`). Connectives by increasing binding
//! strength: `<->`, `|`, `&`, `!`. Parentheses group; `true`/`false` are
//! constants.

use super::formula::{Formula, Slot};
use super::{Rel, RelationId};
use crate::error::{DpError, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(Slot),
    Rel(Rel),
    Not,
    And,
    Or,
    Iff,
    LParen,
    RParen,
    Const(bool),
}

fn err(pos: usize, msg: impl Into<String>) -> DpError {
    DpError::Parse {
        pos,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let number = |i: &mut usize| -> Option<usize> {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        src[start..*i].parse().ok()
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                out.push((start, Tok::LParen));
            }
            b')' => {
                i += 1;
                out.push((start, Tok::RParen));
            }
            b'!' => {
                i += 1;
                out.push((start, Tok::Not));
            }
            b'&' => {
                i += 1;
                out.push((start, Tok::And));
            }
            b'|' => {
                i += 1;
                out.push((start, Tok::Or));
            }
            b'=' => {
                i += 1;
                out.push((start, Tok::Rel(Rel::Eq)));
            }
            b'<' => {
                if src[i..].starts_with("<->") {
                    i += 3;
                    out.push((start, Tok::Iff));
                } else if src[i..].starts_with("<1") {
                    i += 2;
                    out.push((start, Tok::Rel(Rel::Lt1)));
                } else if src[i..].starts_with("<2") {
                    i += 2;
                    out.push((start, Tok::Rel(Rel::Lt2)));
                } else {
                    i += 1;
                    out.push((start, Tok::Rel(Rel::Lt1)));
                }
            }
            b'x' | b'y' => {
                i += 1;
                let idx = if i < bytes.len() && bytes[i].is_ascii_digit() {
                    number(&mut i).ok_or_else(|| err(start, "bad variable index"))?
                } else {
                    0
                };
                out.push((start, Tok::Var(if c == b'x' { Slot::X(idx) } else { Slot::Y(idx) })));
            }
            b'E' => {
                i += 1;
                let expect = |ch: u8, i: &mut usize| -> Result<()> {
                    while *i < bytes.len() && bytes[*i] == b' ' {
                        *i += 1;
                    }
                    if *i < bytes.len() && bytes[*i] == ch {
                        *i += 1;
                        Ok(())
                    } else {
                        Err(err(*i, format!("expected '{}'", ch as char)))
                    }
                };
                expect(b'(', &mut i)?;
                let m = number(&mut i).ok_or_else(|| err(i, "expected relation index m"))?;
                expect(b',', &mut i)?;
                while i < bytes.len() && bytes[i] == b' ' {
                    i += 1;
                }
                let n = number(&mut i).ok_or_else(|| err(i, "expected relation level n"))?;
                expect(b')', &mut i)?;
                let r = RelationId::new(m as u32, n as u32).map_err(|e| err(start, e.to_string()))?;
                out.push((start, Tok::Rel(Rel::Equiv(r))));
            }
            _ if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                match &src[start..i] {
                    "true" => out.push((start, Tok::Const(true))),
                    "false" => out.push((start, Tok::Const(false))),
                    w => return Err(err(start, format!("unexpected word {w:?}"))),
                }
            }
            _ => return Err(err(start, format!("unexpected character {:?}", c as char))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.or()?;
        while self.peek() == Some(&Tok::Iff) {
            self.bump();
            let rhs = self.or()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Not) => Ok(self.unary()?.not()),
            Some(Tok::LParen) => {
                let inner = self.iff()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(at, "unclosed parenthesis")),
                }
            }
            Some(Tok::Const(b)) => Ok(Formula::Const(b)),
            Some(Tok::Var(left)) => {
                let rel_at = self.here();
                let rel = match self.bump() {
                    Some(Tok::Rel(r)) => r,
                    _ => return Err(err(rel_at, "expected a relation symbol")),
                };
                let right_at = self.here();
                match self.bump() {
                    Some(Tok::Var(right)) => Ok(Formula::atom(rel, left, right)),
                    _ => Err(err(right_at, "expected a variable")),
                }
            }
            _ => Err(err(at, "expected an atom, '!', '(' or a constant")),
        }
    }
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let f = p.iff()?;
    if p.pos < p.toks.len() {
        return Err(err(p.here(), "trailing input"));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms() {
        assert_eq!(
            parse_formula("x<1 y0").unwrap(),
            Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(0))
        );
        assert_eq!(
            parse_formula("x1 <2 y3").unwrap(),
            Formula::atom(Rel::Lt2, Slot::X(1), Slot::Y(3))
        );
        assert_eq!(
            parse_formula("x=y0").unwrap(),
            Formula::atom(Rel::Eq, Slot::X(0), Slot::Y(0))
        );
        assert_eq!(
            parse_formula("x E(1,3) y0").unwrap(),
            Formula::atom(Rel::Equiv(RelationId { m: 1, n: 3 }), Slot::X(0), Slot::Y(0))
        );
        assert_eq!(
            parse_formula("y < x").unwrap(),
            Formula::atom(Rel::Lt1, Slot::Y(0), Slot::X(0))
        );
    }

    #[test]
    fn precedence_and_round_trip() {
        let f = parse_formula("!x<1 y0 & x<2 y1 | x=y2 <-> y0<1 x").unwrap();
        match &f {
            Formula::Iff(l, _) => assert!(matches!(**l, Formula::Or(_))),
            other => panic!("expected iff at top, got {other:?}"),
        }
        let again = parse_formula(&f.to_string()).unwrap();
        assert_eq!(again, f);
        let g = parse_formula("(y0 <1 x & x <1 y1) | (y2 <2 x & x <2 y3)").unwrap();
        assert_eq!(parse_formula(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(parse_formula("x <1"), Err(DpError::Parse { .. })));
        assert!(matches!(parse_formula("(x=y"), Err(DpError::Parse { .. })));
        assert!(matches!(parse_formula("x E(2,1) y"), Err(DpError::Parse { .. })));
        assert!(matches!(parse_formula("x = y z"), Err(DpError::Parse { .. })));
    }
}
