//! Text syntax for formulae.
//!
//! ```text
//! state  := or
//! or     := and ('|' and)*
//! and    := until ('&' until)*
//! until  := unary (('U' | 'U<=' n) until)?
//! unary  := '!' unary | 'X' unary | primary
//! primary:= '(' or ')' | 'true' | 'false' | atom | 'P' cmp q '[' or ']'
//! ```

use crate::error::{Error, Result};
use crate::logic::ast::{Cmp, PathFormula, StateFormula};
use crate::model::rational::{in_unit_interval, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Cmp(Cmp),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Not,
    And,
    Or,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                if eq {
                    i += 1;
                }
                Tok::Cmp(match (c, eq) {
                    ('<', false) => Cmp::Lt,
                    ('<', true) => Cmp::Le,
                    ('>', true) => Cmp::Ge,
                    _ => Cmp::Gt,
                })
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '.' || chars[i + 1] == '/') {
                    i += 1;
                }
                Tok::Num(chars[start..=i].iter().collect())
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_' || chars[i + 1] == '@') {
                    i += 1;
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            other => {
                return Err(Error::FormulaSyntax { position: i, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// Untyped syntax tree; typed once the context (state or path) is known.
#[derive(Clone, Debug)]
enum Expr {
    True,
    False,
    Atom(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Next(Box<Expr>),
    Until(Box<Expr>, Box<Expr>, Option<usize>),
    Prob(Cmp, Rational, Box<Expr>),
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

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::FormulaSyntax { position: self.here(), message: message.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Expr::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Expr::And(Box::new(lhs), Box::new(self.until()?));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Expr> {
        let lhs = self.unary()?;
        if !self.is_kw("U") {
            return Ok(lhs);
        }
        self.pos += 1;
        let bound = if self.peek() == Some(&Tok::Cmp(Cmp::Le)) {
            self.pos += 1;
            match self.bump() {
                Some(Tok::Num(n)) => match n.parse::<usize>() {
                    Ok(n) => Some(n),
                    Err(_) => {
                        self.pos -= 1;
                        return self.err("until bound must be a natural number");
                    }
                },
                _ => {
                    self.pos -= 1;
                    return self.err("expected until bound");
                }
            }
        } else {
            None
        };
        let rhs = self.until()?;
        Ok(Expr::Until(Box::new(lhs), Box::new(rhs), bound))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.is_kw("X") {
            self.pos += 1;
            return Ok(Expr::Next(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.bump() {
            Some(Tok::LParen) => {
                let e = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "true" => Ok(Expr::True),
                "false" => Ok(Expr::False),
                "P" => {
                    let cmp = match self.bump() {
                        Some(Tok::Cmp(c)) => c,
                        _ => {
                            self.pos -= 1;
                            return self.err("expected comparison after `P`");
                        }
                    };
                    let q_at = self.here();
                    let q = match self.bump() {
                        Some(Tok::Num(n)) => parse_rational(&n).ok_or(Error::FormulaSyntax {
                            position: q_at,
                            message: format!("malformed probability `{n}`"),
                        })?,
                        _ => {
                            self.pos -= 1;
                            return self.err("expected probability threshold");
                        }
                    };
                    if !in_unit_interval(&q) {
                        return Err(Error::Threshold(q.to_string()));
                    }
                    self.expect(Tok::LBrack, "`[`")?;
                    let path = self.or()?;
                    self.expect(Tok::RBrack, "`]`")?;
                    Ok(Expr::Prob(cmp, q, Box::new(path)))
                }
                "X" | "U" => Err(Error::FormulaSyntax { position: at, message: format!("unexpected `{name}`") }),
                _ => Ok(Expr::Atom(name)),
            },
            Some(t) => Err(Error::FormulaSyntax { position: at, message: format!("unexpected token {t:?}") }),
            None => Err(Error::FormulaSyntax { position: at, message: "unexpected end of input".into() }),
        }
    }
}

fn to_state(e: Expr, at: usize) -> Result<StateFormula> {
    Ok(match e {
        Expr::True => StateFormula::True,
        Expr::False => StateFormula::False,
        Expr::Atom(a) => StateFormula::Atom(a),
        Expr::Not(x) => StateFormula::Not(Box::new(to_state(*x, at)?)),
        Expr::And(a, b) => StateFormula::And(Box::new(to_state(*a, at)?), Box::new(to_state(*b, at)?)),
        Expr::Or(a, b) => StateFormula::Or(Box::new(to_state(*a, at)?), Box::new(to_state(*b, at)?)),
        Expr::Prob(cmp, q, p) => StateFormula::Prob { cmp, q, path: Box::new(to_path(*p, at)?) },
        Expr::Next(_) | Expr::Until(..) => {
            return Err(Error::FormulaSyntax {
                position: at,
                message: "path operator outside `P[...]`".into(),
            })
        }
    })
}

fn is_state(e: &Expr) -> bool {
    match e {
        Expr::True | Expr::False | Expr::Atom(_) | Expr::Prob(..) => true,
        Expr::Not(x) => is_state(x),
        Expr::And(a, b) | Expr::Or(a, b) => is_state(a) && is_state(b),
        Expr::Next(_) | Expr::Until(..) => false,
    }
}

fn to_path(e: Expr, at: usize) -> Result<PathFormula> {
    if is_state(&e) {
        return Ok(PathFormula::state(to_state(e, at)?));
    }
    Ok(match e {
        Expr::Not(x) => PathFormula::Not(Box::new(to_path(*x, at)?)),
        Expr::And(a, b) => PathFormula::And(Box::new(to_path(*a, at)?), Box::new(to_path(*b, at)?)),
        Expr::Or(a, b) => PathFormula::Or(Box::new(to_path(*a, at)?), Box::new(to_path(*b, at)?)),
        Expr::Next(x) => PathFormula::Next(Box::new(to_path(*x, at)?)),
        Expr::Until(a, b, None) => PathFormula::Until(Box::new(to_path(*a, at)?), Box::new(to_path(*b, at)?)),
        Expr::Until(a, b, Some(n)) => PathFormula::BoundedUntil(Box::new(to_path(*a, at)?), Box::new(to_path(*b, at)?), n),
        _ => unreachable!("state expressions handled above"),
    })
}

fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() };
    let e = p.or()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses a state formula such as `P<=0.34 [ (a|b) U<=2 c ]`.
pub fn parse_formula(text: &str) -> Result<StateFormula> {
    to_state(parse_expr(text)?, 0)
}

/// Parses a bare path formula such as `X a & X X b`.
pub fn parse_path(text: &str) -> Result<PathFormula> {
    to_path(parse_expr(text)?, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::ratio;

    fn st(n: &str) -> PathFormula {
        PathFormula::state(StateFormula::atom(n))
    }

    #[test]
    fn bounded_until_threshold() {
        let f = parse_formula("P<=0.34 [ (a|b) U<=2 c ]").unwrap();
        let expected = StateFormula::prob(
            Cmp::Le,
            ratio(17, 50),
            PathFormula::bounded_until(PathFormula::state(StateFormula::atom("a").or(StateFormula::atom("b"))), st("c"), 2),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn next_conjunction() {
        let f = parse_formula("P<=0.38 [ X (l1|l3) & X X (l1|l3) ]").unwrap();
        let alpha = PathFormula::state(StateFormula::atom("l1").or(StateFormula::atom("l3")));
        let expected = StateFormula::prob(
            Cmp::Le,
            ratio(19, 50),
            PathFormula::And(Box::new(PathFormula::next(alpha.clone())), Box::new(PathFormula::next(PathFormula::next(alpha)))),
        );
        assert_eq!(f, expected);
        let g = parse_formula("P>=0.5 [ X (l1|l2) ]").unwrap();
        assert!(matches!(g, StateFormula::Prob { cmp: Cmp::Ge, .. }));
    }

    #[test]
    fn precedence_and_display_round_trip() {
        let f = parse_formula("!a & b | c").unwrap();
        assert_eq!(f.to_string(), "((!a & b) | c)");
        for text in [
            "P>=1/2 [ (a | b) U c | (a | d) U e ]",
            "P<0.1 [ !(a U<=3 X b) ]",
            "P>0 [ X P>=1 [ a U b ] ]",
            "true & !false",
            "P>=0.2 [ X a@1 ]",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_formula("a & "), Err(Error::FormulaSyntax { position: 4, .. })));
        assert!(matches!(parse_formula("P>=1.5 [ X a ]"), Err(Error::Threshold(_))));
        assert!(matches!(parse_formula("X a"), Err(Error::FormulaSyntax { .. })));
        assert!(matches!(parse_formula("P>= [ a ]"), Err(Error::FormulaSyntax { position: 4, .. })));
        assert!(matches!(parse_formula("a $ b"), Err(Error::FormulaSyntax { position: 2, .. })));
        assert!(matches!(parse_formula("P>=1 [ a U<=x b ]"), Err(Error::FormulaSyntax { .. })));
    }
}
