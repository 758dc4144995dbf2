//! Parser for rational-function expressions such as `-2*Q*x/(x^2-1)`.

use crate::error::{Error, Result};
use crate::field::{parse_decimal_rat, Field};
use crate::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let mut j = i + 1;
                if j < cs.len() && (cs[j] == '+' || cs[j] == '-') {
                    j += 1;
                }
                if j < cs.len() && cs[j].is_ascii_digit() {
                    i = j;
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Input(format!("unexpected character '{c}' in expression \"{s}\"")));
        }
    }
    Ok(out)
}

struct Parser<'a, F: Field> {
    toks: Vec<Tok>,
    pos: usize,
    var: &'a str,
    consts: &'a [(&'a str, F)],
    src: &'a str,
}

impl<F: Field> Parser<'_, F> {
    fn err(&self, msg: &str) -> Error {
        Error::Input(format!("{msg} in expression \"{}\"", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatFunc<F>> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc<F>> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc = acc / d;
            } else if matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('('))) {
                acc = acc * self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc<F>> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc<F>> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        if e >= 0 {
            Ok(crate::field::Ring::pow(&base, e as u32))
        } else {
            if base.is_zero() {
                return Err(self.err("negative power of zero"));
            }
            Ok(RatFunc::one() / crate::field::Ring::pow(&base, (-e) as u32))
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let v = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                n.parse::<i64>().map_err(|_| self.err("exponent must be an integer"))?
            }
            _ => return Err(self.err("expected an integer exponent")),
        };
        if paren && !self.eat(')') {
            return Err(self.err("missing ')'"));
        }
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<RatFunc<F>> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let r = parse_decimal_rat(&n).ok_or_else(|| self.err(&format!("bad number '{n}'")))?;
                Ok(RatFunc::constant(F::from_rat(&r)))
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                if id == self.var {
                    return Ok(RatFunc::x());
                }
                match self.consts.iter().find(|(n, _)| *n == id) {
                    Some((_, v)) => Ok(RatFunc::constant(v.clone())),
                    None => Err(self.err(&format!("unknown symbol '{id}'"))),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing ')'"));
                }
                Ok(e)
            }
            _ => Err(self.err("unexpected end or operator")),
        }
    }
}

/// Parses a rational function of `var`, with named constants.
pub fn parse_ratfunc<F: Field>(src: &str, var: &str, consts: &[(&str, F)]) -> Result<RatFunc<F>> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Input("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, var, consts, src };
    let r = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(r)
}

/// Parses a scalar expression (no variable).
pub fn parse_scalar<F: Field>(src: &str, consts: &[(&str, F)]) -> Result<F> {
    let r = parse_ratfunc(src, "\u{0}", consts)?;
    r.as_constant().ok_or_else(|| Error::Input(format!("expected a constant, got \"{src}\"")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rat, Ring};
    use crate::poly::Poly;

    #[test]
    fn parses_rational_functions() {
        let q = rat(1, 2);
        let f: RatFunc<Rat> = parse_ratfunc("-2*Q*x/(x^2-1)", "x", &[("Q", q)]).unwrap();
        let expect = RatFunc::new(
            Poly::new(vec![Rat::zero(), -Rat::one()]),
            Poly::new(vec![-Rat::one(), Rat::zero(), Rat::one()]),
        );
        assert_eq!(f, expect);
        let g: RatFunc<Rat> = parse_ratfunc("2x - 3/2 x^-1 + 0.25", "x", &[]).unwrap();
        assert_eq!(g.eval(&Rat::one()).unwrap(), rat(3, 4));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_ratfunc::<Rat>("x +* 2", "x", &[]).is_err());
        assert!(parse_ratfunc::<Rat>("y", "x", &[]).is_err());
        assert!(parse_ratfunc::<Rat>("1/(x-x)", "x", &[]).is_err());
    }
}
