//! Expression grammar for elements of the function field:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' exponent)?
//! exponent := '-'? integer | '(' '-'? integer ')'
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Identifiers are the variable labels of the ring (`t1..tn` by default).

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::{QFunc, QPoly};

pub fn default_labels(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("t{i}")).collect()
}

/// Parses with the default labels `t1..tn`.
pub fn parse_ratfunc(src: &str, nvars: usize) -> Result<QFunc> {
    parse_with_labels(src, &default_labels(nvars))
}

pub fn parse_poly(src: &str, nvars: usize) -> Result<QPoly> {
    let f = parse_ratfunc(src, nvars)?;
    if !f.is_polynomial() {
        return Err(Error::parse(0, format!("`{src}` is not a polynomial")));
    }
    Ok(f.num().clone())
}

pub fn parse_with_labels(src: &str, labels: &[String]) -> Result<QFunc> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        labels,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::parse(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    labels: &'a [String],
}

impl Parser<'_> {
    fn nvars(&self) -> usize {
        self.labels.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<QFunc> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<QFunc> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let rhs = self.unary()?;
                acc = acc
                    .checked_div(&rhs)
                    .map_err(|_| Error::parse(at, "division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<QFunc> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<QFunc> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let e = if self.eat(b'(') {
            let e = self.signed_int()?;
            if !self.eat(b')') {
                return Err(Error::parse(self.pos, "expected `)`"));
            }
            e
        } else {
            self.signed_int()?
        };
        let e: i32 = e
            .try_into()
            .map_err(|_| Error::parse(at, "exponent out of range"))?;
        base.pow(e)
            .map_err(|_| Error::parse(at, "negative power of zero"))
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        let neg = self.eat(b'-');
        let v = self.integer()?;
        Ok(if neg { -v } else { v })
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digit string parses"))
    }

    fn atom(&mut self) -> Result<QFunc> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(Error::parse(self.pos, "expected `)`"));
                }
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(QFunc::constant(
                    self.nvars(),
                    BigRational::from_integer(v),
                ))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match self.labels.iter().position(|l| l == name) {
                    Some(i) => Ok(QFunc::var(self.nvars(), i)),
                    None => Err(Error::parse(start, format!("unknown variable `{name}`"))),
                }
            }
            Some(_) => Err(Error::parse(self.pos, "unexpected character")),
            None => Err(Error::parse(self.pos, "unexpected end of input")),
        }
    }
}
