//! Polynomial field expressions in `x`, `y`, `z`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*      division only by constants
//! unary := '-' unary | power
//! power := atom ('^' integer)?
//! atom  := number | x | y | z | '(' expr ')'
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("field expression, column {pos}: {msg}")]
pub struct FieldError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn eval(&self, x: &[f64; 3]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, n) => {
                let base = a.eval(x);
                (0..*n).fold(1.0, |acc, _| acc * base)
            }
        }
    }

    fn degree(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Div(a, _) => a.degree(),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.degree().max(b.degree()),
            Expr::Mul(a, b) => a.degree() + b.degree(),
            Expr::Pow(a, n) => a.degree() * *n as usize,
        }
    }
}

/// A parsed field expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    source: String,
    expr: Expr,
}

impl Field {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.expr.eval(&x)
    }

    /// Total polynomial degree.
    pub fn degree(&self) -> usize {
        self.expr.degree()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FromStr for Field {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let expr = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Field {
            source: s.trim().to_owned(),
            expr,
        })
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> FieldError {
        FieldError {
            pos: self.pos + 1,
            msg: msg.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let at = self.pos;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                if rhs.degree() != 0 {
                    self.pos = at;
                    return Err(self.err("can only divide by a constant"));
                }
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FieldError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, FieldError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let n = digits.parse().map_err(|_| {
            self.pos = start;
            self.err("exponent must be a non-negative integer")
        })?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn atom(&mut self) -> Result<Expr, FieldError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Expr::Var(0))
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Expr::Var(1))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Expr::Var(2))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                text.parse().map(Expr::Num).map_err(|_| {
                    self.pos = start;
                    self.err("bad number")
                })
            }
            Some(_) => Err(self.err("expected a number, a variable or '('")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Field {
        s.parse().unwrap()
    }

    #[test]
    fn evaluates() {
        assert_eq!(f("x^4 - 3*x^2*y + y^4").eval([2.0, 1.0, 0.0]), 16.0 - 12.0 + 1.0);
        assert_eq!(f("x + 2*y + 3*z").eval([1.0, 1.0, 1.0]), 6.0);
        assert_eq!(f("-(x - 1)/2").eval([3.0, 0.0, 0.0]), -1.0);
        assert_eq!(f("1/3").eval([0.0; 3]), 1.0 / 3.0);
    }

    #[test]
    fn degrees() {
        assert_eq!(f("x^4 - 3*x^2*y + y^4").degree(), 4);
        assert_eq!(f("(x + y)^2 * z").degree(), 3);
        assert_eq!(f("7").degree(), 0);
    }

    #[test]
    fn rejects() {
        assert!("x / y".parse::<Field>().is_err());
        assert!("x ^ 1.5".parse::<Field>().is_err());
        assert!("(x + 1".parse::<Field>().is_err());
        assert!("sin(x)".parse::<Field>().is_err());
        assert!("x y".parse::<Field>().is_err());
    }
}
