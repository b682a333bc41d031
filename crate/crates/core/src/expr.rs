//! Closed-form expressions in one complex variable `z`.
//!
//! Grammar: `+ - * /`, `^` with an integer exponent, parentheses, the
//! variable `z`, real literals (`0.05`, `1e-3`) and imaginary literals
//! (`2i`, `i`). An expression can be evaluated pointwise, expanded as a
//! truncated Taylor series around a point, or reduced to a Laurent
//! polynomial when every division is by a single monomial.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Var,
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token::Op(ch));
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            'z' => {
                out.push(Token::Var);
                i += 1;
            }
            'i' => {
                out.push(Token::Imag(1.0));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, only when followed by digits
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
                if i < chars.len() && chars[i] == 'i' {
                    out.push(Token::Imag(v));
                    i += 1;
                } else {
                    out.push(Token::Num(v));
                }
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}' at position {i}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Expr::Add(lhs.into(), rhs.into()) } else { Expr::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Expr::Mul(lhs.into(), rhs.into()) } else { Expr::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(self.unary()?.into()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let negative = match self.peek() {
                Some(Token::Op('-')) => {
                    self.pos += 1;
                    true
                }
                Some(Token::Op('+')) => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let n = match self.next() {
                Some(Token::Num(v)) if v.fract() == 0.0 && v.abs() <= 64.0 => v as i32,
                _ => return Err(Error::Parse("exponents must be integers of modulus at most 64".into())),
            };
            return Ok(Expr::Pow(base.into(), if negative { -n } else { n }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Some(Token::Imag(v)) => Ok(Expr::Const(Complex64::new(0.0, v))),
            Some(Token::Var) => Ok(Expr::Var),
            Some(Token::Open) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(e),
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let mut p = Parser { tokens: tokenize(src)?, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input after token {}", p.pos)));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Expr::Const(c) if c.re == 0.0 => write!(f, "{}i", c.im),
            Expr::Const(c) => write!(f, "({}+{}i)", c.re, c.im),
            Expr::Var => write!(f, "z"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        src.parse()
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => {
                let d = b.eval(z)?;
                if d.norm() == 0.0 {
                    return Err(Error::Evaluation { z, reason: "division by zero".into() });
                }
                a.eval(z)? / d
            }
            Expr::Pow(a, n) => {
                let b = a.eval(z)?;
                if *n < 0 && b.norm() == 0.0 {
                    return Err(Error::Evaluation { z, reason: "negative power of zero".into() });
                }
                b.powi(*n)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { z, reason: "non-finite value".into() })
        }
    }

    /// Taylor expansion through `order` around `z0`.
    pub fn series(&self, z0: Complex64, order: usize) -> Result<TruncatedSeries> {
        let pole = |_| Error::Evaluation { z: z0, reason: "pole of the expression".into() };
        Ok(match self {
            Expr::Const(c) => TruncatedSeries::constant(order, *c),
            Expr::Var => TruncatedSeries::variable(order, z0),
            Expr::Neg(a) => -&a.series(z0, order)?,
            Expr::Add(a, b) => &a.series(z0, order)? + &b.series(z0, order)?,
            Expr::Sub(a, b) => &a.series(z0, order)? - &b.series(z0, order)?,
            Expr::Mul(a, b) => &a.series(z0, order)? * &b.series(z0, order)?,
            Expr::Div(a, b) => a.series(z0, order)?.div(&b.series(z0, order)?).map_err(pole)?,
            Expr::Pow(a, n) => a.series(z0, order)?.powi(*n).map_err(pole)?,
        })
    }

    /// `[f, f', f'', f''']` at `z`.
    pub fn jet(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let s = self.series(z, 3)?;
        let out = [s.coeff(0), s.coeff(1), 2.0 * s.coeff(2), 6.0 * s.coeff(3)];
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Evaluation { z, reason: "non-finite derivative".into() })
        }
    }

    pub fn to_laurent(&self) -> Result<Laurent> {
        Ok(match self {
            Expr::Const(c) => Laurent::constant(*c),
            Expr::Var => Laurent::monomial(Complex64::new(1.0, 0.0), 1),
            Expr::Neg(a) => -&a.to_laurent()?,
            Expr::Add(a, b) => &a.to_laurent()? + &b.to_laurent()?,
            Expr::Sub(a, b) => &a.to_laurent()? - &b.to_laurent()?,
            Expr::Mul(a, b) => &a.to_laurent()? * &b.to_laurent()?,
            Expr::Div(a, b) => a.to_laurent()?.checked_div(&b.to_laurent()?)?,
            Expr::Pow(a, n) => a.to_laurent()?.powi(*n)?,
        })
    }
}
