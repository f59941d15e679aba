//! Element expressions over the generators `U1 … Un`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := postfix ('^' ['-'] integer)?
//! postfix := primary '\''*
//! primary := number | 'i' | 'U' integer | '(' expr ')' | 'exp' '(' expr ')'
//! ```

use std::fmt;
use std::sync::Arc;

use nctorus::gns::{element_exp, Truncation};
use nctorus::{Element, Theta, C64};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at position {pos}")]
    Char { ch: char, pos: usize },
    #[error("expected {expected} at position {pos}, found {found}")]
    Expected { expected: String, found: String, pos: usize },
    #[error("invalid number '{text}' at position {pos}")]
    Number { text: String, pos: usize },
    #[error("unknown identifier '{name}' at position {pos}")]
    Ident { name: String, pos: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("generator U{index} out of range for dimension {n}")]
    Dimension { index: usize, n: usize },
    #[error("negative power of a non-unitary expression")]
    NegativePower,
    #[error("exp() needs a truncation")]
    NoTruncation,
    #[error(transparent)]
    Library(#[from] nctorus::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Nonnegative real literal.
    Num(f64),
    /// Imaginary unit.
    Imag,
    /// `U_j`, one-based.
    Gen(usize),
    Adj(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Exp(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|x| x.1.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_ascii_digit() || chars[j].1 == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j].1 == 'e' || chars[j].1 == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k].1 == '+' || chars[k].1 == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].1.is_ascii_digit() {
                    while k < chars.len() && chars[k].1.is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let end = chars.get(j).map_or(src.len(), |x| x.0);
            let text = &src[pos..end];
            let v: f64 = text.parse().map_err(|_| ParseError::Number { text: text.into(), pos })?;
            out.push((Tok::Num(v), pos));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            let end = chars.get(j).map_or(src.len(), |x| x.0);
            out.push((Tok::Ident(src[pos..end].to_string()), pos));
            i = j;
        } else if "+-*^()'[],|;".contains(c) {
            out.push((Tok::Sym(c), pos));
            i += 1;
        } else {
            return Err(ParseError::Char { ch: c, pos });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Recursive-descent reader shared by the element, symbol and metric grammars.
pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, at: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn error(&self, expected: &str) -> ParseError {
        ParseError::Expected { expected: expected.into(), found: self.peek().to_string(), pos: self.pos() }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    pub(crate) fn integer(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e15 => {
                self.bump();
                Ok(if neg { -(v as i64) } else { v as i64 })
            }
            _ => Err(self.error("integer")),
        }
    }

    pub(crate) fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat('-');
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error("number")),
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    pub(crate) fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.eat('^') {
            let e = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat('\'') {
            e = Expr::Adj(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "i" {
                    Ok(Expr::Imag)
                } else if name == "exp" {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Exp(Box::new(e)))
                } else if let Some(j) = generator_index(&name) {
                    Ok(Expr::Gen(j))
                } else {
                    Err(ParseError::Ident { name, pos })
                }
            }
            _ => Err(self.error("number, generator or '('")),
        }
    }
}

fn generator_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('U')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Binding strength used by the formatter: sum, product, unary, power, atom.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 0,
        Expr::Mul(..) => 1,
        Expr::Neg(_) => 2,
        Expr::Pow(..) => 3,
        Expr::Adj(_) => 4,
        Expr::Num(_) | Expr::Imag | Expr::Gen(_) | Expr::Exp(_) => 5,
    }
}

struct Wrap<'a>(&'a Expr, bool);

impl fmt::Display for Wrap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Imag => write!(f, "i"),
            Expr::Gen(j) => write!(f, "U{j}"),
            Expr::Adj(e) => write!(f, "{}'", Wrap(e, level(e) < 4)),
            Expr::Neg(e) => write!(f, "-{}", Wrap(e, level(e) < 2)),
            Expr::Add(a, b) => write!(f, "{} + {}", a, Wrap(b, level(b) < 1)),
            Expr::Sub(a, b) => write!(f, "{} - {}", a, Wrap(b, level(b) < 1)),
            Expr::Mul(a, b) => write!(f, "{} * {}", Wrap(a, level(a) < 1), Wrap(b, level(b) < 2)),
            Expr::Pow(e, k) => write!(f, "{}^{k}", Wrap(e, level(e) < 4)),
            Expr::Exp(e) => write!(f, "exp({e})"),
        }
    }
}

impl Expr {
    /// Largest generator index that appears.
    pub fn max_generator(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Imag => 0,
            Expr::Gen(j) => *j,
            Expr::Adj(e) | Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) => e.max_generator(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.max_generator().max(b.max_generator()),
        }
    }

    /// Value in the algebra at `theta`. `exp` is taken through the functional
    /// calculus on the given truncation and needs a self-adjoint argument.
    pub fn eval(&self, theta: &Arc<Theta>, tr: Option<Truncation>) -> Result<Element, EvalError> {
        Ok(match self {
            Expr::Num(v) => Element::real(theta, *v),
            Expr::Imag => Element::scalar(theta, C64::new(0.0, 1.0)),
            Expr::Gen(j) => {
                if *j > theta.n() {
                    return Err(EvalError::Dimension { index: *j, n: theta.n() });
                }
                Element::generator(theta, j - 1)
            }
            Expr::Adj(e) => e.eval(theta, tr)?.adjoint(),
            Expr::Neg(e) => -e.eval(theta, tr)?,
            Expr::Add(a, b) => a.eval(theta, tr)?.add(&b.eval(theta, tr)?)?,
            Expr::Sub(a, b) => a.eval(theta, tr)?.sub(&b.eval(theta, tr)?)?,
            Expr::Mul(a, b) => a.eval(theta, tr)?.mul(&b.eval(theta, tr)?)?,
            Expr::Pow(e, k) => {
                let base = e.eval(theta, tr)?;
                if *k >= 0 {
                    base.pow(*k as u32)
                } else {
                    let unitary = base.len() == 1 && base.iter().all(|(_, c)| (c.norm() - 1.0).abs() < 1e-14);
                    if !unitary {
                        return Err(EvalError::NegativePower);
                    }
                    base.adjoint().pow((-k) as u32)
                }
            }
            Expr::Exp(e) => {
                let tr = tr.ok_or(EvalError::NoTruncation)?;
                element_exp(&e.eval(theta, Some(tr))?, tr)?
            }
        })
    }
}

/// Parse and evaluate in one step.
pub fn element(src: &str, theta: &Arc<Theta>, tr: Option<Truncation>) -> Result<Element, crate::CliError> {
    let e = parse(src).map_err(|err| crate::CliError::Config(format!("in '{src}': {err}")))?;
    e.eval(theta, tr).map_err(|err| crate::CliError::Config(format!("in '{src}': {err}")))
}
