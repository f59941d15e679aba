//! Symbol expressions: sums of `coefficient * ξ^β * |ξ|^s` terms.
//!
//! ```text
//! symbol  := ['-'] sterm (('+' | '-') sterm)*
//! sterm   := sfactor ('*' sfactor)*
//! sfactor := 'xi' '^' '[' int (',' int)* ']'
//!          | 'xi' J ['^' int]
//!          | '|' 'xi' '|' ['^' ['-'] number]
//!          | power                                  (element factor)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nctorus::gns::Truncation;
use nctorus::psido::{ClassicalSymbol, SymbolTerm, DEFAULT_CUTOFF};
use nctorus::spectral::ScalarSymbol;
use nctorus::Theta;

use crate::expr::{EvalError, Expr, ParseError, Parser, Tok};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct TermExpr {
    pub coeff: Expr,
    /// One-based axis → exponent.
    pub beta: BTreeMap<usize, u32>,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExpr {
    pub terms: Vec<TermExpr>,
}

fn xi_axis(name: &str) -> Option<usize> {
    let d = name.strip_prefix("xi")?;
    if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) || d.starts_with('0') {
        return None;
    }
    d.parse().ok()
}

impl Parser {
    fn sterm(&mut self, negate: bool) -> Result<TermExpr, ParseError> {
        let mut coeff: Option<Expr> = None;
        let mut beta = BTreeMap::new();
        let mut s = 0.0;
        loop {
            match self.peek().clone() {
                Tok::Ident(name) if name == "xi" => {
                    self.bump();
                    self.expect('^')?;
                    self.expect('[')?;
                    let mut j = 1;
                    loop {
                        let e = self.integer()?;
                        if e < 0 {
                            return Err(self.error("nonnegative exponent"));
                        }
                        if e > 0 {
                            *beta.entry(j).or_insert(0) += e as u32;
                        }
                        j += 1;
                        if !self.eat(',') {
                            break;
                        }
                    }
                    self.expect(']')?;
                }
                Tok::Ident(name) if xi_axis(&name).is_some() => {
                    self.bump();
                    let e = if self.eat('^') { self.integer()? } else { 1 };
                    if e < 0 {
                        return Err(self.error("nonnegative exponent"));
                    }
                    *beta.entry(xi_axis(&name).unwrap()).or_insert(0) += e as u32;
                }
                Tok::Sym('|') => {
                    self.bump();
                    match self.bump() {
                        Tok::Ident(name) if name == "xi" => {}
                        _ => return Err(self.error("'xi'")),
                    }
                    self.expect('|')?;
                    s += if self.eat('^') { self.signed_number()? } else { 1.0 };
                }
                _ => {
                    let f = self.power()?;
                    coeff = Some(match coeff {
                        None => f,
                        Some(c) => Expr::Mul(Box::new(c), Box::new(f)),
                    });
                }
            }
            if !self.eat('*') {
                break;
            }
        }
        let coeff = coeff.unwrap_or(Expr::Num(1.0));
        let coeff = if negate { Expr::Neg(Box::new(coeff)) } else { coeff };
        Ok(TermExpr { coeff, beta, s })
    }

    fn symbol(&mut self) -> Result<SymbolExpr, ParseError> {
        let neg = self.eat('-');
        let mut terms = vec![self.sterm(neg)?];
        loop {
            if self.eat('+') {
                terms.push(self.sterm(false)?);
            } else if self.eat('-') {
                terms.push(self.sterm(true)?);
            } else {
                return Ok(SymbolExpr { terms });
            }
        }
    }
}

pub fn parse(src: &str) -> Result<SymbolExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let s = p.symbol()?;
    p.finish()?;
    Ok(s)
}

impl fmt::Display for TermExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeff)?;
        for (j, e) in &self.beta {
            write!(f, " * xi{j}^{e}")?;
        }
        if self.s != 0.0 {
            write!(f, " * |xi|^{}", self.s)?;
        }
        Ok(())
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl SymbolExpr {
    pub fn eval(&self, theta: &Arc<Theta>, tr: Option<Truncation>) -> Result<ClassicalSymbol, EvalError> {
        let n = theta.n();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut beta = vec![0u32; n];
            for (&j, &e) in &t.beta {
                if j > n {
                    return Err(EvalError::Dimension { index: j, n });
                }
                beta[j - 1] += e;
            }
            terms.push(SymbolTerm::new(t.coeff.eval(theta, tr)?, beta, t.s));
        }
        Ok(ClassicalSymbol::from_terms(theta, terms, DEFAULT_CUTOFF)?)
    }
}

pub fn classical(src: &str, theta: &Arc<Theta>, tr: Option<Truncation>) -> Result<ClassicalSymbol, CliError> {
    let s = parse(src).map_err(|e| CliError::Config(format!("in symbol '{src}': {e}")))?;
    s.eval(theta, tr).map_err(|e| CliError::Config(format!("in symbol '{src}': {e}")))
}

/// Scalar symbol `σ^p` for a symbol with scalar coefficients.
pub fn scalar(src: &str, power: f64, theta: &Arc<Theta>) -> Result<ScalarSymbol, CliError> {
    let s = classical(src, theta, None)?;
    if !s.is_scalar() {
        return Err(CliError::Config(format!("symbol '{src}' has non-scalar coefficients")));
    }
    let base = ScalarSymbol::Sym(s);
    Ok(if power == 1.0 { base } else { base.powf(power) })
}
