//! Metric expressions.
//!
//! ```text
//! metric := 'flat' ['(' int ')']
//!         | 'conformal' '(' expr [',' int] ')'
//!         | 'product' '(' metric ',' metric ')'
//!         | 'explicit' '(' '[' row (',' row)* ']' ')'
//! row    := '[' expr (',' expr)* ']'
//! ```
//!
//! The optional integer is the block size; it defaults to the full dimension
//! and is required inside `product`.

use std::fmt;
use std::sync::Arc;

use nctorus::gns::{MatrixOverAlgebra, Truncation};
use nctorus::metric::RiemannianMetric;
use nctorus::{Element, Theta};

use crate::expr::{Expr, ParseError, Parser, Tok};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricExpr {
    Flat(Option<usize>),
    Conformal(Expr, Option<usize>),
    Product(Box<MetricExpr>, Box<MetricExpr>),
    Explicit(Vec<Vec<Expr>>),
}

impl Parser {
    fn block_size(&mut self) -> Result<usize, ParseError> {
        let m = self.integer()?;
        if m < 1 {
            return Err(self.error("positive block size"));
        }
        Ok(m as usize)
    }

    fn metric(&mut self) -> Result<MetricExpr, ParseError> {
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(self.error("metric name")),
        };
        self.bump();
        match name.as_str() {
            "flat" => {
                if self.eat('(') {
                    let m = self.block_size()?;
                    self.expect(')')?;
                    Ok(MetricExpr::Flat(Some(m)))
                } else {
                    Ok(MetricExpr::Flat(None))
                }
            }
            "conformal" => {
                self.expect('(')?;
                let k = self.expr()?;
                let m = if self.eat(',') { Some(self.block_size()?) } else { None };
                self.expect(')')?;
                Ok(MetricExpr::Conformal(k, m))
            }
            "product" => {
                self.expect('(')?;
                let a = self.metric()?;
                self.expect(',')?;
                let b = self.metric()?;
                self.expect(')')?;
                Ok(MetricExpr::Product(Box::new(a), Box::new(b)))
            }
            "explicit" => {
                self.expect('(')?;
                self.expect('[')?;
                let mut rows = Vec::new();
                loop {
                    self.expect('[')?;
                    let mut row = vec![self.expr()?];
                    while self.eat(',') {
                        row.push(self.expr()?);
                    }
                    self.expect(']')?;
                    rows.push(row);
                    if !self.eat(',') {
                        break;
                    }
                }
                self.expect(']')?;
                self.expect(')')?;
                Ok(MetricExpr::Explicit(rows))
            }
            _ => Err(self.error("'flat', 'conformal', 'product' or 'explicit'")),
        }
    }
}

pub fn parse(src: &str) -> Result<MetricExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let m = p.metric()?;
    p.finish()?;
    Ok(m)
}

impl fmt::Display for MetricExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricExpr::Flat(None) => write!(f, "flat"),
            MetricExpr::Flat(Some(m)) => write!(f, "flat({m})"),
            MetricExpr::Conformal(k, None) => write!(f, "conformal({k})"),
            MetricExpr::Conformal(k, Some(m)) => write!(f, "conformal({k}, {m})"),
            MetricExpr::Product(a, b) => write!(f, "product({a}, {b})"),
            MetricExpr::Explicit(rows) => {
                write!(f, "explicit([")?;
                for (i, r) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[")?;
                    for (j, e) in r.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "])")
            }
        }
    }
}

/// Evaluation context: `factor_radius` truncates every evaluated entry to
/// `|k|_∞ ≤ r`.
pub struct MetricContext<'a> {
    pub theta: &'a Arc<Theta>,
    pub tr: Truncation,
    pub factor_radius: Option<i64>,
}

impl MetricContext<'_> {
    fn element(&self, e: &Expr) -> Result<Element, CliError> {
        let v = e.eval(self.theta, Some(self.tr)).map_err(|err| CliError::Config(format!("in '{e}': {err}")))?;
        Ok(match self.factor_radius {
            Some(r) => v.truncate_inf(r),
            None => v,
        })
    }

    fn block(&self, m: &MetricExpr, top: bool) -> Result<MatrixOverAlgebra, CliError> {
        let n = self.theta.n();
        let size = |s: &Option<usize>| -> Result<usize, CliError> {
            match (s, top) {
                (Some(m), _) => Ok(*m),
                (None, true) => Ok(n),
                (None, false) => Err(CliError::Config(format!("block size required inside product in '{m}'"))),
            }
        };
        Ok(match m {
            MetricExpr::Flat(s) => MatrixOverAlgebra::identity(self.theta, size(s)?),
            MetricExpr::Conformal(k, s) => {
                let k = self.element(k)?;
                let k2 = &k * &k;
                MatrixOverAlgebra::diagonal(&vec![k2; size(s)?])
            }
            MetricExpr::Product(a, b) => {
                let (a, b) = (self.block(a, false)?, self.block(b, false)?);
                let d = a.m + b.m;
                MatrixOverAlgebra::from_fn(d, |i, j| {
                    if i < a.m && j < a.m {
                        a.get(i, j).clone()
                    } else if i >= a.m && j >= a.m {
                        b.get(i - a.m, j - a.m).clone()
                    } else {
                        Element::zero(self.theta)
                    }
                })
            }
            MetricExpr::Explicit(rows) => {
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::Config(format!("explicit metric '{m}' is not square")));
                }
                let mut entries = Vec::with_capacity(d * d);
                for r in rows {
                    for e in r {
                        entries.push(self.element(e)?);
                    }
                }
                MatrixOverAlgebra::new(d, entries).map_err(|e| CliError::Config(e.to_string()))?
            }
        })
    }

    /// Metric object; flat and full conformal specs use their closed forms.
    pub fn build(&self, m: &MetricExpr) -> Result<RiemannianMetric, CliError> {
        let n = self.theta.n();
        let check = |d: usize| {
            if d == n {
                Ok(())
            } else {
                Err(CliError::Config(format!("metric '{m}' has size {d}, dimension is {n}")))
            }
        };
        let lib = |e: nctorus::Error| CliError::Config(format!("metric '{m}': {e}"));
        match m {
            MetricExpr::Flat(s) => {
                check(s.unwrap_or(n))?;
                Ok(RiemannianMetric::flat(self.theta, self.tr))
            }
            MetricExpr::Conformal(k, s) => {
                check(s.unwrap_or(n))?;
                RiemannianMetric::conformal(&self.element(k)?, self.tr).map_err(lib)
            }
            _ => {
                let g = self.block(m, true)?;
                check(g.m)?;
                RiemannianMetric::new(g, self.tr).map_err(lib)
            }
        }
    }
}
