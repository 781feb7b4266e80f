//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Rational constants are written as quotients, e.g. `3/4*Y^2`.

use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use super::{PolyRing, WPoly};
use crate::scalar::{Field, ParamPolynomial, Rational, RationalFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("negative exponent")]
    NegativeExponent,
    #[error("exponent too large")]
    ExponentTooLarge,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a non-constant expression")]
    NonConstantDivisor,
}

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Semantic actions for the parser.
pub trait ExprBuilder {
    type Value: Clone;
    fn constant(&self, q: Rational) -> Self::Value;
    fn variable(&self, name: &str) -> Option<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn pow(&self, a: &Self::Value, n: u32) -> Self::Value;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, ParseErrorKind>;
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            column += i - start;
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            column += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: l0,
                column: c0,
            });
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                line: l0,
                column: c0,
            });
            column += 1;
            i += 1;
            continue;
        }
        return Err(ParseError {
            line: l0,
            column: c0,
            kind: ParseErrorKind::UnexpectedChar(c),
        });
    }
    Ok(out)
}

struct Parser<'a, B: ExprBuilder> {
    toks: Vec<Token>,
    pos: usize,
    builder: &'a B,
    end: (usize, usize),
}

impl<'a, B: ExprBuilder> Parser<'a, B> {
    fn err_at(&self, t: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            kind,
        }
    }

    fn err_end(&self) -> ParseError {
        ParseError {
            line: self.end.0,
            column: self.end.1,
            kind: ParseErrorKind::UnexpectedEnd,
        }
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<B::Value, ParseError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' {
                self.builder.add(&acc, &rhs)
            } else {
                self.builder.sub(&acc, &rhs)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<B::Value, ParseError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            let at = self.toks[self.pos].clone();
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' {
                self.builder.mul(&acc, &rhs)
            } else {
                self.builder
                    .div(&acc, &rhs)
                    .map_err(|k| self.err_at(&at, k))?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<B::Value, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(self.builder.neg(&v))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<B::Value, ParseError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let Some(t) = self.toks.get(self.pos).cloned() else {
            return Err(self.err_end());
        };
        match &t.tok {
            Tok::Op('-') => Err(self.err_at(&t, ParseErrorKind::NegativeExponent)),
            Tok::Int(n) => {
                self.pos += 1;
                let n: u32 = n
                    .try_into()
                    .map_err(|_| self.err_at(&t, ParseErrorKind::ExponentTooLarge))?;
                Ok(self.builder.pow(&base, n))
            }
            other => Err(self.err_at(&t, ParseErrorKind::UnexpectedToken(describe(other)))),
        }
    }

    fn atom(&mut self) -> Result<B::Value, ParseError> {
        let Some(t) = self.toks.get(self.pos).cloned() else {
            return Err(self.err_end());
        };
        self.pos += 1;
        match &t.tok {
            Tok::Int(n) => Ok(self.builder.constant(Rational::from_integer(n.clone()))),
            Tok::Ident(name) => self
                .builder
                .variable(name)
                .ok_or_else(|| self.err_at(&t, ParseErrorKind::UnknownIdentifier(name.clone()))),
            Tok::Op('(') => {
                let v = self.expr()?;
                match self.toks.get(self.pos) {
                    Some(Token { tok: Tok::Op(')'), .. }) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    Some(other) => {
                        let other = other.clone();
                        Err(self.err_at(&other, ParseErrorKind::UnexpectedToken(describe(&other.tok))))
                    }
                    None => Err(self.err_end()),
                }
            }
            other => Err(self.err_at(&t, ParseErrorKind::UnexpectedToken(describe(other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
    }
}

fn end_position(src: &str) -> (usize, usize) {
    let line = src.matches('\n').count() + 1;
    let last = src.rsplit('\n').next().unwrap_or("");
    (line, last.chars().count() + 1)
}

/// Parse `src` with the given semantic actions.
pub fn parse_expr<B: ExprBuilder>(src: &str, builder: &B) -> Result<B::Value, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        builder,
        end: end_position(src),
    };
    let v = p.expr()?;
    if let Some(t) = p.toks.get(p.pos).cloned() {
        return Err(p.err_at(&t, ParseErrorKind::UnexpectedToken(describe(&t.tok))));
    }
    Ok(v)
}

/// Builds [`WPoly`]s over a ring; parameter names (if any) become
/// coefficients.
pub struct PolyBuilder<F: Field> {
    ring: Arc<PolyRing>,
    params: Vec<String>,
    param_value: Option<fn(usize) -> F>,
}

impl<F: Field> PolyBuilder<F> {
    pub fn new(ring: &Arc<PolyRing>) -> Self {
        Self {
            ring: ring.clone(),
            params: Vec::new(),
            param_value: None,
        }
    }
}

impl PolyBuilder<RationalFunction> {
    pub fn with_params(ring: &Arc<PolyRing>, params: &[String]) -> Self {
        Self {
            ring: ring.clone(),
            params: params.to_vec(),
            param_value: Some(RationalFunction::var),
        }
    }
}

impl<F: Field> ExprBuilder for PolyBuilder<F> {
    type Value = WPoly<F>;

    fn constant(&self, q: Rational) -> WPoly<F> {
        WPoly::constant(&self.ring, F::from_rational(&q))
    }

    fn variable(&self, name: &str) -> Option<WPoly<F>> {
        if let Some(i) = self.ring.index_of(name) {
            return Some(WPoly::var(&self.ring, i));
        }
        let i = self.params.iter().position(|p| p == name)?;
        Some(WPoly::constant(&self.ring, (self.param_value?)(i)))
    }

    fn add(&self, a: &WPoly<F>, b: &WPoly<F>) -> WPoly<F> {
        a.add(b)
    }

    fn sub(&self, a: &WPoly<F>, b: &WPoly<F>) -> WPoly<F> {
        a.sub(b)
    }

    fn mul(&self, a: &WPoly<F>, b: &WPoly<F>) -> WPoly<F> {
        a.mul(b)
    }

    fn neg(&self, a: &WPoly<F>) -> WPoly<F> {
        a.neg()
    }

    fn pow(&self, a: &WPoly<F>, n: u32) -> WPoly<F> {
        a.pow(n)
    }

    fn div(&self, a: &WPoly<F>, b: &WPoly<F>) -> Result<WPoly<F>, ParseErrorKind> {
        if b.is_zero() {
            return Err(ParseErrorKind::DivisionByZero);
        }
        match b.terms() {
            [(m, c)] if m.degree() == 0 => Ok(a.scale(&c.inv())),
            _ => Err(ParseErrorKind::NonConstantDivisor),
        }
    }
}

/// Builds expressions in the deformation parameters only.
pub struct ParamBuilder {
    params: Vec<String>,
}

impl ParamBuilder {
    pub fn new(params: &[String]) -> Self {
        Self {
            params: params.to_vec(),
        }
    }

    /// Parse a polynomial; a non-constant divisor is an error.
    pub fn polynomial(&self, src: &str) -> Result<ParamPolynomial, ParseError> {
        let f = parse_expr(src, self)?;
        if f.is_polynomial() {
            Ok(f.numer().clone())
        } else {
            let (line, column) = end_position(src);
            Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::NonConstantDivisor,
            })
        }
    }

    pub fn function(&self, src: &str) -> Result<RationalFunction, ParseError> {
        parse_expr(src, self)
    }
}

impl ExprBuilder for ParamBuilder {
    type Value = RationalFunction;

    fn constant(&self, q: Rational) -> RationalFunction {
        RationalFunction::constant(q)
    }

    fn variable(&self, name: &str) -> Option<RationalFunction> {
        self.params
            .iter()
            .position(|p| p == name)
            .map(RationalFunction::var)
    }

    fn add(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        a.add_ref(b)
    }

    fn sub(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        a.sub_ref(b)
    }

    fn mul(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        a.mul_ref(b)
    }

    fn neg(&self, a: &RationalFunction) -> RationalFunction {
        -a.clone()
    }

    fn pow(&self, a: &RationalFunction, n: u32) -> RationalFunction {
        a.pow(n)
    }

    fn div(
        &self,
        a: &RationalFunction,
        b: &RationalFunction,
    ) -> Result<RationalFunction, ParseErrorKind> {
        if num_traits::Zero::is_zero(b) {
            return Err(ParseErrorKind::DivisionByZero);
        }
        Ok(a.div_ref(b))
    }
}
