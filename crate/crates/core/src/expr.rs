//! Scalar expressions in one variable `x`.
//!
//! Used for model coefficients and test functions. The grammar is small on
//! purpose:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x' | name | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := abs | exp | log | sqrt | pos | neg | min | max
//! ```
//!
//! `pos(u)` is the positive part `max(u, 0)` and `neg(u)` the negative part
//! `max(-u, 0)`. Exponents must be integer literals, optionally signed and
//! optionally parenthesised, so that `-x^2` reads as `-(x^2)` and symbolic
//! derivatives stay exact.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Unary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Abs,
    Exp,
    Log,
    Sqrt,
    PosPart,
    NegPart,
}

/// Binary operators. Integer powers have their own node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token {0}")]
    UnexpectedToken(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),
    #[error("exponent must be an integer literal")]
    NonIntegerExponent,
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

/// Syntax error with the byte offset into the source where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at x = {0}")]
    DivisionByZero(f64),
    #[error("log of non-positive argument {arg} at x = {x}")]
    LogDomain { arg: f64, x: f64 },
    #[error("sqrt of negative argument {arg} at x = {x}")]
    SqrtDomain { arg: f64, x: f64 },
    #[error("non-finite value at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivError {
    #[error("`{0}` is not differentiable; derivatives need the smooth subset of the grammar")]
    NonSmooth(&'static str),
    #[error("derivative order must be 1 or 2, got {0}")]
    Order(u32),
}

// ---------------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b',' => out.push((start, Tok::Comma)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part: e, E followed by optional sign and digits
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidNumber(text.to_string()),
                })?;
                if !v.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::InvalidNumber(text.to_string()),
                    });
                }
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    constants: &'a [(&'a str, f64)],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(t.to_string())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let n = self.int_exponent()?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn int_exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        let sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        let at = self.offset();
        let n = match self.next() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            Some(_) => {
                return Err(ParseError {
                    offset: at,
                    kind: ParseErrorKind::NonIntegerExponent,
                })
            }
            None => {
                return Err(ParseError {
                    offset: at,
                    kind: ParseErrorKind::UnexpectedEnd,
                })
            }
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(sign * n)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if name == "x" {
                    return Ok(Expr::Var);
                }
                if let Some(&(_, v)) = self.constants.iter().find(|(n, _)| *n == name) {
                    return Ok(Expr::Const(v));
                }
                let unary = match name.as_str() {
                    "abs" => Some(UnaryOp::Abs),
                    "exp" => Some(UnaryOp::Exp),
                    "log" => Some(UnaryOp::Log),
                    "sqrt" => Some(UnaryOp::Sqrt),
                    "pos" => Some(UnaryOp::PosPart),
                    "neg" => Some(UnaryOp::NegPart),
                    _ => None,
                };
                let binary = match name.as_str() {
                    "min" => Some(BinaryOp::Min),
                    "max" => Some(BinaryOp::Max),
                    _ => None,
                };
                if unary.is_none() && binary.is_none() {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    });
                }
                self.expect(Tok::LParen)?;
                let mut args = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                let expected = if unary.is_some() { 1 } else { 2 };
                if args.len() != expected {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::Arity {
                            name,
                            expected,
                            got: args.len(),
                        },
                    });
                }
                let mut args = args.into_iter();
                let a = Box::new(args.next().unwrap());
                Ok(match (unary, binary) {
                    (Some(op), _) => Expr::Unary(op, a),
                    (None, Some(op)) => Expr::Binary(op, a, Box::new(args.next().unwrap())),
                    (None, None) => unreachable!(),
                })
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected())
            }
            None => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
        }
    }
}

/// Parses an expression in `x`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with_constants(src, &[])
}

/// Parses an expression in `x`, substituting the given named constants.
pub fn parse_with_constants(src: &str, constants: &[(&str, f64)]) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        constants,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// Evaluation

fn finite(v: f64, x: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(x))
    }
}

// NaN-propagating min/max.
fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

impl Expr {
    /// Value at `x`; every failure mode of [`Expr::eval`] shows up as NaN.
    fn value(&self, x: f64) -> f64 {
        let v = match self {
            Expr::Const(c) => return *c,
            Expr::Var => return x,
            Expr::Unary(op, a) => {
                let a = a.value(x);
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Abs => a.abs(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log if a <= 0.0 => f64::NAN,
                    UnaryOp::Log => a.ln(),
                    UnaryOp::Sqrt => a.sqrt(),
                    UnaryOp::PosPart => nan_max(a, 0.0),
                    UnaryOp::NegPart => nan_max(-a, 0.0),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.value(x), b.value(x));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div if b == 0.0 => f64::NAN,
                    BinaryOp::Div => a / b,
                    BinaryOp::Min => nan_min(a, b),
                    BinaryOp::Max => nan_max(a, b),
                }
            }
            Expr::Pow(a, n) => {
                let a = a.value(x);
                if *n < 0 && a == 0.0 {
                    f64::NAN
                } else {
                    a.powi(*n)
                }
            }
        };
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.value(x);
        if v.is_finite() {
            return Ok(v);
        }
        self.eval_checked(x)
    }

    fn eval_checked(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, a) => {
                let a = a.eval_checked(x)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Abs => a.abs(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::LogDomain { arg: a, x });
                        }
                        a.ln()
                    }
                    UnaryOp::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtDomain { arg: a, x });
                        }
                        a.sqrt()
                    }
                    UnaryOp::PosPart => a.max(0.0),
                    UnaryOp::NegPart => (-a).max(0.0),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_checked(x)?;
                let b = b.eval_checked(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero(x));
                        }
                        a / b
                    }
                    BinaryOp::Min => a.min(b),
                    BinaryOp::Max => a.max(b),
                }
            }
            Expr::Pow(a, n) => {
                let a = a.eval_checked(x)?;
                if *n < 0 && a == 0.0 {
                    return Err(EvalError::DivisionByZero(x));
                }
                a.powi(*n)
            }
        };
        finite(v, x)
    }

    /// Samples the expression at each point.
    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>, EvalError> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// True when the tree contains no `abs`, `min`, `max`, `pos` or `neg` nodes.
    pub fn is_smooth(&self) -> bool {
        self.first_non_smooth().is_none()
    }

    fn first_non_smooth(&self) -> Option<&'static str> {
        match self {
            Expr::Const(_) | Expr::Var => None,
            Expr::Unary(op, a) => match op {
                UnaryOp::Abs => Some("abs"),
                UnaryOp::PosPart => Some("pos"),
                UnaryOp::NegPart => Some("neg"),
                _ => a.first_non_smooth(),
            },
            Expr::Binary(op, a, b) => match op {
                BinaryOp::Min => Some("min"),
                BinaryOp::Max => Some("max"),
                _ => a.first_non_smooth().or_else(|| b.first_non_smooth()),
            },
            Expr::Pow(a, _) => a.first_non_smooth(),
        }
    }

    /// Symbolic derivative of order 1 or 2.
    pub fn deriv(&self, order: u32) -> Result<Expr, DerivError> {
        if let Some(name) = self.first_non_smooth() {
            return Err(DerivError::NonSmooth(name));
        }
        match order {
            1 => Ok(self.d()),
            2 => Ok(self.d().d()),
            n => Err(DerivError::Order(n)),
        }
    }

    /// Replaces every occurrence of `x` with `inner`, i.e. `self ∘ inner`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => inner.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.compose(inner))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.compose(inner)), Box::new(b.compose(inner)))
            }
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.compose(inner)), *n),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    // Caller guarantees smoothness.
    fn d(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Unary(op, a) => {
                let da = a.d();
                match op {
                    UnaryOp::Neg => neg(da),
                    UnaryOp::Exp => mul(self.clone(), da),
                    UnaryOp::Log => div(da, (**a).clone()),
                    UnaryOp::Sqrt => div(da, mul(Expr::Const(2.0), self.clone())),
                    UnaryOp::Abs | UnaryOp::PosPart | UnaryOp::NegPart => {
                        unreachable!("non-smooth node")
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.d(), b.d());
                match op {
                    BinaryOp::Add => add(da, db),
                    BinaryOp::Sub => sub(da, db),
                    BinaryOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    BinaryOp::Div => div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        pow((**b).clone(), 2),
                    ),
                    BinaryOp::Min | BinaryOp::Max => unreachable!("non-smooth node"),
                }
            }
            Expr::Pow(a, n) => {
                if *n == 0 {
                    return Expr::Const(0.0);
                }
                mul(
                    mul(Expr::Const(*n as f64), pow((**a).clone(), n - 1)),
                    a.d(),
                )
            }
        }
    }
}

// Constructors used by `d`; they fold the trivial 0/1 cases so that
// repeated differentiation does not blow up the tree.

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        a => Expr::Unary(UnaryOp::Neg, Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if let (Expr::Const(p), Expr::Const(q)) = (&a, &b) {
        return Expr::Const(p * q);
    }
    Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Const(1.0),
        1 => a,
        n => Expr::Pow(Box::new(a), n),
    }
}

// ---------------------------------------------------------------------------
// Printing. Fully parenthesised so that parse(print(e)) evaluates like e.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Unary(op, a) => match op {
                UnaryOp::Neg => write!(f, "(-{a})"),
                UnaryOp::Abs => write!(f, "abs({a})"),
                UnaryOp::Exp => write!(f, "exp({a})"),
                UnaryOp::Log => write!(f, "log({a})"),
                UnaryOp::Sqrt => write!(f, "sqrt({a})"),
                UnaryOp::PosPart => write!(f, "pos({a})"),
                UnaryOp::NegPart => write!(f, "neg({a})"),
            },
            Expr::Binary(op, a, b) => match op {
                BinaryOp::Add => write!(f, "({a} + {b})"),
                BinaryOp::Sub => write!(f, "({a} - {b})"),
                BinaryOp::Mul => write!(f, "({a} * {b})"),
                BinaryOp::Div => write!(f, "({a} / {b})"),
                BinaryOp::Min => write!(f, "min({a}, {b})"),
                BinaryOp::Max => write!(f, "max({a}, {b})"),
            },
            Expr::Pow(a, n) => write!(f, "({a})^({n})"),
        }
    }
}

/// Smooth expressions used by derivative self-checks.
pub const SMOOTH_DICTIONARY: &[&str] = &[
    "x^4 - 3*x^2",
    "0.5*x^4",
    "exp(-x)*x^2",
    "exp(-x^2)",
    "x^3 - 2*x + 1",
    "sqrt(1 + x^2)",
    "log(1 + x^2)",
    "1/(1 + x^2)",
    "-x^2",
    "x",
];
