//! A small expression language in one variable `t`.
//!
//! Grammar: numeric literals, `t`, `+ - * / ^`, unary minus, parentheses and
//! the one-argument functions `sin cos exp log abs sqrt`. `^` binds tightest
//! and associates to the right; unary minus binds looser than `^`, so `-t^2`
//! is `-(t^2)`. There is no implicit multiplication.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::quad::Fn1D;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    /// (left, right) binding power.
    fn binding(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (8, 7),
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

const NEG_BINDING: u8 = 5;
const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Abs, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

/// Abstract syntax tree. Literals produced by the parser are never negative;
/// negative literals only arise from constant folding.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'s> {
    src: &'s str,
    pos: usize,
}

impl<'s> Lexer<'s> {
    fn tokens(src: &'s str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += self.peek().map_or(0, char::len_utf8);
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            '0'..='9' | '.' => return self.number(start),
            c if c.is_ascii_alphabetic() || c == '_' => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
            }
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            other => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        self.pos += c.len_utf8();
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if p < bytes.len() && bytes[p].is_ascii_digit() {
                self.pos = p;
                digits(&mut self.pos);
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
            _ => Err(ParseError::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.idx]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let (tok, offset) = self.peek();
        let found = match tok {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        };
        ParseError::Syntax {
            offset: *offset,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek().0 {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                Tok::Op('^') => BinOp::Pow,
                _ => return Ok(lhs),
            };
            let (l_bp, r_bp) = op.binding();
            if l_bp < min_bp {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.expr(r_bp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.peek().clone();
        match tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.expr(NEG_BINDING)?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "t" {
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::lookup(&name) else {
                    return Err(ParseError::UnknownIdentifier { name, offset });
                };
                if self.peek().0 != Tok::LParen {
                    return Err(self.unexpected(&format!("`(` after `{name}`")));
                }
                self.bump();
                let mut args = Vec::new();
                if self.peek().0 != Tok::RParen {
                    args.push(self.expr(0)?);
                    while self.peek().0 == Tok::Comma {
                        self.bump();
                        args.push(self.expr(0)?);
                    }
                }
                self.expect_rparen()?;
                if args.len() != 1 {
                    return Err(ParseError::Arity {
                        name,
                        offset,
                        expected: 1,
                        found: args.len(),
                    });
                }
                Ok(Expr::Call(func, Box::new(args.pop().expect("one argument"))))
            }
            _ => Err(self.unexpected("a number, `t`, a function call, `-` or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek().0 == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks: Lexer::tokens(source)?,
        idx: 0,
    };
    let e = p.expr(0)?;
    if p.peek().0 != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

// Smart constructors fold constants and drop additive zeros and unit factors.

fn add(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Num(a), Expr::Num(b)) => num(a + b),
        (Expr::Num(a), _) if *a == 0.0 => r,
        (_, Expr::Num(b)) if *b == 0.0 => l,
        _ => Expr::Bin(BinOp::Add, Box::new(l), Box::new(r)),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Num(a), Expr::Num(b)) => num(a - b),
        (Expr::Num(a), _) if *a == 0.0 => neg(r),
        (_, Expr::Num(b)) if *b == 0.0 => l,
        _ => Expr::Bin(BinOp::Sub, Box::new(l), Box::new(r)),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Num(a), Expr::Num(b)) => num(a * b),
        (Expr::Num(a), _) | (_, Expr::Num(a)) if *a == 0.0 => num(0.0),
        (Expr::Num(a), _) if *a == 1.0 => r,
        (_, Expr::Num(b)) if *b == 1.0 => l,
        _ => Expr::Bin(BinOp::Mul, Box::new(l), Box::new(r)),
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Num(a), Expr::Num(b)) if *b != 0.0 => num(a / b),
        (Expr::Num(a), _) if *a == 0.0 => num(0.0),
        (_, Expr::Num(b)) if *b == 1.0 => l,
        _ => Expr::Bin(BinOp::Div, Box::new(l), Box::new(r)),
    }
}

fn pow(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Num(a), Expr::Num(b)) if a.powf(*b).is_finite() => num(a.powf(*b)),
        (_, Expr::Num(b)) if *b == 1.0 => l,
        (_, Expr::Num(b)) if *b == 0.0 => num(1.0),
        _ => Expr::Bin(BinOp::Pow, Box::new(l), Box::new(r)),
    }
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::Num(a) => num(-a),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn call(f: Func, e: Expr) -> Expr {
    match e {
        Expr::Num(a) if f.apply(a).is_finite() => num(f.apply(a)),
        other => Expr::Call(f, Box::new(other)),
    }
}

impl Expr {
    /// Whether the expression mentions `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Bin(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn eval<T: Scalar>(&self, t: T) -> T {
        match self {
            Expr::Num(v) => T::lit(*v),
            Expr::Var => t,
            Expr::Neg(e) => -e.eval(t),
            Expr::Call(f, e) => f.apply(e.eval(t)),
            Expr::Bin(op, l, r) => {
                let a = l.eval(t);
                match op {
                    BinOp::Add => a + r.eval(t),
                    BinOp::Sub => a - r.eval(t),
                    BinOp::Mul => a * r.eval(t),
                    BinOp::Div => a / r.eval(t),
                    BinOp::Pow => match **r {
                        // Integer powers of negative bases stay real.
                        Expr::Num(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => a.powi(k as i32),
                        _ => a.powf(r.eval(t)),
                    },
                }
            }
        }
    }

    /// Symbolic derivative with respect to `t`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var => num(1.0),
            Expr::Neg(e) => neg(e.differentiate()),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.as_ref().clone(), r.as_ref().clone());
                let (dl, dr) = (l.differentiate(), r.differentiate());
                match op {
                    BinOp::Add => add(dl, dr),
                    BinOp::Sub => sub(dl, dr),
                    BinOp::Mul => add(mul(dl, r.clone()), mul(l, dr)),
                    BinOp::Div => div(sub(mul(dl, r.clone()), mul(l, dr)), pow(r, num(2.0))),
                    BinOp::Pow if r.is_constant() => {
                        mul(mul(r.clone(), pow(l, sub(r, num(1.0)))), dl)
                    }
                    BinOp::Pow if l.is_constant() => {
                        mul(mul(pow(l.clone(), r), call(Func::Log, l)), dr)
                    }
                    BinOp::Pow => {
                        // d(l^r) = l^r (r' log l + r l' / l)
                        let whole = pow(l.clone(), r.clone());
                        let inner = add(mul(dr, call(Func::Log, l.clone())), div(mul(r, dl), l));
                        mul(whole, inner)
                    }
                }
            }
            Expr::Call(f, e) => {
                let inner = e.as_ref().clone();
                let de = inner.differentiate();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Log => div(num(1.0), inner),
                    // Undefined at 0, where evaluation yields NaN.
                    Func::Abs => div(inner.clone(), call(Func::Abs, inner)),
                    Func::Sqrt => div(num(1.0), mul(num(2.0), call(Func::Sqrt, inner))),
                };
                mul(outer, de)
            }
        }
    }

    /// Sample points where the symbolic derivative is not finite although the
    /// expression is; the numeric layers fall back to finite differences there.
    pub fn nondifferentiable_points<T: Scalar>(&self, samples: &[T]) -> Vec<T> {
        let d = self.differentiate();
        samples
            .iter()
            .copied()
            .filter(|&t| self.eval(t).is_finite() && !d.eval(t).is_finite())
            .collect()
    }

    /// Wraps the expression and its symbolic derivative as an [`Fn1D`].
    pub fn to_fn1d<T: Scalar>(&self) -> Fn1D<T> {
        let e = Arc::new(self.clone());
        let d = Arc::new(self.differentiate());
        Fn1D::new(self.to_string(), move |t| e.eval(t)).with_derivative(move |t| d.eval(t))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 => ATOM_PRECEDENCE,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => ATOM_PRECEDENCE,
            Expr::Neg(_) => NEG_PRECEDENCE,
            Expr::Bin(op, ..) => op.precedence(),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() <= NEG_PRECEDENCE)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = (l.precedence(), r.precedence());
                let (left_parens, right_parens) = if *op == BinOp::Pow {
                    (lp <= p, rp < p)
                } else {
                    (lp < p, rp <= p)
                };
                write_child(f, l, left_parens)?;
                if *op == BinOp::Pow {
                    f.write_str(op.symbol())?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                write_child(f, r, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(s: &str, t: f64) -> f64 {
        parse(s).unwrap().eval(t)
    }

    #[test]
    fn examples() {
        assert_eq!(at("t^2", 0.5), 0.25);
        assert_eq!(at("2*t - sin(t)", 0.0), 0.0);
        assert_eq!(at("-t^2", 2.0), -4.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(at("2^3^2", 0.0), 512.0);
        assert_eq!(at("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(at("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(at("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(at("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(at("t^-1", 4.0), 0.25);
        assert_eq!(at("--t", 3.0), 3.0);
        assert_eq!(at("-t * 2", 3.0), -6.0);
        assert_eq!(at("(-t)^2", 3.0), 9.0);
        assert_eq!(at("(-2)^3", 0.0), -8.0);
        assert_eq!(at("1.5e1 + .5", 0.0), 15.5);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse(""), Err(ParseError::Empty));
        assert!(matches!(parse("t +"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse("t $ 2"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(t"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t t"), Err(ParseError::Syntax { offset: 2, .. })));
        assert_eq!(
            parse("2*x"),
            Err(ParseError::UnknownIdentifier { name: "x".into(), offset: 2 })
        );
        assert!(matches!(parse("sin(t, t)"), Err(ParseError::Arity { found: 2, .. })));
        assert!(matches!(parse("cos()"), Err(ParseError::Arity { found: 0, .. })));
        assert!(matches!(parse("2t"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("1e999"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "t^2",
            "-t^2",
            "(-t)^2",
            "2^3^2",
            "(2^3)^2",
            "1 - (2 - t)",
            "(1 - 2) - t",
            "t / (t * 2)",
            "-(t + 1)",
            "sin(exp(-t) * t)",
            "t * -t",
            "abs(t - 0.5) + sqrt(t) / log(2 + t)",
        ] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{s} -> {printed}");
        }
    }

    #[test]
    fn derivative_examples() {
        let d = parse("t^2").unwrap().differentiate();
        assert_eq!(d.eval(0.3), 0.6);
        let d = parse("sin(t)").unwrap().differentiate();
        assert_eq!(d, parse("cos(t)").unwrap());
        let e = parse("exp(-t)*t").unwrap();
        let d = e.differentiate();
        for t in [0.1f64, 0.5, 0.9] {
            let h = 1e-5;
            let fd = (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
            assert!((d.eval(t) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_of_constant_folds() {
        assert_eq!(parse("3 + 2*5").unwrap().differentiate(), Expr::Num(0.0));
        assert_eq!(parse("3*t").unwrap().differentiate(), Expr::Num(3.0));
    }

    #[test]
    fn general_power_rule() {
        let e = parse("t^t").unwrap();
        let d = e.differentiate();
        let t = 1.7f64;
        assert!((d.eval(t) - t.powf(t) * (t.ln() + 1.0)).abs() < 1e-12);
        let d = parse("2^t").unwrap().differentiate();
        assert!((d.eval(t) - 2f64.powf(t) * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn abs_kink_is_reported_and_patched() {
        let e = parse("abs(t - 0.5)").unwrap();
        assert_eq!(e.nondifferentiable_points(&[0.25, 0.5, 0.75]), vec![0.5]);
        let f = e.to_fn1d::<f64>();
        assert!(f.derivative_within(0.5, 0.0, 1.0).is_finite());
        assert_eq!(f.derivative_within(0.75, 0.0, 1.0), 1.0);
    }

    #[test]
    fn evaluates_in_single_precision() {
        let e = parse("t^2 + 1").unwrap();
        assert_eq!(e.eval(0.5f32), 1.25f32);
    }
}
