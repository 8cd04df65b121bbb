//! A minimal arithmetic expression language for metric and field data.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'pi' | x<k> | y<k> | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt | ln
//! ```
//!
//! Variables are 1-based (`x1`, `y2`, ...). Parsed expressions evaluate at
//! any [`Scalar`], so the same tree yields values and exact derivatives.

use std::fmt;

use thiserror::Error;

use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprError {
    pub message: String,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Ln,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Ln => v.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Const(T),
    /// Base coordinate, 0-based.
    X(usize),
    /// Fiber coordinate, 0-based.
    Y(usize),
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    PowI(Box<Expr<T>>, i32),
    PowC(Box<Expr<T>>, T),
    Pow(Box<Expr<T>>, Box<Expr<T>>),
    Call(Func, Box<Expr<T>>),
}

impl<T: Real> Expr<T> {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, end: src.len() };
        let e = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(p.error_at(t.offset, format!("unexpected {}", t.kind)));
        }
        Ok(e)
    }

    pub fn constant(v: T) -> Self {
        Expr::Const(v)
    }

    /// Evaluates at base point `x` and fiber point `y`.
    ///
    /// Out-of-range variables are a caller bug; use [`Expr::max_x_index`] and
    /// [`Expr::max_y_index`] to validate against the dimension first.
    pub fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        match self {
            Expr::Const(c) => S::from_base(*c),
            Expr::X(i) => x[*i],
            Expr::Y(i) => y[*i],
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::PowI(a, n) => a.eval(x, y).powi(*n),
            Expr::PowC(a, p) => a.eval(x, y).powc(*p),
            Expr::Pow(a, b) => (b.eval(x, y) * a.eval(x, y).ln()).exp(),
            Expr::Call(f, a) => f.apply(a.eval(x, y)),
        }
    }

    /// Evaluates an expression that only depends on base coordinates.
    pub fn eval_x<S: Scalar<Base = T>>(&self, x: &[S]) -> S {
        self.eval(x, &[])
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Highest base-coordinate index referenced (1-based), 0 if none.
    pub fn max_x_index(&self) -> usize {
        self.fold_vars(&|e| if let Expr::X(i) = e { i + 1 } else { 0 })
    }

    /// Highest fiber-coordinate index referenced (1-based), 0 if none.
    pub fn max_y_index(&self) -> usize {
        self.fold_vars(&|e| if let Expr::Y(i) = e { i + 1 } else { 0 })
    }

    fn fold_vars(&self, leaf: &dyn Fn(&Expr<T>) -> usize) -> usize {
        match self {
            Expr::Const(_) | Expr::X(_) | Expr::Y(_) => leaf(self),
            Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowC(a, _) | Expr::Call(_, a) => a.fold_vars(leaf),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.fold_vars(leaf).max(b.fold_vars(leaf))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Op(c) => write!(f, "'{c}'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
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
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError { message: format!("malformed number '{text}'"), offset: start })?;
            out.push(Token { kind: TokenKind::Number(v), offset: start });
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { kind: TokenKind::Ident(src[start..i].to_string()), offset: start });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                _ => return Err(ExprError { message: format!("unexpected character '{c}'"), offset: start }),
            };
            out.push(Token { kind, offset: start });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Op(c), .. }) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_at(&self, offset: usize, message: String) -> ExprError {
        ExprError { message, offset }
    }

    fn expr<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = fold(Expr::Add(Box::new(lhs), Box::new(self.term()?)));
            } else if self.eat_op('-') {
                lhs = fold(Expr::Sub(Box::new(lhs), Box::new(self.term()?)));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = fold(Expr::Mul(Box::new(lhs), Box::new(self.unary()?)));
            } else if self.eat_op('/') {
                lhs = fold(Expr::Div(Box::new(lhs), Box::new(self.unary()?)));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        if self.eat_op('-') {
            return Ok(fold(Expr::Neg(Box::new(self.unary()?))));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let exponent: Expr<T> = self.unary()?;
        Ok(match exponent.as_constant() {
            Some(p) => {
                let pf = p.to_f64_lossy();
                if pf.fract() == 0.0 && pf.abs() <= 64.0 {
                    fold(Expr::PowI(Box::new(base), pf as i32))
                } else {
                    fold(Expr::PowC(Box::new(base), p))
                }
            }
            None => Expr::Pow(Box::new(base), Box::new(exponent)),
        })
    }

    fn atom<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let end = self.end;
        let tok = self.next().ok_or_else(|| ExprError { message: "unexpected end of expression".into(), offset: end })?;
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Const(T::lit(v))),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect_rparen(tok.offset)?;
                Ok(e)
            }
            TokenKind::Ident(name) => self.ident(name, tok.offset),
            other => Err(self.error_at(tok.offset, format!("unexpected {other}"))),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), ExprError> {
        match self.next() {
            Some(Token { kind: TokenKind::RParen, .. }) => Ok(()),
            _ => Err(self.error_at(open, "unbalanced parenthesis".into())),
        }
    }

    fn ident<T: Real>(&mut self, name: String, offset: usize) -> Result<Expr<T>, ExprError> {
        if name == "pi" {
            return Ok(Expr::Const(T::PI()));
        }
        if let Some(func) = Func::from_name(&name) {
            match self.next() {
                Some(Token { kind: TokenKind::LParen, offset: open }) => {
                    let arg = self.expr()?;
                    self.expect_rparen(open)?;
                    return Ok(fold(Expr::Call(func, Box::new(arg))));
                }
                _ => return Err(self.error_at(offset, format!("function '{name}' needs an argument in parentheses"))),
            }
        }
        let (head, index) = name.split_at(1);
        if let (Some(var @ ('x' | 'y')), Ok(k)) = (head.chars().next(), index.parse::<usize>()) {
            if k >= 1 {
                return Ok(if var == 'x' { Expr::X(k - 1) } else { Expr::Y(k - 1) });
            }
        }
        Err(self.error_at(offset, format!("unknown identifier '{name}'")))
    }
}

/// Collapses nodes whose operands are all constants.
fn fold<T: Real>(e: Expr<T>) -> Expr<T> {
    let all_const = match &e {
        Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowC(a, _) | Expr::Call(_, a) => a.as_constant().is_some(),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            a.as_constant().is_some() && b.as_constant().is_some()
        }
        _ => false,
    };
    if all_const {
        Expr::Const(e.eval::<T>(&[], &[]))
    } else {
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Dual;

    fn ev(src: &str, x: &[f64], y: &[f64]) -> f64 {
        Expr::<f64>::parse(src).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("(1 + 2) * 3 - 4 / 2", &[], &[]), 7.0);
        assert_eq!(ev("8 / 2 / 2", &[], &[]), 2.0);
        assert_eq!(ev("1.5e1 + 2E-1", &[], &[]), 15.2);
    }

    #[test]
    fn variables_and_functions() {
        let v = ev("sin(x1) * y2 + sqrt(y1^2 + y2^2) + exp(0) + ln(1)", &[0.5], &[3.0, 4.0]);
        assert!((v - (0.5f64.sin() * 4.0 + 5.0 + 1.0)).abs() < 1e-15);
        assert!((ev("2*pi", &[], &[]) - std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn constant_subtrees_fold() {
        let e = Expr::<f64>::parse("4/(1+1)^2 * x1").unwrap();
        match e {
            Expr::Mul(a, _) => assert_eq!(a.as_constant(), Some(1.0)),
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn fractional_and_variable_powers() {
        assert!((ev("(y1^4 + y2^4)^0.25", &[], &[1.0, 1.0]) - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((ev("x1^x2", &[2.0, 3.0], &[]) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_through_expression() {
        let e = Expr::<f64>::parse("x1^3 * cos(x1)").unwrap();
        let d = e.eval(&[Dual::variable(0.9)], &[]);
        let exact = 3.0 * 0.81 * 0.9f64.cos() - 0.729 * 0.9f64.sin();
        assert!((d.eps - exact).abs() < 1e-14);
    }

    #[test]
    fn variable_indices() {
        let e = Expr::<f64>::parse("x3 + y2").unwrap();
        assert_eq!(e.max_x_index(), 3);
        assert_eq!(e.max_y_index(), 2);
    }

    #[test]
    fn errors_carry_offsets() {
        let err = Expr::<f64>::parse("1 + foo").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(Expr::<f64>::parse("(1 + 2").is_err());
        assert!(Expr::<f64>::parse("1 +").is_err());
        assert!(Expr::<f64>::parse("sin 1").is_err());
        assert!(Expr::<f64>::parse("x0").is_err());
        assert!(Expr::<f64>::parse("2 $ 3").is_err());
        assert!(Expr::<f64>::parse("1 2").is_err());
    }
}
