//! Closed-form signals: arithmetic over the time variable `t`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Time,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Min,
    Max,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Sin | Func::Cos | Func::Exp => 1,
            Func::Min | Func::Max => 2,
        }
    }
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("division by zero at t={t}")]
    DivisionByZero { t: f64 },
}

/// Syntax error with a byte offset into the expression source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprParseError {
    pub offset: usize,
    pub len: usize,
    pub message: String,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprParseError> {
        let mut p = ExprParser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected trailing input", 1));
        }
        Ok(e)
    }

    pub fn eval(&self, t: f64) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Time => t,
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(t)?;
                let b = b.eval(t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(ExprError::DivisionByZero { t }),
                    BinOp::Div => a / b,
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Min => x.min(args[1].eval(t)?),
                    Func::Max => x.max(args[1].eval(t)?),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Time => f.write_str("t"),
            // `-3` re-parses as a negative literal, so a negated literal
            // keeps its parentheses.
            Expr::Neg(e) if e.precedence() < 3 || matches!(**e, Expr::Num(_)) => write!(f, "-({e})"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str, len: usize) -> ExprParseError {
        ExprParseError {
            offset: self.pos,
            len: len.min(self.src.len().saturating_sub(self.pos)).max(1),
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprParseError> {
        if self.eat('-') {
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Ok(Expr::Num(-self.number()?));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn number(&mut self) -> Result<f64, ExprParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            let frac = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if frac == self.pos {
                self.pos = frac;
                return Err(self.error("expected digits after decimal point", 1));
            }
        }
        Ok(self.src[start..self.pos].parse().expect("digits parse as f64"))
    }

    fn primary(&mut self) -> Result<Expr, ExprParseError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of expression", 1));
        };
        if c.is_ascii_digit() {
            return Ok(Expr::Num(self.number()?));
        }
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                self.skip_ws();
                return Err(self.error("expected `)`", 1));
            }
            return Ok(e);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            match name {
                "t" => return Ok(Expr::Time),
                "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                _ => {}
            }
            let Some(func) = Func::from_name(name) else {
                self.pos = start;
                return Err(self.error(&format!("unknown identifier `{name}`"), name.len()));
            };
            if !self.eat('(') {
                return Err(self.error(&format!("expected `(` after `{name}`"), 1));
            }
            let mut args = vec![self.expr()?];
            while self.eat(',') {
                args.push(self.expr()?);
            }
            if !self.eat(')') {
                self.skip_ws();
                return Err(self.error("expected `)`", 1));
            }
            if args.len() != func.arity() {
                self.pos = start;
                return Err(self.error(
                    &format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                    name.len(),
                ));
            }
            return Ok(Expr::Call(func, args));
        }
        Err(self.error(&format!("unexpected `{c}`"), 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_ramp() {
        let e = Expr::parse("20 + 0.5*t").unwrap();
        assert_eq!(e.eval(40.0).unwrap(), 40.0);
    }

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("max(1, 2) * -3 + sin(0) - (4 - 2) / 2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), -7.0);
    }

    #[test]
    fn division_by_zero() {
        let e = Expr::parse("1 / (t - 2)").unwrap();
        assert_eq!(e.eval(2.0), Err(ExprError::DivisionByZero { t: 2.0 }));
    }

    #[test]
    fn errors_point_at_token() {
        let err = Expr::parse("20 + foo").unwrap_err();
        assert_eq!((err.offset, err.len), (5, 3));
        let err = Expr::parse("1e3").unwrap_err();
        assert_eq!(err.offset, 1);
        assert!(Expr::parse("min(1)").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-1000.0..1000.0f64).prop_map(Expr::Num),
            Just(Expr::Time),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)], inner.clone())
                    .prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (prop_oneof![Just(Func::Min), Just(Func::Max)], inner.clone(), inner)
                    .prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_tree(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(Expr::parse(&text).unwrap(), e, "{}", text);
        }
    }
}
