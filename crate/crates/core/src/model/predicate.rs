use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EQ_TOLERANCE;

/// Boolean trigger over a component's input ports and dynamic comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Predicate {
    True,
    False,
    PortRef(String),
    DynCompare {
        dynamic: String,
        op: CompareOp,
        value: f64,
    },
    Not(Box<Predicate>),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unresolved port `{0}`")]
    UnknownPort(String),
    #[error("unresolved dynamic `{0}`")]
    UnknownDynamic(String),
}

impl CompareOp {
    pub fn apply(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
            CompareOp::Eq => (lhs - rhs).abs() <= EQ_TOLERANCE,
            CompareOp::Ne => (lhs - rhs).abs() > EQ_TOLERANCE,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<" => CompareOp::Lt,
            "<=" => CompareOp::Le,
            ">" => CompareOp::Gt,
            ">=" => CompareOp::Ge,
            "==" => CompareOp::Eq,
            "!=" => CompareOp::Ne,
            _ => return None,
        })
    }
}

impl Predicate {
    pub fn port(name: impl Into<String>) -> Self {
        Predicate::PortRef(name.into())
    }

    pub fn compare(dynamic: impl Into<String>, op: CompareOp, value: f64) -> Self {
        Predicate::DynCompare {
            dynamic: dynamic.into(),
            op,
            value,
        }
    }

    pub fn negate(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    pub fn evaluate(
        &self,
        ports: &dyn Fn(&str) -> Option<bool>,
        dynamics: &dyn Fn(&str) -> Option<f64>,
    ) -> Result<bool, EvalError> {
        Ok(match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::PortRef(p) => ports(p).ok_or_else(|| EvalError::UnknownPort(p.clone()))?,
            Predicate::DynCompare { dynamic, op, value } => {
                let v = dynamics(dynamic)
                    .ok_or_else(|| EvalError::UnknownDynamic(dynamic.clone()))?;
                op.apply(v, *value)
            }
            Predicate::Not(inner) => !inner.evaluate(ports, dynamics)?,
            // No short-circuit: unresolved names surface regardless of order.
            Predicate::And(children) => {
                let mut all = true;
                for c in children {
                    all &= c.evaluate(ports, dynamics)?;
                }
                all
            }
            Predicate::Or(children) => {
                let mut any = false;
                for c in children {
                    any |= c.evaluate(ports, dynamics)?;
                }
                any
            }
        })
    }

    /// Port references, in traversal order.
    pub fn ports(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Predicate::PortRef(name) = p {
                out.push(name.as_str());
            }
        });
        out
    }

    /// Dynamics read by comparisons, in traversal order.
    pub fn dynamics(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Predicate::DynCompare { dynamic, .. } = p {
                out.push(dynamic.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Predicate)) {
        f(self);
        match self {
            Predicate::Not(inner) => inner.walk(f),
            Predicate::And(cs) | Predicate::Or(cs) => cs.iter().for_each(|c| c.walk(f)),
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(cs) if cs.len() > 1 => 1,
            Predicate::And(cs) if cs.len() > 1 => 2,
            _ => 3,
        }
    }
}

/// Renders in the modeling-language syntax; the output re-parses to an
/// equal predicate.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, c: &Predicate, min_prec: u8| {
            if c.precedence() <= min_prec {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            Predicate::True => f.write_str("true"),
            Predicate::False => f.write_str("false"),
            Predicate::PortRef(p) => f.write_str(p),
            Predicate::DynCompare { dynamic, op, value } => {
                write!(f, "{dynamic} {} {value}", op.symbol())
            }
            Predicate::Not(inner) => {
                f.write_str("not ")?;
                child(f, inner, 2)
            }
            // Empty and singleton junctions have no infix form; they are
            // written with a function-style keyword.
            Predicate::And(cs) if cs.len() < 2 => write_junction(f, "all", cs),
            Predicate::Or(cs) if cs.len() < 2 => write_junction(f, "any", cs),
            Predicate::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    child(f, c, 2)?;
                }
                Ok(())
            }
            Predicate::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" or ")?;
                    }
                    child(f, c, 1)?;
                }
                Ok(())
            }
        }
    }
}

fn write_junction(f: &mut fmt::Formatter<'_>, kw: &str, cs: &[Predicate]) -> fmt::Result {
    write!(f, "{kw}(")?;
    if let Some(c) = cs.first() {
        write!(f, "{c}")?;
    }
    f.write_str(")")
}
