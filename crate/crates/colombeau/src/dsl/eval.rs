//! Expression evaluation with domain-failure reporting.

use crate::error::DslError;

use super::ast::{Expr, ExprKind, Var};
use super::mollifier::std_mollifier;

/// Values bound to the signature variables for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalEnv<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub p: &'a [f64],
    pub eps: f64,
}

impl<'a> EvalEnv<'a> {
    pub fn var(&self, v: Var) -> f64 {
        match v {
            Var::T => self.t,
            Var::X(i) => self.x[i],
            Var::P(i) => self.p[i],
            Var::Eps => self.eps,
        }
    }
}

pub fn eval(e: &Expr, env: &EvalEnv<'_>) -> Result<f64, DslError> {
    let v = eval_inner(e, env)?;
    if !v.is_finite() {
        return Err(DslError::Eval {
            reason: format!("non-finite value {v} from `{e}`"),
        });
    }
    Ok(v)
}

fn eval_inner(e: &Expr, env: &EvalEnv<'_>) -> Result<f64, DslError> {
    use ExprKind::*;
    Ok(match &e.kind {
        Num(v) => *v,
        Var(v) => env.var(*v),
        LogEps => (1.0 / env.eps).ln(),
        Neg(a) => -eval_inner(a, env)?,
        Add(a, b) => eval_inner(a, env)? + eval_inner(b, env)?,
        Sub(a, b) => eval_inner(a, env)? - eval_inner(b, env)?,
        Mul(a, b) => eval_inner(a, env)? * eval_inner(b, env)?,
        Div(a, b) => {
            let den = eval_inner(b, env)?;
            if den == 0.0 {
                return Err(DslError::Eval {
                    reason: "division by zero".into(),
                });
            }
            eval_inner(a, env)? / den
        }
        Pow(a, n) => {
            let base = eval_inner(a, env)?;
            if base == 0.0 && *n < 0 {
                return Err(DslError::Eval {
                    reason: "zero raised to a negative power".into(),
                });
            }
            base.powi(*n)
        }
        Exp(a) => eval_inner(a, env)?.exp(),
        Log(a) => {
            let v = eval_inner(a, env)?;
            if v <= 0.0 {
                return Err(DslError::Eval {
                    reason: format!("log of non-positive value {v}"),
                });
            }
            v.ln()
        }
        Sin(a) => eval_inner(a, env)?.sin(),
        Cos(a) => eval_inner(a, env)?.cos(),
        Atan(a) => eval_inner(a, env)?.atan(),
        Sqrt(a) => {
            let v = eval_inner(a, env)?;
            if v < 0.0 {
                return Err(DslError::Eval {
                    reason: format!("sqrt of negative value {v}"),
                });
            }
            v.sqrt()
        }
        AbsSmooth(a, tau) => {
            let v = eval_inner(a, env)?;
            (v * v + tau * tau).sqrt()
        }
        HeavisideMollified(a) => {
            let v = eval_inner(a, env)?;
            std_mollifier().ramp(v / env.eps)
        }
        MollifierDeriv(a, k) => {
            let v = eval_inner(a, env)?;
            let m = std_mollifier();
            m.rho_deriv(v / env.eps, *k) * env.eps.powi(-(*k as i32) - 1)
        }
    })
}
