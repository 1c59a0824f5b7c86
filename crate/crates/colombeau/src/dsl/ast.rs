//! Expression trees for RHS families F_ε(t, x, p).
//!
//! Every node has a total symbolic derivative rule; there are no
//! conditionals, so differentiation never gets stuck. Nodes carry source
//! spans for diagnostics; equality is structural and ignores spans.

use std::fmt;
use std::sync::Arc;

/// Byte range into the source text (synthetic nodes use 0..0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn synthetic() -> Self {
        Self::default()
    }

    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Declared variable signature: state dimension n (x1..xn) and parameter
/// dimension l (p1..pl). `t` and `eps` are always available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub n_state: usize,
    pub n_param: usize,
}

impl Signature {
    pub fn new(n_state: usize, n_param: usize) -> Self {
        Self { n_state, n_param }
    }
}

/// A differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X(usize),
    P(usize),
    Eps,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::P(i) => write!(f, "p{}", i + 1),
            Var::Eps => write!(f, "eps"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    /// log(1/eps)
    LogEps,
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Power by an integer exponent.
    Pow(Arc<Expr>, i32),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Atan(Arc<Expr>),
    Sqrt(Arc<Expr>),
    /// sqrt(e² + τ²), a smooth |e|.
    AbsSmooth(Arc<Expr>, f64),
    /// H_ε(e): the mollified Heaviside ramp R(e/ε).
    HeavisideMollified(Arc<Expr>),
    /// ε^{-(k+1)} ρ^{(k)}(e/ε); k = 0 is the scaled mollifier itself.
    MollifierDeriv(Arc<Expr>, u32),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    /// Structural equality modulo spans.
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Num(a), Num(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Var(a), Var(b)) => a == b,
            (LogEps, LogEps) => true,
            (Neg(a), Neg(b))
            | (Exp(a), Exp(b))
            | (Log(a), Log(b))
            | (Sin(a), Sin(b))
            | (Cos(a), Cos(b))
            | (Atan(a), Atan(b))
            | (Sqrt(a), Sqrt(b))
            | (HeavisideMollified(a), HeavisideMollified(b)) => a == b,
            (Add(a1, a2), Add(b1, b2))
            | (Sub(a1, a2), Sub(b1, b2))
            | (Mul(a1, a2), Mul(b1, b2))
            | (Div(a1, a2), Div(b1, b2)) => a1 == b1 && a2 == b2,
            (Pow(a, n), Pow(b, m)) => n == m && a == b,
            (AbsSmooth(a, ta), AbsSmooth(b, tb)) => ta == tb && a == b,
            (MollifierDeriv(a, ka), MollifierDeriv(b, kb)) => ka == kb && a == b,
            _ => false,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn num(v: f64) -> Arc<Expr> {
        Arc::new(Expr::new(ExprKind::Num(v), Span::synthetic()))
    }

    pub fn var(v: Var) -> Arc<Expr> {
        Arc::new(Expr::new(ExprKind::Var(v), Span::synthetic()))
    }

    fn as_num(&self) -> Option<f64> {
        match self.kind {
            ExprKind::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ExprKind::Num(v) if v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind, ExprKind::Num(v) if v == 1.0)
    }

    // Smart constructors with constant folding and identity elimination,
    // used by the differentiator to keep derivative trees small.

    pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x + y);
        }
        Arc::new(Expr::new(ExprKind::Add(a, b), Span::synthetic()))
    }

    pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x - y);
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Arc::new(Expr::new(ExprKind::Sub(a, b), Span::synthetic()))
    }

    pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        if a.is_zero() || b.is_zero() {
            return Expr::num(0.0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return Expr::num(x * y);
        }
        Arc::new(Expr::new(ExprKind::Mul(a, b), Span::synthetic()))
    }

    pub fn div(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
        if a.is_zero() {
            return a;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if y != 0.0 {
                return Expr::num(x / y);
            }
        }
        Arc::new(Expr::new(ExprKind::Div(a, b), Span::synthetic()))
    }

    pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
        if let Some(x) = a.as_num() {
            return Expr::num(-x);
        }
        if let ExprKind::Neg(inner) = &a.kind {
            return inner.clone();
        }
        Arc::new(Expr::new(ExprKind::Neg(a), Span::synthetic()))
    }

    pub fn pow(a: Arc<Expr>, n: i32) -> Arc<Expr> {
        match n {
            0 => Expr::num(1.0),
            1 => a,
            _ => {
                if let Some(x) = a.as_num() {
                    return Expr::num(x.powi(n));
                }
                Arc::new(Expr::new(ExprKind::Pow(a, n), Span::synthetic()))
            }
        }
    }

    pub fn unary(kind: fn(Arc<Expr>) -> ExprKind, a: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::new(kind(a), Span::synthetic()))
    }

    /// Free variables of the expression.
    pub fn free_vars(&self, out: &mut std::collections::HashSet<Var>) {
        use ExprKind::*;
        match &self.kind {
            Num(_) => {}
            Var(v) => {
                out.insert(*v);
            }
            LogEps => {
                out.insert(self::Var::Eps);
            }
            Neg(a) | Exp(a) | Log(a) | Sin(a) | Cos(a) | Atan(a) | Sqrt(a) | AbsSmooth(a, _)
            | Pow(a, _) => a.free_vars(out),
            HeavisideMollified(a) | MollifierDeriv(a, _) => {
                out.insert(self::Var::Eps);
                a.free_vars(out);
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut set = std::collections::HashSet::new();
        self.free_vars(&mut set);
        set.contains(&v)
    }
}

// Precedence levels for printing: addition 1, multiplication 2, unary minus
// 3, power 4, atoms 5. A negative literal prints with a leading minus, so it
// carries unary-minus precedence.
fn level(e: &Expr) -> u8 {
    use ExprKind::*;
    match &e.kind {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(..) => 3,
        Num(v) if v.is_sign_negative() => 3,
        Pow(..) => 4,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExprKind::*;
        match &self.kind {
            Num(v) => write!(f, "{v:?}"),
            Var(v) => write!(f, "{v}"),
            LogEps => write!(f, "LogEps"),
            Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " * ")?;
                write_child(f, b, 3)
            }
            Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " / ")?;
                write_child(f, b, 3)
            }
            Pow(a, n) => {
                write_child(f, a, 5)?;
                write!(f, "^{n}")
            }
            Exp(a) => write!(f, "exp({a})"),
            Log(a) => write!(f, "log({a})"),
            Sin(a) => write!(f, "sin({a})"),
            Cos(a) => write!(f, "cos({a})"),
            Atan(a) => write!(f, "atan({a})"),
            Sqrt(a) => write!(f, "sqrt({a})"),
            AbsSmooth(a, tau) => write!(f, "abs_smooth({a}, {tau:?})"),
            HeavisideMollified(a) => write!(f, "HeavisideMollified({a})"),
            MollifierDeriv(a, 0) => write!(f, "MollifierScaled({a})"),
            MollifierDeriv(a, k) => write!(f, "MollifierDeriv({a}, {k})"),
        }
    }
}
