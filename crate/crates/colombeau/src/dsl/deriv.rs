//! Symbolic differentiation. Every node has a total rule, so this never
//! fails; smart constructors keep the derivative trees compact.

use std::sync::Arc;

use super::ast::{Expr, ExprKind, Var};

/// d e / d var. `var` may be any signature variable or `eps`.
pub fn differentiate(e: &Arc<Expr>, var: Var) -> Arc<Expr> {
    use ExprKind::*;
    match &e.kind {
        Num(_) => Expr::num(0.0),
        Var(v) => Expr::num(if *v == var { 1.0 } else { 0.0 }),
        // log(1/eps) = -log(eps)
        LogEps => {
            if var == self::Var::Eps {
                Expr::neg(Expr::div(Expr::num(1.0), Expr::var(self::Var::Eps)))
            } else {
                Expr::num(0.0)
            }
        }
        Neg(a) => Expr::neg(differentiate(a, var)),
        Add(a, b) => Expr::add(differentiate(a, var), differentiate(b, var)),
        Sub(a, b) => Expr::sub(differentiate(a, var), differentiate(b, var)),
        Mul(a, b) => Expr::add(
            Expr::mul(differentiate(a, var), b.clone()),
            Expr::mul(a.clone(), differentiate(b, var)),
        ),
        Div(a, b) => Expr::sub(
            Expr::div(differentiate(a, var), b.clone()),
            Expr::div(
                Expr::mul(a.clone(), differentiate(b, var)),
                Expr::pow(b.clone(), 2),
            ),
        ),
        Pow(a, n) => Expr::mul(
            Expr::mul(Expr::num(*n as f64), Expr::pow(a.clone(), n - 1)),
            differentiate(a, var),
        ),
        Exp(a) => Expr::mul(
            Arc::new(Expr::new(Exp(a.clone()), e.span)),
            differentiate(a, var),
        ),
        Log(a) => Expr::div(differentiate(a, var), a.clone()),
        Sin(a) => Expr::mul(
            Arc::new(Expr::new(Cos(a.clone()), e.span)),
            differentiate(a, var),
        ),
        Cos(a) => Expr::neg(Expr::mul(
            Arc::new(Expr::new(Sin(a.clone()), e.span)),
            differentiate(a, var),
        )),
        Atan(a) => Expr::div(
            differentiate(a, var),
            Expr::add(Expr::num(1.0), Expr::pow(a.clone(), 2)),
        ),
        Sqrt(a) => Expr::div(
            differentiate(a, var),
            Expr::mul(Expr::num(2.0), Arc::new(Expr::new(Sqrt(a.clone()), e.span))),
        ),
        // d sqrt(a² + τ²) = a·a' / abs_smooth(a, τ)
        AbsSmooth(a, tau) => Expr::div(
            Expr::mul(a.clone(), differentiate(a, var)),
            Arc::new(Expr::new(AbsSmooth(a.clone(), *tau), e.span)),
        ),
        // d R(a/ε) = ε^{-1} ρ(a/ε) · a'   (plus the ε-slot term when var = eps)
        HeavisideMollified(a) => {
            let md0 = Arc::new(Expr::new(MollifierDeriv(a.clone(), 0), e.span));
            let chain = Expr::mul(md0, differentiate(a, var));
            if var == self::Var::Eps {
                // ∂/∂ε R(a/ε) = ρ(a/ε)·(a'ε - a)/ε² = MD0·(a' - a/ε)
                let md0 = Arc::new(Expr::new(MollifierDeriv(a.clone(), 0), e.span));
                Expr::mul(
                    md0,
                    Expr::sub(
                        differentiate(a, var),
                        Expr::div(a.clone(), Expr::var(self::Var::Eps)),
                    ),
                )
            } else {
                chain
            }
        }
        // d [ε^{-(k+1)} ρ^{(k)}(a/ε)] = ε^{-(k+2)} ρ^{(k+1)}(a/ε) · a'
        MollifierDeriv(a, k) => {
            let next = Arc::new(Expr::new(MollifierDeriv(a.clone(), k + 1), e.span));
            if var == self::Var::Eps {
                let this = Arc::new(Expr::new(MollifierDeriv(a.clone(), *k), e.span));
                let eps = Expr::var(self::Var::Eps);
                // -(k+1)/ε · MD_k + MD_{k+1} · (a' - a/ε)
                Expr::add(
                    Expr::mul(
                        Expr::div(Expr::num(-((*k as f64) + 1.0)), eps.clone()),
                        this,
                    ),
                    Expr::mul(
                        next,
                        Expr::sub(differentiate(a, var), Expr::div(a.clone(), eps)),
                    ),
                )
            } else {
                Expr::mul(next, differentiate(a, var))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ast::Signature;
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn linear_family_derivative() {
        // d/dx1 of x1/eps = 1/eps
        let e = parse("x1/eps", Signature::new(1, 0)).unwrap();
        let d = differentiate(&e, Var::X(0));
        let expected = parse("1/eps", Signature::new(1, 0)).unwrap();
        assert_eq!(*d, *expected);
    }

    #[test]
    fn heaviside_time_derivative_is_scaled_mollifier() {
        let e = parse("HeavisideMollified(t)", Signature::new(1, 0)).unwrap();
        let d = differentiate(&e, Var::T);
        let expected = parse("MollifierScaled(t)", Signature::new(1, 0)).unwrap();
        assert_eq!(*d, *expected);
    }

    #[test]
    fn derivative_of_constant_in_wrong_slot_vanishes() {
        let e = parse("sin(t) + 3", Signature::new(1, 0)).unwrap();
        let d = differentiate(&e, Var::X(0));
        assert!(d.is_zero());
    }

    #[test]
    fn mollifier_chain_increments_order() {
        let e = parse("MollifierScaled(t)", Signature::new(1, 0)).unwrap();
        let d = differentiate(&e, Var::T);
        match &d.kind {
            ExprKind::MollifierDeriv(_, 1) => {}
            other => panic!("expected MollifierDeriv order 1, got {other:?}"),
        }
    }
}
