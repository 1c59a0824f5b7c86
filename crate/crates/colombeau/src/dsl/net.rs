//! Evaluator backing function nets built from expressions: symbolic
//! derivatives of any order, cached per (component, variable path).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::domain_eval_error;
use crate::error::GfError;
use crate::eps::EpsGrid;
use crate::geom::BoxDomain;
use crate::gf::{EpsMap, EpsVal, FunctionNet};

use super::ast::{Expr, Signature, Var};
use super::deriv::differentiate;
use super::eval::{eval, EvalEnv};

/// How the input axes of a net map onto expression variables.
///
/// An RHS family F_ε(t, x, p) uses `[T, X(0).., P(0)..]`; a purely spatial
/// net (no time slot) uses `[X(0)..]`, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct VarLayout(pub Vec<Var>);

impl VarLayout {
    pub fn t_x(n: usize) -> Self {
        let mut v = vec![Var::T];
        v.extend((0..n).map(Var::X));
        VarLayout(v)
    }

    pub fn t_x_p(n: usize, l: usize) -> Self {
        let mut v = vec![Var::T];
        v.extend((0..n).map(Var::X));
        v.extend((0..l).map(Var::P));
        VarLayout(v)
    }

    pub fn x_only(n: usize) -> Self {
        VarLayout((0..n).map(Var::X).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Map from a packed input slice to an evaluation environment.
fn env_from<'a>(layout: &VarLayout, x: &[f64], scratch: &'a mut (Vec<f64>, Vec<f64>), eps: f64) -> EvalEnv<'a> {
    let (xs, ps) = scratch;
    xs.clear();
    ps.clear();
    let mut t = 0.0;
    // sized by the largest index present
    let mut n = 0;
    let mut l = 0;
    for v in &layout.0 {
        match v {
            Var::X(i) => n = n.max(i + 1),
            Var::P(i) => l = l.max(i + 1),
            _ => {}
        }
    }
    xs.resize(n, 0.0);
    ps.resize(l, 0.0);
    for (slot, v) in layout.0.iter().enumerate() {
        match v {
            Var::T => t = x[slot],
            Var::X(i) => xs[*i] = x[slot],
            Var::P(i) => ps[*i] = x[slot],
            Var::Eps => {}
        }
    }
    EvalEnv { t, x: xs, p: ps, eps }
}

/// Component expressions of a net with symbolic derivative access.
pub struct ExprMap {
    exprs: Vec<Arc<Expr>>,
    layout: VarLayout,
    cache: Mutex<HashMap<(usize, Vec<usize>), Arc<Expr>>>,
}

impl ExprMap {
    pub fn new(exprs: Vec<Arc<Expr>>, layout: VarLayout) -> Self {
        Self {
            exprs,
            layout,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn exprs(&self) -> &[Arc<Expr>] {
        &self.exprs
    }

    pub fn layout(&self) -> &VarLayout {
        &self.layout
    }

    fn derived(&self, comp: usize, alpha: &[usize]) -> Arc<Expr> {
        let key = (comp, alpha.to_vec());
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return e.clone();
        }
        let mut e = self.exprs[comp].clone();
        for (slot, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                e = differentiate(&e, self.layout.0[slot]);
            }
        }
        self.cache.lock().unwrap().insert(key, e.clone());
        e
    }
}

impl EpsMap for ExprMap {
    fn dim_in(&self) -> usize {
        self.layout.len()
    }

    fn dim_out(&self) -> usize {
        self.exprs.len()
    }

    fn eval(&self, eps: EpsVal, x: &[f64], out: &mut [f64]) -> Result<(), GfError> {
        let mut scratch = (Vec::new(), Vec::new());
        let env = env_from(&self.layout, x, &mut scratch, eps.eps);
        for (i, e) in self.exprs.iter().enumerate() {
            out[i] = eval(e, &env).map_err(|err| domain_eval_error(eps.eps, x, err))?;
        }
        Ok(())
    }

    fn partial(&self, eps: EpsVal, x: &[f64], var: usize, out: &mut [f64]) -> Result<(), GfError> {
        let mut alpha = vec![0usize; self.layout.len()];
        alpha[var] = 1;
        self.partial_multi(eps, x, &alpha, out)
    }

    fn partial_multi(
        &self,
        eps: EpsVal,
        x: &[f64],
        alpha: &[usize],
        out: &mut [f64],
    ) -> Result<(), GfError> {
        let mut scratch = (Vec::new(), Vec::new());
        let env = env_from(&self.layout, x, &mut scratch, eps.eps);
        for i in 0..self.exprs.len() {
            let d = self.derived(i, alpha);
            out[i] = eval(&d, &env).map_err(|err| domain_eval_error(eps.eps, x, err))?;
        }
        Ok(())
    }
}

/// Build a function net from component expressions, validating evaluation on
/// a coarse lattice of the domain for every active ε. Failures surface as
/// domain-evaluation errors carrying ε and the offending location.
pub fn to_function_net(
    exprs: Vec<Arc<Expr>>,
    layout: VarLayout,
    grid: EpsGrid,
    domain: BoxDomain,
) -> Result<FunctionNet, GfError> {
    let map = Arc::new(ExprMap::new(exprs, layout));
    let net = FunctionNet::new(grid, domain, map)?;
    let probe: Vec<Vec<f64>> = net.domain().lattice(9.min(net.domain().dim() * 4 + 5)).collect();
    for (index, _) in net.grid().active() {
        for x in &probe {
            net.value(index, x)?;
        }
    }
    Ok(net)
}

/// Parse-and-build convenience for a single scalar RHS F(t, x1..xn, p1..pl).
pub fn rhs_net_from_sources(
    sources: &[&str],
    sig: Signature,
    grid: EpsGrid,
    domain: BoxDomain,
) -> Result<FunctionNet, GfError> {
    let exprs = sources
        .iter()
        .map(|s| super::parse::parse(s, sig))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| GfError::DomainEvaluation {
            eps: f64::NAN,
            location: vec![],
            reason: e.to_string(),
        })?;
    to_function_net(
        exprs,
        VarLayout::t_x_p(sig.n_state, sig.n_param),
        grid,
        domain,
    )
}
