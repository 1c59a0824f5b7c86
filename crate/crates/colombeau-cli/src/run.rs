//! Scenario execution: certify → solve → diagnose, with report and table
//! emission and the exit-code contract (0 verdict success, 2 hypothesis
//! failure, 1 internal error).

use std::path::Path;

use serde_json::json;

use colombeau::dsl::{parse, to_function_net, Signature, VarLayout};
use colombeau::eps::EpsGrid;
use colombeau::frobenius::{
    certify_frobenius, check_integrability, k_net_residual, solve_total, FrobeniusProblem,
};
use colombeau::gf::FunctionNet;
use colombeau::ivp::{
    certify_hypotheses, escape_time, solve_generalized, HypothesisCertificate, IvpProblem, Method,
    SolveOptions,
};
use colombeau::param::{
    certify_with_parameters, default_p_lattice, sensitivity_residual, solve_with_initial_data,
    solve_with_parameters, ParamIvpProblem,
};
use colombeau::SolveError;

use crate::config::{box_from_rows, eps_expr_net, ConfigError, Scenario, ScenarioKind};
use crate::report::{emit, OutputFormat, Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn is_hypothesis_failure(e: &SolveError) -> bool {
    matches!(
        e,
        SolveError::UnboundedRhs { .. }
            | SolveError::MissingLogBound
            | SolveError::IntegrabilityRejected { .. }
            | SolveError::NonUniformBound { .. }
    )
}

pub struct Overrides {
    pub grid: Option<(u32, u32)>,
    pub method: Option<Method>,
}

fn effective_grid(sc: &Scenario, ov: &Overrides) -> Result<EpsGrid, ConfigError> {
    match ov.grid {
        Some((k0, k1)) => {
            EpsGrid::geometric(k0, k1, sc.grid.eps0).map_err(|e| ConfigError::Field {
                field: "--grid".into(),
                msg: e.to_string(),
            })
        }
        None => sc.grid(),
    }
}

fn effective_options(sc: &Scenario, ov: &Overrides) -> Result<SolveOptions, ConfigError> {
    let method = match ov.method {
        Some(m) => m,
        None => sc.method()?,
    };
    Ok(SolveOptions {
        method,
        ..Default::default()
    })
}

pub fn build_ivp(sc: &Scenario, grid: &EpsGrid) -> Result<IvpProblem, RunError> {
    let g = &sc.geometry;
    let ti = g.t_interval.unwrap();
    let i_box = box_from_rows(&[[ti[0], ti[1]]], "geometry.t_interval")?;
    let u_box = box_from_rows(g.state_box.as_ref().unwrap(), "geometry.state_box")?;
    let domain = i_box.product(&u_box);
    let n = u_box.dim();
    let sig = Signature::new(n, 0);
    let exprs = sc
        .rhs
        .exprs
        .iter()
        .map(|s| {
            parse(s, sig).map_err(|e| {
                RunError::Config(ConfigError::Field {
                    field: "rhs.exprs".into(),
                    msg: e.to_string(),
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f = to_function_net(exprs, VarLayout::t_x(n), grid.clone(), domain)
        .map_err(SolveError::Gf)?;
    let t0 = eps_expr_net(
        std::slice::from_ref(g.t0.as_ref().unwrap()),
        grid,
        "geometry.t0",
    )?;
    let x0 = eps_expr_net(g.x0.as_ref().unwrap(), grid, "geometry.x0")?;
    let l_box = box_from_rows(&g.l_box, "geometry.l_box")?;
    Ok(IvpProblem::new(f, t0, x0, g.alpha, l_box, g.beta)?)
}

pub fn build_param(sc: &Scenario, grid: &EpsGrid) -> Result<ParamIvpProblem, RunError> {
    let g = &sc.geometry;
    let ti = g.t_interval.unwrap();
    let i_box = box_from_rows(&[[ti[0], ti[1]]], "geometry.t_interval")?;
    let u_box = box_from_rows(g.state_box.as_ref().unwrap(), "geometry.state_box")?;
    let p_box = box_from_rows(g.p_box.as_ref().unwrap(), "geometry.p_box")?;
    let domain = i_box.product(&u_box).product(&p_box);
    let n = u_box.dim();
    let l = p_box.dim();
    let sig = Signature::new(n, l);
    let exprs = sc
        .rhs
        .exprs
        .iter()
        .map(|s| {
            parse(s, sig).map_err(|e| {
                RunError::Config(ConfigError::Field {
                    field: "rhs.exprs".into(),
                    msg: e.to_string(),
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f = to_function_net(exprs, VarLayout::t_x_p(n, l), grid.clone(), domain)
        .map_err(SolveError::Gf)?;
    let t0 = eps_expr_net(
        std::slice::from_ref(g.t0.as_ref().unwrap()),
        grid,
        "geometry.t0",
    )?;
    let x0 = eps_expr_net(g.x0.as_ref().unwrap(), grid, "geometry.x0")?;
    let l_box = box_from_rows(&g.l_box, "geometry.l_box")?;
    Ok(ParamIvpProblem::new(
        f, t0, x0, g.alpha, l_box, g.beta, p_box,
    )?)
}

pub fn build_frobenius(sc: &Scenario, grid: &EpsGrid) -> Result<FrobeniusProblem, RunError> {
    let g = &sc.geometry;
    let u_box = box_from_rows(g.u_box.as_ref().unwrap(), "geometry.u_box")?;
    let v_box = box_from_rows(g.v_box.as_ref().unwrap(), "geometry.v_box")?;
    let domain = u_box.product(&v_box);
    let n = sc.rhs.n.unwrap();
    let m = sc.rhs.m.unwrap();
    let sig = Signature::new(n + m, 0);
    let exprs = sc
        .rhs
        .exprs
        .iter()
        .map(|s| {
            parse(s, sig).map_err(|e| {
                RunError::Config(ConfigError::Field {
                    field: "rhs.exprs".into(),
                    msg: e.to_string(),
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f = to_function_net(exprs, VarLayout::x_only(n + m), grid.clone(), domain)
        .map_err(SolveError::Gf)?;
    let x0 = eps_expr_net(g.x0.as_ref().unwrap(), grid, "geometry.x0")?;
    let y0 = eps_expr_net(g.y0.as_ref().unwrap(), grid, "geometry.y0")?;
    let l_box = box_from_rows(&g.l_box, "geometry.l_box")?;
    Ok(FrobeniusProblem::new(
        f, n, m, x0, y0, g.alpha, l_box, g.beta,
    )?)
}

fn sup_table(name: &str, f: &FunctionNet, q: &colombeau::geom::BoxDomain) -> Result<Table, SolveError> {
    let net = colombeau::gf::sup_on_compact(f, q, &[])?;
    let mut t = Table::new(name, &["eps", "value"]);
    for (i, e) in net.grid().active() {
        t.push(vec![e, net.at(i)]);
    }
    Ok(t)
}

fn escape_table(prob: &IvpProblem, opts: &SolveOptions) -> Result<Table, SolveError> {
    let mut t = Table::new("escape_time", &["eps", "t_escape"]);
    for (idx, e) in prob.grid().active() {
        if let Some((t_star, _)) = escape_time(prob, idx, opts)? {
            t.push(vec![e, t_star]);
        }
    }
    Ok(t)
}

fn cert_details(cert: &HypothesisCertificate) -> serde_json::Value {
    serde_json::to_value(cert).unwrap_or(serde_json::Value::Null)
}

/// Certify-only pipeline (any kind). Exit 0 when the hypotheses certify.
pub fn certify_scenario(
    sc: &Scenario,
    out_dir: &Path,
    format: OutputFormat,
    ov: &Overrides,
) -> Result<i32, RunError> {
    let grid = effective_grid(sc, ov)?;
    let opts = effective_options(sc, ov)?;
    let mut report = Report::new(&sc.name, &sc.kind.to_string(), &sc.method);
    if !sc.description.is_empty() {
        report.note(sc.description.clone());
    }
    let mut tables = Vec::new();
    let mut exit = EXIT_OK;

    match sc.kind {
        ScenarioKind::Ivp => {
            let prob = build_ivp(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_box())?);
            match certify_hypotheses(&prob) {
                Ok(cert) => {
                    report.note(format!(
                        "uniform bound a = {} (sup {}), h = {}",
                        cert.a, cert.sup_measured, cert.h
                    ));
                    match cert.log_c1() {
                        Some(c1) => report.note(format!("log bound present, C1 = {c1}")),
                        None => report.note("no log bound; uniqueness not certified".to_string()),
                    }
                    report.details = cert_details(&cert);
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    tables.push(escape_table(&prob, &opts)?);
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
        ScenarioKind::IvpParam | ScenarioKind::IvpInitialFamily => {
            let prob = build_param(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_full())?);
            match certify_with_parameters(&prob) {
                Ok(cert) => {
                    report.note(format!("uniform bound a = {}, h = {}", cert.a, cert.h));
                    report.details = cert_details(&cert);
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
        ScenarioKind::Frobenius => {
            let prob = build_frobenius(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_box())?);
            match certify_frobenius(&prob) {
                Ok(cert) => {
                    report.note(format!(
                        "uniform bound a = {}, log C1 = {}, ray scale h = {}",
                        cert.a, cert.log_c1, cert.h
                    ));
                    report.details = serde_json::to_value(&cert).unwrap_or_default();
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    emit(out_dir, report, tables, format)?;
    Ok(exit)
}

fn solution_tables(
    sol: &colombeau::ivp::SolutionNet,
    requested_times: Option<&Vec<f64>>,
) -> Vec<Table> {
    let n = sol.base.codim();
    let mut cols = vec!["eps".to_string(), "t".to_string()];
    for i in 0..n {
        cols.push(format!("u{}", i + 1));
    }
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut solution = Table::new("solution", &col_refs);
    let (lo, hi) = sol.j_interval;
    for (idx, e) in sol.base.grid().active() {
        for i in 0..=32 {
            let t = lo + (hi - lo) * i as f64 / 32.0;
            let u = sol.value(idx, t);
            let mut row = vec![e, t];
            row.extend(u);
            solution.push(row);
        }
    }

    let mut at = Table::new("solution_at", &col_refs);
    if let Some(times) = requested_times {
        for (idx, e) in sol.base.grid().active() {
            for &t in times {
                if t <= lo || t >= hi {
                    continue;
                }
                let u = sol.value(idx, t);
                let mut row = vec![e, t];
                row.extend(u);
                at.push(row);
            }
        }
    }

    let mut residual = Table::new("residual", &["eps", "residual", "budget"]);
    for row in &sol.residual.rows {
        residual.push(vec![row.eps, row.residual, row.budget]);
    }
    let mut out = vec![solution, residual];
    if !at.rows.is_empty() {
        out.insert(1, at);
    }
    out
}

/// Full pipeline dispatched on the scenario kind.
pub fn run_scenario(
    sc: &Scenario,
    out_dir: &Path,
    format: OutputFormat,
    ov: &Overrides,
) -> Result<i32, RunError> {
    let grid = effective_grid(sc, ov)?;
    let opts = effective_options(sc, ov)?;
    let mut report = Report::new(&sc.name, &sc.kind.to_string(), &sc.method);
    let mut tables = Vec::new();
    let mut exit = EXIT_OK;

    match sc.kind {
        ScenarioKind::Ivp => {
            let prob = build_ivp(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_box())?);
            match certify_hypotheses(&prob) {
                Ok(cert) => {
                    let sol = solve_generalized(&prob, &cert, &opts)?;
                    report.note(format!(
                        "certified: a = {}, h = {}, J = ({}, {})",
                        cert.a, cert.h, cert.j_interval.0, cert.j_interval.1
                    ));
                    report.note(format!(
                        "moderateness: value {}, du/dt {}, d2u/dt2 {}",
                        sol.moderateness.value, sol.moderateness.dt1, sol.moderateness.dt2
                    ));
                    if !sol.moderateness.certified {
                        report.note("warning: moderateness uncertified".to_string());
                    }
                    report.note(format!(
                        "c-bound into W with margin {}",
                        sol.cbound.margin
                    ));
                    report.details = json!({
                        "certificate": cert_details(&cert),
                        "moderateness": serde_json::to_value(&sol.moderateness).unwrap_or_default(),
                        "cbound": serde_json::to_value(&sol.cbound).unwrap_or_default(),
                        "residual_ok": sol.residual.ok,
                    });
                    tables.extend(solution_tables(&sol, sc.output.solution_times.as_ref()));
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    if let SolveError::UnboundedRhs { growth } = &e {
                        report.details = json!({
                            "growth": serde_json::to_value(growth).unwrap_or_default(),
                        });
                    }
                    tables.push(escape_table(&prob, &opts)?);
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
        ScenarioKind::IvpParam => {
            let prob = build_param(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_full())?);
            match certify_with_parameters(&prob) {
                Ok(cert) => {
                    let lattice = default_p_lattice(&prob.p_box);
                    let sol = solve_with_parameters(&prob, &cert, &lattice, &opts)?;
                    report.note(format!("certified: a = {}, h = {}", cert.a, cert.h));
                    // sensitivity at the box centre
                    let center = prob.p_box.center();
                    if prob.l > 0 {
                        let sens = sensitivity_residual(&sol, &center, 0.8 * cert.h)?;
                        report.note(format!(
                            "sensitivity residual at the centre parameter: {}",
                            sens.max_residual
                        ));
                        let mut st = Table::new("sensitivity", &["eps", "residual"]);
                        for row in &sens.rows {
                            st.push(vec![row.eps, row.residual]);
                        }
                        tables.push(st);
                    }
                    let mut slice = Table::new("solution_slice", &["eps", "t", "u1"]);
                    let (lo, hi) = cert.j_interval;
                    for (idx, e) in sol.base.grid().active() {
                        for i in 0..=32 {
                            let t = lo + (hi - lo) * i as f64 / 32.0;
                            let u = sol.value(idx, &center, t)?;
                            slice.push(vec![e, t, u[0]]);
                        }
                    }
                    tables.push(slice);
                    report.details = cert_details(&cert);
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
        ScenarioKind::IvpInitialFamily => {
            let prob = build_param(sc, &grid)?;
            let h_target = sc.geometry.h_target.unwrap();
            match solve_with_initial_data(&prob, h_target, &opts) {
                Ok(fam) => {
                    report.note(format!(
                        "family constructed with constants {:?}",
                        fam.constants
                    ));
                    report.details = serde_json::to_value(&fam.constants).unwrap_or_default();
                    let idx = fam
                        .solution
                        .grid()
                        .active()
                        .map(|(i, _)| i)
                        .next()
                        .unwrap_or(0);
                    let mut t_fam = Table::new("family_values", &["t1", "x1", "t", "u1"]);
                    let (j1_lo, j1_hi) = fam.j1_interval;
                    let (j_lo, j_hi) = fam.j_interval;
                    let (u_lo, u_hi) = (fam.u1_box.lower()[0], fam.u1_box.upper()[0]);
                    for i in 0..3 {
                        let t1 = j1_lo + (j1_hi - j1_lo) * i as f64 / 2.0;
                        for j in 0..3 {
                            let x1 = u_lo + (u_hi - u_lo) * j as f64 / 2.0;
                            for k in 0..=8 {
                                let t = j_lo + (j_hi - j_lo) * k as f64 / 8.0;
                                let u = fam
                                    .value(idx, t1, &[x1], &prob.p_box.center(), t)
                                    .map_err(RunError::Solve)?;
                                t_fam.push(vec![t1, x1, t, u[0]]);
                            }
                        }
                    }
                    tables.push(t_fam);
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
        ScenarioKind::Frobenius => {
            let prob = build_frobenius(sc, &grid)?;
            tables.push(sup_table("sup_norm", &prob.f, &prob.q_box())?);
            let integ = check_integrability(&prob, 8)?;
            let mut asym = Table::new("asymmetry", &["eps", "max_asymmetry"]);
            for (i, e) in integ.max_asymmetry.grid().active() {
                asym.push(vec![e, integ.max_asymmetry.at(i)]);
            }
            tables.push(asym);
            let mut probes = Table::new(
                "integrability_probes",
                &["x1", "x2", "v1_1", "v1_2", "v2_1", "v2_2", "asymmetry"],
            );
            for p in integ.probes.iter().filter(|p| p.x.len() == 2) {
                probes.push(vec![
                    p.x[0], p.x[1], p.v1[0], p.v1[1], p.v2[0], p.v2[1], p.asymmetry,
                ]);
            }
            if !probes.rows.is_empty() {
                tables.push(probes);
            }
            report.note(format!(
                "integrability: {} ({})",
                if integ.integrable { "accepted" } else { "rejected" },
                integ.classification
            ));
            match certify_frobenius(&prob) {
                Ok(cert) if integ.integrable => {
                    let sol = solve_total(&prob, &cert, &integ, &SolveOptions {
                        atol: 1e-12,
                        rtol: 1e-12,
                        ..opts.clone()
                    })?;
                    report.note(format!(
                        "solution on the box [x0 ± {}] with residual {}",
                        sol.cert.lambda * sol.cert.r,
                        sol.residual_max
                    ));
                    let mut res = Table::new("residual", &["eps", "residual"]);
                    for (i, e) in sol.residual.grid().active() {
                        res.push(vec![e, sol.residual.at(i)]);
                    }
                    tables.push(res);
                    let probes: Vec<(Vec<f64>, Vec<f64>)> = (0..prob.n)
                        .map(|j| {
                            let mut w = vec![0.0; prob.n];
                            w[j] = 1.0;
                            (vec![0.4; prob.n], w)
                        })
                        .collect();
                    let knet = k_net_residual(&prob, &sol, &probes)?;
                    report.note(format!(
                        "ray-derivative residual sup |k| = {} ({})",
                        knet.max_k, knet.classification
                    ));
                    let mut kt = Table::new("k_net", &["eps", "sup_k"]);
                    for (i, e) in knet.sup_k.grid().active() {
                        kt.push(vec![e, knet.sup_k.at(i)]);
                    }
                    tables.push(kt);
                    report.details = json!({
                        "certificate": serde_json::to_value(&sol.cert).unwrap_or_default(),
                        "integrability": serde_json::to_value(&integ.classification).unwrap_or_default(),
                        "tolerance_limited": sol.tolerance_limited,
                    });
                }
                Ok(_) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note("integrability rejected; no solve attempted".to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) if is_hypothesis_failure(&e) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    emit(out_dir, report, tables, format)?;
    Ok(exit)
}
