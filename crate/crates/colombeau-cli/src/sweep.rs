//! ε-sweeps: per-ε measurements of a named quantity with a log-log (or
//! log-vs-log(1/ε)) regression summary.

use std::path::Path;

use serde_json::json;

use colombeau::eps::NumberNet;
use colombeau::ivp::{
    certify_hypotheses, escape_time, fit_above_floor, solve_generalized, sup_gap_on,
    SolveOptions,
};

use colombeau::SolveError;

use crate::config::{ConfigError, Scenario, ScenarioKind};
use crate::report::{emit, OutputFormat, Report, Table};
use crate::run::{build_frobenius, build_ivp, build_param, Overrides, RunError, EXIT_HYPOTHESIS, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    SupNorm,
    EscapeTime,
    Gap,
    Asymmetry,
}

impl std::str::FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sup-norm" => Ok(Quantity::SupNorm),
            "escape-time" => Ok(Quantity::EscapeTime),
            "gap" => Ok(Quantity::Gap),
            "asymmetry" => Ok(Quantity::Asymmetry),
            other => Err(format!(
                "unknown quantity `{other}` (use sup-norm|escape-time|gap|asymmetry)"
            )),
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Quantity::SupNorm => "sup-norm",
            Quantity::EscapeTime => "escape-time",
            Quantity::Gap => "gap",
            Quantity::Asymmetry => "asymmetry",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("quantity {quantity} is not applicable to scenario kind {kind}: {msg}")]
pub struct QuantityNotApplicable {
    pub quantity: Quantity,
    pub kind: ScenarioKind,
    pub msg: String,
}

fn fit_summary(net: &NumberNet, report: &mut Report) {
    match fit_above_floor(net, 0.0) {
        Some(fit) => {
            report.note(format!(
                "log-log fit: slope {} (order {}), intercept {}, max residual {}",
                fit.slope,
                fit.order(),
                fit.intercept,
                fit.max_residual
            ));
            report.details = json!({
                "fit": serde_json::to_value(&fit).unwrap_or_default(),
            });
        }
        None => report.note("no nonzero samples to fit".to_string()),
    }
}

fn net_table(name: &str, net: &NumberNet) -> Table {
    let mut t = Table::new(name, &["eps", "value"]);
    for (i, e) in net.grid().active() {
        t.push(vec![e, net.at(i)]);
    }
    t
}

pub fn sweep_scenario(
    sc: &Scenario,
    quantity: Quantity,
    out_dir: &Path,
    format: OutputFormat,
    ov: &Overrides,
) -> Result<i32, RunError> {
    let grid = match ov.grid {
        Some((k0, k1)) => colombeau::eps::EpsGrid::geometric(k0, k1, sc.grid.eps0)
            .map_err(|e| ConfigError::Field {
                field: "--grid".into(),
                msg: e.to_string(),
            })?,
        None => sc.grid()?,
    };
    let opts = SolveOptions {
        method: match ov.method {
            Some(m) => m,
            None => sc.method()?,
        },
        ..Default::default()
    };
    let report_name = format!("{}__sweep-{quantity}", sc.name);
    let mut report = Report::new(&report_name, &sc.kind.to_string(), &sc.method);
    report.note(format!("sweep quantity: {quantity}"));
    let mut tables = Vec::new();
    let mut exit = EXIT_OK;

    let not_applicable = |q: Quantity, msg: &str| {
        RunError::Config(ConfigError::Field {
            field: "--quantity".into(),
            msg: QuantityNotApplicable {
                quantity: q,
                kind: sc.kind,
                msg: msg.into(),
            }
            .to_string(),
        })
    };

    match (quantity, sc.kind) {
        (Quantity::SupNorm, ScenarioKind::Ivp) => {
            let prob = build_ivp(sc, &grid)?;
            let net = colombeau::gf::sup_on_compact(&prob.f, &prob.q_box(), &[]).map_err(SolveError::Gf)?;
            fit_summary(&net, &mut report);
            tables.push(net_table("sup_norm", &net));
        }
        (Quantity::SupNorm, ScenarioKind::IvpParam | ScenarioKind::IvpInitialFamily) => {
            let prob = build_param(sc, &grid)?;
            let net = colombeau::gf::sup_on_compact(&prob.f, &prob.q_full(), &[]).map_err(SolveError::Gf)?;
            fit_summary(&net, &mut report);
            tables.push(net_table("sup_norm", &net));
        }
        (Quantity::SupNorm, ScenarioKind::Frobenius) => {
            let prob = build_frobenius(sc, &grid)?;
            let net = colombeau::gf::sup_on_compact(&prob.f, &prob.q_box(), &[]).map_err(SolveError::Gf)?;
            fit_summary(&net, &mut report);
            tables.push(net_table("sup_norm", &net));
        }
        (Quantity::EscapeTime, ScenarioKind::Ivp) => {
            let prob = build_ivp(sc, &grid)?;
            let mut samples = vec![f64::NAN; grid.len()];
            let mut t = Table::new("escape_time", &["eps", "t_escape"]);
            for (idx, e) in grid.active() {
                if let Some((t_star, _)) = escape_time(&prob, idx, &opts)? {
                    samples[idx] = t_star;
                    t.push(vec![e, t_star]);
                }
            }
            if t.rows.is_empty() {
                report.note("no escapes observed within [t0 - alpha, t0 + alpha]".to_string());
            } else if let Ok(net) = NumberNet::new(grid.clone(), samples) {
                fit_summary(&net, &mut report);
            }
            tables.push(t);
        }
        (Quantity::Gap, ScenarioKind::Ivp) => {
            if sc.perturbation.rhs_delta.is_none() && sc.perturbation.x0_delta.is_none() {
                return Err(not_applicable(
                    quantity,
                    "gap sweeps need a [perturbation] section",
                ));
            }
            let base = build_ivp(sc, &grid)?;
            let mut pert_sc = sc.clone();
            if let Some(delta) = &sc.perturbation.rhs_delta {
                for e in &mut pert_sc.rhs.exprs {
                    *e = format!("({e}) + ({delta})");
                }
            }
            if let Some(xd) = &sc.perturbation.x0_delta {
                let x0 = pert_sc.geometry.x0.as_mut().unwrap();
                for (x, d) in x0.iter_mut().zip(xd) {
                    *x = format!("({x}) + ({d})");
                }
                // L must still hold the perturbed initial values
                let delta_net = crate::config::eps_expr_net(xd, &grid, "perturbation.x0_delta")?;
                for (axis, row) in pert_sc.geometry.l_box.iter_mut().enumerate() {
                    let m = grid
                        .active()
                        .map(|(i, _)| delta_net.at(i)[axis].abs())
                        .fold(0.0, f64::max);
                    row[0] -= 1.001 * m;
                    row[1] += 1.001 * m;
                }
            }
            let pert = build_ivp(&pert_sc, &grid)?;
            let tight = SolveOptions {
                atol: 1e-12,
                rtol: 1e-12,
                ..opts.clone()
            };
            match (certify_hypotheses(&base), certify_hypotheses(&pert)) {
                (Ok(c1), Ok(c2)) => {
                    let s1 = solve_generalized(&base, &c1, &tight)?;
                    let s2 = solve_generalized(&pert, &c2, &tight)?;
                    let hd = 0.75 * c1.h.min(c2.h);
                    let gap = sup_gap_on(&s1, &s2, c1.t0 - hd, c1.t0 + hd, 256)?;
                    if let Some(fit) = fit_above_floor(&gap, 10.0 * (tight.atol + tight.rtol)) {
                        report.note(format!(
                            "above-noise gap slope {} (order {})",
                            fit.slope,
                            fit.order()
                        ));
                        report.details = json!({"fit": serde_json::to_value(&fit).unwrap_or_default()});
                    } else {
                        report.note("gap below the noise floor everywhere".to_string());
                    }
                    tables.push(net_table("gap", &gap));
                }
                (Err(e), _) | (_, Err(e)) if !matches!(e, SolveError::InvalidProblem(_)) => {
                    report.verdict = "hypothesis-failed".into();
                    report.note(e.to_string());
                    exit = EXIT_HYPOTHESIS;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e.into()),
            }
        }
        (Quantity::Asymmetry, ScenarioKind::Frobenius) => {
            let prob = build_frobenius(sc, &grid)?;
            let integ = colombeau::frobenius::check_integrability(&prob, 8)?;
            fit_summary(&integ.max_asymmetry, &mut report);
            report.note(format!("classification: {}", integ.classification));
            tables.push(net_table("asymmetry", &integ.max_asymmetry));
        }
        (q, k) => {
            return Err(not_applicable(q, &format!("kind {k} has no such sweep")));
        }
    }

    emit(out_dir, report, tables, format)?;
    Ok(exit)
}

