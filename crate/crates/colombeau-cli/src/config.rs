//! Scenario configuration: one TOML or JSON document per scenario, validated
//! against the target solver's preconditions before any solve runs.

use serde::Deserialize;

use colombeau::dsl::{eval, parse, EvalEnv, Expr, Signature};
use colombeau::eps::{EpsGrid, PointNet};
use colombeau::geom::{Ambient, BoxDomain};
use colombeau::ivp::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Ivp,
    IvpParam,
    IvpInitialFamily,
    Frobenius,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioKind::Ivp => "ivp",
            ScenarioKind::IvpParam => "ivp-param",
            ScenarioKind::IvpInitialFamily => "ivp-initial-family",
            ScenarioKind::Frobenius => "frobenius",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub k_min: u32,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
}

fn default_k_max() -> u32 {
    24
}

fn default_eps0() -> f64 {
    0.25
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            k_min: 0,
            k_max: 24,
            eps0: 0.25,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// I for IVP kinds (open interval).
    pub t_interval: Option<[f64; 2]>,
    /// U (IVP kinds) as rows [lo, hi].
    pub state_box: Option<Vec<[f64; 2]>>,
    /// U for the Frobenius kind.
    pub u_box: Option<Vec<[f64; 2]>>,
    /// V for the Frobenius kind.
    pub v_box: Option<Vec<[f64; 2]>>,
    /// Initial time as an eps-expression (e.g. "0" or "eps/8").
    pub t0: Option<String>,
    /// Initial value components as eps-expressions.
    pub x0: Option<Vec<String>>,
    /// Frobenius initial value components as eps-expressions.
    pub y0: Option<Vec<String>>,
    pub alpha: f64,
    pub l_box: Vec<[f64; 2]>,
    pub beta: f64,
    /// Parameter box for ivp-param / ivp-initial-family.
    pub p_box: Option<Vec<[f64; 2]>>,
    /// Target half-width for ivp-initial-family.
    pub h_target: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsConfig {
    /// Component expressions; for the Frobenius kind, the m×n matrix
    /// row-major.
    pub exprs: Vec<String>,
    /// Matrix shape for the Frobenius kind.
    pub m: Option<usize>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    /// Added to every RHS component (an expression in the same signature).
    pub rhs_delta: Option<String>,
    /// Added to each x0 component (eps-expressions).
    pub x0_delta: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Times at which the solution table is evaluated.
    pub solution_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub grid: GridConfig,
    pub geometry: GeometryConfig,
    pub rhs: RhsConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_method() -> String {
    "rk".into()
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("config field `{field}`: {msg}")]
    Field { field: String, msg: String },
}

impl Scenario {
    pub fn from_str_named(text: &str, path: &str) -> Result<Self, ConfigError> {
        let parsed: Scenario = if path.ends_with(".json") {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                path: path.into(),
                msg: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| ConfigError::Parse {
                path: path.into(),
                msg: e.to_string(),
            })?
        };
        parsed.validate()?;
        Ok(parsed)
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.into(),
            source: e,
        })?;
        Self::from_str_named(&text, path)
    }

    pub fn method(&self) -> Result<Method, ConfigError> {
        match self.method.as_str() {
            "rk" => Ok(Method::AdaptiveRk),
            "picard" => Ok(Method::Picard),
            other => Err(ConfigError::Field {
                field: "method".into(),
                msg: format!("unknown method `{other}` (use rk|picard)"),
            }),
        }
    }

    pub fn grid(&self) -> Result<EpsGrid, ConfigError> {
        EpsGrid::geometric(self.grid.k_min, self.grid.k_max, self.grid.eps0).map_err(|e| {
            ConfigError::Field {
                field: "grid".into(),
                msg: e.to_string(),
            }
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let field = |f: &str, msg: &str| ConfigError::Field {
            field: f.into(),
            msg: msg.into(),
        };
        match self.kind {
            ScenarioKind::Frobenius => {
                if self.geometry.u_box.is_none()
                    || self.geometry.v_box.is_none()
                    || self.geometry.y0.is_none()
                {
                    return Err(field("geometry", "frobenius needs u_box, v_box and y0"));
                }
                let (Some(m), Some(n)) = (self.rhs.m, self.rhs.n) else {
                    return Err(field("rhs", "frobenius needs the matrix shape m and n"));
                };
                if self.rhs.exprs.len() != m * n {
                    return Err(field("rhs.exprs", "need m*n row-major components"));
                }
            }
            _ => {
                if self.geometry.t_interval.is_none()
                    || self.geometry.state_box.is_none()
                    || self.geometry.t0.is_none()
                    || self.geometry.x0.is_none()
                {
                    return Err(field(
                        "geometry",
                        "ivp kinds need t_interval, state_box, t0 and x0",
                    ));
                }
                let n = self.geometry.state_box.as_ref().unwrap().len();
                if self.rhs.exprs.len() != n {
                    return Err(field("rhs.exprs", "need one component per state axis"));
                }
                if matches!(
                    self.kind,
                    ScenarioKind::IvpParam | ScenarioKind::IvpInitialFamily
                ) && self.geometry.p_box.is_none()
                {
                    return Err(field("geometry.p_box", "parameterized kinds need p_box"));
                }
                if self.kind == ScenarioKind::IvpInitialFamily && self.geometry.h_target.is_none()
                {
                    return Err(field("geometry.h_target", "the family kind needs h_target"));
                }
            }
        }
        Ok(())
    }
}

pub fn box_from_rows(rows: &[[f64; 2]], field: &str) -> Result<BoxDomain, ConfigError> {
    BoxDomain::new(
        rows.iter().map(|r| r[0]).collect(),
        rows.iter().map(|r| r[1]).collect(),
    )
    .map_err(|e| ConfigError::Field {
        field: field.into(),
        msg: e.to_string(),
    })
}

/// Evaluate an eps-expression (constants, `eps`, `LogEps`) on the grid.
pub fn eps_expr_net(
    sources: &[String],
    grid: &EpsGrid,
    field: &str,
) -> Result<PointNet, ConfigError> {
    let exprs: Vec<std::sync::Arc<Expr>> = sources
        .iter()
        .map(|s| {
            parse(s, Signature::new(0, 0)).map_err(|e| ConfigError::Field {
                field: field.into(),
                msg: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    PointNet::from_fn(grid.clone(), Ambient::All(sources.len()), |eps| {
        exprs
            .iter()
            .map(|e| {
                eval(
                    e,
                    &EvalEnv {
                        t: 0.0,
                        x: &[],
                        p: &[],
                        eps,
                    },
                )
                .unwrap_or(f64::NAN)
            })
            .collect()
    })
    .map_err(|e| ConfigError::Field {
        field: field.into(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_ivp_scenario() {
        let text = r#"
name = "demo"
kind = "ivp"

[geometry]
t_interval = [-2.0, 2.0]
state_box = [[-2.0, 2.0]]
t0 = "0"
x0 = ["0"]
alpha = 1.0
l_box = [[0.0, 0.0]]
beta = 0.5

[rhs]
exprs = ["sin(t) + cos(x1)"]
"#;
        let sc = Scenario::from_str_named(text, "demo.toml").unwrap();
        assert_eq!(sc.kind, ScenarioKind::Ivp);
        assert_eq!(sc.grid.k_max, 24);
        sc.grid().unwrap();
    }

    #[test]
    fn missing_fields_are_reported() {
        let text = r#"
name = "bad"
kind = "ivp"
[geometry]
alpha = 1.0
l_box = [[0.0, 0.0]]
beta = 0.5
[rhs]
exprs = ["0"]
"#;
        assert!(matches!(
            Scenario::from_str_named(text, "bad.toml"),
            Err(ConfigError::Field { .. })
        ));
    }
}
