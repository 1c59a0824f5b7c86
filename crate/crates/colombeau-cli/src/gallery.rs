//! Bundled example scenarios: the canonical counterexample families, the
//! mollified jump problem, one certified smooth problem, and two
//! total-differential systems.

use crate::config::Scenario;

pub struct GalleryEntry {
    pub name: &'static str,
    pub blurb: &'static str,
    pub toml: &'static str,
}

pub const GALLERY: &[GalleryEntry] = &[
    GalleryEntry {
        name: "smooth-ivp",
        blurb: "certified smooth problem u' = sin(t) + cos(u); all hypotheses pass",
        toml: r#"
name = "smooth-ivp"
kind = "ivp"
description = "certified smooth problem; uniform and log bounds hold"

[grid]
k_min = 0
k_max = 24
eps0 = 0.25

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

[output]
solution_times = [0.1, 0.2]
"#,
    },
    GalleryEntry {
        name: "heaviside-jump",
        blurb: "u' = H_eps(t) across the jump; u(1) converges to 1",
        toml: r#"
name = "heaviside-jump"
kind = "ivp"
description = "mollified jump RHS; bounded by the L1 norm of the profile"

[grid]
k_min = 0
k_max = 24
eps0 = 0.25

[geometry]
t_interval = [-4.0, 2.0]
state_box = [[-3.0, 3.0]]
t0 = "-1"
x0 = ["0"]
alpha = 2.5
l_box = [[-0.1, 0.1]]
beta = 2.2

[rhs]
exprs = ["HeavisideMollified(t)"]

[output]
solution_times = [1.0]
"#,
    },
    GalleryEntry {
        name: "counterexample-arctan",
        blurb: "F = (2 - 1/(1+u^2))/eps: solvable per eps, not c-bounded",
        toml: r#"
name = "counterexample-arctan"
kind = "ivp"
description = "uniform bound fails at order 1/eps; classical solutions exist globally"

[grid]
k_min = 0
k_max = 12
eps0 = 0.25

[geometry]
t_interval = [-2.0, 2.0]
state_box = [[-2.0, 2.0]]
t0 = "0"
x0 = ["0"]
alpha = 1.0
l_box = [[0.0, 0.0]]
beta = 0.5

[rhs]
exprs = ["(2 - 1/(1 + x1^2))/eps"]
"#,
    },
    GalleryEntry {
        name: "counterexample-exp",
        blurb: "F = u/eps: solutions e^{t/eps} are not moderate near 0",
        toml: r#"
name = "counterexample-exp"
kind = "ivp"
description = "uniform bound fails at order 1/eps; solutions blow up super-polynomially"

[grid]
k_min = 0
k_max = 12
eps0 = 0.25

[geometry]
t_interval = [-1.0, 1.0]
state_box = [[-1.0, 3.0]]
t0 = "0"
x0 = ["1"]
alpha = 0.5
l_box = [[1.0, 1.0]]
beta = 0.5

[rhs]
exprs = ["x1/eps"]
"#,
    },
    GalleryEntry {
        name: "counterexample-shrink",
        blurb: "F = -t/(u+1) * g(eps): domains shrink like 1/sqrt(g)",
        toml: r#"
name = "counterexample-shrink"
kind = "ivp"
description = "existence intervals shrink with eps; escape times scale like sqrt(eps)"

[grid]
k_min = 0
k_max = 12
eps0 = 0.25

[geometry]
t_interval = [-1.5, 1.5]
state_box = [[-0.95, 9.0]]
t0 = "0"
x0 = ["0"]
alpha = 1.2
l_box = [[0.0, 0.0]]
beta = 0.9

[rhs]
exprs = ["(0 - t/(x1 + 1))/eps"]
"#,
    },
    GalleryEntry {
        name: "frobenius-integrable",
        blurb: "Du = (u, u): integrable; the solution through y0=1 is e^{x1+x2}",
        toml: r#"
name = "frobenius-integrable"
kind = "frobenius"
description = "symmetric curvature term; ray assembly reproduces the exponential"

[grid]
k_min = 0
k_max = 10
eps0 = 0.25

[geometry]
u_box = [[-1.0, 1.0], [-1.0, 1.0]]
v_box = [[0.0, 3.0]]
x0 = ["0", "0"]
y0 = ["1"]
alpha = 0.8
l_box = [[0.9, 1.1]]
beta = 0.8

[rhs]
exprs = ["x3", "x3"]
m = 1
n = 2
"#,
    },
    GalleryEntry {
        name: "frobenius-nonintegrable",
        blurb: "Du = (x2, 0): the curvature term is asymmetric; rejected",
        toml: r#"
name = "frobenius-nonintegrable"
kind = "frobenius"
description = "integrability fails with asymmetry |v12 v21 - v11 v22|"

[grid]
k_min = 0
k_max = 10
eps0 = 0.25

[geometry]
u_box = [[-1.0, 1.0], [-1.0, 1.0]]
v_box = [[-2.0, 2.0]]
x0 = ["0", "0"]
y0 = ["0"]
alpha = 0.8
l_box = [[-0.1, 0.1]]
beta = 0.8

[rhs]
exprs = ["x2", "0"]
m = 1
n = 2
"#,
    },
];

/// Resolve a scenario by gallery name or filesystem path.
pub fn resolve(arg: &str) -> Result<Scenario, crate::config::ConfigError> {
    if let Some(entry) = GALLERY.iter().find(|e| e.name == arg) {
        Scenario::from_str_named(entry.toml, entry.name)
    } else {
        Scenario::load(arg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_gallery_entries_parse() {
        for entry in GALLERY {
            let sc = Scenario::from_str_named(entry.toml, entry.name).unwrap();
            assert_eq!(sc.name, entry.name);
            sc.grid().unwrap();
            sc.method().unwrap();
        }
    }

    #[test]
    fn expected_names_are_present() {
        for name in [
            "counterexample-arctan",
            "counterexample-exp",
            "counterexample-shrink",
            "heaviside-jump",
            "frobenius-nonintegrable",
            "frobenius-integrable",
            "smooth-ivp",
        ] {
            assert!(GALLERY.iter().any(|e| e.name == name), "{name} missing");
        }
    }
}
