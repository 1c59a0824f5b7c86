//! Operation-level checks for function nets: sup estimation, c-bounds,
//! composition (certified and slowly-increasing), point values, and the
//! pointwise equality test.

use std::sync::Arc;

use colombeau::dsl::{parse, to_function_net, Signature, Var, VarLayout};
use colombeau::eps::{classify_growth, EpsGrid, GrowthKind, PointNet, DEFAULT_ORDERS};
use colombeau::geom::{Ambient, BoxDomain};
use colombeau::gf::{
    check_cbounded, compose, compose_slowly_increasing, equal_by_points, point_value,
    sup_on_compact, CBoundOutcome, FunctionNet, SlowlyIncreasingMap,
};

fn t_net(src: &str, grid: EpsGrid, lo: f64, hi: f64) -> FunctionNet {
    let e = parse(src, Signature::new(0, 0)).unwrap();
    to_function_net(
        vec![e],
        VarLayout(vec![Var::T]),
        grid,
        BoxDomain::interval(lo, hi).unwrap(),
    )
    .unwrap()
}

/// Inverse of f(x) = x/2 + atan(sqrt(2) x)/(2 sqrt(2)) by Newton iteration;
/// the independent oracle for the badly-behaved first-order family.
fn slow_arctan_inverse(s: f64) -> f64 {
    let f = |x: f64| 0.5 * x + (std::f64::consts::SQRT_2 * x).atan() / (2.0 * std::f64::consts::SQRT_2);
    let fp = |x: f64| 0.5 + 0.5 / (1.0 + 2.0 * x * x);
    let mut x = 2.0 * s;
    for _ in 0..100 {
        let step = (f(x) - s) / fp(x);
        x -= step;
        if step.abs() < 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[test]
fn sup_examples_scale_and_classify() {
    // f_ε(x) = ε^{-2} x on K = [0, 1]
    let grid = EpsGrid::standard();
    let f = FunctionNet::from_fn(
        grid.clone(),
        BoxDomain::interval(-0.5, 1.5).unwrap(),
        1,
        |eps, x, out| out[0] = x[0] / (eps * eps),
    )
    .unwrap();
    let k = BoxDomain::interval(0.0, 1.0).unwrap();
    let sup = sup_on_compact(&f, &k, &[]).unwrap();
    let class = classify_growth(&sup, &DEFAULT_ORDERS).unwrap();
    assert_eq!(class.kind, GrowthKind::Moderate(2));
    let fit = class.fit.unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-6);

    // zero net
    let z = FunctionNet::from_fn(
        grid.clone(),
        BoxDomain::interval(-1.0, 1.0).unwrap(),
        1,
        |_, _, out| out[0] = 0.0,
    )
    .unwrap();
    let class = classify_growth(
        &sup_on_compact(&z, &BoxDomain::interval(-0.5, 0.5).unwrap(), &[]).unwrap(),
        &DEFAULT_ORDERS,
    )
    .unwrap();
    assert!(matches!(class.kind, GrowthKind::Negligible(_)));

    // e^{t/ε} on [-1, 1]: super-polynomial on a grid where it stays finite
    let short = EpsGrid::geometric(0, 9, 0.5).unwrap();
    let f = FunctionNet::from_fn(
        short,
        BoxDomain::interval(-1.2, 1.2).unwrap(),
        1,
        |eps, x, out| out[0] = (x[0] / eps).exp(),
    )
    .unwrap();
    let sup = sup_on_compact(&f, &BoxDomain::interval(-1.0, 1.0).unwrap(), &[]).unwrap();
    let class = classify_growth(&sup, &DEFAULT_ORDERS).unwrap();
    assert_eq!(class.kind, GrowthKind::SuperPolynomial);
}

#[test]
fn sup_rejects_outside_compacts() {
    let grid = EpsGrid::standard();
    let f = t_net("t", grid, -1.0, 1.0);
    let bad = BoxDomain::interval(0.0, 2.0).unwrap();
    assert!(sup_on_compact(&f, &bad, &[]).is_err());
}

#[test]
fn arctan_layer_is_c_bounded_into_its_range() {
    let grid = EpsGrid::standard();
    let f = t_net("atan(t/eps)", grid, -1.5, 1.5);
    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    let v = Ambient::Boxed(BoxDomain::interval(-2.0, 2.0).unwrap());
    match check_cbounded(&f, &k, &v).unwrap() {
        CBoundOutcome::Certified(cert) => {
            assert!(cert.margin > 0.0);
            let half_pi = std::f64::consts::FRAC_PI_2;
            assert!(cert.target_compact.lower()[0] >= -half_pi - 0.3);
            assert!(cert.target_compact.upper()[0] <= half_pi + 0.3);
        }
        CBoundOutcome::Escapes(rep) => panic!("expected certificate, escaped: {rep:?}"),
    }
}

#[test]
fn unbounded_first_order_solutions_are_not_c_bounded() {
    // values grow like 2/ε: escapes every compact exhaustion of the line
    let grid = EpsGrid::standard();
    let f = FunctionNet::from_fn(
        grid,
        BoxDomain::interval(-1.5, 1.5).unwrap(),
        1,
        |eps, x, out| out[0] = slow_arctan_inverse(x[0] / eps),
    )
    .unwrap();
    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    match check_cbounded(&f, &k, &Ambient::All(1)).unwrap() {
        CBoundOutcome::Escapes(rep) => {
            assert!(rep.levels_escaped > 0);
            assert!(!rep.sup_class.is_bounded());
        }
        CBoundOutcome::Certified(c) => panic!("expected escape, got certificate {c:?}"),
    }
}

#[test]
fn constant_nets_certify_with_singleton_targets() {
    let grid = EpsGrid::standard();
    let f = t_net("1.25", grid, -1.0, 1.0);
    let k = BoxDomain::interval(-0.5, 0.5).unwrap();
    let v = Ambient::Boxed(BoxDomain::interval(0.0, 2.0).unwrap());
    match check_cbounded(&f, &k, &v).unwrap() {
        CBoundOutcome::Certified(cert) => {
            assert!(cert.target_compact.contains(&[1.25], 1e-12));
            assert!(cert.target_compact.width(0) < 0.1);
        }
        CBoundOutcome::Escapes(_) => panic!("constant must certify"),
    }
}

#[test]
fn composition_needs_and_uses_the_certificate() {
    let grid = EpsGrid::standard();
    // u_ε(t) = t + ε on [0, 1]
    let u = t_net("t + eps", grid.clone(), 0.0, 1.0);
    let v_dom = BoxDomain::interval(-0.5, 2.5).unwrap();
    let e = parse("x1^2", Signature::new(1, 0)).unwrap();
    let v = to_function_net(vec![e], VarLayout::x_only(1), grid.clone(), v_dom).unwrap();

    let k = BoxDomain::interval(0.0, 1.0).unwrap();
    let cert = match check_cbounded(&u, &k, &Ambient::Boxed(v.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        CBoundOutcome::Escapes(_) => panic!("affine net is c-bounded"),
    };
    let w = compose(&v, &u, &cert).unwrap();
    for (idx, eps) in [(2usize, 0.25f64), (10, 0.5f64.powi(10))] {
        for t in [0.0, 0.3, 0.9] {
            let got = w.value(idx, &[t]).unwrap()[0];
            assert!((got - (t + eps) * (t + eps)).abs() < 1e-13);
        }
    }

    // wrong certificate (target not inside the outer domain) is refused
    let narrow = parse("x1^2", Signature::new(1, 0)).unwrap();
    let v_small = to_function_net(
        vec![narrow],
        VarLayout::x_only(1),
        grid,
        BoxDomain::interval(0.4, 0.6).unwrap(),
    )
    .unwrap();
    assert!(compose(&v_small, &u, &cert).is_err());
}

#[test]
fn identity_composition_is_the_inner_net() {
    let grid = EpsGrid::standard();
    let u = t_net("sin(t) + eps", grid.clone(), -1.0, 1.0);
    let id = parse("x1", Signature::new(1, 0)).unwrap();
    let v = to_function_net(
        vec![id],
        VarLayout::x_only(1),
        grid,
        BoxDomain::interval(-3.0, 3.0).unwrap(),
    )
    .unwrap();
    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    let cert = match check_cbounded(&u, &k, &Ambient::Boxed(v.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        _ => panic!(),
    };
    let w = compose(&v, &u, &cert).unwrap();
    for t in [-0.9, 0.0, 0.5] {
        let a = w.value(3, &[t]).unwrap()[0];
        let b = u.value(3, &[t]).unwrap()[0];
        assert_eq!(a, b);
    }
}

#[test]
fn bounded_outer_composes_with_the_heaviside_layer() {
    let grid = EpsGrid::standard();
    let u = t_net("HeavisideMollified(t)", grid.clone(), -1.0, 1.0);
    let g = parse("sin(x1)", Signature::new(1, 0)).unwrap();
    let v = to_function_net(
        vec![g],
        VarLayout::x_only(1),
        grid,
        BoxDomain::interval(-1.5, 1.5).unwrap(),
    )
    .unwrap();
    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    // |H_ε| ≤ 1 = the L¹ norm of the profile
    let cert = match check_cbounded(&u, &k, &Ambient::Boxed(v.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        _ => panic!("Heaviside layer is uniformly bounded"),
    };
    assert!(cert.target_compact.upper()[0] <= 1.2);
    let w = compose(&v, &u, &cert).unwrap();
    let got = w.value(4, &[0.5]).unwrap()[0];
    assert!((got - 1.0f64.sin()).abs() < 1e-12, "H = 1 right of the layer");
    let got = w.value(4, &[-0.5]).unwrap()[0];
    assert_eq!(got, 0.0);
}

#[test]
fn slowly_increasing_composition() {
    let grid = EpsGrid::standard();

    // polynomial outer map on a moderate net
    let cube = parse("x1^3", Signature::new(1, 0)).unwrap();
    let cube_map = colombeau::dsl::ExprMap::new(vec![cube], VarLayout::x_only(1));
    let v = SlowlyIncreasingMap::new(
        Arc::new(cube_map),
        vec![(1.1, 3), (3.1, 2), (6.1, 1)],
        30.0,
    )
    .unwrap();
    let u = t_net("t/eps", grid.clone(), -1.0, 1.0);
    let w = compose_slowly_increasing(&v, &u).unwrap();
    let got = w.value(5, &[0.5]).unwrap()[0];
    let eps = 0.5f64.powi(5);
    assert!((got - (0.5 / eps).powi(3)).abs() / got.abs() < 1e-12);

    // atan outer: bounded composite of an unbounded net
    let at = parse("atan(x1)", Signature::new(1, 0)).unwrap();
    let at_map = colombeau::dsl::ExprMap::new(vec![at], VarLayout::x_only(1));
    let v = SlowlyIncreasingMap::new(Arc::new(at_map), vec![(1.6, 0), (1.0, 0)], 50.0).unwrap();
    let w = compose_slowly_increasing(&v, &u).unwrap();
    let sup = sup_on_compact(&w, &BoxDomain::interval(-0.9, 0.9).unwrap(), &[]).unwrap();
    let class = classify_growth(&sup, &DEFAULT_ORDERS).unwrap();
    assert_eq!(class.kind, GrowthKind::Moderate(0));

    // exponential outer: no polynomial witness exists
    let ex = parse("exp(x1)", Signature::new(1, 0)).unwrap();
    let ex_map = colombeau::dsl::ExprMap::new(vec![ex], VarLayout::x_only(1));
    assert!(SlowlyIncreasingMap::new(Arc::new(ex_map), vec![(2.0, 3)], 30.0).is_err());
}

#[test]
fn point_values_follow_the_point() {
    let grid = EpsGrid::standard();
    // identity net at a generalized time
    let f = t_net("t", grid.clone(), -1.0, 1.0);
    let t0 = 0.25;
    let p = PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![t0 + e / 8.0]).unwrap();
    let pv = point_value(&f, &p).unwrap();
    for (i, e) in grid.active() {
        assert_eq!(pv.at(i)[0], t0 + e / 8.0);
    }

    // f_ε(t) = e^{t/ε} at p_ε = ε log(1/ε): values are exactly 1/ε
    let f = FunctionNet::from_fn(
        grid.clone(),
        BoxDomain::interval(-0.5, 0.5).unwrap(),
        1,
        |eps, x, out| out[0] = (x[0] / eps).exp(),
    )
    .unwrap();
    let p = PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![e * (1.0 / e).ln()])
        .unwrap();
    let pv = point_value(&f, &p).unwrap();
    let class = classify_growth(&pv.component(0).unwrap(), &DEFAULT_ORDERS).unwrap();
    assert_eq!(class.kind, GrowthKind::Moderate(1));

    // escaping points are refused
    let p_out = PointNet::from_fn(grid, Ambient::All(1), |e| vec![0.6 + e]).unwrap();
    assert!(point_value(&f, &p_out).is_err());
}

#[test]
fn pointwise_equality_on_slices() {
    let grid = EpsGrid::standard();
    let domain = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let f = FunctionNet::from_fn(grid.clone(), domain.clone(), 1, |_e, x, out| {
        out[0] = (x[0] + x[1]).sin()
    })
    .unwrap();
    let probes = vec![
        PointNet::constant(grid.clone(), &[0.2]).unwrap(),
        PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![-0.3 + e / 4.0]).unwrap(),
    ];

    // f = g
    let rep = equal_by_points(&f, &f, 1, &probes, 3).unwrap();
    assert!(rep.equal);

    // g = f + ε⁵ · smooth: negligible at m_test = 3
    let g = FunctionNet::from_fn(grid.clone(), domain.clone(), 1, |e, x, out| {
        out[0] = (x[0] + x[1]).sin() + e.powi(5) * (-x[0] * x[0]).exp()
    })
    .unwrap();
    let rep = equal_by_points(&f, &g, 1, &probes, 3).unwrap();
    assert!(rep.equal, "{:?}", rep.probes);

    // an ε-independent bump is detected
    let h = FunctionNet::from_fn(grid.clone(), domain, 1, |_e, x, out| {
        out[0] = (x[0] + x[1]).sin() + 0.1 * (-x[0] * x[0]).exp()
    })
    .unwrap();
    let rep = equal_by_points(&f, &h, 1, &probes, 3).unwrap();
    assert!(!rep.equal);

    // oscillating probes are rejected
    let bad = vec![PointNet::from_fn(grid, Ambient::All(1), |e| vec![(1.0 / e).sin() * 0.5])
        .unwrap()];
    assert!(equal_by_points(&f, &f, 1, &bad, 3).is_err());
}

#[test]
fn sup_is_subadditive_per_eps() {
    let grid = EpsGrid::standard();
    let dom = BoxDomain::interval(-1.0, 1.0).unwrap();
    let f = FunctionNet::from_fn(grid.clone(), dom.clone(), 1, |e, x, out| {
        out[0] = (x[0] * 3.0).sin() / e
    })
    .unwrap();
    let g = FunctionNet::from_fn(grid.clone(), dom.clone(), 1, |e, x, out| {
        out[0] = (x[0] - e).cos() * 2.0
    })
    .unwrap();
    let sum = FunctionNet::from_fn(grid, dom.clone(), 1, |e, x, out| {
        out[0] = (x[0] * 3.0).sin() / e + (x[0] - e).cos() * 2.0
    })
    .unwrap();
    let k = BoxDomain::interval(-0.8, 0.8).unwrap();
    let sf = sup_on_compact(&f, &k, &[]).unwrap();
    let sg = sup_on_compact(&g, &k, &[]).unwrap();
    let ss = sup_on_compact(&sum, &k, &[]).unwrap();
    for i in 0..sf.grid().len() {
        assert!(ss.at(i) <= sf.at(i) + sg.at(i) + 1e-12);
    }
}

#[test]
fn composition_is_associative_with_chained_certificates() {
    let grid = EpsGrid::standard();
    let u = t_net("0.5 * sin(t) + 0.1 * eps", grid.clone(), -1.0, 1.0);
    let mid_dom = BoxDomain::interval(-1.0, 1.0).unwrap();
    let e_v = parse("x1 + 0.25 * x1^2", Signature::new(1, 0)).unwrap();
    let v = to_function_net(vec![e_v], VarLayout::x_only(1), grid.clone(), mid_dom).unwrap();
    let out_dom = BoxDomain::interval(-3.0, 3.0).unwrap();
    let e_w = parse("cos(x1)", Signature::new(1, 0)).unwrap();
    let w = to_function_net(vec![e_w], VarLayout::x_only(1), grid.clone(), out_dom).unwrap();

    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    let cert_u = match check_cbounded(&u, &k, &Ambient::Boxed(v.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        _ => panic!(),
    };
    let vu = compose(&v, &u, &cert_u).unwrap();
    let cert_vu = match check_cbounded(&vu, &k, &Ambient::Boxed(w.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        _ => panic!(),
    };
    let left = compose(&w, &vu, &cert_vu).unwrap();

    let cert_v = match check_cbounded(&v, v.domain(), &Ambient::Boxed(w.domain().clone())).unwrap()
    {
        CBoundOutcome::Certified(c) => c,
        _ => panic!(),
    };
    let wv = compose(&w, &v, &cert_v).unwrap();
    let right = compose(&wv, &u, &cert_u).unwrap();

    for (idx, _) in grid.active().take(6) {
        for t in [-0.8, -0.1, 0.4, 0.95] {
            let a = left.value(idx, &[t]).unwrap()[0];
            let b = right.value(idx, &[t]).unwrap()[0];
            assert!((a - b).abs() < 1e-12, "associativity at t={t}");
        }
    }
}

#[test]
fn point_value_commutes_with_composition() {
    let grid = EpsGrid::standard();
    let u = t_net("0.5 * cos(t)", grid.clone(), -1.0, 1.0);
    let e_v = parse("exp(x1)", Signature::new(1, 0)).unwrap();
    let v = to_function_net(
        vec![e_v],
        VarLayout::x_only(1),
        grid.clone(),
        BoxDomain::interval(-1.0, 1.0).unwrap(),
    )
    .unwrap();
    let k = BoxDomain::interval(-1.0, 1.0).unwrap();
    let cert = match check_cbounded(&u, &k, &Ambient::Boxed(v.domain().clone())).unwrap() {
        CBoundOutcome::Certified(c) => c,
        _ => panic!(),
    };
    let vu = compose(&v, &u, &cert).unwrap();
    let p = PointNet::from_fn(grid.clone(), Ambient::All(1), |e| vec![0.3 - e / 16.0]).unwrap();
    let direct = point_value(&vu, &p).unwrap();
    let inner = point_value(&u, &p).unwrap();
    for (i, _) in grid.active() {
        let chained = v.value(i, inner.at(i)).unwrap()[0];
        assert_eq!(direct.at(i)[0], chained);
    }
}
