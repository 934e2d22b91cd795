use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::foliation::{Domain, Family, FoliationPair, ParamPair, ParamRange};
use crate::geometry::Point2;
use crate::plane::{InitialState, RelayGrid, WeightFunction};
use crate::relay::{relay_trace_threshold, KSignals};
use crate::signal::Signal2D;

fn linear() -> FoliationPair {
    FoliationPair::linear(
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap(),
        Point2::new(1.0, 0.0),
        ParamRange::new(-1.0, 1.0).unwrap(),
        ParamRange::new(-1.0, 1.0).unwrap(),
        1e-3,
    )
    .unwrap()
}

fn radial() -> FoliationPair {
    FoliationPair::radial(
        Domain::annulus(Point2::ORIGIN, 0.5, 3.0).unwrap(),
        Point2::ORIGIN,
        4.0,
        ParamRange::new(1.0, 2.5).unwrap(),
        ParamRange::new(1.5, 3.0).unwrap(),
        1e-3,
    )
    .unwrap()
}

fn axis() -> TransversalCurve {
    TransversalCurve::segment(Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0), -1.0).unwrap()
}

// a line through the origin at 60 degrees to the normal, s = 0 at the origin
fn tilted() -> TransversalCurve {
    let d = Point2::new(0.5, 3f64.sqrt() / 2.0);
    TransversalCurve::segment(d * -2.0, d * 2.0, -2.0).unwrap()
}

fn model(w: &str, h: f64) -> RelayGrid {
    RelayGrid::build(&linear(), &WeightFunction::expression(w).unwrap(), h, InitialState::AllZero).unwrap()
}

fn synthetic(n: usize, h_s: f64, psi: impl Fn(f64, f64) -> f64) -> TransitionSurface {
    let lattice = Lattice { s_min: 0.0, h_s, n };
    let mut t = Triangle::filled(n, 0.0);
    for i in 0..n {
        for j in 0..=i {
            t.set(i, j, psi(lattice.s(i), lattice.s(j)));
        }
    }
    TransitionSurface { lattice, psi: t }
}

#[test]
fn arc_length_parametrization() {
    let k = TransversalCurve::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 2.0)], 5.0).unwrap();
    assert_eq!(k.s_min(), 5.0);
    assert_eq!(k.s_max(), 8.0);
    assert_eq!(k.point_at(6.5), Point2::new(1.0, 0.5));
    assert_eq!(k.point_at(100.0), Point2::new(1.0, 2.0));
    assert!(matches!(TransversalCurve::new(vec![Point2::ORIGIN, Point2::ORIGIN], 0.0), Err(Error::NotTransversal(_))));
}

#[test]
fn tilted_line_restricts_relays() {
    let f = linear();
    let k = tilted().bind(&f).unwrap();
    let r = restrict_relay(&k, ParamPair::new(1.0, 0.5)).unwrap();
    assert!((r.s_up - 2.0).abs() < 1e-12);
    assert!((r.s_down + 1.0).abs() < 1e-12);
    let lat = Lattice::covering(-2.0, 2.0, 0.5).unwrap();
    let j = jacobian_grid(&f, &tilted(), &lat).unwrap();
    for (_, _, v) in j.iter() {
        assert!((v - 0.25).abs() < 1e-12);
    }
    assert!(matches!(restrict_relay(&k, ParamPair::new(1.5, 0.0)), Err(Error::NoIntersection { family: Family::Zero, .. })));
}

#[test]
fn curves_along_the_foliation_are_rejected() {
    let vertical = TransversalCurve::segment(Point2::new(0.0, -1.0), Point2::new(0.0, 1.0), 0.0).unwrap();
    assert!(matches!(vertical.bind(&linear()), Err(Error::NotTransversal(_))));
    let back = TransversalCurve::segment(Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0), 0.0).unwrap();
    assert!(matches!(back.bind(&linear()), Err(Error::NotTransversal(_))));
}

#[test]
fn tangent_segment_has_singular_jacobian() {
    let k = TransversalCurve::segment(Point2::new(-1.0, 1.0), Point2::new(1.0, 1.0), 0.0).unwrap();
    let lat = Lattice::covering(0.0, 2.0, 0.25).unwrap();
    assert!(matches!(jacobian_grid(&radial(), &k, &lat), Err(Error::SingularJacobian { .. })));
}

#[test]
fn phi_is_exact_on_low_degree_surfaces() {
    let quad = extract_phi(&synthetic(11, 0.1, |a, b| (a - b).powi(2) / 2.0)).unwrap();
    let cubic = extract_phi(&synthetic(11, 0.1, |a, b| (a - b).powi(3) / 6.0)).unwrap();
    let mut missing = vec![];
    for i in 0..11 {
        for j in 0..=i {
            let (Some(q), Some(c)) = (quad.phi(i, j), cubic.phi(i, j)) else {
                missing.push((i, j));
                continue;
            };
            assert!((q - 1.0).abs() < 1e-9, "({i}, {j})");
            let d = quad.lattice.s(i) - quad.lattice.s(j);
            assert!((c - d).abs() < 1e-9, "({i}, {j})");
        }
    }
    // only the two acute corners of the triangle lack a stencil
    assert_eq!(missing, vec![(0, 0), (1, 0), (1, 1), (9, 9), (10, 9), (10, 10)]);
    assert!((cubic.phi(7, 2).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(extract_phi(&synthetic(2, 0.1, |_, _| 0.0)), Err(Error::GridTooCoarse { nodes: 2 }));
    assert!(matches!(Lattice::covering(0.0, 0.05, 0.1), Err(Error::GridTooCoarse { nodes: 1 })));
}

#[test]
fn measured_surface_matches_closed_forms() {
    let k = axis().bind(&linear()).unwrap();
    let unit = measure_transition_surface(&model("1", 0.025), &k, 0.05).unwrap();
    let (i, j) = (unit.lattice.nearest(0.5), unit.lattice.nearest(-0.5));
    assert!((unit.psi(i, j).unwrap() - 0.5).abs() < 0.03);
    assert_eq!(unit.psi(i, i), Some(0.0));

    let lin = measure_transition_surface(&model("c0 + c1", 0.025), &k, 0.05).unwrap();
    let (i, j) = (lin.lattice.nearest(0.7), lin.lattice.nearest(-0.5));
    assert!((lin.psi(i, j).unwrap() - 0.288).abs() < 0.01);
}

#[test]
fn constant_weight_round_trip() {
    let m = model("1", 0.05);
    let k = axis().bind(&linear()).unwrap();
    let phi = extract_phi(&measure_transition_surface(&m, &k, 0.1).unwrap()).unwrap();
    let w = recover_weight(&phi, &k, &m).unwrap();
    assert_eq!(w.cells.len(), m.len());
    assert!(w.cells.iter().all(|c| c.1.is_some()));
    assert!(w.max_error(|_, _| 1.0) < 1e-9, "{}", w.max_error(|_, _| 1.0));
}

#[test]
fn linear_curves_are_recovered() {
    let m = model("c0 + c1", 0.05);
    let mut curves: Vec<TaggedCurve> = [-0.5, 0.0, 0.5]
        .iter()
        .map(|&xi| TaggedCurve {
            xi,
            curve: TransversalCurve::segment(Point2::new(-1.0, xi), Point2::new(1.0, xi), -1.0).unwrap(),
        })
        .collect();
    // too short to reach the level 0.5
    curves.push(TaggedCurve {
        xi: 1.0,
        curve: TransversalCurve::segment(Point2::new(-1.0, 1.0), Point2::new(0.2, 1.0), -1.0).unwrap(),
    });
    let cfg = CurveRecoveryConfig { h_s: 0.1, ..Default::default() };
    let r = recover_curves(&m, &curves, &WeightFunction::expression("c0 + c1").unwrap(), &[0.5], &[0.25], &cfg).unwrap();
    assert_eq!(r.gamma0[0].points.len(), 3);
    for (_, _, p) in &r.gamma0[0].points {
        assert!((p.x1 - 0.5).abs() <= 2.0 * cfg.tol, "{p:?}");
    }
    assert!(r.gamma0[0].spread() <= 2.0 * cfg.tol);
    for (_, _, p) in &r.gamma1[0].points {
        assert!((p.x1 + 0.25).abs() <= 2.0 * cfg.tol, "{p:?}");
    }
    assert!(r
        .skipped
        .iter()
        .any(|s| s.xi == 1.0 && s.family == Family::Zero && matches!(s.error, Error::NoRoot { .. })));
}

#[test]
fn radial_curves_are_recovered() {
    let f = radial();
    let w = WeightFunction::expression("c0 + c1 - 4").unwrap();
    let m = RelayGrid::build(&f, &w, 0.05, InitialState::AllZero).unwrap();
    let curves: Vec<TaggedCurve> = (0..4)
        .map(|i| {
            let a = 0.4 * i as f64;
            let d = Point2::new(a.cos(), a.sin());
            TaggedCurve { xi: a, curve: TransversalCurve::segment(d * 1.0, d * 2.5, 1.0).unwrap() }
        })
        .collect();
    let cfg = CurveRecoveryConfig { h_s: 0.1, tol: 1e-3, s1_ref: Some(1.25), s0_ref: Some(2.25) };
    let r = recover_curves(&m, &curves, &w, &[1.5], &[2.0], &cfg).unwrap();
    assert!(r.skipped.is_empty(), "{:?}", r.skipped);
    for (_, _, p) in &r.gamma0[0].points {
        assert!((p.norm() - 1.5).abs() <= 2.0 * cfg.tol);
    }
    for (_, _, p) in &r.gamma1[0].points {
        assert!((p.norm() - 2.0).abs() <= 2.0 * cfg.tol);
    }
    let mut out = Vec::new();
    r.write_csv(Family::One, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("s_level,xi,x1,x2\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn scalar_relay_trace() {
    let r = ScalarRelay { s_up: 1.0, s_down: -1.0 };
    let (init, ev) = r.trace(&[(0.0, 0.0), (1.0, 2.0), (2.0, -2.0)], false);
    assert!(!init);
    assert_eq!(ev.len(), 2);
    assert!((ev[0].t - 0.5).abs() < 1e-12 && ev[0].value);
    assert!((ev[1].t - 1.75).abs() < 1e-12 && !ev[1].value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // On a transversal the planar relay is the scalar relay of its two crossings.
    #[test]
    fn confined_inputs_reduce_to_scalar_relays(
        stops in prop::collection::vec(-1.9f64..1.9, 2..12),
        c0 in -0.9f64..0.9,
        c1 in -0.9f64..0.9,
        init: bool,
    ) {
        prop_assume!(c0 + c1 > 0.05);
        let f = linear();
        let k = tilted().bind(&f).unwrap();
        let p = ParamPair::new(c0, c1);
        let r = restrict_relay(&k, p).unwrap();
        let mut input = vec![(0.0, stops[0])];
        for s in &stops[1..] {
            let (t, prev) = *input.last().unwrap();
            if *s != prev {
                input.push((t + (s - prev).abs(), *s));
            }
        }
        prop_assume!(input.len() >= 2);
        let u = Signal2D::new(input.iter().map(|x| x.0).collect(), input.iter().map(|x| k.point_at(x.1)).collect()).unwrap();
        let planar = relay_trace_threshold(&KSignals::new(&f, &u).unwrap(), p, init).unwrap();
        let (scalar_init, scalar) = r.trace(&input, init);
        prop_assert_eq!(planar.initial, scalar_init);
        prop_assert_eq!(planar.events.len(), scalar.len());
        for (a, b) in planar.events.iter().zip(&scalar) {
            prop_assert_eq!(a.value, b.value);
            prop_assert!((a.t - b.t).abs() < 1e-6, "{} vs {}", a.t, b.t);
        }
    }
}
