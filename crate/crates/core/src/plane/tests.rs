use proptest::prelude::*;

use super::*;
use crate::foliation::{Domain, Family};
use crate::geometry::Point2;

fn triangle_foliation() -> FoliationPair {
    FoliationPair::linear(
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap(),
        Point2::new(1.0, 0.0),
        ParamRange::new(-1.0, 1.0).unwrap(),
        ParamRange::new(-1.0, 1.0).unwrap(),
        1e-3,
    )
    .unwrap()
}

fn triangle(h: f64) -> RelayGrid {
    RelayGrid::build(&triangle_foliation(), &WeightFunction::Constant(1.0), h, InitialState::AllZero).unwrap()
}

fn path(xs: &[f64]) -> Signal2D {
    Signal2D::polyline(&xs.iter().map(|&x| Point2::new(x, 0.0)).collect::<Vec<_>>()).unwrap()
}

#[test]
fn triangle_area_converges() {
    let mut prev = f64::INFINITY;
    for h in [0.2, 0.1, 0.05, 0.025] {
        let g = triangle(h);
        let err = (g.total_area() - 2.0).abs();
        assert!(err <= 2.0 * h, "h = {h}: area {}", g.total_area());
        assert!(err < prev);
        prev = err;
        for c in g.cells() {
            assert!(c.pair.c0 + c.pair.c1 >= 1e-3);
        }
    }
    assert_eq!(triangle(0.1).len(), 190);
}

#[test]
fn initial_assignments() {
    let g = triangle(0.2);
    assert!(g.states().iter().all(|s| !s));
    assert_eq!(g.value(), 0.0);
    let f = triangle_foliation();
    let w = WeightFunction::Constant(1.0);
    let g = RelayGrid::build(&f, &w, 0.2, InitialState::AllOne).unwrap();
    assert!((g.value() - g.total_area()).abs() < 1e-12);
    let n = g.len();
    let per: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let g = RelayGrid::build(&f, &w, 0.2, InitialState::PerCell(per.clone())).unwrap();
    assert_eq!(g.states(), per);
    assert!(matches!(
        RelayGrid::build(&f, &w, 0.2, InitialState::PerCell(vec![true])),
        Err(Error::InvalidGrid(_))
    ));
}

#[test]
fn coarse_resolution() {
    let f = triangle_foliation();
    let w = WeightFunction::Constant(1.0);
    // the sole midpoint (0, 0) sits on the diagonal
    assert_eq!(RelayGrid::build(&f, &w, 3.0, InitialState::AllZero).unwrap_err(), Error::EmptyRegion { h: 3.0 });
    let g = FoliationPair::linear(
        f.domain().clone(),
        Point2::new(1.0, 0.0),
        ParamRange::new(0.0, 1.0).unwrap(),
        ParamRange::new(0.0, 1.0).unwrap(),
        1e-3,
    )
    .unwrap();
    let grid = RelayGrid::build(&g, &w, 5.0, InitialState::AllZero).unwrap();
    assert_eq!(grid.len(), 1);
    assert_eq!(grid.cells()[0].pair, ParamPair::new(0.5, 0.5));
    assert!(RelayGrid::build(&g, &w, -1.0, InitialState::AllZero).is_err());
}

#[test]
fn weights_are_evaluated_at_centers() {
    let f = triangle_foliation();
    let w = WeightFunction::expression("c0 - c1").unwrap();
    let g = RelayGrid::build(&f, &w, 0.25, InitialState::AllZero).unwrap();
    for c in g.cells() {
        assert_eq!(c.weight, c.pair.c0 - c.pair.c1);
    }
    let bad = WeightFunction::expression("1 / (c0 - c0)").unwrap();
    assert!(matches!(RelayGrid::build(&f, &bad, 0.25, InitialState::AllZero), Err(Error::InvalidWeight(_))));
}

#[test]
fn constant_input_in_the_overlap_keeps_zero() {
    let mut g = triangle(0.1);
    // K0 = -1 stays below every c0 and K1 = 1 holds every relay at 0
    let u = Signal2D::new(vec![0.0, 1.0, 2.0], vec![Point2::new(-1.0, 0.3); 3]).unwrap();
    let out = g.apply(&u).unwrap();
    assert!(out.samples.iter().all(|s| s.1 == 0.0));
    assert_eq!(out.samples.len(), 3);
}

#[test]
fn saturation_and_partial_return() {
    for h in [0.1, 0.05] {
        let mut g = triangle(h);
        let out = g.apply(&path(&[-1.5, 1.5])).unwrap();
        assert!((out.final_value() - 2.0).abs() <= 2.0 * h);
        assert!((out.final_value() - g.total_area()).abs() < 1e-9);

        let mut g = triangle(h);
        let out = g.apply(&path(&[-1.5, 1.5, 0.0])).unwrap();
        assert!((out.final_value() - 1.5).abs() <= 2.0 * h);
    }
}

#[test]
fn output_rows_are_samples_plus_events() {
    let mut g = triangle(0.2);
    let u = path(&[-1.5, 1.5, 0.0]);
    let out = g.apply(&u).unwrap();
    assert_eq!(out.samples.len(), u.len() + out.events);
    assert!(out.samples.windows(2).all(|w| w[0].0 <= w[1].0));
    // chained application continues from the stored state
    let before = g.value();
    let out2 = g.apply(&Signal2D::new(vec![0.0, 1.0], vec![Point2::ORIGIN; 2]).unwrap()).unwrap();
    assert_eq!(out2.events, 0);
    assert_eq!(out2.initial_value(), before);
}

#[test]
fn grid_csv_round_trip() {
    let mut g = triangle(0.25);
    g.apply(&path(&[-1.5, 0.4])).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let back = RelayGrid::read_csv(&triangle_foliation(), buf.as_slice()).unwrap();
    assert_eq!(back.cells(), g.cells());
    assert_eq!(back.h(), 0.25);
    let bad = "c0,c1,area,weight,state\n0.5,-0.9,0.01,1,0\n";
    assert!(RelayGrid::read_csv(&triangle_foliation(), bad.as_bytes()).is_err());
}

fn memory(xs: &[f64]) -> MemoryInterface {
    let f = triangle_foliation();
    dominant_reversals(&KSignals::new(&f, &path(xs)).unwrap()).unwrap()
}

#[test]
fn monotone_input_has_one_terminal_entry() {
    let m = memory(&[-0.5, 0.2, 0.8]);
    assert_eq!(m.levels(), vec![(Family::Zero, 0.8)]);
    assert!(m.entries[0].terminal);
    assert!(m.trailing.is_empty());
}

#[test]
fn inner_excursion_is_wiped() {
    let m = memory(&[0.0, 0.9, -0.2, 0.5, -0.8, 0.3]);
    let lv = m.levels();
    assert_eq!(lv.len(), 3);
    assert_eq!(lv[0], (Family::Zero, 0.9));
    assert_eq!(lv[1].0, Family::One);
    assert!((lv[1].1 - 0.8).abs() < 1e-12);
    assert_eq!(lv[2], (Family::Zero, 0.3));
    assert!(m.entries[2].terminal);
}

#[test]
fn equal_maxima_keep_the_later_one() {
    let m = memory(&[0.0, 0.7, 0.2, 0.7, 0.1]);
    let zeros: Vec<_> = m.entries.iter().filter(|e| e.family == Family::Zero).collect();
    assert_eq!(zeros.len(), 1);
    assert_eq!(zeros[0].level, 0.7);
    assert_eq!(zeros[0].t, 0.7 + 0.5 + 0.5);
}

#[test]
fn descent_below_the_start_survives_a_later_maximum() {
    let m = memory(&[0.0, 0.5, -0.2, 0.9]);
    let lv = m.levels();
    assert_eq!(lv.len(), 2);
    assert_eq!(lv[0].0, Family::One);
    assert!((lv[0].1 - 0.2).abs() < 1e-12);
    assert_eq!(lv[1], (Family::Zero, 0.9));
}

fn final_states(xs: &[f64], i0: InitialState) -> (Vec<bool>, Vec<bool>, Signal2D) {
    let f = triangle_foliation();
    let u = path(xs);
    let r = reduce_history(&u, &f).unwrap();
    let w = WeightFunction::Constant(1.0);
    let mut a = RelayGrid::build(&f, &w, 0.05, i0.clone()).unwrap();
    let mut b = RelayGrid::build(&f, &w, 0.05, i0).unwrap();
    a.apply(&u).unwrap();
    b.apply(&r).unwrap();
    (a.states(), b.states(), r)
}

#[test]
fn reduce_history_examples() {
    let (a, b, r) = final_states(&[-0.5, 0.1, 0.8], InitialState::AllZero);
    assert_eq!(a, b);
    assert_eq!(r.points(), &[Point2::new(-0.5, 0.0), Point2::new(0.8, 0.0)]);

    let (a, b, r) = final_states(&[0.0, 0.5, 0.0, 0.9], InitialState::AllZero);
    assert_eq!(a, b);
    assert_eq!(r.points(), &[Point2::new(0.0, 0.0), Point2::new(0.9, 0.0)]);

    let (a, b, r) = final_states(&[0.0, 1.5, 0.0], InitialState::AllZero);
    assert_eq!(a, b);
    assert_eq!(r.points().len(), 3);
}

#[test]
fn remanence_after_a_closed_loop() {
    let mut g = triangle(0.05);
    let out = g.apply(&path(&[0.0, 1.5, 0.0])).unwrap();
    assert!((out.final_value() - 1.5).abs() <= 0.1);
    assert!((out.final_value() - out.initial_value()).abs() >= 1.0 - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reduced_history_reproduces_final_states(xs in prop::collection::vec(-1.9f64..1.9, 2..14), ones: bool) {
        let i0 = if ones { InitialState::AllOne } else { InitialState::AllZero };
        let (a, b, _) = final_states(&xs, i0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reduction_is_idempotent(xs in prop::collection::vec(-1.9f64..1.9, 2..14)) {
        let f = triangle_foliation();
        let r1 = reduce_history(&path(&xs), &f).unwrap();
        let r2 = reduce_history(&r1, &f).unwrap();
        prop_assert_eq!(r1.points(), r2.points());
    }

    #[test]
    fn memory_levels_decrease_per_channel(xs in prop::collection::vec(-1.9f64..1.9, 2..14)) {
        let m = memory(&xs);
        for w in m.entries.windows(2) {
            prop_assert_ne!(w[0].family, w[1].family);
        }
        for fam in [Family::Zero, Family::One] {
            let lv: Vec<f64> = m.entries.iter().filter(|e| e.family == fam).map(|e| e.level).collect();
            for w in lv.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn output_is_the_weighted_state_sum(xs in prop::collection::vec(-1.9f64..1.9, 2..8)) {
        let mut g = triangle(0.1);
        let out = g.apply(&path(&xs)).unwrap();
        prop_assert!((out.final_value() - g.value()).abs() < 1e-9);
    }
}
