use dispersive_fd::analysis::{observed_order, theoretical_order};
use dispersive_fd::grid::{dft, inverse_dft, l2_discrete_norm, parseval_check, FieldState, GridSpec};
use dispersive_fd::initial_data::{cell_average_projection, cutoff, mollify, sobolev_norm, InitialDatum, Mollifier};
use dispersive_fd::reference::{coarsen_by_cell_average, exact_evolve};
use dispersive_fd::stencil::{apply, build_stencil, SchemeSpec, StencilKind};
use dispersive_fd::timestepper::build_step_operator;
use dispersive_fd::vonneumann::amplification;
use proptest::prelude::*;

fn field(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (4usize..max_len).prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, n))
}

fn even_field() -> impl Strategy<Value = Vec<f64>> {
    (4usize..40).prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, 2 * n))
}

fn kind() -> impl Strategy<Value = StencilKind> {
    prop::sample::select(StencilKind::ALL.to_vec())
}

fn grid_for(len: usize, length: f64) -> GridSpec {
    GridSpec::new(length, len, 0.01, 0.1).unwrap()
}

fn state(v: Vec<f64>) -> FieldState {
    FieldState::new(v, 0).unwrap()
}

fn norm(v: &FieldState, g: &GridSpec) -> f64 {
    l2_discrete_norm(v, g).unwrap()
}

proptest! {
    #[test]
    fn dft_round_trip(v in field(80)) {
        let s = state(v);
        let back = inverse_dft(&dft(&s));
        for (a, b) in back.iter().zip(s.values()) {
            prop_assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_holds(v in field(80), length in 1.0..100.0f64) {
        let s = state(v);
        let g = grid_for(s.len(), length);
        let n = norm(&s, &g);
        prop_assert!(parseval_check(&s, &g).unwrap() <= 1e-10 * (n * n).max(1.0));
    }

    #[test]
    fn stencil_is_linear(a in field(40), c in -3.0..3.0f64, d in -3.0..3.0f64,
                         k in kind(), p in 0u32..3) {
        let n = a.len();
        let b: Vec<f64> = a.iter().rev().map(|x| x * 0.5 - 1.0).collect();
        let g = grid_for(n, n as f64 * 0.7);
        let w = build_stencil(&SchemeSpec::new(k, p, 1.0).unwrap()).unwrap();
        let (sa, sb) = (state(a), state(b));
        let lhs = apply(&w, &sa.combine(c, &sb, d).unwrap(), &g).unwrap();
        let rhs = apply(&w, &sa, &g).unwrap().combine(c, &apply(&w, &sb, &g).unwrap(), d).unwrap();
        let scale = norm(&lhs, &g).max(norm(&rhs, &g)).max(1.0);
        prop_assert!(norm(&lhs.combine(1.0, &rhs, -1.0).unwrap(), &g) <= 1e-10 * scale);
    }

    #[test]
    fn stencil_weights_sum_to_zero(k in kind(), p in 0u32..6) {
        let w = build_stencil(&SchemeSpec::new(k, p, 1.0).unwrap()).unwrap();
        prop_assert_eq!(w.weights().iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn exact_flow_is_unitary(v in field(64), p in 0u32..4, t in 0.0..2.0f64) {
        let s = state(v);
        let g = grid_for(s.len(), 10.0);
        let n0 = norm(&s, &g);
        let out = exact_evolve(&s, &g, p, t).unwrap();
        prop_assert!((norm(&out, &g) - n0).abs() <= 1e-12 * n0.max(1.0) * 10.0);
        for sob in [1.0, 4.5, 10.0] {
            let a = sobolev_norm(&s, &g, sob).unwrap();
            let b = sobolev_norm(&out, &g, sob).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn exact_flow_is_a_group(v in field(48), p in 0u32..3, t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
        let s = state(v);
        let g = grid_for(s.len(), 12.0);
        let two = exact_evolve(&exact_evolve(&s, &g, p, t1).unwrap(), &g, p, t2).unwrap();
        let one = exact_evolve(&s, &g, p, t1 + t2).unwrap();
        for (a, b) in two.values().iter().zip(one.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coarsening_is_linear_and_nonexpansive(a in even_field(), c in -2.0..2.0f64) {
        let n = a.len();
        let b: Vec<f64> = a.iter().map(|x| x.sin()).collect();
        let (sa, sb) = (state(a), state(b));
        let fine = grid_for(n, 20.0);
        let coarse = grid_for(n / 2, 20.0);
        let ca = coarsen_by_cell_average(&sa).unwrap();
        let cb = coarsen_by_cell_average(&sb).unwrap();
        let combo = coarsen_by_cell_average(&sa.combine(c, &sb, 1.0).unwrap()).unwrap();
        let expected = ca.combine(c, &cb, 1.0).unwrap();
        for (x, y) in combo.values().iter().zip(expected.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!(norm(&ca, &coarse) <= norm(&sa, &fine) * (1.0 + 1e-12));
    }

    #[test]
    fn step_is_linear(a in field(40), c in -2.0..2.0f64, k in kind(), p in 0u32..3,
                      theta in prop::sample::select(vec![0.0, 0.25, 0.5, 1.0])) {
        let n = a.len();
        let dx: f64 = 0.4;
        let dt = 0.3 * dx.powi(2 * p as i32 + 1);
        let g = GridSpec::new(dx * n as f64, n, dt, dt).unwrap();
        let s = SchemeSpec::new(k, p, theta).unwrap();
        let op = match build_step_operator(&s, &g) {
            Ok(op) => op,
            Err(_) => return Ok(()),
        };
        let b: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let (sa, sb) = (state(a), state(b));
        let lhs = op.step(&sa.combine(c, &sb, 1.0).unwrap()).unwrap();
        let rhs = op.step(&sa).unwrap().combine(c, &op.step(&sb).unwrap(), 1.0).unwrap();
        let scale = norm(&lhs, &g).max(1.0);
        prop_assert!(norm(&lhs.combine(1.0, &rhs, -1.0).unwrap(), &g) <= 1e-10 * scale);
    }

    #[test]
    fn central_crank_nicolson_conserves_norm(v in field(64), p in 0u32..3, r in 0.01..10.0f64) {
        let n = v.len();
        let dx: f64 = 0.3;
        let dt = r * dx.powi(2 * p as i32 + 1);
        let g = GridSpec::new(dx * n as f64, n, dt, dt).unwrap();
        let op = build_step_operator(&SchemeSpec::new(StencilKind::Central, p, 0.5).unwrap(), &g).unwrap();
        let s = state(v);
        let out = op.step(&s).unwrap();
        let n0 = norm(&s, &g);
        prop_assert!((norm(&out, &g) - n0).abs() <= 1e-10 * n0.max(1.0));
    }

    #[test]
    fn central_magnitude_is_even_in_frequency(p in 0u32..4, theta in 0.0..1.0f64,
                                              xi in 0.001..0.499f64, r in 0.01..5.0f64) {
        let s = SchemeSpec::new(StencilKind::Central, p, theta).unwrap();
        let a = amplification(&s, r, 1.0, xi).unwrap().norm();
        let b = amplification(&s, r, 1.0, 1.0 - xi).unwrap().norm();
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn projection_is_linear_and_exact_on_constants(c in -5.0..5.0f64, k in 0u64..8) {
        let g = grid_for(64, 50.0);
        let constant = InitialDatum::SingleMode { mode: 0, coefficient: rustfft::num_complex::Complex64::new(c, 0.0) };
        let v = cell_average_projection(&constant, &g).unwrap();
        prop_assert!(v.values().iter().all(|x| (x - c).abs() < 1e-12));
        let scaled = InitialDatum::SingleMode { mode: k as i64, coefficient: rustfft::num_complex::Complex64::new(c, 0.0) };
        let unit = cell_average_projection(&InitialDatum::single_mode(k as i64), &g).unwrap();
        let got = cell_average_projection(&scaled, &g).unwrap();
        for (a, b) in got.values().iter().zip(unit.values()) {
            prop_assert!((a - c * b).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_zero_is_l2(v in field(64), length in 1.0..60.0f64) {
        let s = state(v);
        let g = grid_for(s.len(), length);
        prop_assert!((sobolev_norm(&s, &g, 0.0).unwrap() - norm(&s, &g)).abs() < 1e-10 * norm(&s, &g).max(1.0));
    }

    #[test]
    fn mollifier_is_nonexpansive(v in field(64), delta in 0.01..5.0f64) {
        let s = state(v);
        let g = grid_for(s.len(), 10.0);
        let out = mollify(&s, &g, &Mollifier::new(delta).unwrap()).unwrap();
        prop_assert!(norm(&out, &g) <= norm(&s, &g) * (1.0 + 1e-12));
    }

    #[test]
    fn cutoff_is_even_and_bounded(t in -2.0..2.0f64) {
        let c = cutoff(t);
        prop_assert_eq!(c, cutoff(-t));
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn predicted_order_is_monotone_in_m(m1 in 0.0..20.0f64, dm in 0.0..5.0f64, p in 0u32..4,
                                        theta in prop::sample::select(vec![0.0, 0.5, 1.0]),
                                        central in any::<bool>()) {
        let kind = if central { StencilKind::Central } else if p % 2 == 0 { StencilKind::Backward } else { StencilKind::Forward };
        let a = theoretical_order(m1, p, kind, theta, 1.0).unwrap();
        let b = theoretical_order(m1 + dm, p, kind, theta, 1.0).unwrap();
        prop_assert!(a.overall_order_under_coupling <= b.overall_order_under_coupling);
        prop_assert!(b.time_exponent <= 2.0 && b.space_exponent <= 2.0);
    }

    #[test]
    fn observed_order_recovers_power_laws(rate in 0.05..3.0f64, c in 1e-6..1e3f64) {
        let pairs: Vec<(f64, f64)> = (0..5).map(|i| {
            let dx = 0.1 / 2f64.powi(i);
            (dx, c * dx.powf(rate))
        }).collect();
        for o in observed_order(&pairs).unwrap() {
            prop_assert!((o - rate).abs() < 1e-10);
        }
    }
}
