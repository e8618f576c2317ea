use amerput_core::interp::{
    accumulate_coupling, cubic_weights, map_point, quintic_weights, z_derivative, Branch, CouplingTerms,
};
use amerput_core::*;
use proptest::prelude::*;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn dpoly(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &a)| acc * x + i as f64 * a)
}

fn scale(c: &[f64], lo: f64, hi: f64) -> f64 {
    let m = lo.abs().max(hi.abs()).max(1.0);
    c.iter().enumerate().map(|(i, a)| a.abs() * m.powi(i as i32)).sum::<f64>().max(1.0)
}

proptest! {
    #[test]
    fn cubic_is_exact_on_cubics(
        c in prop::collection::vec(-10.0f64..10.0, 4),
        x_j in -3.0f64..3.0,
        h in 0.01f64..1.0,
        t in 0.0f64..=1.0,
    ) {
        let xs = x_j + t * h;
        let w = cubic_weights(xs, x_j, h).unwrap();
        let got = w.apply([poly(&c, x_j), poly(&c, x_j + h)], [dpoly(&c, x_j), dpoly(&c, x_j + h)]);
        let want = poly(&c, xs);
        prop_assert!((got - want).abs() <= 1e-10 * scale(&c, x_j, x_j + h), "{got} vs {want}");
    }

    #[test]
    fn quintic_is_exact_on_quintics(
        c in prop::collection::vec(-10.0f64..10.0, 6),
        x_j in -3.0f64..3.0,
        h in 0.01f64..1.0,
        t in -1.0f64..=1.0,
    ) {
        let xs = x_j + t * h;
        let nodes = [x_j - h, x_j, x_j + h];
        let f = nodes.map(|x| poly(&c, x));
        let fp = nodes.map(|x| dpoly(&c, x));
        let w = quintic_weights(xs, x_j, h).unwrap();
        let tol = 1e-10 * scale(&c, x_j - h, x_j + h);
        prop_assert!((w.apply(f, fp) - poly(&c, xs)).abs() <= tol);
        prop_assert!((w.apply_derivative(f, fp) - dpoly(&c, xs)).abs() <= tol / h);
    }

    #[test]
    fn weights_reject_points_outside_the_bracket(x_j in -3.0f64..3.0, h in 0.01f64..1.0, d in 0.01f64..1.0) {
        prop_assert!(cubic_weights(x_j + h * (1.0 + d), x_j, h).is_err());
        prop_assert!(cubic_weights(x_j - h * d, x_j, h).is_err());
        prop_assert!(quintic_weights(x_j + h * (1.0 + d), x_j, h).is_err());
    }

    #[test]
    fn hermite_at_is_exact_on_grid_cubics(c in prop::collection::vec(-2.0f64..2.0, 4), x in 0.0f64..=3.0) {
        let grid = GridSpec::new(3.0, 30, 1.0, 10).unwrap();
        let f: Vec<f64> = (0..=grid.m).map(|i| poly(&c, grid.x(i))).collect();
        let fp: Vec<f64> = (0..=grid.m).map(|i| dpoly(&c, grid.x(i))).collect();
        prop_assert!((hermite_at(&f, &fp, x, &grid) - poly(&c, x)).abs() <= 1e-10 * scale(&c, 0.0, 3.0));
    }
}

#[test]
fn weight_identities_at_bracket_ends() {
    let h = 0.1;
    let w = cubic_weights(0.5, 0.5, h).unwrap();
    assert_eq!((w.a_c, w.b_c, w.c_c, w.d_c), (1.0, 0.0, 0.0, 0.0));
    let w = cubic_weights(0.6, 0.5, h).unwrap();
    assert!((w.a_c).abs() < 1e-14 && (w.b_c - 1.0).abs() < 1e-14);
    assert!(w.c_c.abs() < 1e-14 && w.d_c.abs() < 1e-14);
    let q = quintic_weights(0.5, 0.5, h).unwrap();
    assert_eq!(q.value, [0.0, 1.0, 0.0]);
    assert_eq!(q.slope, [0.0, 0.0, 0.0]);
}

#[test]
fn z_derivative_exact_on_quartic() {
    let grid = GridSpec::new(2.0, 20, 1.0, 10).unwrap();
    let z: Vec<f64> = (0..=grid.m).map(|i| grid.x(i).powi(4)).collect();
    let d = z_derivative(&z, grid.h).unwrap();
    for (i, v) in d.iter().enumerate() {
        let x = grid.x(i);
        assert!((v - 4.0 * x.powi(3)).abs() < 1e-9, "node {i}: {v}");
    }
    assert!(z_derivative(&z[..4], grid.h).is_err());
}

#[test]
fn z_derivative_fourth_order_on_sine() {
    let err = |m: usize| {
        let h = 2.0 / m as f64;
        let z: Vec<f64> = (0..=m).map(|i| (i as f64 * h).sin()).collect();
        let d = z_derivative(&z, h).unwrap();
        d.iter().enumerate().map(|(i, v)| (v - (i as f64 * h).cos()).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(20), err(40));
    assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
}

#[test]
fn left_seam_is_continuous() {
    // Regime l holds the smooth continuation of the exercise-region formula,
    // so u(0) = K - s_f and w = y = z = -s_f at the seam.
    let grid = GridSpec::new(3.0, 300, 1.0, 10).unwrap();
    let strike = 9.0;
    let s_l = 8.0;
    let mut st = RegimeState::zeros(grid.m + 1, s_l);
    for i in 0..=grid.m {
        let (u, w, y, z) = exercise_region_values(s_l, grid.x(i), strike);
        st.u[i] = u;
        st.w[i] = w;
        st.y[i] = y;
        st.z[i] = z;
    }
    let zs = z_derivative(&st.z, grid.h).unwrap();
    let at_seam = exercise_region_values(s_l, 0.0, strike);
    for order in [InterpOrder::Cubic, InterpOrder::Quintic] {
        for eps in [1e-3, 1e-5, 1e-8] {
            // x_l = +eps through the interior branch, x_l = -eps through the left branch.
            let inside = sample_coupling(&st, eps, s_l, strike, order, &zs, &grid).unwrap();
            let outside = sample_coupling(&st, 0.0, s_l * (-eps).exp(), strike, order, &zs, &grid).unwrap();
            let bound = 2.0 * s_l * eps + 1e-8;
            for (a, b) in [(inside.u, outside.u), (inside.w, outside.w), (inside.y, outside.y), (inside.z, outside.z)] {
                assert!((a - b).abs() <= bound, "{order:?} eps={eps}: {a} vs {b}");
            }
            assert!((inside.u - at_seam.0).abs() <= 1.01 * s_l * eps + 1e-8);
            assert!((inside.w - at_seam.1).abs() <= 1.01 * s_l * eps + 1e-8);
        }
    }
}

#[test]
fn mapping_branches() {
    let grid = GridSpec::new(3.0, 300, 1.0, 10).unwrap();
    assert_eq!(map_point(0.5, 9.0, 9.0, &grid).unwrap().branch, Branch::Interior);
    assert_eq!(map_point(0.0, 9.0, 8.0, &grid).unwrap().branch, Branch::Left);
    assert_eq!(map_point(2.99, 4.0, 9.0, &grid).unwrap().branch, Branch::Right);
    assert!(map_point(0.5, 0.0, 9.0, &grid).is_err());
}

#[test]
fn accumulated_coupling_matches_pointwise_samples() {
    let grid = GridSpec::new(3.0, 60, 1.0, 10).unwrap();
    let strike = 9.0;
    let s_l = 7.3;
    let mut st = RegimeState::zeros(grid.m + 1, s_l);
    for i in 0..=grid.m {
        let x = grid.x(i);
        let e = (-1.3 * x).exp();
        st.u[i] = (strike - s_l) * e + 0.2 * x * x * e;
        st.w[i] = -1.3 * (strike - s_l) * e + 0.2 * (2.0 * x - 1.3 * x * x) * e;
        st.y[i] = 1.69 * (strike - s_l) * e + 0.2 * (2.0 - 5.2 * x + 1.69 * x * x) * e;
        st.z[i] = -2.197 * (strike - s_l) * e + 0.2 * (-7.8 + 10.14 * x - 2.197 * x * x) * e;
    }
    let zs = z_derivative(&st.z, grid.h).unwrap();
    for order in [InterpOrder::Cubic, InterpOrder::Quintic] {
        for s_m in [6.1, 7.3, 8.4] {
            let mut terms = CouplingTerms::zeros(grid.m + 1);
            accumulate_coupling(&mut terms, 0.5, &st, &zs, s_m, strike, order, &grid).unwrap();
            for i in 0..=grid.m {
                let p = sample_coupling(&st, grid.x(i), s_m, strike, order, &zs, &grid).unwrap();
                for (a, b) in [(terms.u[i], p.u), (terms.w[i], p.w), (terms.y[i], p.y), (terms.z[i], p.z)] {
                    assert!((a - 0.5 * b).abs() < 1e-11, "{order:?} s_m={s_m} i={i}: {a} vs {}", 0.5 * b);
                }
            }
        }
    }
}
