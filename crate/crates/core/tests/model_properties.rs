use amerput_core::model::initial_state;
use amerput_core::*;
use proptest::prelude::*;

fn random_generator(n: usize, rates: &[f64]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|m| {
            let mut row: Vec<f64> = (0..n).map(|l| if l == m { 0.0 } else { rates[m * n + l] }).collect();
            row[m] = -row.iter().sum::<f64>();
            row
        })
        .collect()
}

proptest! {
    #[test]
    fn well_formed_generators_are_accepted(n in 1usize..7, raw in prop::collection::vec(0.0f64..5.0, 36)) {
        let rows = random_generator(n, &raw);
        let g = validate_generator(&rows).unwrap();
        prop_assert_eq!(g.num_regimes(), n);
        prop_assert_eq!(g.rows(), rows);
    }

    #[test]
    fn negative_off_diagonal_is_rejected(
        n in 2usize..7,
        raw in prop::collection::vec(0.0f64..5.0, 36),
        at in (0usize..7, 0usize..7),
        v in 1e-6f64..3.0,
    ) {
        let (m, l) = (at.0 % n, at.1 % n);
        prop_assume!(m != l);
        let mut rows = random_generator(n, &raw);
        rows[m][l] = -v;
        rows[m][m] = -rows[m].iter().enumerate().filter(|(j, _)| *j != m).map(|(_, q)| q).sum::<f64>();
        let is_negative_off_diagonal = matches!(
            validate_generator(&rows),
            Err(Error::NegativeOffDiagonal { row, col, .. }) if row == m && col == l
        );
        prop_assert!(is_negative_off_diagonal);
    }

    #[test]
    fn row_sum_violation_is_rejected(
        n in 1usize..7,
        raw in prop::collection::vec(0.0f64..5.0, 36),
        row in 0usize..7,
        bump in prop_oneof![1e-9f64..1.0, -1.0f64..-1e-9],
    ) {
        let m = row % n;
        let mut rows = random_generator(n, &raw);
        rows[m][m] += bump;
        let is_row_sum_violation =
            matches!(validate_generator(&rows), Err(Error::RowSumViolation { row, .. }) if row == m);
        prop_assert!(is_row_sum_violation);
    }

    #[test]
    fn omega_without_boundary_motion(s in 0.1f64..100.0, k in 1e-6f64..1.0, r in 0.0f64..1.0, vol in 0.01f64..2.0) {
        let w = omega(s, s, k, r, vol).unwrap();
        prop_assert!((w - (r - vol * vol / 2.0)).abs() <= 1e-14);
    }

    #[test]
    fn omega_matches_direct_evaluation(
        a in 0.1f64..20.0, b in 0.1f64..20.0, k in 1e-4f64..1.0, r in 0.0f64..0.5, vol in 0.05f64..1.0,
    ) {
        let expected = 2.0 * (a - b) / (k * (a + b)) + r - vol * vol / 2.0;
        let w = omega(a, b, k, r, vol).unwrap();
        prop_assert!((w - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn exercise_region_closed_form(s_f in 0.1f64..50.0, x in -5.0f64..=0.0, strike in 0.1f64..50.0) {
        let (u, w, y, z) = exercise_region_values(s_f, x, strike);
        prop_assert!((u + s_f * x.exp() - strike).abs() <= 1e-12 * strike.max(s_f));
        prop_assert_eq!(w, y);
        prop_assert_eq!(y, z);
        prop_assert!((w + s_f * x.exp()).abs() <= 1e-12 * s_f);
    }
}

#[test]
fn generator_examples() {
    assert!(validate_generator(&[vec![-6.0, 6.0], vec![9.0, -9.0]]).is_ok());
    assert!(validate_generator(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap().is_decoupled());
    assert!(matches!(
        validate_generator(&[vec![-1.0, -1.0], vec![2.0, -2.0]]),
        Err(Error::NegativeOffDiagonal { row: 0, col: 1, .. })
    ));
    assert!(matches!(validate_generator(&[vec![-1.0, 1.0], vec![2.0]]), Err(Error::NotSquare { row: 1, .. })));
}

#[test]
fn exercise_region_examples() {
    assert_eq!(exercise_region_values(9.0, 0.0, 9.0), (0.0, -9.0, -9.0, -9.0));
    let (u, w, y, z) = exercise_region_values(8.0, -(2f64.ln()), 9.0);
    for (got, want) in [(u, 5.0), (w, -4.0), (y, -4.0), (z, -4.0)] {
        assert!((got - want).abs() < 1e-14);
    }
    let e = (-0.3f64).exp();
    let (u, w, ..) = exercise_region_values(8.5, -0.3, 9.0);
    assert!((u - (9.0 - 8.5 * e)).abs() < 1e-14);
    assert!((w + 8.5 * e).abs() < 1e-14);
}

#[test]
fn initial_state_is_zero_with_boundary_at_strike() {
    for f in fixtures() {
        let grid = GridSpec::from_steps(3.0, 0.1, f.model.expiry, None).unwrap();
        let states = initial_state(&f.model, &grid);
        assert_eq!(states.len(), f.model.num_regimes());
        for s in &states {
            assert_eq!(s.s_f, f.model.strike);
            assert!(s.u.iter().chain(&s.w).chain(&s.y).chain(&s.z).all(|&v| v == 0.0));
            assert_eq!(s.u.len(), grid.m + 1);
        }
    }
}

#[test]
fn grid_spec_consistency() {
    let g = GridSpec::from_steps(3.0, 0.01, 1.0, None).unwrap();
    assert_eq!((g.m, g.n), (300, 10_000));
    assert!((g.x(300) - 3.0).abs() < 1e-12);
    assert!((g.k - 1e-4).abs() < 1e-16);
    assert!(GridSpec::new(3.0, 3, 1.0, 10).is_err());
    assert!(GridSpec::from_steps(3.0, -0.1, 1.0, None).is_err());
}

#[test]
fn every_fixture_generator_is_valid() {
    for f in fixtures() {
        assert!(validate_generator(&f.model.generator.rows()).is_ok(), "{}", f.name);
    }
}

#[test]
fn model_validation() {
    let g = validate_generator(&[vec![0.0]]).unwrap();
    assert!(RegimeModel::new(vec![0.0], vec![0.2], g.clone(), 9.0, 1.0).is_ok());
    assert!(RegimeModel::new(vec![-0.1], vec![0.2], g.clone(), 9.0, 1.0).is_err());
    assert!(RegimeModel::new(vec![0.1], vec![0.0], g.clone(), 9.0, 1.0).is_err());
    assert!(RegimeModel::new(vec![0.1, 0.2], vec![0.2], g.clone(), 9.0, 1.0).is_err());
    assert!(RegimeModel::new(vec![0.1], vec![0.2], g, 0.0, 1.0).is_err());
}
