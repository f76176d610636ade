use adjchar::forms::{characteristic_directions, degree_two_residual, form_rank, DEFAULT_RANK_TOL};
use adjchar::gas::{fluxes_2d, ConservState2, GasModel};
use adjchar::jacobians::{
    coefficient_table, coefficient_table_factored, jacobian_transpose_2d, system_matrix_8,
    CoeffTable, Direction,
};
use adjchar::linalg::minor_determinant;
use adjchar::{Dir, Gas, Residual, State2};
use proptest::prelude::*;

fn gas() -> Gas {
    Gas::diatomic()
}

fn state() -> impl Strategy<Value = State2> {
    (0.5..2.0f64, -3.0..3.0f64, -3.0..3.0f64, 0.3..2.0f64)
        .prop_map(|(rho, u, v, c)| State2::from_primitive(rho, u, v, rho * c * c / 1.4, &gas()))
}

fn supersonic() -> impl Strategy<Value = (State2, f64)> {
    (0.5..2.0f64, 0.3..2.0f64, 1.001..4.0f64, -3.1..3.1f64)
        .prop_map(|(rho, c, m, phi)| (State2::from_mach(rho, c, m, phi, &gas()), phi))
}

/// Angle whose direction keeps `|dx| >= 0.05`.
fn angle() -> impl Strategy<Value = f64> {
    (-1.5..1.5f64, any::<bool>())
        .prop_map(|(a, flip)| if flip { a + std::f64::consts::PI } else { a })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn direction_is_unit_and_keeps_angle(dx in -10.0..10.0f64, dy in -10.0..10.0f64) {
        prop_assume!(dx.hypot(dy) > 1e-6);
        let d = Dir::new(dx, dy).unwrap();
        prop_assert!((d.dx().hypot(d.dy()) - 1.0).abs() < 1e-15);
        prop_assert!((d.dx() * dy - d.dy() * dx).abs() < 1e-12 * dx.hypot(dy));
        prop_assert!(d.dx() * dx + d.dy() * dy > 0.0);
    }

    #[test]
    fn closed_forms_equal_minors(s in state(), th in angle()) {
        let g = gas();
        let d = Dir::from_angle(th);
        let m8 = system_matrix_8(&s, &d, &g).unwrap();
        let t = coefficient_table(&s, &d, &g).unwrap();
        for m in 1..=4 {
            for l in 1..=4 {
                prop_assert!(rel(t.cx(m, l), minor_determinant(&m8, l - 1, m - 1)) < 1e-9);
                prop_assert!(rel(t.cy(m, l), minor_determinant(&m8, l - 1, 3 + m)) < 1e-9);
            }
        }
    }

    #[test]
    fn off_diagonal_xy_proportional(s in state(), th in angle()) {
        let g = gas();
        let d = Dir::from_angle(th);
        let tt = d.dy() / d.dx();
        let c = coefficient_table(&s, &d, &g).unwrap();
        for m in 1..=4 {
            for l in (1..=4).filter(|&l| l != m) {
                prop_assert!(rel(c.cx(m, l), -tt * c.cy(m, l)) < 1e-10, "l={} m={}", l, m);
            }
        }
    }

    #[test]
    fn factored_table_scales_to_full(s in state(), th in angle()) {
        let g = gas();
        let d = Dir::from_angle(th);
        let p = s.primitive(&g).unwrap();
        let kappa_dx = p.u * d.dy() - p.v * d.dx();
        let full = coefficient_table(&s, &d, &g).unwrap();
        let fac = coefficient_table_factored(&s, &d, &g).unwrap();
        for m in 1..=4 {
            for l in 1..=4 {
                prop_assert!(rel(full.cx(m, l), kappa_dx * fac.cx(m, l)) < 1e-12);
                prop_assert!(rel(full.cy(m, l), kappa_dx * fac.cy(m, l)) < 1e-12);
            }
        }
    }

    #[test]
    fn transposed_jacobians_match_flux_differences((s, _) in supersonic(), k in 0usize..4) {
        let g = gas();
        let (a, b) = jacobian_transpose_2d(&s, &g).unwrap();
        let q = s.as_array();
        let h = 1e-6 * q[k].abs().max(1.0);
        let (mut qp, mut qm) = (q, q);
        qp[k] += h;
        qm[k] -= h;
        let (fp, gp) = fluxes_2d(&ConservState2::from_array(qp), &g);
        let (fm, gm) = fluxes_2d(&ConservState2::from_array(qm), &g);
        for i in 0..4 {
            let scale = 1f64.max(a[k][i].abs()).max(b[k][i].abs());
            prop_assert!(((fp[i] - fm[i]) / (2.0 * h) - a[k][i]).abs() < 1e-6 * scale);
            prop_assert!(((gp[i] - gm[i]) / (2.0 * h) - b[k][i]).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn ranks_by_direction((s, phi) in supersonic(), th in -3.1..3.1f64) {
        let g = gas();
        prop_assert_eq!(form_rank(&s, &Dir::from_angle(phi), &g, DEFAULT_RANK_TOL).unwrap(), 2);
        let cd = characteristic_directions(&s, &g).unwrap();
        prop_assert_eq!(form_rank(&s, &cd.c_plus_dir.unwrap(), &g, DEFAULT_RANK_TOL).unwrap(), 1);
        prop_assert_eq!(form_rank(&s, &cd.c_minus_dir.unwrap(), &g, DEFAULT_RANK_TOL).unwrap(), 1);
        let beta = (1.0 / s.primitive(&g).unwrap().mach).asin();
        let gap = |a: f64| (a - th).sin().abs();
        prop_assume!(gap(phi) > 1e-3 && gap(phi + beta) > 1e-3 && gap(phi - beta) > 1e-3);
        prop_assert!(form_rank(&s, &Dir::from_angle(th), &g, DEFAULT_RANK_TOL).unwrap() >= 3);
    }

    #[test]
    fn degree_two_at_characteristic_slopes((s, _) in supersonic()) {
        let g = gas();
        let cd = characteristic_directions(&s, &g).unwrap();
        for d in [cd.c_plus_dir.unwrap(), cd.c_minus_dir.unwrap()] {
            if let Some(t) = d.slope() {
                prop_assert!(degree_two_residual(&s, t, &g).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn residual_total_is_sum_of_subparts(p in prop::array::uniform4(-1e3..1e3f64)) {
        let r = Residual::from_subparts(p);
        prop_assert!((r.total - p.iter().sum::<f64>()).abs() <= 1e-12 * p.iter().map(|x| x.abs()).sum::<f64>().max(1.0));
        prop_assert_eq!(r.max_abs_subpart(), p.iter().fold(0f64, |a, x| a.max(x.abs())));
    }
}

#[test]
fn f32_table_tracks_f64() {
    let g64 = GasModel::<f64>::diatomic();
    let g32 = GasModel::<f32>::diatomic();
    let s64 = ConservState2::from_primitive(1.1, 0.7, -0.4, 0.9, &g64);
    let s32 = ConservState2::from_primitive(1.1f32, 0.7, -0.4, 0.9, &g32);
    let t64: CoeffTable<f64> =
        coefficient_table(&s64, &Direction::new(0.6, 0.8).unwrap(), &g64).unwrap();
    let t32: CoeffTable<f32> =
        coefficient_table(&s32, &Direction::new(0.6f32, 0.8).unwrap(), &g32).unwrap();
    for m in 1..=4 {
        for l in 1..=4 {
            assert!(rel(f64::from(t32.cx(m, l)), t64.cx(m, l)) < 1e-4);
            assert!(rel(f64::from(t32.cy(m, l)), t64.cy(m, l)) < 1e-4);
        }
    }
}
