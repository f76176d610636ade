use adjchar::analytic::{gamma_along, relative_spread, stripe_grid, BBox, StripeField};
use adjchar::{
    k_integrals, trace, CompatKind, CompatReport, Curve, Error, Family, FieldGrid, FlowField,
    TraceConfig,
};

fn fixture(mach: f64, alpha: f64) -> (StripeField<f64>, FieldGrid) {
    let f = StripeField::demo(mach, alpha).unwrap();
    let g = stripe_grid(&f, BBox::square(1.5), 129, 129).unwrap();
    (f, g)
}

fn curves(f: &StripeField<f64>, g: &FieldGrid) -> Vec<Curve> {
    let cfg = TraceConfig {
        step: 0.01,
        max_length: 10.0,
        ..TraceConfig::default()
    };
    f.demo_starts()
        .iter()
        .map(|&(family, start)| trace(g, start, family, &cfg).unwrap())
        .collect()
}

#[test]
fn stripe_fixture_satisfies_every_relation() {
    for (mach, alpha) in [(2.0, 0.0), (1.6, 3f64.to_radians()), (3.0, -0.4)] {
        let (f, g) = fixture(mach, alpha);
        for c in curves(&f, &g) {
            assert!(c.length() > 1.0, "{} curve too short at M={mach}", c.family);
            for k in CompatKind::for_family(c.family) {
                let r = k_integrals(&c, *k).unwrap();
                assert!(r.max_abs_subpart > 1e-2, "{k}: subparts vanish");
                assert!(
                    r.ratio < 1e-10,
                    "{k} at M={mach}, alpha={alpha}: ratio {}",
                    r.ratio
                );
            }
        }
    }
}

#[test]
fn gamma_constant_along_own_family() {
    let (f, g) = fixture(2.0, 0.1);
    for c in curves(&f, &g) {
        let gm = gamma_along(&c).unwrap();
        let own: Vec<Vec<f64>> = match c.family {
            Family::S => vec![gm.s1.clone(), gm.s2.clone()],
            Family::CPlus => vec![gm.cplus.iter().map(|v| v.unwrap()).collect()],
            Family::CMinus => vec![gm.cminus.iter().map(|v| v.unwrap()).collect()],
        };
        for series in own {
            assert!(relative_spread(&series) < 1e-10, "{}", c.family);
        }
    }
}

#[test]
fn characteristic_subparts_one_and_four_coincide() {
    let (f, g) = fixture(2.0, 0.0);
    for c in curves(&f, &g).iter().filter(|c| c.family != Family::S) {
        let kind = CompatKind::for_family(c.family)[0];
        let r = k_integrals(c, kind).unwrap();
        for row in &r.sub_cum {
            assert!((row[0] - row[3]).abs() <= 1e-12 * r.max_abs_subpart);
        }
        assert!(r.subpart_totals[0].abs() > 1e-2);
    }
}

#[test]
fn integrals_are_linear_in_the_adjoint() {
    let (f, g) = fixture(2.0, 0.0);
    let mut scaled = g.clone();
    for psi in scaled.adjoint_mut().unwrap() {
        for (k, v) in psi.iter_mut().enumerate() {
            *v = 3.0 * *v + k as f64;
        }
    }
    let a = curves(&f, &g);
    let b = curves(&f, &scaled);
    for (ca, cb) in a.iter().zip(&b) {
        for k in CompatKind::for_family(ca.family) {
            let (ra, rb) = (k_integrals(ca, *k).unwrap(), k_integrals(cb, *k).unwrap());
            for (x, y) in ra.subpart_totals.iter().zip(&rb.subpart_totals) {
                assert!((3.0 * x - y).abs() < 1e-10 * ra.max_abs_subpart.max(1.0));
            }
            assert!(
                (rb.max_abs_subpart - 3.0 * ra.max_abs_subpart).abs() < 1e-10 * rb.max_abs_subpart
            );
        }
    }
}

#[test]
fn corrupted_adjoint_is_detected() {
    let (f, mut g) = fixture(2.0, 0.0);
    for psi in g.adjoint_mut().unwrap() {
        psi[1] *= 2.0;
    }
    let cs = curves(&f, &g);
    let worst = cs
        .iter()
        .flat_map(|c| {
            CompatKind::for_family(c.family)
                .iter()
                .map(move |k| k_integrals(c, *k).unwrap().ratio)
        })
        .fold(0f64, f64::max);
    assert!(worst > 0.02, "worst ratio {worst}");
}

#[test]
fn report_round_trip_and_errors() {
    let (f, g) = fixture(2.0, 0.0);
    let c = &curves(&f, &g)[1];
    let r = k_integrals(c, CompatKind::CPlus).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cplus.csv");
    r.save(&path).unwrap();
    assert_eq!(CompatReport::load(&path).unwrap(), r);
    assert!(matches!(
        k_integrals(c, CompatKind::S1),
        Err(Error::FamilyMismatch { .. })
    ));

    let n = g.ni() * g.nj();
    let (x, y) = (0..n).map(|k| g.xy(k)).unzip();
    let states = (0..n).map(|k| g.state(k)).collect();
    let bare = FieldGrid::new(g.ni(), g.nj(), *g.gas(), false, x, y, states, None).unwrap();
    let cfg = TraceConfig {
        step: 0.01,
        max_length: 0.5,
        ..TraceConfig::default()
    };
    let nc = trace(&bare, (0.5, 0.1), Family::S, &cfg).unwrap();
    assert!(matches!(
        k_integrals(&nc, CompatKind::S1),
        Err(Error::MissingAdjoint)
    ));
}
