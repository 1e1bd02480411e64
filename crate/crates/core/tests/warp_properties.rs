use proptest::prelude::*;
use warpband_core::warp::{
    default_log_concavity_tol, log_concavity_classify, ClosedForm, LogConcavity, ModelFamily, WarpingFunction,
};

fn family() -> impl Strategy<Value = ModelFamily> {
    prop::sample::select(ModelFamily::ALL.to_vec())
}

/// Random admissible interval inside the parameter range of `f`.
fn interval(f: ModelFamily, n: u32, a: f64, b: f64) -> (f64, f64) {
    let (lo, hi) = f.parameter_range(n);
    let (lo, hi) = (lo.max(-3.0), hi.min(4.0));
    let pad = 1e-3 * (hi - lo);
    let (x, y) = if a < b { (a, b) } else { (b, a) };
    let x = lo + pad + x * (hi - lo - 2.0 * pad);
    let y = lo + pad + y * (hi - lo - 2.0 * pad);
    (x, y.max(x + 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn identity_residual_vanishes(f in family(), n in 2u32..9, a in 0.0..1.0f64, b in 0.0..1.0f64, s in 0.0..1.0f64) {
        let (l, r) = interval(f, n, a, b);
        let m = f.build(n, l, r).unwrap();
        let t = l + s * (r - l);
        let res = m.identity_residual(t).unwrap();
        let scale = 1.0 + m.scalar_curvature(t).unwrap().abs() + m.mean_curvature(t).unwrap().powi(2);
        prop_assert!(res.abs() < 1e-8 * scale, "{} n={} t={} residual {}", f.name(), n, t, res);
    }

    #[test]
    fn catalog_scalar_curvature_is_constant(f in family(), n in 2u32..9, s in 0.0..1.0f64) {
        let m = f.build_default(n).unwrap();
        let (l, r) = m.domain();
        let sc = m.scalar_curvature(l + s * (r - l)).unwrap();
        prop_assert!((sc - f.scalar_curvature(n)).abs() < 1e-9 * (1.0 + sc.abs()));
    }

    #[test]
    fn eval_outside_domain_is_an_error(f in family(), n in 2u32..6, off in 1e-6..1.0f64) {
        let m = f.build_default(n).unwrap();
        let (l, r) = m.domain();
        prop_assert!(m.warp().eval(l - off).is_err());
        prop_assert!(m.warp().eval(r + off).is_err());
    }
}

#[test]
fn cos_boundary_curvatures_match_closed_form() {
    for n in 2..=8u32 {
        let nf = n as f64;
        let (lo, hi) = ModelFamily::Cos.parameter_range(n);
        for k in 1..10 {
            let l_minus = lo * (k as f64) / 10.0;
            let l_plus = hi * (10 - k) as f64 / 10.0;
            let m = ModelFamily::Cos.build(n, l_minus, l_plus).unwrap();
            let (hm, hp) = m.boundary_mean_curvatures();
            let em = (nf - 1.0) * (nf * l_minus / 2.0).tan();
            let ep = -(nf - 1.0) * (nf * l_plus / 2.0).tan();
            assert!((hm - em).abs() < 1e-12 * (1.0 + em.abs()), "n={n} {hm} vs {em}");
            assert!((hp - ep).abs() < 1e-12 * (1.0 + ep.abs()), "n={n} {hp} vs {ep}");
        }
    }
}

#[test]
fn catalog_classification() {
    for n in 2..=7 {
        for f in ModelFamily::ALL {
            let m = f.build_default(n).unwrap();
            let got = m.classify(1e-10);
            match f {
                ModelFamily::Constant | ModelFamily::Exp => assert_eq!(got, LogConcavity::LogConstant),
                ModelFamily::Cos | ModelFamily::Power | ModelFamily::Sinh => {
                    assert_eq!(got, LogConcavity::StrictlyLogConcave, "{}", f.name())
                }
                _ => {}
            }
        }
    }
    let cosh = WarpingFunction::closed_form(ClosedForm::Cosh, -1.0, 1.0).unwrap();
    assert_eq!(
        log_concavity_classify(&cosh, default_log_concavity_tol(&cosh)),
        LogConcavity::Neither
    );
}

#[test]
fn sampled_profiles_converge_at_second_order() {
    for f in [
        ModelFamily::Cos,
        ModelFamily::Power,
        ModelFamily::Sinh,
        ModelFamily::HyperbolicAnnulus,
    ] {
        let m = f.build_default(4).unwrap();
        let (l, r) = m.domain();
        let probes: Vec<f64> = (0..=20).map(|k| l + (r - l) * k as f64 / 20.0).collect();
        let err = |points: usize| {
            let s = m.to_sampled(points).unwrap();
            probes
                .iter()
                .map(|&t| (s.mean_curvature(t).unwrap() - m.mean_curvature(t).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(129), err(257), err(513));
        let (r1, r2) = (e1 / e2, e2 / e3);
        assert!(r1 > 3.0 && r2 > 3.0, "{}: errors {e1:e} {e2:e} {e3:e}", f.name());
    }
}

#[test]
fn sampled_identity_residual_is_second_order() {
    let m = ModelFamily::Cos.build(3, -0.5, 0.5).unwrap();
    let err = |points: usize| {
        let s = m.to_sampled(points).unwrap();
        (1..20)
            .map(|k| s.identity_residual(-0.4 + 0.04 * k as f64).unwrap().abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(513), err(1025));
    assert!(e2 < e1 / 3.0, "{e1:e} {e2:e}");
    assert!(e2 < 1e-3);
}
