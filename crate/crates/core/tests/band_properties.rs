use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpband_core::band::{
    build_flat_cylinder, build_warped_band, lipschitz_band_map, separation_check, CellMetric, Curve, DiscreteBand,
    NormalSide, Topology,
};
use warpband_core::warp::ModelFamily;

fn sheared_rectangle(nu: usize, nv: usize) -> DiscreteBand {
    let (du, dv) = (1.0 / nu as f64, 1.0 / nv as f64);
    let g = CellMetric::new(du * du, 0.4 * du * dv, dv * dv);
    DiscreteBand::from_cells(nu, nv, Topology::Rectangle, vec![g; nu * nv]).unwrap()
}

fn bumpy_cylinder(nu: usize, nv: usize) -> DiscreteBand {
    let mut cells = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (u, v) = ((i as f64 + 0.5) / nu as f64, (j as f64 + 0.5) / nv as f64);
            let s = 1.0 + 0.5 * (std::f64::consts::TAU * v).sin() * (std::f64::consts::PI * u).sin();
            let (du, dv) = (2.0 / nu as f64, std::f64::consts::TAU / nv as f64);
            cells.push(CellMetric::new(s * s * du * du, 0.0, dv * dv));
        }
    }
    DiscreteBand::from_cells(nu, nv, Topology::Cylinder, cells).unwrap()
}

#[test]
fn width_is_nonincreasing_under_refinement() {
    for build in [sheared_rectangle as fn(usize, usize) -> DiscreteBand, bumpy_cylinder] {
        let widths: Vec<f64> = [8, 16, 32, 64].iter().map(|&k| build(k, k).width()).collect();
        for w in widths.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{widths:?}");
        }
        let ratios: Vec<f64> = widths.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - 1.0).abs() < 0.05), "{ratios:?}");
    }
}

#[test]
fn sheared_width_is_the_affine_distance() {
    // Metric du² + 0.4 du dv + dv² on the unit square: the distance between
    // u = 0 and u = 1 is sqrt(det g / g22). Eight-neighbour paths can only
    // overestimate it, by at most the metrication factor of the stencil.
    let exact = (1.0f64 - 0.04).sqrt();
    let w = sheared_rectangle(64, 64).width();
    assert!(w >= exact - 1e-12 && w <= exact * 1.0824, "{w} vs {exact}");
    let fine = sheared_rectangle(256, 256).width();
    assert!((fine - w).abs() < 1e-9);
}

#[test]
fn warped_band_curvature_matches_model() {
    for f in [
        ModelFamily::Cos,
        ModelFamily::Sinh,
        ModelFamily::Exp,
        ModelFamily::Power,
    ] {
        let m = f.build_default(2).unwrap();
        let err = |k: usize| {
            let b = build_warped_band(&m, k, k, std::f64::consts::TAU).unwrap();
            let (a, bb) = m.domain();
            let mut worst = 0.0f64;
            for i in 1..k {
                let t = a + (bb - a) * i as f64 / k as f64;
                let half = 0.5 * m.scalar_curvature(t).unwrap();
                for j in 0..k {
                    worst = worst.max((b.gaussian_curvature(i, j).unwrap() - half).abs());
                }
            }
            worst
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 0.2 && e2 < 0.6 * e1, "{}: {e1} {e2}", f.name());
    }
}

#[test]
fn lipschitz_maps_are_contractions_with_exact_ends() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let b = bumpy_cylinder(24, 24);
        let w = b.width();
        let margin: f64 = rng.random_range(0.05..0.5);
        let len = w * (1.0 - margin) * rng.random_range(0.3..0.95);
        let a: f64 = rng.random_range(-2.0..2.0);
        let map = lipschitz_band_map(&b, a, a + len, margin).unwrap();
        assert!(map.lipschitz < 1.0, "{}", map.lipschitz);
        for j in 0..=24 {
            assert_eq!(map.value(&b, 0, j), a);
            assert_eq!(map.value(&b, 24, j), a + len);
        }
    }
    let b = build_flat_cylinder(2.0, 1.0, 16, 16).unwrap();
    assert!(lipschitz_band_map(&b, 0.0, 2.0, 0.0).is_err());
}

#[test]
fn separation_is_invariant_under_rotation() {
    let b = build_flat_cylinder(2.0, 1.0, 12, 12).unwrap();
    let curves = [
        Curve::horizontal_circle(&b, 4).unwrap(),
        Curve::new(&b, vec![(3, 3), (4, 3), (4, 4), (3, 4)], NormalSide::Right).unwrap(),
    ];
    for c in &curves {
        let base = separation_check(&b, c);
        for s in 0..c.len() {
            assert_eq!(separation_check(&b, &c.rotated(s)), base);
        }
    }
    assert!(separation_check(&b, &curves[0]));
    assert!(!separation_check(&b, &curves[1]));
}
