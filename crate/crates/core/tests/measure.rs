use dkmeasure::geom::{mobius_apply, Mobius, Point, PointConfiguration};
use dkmeasure::kahler::{self, det_excluding, flip_delta_predicted, kahler_matrix, kahler_matrix_fd, normalized_det};
use dkmeasure::mc::random_configuration;
use dkmeasure::tri::{self, delaunay, lawson_restore, Triangulation};
use proptest::prelude::*;

fn max_abs(d: &kahler::KahlerMatrix) -> f64 {
    d.m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn rel_matrix_error(a: &kahler::KahlerMatrix, b: &kahler::KahlerMatrix) -> f64 {
    assert_eq!(a.labels, b.labels);
    (&a.m - &b.m).iter().map(|x| x.norm()).fold(0.0, f64::max) / max_abs(a)
}

fn fd_oracle(t: &Triangulation) -> kahler::KahlerMatrix {
    // shrink the step until the combinatorics survive
    let mut h = 1e-4;
    loop {
        match kahler_matrix_fd(t, h) {
            Ok(d) => return d,
            Err(kahler::KahlerError::StepTooLarge(_)) if h > 1e-7 => h /= 4.0,
            Err(e) => panic!("{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hessian_matches_prepotential(seed in 0u64..10_000, n in 1usize..5) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        let d = kahler_matrix(&t).unwrap();
        prop_assert!(rel_matrix_error(&d, &fd_oracle(&t)) < 1e-5);
    }

    #[test]
    fn delaunay_matrix_is_psd(seed in 0u64..10_000, n in 1usize..9) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        let d = kahler_matrix(&t).unwrap();
        prop_assert!(d.hermiticity_defect() < 1e-12 * max_abs(&d));
        let ev = d.eigenvalues();
        prop_assert!(ev[0] >= -1e-10 * d.trace());
        // two-dimensional kernel: constants and z ↦ z
        prop_assert!(ev[1].abs() <= 1e-10 * d.trace());
        prop_assert!(det_excluding(&d, &t.config().gauge()) > 0.0);
    }

    #[test]
    fn normalized_determinant_is_gauge_independent(seed in 0u64..10_000, n in 1usize..6) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        let inf = t.config().infinite_vertex().unwrap();
        let finite = t.config().finite_ids();
        let base = normalized_det(&t, [0, 1, inf]).unwrap();
        for i in 0..finite.len() {
            for j in i + 1..finite.len() {
                let v = normalized_det(&t, [finite[i], finite[j], inf]).unwrap();
                prop_assert!((v - base).abs() <= 1e-9 * base.abs());
            }
        }
    }

    #[test]
    fn flip_lemma(seed in 0u64..10_000, n in 2usize..7) {
        let t = delaunay(&random_configuration(n, seed)).unwrap();
        for h in t.edges() {
            if !t.is_interior(h) {
                continue;
            }
            let (u, v) = (t.origin(h), t.dest(h));
            let Ok(flipped) = tri::flip(&t, u, v) else { continue };
            let pred = flip_delta_predicted(&t, u, v).unwrap();
            let direct = det_excluding(&kahler_matrix(&t).unwrap(), &pred.excluded)
                - det_excluding(&kahler_matrix(&flipped).unwrap(), &pred.excluded);
            let scale = direct.abs().max(pred.predicted.abs());
            prop_assert!((direct - pred.predicted).abs() <= 1e-9 * scale, "{direct} vs {}", pred.predicted);
            // Delaunay edge: flipping can only lose
            prop_assert!(direct >= -1e-12 * scale);
        }
    }
}

#[test]
fn flip_lemma_cocyclic_is_zero() {
    // four points on one circle, the rest spread around
    let c = Point::new(0.6, 0.9);
    let mut free: Vec<Point> = [0.4f64, 1.7, 3.3, 5.0].iter().map(|&a| c + Point::from_polar(0.7, a)).collect();
    free.extend([Point::new(-1.5, -1.0), Point::new(2.5, -1.2), Point::new(2.4, 2.6), Point::new(-1.3, 2.4)]);
    let config = PointConfiguration::with_free(&free).unwrap();
    let t = delaunay(&config).unwrap();
    let ring = [3, 4, 5, 6];
    let mut checked = 0;
    for h in t.edges() {
        let (u, v) = (t.origin(h), t.dest(h));
        if !(ring.contains(&u) && ring.contains(&v) && ring.contains(&t.apex(h)) && ring.contains(&t.apex(t.twin(h)))) {
            continue;
        }
        let flipped = tri::flip(&t, u, v).unwrap();
        let pred = flip_delta_predicted(&t, u, v).unwrap();
        let direct = det_excluding(&kahler_matrix(&t).unwrap(), &pred.excluded)
            - det_excluding(&kahler_matrix(&flipped).unwrap(), &pred.excluded);
        assert!(pred.predicted.abs() < 1e-12 && direct.abs() < 1e-12, "{} {direct}", pred.predicted);
        checked += 1;
    }
    assert_eq!(checked, 1);
}

#[test]
fn delaunay_maximizes_and_lawson_is_monotone() {
    for seed in 0..12 {
        let config = random_configuration(1 + (seed as usize % 4), seed);
        let gauge = config.gauge();
        let d_of = |t: &Triangulation| det_excluding(&kahler_matrix(t).unwrap(), &gauge);
        let orbit = tri::enumerate_triangulations(&config, tri::DEFAULT_ENUMERATION_CAP).unwrap();
        let best = d_of(&delaunay(&config).unwrap());
        for t in &orbit {
            assert!(d_of(t) <= best * (1.0 + 1e-12), "seed {seed}");
            let (_, log) = lawson_restore(t);
            let mut cur = t.clone();
            let mut prev = d_of(&cur);
            for rec in log {
                cur = tri::flip(&cur, rec.old.0, rec.old.1).unwrap();
                let now = d_of(&cur);
                assert!(now >= prev * (1.0 - 1e-12), "seed {seed}: {prev} -> {now}");
                prev = now;
            }
        }
    }
}

#[test]
fn normalized_determinant_under_affine_maps() {
    // z ↦ az + b: the N remaining rows of D scale by |a|^{-2}, |Δ₃|² by |a|²
    let config = random_configuration(4, 77);
    let m = Mobius::new(Point::new(1.3, -0.4), Point::new(0.2, 0.5), Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
    let image = mobius_apply(&m, &config).unwrap();
    let (t, ti) = (delaunay(&config).unwrap(), delaunay(&image).unwrap());
    assert!(t.same_combinatorics(&ti));
    let inf = config.infinite_vertex().unwrap();
    let scale = Point::new(1.3, -0.4).norm_sqr();
    for (i, j) in [(0, 1), (3, 5), (4, 6)] {
        let a = normalized_det(&t, [i, j, inf]).unwrap();
        let b = normalized_det(&ti, [i, j, inf]).unwrap();
        let n = config.free_ids().len() as i32;
        let want = a * scale.powi(-n) / scale;
        assert!((b - want).abs() <= 1e-9 * want.abs(), "{b} vs {want}");
    }
}

#[test]
fn measure_density_uses_delaunay() {
    let config = random_configuration(3, 5);
    let t = delaunay(&config).unwrap();
    let want = 8.0 * det_excluding(&kahler_matrix(&t).unwrap(), &config.gauge());
    assert!((kahler::measure_density(&config).unwrap() - want).abs() <= 1e-14 * want);
}
