use std::f64::consts::PI;

use dkmeasure::geom::{Mobius, Point, Site};
use dkmeasure::mc::{random_configuration, McOptions};
use dkmeasure::regions::{
    angle_coordinates, four_point_density, integral_b, integral_b_of, integral_r, refined_integral, region_b, region_b_of,
    region_r, Region, REGION_INTEGRAL,
};
use dkmeasure::tri::{delaunay, FaceId, Triangulation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Angle at `r` in the triangle (p, q, r), by the law of cosines.
fn angle_at(r: Point, p: Point, q: Point) -> f64 {
    let (a, b, c) = ((p - r).norm(), (q - r).norm(), (p - q).norm());
    ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0).acos()
}

fn cross(a: Point, b: Point) -> f64 {
    (a.conj() * b).im
}

fn supported(t: &Triangulation, f: FaceId) -> bool {
    t.is_bounded(f) && (0..3).all(|k| t.is_interior(3 * f + k))
}

fn point(t: &Triangulation, v: usize) -> Point {
    t.config().point(v).unwrap()
}

/// Winding number of the closed curve made of the three bisector arcs of f,
/// written as the triangle plus signed lenses between each chord and its arc.
/// Returns `None` when `z` is too close to an arc or chord to call.
fn winding(t: &Triangulation, f: FaceId, z: Point) -> Option<i32> {
    let ids = t.face(f);
    let mut w = 0;
    let mut inside = true;
    for k in 0..3 {
        let h = 3 * f + k;
        let (p, q, r) = (point(t, ids[k]), point(t, ids[(k + 1) % 3]), point(t, ids[(k + 2) % 3]));
        let s = point(t, t.apex(t.twin(h)));
        let alpha = angle_at(r, p, q);
        let beta = angle_at(s, q, p);
        let level = if alpha <= beta { (alpha - beta) / 2.0 + PI } else { (alpha - beta) / 2.0 - PI };
        let side = cross(q - p, z - p);
        if side.abs() < 1e-9 {
            return None;
        }
        inside &= side > 0.0;
        let bz = ((q - z) / (p - z)).arg();
        if (bz - level).abs() < 1e-7 {
            return None;
        }
        if level > 0.0 && bz > level {
            w -= 1;
        }
        if level < 0.0 && bz < level {
            w += 1;
        }
    }
    Some(w + i32::from(inside))
}

fn sample_near(rng: &mut ChaCha8Rng, reg: &Region, spread: f64) -> Point {
    reg.center + Point::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread)) * reg.radius
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn region_r_matches_winding_oracle(seed in 0u64..10_000) {
        let t = delaunay(&random_configuration(14, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in (0..t.num_faces()).filter(|&f| supported(&t, f)) {
            let reg = region_r(&t, f).unwrap();
            for _ in 0..400 {
                let z = sample_near(&mut rng, &reg, 1.2);
                let Some(w) = winding(&t, f, z) else { continue };
                prop_assert!((0..=1).contains(&w), "winding {w}");
                prop_assert_eq!(reg.contains(z), w == 1, "face {} z {}", f, z);
            }
            // points of the open face near its centroid are in R(f)
            let g = (reg.vertices[0] + reg.vertices[1] + reg.vertices[2]) / 3.0;
            if let Some(1) = winding(&t, f, g) {
                prop_assert!(reg.contains(g));
            }
        }
    }

    #[test]
    fn b_inside_r(seed in 0u64..10_000) {
        let t = delaunay(&random_configuration(12, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        for f in (0..t.num_faces()).filter(|&f| supported(&t, f)) {
            let (rb, rr) = (region_b(&t, f).unwrap(), region_r(&t, f).unwrap());
            for _ in 0..2_000 {
                let z = sample_near(&mut rng, &rb, 1.0);
                if rb.contains(z) {
                    prop_assert!(rr.contains(z));
                }
            }
        }
    }

    #[test]
    fn regions_tile_deep_faces(seed in 0u64..10_000) {
        let t = delaunay(&random_configuration(30, seed)).unwrap();
        let sup: Vec<FaceId> = (0..t.num_faces()).filter(|&f| supported(&t, f)).collect();
        let regions: Vec<Region> = sup.iter().map(|&f| region_r(&t, f).unwrap()).collect();
        let tr = &t;
        let neighbours = |f: FaceId| (0..3).map(move |k| tr.twin(3 * f + k) / 3);
        let deep: Vec<FaceId> = sup
            .iter()
            .copied()
            .filter(|&g| neighbours(g).all(|n| supported(&t, n) && neighbours(n).all(|m| supported(&t, m))))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in deep {
            let [a, b, c] = t.face(g).map(|v| point(&t, v));
            for _ in 0..200 {
                let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
                if u + v > 1.0 {
                    (u, v) = (1.0 - u, 1.0 - v);
                }
                let z = a + (b - a) * u + (c - a) * v;
                if regions.iter().any(|r| r.arcs.iter().any(|arc| arc.circle.distance(z) < 1e-9)) {
                    continue;
                }
                let count = regions.iter().filter(|r| r.contains(z)).count();
                prop_assert_eq!(count, 1, "face {} z {}", g, z);
            }
        }
    }

    #[test]
    fn b_membership_is_mobius_covariant(seed in 0u64..10_000, m in prop::array::uniform8(-2.0..2.0f64)) {
        let cfg = random_configuration(3, seed);
        let t = delaunay(&cfg).unwrap();
        let f = t.bounded_faces()[0];
        let face = t.face(f).map(|v| point(&t, v));
        let reg = region_b_of(face).unwrap();
        let mob = Mobius::new(Point::new(m[0], m[1]), Point::new(m[2], m[3]), Point::new(m[4], m[5]), Point::new(m[6], m[7]));
        let Ok(mob) = mob else { return Ok(()) };
        let img = |z: Point| mob.apply(Site::Finite(z)).finite();
        // keep the pole well outside the circumdisk so the disk maps to a disk
        let c = Point::new(m[4], m[5]);
        let pole_far = c.norm() == 0.0 || (-Point::new(m[6], m[7]) / c - reg.center).norm() > 1.5 * reg.radius;
        prop_assume!(pole_far);
        let face2 = face.map(|z| img(z).unwrap());
        let Ok(reg2) = region_b_of(face2) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let z = sample_near(&mut rng, &reg, 1.0);
            let z2 = img(z).unwrap();
            let margin = |r: &Region, w: Point| {
                r.arcs.iter().map(|a| a.circle.distance(w)).fold(((w - r.center).norm() - r.radius).abs(), f64::min)
            };
            if margin(&reg, z) < 1e-6 * reg.radius || margin(&reg2, z2) < 1e-6 * reg2.radius {
                continue;
            }
            prop_assert_eq!(reg.contains(z), reg2.contains(z2));
        }
    }

    #[test]
    fn jacobian_identity(x in prop::array::uniform6(-2.0..2.0f64), u in 0.05..0.9f64, v in 0.05..0.9f64) {
        let mut f = [Point::new(x[0], x[1]), Point::new(x[2], x[3]), Point::new(x[4], x[5])];
        let orient = cross(f[1] - f[0], f[2] - f[0]);
        prop_assume!(orient.abs() > 0.3);
        if orient < 0.0 {
            f.swap(1, 2);
        }
        prop_assume!(u + v < 0.95);
        let z = f[0] + (f[1] - f[0]) * u + (f[2] - f[0]) * v;
        let h = 1e-6;
        let th = |w: Point| angle_coordinates(f, w).unwrap();
        let (xp, xm) = (th(z + Point::new(h, 0.0)), th(z - Point::new(h, 0.0)));
        let (yp, ym) = (th(z + Point::new(0.0, h)), th(z - Point::new(0.0, h)));
        let d = |a: [f64; 3], b: [f64; 3], k: usize| (a[k] - b[k]) / (2.0 * h);
        let jac = d(xp, xm, 0) * d(yp, ym, 1) - d(xp, xm, 1) * d(yp, ym, 0);
        let dens = four_point_density(f, z);
        prop_assert!((dens - 0.5 * jac.abs()).abs() <= 1e-6 * dens, "{dens} vs {}", 0.5 * jac.abs());
        prop_assert!((th(z).iter().sum::<f64>() - PI).abs() < 1e-10);
    }
}

#[test]
fn region_integrals_concentrate() {
    let opts = McOptions { samples: 200_000, seed: 17, batch_size: 10_000 };
    let faces = [
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.9)],
        [Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.3, 0.4)],
        [Point::new(-1.0, 0.2), Point::new(0.3, -2.0), Point::new(0.9, 1.7)],
    ];
    let mut means = Vec::new();
    for face in faces {
        let e = integral_b_of(face, &opts).unwrap();
        assert!(e.sigma_distance(REGION_INTEGRAL).abs() < 4.0, "{e:?}");
        means.push(e);
    }
    // Möbius image of the first face
    let mob = Mobius::new(Point::new(1.0, 0.3), Point::new(0.2, 0.0), Point::new(0.1, -0.2), Point::new(1.0, 0.0)).unwrap();
    let img = faces[0].map(|z| mob.apply(Site::Finite(z)).finite().unwrap());
    let img = if cross(img[1] - img[0], img[2] - img[0]) > 0.0 { img } else { [img[0], img[2], img[1]] };
    let e = integral_b_of(img, &opts).unwrap();
    assert!(e.sigma_distance(REGION_INTEGRAL).abs() < 4.0, "{e:?}");

    let t = delaunay(&random_configuration(10, 3)).unwrap();
    let f = (0..t.num_faces()).find(|&f| supported(&t, f)).unwrap();
    let b = integral_b(&t, f, &opts).unwrap();
    let r = integral_r(&t, f, &opts).unwrap();
    let i1 = refined_integral(&t, f).unwrap();
    assert!(i1 >= REGION_INTEGRAL);
    assert!(b.sigma_distance(REGION_INTEGRAL).abs() < 4.0, "{b:?}");
    assert!(r.sigma_distance(i1).abs() < 4.0, "{r:?} vs {i1}");
}

#[test]
fn hull_faces_are_rejected_for_r() {
    let t = delaunay(&random_configuration(5, 8)).unwrap();
    let f = t.bounded_faces().into_iter().find(|&f| !supported(&t, f)).unwrap();
    assert!(region_r(&t, f).is_err());
    assert!(refined_integral(&t, f).is_err());
    assert!(region_b(&t, f).is_ok());
}
