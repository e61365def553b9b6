//! The sixteen acceptance checks.
//!
//! Every check is deterministic for a fixed seed. `quick` cuts Monte Carlo
//! sample counts by ten and leaves tolerances alone.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use dkmeasure::forms::{
    self, best_convention, flip_discontinuity, lambda_length, omega_face_angles, omega_face_lengths, omega_face_z,
    omega_from_kahler, omega_total, top_coefficient, wp_form, Decoration, FreeBasis, TangentVector,
};
use dkmeasure::geom::{Point, PointConfiguration};
use dkmeasure::kahler::{self, det_excluding, flip_delta_predicted, kahler_matrix, kahler_matrix_fd, normalized_det};
use dkmeasure::mc::{self, conditional_growth_check, growth_chain, random_configuration, McOptions, INEQUALITY_SLACK};
use dkmeasure::regions::{self, angle_coordinates, four_point_density, integral_b_of, integral_r, refined_integral};
use dkmeasure::tri::{self, angle_pattern, check_contour_condition, delaunay, lawson_restore, Triangulation};
use dkmeasure::voronoi::{flip_continuity_check, FlipPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{CheckRecord, ReportDocument, Status};

type Res<T> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub const CHECK_COUNT: u32 = 16;

/// Monte Carlo sample count per estimate in the full suite.
pub const FULL_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub quick: bool,
}

impl SuiteOptions {
    fn samples(&self) -> usize {
        if self.quick {
            FULL_SAMPLES / 10
        } else {
            FULL_SAMPLES
        }
    }

    fn mc(&self, salt: u64) -> McOptions {
        McOptions::new(self.samples(), self.seed.wrapping_mul(1_000_003).wrapping_add(salt))
    }

    fn config_seed(&self, k: u64) -> u64 {
        self.seed.wrapping_mul(7919).wrapping_add(k)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.rotate_left(17))
    }
}

struct Outcome {
    pass: bool,
    measured: f64,
    expected: f64,
    tolerance: f64,
    sigma: Option<f64>,
    detail: String,
}

struct Spec {
    id: u32,
    name: &'static str,
    anchor: &'static str,
    report_only: bool,
    run: fn(&SuiteOptions) -> Res<Outcome>,
}

const SPECS: [Spec; 16] = [
    Spec { id: 1, name: "hessian oracle", anchor: "D is the Hessian of the prepotential", report_only: false, run: hessian },
    Spec { id: 2, name: "positivity", anchor: "D is positive", report_only: false, run: positivity },
    Spec { id: 3, name: "flip lemma", anchor: "determinant change under a flip", report_only: false, run: flip_lemma },
    Spec { id: 4, name: "maximality", anchor: "Delaunay maximizes det D", report_only: false, run: maximality },
    Spec { id: 5, name: "covariance", anchor: "normalized determinant", report_only: false, run: covariance },
    Spec { id: 6, name: "top-form identity", anchor: "Omega^N/N! = det D", report_only: false, run: top_form },
    Spec { id: 7, name: "weil-petersson", anchor: "Omega_WP = 2 Omega_D", report_only: false, run: weil_petersson },
    Spec { id: 8, name: "per-face identities", anchor: "omega_z = omega_length = omega_angle", report_only: false, run: per_face },
    Spec { id: 9, name: "ptolemy", anchor: "lambda lengths at cocyclicity", report_only: false, run: ptolemy },
    Spec { id: 10, name: "region integral I", anchor: "integral over B(f) is pi^2/16", report_only: false, run: region_b },
    Spec { id: 11, name: "refined integral I1", anchor: "integral over R(f)", report_only: false, run: region_r },
    Spec { id: 12, name: "growth", anchor: "V_{N+1} >= (N+1) pi^2/8 V_N", report_only: false, run: growth },
    Spec { id: 13, name: "jacobian identity", anchor: "angles as coordinates", report_only: false, run: jacobian },
    Spec { id: 14, name: "dual continuity", anchor: "dual lengths across a flip", report_only: false, run: dual_continuity },
    Spec { id: 15, name: "angle pattern", anchor: "vertex and contour sums", report_only: false, run: angle_sums },
    Spec { id: 16, name: "flip discontinuity", anchor: "connection jump across a flip", report_only: true, run: flip_jump },
];

/// Runs check `id` (1-based).
pub fn run_check(id: u32, opts: &SuiteOptions) -> Option<CheckRecord> {
    let spec = SPECS.iter().find(|s| s.id == id)?;
    let start = Instant::now();
    let res = (spec.run)(opts);
    let duration_ms = start.elapsed().as_millis();
    let rec = match res {
        Ok(o) => CheckRecord {
            id,
            name: spec.name.into(),
            anchor: spec.anchor.into(),
            status: if spec.report_only { Status::ReportOnly } else { Status::from_bool(o.pass) },
            measured: o.measured,
            expected: o.expected,
            tolerance: o.tolerance,
            sigma: o.sigma,
            detail: o.detail,
            duration_ms,
        },
        Err(e) => CheckRecord {
            id,
            name: spec.name.into(),
            anchor: spec.anchor.into(),
            status: if spec.report_only { Status::ReportOnly } else { Status::Fail },
            measured: f64::NAN,
            expected: f64::NAN,
            tolerance: f64::NAN,
            sigma: None,
            detail: format!("error: {e}"),
            duration_ms,
        },
    };
    Some(rec)
}

pub fn run_all(opts: &SuiteOptions) -> ReportDocument {
    let mut doc = ReportDocument::new("verify-all", Some(opts.seed));
    doc.checks = (1..=CHECK_COUNT).filter_map(|id| run_check(id, opts)).collect();
    doc
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn max_rel_matrix(a: &kahler::KahlerMatrix, b: &kahler::KahlerMatrix) -> f64 {
    let scale = a.m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    (&a.m - &b.m).iter().map(|x| x.norm()).fold(0.0, f64::max) / scale
}

fn within_time(start: Instant, limit: Duration) -> (bool, String) {
    let el = start.elapsed();
    (el < limit, format!("{:.1} s of {} s", el.as_secs_f64(), limit.as_secs()))
}

fn hessian(o: &SuiteOptions) -> Res<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..24u64 {
        let n = 1 + (k as usize % 6);
        let t = delaunay(&random_configuration(n, o.config_seed(k)))?;
        let d = kahler_matrix(&t)?;
        // shrink the step until no flip is crossed
        let mut h = 1e-4;
        let fd = loop {
            match kahler_matrix_fd(&t, h) {
                Ok(m) => break m,
                Err(kahler::KahlerError::StepTooLarge(_)) if h > 1e-7 => h /= 4.0,
                Err(e) => return Err(e.into()),
            }
        };
        worst = worst.max(max_rel_matrix(&d, &fd));
    }
    let (fast, time) = within_time(start, Duration::from_secs(60));
    Ok(Outcome {
        pass: worst <= 1e-5 && fast,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-5,
        sigma: None,
        detail: format!("24 configs, N = 1..6, max rel error {worst:.2e}; {time}"),
    })
}

fn positivity(o: &SuiteOptions) -> Res<Outcome> {
    let mut worst = f64::INFINITY;
    for k in 0..100u64 {
        let n = 1 + (k as usize % 8);
        let d = kahler_matrix(&delaunay(&random_configuration(n, o.config_seed(k)))?)?;
        worst = worst.min(d.eigenvalues()[0] / d.trace());
    }
    Ok(Outcome {
        pass: worst >= -1e-10,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-10,
        sigma: None,
        detail: format!("100 configs, min eigenvalue/trace {worst:.2e}"),
    })
}

/// Four cocyclic points ringed by four more; the quadrilateral diagonal is
/// the only cocyclic edge.
fn cocyclic_ring() -> Res<PointConfiguration> {
    let c = Point::new(0.6, 0.9);
    let mut free: Vec<Point> = [0.4f64, 1.7, 3.3, 5.0].iter().map(|&a| c + Point::from_polar(0.7, a)).collect();
    free.extend([Point::new(-1.5, -1.0), Point::new(2.5, -1.2), Point::new(2.4, 2.6), Point::new(-1.3, 2.4)]);
    Ok(PointConfiguration::with_free(&free)?)
}

fn flip_change(t: &Triangulation, u: usize, v: usize) -> Res<Option<(f64, f64)>> {
    let Ok(flipped) = tri::flip(t, u, v) else { return Ok(None) };
    let pred = flip_delta_predicted(t, u, v)?;
    let direct =
        det_excluding(&kahler_matrix(t)?, &pred.excluded) - det_excluding(&kahler_matrix(&flipped)?, &pred.excluded);
    Ok(Some((pred.predicted, direct)))
}

fn flip_lemma(o: &SuiteOptions) -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut k = 0u64;
    while count < 100 {
        let n = 2 + (k as usize % 5);
        let t = delaunay(&random_configuration(n, o.config_seed(1000 + k)))?;
        k += 1;
        for h in t.edges() {
            if count == 100 || !t.is_interior(h) {
                continue;
            }
            if let Some((pred, direct)) = flip_change(&t, t.origin(h), t.dest(h))? {
                worst = worst.max(rel(pred, direct));
                count += 1;
            }
        }
    }
    let ring = [3, 4, 5, 6];
    let t = delaunay(&cocyclic_ring()?)?;
    let mut cocyclic: f64 = 0.0;
    for h in t.edges() {
        let quad = [t.origin(h), t.dest(h), t.apex(h), t.apex(t.twin(h))];
        if quad.iter().all(|v| ring.contains(v)) {
            let (pred, direct) = flip_change(&t, quad[0], quad[1])?.ok_or("cocyclic diagonal does not flip")?;
            cocyclic = cocyclic.max(pred.abs()).max(direct.abs());
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-9 && cocyclic <= 1e-12,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-9,
        sigma: None,
        detail: format!("100 flips, max rel error {worst:.2e}; cocyclic |change| {cocyclic:.2e} (tol 1e-12)"),
    })
}

fn maximality(o: &SuiteOptions) -> Res<Outcome> {
    let mut excess: f64 = f64::NEG_INFINITY;
    let mut drops = 0;
    let mut orbit_total = 0;
    for k in 0..24u64 {
        let n = 1 + (k as usize % 4);
        let config = random_configuration(n, o.config_seed(2000 + k));
        let gauge = config.gauge();
        let det = |t: &Triangulation| -> Res<f64> { Ok(det_excluding(&kahler_matrix(t)?, &gauge)) };
        let best = det(&delaunay(&config)?)?;
        let orbit = tri::enumerate_triangulations(&config, tri::DEFAULT_ENUMERATION_CAP)?;
        orbit_total += orbit.len();
        for t in &orbit {
            excess = excess.max(det(t)? / best - 1.0);
            let (_, log) = lawson_restore(t);
            let mut cur = t.clone();
            let mut prev = det(&cur)?;
            for step in log {
                cur = tri::flip(&cur, step.old.0, step.old.1)?;
                let now = det(&cur)?;
                if now < prev * (1.0 - 1e-12) {
                    drops += 1;
                }
                prev = now;
            }
        }
    }
    Ok(Outcome {
        pass: excess <= 1e-12 && drops == 0,
        measured: excess,
        expected: 0.0,
        tolerance: 1e-12,
        sigma: None,
        detail: format!(
            "24 configs, {orbit_total} triangulations; max d(T)/d(Delaunay) - 1 = {excess:.2e}; {drops} Lawson decreases"
        ),
    })
}

fn covariance(o: &SuiteOptions) -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let n = 1 + (k as usize % 5);
        let t = delaunay(&random_configuration(n, o.config_seed(3000 + k)))?;
        let inf = t.config().infinite_vertex().ok_or("no infinite vertex")?;
        let finite = t.config().finite_ids();
        let base = normalized_det(&t, [0, 1, inf])?;
        for i in 0..finite.len() {
            for j in i + 1..finite.len() {
                worst = worst.max(rel(normalized_det(&t, [finite[i], finite[j], inf])?, base));
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-9,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-9,
        sigma: None,
        detail: format!("50 configs, max rel spread {worst:.2e}"),
    })
}

fn top_form(o: &SuiteOptions) -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    let mut sign_ok = true;
    for n in 1..=5usize {
        for k in 0..4u64 {
            let t = delaunay(&random_configuration(n, o.config_seed(4000 + 10 * n as u64 + k)))?;
            let pf = top_coefficient(&omega_total(&t)?, n)?;
            let det = det_excluding(&kahler_matrix(&t)?, &t.config().gauge());
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max(rel(pf.abs(), det));
            sign_ok &= pf * sign > 0.0;
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8 && sign_ok,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-8,
        sigma: None,
        detail: format!("N = 1..5, max rel |Pf| vs det {worst:.2e}; sign (-1)^N {}", if sign_ok { "ok" } else { "wrong" }),
    })
}

fn weil_petersson(o: &SuiteOptions) -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let mut rng = o.rng(7);
    for k in 0..20u64 {
        let n = 1 + (k as usize % 5);
        let t = delaunay(&random_configuration(n, o.config_seed(5000 + k)))?;
        let len = t.config().len();
        let a = wp_form(&t, &Decoration::uniform(len, 1.0))?;
        let radii: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..5.0)).collect();
        let b = wp_form(&t, &Decoration { radii, h_inf: rng.gen_range(0.05..5.0) })?;
        exact &= a.m == b.m;
        let mut two = omega_total(&t)?;
        two.m *= 2.0;
        worst = worst.max(a.rel_diff(&two));
    }
    Ok(Outcome {
        pass: worst <= 1e-9 && exact,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-9,
        sigma: None,
        detail: format!(
            "20 configs, max rel |WP - 2 Omega| {worst:.2e}; decoration independence {}",
            if exact { "exact" } else { "broken" }
        ),
    })
}

fn random_triangle(rng: &mut ChaCha8Rng) -> [Point; 3] {
    loop {
        let mut p = [(); 3].map(|_| Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let area = ((p[1] - p[0]).conj() * (p[2] - p[0])).im;
        let short = (0..3).any(|k| (p[k] - p[(k + 1) % 3]).norm() < 0.2);
        if area.abs() > 0.2 && !short {
            if area < 0.0 {
                p.swap(1, 2);
            }
            return p;
        }
    }
}

fn per_face(o: &SuiteOptions) -> Res<Outcome> {
    let mut rng = o.rng(8);
    let (mut z_err, mut a_err): (f64, f64) = (0.0, 0.0);
    let mask = [Some(0), Some(1), Some(2)];
    for _ in 0..100 {
        let pts = random_triangle(&mut rng);
        let z = omega_face_z(pts, mask, 6)?;
        let l = omega_face_lengths(pts, mask, 6)?;
        z_err = z_err.max(z.rel_diff(&l));
        let a = omega_face_angles(pts, mask, 6, forms::FD_STEP)?;
        let mut l2 = l.clone();
        l2.m *= 2.0;
        a_err = a_err.max(a.rel_diff(&l2));
    }
    Ok(Outcome {
        pass: z_err <= 1e-9 && a_err <= 1e-7,
        measured: z_err,
        expected: 0.0,
        tolerance: 1e-9,
        sigma: None,
        detail: format!("100 faces, omega_z vs omega_length {z_err:.2e}; angle wedge vs sum (FD) {a_err:.2e} (tol 1e-7)"),
    })
}

fn ptolemy(o: &SuiteOptions) -> Res<Outcome> {
    let mut rng = o.rng(9);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let mut a: [f64; 4] = [(); 4].map(|_| rng.gen_range(0.0..2.0 * PI));
        a.sort_by(f64::total_cmp);
        if (0..4).any(|k| (a[(k + 1) % 4] - a[k]).rem_euclid(2.0 * PI) < 0.05) {
            continue;
        }
        let c = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = rng.gen_range(0.2..3.0);
        let z: Vec<Point> = a.iter().map(|&t| c + Point::from_polar(r, t)).collect();
        let radii: [f64; 4] = [(); 4].map(|_| rng.gen_range(0.05..4.0));
        let l = |i: usize, j: usize| lambda_length(z[i], z[j], radii[i], radii[j]);
        let lhs = l(0, 2)? * l(1, 3)?;
        let rhs = l(0, 1)? * l(2, 3)? + l(0, 3)? * l(1, 2)?;
        worst = worst.max(rel(lhs, rhs));
        done += 1;
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-12,
        sigma: None,
        detail: format!("100 cocyclic quadruples, random decorations, max rel residual {worst:.2e}"),
    })
}

/// Faces of varied shape: near equilateral, right, obtuse, needle, and a
/// generic one far from the origin.
pub const REGION_FACES: [[(f64, f64); 3]; 5] = [
    [(0.0, 0.0), (1.0, 0.0), (0.5, 0.87)],
    [(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)],
    [(0.0, 0.0), (4.0, 0.0), (0.3, 0.4)],
    [(0.0, 0.0), (1.0, 0.0), (0.5, 0.05)],
    [(-7.0, 3.2), (-5.7, 1.0), (-4.9, 4.9)],
];

fn region_b(o: &SuiteOptions) -> Res<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, face) in REGION_FACES.iter().enumerate() {
        let pts = face.map(|(x, y)| Point::new(x, y));
        let e = integral_b_of(pts, &o.mc(100 + k as u64))?;
        let s = e.sigma_distance(regions::REGION_INTEGRAL);
        worst = worst.max(s.abs());
        parts.push(format!("{:.5}±{:.5} ({s:+.2}σ)", e.mean, e.stderr));
    }
    let (fast, time) = within_time(start, Duration::from_secs(120));
    Ok(Outcome {
        pass: worst <= 3.0 && fast,
        measured: worst,
        expected: 0.0,
        tolerance: 3.0,
        sigma: Some(worst),
        detail: format!("pi^2/16 = {:.5}; {}; {time}", regions::REGION_INTEGRAL, parts.join(", ")),
    })
}

fn region_r(o: &SuiteOptions) -> Res<Outcome> {
    let t = delaunay(&random_configuration(12, o.config_seed(11)))?;
    let faces: Vec<usize> =
        (0..t.num_faces()).filter(|&f| t.is_bounded(f) && (0..3).all(|k| t.is_interior(3 * f + k))).take(3).collect();
    if faces.is_empty() {
        return Err("no face with three interior edges".into());
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, &f) in faces.iter().enumerate() {
        let exact = refined_integral(&t, f)?;
        let e = integral_r(&t, f, &o.mc(200 + k as u64))?;
        let s = e.sigma_distance(exact);
        worst = worst.max(s.abs());
        parts.push(format!("face {f}: {:.5}±{:.5} vs {exact:.5} ({s:+.2}σ)", e.mean, e.stderr));
    }
    Ok(Outcome {
        pass: worst <= 3.0,
        measured: worst,
        expected: 0.0,
        tolerance: 3.0,
        sigma: Some(worst),
        detail: parts.join(", "),
    })
}

fn growth(o: &SuiteOptions) -> Res<Outcome> {
    let start = Instant::now();
    let bound = PI * PI / 8.0;
    let rows = growth_chain(2, &o.mc(300), mc::DEFAULT_VOLUME_CAP)?;
    let v0 = rows[0].volume.mean;
    let v1 = &rows[1].volume;
    let v1_ok = v1.lower(3.0) >= bound * (1.0 - INEQUALITY_SLACK);
    let (r2, r2_se) = rows[2].ratio.ok_or("missing ratio")?;
    let r2_ok = rows[2].ratio_pass == Some(true);
    let mut parts = vec![
        format!("V0 = {v0}"),
        format!("V1 = {:.4}±{:.4}", v1.mean, v1.stderr),
        format!("V2/(2V1) = {r2:.4}±{r2_se:.4}"),
    ];
    let mut cond_ok = true;
    let mut sigma = v1.sigma_distance(bound);
    for n in 0..=2usize {
        let base = random_configuration(n, o.config_seed(400 + n as u64));
        let c = conditional_growth_check(&base, &o.mc(310 + n as u64), false)?;
        cond_ok &= c.pass;
        sigma = sigma.min(c.sigma_distance);
        parts.push(format!("cond N={n}: {:.4e}±{:.1e} vs {:.4e}", c.lhs.mean, c.lhs.stderr, c.rhs));
    }
    let (fast, time) = within_time(start, Duration::from_secs(300));
    parts.push(time);
    Ok(Outcome {
        pass: v0 == 1.0 && v1_ok && r2_ok && cond_ok && fast,
        measured: v1.lower(3.0),
        expected: bound,
        tolerance: INEQUALITY_SLACK,
        sigma: Some(sigma),
        detail: parts.join("; "),
    })
}

fn jacobian(o: &SuiteOptions) -> Res<Outcome> {
    let mut rng = o.rng(13);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_triangle(&mut rng);
        let (u, v) = loop {
            let (u, v): (f64, f64) = (rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9));
            if u + v < 0.95 {
                break (u, v);
            }
        };
        let z = f[0] + (f[1] - f[0]) * u + (f[2] - f[0]) * v;
        // fourth-order central differences
        let h = 1e-4;
        let grad = |dir: Point| -> Res<[f64; 2]> {
            let th = |s: f64| angle_coordinates(f, z + dir * s);
            let (p2, p1, m1, m2) = (th(2.0 * h)?, th(h)?, th(-h)?, th(-2.0 * h)?);
            let d = |k: usize| (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * h);
            Ok([d(0), d(1)])
        };
        let (gx, gy) = (grad(Point::new(1.0, 0.0))?, grad(Point::new(0.0, 1.0))?);
        let jac = gx[0] * gy[1] - gx[1] * gy[0];
        worst = worst.max(rel(four_point_density(f, z), 0.5 * jac.abs()));
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-6,
        sigma: None,
        detail: format!("100 (face, z) pairs, max rel error {worst:.2e}"),
    })
}

fn dual_continuity(_: &SuiteOptions) -> Res<Outcome> {
    let r = flip_continuity_check(&FlipPath::square()?, 1e-9, 1e-3)?;
    let crossing = r.crossing_hyperbolic.abs().max(r.crossing_flat.abs());
    Ok(Outcome {
        pass: r.before != r.after && crossing <= 1e-8 && r.max_slope_error <= 1e-3,
        measured: crossing,
        expected: 0.0,
        tolerance: 1e-8,
        sigma: None,
        detail: format!(
            "flip {:?} -> {:?}; |l| at crossing {crossing:.2e}; max |l/theta - 1| for theta <= 1e-3: {:.2e} (tol 1e-3); \
             max dual distance jump {:.2e}",
            r.before, r.after, r.max_slope_error, r.max_distance_jump
        ),
    })
}

fn angle_sums(o: &SuiteOptions) -> Res<Outcome> {
    let mut sum_err: f64 = 0.0;
    let mut theta_ok = true;
    let mut violations = 0;
    let mut cycles = 0;
    for k in 0..30u64 {
        let n = 1 + (k as usize % 10);
        let t = delaunay(&random_configuration(n, o.config_seed(6000 + k)))?;
        let pat = angle_pattern(&t)?;
        for v in 0..t.num_vertices() {
            sum_err = sum_err.max((pat.vertex_sum(v) - 2.0 * PI).abs());
        }
        theta_ok &= pat.edges.iter().all(|e| (0.0..PI).contains(&e.theta));
        let rep = check_contour_condition(&t, &pat, 6);
        violations += rep.violations.len();
        cycles += rep.cycles_checked;
    }
    Ok(Outcome {
        pass: sum_err <= 1e-10 && theta_ok && violations == 0,
        measured: sum_err,
        expected: 0.0,
        tolerance: 1e-10,
        sigma: None,
        detail: format!(
            "30 configs; max |vertex sum - 2pi| {sum_err:.2e}; theta in [0, pi): {theta_ok}; \
             {cycles} dual cycles of length <= 6, {violations} below 2pi"
        ),
    })
}

/// A cocyclic quadrilateral deep inside a ring, so all four corners are
/// interior vertices on both sides of the flip.
fn jump_configuration() -> Res<PointConfiguration> {
    let ctr = Point::new(0.4, 0.6);
    let mut free: Vec<Point> = [0.3f64, 1.9, 3.4, 4.9].iter().map(|&a| ctr + Point::from_polar(0.5, a)).collect();
    free.extend([
        Point::new(-1.2, -0.8),
        Point::new(2.1, -0.9),
        Point::new(1.8, 2.2),
        Point::new(-1.0, 2.0),
        Point::new(0.5, -1.5),
        Point::new(0.5, 3.0),
        Point::new(-2.0, 0.6),
        Point::new(2.6, 0.7),
    ]);
    Ok(PointConfiguration::with_free(&free)?)
}

fn flip_jump(o: &SuiteOptions) -> Res<Outcome> {
    let config = jump_configuration()?;
    let t = delaunay(&config)?;
    let ring = [3, 4, 5, 6];
    let h = t
        .edges()
        .into_iter()
        .find(|&h| [t.origin(h), t.dest(h), t.apex(h), t.apex(t.twin(h))].iter().all(|v| ring.contains(v)))
        .ok_or("no cocyclic diagonal")?;
    let fd = flip_discontinuity(&config, t.origin(h), t.dest(h), &[])?;
    let m = best_convention(&fd.lhs, &fd.rhs);
    let dim = FreeBasis::of(&config).dim();
    let mut rng = o.rng(16);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tv = TangentVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let (l, r) = (fd.lhs.eval(&tv), m.sign * m.scale * fd.rhs.eval(&tv));
        worst = worst.max(rel(l, r));
    }
    Ok(Outcome {
        pass: worst <= 1e-5,
        measured: worst,
        expected: 0.0,
        tolerance: 1e-5,
        sigma: None,
        detail: format!(
            "convention sign {:+}, scale {:.6e} (1/4pi^2 = {:.6e}); one-form rel error {:.2e}; \
             20 random tangent vectors, max rel error {worst:.2e}",
            m.sign,
            m.scale,
            1.0 / (4.0 * PI * PI),
            m.rel_error
        ),
    })
}

/// Ω from the face sum against Ω built from D; exposed for `forms --check omega`.
pub fn omega_consistency(t: &Triangulation) -> Res<f64> {
    let om = omega_total(t)?;
    let od = omega_from_kahler(&kahler_matrix(t)?, &FreeBasis::of(t.config()));
    Ok(om.rel_diff(&od))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_is_listed_once() {
        let ids: Vec<u32> = SPECS.iter().map(|s| s.id).collect();
        assert_eq!(ids, (1..=CHECK_COUNT).collect::<Vec<_>>());
        assert_eq!(SPECS.iter().filter(|s| s.report_only).count(), 1);
        assert!(run_check(17, &SuiteOptions { seed: 0, quick: true }).is_none());
    }

    #[test]
    fn deterministic_checks_pass_and_repeat() {
        let o = SuiteOptions { seed: 3, quick: true };
        for id in [2, 5, 9] {
            let a = run_check(id, &o).unwrap();
            let b = run_check(id, &o).unwrap();
            assert_eq!(a.status, Status::Pass, "{}", a.line());
            assert_eq!(a.measured.to_bits(), b.measured.to_bits());
        }
    }
}
