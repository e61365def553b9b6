//! Seeded Monte-Carlo engine: batch estimator, sphere-uniform proposal,
//! total volumes V_N and the growth inequalities.
//!
//! Batches run in parallel, each on its own ChaCha8 stream, and are reduced in
//! batch order, so a result depends on `(seed, samples, batch_size)` only.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point, PointConfiguration};
use crate::kahler::{self, KahlerError};
use crate::tri::{self, TriError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("batch size must be positive")]
    ZeroBatch,
    #[error("negative weight {weight} at sample {index} of batch {batch}")]
    NegativeWeight { weight: f64, batch: u64, index: usize },
    #[error("N = {0} exceeds the cap {1}")]
    CapExceeded(usize, usize),
    #[error("degenerate base configuration: {0}")]
    DegenerateBase(String),
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error(transparent)]
    Tri(#[from] TriError),
}

pub type Result<T> = std::result::Result<T, McError>;

pub const DEFAULT_BATCH_SIZE: usize = 10_000;
pub const DEFAULT_VOLUME_CAP: usize = 4;

/// Seed plus stream id of one ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub rejected: usize,
    pub duration_ms: u64,
}

impl McEstimate {
    /// Deterministic value with zero error.
    pub fn exact(value: f64) -> Self {
        McEstimate { mean: value, stderr: 0.0, n: 0, seed: 0, rejected: 0, duration_ms: 0 }
    }

    pub fn lower(&self, sigmas: f64) -> f64 {
        self.mean - sigmas * self.stderr
    }

    pub fn upper(&self, sigmas: f64) -> f64 {
        self.mean + sigmas * self.stderr
    }

    /// (mean − target)/stderr; infinite when stderr is 0 and they differ.
    pub fn sigma_distance(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    /// Ratio with first-order error propagation.
    pub fn ratio(&self, other: &McEstimate) -> (f64, f64) {
        let r = self.mean / other.mean;
        let rel = ((self.stderr / self.mean).powi(2) + (other.stderr / other.mean).powi(2)).sqrt();
        (r, r.abs() * rel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl McOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        McOptions { samples, seed, batch_size: DEFAULT_BATCH_SIZE }
    }
}

/// Outcome of one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Draw {
    Value(f64),
    /// Degenerate sample (measure zero); counts as a zero contribution.
    Rejected,
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchSum {
    n: usize,
    sum: f64,
    sumsq: f64,
    rejected: usize,
}

/// Runs `draw` on `opts.samples` independent draws. Batch `b` uses stream
/// `b`; the standard error comes from the batch means (pooled sample
/// variance when there are fewer than two batches).
pub fn estimate<F>(opts: &McOptions, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Draw + Sync,
{
    if opts.batch_size == 0 {
        return Err(McError::ZeroBatch);
    }
    if opts.samples < 2 {
        return Err(McError::TooFewSamples { min: 2, got: opts.samples });
    }
    let start = Instant::now();
    let nb = opts.samples.div_ceil(opts.batch_size);
    let base = opts.samples / nb;
    let extra = opts.samples % nb;
    let sums: Vec<Result<BatchSum>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let size = base + usize::from(b < extra);
            let mut rng = RngSpec::new(opts.seed, b as u64).rng();
            let mut s = BatchSum { n: size, ..Default::default() };
            for index in 0..size {
                match draw(&mut rng) {
                    Draw::Value(w) if w.is_finite() => {
                        if w < 0.0 {
                            return Err(McError::NegativeWeight { weight: w, batch: b as u64, index });
                        }
                        s.sum += w;
                        s.sumsq += w * w;
                    }
                    _ => s.rejected += 1,
                }
            }
            Ok(s)
        })
        .collect();
    let sums: Vec<BatchSum> = sums.into_iter().collect::<Result<_>>()?;

    let n: usize = sums.iter().map(|s| s.n).sum();
    let total: f64 = sums.iter().map(|s| s.sum).sum();
    let mean = total / n as f64;
    let stderr = if nb >= 2 {
        let dev: f64 = sums.iter().map(|s| (s.sum / s.n as f64 - mean).powi(2)).sum();
        (dev / (nb * (nb - 1)) as f64).sqrt()
    } else {
        let sumsq: f64 = sums.iter().map(|s| s.sumsq).sum();
        let var = (sumsq - n as f64 * mean * mean).max(0.0) / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Ok(McEstimate {
        mean,
        stderr,
        n,
        seed: opts.seed,
        rejected: sums.iter().map(|s| s.rejected).sum(),
        duration_ms: start.elapsed().as_millis() as u64,
    })
}

/// Density of the stereographic image of the uniform law on the sphere.
pub fn sphere_density(z: Point) -> f64 {
    1.0 / (PI * (1.0 + z.norm_sqr()).powi(2))
}

/// Draws `z` from the sphere-uniform law on the plane chart; returns `z` and
/// its density.
pub fn sphere_proposal<R: Rng + ?Sized>(rng: &mut R) -> (Point, f64) {
    let u: f64 = rng.gen();
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (u / (1.0 - u)).sqrt();
    let z = Point::from_polar(r, phi);
    (z, sphere_density(z))
}

/// Uniform point in the disk of radius `r` about `c`.
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, c: Point, r: f64) -> Point {
    let u: f64 = rng.gen();
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    c + Point::from_polar(r * u.sqrt(), phi)
}

/// Box from which [`random_configuration`] draws free points.
pub const CONFIG_BOX: (f64, f64) = (-1.5, 2.5);
/// Minimum distance between any two points of a generated configuration.
pub const CONFIG_MIN_SEPARATION: f64 = 0.05;

/// `n` free points uniform in the square `CONFIG_BOX²`, redrawn when closer
/// than [`CONFIG_MIN_SEPARATION`] to an existing point; gauge {0, 1, ∞}.
pub fn random_configuration(n: usize, seed: u64) -> PointConfiguration {
    let mut rng = RngSpec::new(seed, u64::MAX).rng();
    let (lo, hi) = CONFIG_BOX;
    let mut pts: Vec<Point> = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
    while pts.len() < n + 2 {
        let z = Point::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        if pts.iter().all(|w| (z - w).norm() >= CONFIG_MIN_SEPARATION) {
            pts.push(z);
        }
    }
    PointConfiguration::with_free(&pts[2..]).expect("separated points form a valid configuration")
}

/// V_N = ∫ ∏ d²z_v 2^N det D with gauge {0, 1, ∞}, by importance sampling.
pub fn estimate_volume(n_free: usize, opts: &McOptions, cap: usize) -> Result<McEstimate> {
    if n_free > cap {
        return Err(McError::CapExceeded(n_free, cap));
    }
    if n_free == 0 {
        return Ok(McEstimate { seed: opts.seed, ..McEstimate::exact(1.0) });
    }
    estimate(opts, |rng| {
        let mut pts = Vec::with_capacity(n_free);
        let mut q = 1.0;
        for _ in 0..n_free {
            let (z, dq) = sphere_proposal(rng);
            pts.push(z);
            q *= dq;
        }
        let Ok(config) = PointConfiguration::with_free(&pts) else { return Draw::Rejected };
        match kahler::measure_density(&config) {
            Ok(d) => Draw::Value(d / q),
            Err(_) => Draw::Rejected,
        }
    })
}

/// det D with the gauge rows removed, on the Delaunay triangulation.
fn gauge_det(config: &PointConfiguration) -> Result<f64> {
    let t = tri::delaunay(config)?;
    let d = kahler::kahler_matrix(&t)?;
    Ok(kahler::det_excluding(&d, &config.gauge()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub n_free: usize,
    pub lhs: McEstimate,
    pub base_det: f64,
    /// (N+1)(π²/8) det(base).
    pub rhs: f64,
    /// Refined bound; `None` unless requested.
    pub rhs_refined: Option<f64>,
    pub sigma_distance: f64,
    pub pass: bool,
    pub pass_refined: Option<bool>,
}

/// Relative slack on one-sided inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-2;

/// ∫ d²z det D(base ∪ {z}) against (N+1)(π²/8) det D(base). PASS iff the
/// lower 3σ bound clears the bound up to [`INEQUALITY_SLACK`].
pub fn conditional_growth_check(base: &PointConfiguration, opts: &McOptions, refined: bool) -> Result<GrowthCheck> {
    let t = tri::delaunay(base).map_err(|e| McError::DegenerateBase(e.to_string()))?;
    let d = kahler::kahler_matrix(&t).map_err(|e| McError::DegenerateBase(e.to_string()))?;
    let base_det = kahler::det_excluding(&d, &base.gauge());
    if !(base_det > 0.0) {
        return Err(McError::DegenerateBase(format!("det D = {base_det}")));
    }
    let n_free = base.free_ids().len();
    let rhs = (n_free as f64 + 1.0) * PI * PI / 8.0 * base_det;
    let lhs = estimate(opts, |rng| {
        let (z, q) = sphere_proposal(rng);
        let Ok((grown, _)) = base.push_free(z) else { return Draw::Rejected };
        match gauge_det(&grown) {
            Ok(v) => Draw::Value(v / q),
            Err(_) => Draw::Rejected,
        }
    })?;
    let rhs_refined = if refined { Some(refined_bound(&t)? * base_det) } else { None };
    let ok = |bound: f64| lhs.lower(3.0) >= bound * (1.0 - INEQUALITY_SLACK);
    Ok(GrowthCheck {
        n_free,
        sigma_distance: lhs.sigma_distance(rhs),
        pass: ok(rhs),
        pass_refined: rhs_refined.map(ok),
        lhs,
        base_det,
        rhs,
        rhs_refined,
    })
}

/// (N+1)π²/8 plus (1/16) Σ θ(2π − θ) over the edges of every face whose three
/// neighbours are bounded. Faces touching the hull keep their π²/16, so this
/// never exceeds the full refined bound.
pub fn refined_bound(t: &tri::Triangulation) -> Result<f64> {
    let n_free = t.config().free_ids().len();
    let mut extra = 0.0;
    for f in t.bounded_faces() {
        let hs = [3 * f, 3 * f + 1, 3 * f + 2];
        if hs.iter().all(|&h| t.is_interior(h)) {
            for h in hs {
                let th = t.theta(h)?;
                extra += th * (2.0 * PI - th) / 16.0;
            }
        }
    }
    Ok((n_free as f64 + 1.0) * PI * PI / 8.0 + extra)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n_free: usize,
    pub volume: McEstimate,
    /// Z_N = V_N / N!.
    pub z: f64,
    pub z_stderr: f64,
    /// (π²/8)^N.
    pub z_bound: f64,
    /// V_N / (N V_{N−1}) with its error, from N = 1 on.
    pub ratio: Option<(f64, f64)>,
    pub ratio_pass: Option<bool>,
    pub z_pass: bool,
}

/// V₀..V_{N_max} with the ratio and Z_N tests (3σ, 1% slack).
pub fn growth_chain(n_max: usize, opts: &McOptions, cap: usize) -> Result<Vec<GrowthRow>> {
    let bound = PI * PI / 8.0;
    let mut rows: Vec<GrowthRow> = Vec::new();
    let mut fact = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            fact *= n as f64;
        }
        let vol = estimate_volume(n, &McOptions { seed: opts.seed.wrapping_add(n as u64), ..*opts }, cap)?;
        let (ratio, ratio_pass) = match rows.last() {
            Some(prev) => {
                let (r, se) = vol.ratio(&prev.volume);
                let r = r / n as f64;
                let se = se / n as f64;
                (Some((r, se)), Some(r + 3.0 * se >= bound * (1.0 - INEQUALITY_SLACK)))
            }
            None => (None, None),
        };
        let z = vol.mean / fact;
        let z_stderr = vol.stderr / fact;
        let z_bound = bound.powi(n as i32);
        rows.push(GrowthRow {
            n_free: n,
            z,
            z_stderr,
            z_bound,
            ratio,
            ratio_pass,
            z_pass: z + 3.0 * z_stderr >= z_bound * (1.0 - INEQUALITY_SLACK),
            volume: vol,
        });
    }
    Ok(rows)
}
