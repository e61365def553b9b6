//! The regions R(f) and B(f) attached to a face, their bounding arcs, the
//! angle coordinates of the 4-point triangulation, and the region integrals.
//!
//! A circle through the endpoints of a chord `p → q` is labelled by its
//! inscribed level: the signed angle `arg((q − z)/(p − z))` seen from its
//! points `z`, taken on the minor arc. Both region kinds are bounded by three
//! such minor arcs through the vertices of the face.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, GeneralizedCircle, GeomError, Point, Sign, Site, VertexId};
use crate::kahler;
use crate::mc::{self, Draw, McEstimate, McError, McOptions};
use crate::tri::{FaceId, TriError, Triangulation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("degenerate face")]
    DegenerateFace,
    #[error("face {0} is unbounded")]
    UnboundedFace(FaceId),
    #[error("face {0} has a hull edge (unsupported)")]
    HullFace(FaceId),
    #[error("edge ({0}, {1}) has no second bounded face")]
    HullEdge(VertexId, VertexId),
    #[error("point is not strictly inside the face")]
    NotInFace,
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// I = ∫_{B(f)} D_{zz̄} d²z, the same for every face.
pub const REGION_INTEGRAL: f64 = PI * PI / 16.0;

const BOUNDARY_MARGIN: f64 = 1e-12;

/// Below this |sin(level)| the arc is taken as a straight line.
const LINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    R,
    B,
}

/// One bounding circle and the side of it the region lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub edge: (VertexId, VertexId),
    pub circle: GeneralizedCircle,
    pub inner: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub face: FaceId,
    pub kind: RegionKind,
    pub vertices: [Point; 3],
    pub center: Point,
    pub radius: f64,
    pub arcs: [BoundaryArc; 3],
}

impl Region {
    /// Strictly inside the circumdisk and strictly on the inner side of every arc.
    pub fn contains(&self, z: Point) -> bool {
        // relative margin keeps points on the circumcircle (the vertices) out
        (z - self.center).norm_sqr() < self.radius * self.radius * (1.0 - BOUNDARY_MARGIN)
            && self.arcs.iter().all(|a| a.circle.side(z) == a.inner)
    }
}

fn wrap(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Circle through `p`, `q` whose points see the chord at `level` (mod π).
pub fn circle_through_chord(p: Point, q: Point, level: f64) -> Result<GeneralizedCircle> {
    let d = q - p;
    let c = d.norm() / 2.0;
    if c == 0.0 {
        return Err(GeomError::Coincident.into());
    }
    let s = level.sin();
    if s.abs() < LINE_TOL {
        return Ok(GeneralizedCircle::line_through(p, q)?);
    }
    let normal = Point::i() * d / d.norm();
    let center = (p + q) / 2.0 + normal * (c * level.cos() / s);
    Ok(GeneralizedCircle::Circle { center, radius: c / s.abs() })
}

fn finite(s: Site) -> Result<Point> {
    s.finite().ok_or(RegionError::DegenerateFace)
}

/// Level of the bisector of the chord `p → q` with apex `r` of the left face
/// and apex `s` of the right face: `(α − β)/2 + π`, wrapped.
fn bisector_level(p: Point, q: Point, r: Point, s: Site) -> f64 {
    let alpha = geom::inscribed_angle(p, q, r);
    let beta = match s {
        Site::Finite(s) => geom::inscribed_angle(q, p, s),
        Site::Infinite => 0.0,
    };
    wrap((alpha - beta) / 2.0 + PI)
}

/// Circle through the endpoints of `(u, v)` making the angle (π − θ)/2 with
/// both adjacent circumcircles. Cocyclic neighbours give the circle
/// orthogonal to the common circumcircle; mirror-symmetric ones the line.
pub fn bisector_arc(t: &Triangulation, u: VertexId, v: VertexId) -> Result<GeneralizedCircle> {
    let mut h = t.half_edge(u, v).ok_or(TriError::NoSuchEdge(u, v))?;
    if t.site(u).is_infinite() || t.site(v).is_infinite() {
        return Err(RegionError::HullEdge(u, v));
    }
    if t.site(t.apex(h)).is_infinite() {
        h = t.twin(h);
        if t.site(t.apex(h)).is_infinite() {
            return Err(RegionError::HullEdge(u, v));
        }
    }
    let p = finite(t.site(t.origin(h)))?;
    let q = finite(t.site(t.dest(h)))?;
    let r = finite(t.site(t.apex(h)))?;
    let level = bisector_level(p, q, r, t.site(t.apex(t.twin(h))));
    circle_through_chord(p, q, level)
}

fn circumdisk(pts: [Point; 3]) -> Result<(Point, f64)> {
    if geom::orient2d(pts[0], pts[1], pts[2]) == Sign::Zero {
        return Err(RegionError::DegenerateFace);
    }
    let o = geom::circumcenter(pts[0], pts[1], pts[2]);
    Ok((o, (pts[0] - o).norm()))
}

/// Circle through `p`, `q` orthogonal to the circumcircle of `face`.
pub fn orthogonal_arc(face: [Point; 3], p: Point, q: Point) -> Result<GeneralizedCircle> {
    let (o, r) = circumdisk(face)?;
    let m = (p + q) / 2.0;
    let h = (m - o).norm();
    if h <= 1e-14 * r {
        return Ok(GeneralizedCircle::line_through(p, q)?);
    }
    let u = (m - o) / h;
    let w = o + u * (r * r / h);
    let rho = ((w - o).norm_sqr() - r * r).sqrt();
    Ok(GeneralizedCircle::Circle { center: w, radius: rho })
}

fn inner_side(circle: &GeneralizedCircle, opposite: Point, center: Point) -> Sign {
    match circle.side(opposite) {
        Sign::Zero => circle.side(center),
        s => s,
    }
}

fn face_points(t: &Triangulation, f: FaceId) -> Result<[Point; 3]> {
    if f >= t.num_faces() {
        return Err(TriError::NotInFace(f).into());
    }
    if !t.is_bounded(f) {
        return Err(RegionError::UnboundedFace(f));
    }
    Ok(t.face(f).map(|v| t.config().point(v).unwrap()))
}

/// B(f) of a ccw triangle given by its points: the part of the circumdisk
/// bounded by the three orthogonal arcs, i.e. on the side of each arc that
/// holds the opposite vertex. For an obtuse face the long edge's orthogonal
/// disk contains the opposite vertex, and B(f) is the side of it away from
/// the circumcenter.
pub fn region_b_of(pts: [Point; 3]) -> Result<Region> {
    region_b_labelled(pts, [0, 1, 2], 0)
}

fn region_b_labelled(pts: [Point; 3], ids: [VertexId; 3], face: FaceId) -> Result<Region> {
    let (center, radius) = circumdisk(pts)?;
    let arc = |k: usize| -> Result<BoundaryArc> {
        let circle = orthogonal_arc(pts, pts[k], pts[(k + 1) % 3])?;
        Ok(BoundaryArc { edge: (ids[k], ids[(k + 1) % 3]), circle, inner: inner_side(&circle, pts[(k + 2) % 3], center) })
    };
    Ok(Region { face, kind: RegionKind::B, vertices: pts, center, radius, arcs: [arc(0)?, arc(1)?, arc(2)?] })
}

pub fn region_b(t: &Triangulation, f: FaceId) -> Result<Region> {
    region_b_labelled(face_points(t, f)?, t.face(f), f)
}

/// R(f); every edge of `f` must be shared with a bounded face.
pub fn region_r(t: &Triangulation, f: FaceId) -> Result<Region> {
    let pts = face_points(t, f)?;
    let ids = t.face(f);
    if (0..3).any(|k| !t.is_interior(3 * f + k)) {
        return Err(RegionError::HullFace(f));
    }
    let (center, radius) = circumdisk(pts)?;
    let arc = |k: usize| -> Result<BoundaryArc> {
        let circle = bisector_arc(t, ids[k], ids[(k + 1) % 3])?;
        Ok(BoundaryArc { edge: (ids[k], ids[(k + 1) % 3]), circle, inner: inner_side(&circle, pts[(k + 2) % 3], center) })
    };
    Ok(Region { face: f, kind: RegionKind::R, vertices: pts, center, radius, arcs: [arc(0)?, arc(1)?, arc(2)?] })
}

pub fn in_region_b(t: &Triangulation, f: FaceId, z: Point) -> Result<bool> {
    Ok(region_b(t, f)?.contains(z))
}

pub fn in_region_r(t: &Triangulation, f: FaceId, z: Point) -> Result<bool> {
    Ok(region_r(t, f)?.contains(z))
}

/// D_{zz̄} of the 4-point triangulation with faces (a,b,z), (b,c,z), (c,a,z).
/// Algebraic in `z`, so it continues outside the triangle.
pub fn four_point_density(face: [Point; 3], z: Point) -> f64 {
    let mut d = 0.0;
    for k in 0..3 {
        let blk = kahler::face_block([Site::Finite(face[k]), Site::Finite(face[(k + 1) % 3]), Site::Finite(z)]);
        d += blk[2][2].re;
    }
    d
}

/// Angles θ₁, θ₂, θ₃ of the 4-point triangulation with `z` inside `face`:
/// θ_k is the sum of the two angles facing the internal edge `(z, v_k)`.
pub fn angle_coordinates(face: [Point; 3], z: Point) -> Result<[f64; 3]> {
    if geom::orient2d(face[0], face[1], face[2]) != Sign::Positive {
        return Err(RegionError::DegenerateFace);
    }
    if (0..3).any(|k| geom::orient2d(face[k], face[(k + 1) % 3], z) != Sign::Positive) {
        return Err(RegionError::NotInFace);
    }
    // angle at r between the rays to p and q
    let at = |r: Point, p: Point, q: Point| ((q - r) / (p - r)).arg().abs();
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let v = face[k];
        let next = face[(k + 1) % 3];
        let prev = face[(k + 2) % 3];
        *slot = at(next, v, z) + at(prev, v, z);
    }
    Ok(out)
}

fn integrate_region(region: &Region, opts: &McOptions) -> Result<McEstimate> {
    let area = PI * region.radius * region.radius;
    let draw = |rng: &mut ChaCha8Rng| {
        let z = mc::uniform_in_disk(rng, region.center, region.radius);
        if region.contains(z) {
            Draw::Value(area * four_point_density(region.vertices, z))
        } else {
            Draw::Value(0.0)
        }
    };
    Ok(mc::estimate(opts, draw)?)
}

/// Minimum sample count for the region integrals.
pub const MIN_REGION_SAMPLES: usize = 10_000;

fn check_samples(opts: &McOptions) -> Result<()> {
    if opts.samples < MIN_REGION_SAMPLES {
        return Err(McError::TooFewSamples { min: MIN_REGION_SAMPLES, got: opts.samples }.into());
    }
    Ok(())
}

/// ∫_{B(f)} D_{zz̄} d²z for a ccw triangle given by its points.
pub fn integral_b_of(face: [Point; 3], opts: &McOptions) -> Result<McEstimate> {
    check_samples(opts)?;
    integrate_region(&region_b_of(face)?, opts)
}

pub fn integral_b(t: &Triangulation, f: FaceId, opts: &McOptions) -> Result<McEstimate> {
    check_samples(opts)?;
    integrate_region(&region_b(t, f)?, opts)
}

pub fn integral_r(t: &Triangulation, f: FaceId, opts: &McOptions) -> Result<McEstimate> {
    check_samples(opts)?;
    integrate_region(&region_r(t, f)?, opts)
}

/// I₁ = π²/16 + (1/16) Σ θ_e (2π − θ_e) over the edges of `f`.
pub fn refined_integral(t: &Triangulation, f: FaceId) -> Result<f64> {
    face_points(t, f)?;
    if (0..3).any(|k| !t.is_interior(3 * f + k)) {
        return Err(RegionError::HullFace(f));
    }
    let mut acc = REGION_INTEGRAL;
    for k in 0..3 {
        let th = t.theta(3 * f + k)?;
        acc += th * (2.0 * PI - th) / 16.0;
    }
    Ok(acc)
}
