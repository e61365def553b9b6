//! Planar primitives in the plane chart of the Riemann sphere.
//!
//! Finite points are plain complex numbers. The point at infinity is a
//! separate [`Site::Infinite`] sentinel and never a large coordinate.
//! Orientation and in-circle predicates are exact (adaptive arithmetic);
//! metric quantities (angles, centers) are ordinary floating point.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A finite point `z = re + i im` of the plane chart.
pub type Point = Complex64;

/// Index of a vertex in a [`PointConfiguration`].
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("degenerate triangle (collinear or repeated points)")]
    Degenerate,
    #[error("coincident points")]
    Coincident,
    #[error("faces do not share an edge")]
    NotAdjacent,
    #[error("repeated vertex id {0}")]
    RepeatedId(VertexId),
    #[error("vertex id {0} out of range")]
    UnknownVertex(VertexId),
    #[error("singular Möbius matrix")]
    SingularMobius,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

/// A point of the Riemann sphere: finite, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Site {
    Finite(Point),
    Infinite,
}

impl Site {
    pub fn finite(self) -> Option<Point> {
        match self {
            Site::Finite(z) => Some(z),
            Site::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Site::Infinite)
    }
}

impl From<Point> for Site {
    fn from(z: Point) -> Self {
        Site::Finite(z)
    }
}

/// Sign of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

fn coord(z: Point) -> robust::Coord<f64> {
    robust::Coord { x: z.re, y: z.im }
}

/// Exact sign of twice the signed area of `(a, b, c)`; positive for ccw.
pub fn orient2d(a: Point, b: Point, c: Point) -> Sign {
    Sign::of(robust::orient2d(coord(a), coord(b), coord(c)))
}

/// Exact in-circle test. `(a, b, c)` must be counter-clockwise; the result is
/// positive iff `d` lies strictly inside their circumcircle.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> Result<Sign> {
    if orient2d(a, b, c) != Sign::Positive {
        return Err(GeomError::Degenerate);
    }
    Ok(Sign::of(robust::incircle(coord(a), coord(b), coord(c), coord(d))))
}

/// In-circle test on the sphere for a ccw face that may contain the infinite
/// vertex. For a face `(u, v, ∞)` the circle is the line through `u, v` and its
/// "inside" is the open half-plane to the left of `u → v`; a point on the
/// segment itself counts as inside so hull-collinear points get split in.
pub fn incircle_sphere(face: [Site; 3], d: Site) -> Sign {
    let inf = face.iter().position(|s| s.is_infinite());
    match (inf, d) {
        (None, Site::Infinite) => Sign::Negative,
        (None, Site::Finite(q)) => {
            let [a, b, c] = face.map(|s| s.finite().unwrap());
            Sign::of(robust::incircle(coord(a), coord(b), coord(c), coord(q)))
        }
        (Some(_), Site::Infinite) => Sign::Zero,
        (Some(k), Site::Finite(q)) => {
            let u = face[(k + 1) % 3].finite().unwrap();
            let v = face[(k + 2) % 3].finite().unwrap();
            match orient2d(u, v, q) {
                Sign::Zero if strictly_between(u, v, q) => Sign::Positive,
                Sign::Zero => Sign::Negative,
                s => s,
            }
        }
    }
}

/// `q` lies strictly inside segment `[u, v]`, assuming collinearity.
pub(crate) fn strictly_between(u: Point, v: Point, q: Point) -> bool {
    let t = (q - u) * (v - u).conj();
    t.re > 0.0 && t.re < (v - u).norm_sqr()
}

/// A circle or a line of the plane chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneralizedCircle {
    Circle { center: Point, radius: f64 },
    Line { anchor: Point, direction: Point },
}

impl GeneralizedCircle {
    pub fn line_through(p: Point, q: Point) -> Result<Self> {
        let d = q - p;
        if d.norm() == 0.0 {
            return Err(GeomError::Coincident);
        }
        Ok(GeneralizedCircle::Line { anchor: p, direction: d / d.norm() })
    }

    /// Signed distance-like quantity: negative inside a circle (or to the
    /// left of a line), positive outside, zero on it.
    pub fn power(&self, z: Point) -> f64 {
        match *self {
            GeneralizedCircle::Circle { center, radius } => (z - center).norm_sqr() - radius * radius,
            GeneralizedCircle::Line { anchor, direction } => -((z - anchor) * direction.conj()).im,
        }
    }

    /// Distance from `z` to the circle or line.
    pub fn distance(&self, z: Point) -> f64 {
        match *self {
            GeneralizedCircle::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            GeneralizedCircle::Line { .. } => self.power(z).abs(),
        }
    }

    /// Strict side of `z`: `Positive` inside / left, `Negative` outside / right.
    pub fn side(&self, z: Point) -> Sign {
        Sign::of(-self.power(z))
    }
}

/// Circle through three sites; a line when they are collinear or one of them
/// is the infinite vertex.
pub fn circumcircle(a: Site, b: Site, c: Site) -> Result<GeneralizedCircle> {
    let pts = [a, b, c];
    let finite: Vec<Point> = pts.iter().filter_map(|s| s.finite()).collect();
    for i in 0..finite.len() {
        for j in i + 1..finite.len() {
            if finite[i] == finite[j] {
                return Err(GeomError::Coincident);
            }
        }
    }
    match finite.len() {
        3 => {
            let (a, b, c) = (finite[0], finite[1], finite[2]);
            if orient2d(a, b, c) == Sign::Zero {
                let (p, q) = farthest_pair(a, b, c);
                return GeneralizedCircle::line_through(p, q);
            }
            let center = circumcenter(a, b, c);
            Ok(GeneralizedCircle::Circle { center, radius: (a - center).norm() })
        }
        2 => GeneralizedCircle::line_through(finite[0], finite[1]),
        _ => Err(GeomError::Coincident),
    }
}

fn farthest_pair(a: Point, b: Point, c: Point) -> (Point, Point) {
    let cands = [(a, b), (b, c), (a, c)];
    cands
        .into_iter()
        .max_by(|x, y| (x.1 - x.0).norm_sqr().total_cmp(&(y.1 - y.0).norm_sqr()))
        .unwrap()
}

/// Circumcenter of a non-degenerate finite triangle.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let b1 = b - a;
    let c1 = c - a;
    let d = 2.0 * (b1.re * c1.im - b1.im * c1.re);
    let bb = b1.norm_sqr();
    let cc = c1.norm_sqr();
    a + Point::new((c1.im * bb - b1.im * cc) / d, (b1.re * cc - c1.re * bb) / d)
}

/// Interior angles at `a`, `b`, `c` of a non-degenerate triangle.
pub fn triangle_angles(a: Point, b: Point, c: Point) -> Result<[f64; 3]> {
    if orient2d(a, b, c) == Sign::Zero {
        return Err(GeomError::Degenerate);
    }
    let ang = |p: Point, q: Point, r: Point| ((r - p) / (q - p)).arg().abs();
    Ok([ang(a, b, c), ang(b, c, a), ang(c, a, b)])
}

/// Oriented angle at `r` subtended by the directed chord `p → q`:
/// `arg((q − r)/(p − r))`, positive when `(p, q, r)` is ccw.
pub fn inscribed_angle(p: Point, q: Point, r: Point) -> f64 {
    ((q - r) / (p - r)).arg()
}

/// Circumcircle intersection angle θ of the edge `p → q` whose left face is
/// `(p, q, left)` and right face `(q, p, right)`, both ccw on the sphere.
///
/// θ = π − α − β with α, β the angles opposite the edge (0 at an infinite
/// apex). For an edge `(v, ∞)` the angle is π minus the hull angle at `v`
/// between the two hull neighbours, which keeps every vertex sum at 2π.
pub fn edge_angle(p: Site, q: Site, left: Site, right: Site) -> Result<f64> {
    match (p, q) {
        (Site::Finite(p), Site::Finite(q)) => {
            let opp = |apex: Site, a: Point, b: Point| -> Result<f64> {
                match apex {
                    Site::Infinite => Ok(0.0),
                    Site::Finite(r) => {
                        if r == a || r == b {
                            return Err(GeomError::Coincident);
                        }
                        Ok(inscribed_angle(a, b, r))
                    }
                }
            };
            let alpha = opp(left, p, q)?;
            let beta = opp(right, q, p)?;
            Ok(PI - alpha - beta)
        }
        (Site::Finite(v), Site::Infinite) => hull_edge_angle(v, right, left),
        (Site::Infinite, Site::Finite(v)) => hull_edge_angle(v, left, right),
        _ => Err(GeomError::Coincident),
    }
}

/// θ of the edge `(v, ∞)`: `before` is the hull neighbour preceding `v` in ccw
/// hull order, `after` the one following it.
fn hull_edge_angle(v: Point, before: Site, after: Site) -> Result<f64> {
    let (Some(b), Some(a)) = (before.finite(), after.finite()) else {
        return Err(GeomError::Degenerate);
    };
    if a == v || b == v {
        return Err(GeomError::Coincident);
    }
    let mut interior = ((b - v) / (a - v)).arg();
    if interior < 0.0 {
        interior += 2.0 * PI;
    }
    Ok(PI - interior)
}

/// θ(e) for two ccw faces sharing an edge.
pub fn intersection_angle(f: [Site; 3], g: [Site; 3]) -> Result<f64> {
    for i in 0..3 {
        let (p, q) = (f[i], f[(i + 1) % 3]);
        for j in 0..3 {
            if g[j] == q && g[(j + 1) % 3] == p {
                return edge_angle(p, q, f[(i + 2) % 3], g[(j + 2) % 3]);
            }
        }
    }
    Err(GeomError::NotAdjacent)
}

/// Labeled points with a gauge of three fixed vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    sites: Vec<Site>,
    gauge: [VertexId; 3],
}

impl PointConfiguration {
    pub fn new(sites: Vec<Site>, gauge: [VertexId; 3]) -> Result<Self> {
        if gauge[0] == gauge[1] || gauge[1] == gauge[2] || gauge[0] == gauge[2] {
            return Err(GeomError::InvalidConfig("gauge ids must be distinct".into()));
        }
        if let Some(&g) = gauge.iter().find(|&&g| g >= sites.len()) {
            return Err(GeomError::UnknownVertex(g));
        }
        if sites.iter().filter(|s| s.is_infinite()).count() > 1 {
            return Err(GeomError::InvalidConfig("more than one infinite vertex".into()));
        }
        let mut finite: Vec<(f64, f64)> = Vec::new();
        for s in &sites {
            if let Site::Finite(z) = s {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(GeomError::InvalidConfig("non-finite coordinate".into()));
                }
                finite.push((z.re, z.im));
            }
        }
        finite.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if finite.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeomError::Coincident);
        }
        Ok(PointConfiguration { sites, gauge })
    }

    /// Canonical gauge `0, 1, ∞` (ids 0, 1, 2) followed by the free points.
    pub fn with_free(free: &[Point]) -> Result<Self> {
        let mut sites = vec![Site::Finite(Point::new(0.0, 0.0)), Site::Finite(Point::new(1.0, 0.0)), Site::Infinite];
        sites.extend(free.iter().map(|&z| Site::Finite(z)));
        Self::new(sites, [0, 1, 2])
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, v: VertexId) -> Site {
        self.sites[v]
    }

    pub fn point(&self, v: VertexId) -> Option<Point> {
        self.sites[v].finite()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn gauge(&self) -> [VertexId; 3] {
        self.gauge
    }

    pub fn infinite_vertex(&self) -> Option<VertexId> {
        self.sites.iter().position(|s| s.is_infinite())
    }

    /// Non-gauge vertex ids in increasing order.
    pub fn free_ids(&self) -> Vec<VertexId> {
        (0..self.sites.len()).filter(|v| !self.gauge.contains(v)).collect()
    }

    pub fn free_points(&self) -> Vec<Point> {
        self.free_ids().into_iter().filter_map(|v| self.point(v)).collect()
    }

    /// Ids of all finite vertices in increasing order.
    pub fn finite_ids(&self) -> Vec<VertexId> {
        (0..self.sites.len()).filter(|&v| !self.sites[v].is_infinite()).collect()
    }

    /// Same labels and gauge with new finite coordinates for some vertices.
    /// Distinctness is not rechecked; intended for small perturbations.
    pub fn perturbed(&self, moves: &[(VertexId, Point)]) -> Self {
        let mut sites = self.sites.clone();
        for &(v, dz) in moves {
            if let Site::Finite(z) = sites[v] {
                sites[v] = Site::Finite(z + dz);
            }
        }
        PointConfiguration { sites, gauge: self.gauge }
    }

    /// Appends a free vertex and returns its id.
    pub fn push_free(&self, z: Point) -> Result<(Self, VertexId)> {
        let mut sites = self.sites.clone();
        sites.push(Site::Finite(z));
        let c = Self::new(sites, self.gauge)?;
        let id = c.len() - 1;
        Ok((c, id))
    }
}

/// Δ₃ of three vertices; with one infinite vertex the reduced form
/// `z_p − z_q` (finite vertices in the given order) is returned.
pub fn delta3(i: VertexId, j: VertexId, k: VertexId, config: &PointConfiguration) -> Result<Point> {
    for &v in &[i, j, k] {
        if v >= config.len() {
            return Err(GeomError::UnknownVertex(v));
        }
    }
    if i == j || i == k {
        return Err(GeomError::RepeatedId(i));
    }
    if j == k {
        return Err(GeomError::RepeatedId(j));
    }
    let s = [config.site(i), config.site(j), config.site(k)];
    let finite: Vec<Point> = s.iter().filter_map(|x| x.finite()).collect();
    match finite.len() {
        3 => Ok((finite[0] - finite[1]) * (finite[0] - finite[2]) * (finite[1] - finite[2])),
        2 => Ok(finite[0] - finite[1]),
        _ => Err(GeomError::InvalidConfig("more than one infinite vertex".into())),
    }
}

/// A Möbius map `z ↦ (a z + b)/(c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
}

impl Mobius {
    pub fn new(a: Point, b: Point, c: Point, d: Point) -> Result<Self> {
        if (a * d - b * c).norm() == 0.0 {
            return Err(GeomError::SingularMobius);
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Point::new(1.0, 0.0);
        let zero = Point::new(0.0, 0.0);
        Mobius { a: one, b: zero, c: zero, d: one }
    }

    pub fn apply(&self, s: Site) -> Site {
        match s {
            Site::Infinite => {
                if self.c.norm() == 0.0 {
                    Site::Infinite
                } else {
                    Site::Finite(self.a / self.c)
                }
            }
            Site::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    Site::Infinite
                } else {
                    Site::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }
}

/// Maps every site of the configuration; labels and gauge ids are kept.
pub fn mobius_apply(m: &Mobius, config: &PointConfiguration) -> Result<PointConfiguration> {
    let sites = config.sites().iter().map(|&s| m.apply(s)).collect();
    PointConfiguration::new(sites, config.gauge())
}

// JSON form: {"gauge": ["0","1","inf"], "free": [[x, y], ...]}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SiteRepr {
    Text(String),
    Pair([f64; 2]),
}

impl SiteRepr {
    fn parse(&self) -> Result<Site> {
        match self {
            SiteRepr::Pair([x, y]) => Ok(Site::Finite(Point::new(*x, *y))),
            SiteRepr::Text(s) if s.trim() == "inf" => Ok(Site::Infinite),
            SiteRepr::Text(s) => s
                .trim()
                .parse::<f64>()
                .map(|x| Site::Finite(Point::new(x, 0.0)))
                .or_else(|_| s.trim().parse::<Point>().map(Site::Finite))
                .map_err(|_| GeomError::InvalidConfig(format!("cannot parse site {s:?}"))),
        }
    }

    fn from_site(s: Site) -> Self {
        match s {
            Site::Infinite => SiteRepr::Text("inf".into()),
            Site::Finite(z) if z.im == 0.0 => SiteRepr::Text(format!("{}", z.re)),
            Site::Finite(z) => SiteRepr::Pair([z.re, z.im]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConfigRepr {
    gauge: [SiteRepr; 3],
    free: Vec<SiteRepr>,
}

impl Serialize for PointConfiguration {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let gauge = self.gauge.map(|g| SiteRepr::from_site(self.sites[g]));
        let free = self
            .free_ids()
            .into_iter()
            .map(|v| match self.sites[v] {
                Site::Finite(z) => SiteRepr::Pair([z.re, z.im]),
                Site::Infinite => SiteRepr::Text("inf".into()),
            })
            .collect();
        ConfigRepr { gauge, free }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PointConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = ConfigRepr::deserialize(de)?;
        let mut sites = Vec::with_capacity(3 + repr.free.len());
        for s in repr.gauge.iter().chain(repr.free.iter()) {
            sites.push(s.parse().map_err(serde::de::Error::custom)?);
        }
        PointConfiguration::new(sites, [0, 1, 2]).map_err(serde::de::Error::custom)
    }
}
