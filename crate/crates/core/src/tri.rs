//! Triangulations of the sphere over a point configuration.
//!
//! Half-edge storage: face `f` owns half-edges `3f, 3f+1, 3f+2`; half-edge
//! `3f+k` runs from `faces[f][k]` to `faces[f][(k+1)%3]`. Faces containing the
//! infinite vertex are kept explicitly, so every half-edge has a twin.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, GeomError, Point, PointConfiguration, Sign, Site, VertexId};

pub type FaceId = usize;
pub type HalfEdge = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all finite points are collinear")]
    Collinear,
    #[error("configurations without an infinite vertex are not supported")]
    NoInfiniteVertex,
    #[error("point coincides with vertex {0}")]
    OnVertex(VertexId),
    #[error("no edge between {0} and {1}")]
    NoSuchEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) is not interior to the bounded faces")]
    NotInterior(VertexId, VertexId),
    #[error("quadrilateral around ({0}, {1}) is not strictly convex")]
    NotConvex(VertexId, VertexId),
    #[error("point is not strictly inside face {0}")]
    NotInFace(FaceId),
    #[error("face {0} is unbounded")]
    UnboundedFace(FaceId),
    #[error("{0} vertices exceed the enumeration cap {1}")]
    CapExceeded(usize, usize),
}

pub type Result<T> = std::result::Result<T, TriError>;

/// One edge flip: `old` diagonal replaced by `new`, both faces reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub old: (VertexId, VertexId),
    pub new: (VertexId, VertexId),
    pub faces: (FaceId, FaceId),
}

/// Where a point falls in a triangulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Face(FaceId),
    Edge(HalfEdge),
    Vertex(VertexId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    config: PointConfiguration,
    faces: Vec<[VertexId; 3]>,
    twin: Vec<HalfEdge>,
}

#[inline]
pub fn face_of(h: HalfEdge) -> FaceId {
    h / 3
}

#[inline]
pub fn next(h: HalfEdge) -> HalfEdge {
    3 * (h / 3) + (h % 3 + 1) % 3
}

#[inline]
pub fn prev(h: HalfEdge) -> HalfEdge {
    3 * (h / 3) + (h % 3 + 2) % 3
}

impl Triangulation {
    /// Builds a triangulation from ccw face triples, computing twins.
    pub fn from_faces(config: PointConfiguration, faces: Vec<[VertexId; 3]>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (f, face) in faces.iter().enumerate() {
            for k in 0..3 {
                if face[k] >= config.len() {
                    return Err(GeomError::UnknownVertex(face[k]).into());
                }
                if map.insert((face[k], face[(k + 1) % 3]), 3 * f + k).is_some() {
                    return Err(GeomError::InvalidConfig("repeated directed edge".into()).into());
                }
            }
        }
        let mut twin = vec![0; 3 * faces.len()];
        for (&(a, b), &h) in &map {
            twin[h] = *map
                .get(&(b, a))
                .ok_or_else(|| GeomError::InvalidConfig(format!("edge ({a}, {b}) has no twin")))?;
        }
        Ok(Triangulation { config, faces, twin })
    }

    pub fn config(&self) -> &PointConfiguration {
        &self.config
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> [VertexId; 3] {
        self.faces[f]
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.config.len()
    }

    pub fn site(&self, v: VertexId) -> Site {
        self.config.site(v)
    }

    pub fn face_sites(&self, f: FaceId) -> [Site; 3] {
        self.faces[f].map(|v| self.config.site(v))
    }

    pub fn origin(&self, h: HalfEdge) -> VertexId {
        self.faces[h / 3][h % 3]
    }

    pub fn dest(&self, h: HalfEdge) -> VertexId {
        self.origin(next(h))
    }

    /// Vertex of the face of `h` opposite to `h`.
    pub fn apex(&self, h: HalfEdge) -> VertexId {
        self.origin(prev(h))
    }

    pub fn twin(&self, h: HalfEdge) -> HalfEdge {
        self.twin[h]
    }

    pub fn is_bounded(&self, f: FaceId) -> bool {
        self.faces[f].iter().all(|&v| !self.config.site(v).is_infinite())
    }

    pub fn bounded_faces(&self) -> Vec<FaceId> {
        (0..self.faces.len()).filter(|&f| self.is_bounded(f)).collect()
    }

    /// Half-edge from `u` to `v`, if the edge exists.
    pub fn half_edge(&self, u: VertexId, v: VertexId) -> Option<HalfEdge> {
        (0..3 * self.faces.len()).find(|&h| self.origin(h) == u && self.dest(h) == v)
    }

    /// One half-edge per undirected edge (the one with the smaller id).
    pub fn edges(&self) -> Vec<HalfEdge> {
        (0..3 * self.faces.len()).filter(|&h| h < self.twin[h]).collect()
    }

    /// Edge shared by two bounded faces.
    pub fn is_interior(&self, h: HalfEdge) -> bool {
        self.is_bounded(face_of(h)) && self.is_bounded(face_of(self.twin[h]))
    }

    /// Half-edges leaving `v`, in ccw order around `v`.
    pub fn outgoing(&self, v: VertexId) -> Vec<HalfEdge> {
        let Some(start) = (0..3 * self.faces.len()).find(|&h| self.origin(h) == v) else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut h = self.twin[prev(start)];
        while h != start {
            out.push(h);
            h = self.twin[prev(h)];
        }
        out
    }

    /// Faces around `v`, in ccw order.
    pub fn faces_around(&self, v: VertexId) -> Vec<FaceId> {
        self.outgoing(v).into_iter().map(face_of).collect()
    }

    /// All incident faces bounded.
    pub fn is_interior_vertex(&self, v: VertexId) -> bool {
        !self.config.site(v).is_infinite() && self.faces_around(v).iter().all(|&f| self.is_bounded(f))
    }

    /// Canonical face set: each face rotated to start at its smallest id, sorted.
    pub fn canonical_key(&self) -> Vec<[VertexId; 3]> {
        let mut key: Vec<[VertexId; 3]> = self.faces.iter().map(|&f| rotate_min(f)).collect();
        key.sort_unstable();
        key
    }

    /// Same faces (up to rotation and order).
    pub fn same_combinatorics(&self, other: &Triangulation) -> bool {
        self.canonical_key() == other.canonical_key()
    }

    /// θ of the edge carried by half-edge `h`.
    pub fn theta(&self, h: HalfEdge) -> Result<f64> {
        let t = self.twin[h];
        Ok(geom::edge_angle(
            self.site(self.origin(h)),
            self.site(self.dest(h)),
            self.site(self.apex(h)),
            self.site(self.apex(t)),
        )?)
    }

    /// Incircle sign of the apex across `h` with respect to the face of `h`.
    fn edge_violation(&self, h: HalfEdge) -> Sign {
        let far = self.site(self.apex(self.twin[h]));
        geom::incircle_sphere(self.face_sites(face_of(h)), far)
    }

    /// Edge is locally Delaunay (exact predicate).
    pub fn is_locally_delaunay(&self, h: HalfEdge) -> bool {
        self.edge_violation(h) != Sign::Positive && self.edge_violation(self.twin[h]) != Sign::Positive
    }

    pub fn is_delaunay(&self) -> bool {
        self.edges().into_iter().all(|h| self.is_locally_delaunay(h))
    }

    /// Every bounded face is ccw (exact).
    pub fn is_positively_oriented(&self) -> bool {
        self.bounded_faces().into_iter().all(|f| {
            let [a, b, c] = self.faces[f].map(|v| self.config.point(v).unwrap());
            geom::orient2d(a, b, c) == Sign::Positive
        })
    }

    /// Same combinatorics over a moved configuration with the same labels.
    pub fn with_config(&self, config: PointConfiguration) -> Triangulation {
        assert_eq!(config.len(), self.config.len());
        Triangulation { config, faces: self.faces.clone(), twin: self.twin.clone() }
    }

    // ---- mutation (internal) ----

    fn set_twins(&mut self, a: HalfEdge, b: HalfEdge) {
        self.twin[a] = b;
        self.twin[b] = a;
    }

    fn new_face(&mut self, face: [VertexId; 3]) -> FaceId {
        self.faces.push(face);
        self.twin.extend_from_slice(&[usize::MAX; 3]);
        self.faces.len() - 1
    }

    /// Rotates face `f` so that half-edge `3f + k` becomes `3f`.
    fn rotate_face(&mut self, f: FaceId, k: usize) {
        if k == 0 {
            return;
        }
        let old = self.faces[f];
        let tw = [self.twin[3 * f], self.twin[3 * f + 1], self.twin[3 * f + 2]];
        for i in 0..3 {
            self.faces[f][i] = old[(i + k) % 3];
        }
        for i in 0..3 {
            let t = tw[(i + k) % 3];
            if face_of(t) == f {
                // self-twinned pairs inside one face do not occur in valid meshes
                self.twin[3 * f + i] = 3 * f + (t % 3 + 3 - k) % 3;
            } else {
                self.set_twins(3 * f + i, t);
            }
        }
    }

    /// Splits face `f` by a new vertex `p`; returns the three slot-0 edges
    /// opposite `p`.
    fn split_face(&mut self, f: FaceId, p: VertexId) -> [HalfEdge; 3] {
        let [a, b, c] = self.faces[f];
        let (t0, t1, t2) = (self.twin[3 * f], self.twin[3 * f + 1], self.twin[3 * f + 2]);
        self.faces[f] = [a, b, p];
        let g = self.new_face([b, c, p]);
        let k = self.new_face([c, a, p]);
        self.set_twins(3 * f, t0);
        self.set_twins(3 * g, t1);
        self.set_twins(3 * k, t2);
        self.set_twins(3 * f + 1, 3 * g + 2);
        self.set_twins(3 * g + 1, 3 * k + 2);
        self.set_twins(3 * k + 1, 3 * f + 2);
        [3 * f, 3 * g, 3 * k]
    }

    /// Splits the edge of `h` by a new vertex `p` lying on it.
    fn split_edge(&mut self, h: HalfEdge, p: VertexId) -> [HalfEdge; 4] {
        let (f, g) = (face_of(h), face_of(self.twin[h]));
        let ht = self.twin[h];
        self.rotate_face(f, h % 3);
        self.rotate_face(g, ht % 3);
        // f = [a, b, c], g = [b, a, d]
        let [a, b, c] = self.faces[f];
        let d = self.faces[g][2];
        let (t_bc, t_ca) = (self.twin[3 * f + 1], self.twin[3 * f + 2]);
        let (t_ad, t_db) = (self.twin[3 * g + 1], self.twin[3 * g + 2]);
        self.faces[f] = [c, a, p];
        let f2 = self.new_face([b, c, p]);
        self.faces[g] = [d, b, p];
        let g2 = self.new_face([a, d, p]);
        self.set_twins(3 * f, t_ca);
        self.set_twins(3 * f2, t_bc);
        self.set_twins(3 * g, t_db);
        self.set_twins(3 * g2, t_ad);
        self.set_twins(3 * f + 1, 3 * g2 + 2);
        self.set_twins(3 * f + 2, 3 * f2 + 1);
        self.set_twins(3 * f2 + 2, 3 * g + 1);
        self.set_twins(3 * g + 2, 3 * g2 + 1);
        [3 * f, 3 * f2, 3 * g, 3 * g2]
    }

    /// Flips the diagonal carried by `h` without any checks. With `h = x → y`
    /// in face `(x, y, p)` and twin in `(y, x, q)`, the faces become
    /// `(p, x, q)` and `(q, y, p)`.
    fn flip_unchecked(&mut self, h: HalfEdge) -> FlipRecord {
        let (f, g) = (face_of(h), face_of(self.twin[h]));
        let ht = self.twin[h];
        self.rotate_face(f, h % 3);
        self.rotate_face(g, ht % 3);
        let [x, y, p] = self.faces[f];
        let q = self.faces[g][2];
        let (t_yp, t_px) = (self.twin[3 * f + 1], self.twin[3 * f + 2]);
        let (t_xq, t_qy) = (self.twin[3 * g + 1], self.twin[3 * g + 2]);
        self.faces[f] = [p, x, q];
        self.faces[g] = [q, y, p];
        self.set_twins(3 * f, t_px);
        self.set_twins(3 * f + 1, t_xq);
        self.set_twins(3 * g, t_qy);
        self.set_twins(3 * g + 1, t_yp);
        self.set_twins(3 * f + 2, 3 * g + 2);
        FlipRecord { old: (x, y), new: (p, q), faces: (f, g) }
    }

    /// Whether the edge of `h` should be flipped during Delaunay restoration.
    /// Exact cocyclic ties go to the lexicographically smaller diagonal.
    fn wants_flip(&self, h: HalfEdge) -> bool {
        let s = self.edge_violation(h);
        let s2 = self.edge_violation(self.twin[h]);
        if s == Sign::Positive || s2 == Sign::Positive {
            return true;
        }
        if s == Sign::Zero && self.is_interior(h) {
            let old = sorted(self.origin(h), self.dest(h));
            let new = sorted(self.apex(h), self.apex(self.twin[h]));
            return new < old;
        }
        false
    }

    fn legalize(&mut self, stack: &mut Vec<HalfEdge>, mut log: Option<&mut Vec<FlipRecord>>) {
        while let Some(h) = stack.pop() {
            if !self.wants_flip(h) {
                continue;
            }
            let rec = self.flip_unchecked(h);
            let (f, g) = rec.faces;
            // outer edges of the new faces: (p,x), (x,q) in f and (q,y), (y,p) in g
            stack.extend_from_slice(&[3 * f, 3 * f + 1, 3 * g, 3 * g + 1]);
            if let Some(l) = log.as_deref_mut() {
                l.push(rec);
            }
        }
    }

    /// Locates `z` by a visibility walk from `hint`, falling back to a scan.
    pub fn locate_from(&self, z: Point, hint: FaceId) -> Result<Location> {
        let n = self.faces.len();
        let mut f = if hint < n { hint } else { 0 };
        if !self.is_bounded(f) {
            if let Some(b) = (0..3).map(|k| face_of(self.twin[3 * f + k])).find(|&g| self.is_bounded(g)) {
                f = b;
            }
        }
        if self.is_bounded(f) {
            let mut steps = 0;
            'walk: while steps < 3 * n + 10 {
                steps += 1;
                let [a, b, c] = self.faces[f].map(|v| self.config.point(v).unwrap());
                let pts = [a, b, c];
                for k in 0..3 {
                    let k = (k + steps) % 3;
                    if geom::orient2d(pts[k], pts[(k + 1) % 3], z) == Sign::Negative {
                        let g = face_of(self.twin[3 * f + k]);
                        if !self.is_bounded(g) {
                            return Ok(self.classify_outside(z));
                        }
                        f = g;
                        continue 'walk;
                    }
                }
                return Ok(self.classify_in_face(f, z));
            }
        }
        self.locate_scan(z)
    }

    fn classify_in_face(&self, f: FaceId, z: Point) -> Location {
        let ids = self.faces[f];
        let pts = ids.map(|v| self.config.point(v).unwrap());
        let zeros: Vec<usize> = (0..3).filter(|&k| geom::orient2d(pts[k], pts[(k + 1) % 3], z) == Sign::Zero).collect();
        match zeros.len() {
            0 => Location::Face(f),
            1 => Location::Edge(3 * f + zeros[0]),
            _ => {
                let v = (0..3).find(|&k| pts[k] == z).map(|k| ids[k]).unwrap_or(ids[0]);
                Location::Vertex(v)
            }
        }
    }

    /// Outside the hull: the smallest-id unbounded face strictly facing `z`.
    fn classify_outside(&self, z: Point) -> Location {
        for f in 0..self.faces.len() {
            if self.is_bounded(f) {
                continue;
            }
            let face = self.face_sites(f);
            let k = face.iter().position(|s| s.is_infinite()).unwrap();
            let (Some(u), Some(v)) = (face[(k + 1) % 3].finite(), face[(k + 2) % 3].finite()) else {
                continue;
            };
            if geom::orient2d(u, v, z) == Sign::Positive {
                return Location::Face(f);
            }
        }
        // degenerate hulls (all points collinear) reach here only via the scan
        Location::Face(self.faces.iter().position(|_| true).unwrap_or(0))
    }

    fn locate_scan(&self, z: Point) -> Result<Location> {
        for v in self.config.finite_ids() {
            if self.config.point(v) == Some(z) {
                return Ok(Location::Vertex(v));
            }
        }
        for f in self.bounded_faces() {
            let pts = self.faces[f].map(|v| self.config.point(v).unwrap());
            if (0..3).all(|k| geom::orient2d(pts[k], pts[(k + 1) % 3], z) != Sign::Negative) {
                return Ok(self.classify_in_face(f, z));
            }
        }
        Ok(self.classify_outside(z))
    }

    fn insert(&mut self, v: VertexId, hint: FaceId) -> Result<FaceId> {
        let z = self.config.point(v).unwrap();
        let stack = match self.locate_from(z, hint)? {
            Location::Vertex(w) => return Err(TriError::OnVertex(w)),
            Location::Face(f) => self.split_face(f, v).to_vec(),
            Location::Edge(h) => self.split_edge(h, v).to_vec(),
        };
        let mut stack = stack;
        let start = face_of(stack[0]);
        self.legalize(&mut stack, None);
        Ok(start)
    }
}

fn sorted(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn rotate_min(f: [VertexId; 3]) -> [VertexId; 3] {
    let k = (0..3).min_by_key(|&k| f[k]).unwrap();
    [f[k], f[(k + 1) % 3], f[(k + 2) % 3]]
}

/// Delaunay triangulation of a configuration with one infinite vertex.
///
/// Cocyclic ties are broken toward the lexicographically smaller diagonal,
/// independently of insertion order.
pub fn delaunay(config: &PointConfiguration) -> Result<Triangulation> {
    if config.len() < 3 {
        return Err(TriError::TooFewPoints(config.len()));
    }
    let inf = config.infinite_vertex().ok_or(TriError::NoInfiniteVertex)?;
    let finite = config.finite_ids();
    let (a, b) = (finite[0], finite[1]);
    let (za, zb) = (config.point(a).unwrap(), config.point(b).unwrap());
    if finite.len() == 2 {
        return Triangulation::from_faces(config.clone(), vec![[a, b, inf], [b, a, inf]]);
    }
    let third = finite[2..]
        .iter()
        .copied()
        .find(|&c| geom::orient2d(za, zb, config.point(c).unwrap()) != Sign::Zero)
        .ok_or(TriError::Collinear)?;
    let zc = config.point(third).unwrap();
    let (p, q) = if geom::orient2d(za, zb, zc) == Sign::Positive { (a, b) } else { (b, a) };
    let mut t = Triangulation::from_faces(config.clone(), vec![[p, q, third], [q, p, inf], [third, q, inf], [p, third, inf]])?;
    let mut hint = 0;
    for &v in &finite[2..] {
        if v != third {
            hint = t.insert(v, hint)?;
        }
    }
    // enforce the deterministic tie-break on cocyclic quadruples globally
    let mut stack = t.edges();
    t.legalize(&mut stack, None);
    Ok(t)
}

/// Flips the interior edge `(u, v)`; the quadrilateral must be strictly convex.
pub fn flip(t: &Triangulation, u: VertexId, v: VertexId) -> Result<Triangulation> {
    let h = t.half_edge(u, v).ok_or(TriError::NoSuchEdge(u, v))?;
    if !t.is_interior(h) {
        return Err(TriError::NotInterior(u, v));
    }
    let p = t.config.point(t.apex(h)).unwrap();
    let q = t.config.point(t.apex(t.twin[h])).unwrap();
    let (x, y) = (t.config.point(u).unwrap(), t.config.point(v).unwrap());
    if geom::orient2d(p, x, q) != Sign::Positive || geom::orient2d(q, y, p) != Sign::Positive {
        return Err(TriError::NotConvex(u, v));
    }
    let mut out = t.clone();
    out.flip_unchecked(h);
    Ok(out)
}

/// Lawson flips until every edge is locally Delaunay.
pub fn lawson_restore(t: &Triangulation) -> (Triangulation, Vec<FlipRecord>) {
    let mut out = t.clone();
    let mut log = Vec::new();
    let mut stack = out.edges();
    stack.reverse();
    out.legalize(&mut stack, Some(&mut log));
    (out, log)
}

/// Connects `z` to the three vertices of the bounded face `f`. The new vertex
/// is free and gets the next id.
pub fn insert_in_face(t: &Triangulation, f: FaceId, z: Point) -> Result<Triangulation> {
    if f >= t.num_faces() {
        return Err(TriError::NotInFace(f));
    }
    if !t.is_bounded(f) {
        return Err(TriError::UnboundedFace(f));
    }
    let pts = t.faces[f].map(|v| t.config.point(v).unwrap());
    if (0..3).any(|k| geom::orient2d(pts[k], pts[(k + 1) % 3], z) != Sign::Positive) {
        return Err(TriError::NotInFace(f));
    }
    let (config, v) = t.config.push_free(z)?;
    let mut out = t.with_config_grown(config);
    out.split_face(f, v);
    Ok(out)
}

impl Triangulation {
    fn with_config_grown(&self, config: PointConfiguration) -> Triangulation {
        Triangulation { config, faces: self.faces.clone(), twin: self.twin.clone() }
    }
}

/// Face containing `z`; ties on an edge go to the smaller face id.
pub fn locate(t: &Triangulation, z: Point) -> Result<FaceId> {
    match t.locate_from(z, 0)? {
        Location::Vertex(v) => Err(TriError::OnVertex(v)),
        Location::Face(f) => Ok(f),
        Location::Edge(h) => Ok(face_of(h).min(face_of(t.twin[h]))),
    }
}

pub const DEFAULT_ENUMERATION_CAP: usize = 9;

/// Interior-flip orbit of the Delaunay triangulation (hull structure fixed).
pub fn enumerate_triangulations(config: &PointConfiguration, cap: usize) -> Result<Vec<Triangulation>> {
    if config.len() > cap {
        return Err(TriError::CapExceeded(config.len(), cap));
    }
    let start = delaunay(config)?;
    let mut seen = HashSet::new();
    seen.insert(start.canonical_key());
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(t) = queue.pop_front() {
        for h in t.edges() {
            if !t.is_interior(h) {
                continue;
            }
            if let Ok(n) = flip(&t, t.origin(h), t.dest(h)) {
                if seen.insert(n.canonical_key()) {
                    queue.push_back(n);
                }
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// θ for one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeAngle {
    pub u: VertexId,
    pub v: VertexId,
    pub theta: f64,
}

/// θ(e) for every edge of a triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnglePattern {
    pub edges: Vec<EdgeAngle>,
}

impl AnglePattern {
    pub fn get(&self, u: VertexId, v: VertexId) -> Option<f64> {
        self.edges.iter().find(|e| (e.u, e.v) == sorted(u, v)).map(|e| e.theta)
    }

    /// Σ θ(e) over edges incident to `v`.
    pub fn vertex_sum(&self, v: VertexId) -> f64 {
        self.edges.iter().filter(|e| e.u == v || e.v == v).map(|e| e.theta).sum()
    }
}

pub fn angle_pattern(t: &Triangulation) -> Result<AnglePattern> {
    let mut edges = Vec::new();
    for h in t.edges() {
        let (u, v) = sorted(t.origin(h), t.dest(h));
        edges.push(EdgeAngle { u, v, theta: t.theta(h)? });
    }
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(AnglePattern { edges })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleViolation {
    pub faces: Vec<FaceId>,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourReport {
    pub cycles_checked: usize,
    pub min_sum: f64,
    pub violations: Vec<CycleViolation>,
}

/// Sums θ over the edges crossed by every simple dual cycle of length
/// `2..=max_cycle_len` and lists the cycles whose sum is below 2π − 1e-9.
pub fn check_contour_condition(t: &Triangulation, pattern: &AnglePattern, max_cycle_len: usize) -> ContourReport {
    let theta: Vec<f64> = (0..3 * t.num_faces())
        .map(|h| pattern.get(t.origin(h), t.dest(h)).unwrap_or(f64::NAN))
        .collect();
    let mut seen: HashSet<Vec<HalfEdge>> = HashSet::new();
    let mut report = ContourReport { cycles_checked: 0, min_sum: f64::INFINITY, violations: Vec::new() };
    for start in 0..t.num_faces() {
        let mut path_faces = vec![start];
        let mut path_edges: Vec<HalfEdge> = Vec::new();
        dfs_cycles(t, start, &theta, max_cycle_len, &mut path_faces, &mut path_edges, &mut seen, &mut report);
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn dfs_cycles(
    t: &Triangulation,
    start: FaceId,
    theta: &[f64],
    max_len: usize,
    faces: &mut Vec<FaceId>,
    edges: &mut Vec<HalfEdge>,
    seen: &mut HashSet<Vec<HalfEdge>>,
    report: &mut ContourReport,
) {
    let cur = *faces.last().unwrap();
    for k in 0..3 {
        let h = 3 * cur + k;
        let nb = face_of(t.twin(h));
        let key_edge = h.min(t.twin(h));
        if edges.contains(&key_edge) {
            continue;
        }
        if nb == start && !edges.is_empty() {
            let mut key = edges.clone();
            key.push(key_edge);
            key.sort_unstable();
            if seen.insert(key.clone()) {
                let sum: f64 = key.iter().map(|&e| theta[e]).sum();
                report.cycles_checked += 1;
                report.min_sum = report.min_sum.min(sum);
                if sum < 2.0 * PI - 1e-9 {
                    report.violations.push(CycleViolation { faces: faces.clone(), sum });
                }
            }
            continue;
        }
        // canonical start: the smallest face id on the cycle
        if nb <= start || faces.contains(&nb) || faces.len() >= max_len {
            continue;
        }
        faces.push(nb);
        edges.push(key_edge);
        dfs_cycles(t, start, theta, max_len, faces, edges, seen, report);
        faces.pop();
        edges.pop();
    }
}

// JSON form of a triangulation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangulationDoc {
    pub config: PointConfiguration,
    pub vertices: Vec<serde_json::Value>,
    pub faces: Vec<[serde_json::Value; 3]>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: serde_json::Value,
    pub v: serde_json::Value,
    pub theta: f64,
}

impl TriangulationDoc {
    pub fn from_triangulation(t: &Triangulation) -> Result<Self> {
        let label = |v: VertexId| -> serde_json::Value {
            if t.site(v).is_infinite() {
                serde_json::Value::from("inf")
            } else {
                serde_json::Value::from(v)
            }
        };
        let vertices = (0..t.num_vertices())
            .map(|v| match t.site(v) {
                Site::Infinite => serde_json::json!({"id": v, "point": "inf"}),
                Site::Finite(z) => serde_json::json!({"id": v, "point": [z.re, z.im]}),
            })
            .collect();
        let faces = t.faces().iter().map(|f| f.map(label)).collect();
        let edges = angle_pattern(t)?
            .edges
            .into_iter()
            .map(|e| EdgeDoc { u: label(e.u), v: label(e.v), theta: e.theta })
            .collect();
        Ok(TriangulationDoc { config: t.config().clone(), vertices, faces, edges })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn square() -> PointConfiguration {
        // 0, 1, ∞ gauge plus 1+i and i
        PointConfiguration::with_free(&[p(1., 1.), p(0., 1.)]).unwrap()
    }

    fn check_valid(t: &Triangulation) {
        for h in 0..3 * t.num_faces() {
            assert_eq!(t.twin(t.twin(h)), h);
            assert_eq!(t.origin(t.twin(h)), t.dest(h));
        }
        assert_eq!(t.num_faces(), 2 * (t.num_vertices() - 2));
        assert!(t.is_positively_oriented());
    }

    #[test]
    fn minimal_sphere() {
        let c = PointConfiguration::with_free(&[]).unwrap();
        let t = delaunay(&c).unwrap();
        check_valid(&t);
        assert_eq!(t.num_faces(), 2);
        assert!(t.bounded_faces().is_empty());
    }

    #[test]
    fn one_free_point() {
        let c = PointConfiguration::with_free(&[p(0.3, 0.4)]).unwrap();
        let t = delaunay(&c).unwrap();
        check_valid(&t);
        assert_eq!(t.bounded_faces().len(), 1);
        assert_eq!(t.num_faces(), 4);
    }

    #[test]
    fn square_tie_break_and_flip() {
        let t = delaunay(&square()).unwrap();
        check_valid(&t);
        // vertices 0:0, 1:1, 3:1+i, 4:i; lexicographically smaller diagonal (0,3)
        assert!(t.half_edge(0, 3).is_some());
        let t2 = flip(&t, 0, 3).unwrap();
        check_valid(&t2);
        assert!(t2.half_edge(1, 4).is_some());
        let t3 = flip(&t2, 1, 4).unwrap();
        assert!(t3.same_combinatorics(&t));
        assert!(matches!(flip(&t, 0, 1), Err(TriError::NotInterior(0, 1))));
        assert!(lawson_restore(&t).1.is_empty());
        let (back, log) = lawson_restore(&t2);
        assert_eq!(log.len(), 1);
        assert!(back.same_combinatorics(&t));
    }

    #[test]
    fn perturbed_square_one_flip() {
        let c = PointConfiguration::with_free(&[p(1.1, 1.1), p(0., 1.)]).unwrap();
        let t = delaunay(&c).unwrap();
        assert!(t.half_edge(1, 4).is_some());
        let wrong = flip(&t, 1, 4).unwrap();
        let (fixed, log) = lawson_restore(&wrong);
        assert_eq!(log.len(), 1);
        assert!(fixed.same_combinatorics(&t));
    }

    #[test]
    fn locate_examples() {
        let t = delaunay(&square()).unwrap();
        let f = t.bounded_faces()[0];
        let [a, b, c] = t.face(f).map(|v| t.config().point(v).unwrap());
        assert_eq!(locate(&t, (a + b + c) / 3.0).unwrap(), f);
        assert!(!t.is_bounded(locate(&t, p(100., -50.)).unwrap()));
        let h = t.half_edge(0, 3).unwrap();
        let expect = face_of(h).min(face_of(t.twin(h)));
        assert_eq!(locate(&t, p(0.5, 0.5)).unwrap(), expect);
        assert!(matches!(locate(&t, p(1., 1.)), Err(TriError::OnVertex(3))));
    }

    #[test]
    fn insert_examples() {
        let e = Point::from_polar(1.0, PI / 3.0);
        let c = PointConfiguration::with_free(&[e]).unwrap();
        let t = delaunay(&c).unwrap();
        let f = t.bounded_faces()[0];
        let t2 = insert_in_face(&t, f, (p(1., 0.) + e) / 3.0).unwrap();
        check_valid(&t2);
        assert_eq!(t2.bounded_faces().len(), 3);
        assert!(insert_in_face(&t, f, p(5., 5.)).is_err());
        assert!(insert_in_face(&t, f, p(0.5, 0.)).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_triangulations(&square(), 9).unwrap().len(), 2);
        let c = PointConfiguration::with_free(&[p(0.3, 0.4)]).unwrap();
        assert_eq!(enumerate_triangulations(&c, 9).unwrap().len(), 1);
        // convex pentagon 0, 1, and three more
        let c = PointConfiguration::with_free(&[p(1.5, 0.8), p(0.6, 1.6), p(-0.4, 0.9)]).unwrap();
        assert_eq!(enumerate_triangulations(&c, 9).unwrap().len(), 5);
        let big = PointConfiguration::with_free(&(0..8).map(|k| p(k as f64, (k * k) as f64 + 0.5)).collect::<Vec<_>>()).unwrap();
        assert!(matches!(enumerate_triangulations(&big, 9), Err(TriError::CapExceeded(11, 9))));
    }

    #[test]
    fn minimal_pattern_sums() {
        let c = PointConfiguration::with_free(&[]).unwrap();
        let t = delaunay(&c).unwrap();
        let pat = angle_pattern(&t).unwrap();
        assert_eq!(pat.edges.len(), 3);
        for e in &pat.edges {
            assert!((e.theta - PI).abs() < 1e-15);
        }
        for v in 0..3 {
            assert!((pat.vertex_sum(v) - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_hull_points() {
        let c = PointConfiguration::with_free(&[p(2., 0.), p(0.5, 0.), p(1., 1.), p(3., 0.)]).unwrap();
        let t = delaunay(&c).unwrap();
        check_valid(&t);
        assert!(t.is_delaunay());
    }

    #[test]
    fn all_collinear_is_error() {
        let c = PointConfiguration::with_free(&[p(2., 0.)]).unwrap();
        assert_eq!(delaunay(&c), Err(TriError::Collinear));
    }
}
