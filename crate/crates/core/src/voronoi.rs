//! Voronoï dual of a Delaunay triangulation: circumcenter nodes, dual-edge
//! angles θ_n, θ_s and lengths, shortest paths, and continuity across a flip.

use std::collections::HashMap;
use std::f64::consts::PI;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, GeomError, Point, PointConfiguration, Sign, VertexId};
use crate::tri::{self, face_of, FaceId, TriError, Triangulation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoronoiError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error("face {0:?} is degenerate")]
    DegenerateFace([VertexId; 3]),
    #[error("dual-edge angle {0} outside (−π/2, π/2)")]
    AngleOutOfRange(f64),
    #[error("path is not transversal: {0}")]
    NonTransversal(String),
}

pub type Result<T> = std::result::Result<T, VoronoiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthKind {
    Hyperbolic,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualNode {
    pub face: FaceId,
    pub vertices: [VertexId; 3],
    pub center: Point,
}

/// Dual of the interior edge `v1 → v2`; `north` is the face on its left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualEdge {
    pub v1: VertexId,
    pub v2: VertexId,
    pub north: FaceId,
    pub south: FaceId,
    pub theta_n: f64,
    pub theta_s: f64,
}

impl DualEdge {
    pub fn theta(&self) -> f64 {
        self.theta_n + self.theta_s
    }

    pub fn length(&self, kind: LengthKind) -> Result<f64> {
        match kind {
            LengthKind::Hyperbolic => dual_length_hyperbolic(self.theta_n, self.theta_s),
            LengthKind::Flat => dual_length_flat(self.theta_n, self.theta_s),
        }
    }
}

/// Bounded faces and the edges between them; edges touching an unbounded
/// face are left out (their circumcenter is at infinity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualGraph {
    pub nodes: Vec<DualNode>,
    pub edges: Vec<DualEdge>,
}

pub fn dual_graph(t: &Triangulation) -> Result<DualGraph> {
    let mut centers = HashMap::new();
    let mut nodes = Vec::new();
    for f in t.bounded_faces() {
        let ids = t.face(f);
        let [a, b, c] = ids.map(|v| t.config().point(v).unwrap());
        if geom::orient2d(a, b, c) != Sign::Positive {
            return Err(VoronoiError::DegenerateFace(ids));
        }
        let w = geom::circumcenter(a, b, c);
        centers.insert(f, w);
        nodes.push(DualNode { face: f, vertices: ids, center: w });
    }
    let mut edges = Vec::new();
    for h in t.edges() {
        if !t.is_interior(h) {
            continue;
        }
        let (v1, v2) = (t.origin(h), t.dest(h));
        let (north, south) = (face_of(h), face_of(t.twin(h)));
        let (z1, z2) = (t.config().point(v1).unwrap(), t.config().point(v2).unwrap());
        let theta_n = ((centers[&north] - z1) / (z2 - z1)).arg();
        let theta_s = ((z2 - z1) / (centers[&south] - z1)).arg();
        edges.push(DualEdge { v1, v2, north, south, theta_n, theta_s });
    }
    Ok(DualGraph { nodes, edges })
}

fn check_angle(x: f64) -> Result<()> {
    if !(x.abs() < PI / 2.0) {
        return Err(VoronoiError::AngleOutOfRange(x));
    }
    Ok(())
}

/// ½ log[(1+sin θ_n)(1+sin θ_s)/((1−sin θ_n)(1−sin θ_s))].
pub fn dual_length_hyperbolic(theta_n: f64, theta_s: f64) -> Result<f64> {
    check_angle(theta_n)?;
    check_angle(theta_s)?;
    Ok(theta_n.sin().atanh() + theta_s.sin().atanh())
}

/// 2 sin((θ_n + θ_s)/2).
pub fn dual_length_flat(theta_n: f64, theta_s: f64) -> Result<f64> {
    check_angle(theta_n)?;
    check_angle(theta_s)?;
    Ok(2.0 * ((theta_n + theta_s) / 2.0).sin())
}

impl DualGraph {
    pub fn node_index(&self, face: FaceId) -> Option<usize> {
        self.nodes.iter().position(|n| n.face == face)
    }

    /// Node whose face has the given vertices (any rotation).
    pub fn node_with_vertices(&self, vs: [VertexId; 3]) -> Option<usize> {
        let mut key = vs;
        key.sort_unstable();
        self.nodes.iter().position(|n| {
            let mut k = n.vertices;
            k.sort_unstable();
            k == key
        })
    }

    /// Shortest-path distances from node `src`; unreachable nodes get +∞.
    /// Negative lengths from rounding are clamped to 0.
    pub fn distances_from(&self, src: usize, kind: LengthKind) -> Result<Vec<f64>> {
        let index: HashMap<FaceId, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.face, i)).collect();
        let mut g = UnGraph::<(), f64>::with_capacity(self.nodes.len(), self.edges.len());
        let ids: Vec<NodeIndex> = self.nodes.iter().map(|_| g.add_node(())).collect();
        for e in &self.edges {
            g.add_edge(ids[index[&e.north]], ids[index[&e.south]], e.length(kind)?.max(0.0));
        }
        let found = dijkstra(&g, ids[src], None, |e| *e.weight());
        Ok(ids.iter().map(|n| found.get(n).copied().unwrap_or(f64::INFINITY)).collect())
    }
}

/// One-parameter family `z_mover(s) = z_mover + s · direction`, cocyclic at `s = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipPath {
    pub config: PointConfiguration,
    pub mover: VertexId,
    pub direction: Point,
}

impl FlipPath {
    pub fn at(&self, s: f64) -> PointConfiguration {
        self.config.perturbed(&[(self.mover, self.direction * s)])
    }

    /// A unit square (cocyclic) surrounded by a ring of points, one corner
    /// moving radially.
    pub fn square() -> Result<Self> {
        let c = Point::new(0.5, 4.0);
        let mut free: Vec<Point> = (0..4).map(|k| c + Point::from_polar(1.0, PI / 4.0 + k as f64 * PI / 2.0)).collect();
        free.extend((0..7).map(|k| c + Point::from_polar(2.6, 0.2 + k as f64 * 2.0 * PI / 7.0)));
        let config = PointConfiguration::with_free(&free)?;
        let mover = config.free_ids()[0];
        Ok(FlipPath { config, mover, direction: Point::from_polar(1.0, PI / 4.0) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// Diagonal before and after the crossing.
    pub before: (VertexId, VertexId),
    pub after: (VertexId, VertexId),
    pub crossing_hyperbolic: f64,
    pub crossing_flat: f64,
    pub crossing_theta: f64,
    /// (s, θ, l_hyperbolic, l_flat) of the flipping dual edge along the path.
    pub samples: Vec<(f64, f64, f64, f64)>,
    /// Largest |l/θ − 1| over samples with θ ≤ `slope_max_theta`.
    pub max_slope_error: f64,
    pub slope_max_theta: f64,
    /// Largest change of a pairwise dual distance between `s = ±eps`,
    /// over nodes present on both sides.
    pub max_distance_jump: f64,
}

fn diagonal_dual(t: &Triangulation, g: &DualGraph, (u, v): (VertexId, VertexId)) -> Option<DualEdge> {
    t.half_edge(u, v)?;
    g.edges.iter().copied().find(|e| (e.v1, e.v2) == (u, v) || (e.v1, e.v2) == (v, u))
}

fn only_new_edge(a: &Triangulation, b: &Triangulation) -> Result<(VertexId, VertexId)> {
    let key = |t: &Triangulation| -> Vec<(VertexId, VertexId)> {
        let mut es: Vec<_> = t.edges().into_iter().map(|h| {
            let (x, y) = (t.origin(h), t.dest(h));
            (x.min(y), x.max(y))
        }).collect();
        es.sort_unstable();
        es
    };
    let (ka, kb) = (key(a), key(b));
    let gone: Vec<_> = ka.iter().filter(|e| !kb.contains(e)).copied().collect();
    if gone.len() != 1 {
        return Err(VoronoiError::NonTransversal(format!("{} edges change across the path", gone.len())));
    }
    Ok(gone[0])
}

fn all_pair_distances(g: &DualGraph, keys: &[[VertexId; 3]]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for k in keys {
        let src = g.node_with_vertices(*k).unwrap();
        let d = g.distances_from(src, LengthKind::Hyperbolic)?;
        for k2 in keys {
            out.push(d[g.node_with_vertices(*k2).unwrap()]);
        }
    }
    Ok(out)
}

/// Follows `path` through its cocyclic point. `eps` is the one-sided offset
/// for the distance comparison and the smallest of the log-spaced offsets at
/// which the flipping dual edge is sampled.
pub fn flip_continuity_check(path: &FlipPath, eps: f64, slope_max_theta: f64) -> Result<ContinuityReport> {
    let tm = tri::delaunay(&path.at(-eps))?;
    let tp = tri::delaunay(&path.at(eps))?;
    let before = only_new_edge(&tm, &tp)?;
    let after = only_new_edge(&tp, &tm)?;
    let (gm, gp) = (dual_graph(&tm)?, dual_graph(&tp)?);

    let t0 = tri::delaunay(&path.at(0.0))?;
    let g0 = dual_graph(&t0)?;
    let e0 = diagonal_dual(&t0, &g0, before)
        .or_else(|| diagonal_dual(&t0, &g0, after))
        .ok_or_else(|| VoronoiError::NonTransversal("no diagonal at the crossing".into()))?;

    let mut samples = Vec::new();
    let mut max_slope_error: f64 = 0.0;
    for side in [-1.0, 1.0] {
        for k in 0..=12 {
            let s = side * eps * 10f64.powf(k as f64 / 2.0);
            let t = tri::delaunay(&path.at(s))?;
            let g = dual_graph(&t)?;
            let e = diagonal_dual(&t, &g, before)
                .or_else(|| diagonal_dual(&t, &g, after))
                .ok_or_else(|| VoronoiError::NonTransversal(format!("diagonal lost at s = {s}")))?;
            let (lh, lf) = (e.length(LengthKind::Hyperbolic)?, e.length(LengthKind::Flat)?);
            let th = e.theta();
            if th > 0.0 && th <= slope_max_theta {
                max_slope_error = max_slope_error.max((lh / th - 1.0).abs());
            }
            samples.push((s, th, lh, lf));
        }
    }

    let common: Vec<[VertexId; 3]> = gm
        .nodes
        .iter()
        .map(|n| n.vertices)
        .filter(|vs| gp.node_with_vertices(*vs).is_some())
        .collect();
    let dm = all_pair_distances(&gm, &common)?;
    let dp = all_pair_distances(&gp, &common)?;
    let max_distance_jump = dm.iter().zip(&dp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Ok(ContinuityReport {
        before,
        after,
        crossing_hyperbolic: e0.length(LengthKind::Hyperbolic)?,
        crossing_flat: e0.length(LengthKind::Flat)?,
        crossing_theta: e0.theta(),
        samples,
        max_slope_error,
        slope_max_theta,
        max_distance_jump,
    })
}
