//! The measure: Lobachevsky function, ideal tetrahedron volumes, the
//! prepotential A_T, the Kähler matrix D and its minors.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::geom::{self, GeomError, Point, PointConfiguration, Sign, Site, VertexId};
use crate::tri::{self, TriError, Triangulation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KahlerError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error("face {0:?} is degenerate or negatively oriented")]
    DegenerateFace([VertexId; 3]),
    #[error("finite-difference step {0} changes the combinatorics; use a smaller step")]
    StepTooLarge(f64),
    #[error("edge ({0}, {1}) is not interior")]
    HullEdge(VertexId, VertexId),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, KahlerError>;

const SERIES_TERMS: usize = 40;

/// ζ(2n)/(n (2n+1) (2π)^{2n}) for n = 1.., the Taylor coefficients of Cl₂.
fn clausen_coefficients() -> &'static [f64; SERIES_TERMS] {
    static COEF: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut c = [0.0; SERIES_TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let n = (i + 1) as i32;
            let zeta = match n {
                1 => PI.powi(2) / 6.0,
                2 => PI.powi(4) / 90.0,
                3 => PI.powi(6) / 945.0,
                _ => (1..=30).rev().map(|k| (k as f64).powi(-2 * n)).sum::<f64>(),
            };
            *slot = zeta / (n as f64 * (2 * n + 1) as f64 * (2.0 * PI).powi(2 * n));
        }
        c
    })
}

/// Clausen function Cl₂(θ) for θ in [−π, π].
fn clausen_reduced(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let coef = clausen_coefficients();
    let t2 = theta * theta;
    let mut pow = theta * t2;
    let mut s = 0.0;
    for c in coef {
        let term = c * pow;
        s += term;
        if term.abs() < 1e-18 * s.abs().max(1e-300) {
            break;
        }
        pow *= t2;
    }
    theta - theta * theta.abs().ln() + s
}

/// Lobachevsky function Л(x) = −∫₀ˣ log|2 sin t| dt.
pub fn lobachevsky(x: f64) -> f64 {
    // π-periodic and odd; reduce to (−π/2, π/2]
    let mut r = x - PI * (x / PI).round();
    if r <= -PI / 2.0 {
        r += PI;
    }
    0.5 * clausen_reduced(2.0 * r)
}

/// Volume of the ideal tetrahedron over a triangle: Σ Л(αᵢ). Zero for an
/// infinite vertex or a degenerate (collinear) triangle.
pub fn ideal_tetra_volume(a: Site, b: Site, c: Site) -> Result<f64> {
    let (Some(a), Some(b), Some(c)) = (a.finite(), b.finite(), c.finite()) else {
        return Ok(0.0);
    };
    if a == b || b == c || a == c {
        return Err(GeomError::Coincident.into());
    }
    match geom::triangle_angles(a, b, c) {
        Ok(al) => Ok(al.iter().map(|&x| lobachevsky(x)).sum()),
        Err(GeomError::Degenerate) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

/// A_T = −Σ_f V(f) over the faces of a triangulation.
pub fn prepotential(t: &Triangulation) -> Result<f64> {
    let mut s = 0.0;
    for f in 0..t.num_faces() {
        let [a, b, c] = t.face_sites(f);
        s += ideal_tetra_volume(a, b, c)?;
    }
    Ok(-s)
}

/// Hermitian matrix D indexed by vertex labels.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerMatrix {
    pub labels: Vec<VertexId>,
    pub m: DMatrix<Complex64>,
}

impl KahlerMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.labels.iter().position(|&l| l == v)
    }

    pub fn entry(&self, u: VertexId, v: VertexId) -> Complex64 {
        match (self.index_of(u), self.index_of(v)) {
            (Some(i), Some(j)) => self.m[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Eigenvalues (real, ascending) of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                d = d.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Principal submatrix on the given labels (in that order).
    pub fn restrict(&self, keep: &[VertexId]) -> KahlerMatrix {
        let idx: Vec<usize> = keep.iter().filter_map(|&v| self.index_of(v)).collect();
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.m[(idx[r], idx[c])]);
        KahlerMatrix { labels, m }
    }
}

/// Per-face 3×3 block of D over the face's vertex slots. Slots holding the
/// infinite vertex get zero rows and columns. The formula is algebraic in the
/// three points, so it also applies to clockwise faces.
pub fn face_block(pts: [Site; 3]) -> [[Complex64; 3]; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let mut blk = [[zero; 3]; 3];
    // a[e][s]: A_{u,e} for the endpoint in slot s of edge e = (e, e+1)
    let mut a = [[zero; 3]; 3];
    for e in 0..3 {
        let (s, t) = (e, (e + 1) % 3);
        if let (Some(zs), Some(zt)) = (pts[s].finite(), pts[t].finite()) {
            a[e][s] = 1.0 / (zs - zt);
            a[e][t] = 1.0 / (zt - zs);
        }
    }
    let k = Complex64::new(0.0, -0.25); // 1/(4i)
    for e in 0..3 {
        for e2 in 0..3 {
            if e == e2 {
                continue;
            }
            // e2 following e counter-clockwise gets −1, clockwise +1
            let sign = if e2 == (e + 1) % 3 { -1.0 } else { 1.0 };
            for u in 0..3 {
                for v in 0..3 {
                    blk[u][v] += k * sign * a[e][u] * a[e2][v].conj();
                }
            }
        }
    }
    blk
}

/// Assembles D over `labels` from the given faces (fixed face order).
pub fn assemble(config: &PointConfiguration, faces: &[[VertexId; 3]], labels: &[VertexId]) -> KahlerMatrix {
    let n = labels.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let pos = |v: VertexId| labels.iter().position(|&l| l == v);
    for face in faces {
        let blk = face_block(face.map(|v| config.site(v)));
        for (su, &u) in face.iter().enumerate() {
            let Some(i) = pos(u) else { continue };
            for (sv, &v) in face.iter().enumerate() {
                let Some(j) = pos(v) else { continue };
                m[(i, j)] += blk[su][sv];
            }
        }
    }
    KahlerMatrix { labels: labels.to_vec(), m }
}

fn check_orientation(t: &Triangulation) -> Result<()> {
    for f in t.bounded_faces() {
        let [a, b, c] = t.face(f).map(|v| t.config().point(v).unwrap());
        if geom::orient2d(a, b, c) != Sign::Positive {
            return Err(KahlerError::DegenerateFace(t.face(f)));
        }
    }
    Ok(())
}

/// D = (1/4i) A E A† assembled face by face, over all finite vertices.
pub fn kahler_matrix(t: &Triangulation) -> Result<KahlerMatrix> {
    check_orientation(t)?;
    let labels = t.config().finite_ids();
    Ok(assemble(t.config(), t.faces(), &labels))
}

/// ∂_{z_u}∂_{z̄_v} A_T by central differences of the prepotential, with the
/// combinatorics held fixed. Indexed like [`kahler_matrix`].
pub fn kahler_matrix_fd(t: &Triangulation, h: f64) -> Result<KahlerMatrix> {
    check_orientation(t)?;
    let labels = t.config().finite_ids();
    let n = labels.len();
    let was_delaunay = t.is_delaunay();
    let eval = |moves: &[(usize, f64)]| -> Result<f64> {
        let mv: Vec<(VertexId, Point)> = moves
            .iter()
            .map(|&(k, d)| {
                let v = labels[k / 2];
                let dz = if k % 2 == 0 { Point::new(d, 0.0) } else { Point::new(0.0, d) };
                (v, dz)
            })
            .collect();
        let moved = t.with_config(t.config().perturbed(&mv));
        if !moved.is_positively_oriented() || (was_delaunay && !moved.is_delaunay()) {
            return Err(KahlerError::StepTooLarge(h));
        }
        prepotential(&moved)
    };
    let dim = 2 * n;
    let a0 = eval(&[])?;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let p = eval(&[(i, h)])?;
        let m = eval(&[(i, -h)])?;
        hess[(i, i)] = (p - 2.0 * a0 + m) / (h * h);
        for j in 0..i {
            let pp = eval(&[(i, h), (j, h)])?;
            let pm = eval(&[(i, h), (j, -h)])?;
            let mp = eval(&[(i, -h), (j, h)])?;
            let mm = eval(&[(i, -h), (j, -h)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let m = DMatrix::from_fn(n, n, |u, v| {
        let (xu, yu, xv, yv) = (2 * u, 2 * u + 1, 2 * v, 2 * v + 1);
        Complex64::new(
            0.25 * (hess[(xu, xv)] + hess[(yu, yv)]),
            0.25 * (hess[(xu, yv)] - hess[(yu, xv)]),
        )
    });
    Ok(KahlerMatrix { labels, m })
}

/// Determinant of the principal submatrix without the excluded vertices
/// (ids without a row, such as the infinite vertex, are ignored).
pub fn det_excluding(d: &KahlerMatrix, exclude: &[VertexId]) -> f64 {
    let keep: Vec<VertexId> = d.labels.iter().copied().filter(|v| !exclude.contains(v)).collect();
    let sub = d.restrict(&keep);
    if sub.dim() == 0 {
        return 1.0;
    }
    sub.m.lu().determinant().re
}

/// Flip-lemma prediction of d_(p,u,v)(T) − d_(p,u,v)(T′) for the interior
/// edge `(u, v)`, where `p` is the apex left of `u → v` (face f = (u, v, p))
/// and `q` the apex on the right.
pub fn flip_delta_predicted(t: &Triangulation, u: VertexId, v: VertexId) -> Result<FlipPrediction> {
    let h = t.half_edge(u, v).ok_or(TriError::NoSuchEdge(u, v))?;
    if !t.is_interior(h) {
        return Err(KahlerError::HullEdge(u, v));
    }
    let p = t.apex(h);
    let q = t.apex(t.twin(h));
    let d = kahler_matrix(t)?;
    let z = |w: VertexId| t.config().point(w).unwrap();
    let (zp, zu, zv, zq) = (z(p), z(u), z(v), z(q));
    let area = 0.5 * ((zv - zu) * (zp - zu).conj()).im.abs();
    let omega = geom::circumcenter(zu, zv, zp);
    let r2 = (zu - omega).norm_sqr();
    let power = (zq - omega).norm_sqr() - r2;
    let minor = det_excluding(&d, &[p, u, v, q]);
    let predicted = minor * area * power / ((zq - zp).norm_sqr() * (zq - zu).norm_sqr() * (zq - zv).norm_sqr());
    Ok(FlipPrediction { excluded: [p, u, v], opposite: q, predicted })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipPrediction {
    /// The face f kept in the exclusion triple `(1, 2, 4)`.
    pub excluded: [VertexId; 3],
    /// The opposite vertex `3`.
    pub opposite: VertexId,
    pub predicted: f64,
}

/// d_(ijk)/|Δ₃(i,j,k)|² for a triple containing the infinite vertex.
pub fn normalized_det(t: &Triangulation, triple: [VertexId; 3]) -> Result<f64> {
    let inf = t.config().infinite_vertex();
    if inf.is_none() || !triple.contains(&inf.unwrap()) {
        return Err(KahlerError::Unsupported("triple must contain the infinite vertex".into()));
    }
    let d = kahler_matrix(t)?;
    let delta = geom::delta3(triple[0], triple[1], triple[2], t.config())?;
    Ok(det_excluding(&d, &triple) / delta.norm_sqr())
}

/// 2^N d_(gauge) of a given triangulation.
pub fn density_on(t: &Triangulation) -> Result<f64> {
    let d = kahler_matrix(t)?;
    let n = t.config().free_ids().len() as i32;
    Ok(2f64.powi(n) * det_excluding(&d, &t.config().gauge()))
}

/// Density of dμ with respect to ∏ d²z_v on the Delaunay triangulation.
pub fn measure_density(config: &PointConfiguration) -> Result<f64> {
    density_on(&tri::delaunay(config)?)
}
