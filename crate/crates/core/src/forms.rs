//! Differential forms on the configuration space of the free points.
//!
//! Forms are materialized in the real basis `(x₄, y₄, x₅, y₅, …)` of the free
//! vertices (ids in increasing order). A 2-form is an antisymmetric matrix `M`
//! with `Ω(t₁, t₂) = t₁ᵀ M t₂`, i.e. `Ω = Σ_{p<q} M_pq dx_p ∧ dx_q`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, GeomError, Point, PointConfiguration, Sign, VertexId};
use crate::kahler::{KahlerError, KahlerMatrix};
use crate::linalg;
use crate::tri::{self, face_of, TriError, Triangulation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormsError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error("degenerate face")]
    DegenerateFace,
    #[error("odd form dimension {0}")]
    OddDimension(usize),
    #[error("form dimension {0} does not match 2N = {1}")]
    DimensionMismatch(usize, usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("vertex {0} is on the hull or infinite")]
    HullVertex(VertexId),
    #[error("configuration is {0:e} away from cocyclic at the edge")]
    NotNearCocyclic(f64),
}

pub type Result<T> = std::result::Result<T, FormsError>;

/// Step for finite-difference gradients of θ and γ.
pub const FD_STEP: f64 = 1e-5;

/// Free vertices and their slots in the real basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBasis {
    pub ids: Vec<VertexId>,
}

impl FreeBasis {
    pub fn of(config: &PointConfiguration) -> Self {
        let ids = config.free_ids().into_iter().filter(|&v| config.point(v).is_some()).collect();
        FreeBasis { ids }
    }

    pub fn slot(&self, v: VertexId) -> Option<usize> {
        self.ids.iter().position(|&w| w == v)
    }

    /// Real dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.ids.len()
    }
}

/// Displacement `(δx, δy)` per free vertex, flattened in basis order.
pub type TangentVector = DVector<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    pub m: DMatrix<f64>,
}

impl TwoForm {
    pub fn zero(dim: usize) -> Self {
        TwoForm { m: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn eval(&self, t1: &TangentVector, t2: &TangentVector) -> f64 {
        t1.dot(&(&self.m * t2))
    }

    /// Largest |M + Mᵀ| entry.
    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.m + self.m.transpose()).amax()
    }

    pub fn add(&mut self, other: &TwoForm) {
        self.m += &other.m;
    }

    /// max |A − B| / max(|A|, |B|).
    pub fn rel_diff(&self, other: &TwoForm) -> f64 {
        let scale = self.m.amax().max(other.m.amax());
        if scale == 0.0 {
            return 0.0;
        }
        (&self.m - &other.m).amax() / scale
    }

    /// Wedge of two real 1-forms.
    pub fn wedge(a: &OneForm, b: &OneForm) -> TwoForm {
        TwoForm { m: &a.v * b.v.transpose() - &b.v * a.v.transpose() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub v: DVector<f64>,
}

impl OneForm {
    pub fn zero(dim: usize) -> Self {
        OneForm { v: DVector::zeros(dim) }
    }

    pub fn eval(&self, t: &TangentVector) -> f64 {
        self.v.dot(t)
    }
}

type Covector = DVector<Complex64>;

/// dz_v in the real basis, or zero for a fixed vertex.
fn dz(slot: Option<usize>, dim: usize) -> Covector {
    let mut c = Covector::from_element(dim, Complex64::new(0.0, 0.0));
    if let Some(s) = slot {
        c[2 * s] = Complex64::new(1.0, 0.0);
        c[2 * s + 1] = Complex64::new(0.0, 1.0);
    }
    c
}

/// d log(z_j − z_i).
fn dlog(zi: Point, zj: Point, si: Option<usize>, sj: Option<usize>, dim: usize) -> Covector {
    (dz(sj, dim) - dz(si, dim)) / (zj - zi)
}

fn wedge_c(a: &Covector, b: &Covector) -> DMatrix<Complex64> {
    a * b.transpose() - b * a.transpose()
}

fn conj(a: &Covector) -> Covector {
    a.map(|x| x.conj())
}

fn check_face(pts: [Point; 3]) -> Result<()> {
    if geom::orient2d(pts[0], pts[1], pts[2]) == Sign::Zero {
        return Err(FormsError::DegenerateFace);
    }
    Ok(())
}

/// Per-face ω from the six d log z wedges with prefactor 1/8.
/// `mask[k]` is the basis slot of vertex k, `None` for fixed vertices.
pub fn omega_face_z(pts: [Point; 3], mask: [Option<usize>; 3], dim: usize) -> Result<TwoForm> {
    check_face(pts)?;
    let l = |i: usize, j: usize| dlog(pts[i], pts[j], mask[i], mask[j], dim);
    let (l23, l31, l12) = (l(1, 2), l(2, 0), l(0, 1));
    let sum = wedge_c(&l23, &conj(&l31))
        + wedge_c(&conj(&l23), &l31)
        + wedge_c(&l31, &conj(&l12))
        + wedge_c(&conj(&l31), &l12)
        + wedge_c(&l12, &conj(&l23))
        + wedge_c(&conj(&l12), &l23);
    Ok(TwoForm { m: sum.map(|x| x.re / 8.0) })
}

/// dλ_ij with λ_ij = log|z_j − z_i|.
fn dlambda(zi: Point, zj: Point, si: Option<usize>, sj: Option<usize>, dim: usize) -> OneForm {
    OneForm { v: dlog(zi, zj, si, sj, dim).map(|x| x.re) }
}

fn cyclic_wedges(l12: &OneForm, l23: &OneForm, l31: &OneForm) -> TwoForm {
    let mut w = TwoForm::wedge(l12, l23);
    w.add(&TwoForm::wedge(l23, l31));
    w.add(&TwoForm::wedge(l31, l12));
    w
}

/// Per-face ω = ½(dλ₁₂∧dλ₂₃ + dλ₂₃∧dλ₃₁ + dλ₃₁∧dλ₁₂).
pub fn omega_face_lengths(pts: [Point; 3], mask: [Option<usize>; 3], dim: usize) -> Result<TwoForm> {
    check_face(pts)?;
    let l = |i: usize, j: usize| dlambda(pts[i], pts[j], mask[i], mask[j], dim);
    let mut w = cyclic_wedges(&l(0, 1), &l(1, 2), &l(2, 0));
    w.m *= 0.5;
    Ok(w)
}

/// dα₁ ∧ dα₂ of the interior angles at the first two vertices, by central
/// differences of step `h` over the free slots.
pub fn omega_face_angles(pts: [Point; 3], mask: [Option<usize>; 3], dim: usize, h: f64) -> Result<TwoForm> {
    check_face(pts)?;
    let mut da = [OneForm::zero(dim), OneForm::zero(dim)];
    for k in 0..3 {
        let Some(s) = mask[k] else { continue };
        for (c, dir) in [Point::new(h, 0.0), Point::new(0.0, h)].into_iter().enumerate() {
            let (mut plus, mut minus) = (pts, pts);
            plus[k] += dir;
            minus[k] -= dir;
            let ap = geom::triangle_angles(plus[0], plus[1], plus[2])?;
            let am = geom::triangle_angles(minus[0], minus[1], minus[2])?;
            for j in 0..2 {
                da[j].v[2 * s + c] += (ap[j] - am[j]) / (2.0 * h);
            }
        }
    }
    Ok(TwoForm::wedge(&da[0], &da[1]))
}

fn face_data(t: &Triangulation, basis: &FreeBasis, f: usize) -> ([Point; 3], [Option<usize>; 3]) {
    let ids = t.face(f);
    (ids.map(|v| t.config().point(v).unwrap()), ids.map(|v| basis.slot(v)))
}

/// Ω_D = Σ_f ω(f) over the bounded faces.
pub fn omega_total(t: &Triangulation) -> Result<TwoForm> {
    let basis = FreeBasis::of(t.config());
    let mut acc = TwoForm::zero(basis.dim());
    for f in t.bounded_faces() {
        let (pts, mask) = face_data(t, &basis, f);
        acc.add(&omega_face_z(pts, mask, basis.dim())?);
    }
    Ok(acc)
}

/// (1/2i) Σ D_{u v̄} dz_u ∧ dz̄_v over the free rows of D.
pub fn omega_from_kahler(d: &KahlerMatrix, basis: &FreeBasis) -> TwoForm {
    let dim = basis.dim();
    let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for &u in &basis.ids {
        for &v in &basis.ids {
            let duv = d.entry(u, v);
            let w = wedge_c(&dz(basis.slot(u), dim), &conj(&dz(basis.slot(v), dim)));
            acc += w * (duv / Complex64::new(0.0, 2.0));
        }
    }
    TwoForm { m: acc.map(|x| x.re) }
}

/// Coefficient of Ω^N/N! on dx₄∧dy₄∧…: the Pfaffian of M.
pub fn top_coefficient(omega: &TwoForm, n: usize) -> Result<f64> {
    if omega.dim() % 2 == 1 {
        return Err(FormsError::OddDimension(omega.dim()));
    }
    if omega.dim() != 2 * n {
        return Err(FormsError::DimensionMismatch(omega.dim(), 2 * n));
    }
    Ok(linalg::pfaffian(&omega.m))
}

/// Λ(i, j) = |z_i − z_j| / √(4 R_i R_j).
pub fn lambda_length(zi: Point, zj: Point, ri: f64, rj: f64) -> Result<f64> {
    for r in [ri, rj] {
        if !(r > 0.0) {
            return Err(FormsError::BadRadius(r));
        }
    }
    Ok((zi - zj).norm() / (4.0 * ri * rj).sqrt())
}

/// Horosphere radii per vertex id; `h_inf` is the height of the horosphere
/// at the infinite vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoration {
    pub radii: Vec<f64>,
    pub h_inf: f64,
}

impl Decoration {
    pub fn uniform(n: usize, r: f64) -> Self {
        Decoration { radii: vec![r; n], h_inf: 1.0 }
    }

    fn validate(&self, config: &PointConfiguration) -> Result<()> {
        if !(self.h_inf > 0.0) {
            return Err(FormsError::BadRadius(self.h_inf));
        }
        for v in config.finite_ids() {
            let r = self.radii.get(v).copied().unwrap_or(f64::NAN);
            if !(r > 0.0) {
                return Err(FormsError::BadRadius(r));
            }
        }
        Ok(())
    }
}

/// d log Λ(i, j) with both radii held constant.
fn dlog_lambda(zi: Point, zj: Point, si: Option<usize>, sj: Option<usize>, dim: usize) -> OneForm {
    // ∂ log Λ / ∂x_i = (x_i − x_j)/|z_i − z_j|², same for y; opposite sign for j
    let d = zi - zj;
    let n2 = d.norm_sqr();
    let mut v = DVector::zeros(dim);
    if let Some(s) = si {
        v[2 * s] += d.re / n2;
        v[2 * s + 1] += d.im / n2;
    }
    if let Some(s) = sj {
        v[2 * s] -= d.re / n2;
        v[2 * s + 1] -= d.im / n2;
    }
    OneForm { v }
}

/// Ω_WP = Σ_f d logΛ₁₂∧d logΛ₂₃ + d logΛ₂₃∧d logΛ₃₁ + d logΛ₃₁∧d logΛ₁₂.
pub fn wp_form(t: &Triangulation, dec: &Decoration) -> Result<TwoForm> {
    dec.validate(t.config())?;
    let basis = FreeBasis::of(t.config());
    let dim = basis.dim();
    let mut acc = TwoForm::zero(dim);
    for f in t.bounded_faces() {
        let (pts, mask) = face_data(t, &basis, f);
        let ids = t.face(f);
        // Λ values are not needed for the differentials but must be well defined
        for k in 0..3 {
            let (i, j) = (ids[k], ids[(k + 1) % 3]);
            lambda_length(pts[k], pts[(k + 1) % 3], dec.radii[i], dec.radii[j])?;
        }
        let l = |i: usize, j: usize| dlog_lambda(pts[i], pts[j], mask[i], mask[j], dim);
        acc.add(&cyclic_wedges(&l(0, 1), &l(1, 2), &l(2, 0)));
    }
    Ok(acc)
}

/// Central-difference gradient of `f` over the free coordinates with the
/// combinatorics of `t` pinned.
pub fn fd_gradient<F>(t: &Triangulation, basis: &FreeBasis, h: f64, f: F) -> Result<OneForm>
where
    F: Fn(&Triangulation) -> Result<f64>,
{
    let mut v = DVector::zeros(basis.dim());
    for (s, &id) in basis.ids.iter().enumerate() {
        for (k, dir) in [Point::new(h, 0.0), Point::new(0.0, h)].into_iter().enumerate() {
            let plus = t.with_config(t.config().perturbed(&[(id, dir)]));
            let minus = t.with_config(t.config().perturbed(&[(id, -dir)]));
            v[2 * s + k] = (f(&plus)? - f(&minus)?) / (2.0 * h);
        }
    }
    Ok(OneForm { v })
}

/// θ of the edge (u, v) in `t`.
fn theta_of(t: &Triangulation, u: VertexId, v: VertexId) -> Result<f64> {
    let h = t.half_edge(u, v).ok_or(TriError::NoSuchEdge(u, v))?;
    Ok(t.theta(h)?)
}

/// dθ of the edge (u, v), by central differences.
pub fn dtheta(t: &Triangulation, u: VertexId, v: VertexId, h: f64) -> Result<OneForm> {
    let basis = FreeBasis::of(t.config());
    fd_gradient(t, &basis, h, |m| theta_of(m, u, v))
}

/// Far endpoints of the edges at `v` in ccw order, starting from the
/// smallest far endpoint id.
pub fn ccw_neighbours(t: &Triangulation, v: VertexId) -> Vec<VertexId> {
    let mut nb: Vec<VertexId> = t.outgoing(v).into_iter().map(|h| t.dest(h)).collect();
    if let Some(k) = (0..nb.len()).min_by_key(|&k| nb[k]) {
        nb.rotate_left(k);
    }
    nb
}

fn require_interior(t: &Triangulation, v: VertexId) -> Result<()> {
    if !t.is_interior_vertex(v) {
        return Err(FormsError::HullVertex(v));
    }
    Ok(())
}

/// ψ_v = (1/(2π)²) Σ_{e′<e} dθ(e)∧dθ(e′), edges labelled ccw from the
/// smallest far endpoint.
pub fn chern_form_vertex(t: &Triangulation, v: VertexId) -> Result<TwoForm> {
    require_interior(t, v)?;
    chern_form_labelled(t, v, &ccw_neighbours(t, v))
}

/// ψ_v with an explicit ccw labelling of the neighbours of `v`.
pub fn chern_form_labelled(t: &Triangulation, v: VertexId, order: &[VertexId]) -> Result<TwoForm> {
    let grads: Vec<OneForm> = order.iter().map(|&w| dtheta(t, v, w, FD_STEP)).collect::<Result<_>>()?;
    let mut acc = TwoForm::zero(FreeBasis::of(t.config()).dim());
    for i in 0..grads.len() {
        for j in 0..i {
            acc.add(&TwoForm::wedge(&grads[i], &grads[j]));
        }
    }
    acc.m /= (2.0 * PI).powi(2);
    Ok(acc)
}

/// u_v = (1/(2π)²) Σ_{f→v} θ(f₊) dγ_v(f), with γ measured from the ray at
/// `reference` radians and f₊ the edge of f at v that comes second in ccw
/// order around v (the left side seen from v).
pub fn connection_form_vertex(t: &Triangulation, v: VertexId, reference: f64) -> Result<OneForm> {
    require_interior(t, v)?;
    let basis = FreeBasis::of(t.config());
    let mut acc = OneForm::zero(basis.dim());
    for h in t.outgoing(v) {
        let f = face_of(h);
        // face is (v, a, b) with h = v → a; f₊ = (v, b)
        let b = t.apex(h);
        let theta = theta_of(t, v, b)?;
        let base = gamma(t, v, f, reference);
        let grad = fd_gradient(t, &basis, FD_STEP, |m| {
            // unwrap relative to the unperturbed value
            let g = gamma(m, v, f, reference);
            Ok(base + wrap(g - base))
        })?;
        acc.v += grad.v * theta;
    }
    acc.v /= (2.0 * PI).powi(2);
    Ok(acc)
}

fn gamma(t: &Triangulation, v: VertexId, f: usize, reference: f64) -> f64 {
    let [a, b, c] = t.face(f).map(|w| t.config().point(w).unwrap());
    let w = geom::circumcenter(a, b, c);
    let zv = t.config().point(v).unwrap();
    ((w - zv) * Complex64::from_polar(1.0, -reference)).arg()
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Both sides of the connection jump across a flip of the edge (2, 4).
#[derive(Debug, Clone, PartialEq)]
pub struct FlipDiscontinuity {
    /// Quadrilateral labels 1, 2, 3, 4 (ccw); T has diagonal (2, 4).
    pub labels: [VertexId; 4],
    /// Σ_v u_v(T) − Σ_v u_v(T′), by finite differences.
    pub lhs: OneForm,
    /// (θ₁₄+θ₂₃−θ₁₂−θ₃₄)(dθ₁₂ − dθ′₁₂) + (θ₁₄+θ₂₃) dθ₂₄.
    pub rhs: OneForm,
    /// Symmetric form ½[(θ₁₂+θ₃₄)(dθ′₁₂−dθ₁₂+dθ′₃₄−dθ₃₄) + (θ₁₄+θ₂₃)(dθ′₁₄−dθ₁₄+dθ′₂₃−dθ₂₃)].
    pub rhs_symmetric: OneForm,
    /// |incircle determinant proxy|: distance of vertex 3 from the circle of (1, 2, 4).
    pub cocyclic_gap: f64,
}

/// Tolerance for "near cocyclic" in [`flip_discontinuity`].
pub const COCYCLIC_TOL: f64 = 1e-6;

/// Evaluates the connection jump at the flip of the interior edge `(u, v)`
/// of the Delaunay triangulation of `config`, with reference rays `refs`
/// (one angle per vertex id; missing entries are 0).
pub fn flip_discontinuity(config: &PointConfiguration, u: VertexId, v: VertexId, refs: &[f64]) -> Result<FlipDiscontinuity> {
    let t = tri::delaunay(config)?;
    let h = t.half_edge(u, v).ok_or(TriError::NoSuchEdge(u, v))?;
    let (p, q) = (t.apex(h), t.apex(t.twin(h)));
    // ccw quad u, q, v, p → labels 1 = p, 2 = u, 3 = q, 4 = v
    let labels = [p, u, q, v];
    let z = |w: VertexId| config.point(w).unwrap();
    let circ = geom::circumcircle(z(p).into(), z(u).into(), z(v).into())?;
    let gap = circ.distance(z(q));
    if gap > COCYCLIC_TOL {
        return Err(FormsError::NotNearCocyclic(gap));
    }
    let t2 = tri::flip(&t, u, v)?;
    let reference = |w: VertexId| refs.get(w).copied().unwrap_or(0.0);
    let basis = FreeBasis::of(config);
    let mut lhs = OneForm::zero(basis.dim());
    for w in config.finite_ids() {
        let (a, b) = (t.is_interior_vertex(w), t2.is_interior_vertex(w));
        if a && b {
            lhs.v += connection_form_vertex(&t, w, reference(w))?.v - connection_form_vertex(&t2, w, reference(w))?.v;
        } else if a != b {
            return Err(FormsError::HullVertex(w));
        }
    }
    let [l1, l2, l3, l4] = labels;
    let th = |tr: &Triangulation, a: VertexId, b: VertexId| theta_of(tr, a, b);
    let dth = |tr: &Triangulation, a: VertexId, b: VertexId| dtheta(tr, a, b, FD_STEP);
    let (t12, t14, t23, t34) = (th(&t, l1, l2)?, th(&t, l1, l4)?, th(&t, l2, l3)?, th(&t, l3, l4)?);
    let rhs_v = (dth(&t, l1, l2)?.v - dth(&t2, l1, l2)?.v) * (t14 + t23 - t12 - t34) + dth(&t, l2, l4)?.v * (t14 + t23);
    let sym = ((dth(&t2, l1, l2)?.v - dth(&t, l1, l2)?.v + dth(&t2, l3, l4)?.v - dth(&t, l3, l4)?.v) * (t12 + t34)
        + (dth(&t2, l1, l4)?.v - dth(&t, l1, l4)?.v + dth(&t2, l2, l3)?.v - dth(&t, l2, l3)?.v) * (t14 + t23))
        * 0.5;
    Ok(FlipDiscontinuity {
        labels,
        lhs,
        rhs: OneForm { v: rhs_v },
        rhs_symmetric: OneForm { v: sym },
        cocyclic_gap: gap,
    })
}

/// Best match of `lhs` against `±s·rhs` for the normalizations s ∈ {1, 1/(2π)²}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionMatch {
    pub sign: f64,
    pub scale: f64,
    pub rel_error: f64,
}

pub fn best_convention(lhs: &OneForm, rhs: &OneForm) -> ConventionMatch {
    let mut best = ConventionMatch { sign: 1.0, scale: 1.0, rel_error: f64::INFINITY };
    for sign in [1.0, -1.0] {
        for scale in [1.0, 1.0 / (2.0 * PI).powi(2)] {
            let r = &rhs.v * (sign * scale);
            let denom = lhs.v.amax().max(r.amax());
            let err = if denom == 0.0 { 0.0 } else { (&lhs.v - &r).amax() / denom };
            if err < best.rel_error {
                best = ConventionMatch { sign, scale, rel_error: err };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn fixed_vertices_give_zero() {
        let pts = [p(0., 0.), p(1., 0.), p(0.2, 0.9)];
        let w = omega_face_z(pts, [None; 3], 4).unwrap();
        assert_eq!(w.m.amax(), 0.0);
        let w = omega_face_lengths(pts, [None; 3], 4).unwrap();
        assert_eq!(w.m.amax(), 0.0);
    }

    #[test]
    fn cyclic_relabeling() {
        let pts = [p(0.1, 0.2), p(1.3, -0.1), p(0.4, 0.9)];
        let mask = [Some(0), Some(1), Some(2)];
        let a = omega_face_z(pts, mask, 6).unwrap();
        let b = omega_face_z([pts[1], pts[2], pts[0]], [mask[1], mask[2], mask[0]], 6).unwrap();
        assert!(a.rel_diff(&b) < 1e-14);
        assert!(a.antisymmetry_defect() < 1e-15);
    }

    #[test]
    fn z_form_equals_length_form() {
        let pts = [p(0.1, 0.2), p(1.3, -0.1), p(0.4, 0.9)];
        let mask = [Some(0), None, Some(1)];
        let a = omega_face_z(pts, mask, 4).unwrap();
        let b = omega_face_lengths(pts, mask, 4).unwrap();
        assert!(a.rel_diff(&b) < 1e-12);
    }

    #[test]
    fn angle_wedge_is_twice_length_form() {
        let pts = [p(0.1, 0.2), p(1.3, -0.1), p(0.4, 0.9)];
        let mask = [Some(0), Some(1), Some(2)];
        let a = omega_face_angles(pts, mask, 6, FD_STEP).unwrap();
        let mut l = omega_face_lengths(pts, mask, 6).unwrap();
        l.m *= 2.0;
        assert!(a.rel_diff(&l) < 1e-8, "{}", a.rel_diff(&l));
    }

    #[test]
    fn pfaffian_of_two_by_two() {
        let w = TwoForm { m: DMatrix::from_row_slice(2, 2, &[0.0, 2.5, -2.5, 0.0]) };
        assert_eq!(top_coefficient(&w, 1).unwrap(), 2.5);
        assert!(top_coefficient(&w, 2).is_err());
    }

    #[test]
    fn lambda_examples() {
        let (a, b) = (p(0., 0.), p(3., 4.));
        assert!((lambda_length(a, b, 0.5, 0.5).unwrap() - 5.0).abs() < 1e-15);
        assert!((lambda_length(a, b, 0.25, 0.25).unwrap() - 10.0).abs() < 1e-14);
        assert!((lambda_length(a, b, 1.0, 1.0).unwrap() - 2.5).abs() < 1e-15);
        assert!(lambda_length(a, b, 0.0, 1.0).is_err());
        // unit square, Λ = |z_i − z_j|: Λ13 Λ24 = 2 = Λ12 Λ34 + Λ14 Λ23
        let z = [p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)];
        let l = |i: usize, j: usize| lambda_length(z[i], z[j], 0.5, 0.5).unwrap();
        assert!((l(0, 2) * l(1, 3) - 2.0).abs() < 1e-15);
        assert!((l(0, 1) * l(2, 3) + l(0, 3) * l(1, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minimal_config_forms_are_empty() {
        let c = PointConfiguration::with_free(&[]).unwrap();
        let t = tri::delaunay(&c).unwrap();
        assert_eq!(omega_total(&t).unwrap().dim(), 0);
        assert_eq!(wp_form(&t, &Decoration::uniform(3, 1.0)).unwrap().dim(), 0);
    }

    #[test]
    fn wrap_is_principal() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap(-PI), PI);
    }
}
