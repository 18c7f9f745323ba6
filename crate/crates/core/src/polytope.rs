//! Bounded convex polytopes in ℝⁿ.
//!
//! A [`Polytope`] always carries both representations: the vertex list and
//! the facet list, each facet being an inward halfspace `⟨s, v⟩ − λ ≥ 0`
//! together with the indices of the vertices lying on it. Construction goes
//! either through the convex hull of a point set ([`Polytope::from_vertices`])
//! or through vertex enumeration of a bounded halfspace system
//! ([`Polytope::from_halfspaces`]). Both are brute-force enumerations over
//! subsets, which is the right trade-off for the n ≤ 4 instances handled here.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, combinations, dot, norm};

/// Absolute tolerance on halfspace values used by [`Polytope::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Relative tolerance of the combinatorial predicates (tightness, rank).
const GEOM_TOL: f64 = 1e-9;

/// Inward halfspace `l(s) = ⟨s, normal⟩ − offset ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn unit(&self) -> Option<Halfspace> {
        let len = norm(&self.normal);
        if len == 0.0 {
            return None;
        }
        Some(Halfspace {
            normal: self.normal.iter().map(|v| v / len).collect(),
            offset: self.offset / len,
        })
    }
}

#[derive(Clone, Debug)]
struct Facet {
    halfspace: Halfspace,
    vertex_ids: Vec<usize>,
}

/// A full-dimensional bounded convex polytope.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
}

/// An n-simplex given by its n+1 vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let n = vertices.len().saturating_sub(1);
        if n == 0 {
            return Err(Error::InvalidArgument("a simplex needs at least 2 vertices".into()));
        }
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let s = Simplex { vertices };
        if s.volume() <= 0.0 {
            let refs: Vec<&[f64]> = s.vertices.iter().map(|v| v.as_slice()).collect();
            return Err(Error::Degenerate { rank: linalg::affine_rank(&refs, GEOM_TOL), dim: n });
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(vertices: Vec<Vec<f64>>) -> Self {
        Simplex { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// `|det(v₁ − v₀, …, vₙ − v₀)| / n!`
    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let rows: Vec<Vec<f64>> = self.vertices[1..]
            .iter()
            .map(|v| linalg::sub(v, &self.vertices[0]))
            .collect();
        linalg::det(&rows).abs() / factorial(n)
    }

    pub fn centroid(&self) -> Vec<f64> {
        centroid_of(self.vertices.iter().map(|v| v.as_slice()))
    }

    /// Endpoints of the longest edge (first one on ties).
    pub(crate) fn longest_edge(&self) -> (usize, usize) {
        let mut best = (0, 1);
        let mut best_len = -1.0;
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let d = linalg::sub(&self.vertices[i], &self.vertices[j]);
                let l = dot(&d, &d);
                if l > best_len {
                    best_len = l;
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Splits the simplex at the midpoint of edge (i, j).
    pub(crate) fn bisect(&self, i: usize, j: usize) -> (Simplex, Simplex) {
        let mid: Vec<f64> = self.vertices[i]
            .iter()
            .zip(&self.vertices[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mut left = self.vertices.clone();
        let mut right = self.vertices.clone();
        left[j] = mid.clone();
        right[i] = mid;
        (Simplex { vertices: left }, Simplex { vertices: right })
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn centroid_of<'a>(points: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for p in points {
        if acc.is_empty() {
            acc = vec![0.0; p.len()];
        }
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
        count += 1;
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    acc
}

fn coordinate_scale(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()))
}

fn dedup_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = out
            .iter()
            .any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= tol));
        if !dup {
            out.push(p);
        }
    }
    out
}

impl Polytope {
    /// Convex hull of a finite point set. Interior and duplicate points are
    /// dropped; a lower-dimensional point set is rejected.
    pub fn from_vertices(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite vertex coordinate".into()));
            }
        }
        let scale = coordinate_scale(&points);
        let tol = GEOM_TOL * scale;
        let points = dedup_points(points, tol);
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        let rank = linalg::affine_rank(&refs, GEOM_TOL);
        if rank < dim {
            return Err(Error::Degenerate { rank, dim });
        }

        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut facets = Vec::new();
        for subset in combinations(points.len(), dim) {
            let sub: Vec<&[f64]> = subset.iter().map(|&i| refs[i]).collect();
            let Some(normal) = linalg::hyperplane_normal(&sub) else {
                continue;
            };
            let len = norm(&normal);
            let normal: Vec<f64> = normal.iter().map(|v| v / len).collect();
            let offset = dot(&normal, sub[0]);
            let vals: Vec<f64> = refs.iter().map(|p| dot(&normal, p) - offset).collect();
            let sign = if vals.iter().all(|&v| v >= -tol) {
                1.0
            } else if vals.iter().all(|&v| v <= tol) {
                -1.0
            } else {
                continue;
            };
            let tight: Vec<usize> = (0..points.len()).filter(|&i| vals[i].abs() <= tol).collect();
            if !seen.insert(tight.clone()) {
                continue;
            }
            facets.push(Facet {
                halfspace: Halfspace {
                    normal: normal.iter().map(|v| sign * v).collect(),
                    offset: sign * offset,
                },
                vertex_ids: tight,
            });
        }
        Ok(Self::prune_to_vertices(dim, points, facets))
    }

    /// Keeps only the points that are vertices (their tight facet normals span
    /// ℝⁿ) and reindexes the facets accordingly.
    fn prune_to_vertices(dim: usize, points: Vec<Vec<f64>>, facets: Vec<Facet>) -> Self {
        let mut keep = vec![false; points.len()];
        for (i, k) in keep.iter_mut().enumerate() {
            let normals: Vec<&[f64]> = facets
                .iter()
                .filter(|f| f.vertex_ids.contains(&i))
                .map(|f| f.halfspace.normal.as_slice())
                .collect();
            if normals.len() < dim {
                continue;
            }
            // rank of the normals = affine rank of {0} ∪ normals
            let zero = vec![0.0; dim];
            let mut with_origin: Vec<&[f64]> = vec![zero.as_slice()];
            with_origin.extend(normals);
            *k = linalg::affine_rank(&with_origin, GEOM_TOL) == dim;
        }
        let mut remap = vec![usize::MAX; points.len()];
        let mut vertices = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            if keep[i] {
                remap[i] = vertices.len();
                vertices.push(p);
            }
        }
        let facets = facets
            .into_iter()
            .map(|f| Facet {
                vertex_ids: f
                    .vertex_ids
                    .iter()
                    .filter(|&&i| keep[i])
                    .map(|&i| remap[i])
                    .collect(),
                halfspace: f.halfspace,
            })
            .collect();
        Polytope { dim, vertices, facets }
    }

    /// Vertex enumeration of `{ s : l_j(s) ≥ 0 ∀j }`, which must be bounded.
    /// Redundant halfspaces are dropped from the facet list.
    pub fn from_halfspaces(dim: usize, halfspaces: &[Halfspace]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut hs = Vec::with_capacity(halfspaces.len());
        for h in halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.normal.len() });
            }
            match h.unit() {
                Some(u) => hs.push(u),
                None if h.offset <= 0.0 => {}
                None => return Err(Error::Empty),
            }
        }
        let scale = hs.iter().fold(1.0f64, |m, h| m.max(h.offset.abs()));
        let tol = GEOM_TOL * scale;

        let mut points = Vec::new();
        for subset in combinations(hs.len(), dim) {
            let rows: Vec<Vec<f64>> = subset.iter().map(|&j| hs[j].normal.clone()).collect();
            let rhs: Vec<f64> = subset.iter().map(|&j| hs[j].offset).collect();
            let Some(x) = linalg::solve(&rows, &rhs) else {
                continue;
            };
            if hs.iter().all(|h| h.eval(&x) >= -tol) {
                points.push(x);
            }
        }
        if points.is_empty() {
            return Err(Error::Empty);
        }
        let points = dedup_points(points, 10.0 * tol);
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        let rank = linalg::affine_rank(&refs, GEOM_TOL);
        if rank < dim {
            return Err(Error::Degenerate { rank, dim });
        }

        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut facets = Vec::new();
        for h in hs {
            let tight: Vec<usize> = (0..points.len())
                .filter(|&i| h.eval(&points[i]).abs() <= 10.0 * tol)
                .collect();
            if tight.len() < dim {
                continue;
            }
            let trefs: Vec<&[f64]> = tight.iter().map(|&i| refs[i]).collect();
            if linalg::affine_rank(&trefs, GEOM_TOL) != dim - 1 {
                continue;
            }
            if seen.insert(tight.clone()) {
                facets.push(Facet { halfspace: h, vertex_ids: tight });
            }
        }
        Ok(Self::prune_to_vertices(dim, points, facets))
    }

    /// Builds a polytope from its vertex list and, optionally, a supplied
    /// halfspace description that is checked against the vertices.
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>, halfspaces: Option<Vec<Halfspace>>) -> Result<Self> {
        let p = Self::from_vertices(dim, vertices)?;
        if let Some(hs) = halfspaces {
            for (j, h) in hs.iter().enumerate() {
                if h.normal.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: h.normal.len() });
                }
                let len = norm(&h.normal);
                if len == 0.0 {
                    return Err(Error::InconsistentHalfspaces(format!("halfspace {j} has a zero normal")));
                }
                let tight = p
                    .vertices
                    .iter()
                    .filter(|v| (h.eval(v) / len).abs() <= MEMBERSHIP_TOL)
                    .count();
                if let Some(v) = p.vertices.iter().find(|v| h.eval(v) / len < -MEMBERSHIP_TOL) {
                    return Err(Error::InconsistentHalfspaces(format!(
                        "vertex {v:?} violates halfspace {j}"
                    )));
                }
                if tight < dim {
                    return Err(Error::InconsistentHalfspaces(format!(
                        "halfspace {j} is tight at {tight} < {dim} vertices"
                    )));
                }
            }
        }
        Ok(p)
    }

    /// Simplex polytope from n+1 vertices.
    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let s = Simplex::new(vertices)?;
        Self::from_vertices(s.dim(), s.vertices)
    }

    /// Axis-aligned box `∏ [lo_k, hi_k]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let n = lo.len();
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::Degenerate { rank: 0, dim: n });
        }
        let mut hs = Vec::with_capacity(2 * n);
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            hs.push(Halfspace::new(e.clone(), lo[k]));
            e[k] = -1.0;
            hs.push(Halfspace::new(e, -hi[k]));
        }
        Self::from_halfspaces(n, &hs)
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::cuboid(&vec![0.0; n], &vec![1.0; n])
    }

    /// The simplex `{x ≥ 0, Σx ≤ side}` with vertices 0 and `side·e_k`.
    pub fn corner_simplex(n: usize, side: f64) -> Result<Self> {
        let mut vs = vec![vec![0.0; n]];
        for k in 0..n {
            let mut v = vec![0.0; n];
            v[k] = side;
            vs.push(v);
        }
        Self::simplex(vs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Facet-defining halfspaces with unit inward normals.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.facets.iter().map(|f| f.halfspace.clone()).collect()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Vertex coordinates of each facet, in the order of [`Self::halfspaces`].
    pub fn facet_vertices(&self) -> Vec<Vec<Vec<f64>>> {
        self.facets
            .iter()
            .map(|f| f.vertex_ids.iter().map(|&i| self.vertices[i].clone()).collect())
            .collect()
    }

    /// True iff `l_j(x) ≥ −MEMBERSHIP_TOL` for every facet.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.facets.iter().all(|f| f.halfspace.eval(x) >= -MEMBERSHIP_TOL)
    }

    /// Smallest facet slack `min_j l_j(x)` (unit normals, so a signed distance
    /// to the boundary for points inside).
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.halfspace.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean of the vertices; an interior point.
    pub fn centroid(&self) -> Vec<f64> {
        centroid_of(self.vertices.iter().map(|v| v.as_slice()))
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn is_simplex(&self) -> bool {
        self.vertices.len() == self.dim + 1
    }

    /// Centroid fan triangulation: every non-simplex face is coned from its
    /// vertex centroid over the triangulations of its own facets. Simplicial
    /// faces are kept whole.
    pub fn triangulate(&self) -> Vec<Simplex> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        self.face_simplices(&all, self.dim)
            .into_iter()
            .map(Simplex::new_unchecked)
            .collect()
    }

    fn face_simplices(&self, face: &[usize], d: usize) -> Vec<Vec<Vec<f64>>> {
        if face.len() == d + 1 {
            return vec![face.iter().map(|&i| self.vertices[i].clone()).collect()];
        }
        let apex = centroid_of(face.iter().map(|&i| self.vertices[i].as_slice()));
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        for f in &self.facets {
            let sub: Vec<usize> = face.iter().copied().filter(|i| f.vertex_ids.contains(i)).collect();
            if sub.len() < d || sub.len() == face.len() || seen.contains(&sub) {
                continue;
            }
            let refs: Vec<&[f64]> = sub.iter().map(|&i| self.vertices[i].as_slice()).collect();
            if linalg::affine_rank(&refs, GEOM_TOL) != d - 1 {
                continue;
            }
            seen.insert(sub.clone());
            for mut s in self.face_simplices(&sub, d - 1) {
                s.insert(0, apex.clone());
                out.push(s);
            }
        }
        out
    }

    /// Lebesgue measure, summed over the triangulation.
    pub fn volume(&self) -> f64 {
        self.triangulate().iter().map(Simplex::volume).sum()
    }

    /// Uniform samples: a simplex of the triangulation is chosen with
    /// probability proportional to its volume, then a point is drawn from
    /// the Dirichlet(1,…,1) barycentric law via sorted uniforms.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let simplices = self.triangulate();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_simplices(&simplices, &mut rng, count)
    }

    /// The image under `s ↦ c·s`, `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {c}")));
        }
        Ok(Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.iter().map(|x| c * x).collect()).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    halfspace: Halfspace::new(f.halfspace.normal.clone(), c * f.halfspace.offset),
                    vertex_ids: f.vertex_ids.clone(),
                })
                .collect(),
        })
    }

    /// The image under `s ↦ s + t`.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.len() });
        }
        Ok(Polytope {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().zip(t).map(|(x, d)| x + d).collect())
                .collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    halfspace: Halfspace::new(
                        f.halfspace.normal.clone(),
                        f.halfspace.offset + dot(&f.halfspace.normal, t),
                    ),
                    vertex_ids: f.vertex_ids.clone(),
                })
                .collect(),
        })
    }

    /// `P ∩ {extra}` as a new polytope.
    pub fn intersect(&self, extra: &[Halfspace]) -> Result<Self> {
        let mut hs = self.halfspaces();
        hs.extend_from_slice(extra);
        Self::from_halfspaces(self.dim, &hs)
    }
}

pub(crate) fn sample_simplices<R: Rng>(simplices: &[Simplex], rng: &mut R, count: usize) -> Vec<Vec<f64>> {
    if count == 0 || simplices.is_empty() {
        return Vec::new();
    }
    let weights: Vec<f64> = simplices.iter().map(Simplex::volume).collect();
    let pick = WeightedIndex::new(&weights).expect("triangulation volumes are positive");
    let n = simplices[0].dim();
    let mut u = vec![0.0; n + 2];
    (0..count)
        .map(|_| {
            let s = &simplices[pick.sample(rng)];
            u[0] = 0.0;
            u[n + 1] = 1.0;
            for slot in u[1..=n].iter_mut() {
                *slot = rng.gen::<f64>();
            }
            u[1..=n].sort_by(f64::total_cmp);
            let mut x = vec![0.0; n];
            for (k, v) in s.vertices.iter().enumerate() {
                let w = u[k + 1] - u[k];
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += w * vi;
                }
            }
            x
        })
        .collect()
}

/// JSON form `{ "dim", "vertices", "halfspaces"? }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<Halfspace>>,
}

impl TryFrom<PolytopeSpec> for Polytope {
    type Error = Error;

    fn try_from(spec: PolytopeSpec) -> Result<Self> {
        Polytope::new(spec.dim, spec.vertices, spec.halfspaces)
    }
}

impl From<&Polytope> for PolytopeSpec {
    fn from(p: &Polytope) -> Self {
        PolytopeSpec {
            dim: p.dim,
            vertices: p.vertices.clone(),
            halfspaces: Some(p.halfspaces()),
        }
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = PolytopeSpec::deserialize(deserializer)?;
        Polytope::try_from(spec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn unit_triangle_volume() {
        let p = Polytope::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(close(p.volume(), 0.5, 1e-15));
    }

    #[test]
    fn three_halves_simplex_volume() {
        let p = Polytope::corner_simplex(2, 1.5).unwrap();
        assert!(close(p.volume(), 9.0 / 8.0, 1e-15));
    }

    #[test]
    fn unit_cube_volume() {
        let p = Polytope::unit_cube(3).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(p.facet_count(), 6);
        assert!(close(p.volume(), 1.0, 1e-14));
    }

    #[test]
    fn containment() {
        let sq = Polytope::unit_cube(2).unwrap();
        assert!(sq.contains(&[0.5, 0.5]));
        assert!(!sq.contains(&[1.5, 0.5]));
        let s = Polytope::corner_simplex(2, 1.5).unwrap();
        assert!(s.contains(&[0.7, 0.7]));
        assert!(!s.contains(&[0.8, 0.8]));
    }

    #[test]
    fn simplex_triangulates_to_itself() {
        let s = Polytope::corner_simplex(3, 1.0).unwrap();
        let t = s.triangulate();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].vertices().len(), 4);
    }

    #[test]
    fn square_centroid_fan() {
        let sq = Polytope::unit_cube(2).unwrap();
        let t = sq.triangulate();
        assert_eq!(t.len(), 4);
        for s in &t {
            assert!(close(s.volume(), 0.25, 1e-15));
        }
    }

    #[test]
    fn interior_points_are_pruned() {
        let p = Polytope::from_vertices(
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
                vec![0.5, 0.5],
                vec![0.5, 0.0],
                vec![1.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(close(p.volume(), 1.0, 1e-14));
    }

    #[test]
    fn degenerate_input_rejected() {
        let err = Polytope::from_vertices(2, vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err();
        assert_eq!(err, Error::Degenerate { rank: 1, dim: 2 });
        assert!(matches!(
            Polytope::from_vertices(2, vec![vec![0.0, 0.0], vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interval_from_points() {
        let p = Polytope::from_vertices(1, vec![vec![0.3], vec![-1.0], vec![2.0]]).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert!(close(p.volume(), 3.0, 1e-15));
        assert!(p.contains(&[0.0]) && !p.contains(&[2.1]));
    }

    #[test]
    fn halfspace_vertex_enumeration_matches_hull() {
        // hexagon-like cut of the square
        let sq = Polytope::unit_cube(2).unwrap();
        let cut = sq.intersect(&[Halfspace::new(vec![-1.0, -1.0], -1.5)]).unwrap();
        assert_eq!(cut.vertices().len(), 5);
        assert!(close(cut.volume(), 1.0 - 0.125, 1e-14));
        let hull = Polytope::from_vertices(2, cut.vertices().to_vec()).unwrap();
        assert!(close(hull.volume(), cut.volume(), 1e-14));
    }

    #[test]
    fn empty_intersection() {
        let sq = Polytope::unit_cube(2).unwrap();
        assert_eq!(sq.intersect(&[Halfspace::new(vec![1.0, 0.0], 2.0)]).unwrap_err(), Error::Empty);
        assert!(matches!(
            sq.intersect(&[Halfspace::new(vec![1.0, 0.0], 1.0)]),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn supplied_halfspaces_are_checked() {
        let verts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let good = vec![
            Halfspace::new(vec![1.0, 0.0], 0.0),
            Halfspace::new(vec![0.0, 1.0], 0.0),
            Halfspace::new(vec![-1.0, -1.0], -1.0),
        ];
        assert!(Polytope::new(2, verts.clone(), Some(good)).is_ok());
        let violated = vec![Halfspace::new(vec![1.0, 0.0], 0.5)];
        assert!(matches!(
            Polytope::new(2, verts.clone(), Some(violated)),
            Err(Error::InconsistentHalfspaces(_))
        ));
        let loose = vec![Halfspace::new(vec![1.0, 0.0], -1.0)];
        assert!(matches!(Polytope::new(2, verts, Some(loose)), Err(Error::InconsistentHalfspaces(_))));
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let sq = Polytope::unit_cube(2).unwrap();
        let a = sq.sample(7, 1000);
        let b = sq.sample(7, 1000);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| sq.contains(x)));
        let mean: Vec<f64> = (0..2).map(|k| a.iter().map(|x| x[k]).sum::<f64>() / 1000.0).collect();
        assert!((mean[0] - 0.5).abs() < 0.05 && (mean[1] - 0.5).abs() < 0.05);
        let s = Polytope::corner_simplex(3, 1.0).unwrap();
        let one = s.sample(1, 1);
        assert_eq!(one.len(), 1);
        assert!(s.contains(&one[0]));
    }

    #[test]
    fn json_round_trip() {
        let p = Polytope::corner_simplex(2, 1.5).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let q: Polytope = serde_json::from_str(&text).unwrap();
        assert_eq!(p.vertices(), q.vertices());
        let bad = r#"{"dim": 2, "vertices": [[0,0],[1,1],[2,2]]}"#;
        assert!(serde_json::from_str::<Polytope>(bad).is_err());
        let unknown = r#"{"dim": 1, "vertices": [[0],[1]], "extra": 1}"#;
        assert!(serde_json::from_str::<Polytope>(unknown).is_err());
    }
}
