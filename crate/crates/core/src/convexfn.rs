//! Convex functions as finite maxima of affine pieces.
//!
//! [`MaxAffine`] is the working representation for every convex function
//! evaluated on a polytope. Its regions of linearity ("cells") are polytopes,
//! so infima, sublevel volumes and integrals all reduce to exact polytope
//! computations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate;
use crate::linalg::{self, dot, norm};
use crate::polytope::{Halfspace, Polytope};

/// Pieces closer than this in every coefficient are merged.
const MERGE_TOL: f64 = 1e-13;

/// Affine function `x ↦ ⟨a, x⟩ + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub b: f64,
}

impl AffinePiece {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `{ x : self(x) ≥ other(x) }` as an inward halfspace.
    fn dominates(&self, other: &AffinePiece) -> Halfspace {
        Halfspace::new(
            self.a.iter().zip(&other.a).map(|(p, q)| p - q).collect(),
            other.b - self.b,
        )
    }
}

/// `f(x) = max_i (⟨a_i, x⟩ + b_i)`, convex and finite everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxAffine {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

impl MaxAffine {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidArgument("a max-affine function needs at least one piece".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut merged: Vec<AffinePiece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !p.b.is_finite() || p.a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
            let twin = merged.iter_mut().find(|q| {
                (q.b - p.b).abs() <= MERGE_TOL && q.a.iter().zip(&p.a).all(|(x, y)| (x - y).abs() <= MERGE_TOL)
            });
            match twin {
                Some(q) => q.b = q.b.max(p.b),
                None => merged.push(p),
            }
        }
        Ok(MaxAffine { dim, pieces: merged })
    }

    pub fn affine(a: Vec<f64>, b: f64) -> Result<Self> {
        Self::new(vec![AffinePiece::new(a, b)])
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::affine(vec![0.0; dim], c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_affine(&self) -> bool {
        self.pieces.len() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.a.iter().all(|&v| v == 0.0))
    }

    /// Largest slope norm, a Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        self.pieces.iter().map(|p| norm(&p.a)).fold(0.0, f64::max)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        MaxAffine {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece::new(p.a.clone(), p.b + c))
                .collect(),
        }
    }

    /// `t·f` for `t ≥ 0`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("scaling by {t} breaks convexity")));
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| AffinePiece::new(p.a.iter().map(|v| t * v).collect(), t * p.b))
                .collect(),
        )
    }

    /// `f + ⟨a, ·⟩ + b`.
    pub fn add_affine(&self, a: &[f64], b: f64) -> Result<Self> {
        if a.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.len() });
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| AffinePiece::new(p.a.iter().zip(a).map(|(x, y)| x + y).collect(), p.b + b))
                .collect(),
        )
    }

    /// `x ↦ f(x − t)`, the push-forward under translation by `t`.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.len() });
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| AffinePiece::new(p.a.clone(), p.b - dot(&p.a, t)))
                .collect(),
        )
    }

    /// The same function viewed on ℝⁿ (n ≥ dim), ignoring the extra coordinates.
    pub fn lift(&self, n: usize) -> Result<Self> {
        if n < self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: n });
        }
        Self::new(
            self.pieces
                .iter()
                .map(|p| {
                    let mut a = p.a.clone();
                    a.resize(n, 0.0);
                    AffinePiece::new(a, p.b)
                })
                .collect(),
        )
    }

    fn check_domain(&self, p: &Polytope) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        Ok(())
    }

    /// Regions of linearity inside `P`: `(piece index, P ∩ {piece_i ≥ piece_j ∀j})`.
    /// Empty and lower-dimensional cells are omitted.
    pub fn cells(&self, p: &Polytope) -> Result<Vec<(usize, Polytope)>> {
        self.check_domain(p)?;
        if self.is_affine() {
            return Ok(vec![(0, p.clone())]);
        }
        let mut out = Vec::new();
        for (i, pi) in self.pieces.iter().enumerate() {
            let extra: Vec<Halfspace> = self
                .pieces
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, pj)| pi.dominates(pj))
                .collect();
            match p.intersect(&extra) {
                Ok(cell) => out.push((i, cell)),
                Err(Error::Empty) | Err(Error::Degenerate { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// `max_P f`, attained at a vertex of `P`.
    pub fn supremum(&self, p: &Polytope) -> Result<f64> {
        self.check_domain(p)?;
        Ok(p.vertices().iter().map(|v| self.eval(v)).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Exact infimum over the closure of `P`: the minimum over the vertices of
    /// the linearity cells, where a convex piecewise-affine function must
    /// attain it.
    pub fn infimum(&self, p: &Polytope) -> Result<Infimum> {
        self.check_domain(p)?;
        let candidates: Vec<Vec<f64>> = if self.is_affine() {
            p.vertices().to_vec()
        } else {
            self.cells(p)?
                .into_iter()
                .flat_map(|(_, c)| c.vertices().to_vec())
                .collect()
        };
        let mut best = Infimum {
            value: f64::INFINITY,
            argmin: Vec::new(),
            tol: INFIMUM_TOL * (1.0 + self.lipschitz()),
        };
        for x in candidates {
            let v = self.eval(&x);
            if v < best.value {
                best.value = v;
                best.argmin = x;
            }
        }
        Ok(best)
    }

    /// Infimum by nested grid refinement over the bounding box of `P`, 33
    /// nodes per axis and 12 rounds. Independent of the cell decomposition;
    /// used as a cross-check.
    ///
    /// Each round keeps the box spanned by the nodes whose value is within
    /// `L·r` of the best value found so far (`L` the Lipschitz constant, `r`
    /// the half-diagonal of a grid cell), padded by one step. The node
    /// nearest to a minimizer always qualifies, so the box keeps containing
    /// it, and `min(node values) − L·r` is a certified lower bound. `tol` is
    /// the width of the resulting bracket.
    pub fn infimum_grid(&self, p: &Polytope) -> Result<Infimum> {
        self.check_domain(p)?;
        const NODES: usize = 33;
        const ROUNDS: usize = 12;
        let n = self.dim;
        let lip = self.lipschitz();
        let (mut lo, mut hi) = p.bounding_box();
        let mut best = Infimum { value: f64::INFINITY, argmin: Vec::new(), tol: 0.0 };
        for v in p.vertices() {
            let val = self.eval(v);
            if val < best.value {
                best.value = val;
                best.argmin = v.clone();
            }
        }
        let mut lower = f64::NEG_INFINITY;
        let total = NODES.pow(n as u32);
        let mut x = vec![0.0; n];
        let mut values = vec![0.0; total];
        for _ in 0..ROUNDS {
            let step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / (NODES - 1) as f64).collect();
            let reach = lip * 0.5 * step.iter().map(|h| h * h).sum::<f64>().sqrt();
            let node = |idx: usize, x: &mut [f64]| {
                let mut rem = idx;
                for k in (0..n).rev() {
                    x[k] = lo[k] + step[k] * (rem % NODES) as f64;
                    rem /= NODES;
                }
            };
            let mut min_all = f64::INFINITY;
            for (idx, slot) in values.iter_mut().enumerate() {
                node(idx, &mut x);
                let val = self.eval(&x);
                *slot = val;
                min_all = min_all.min(val);
                if val < best.value && p.contains(&x) {
                    best.value = val;
                    best.argmin = x.clone();
                }
            }
            lower = lower.max(min_all - reach);
            let threshold = best.value + reach;
            let mut new_lo = vec![f64::INFINITY; n];
            let mut new_hi = vec![f64::NEG_INFINITY; n];
            for (idx, &val) in values.iter().enumerate() {
                if val <= threshold {
                    node(idx, &mut x);
                    for k in 0..n {
                        new_lo[k] = new_lo[k].min(x[k] - step[k]);
                        new_hi[k] = new_hi[k].max(x[k] + step[k]);
                    }
                }
            }
            for k in 0..n {
                lo[k] = lo[k].max(new_lo[k]);
                hi[k] = hi[k].min(new_hi[k]);
            }
        }
        best.tol = (best.value - lower).max(0.0);
        Ok(best)
    }

    /// Exact infimum by brute force over the hyperplane arrangement formed
    /// by the facets of `P` and the kinks `{piece_i = piece_j}`: every vertex
    /// of the arrangement lying in `P` is evaluated. Shares no code with the
    /// cell decomposition behind [`Self::infimum`]; used as a cross-check.
    pub fn infimum_arrangement(&self, p: &Polytope) -> Result<Infimum> {
        self.check_domain(p)?;
        let n = self.dim;
        let mut planes: Vec<(Vec<f64>, f64)> = p.halfspaces().into_iter().map(|h| (h.normal, h.offset)).collect();
        for (i, pi) in self.pieces.iter().enumerate() {
            for pj in &self.pieces[i + 1..] {
                let normal: Vec<f64> = pi.a.iter().zip(&pj.a).map(|(x, y)| x - y).collect();
                if norm(&normal) > 0.0 {
                    planes.push((normal, pj.b - pi.b));
                }
            }
        }
        let mut best = Infimum {
            value: f64::INFINITY,
            argmin: Vec::new(),
            tol: INFIMUM_TOL * (1.0 + self.lipschitz()),
        };
        for subset in linalg::combinations(planes.len(), n) {
            let rows: Vec<Vec<f64>> = subset.iter().map(|&k| planes[k].0.clone()).collect();
            let rhs: Vec<f64> = subset.iter().map(|&k| planes[k].1).collect();
            if let Some(x) = linalg::solve(&rows, &rhs) {
                if p.contains(&x) {
                    let v = self.eval(&x);
                    if v < best.value {
                        best.value = v;
                        best.argmin = x;
                    }
                }
            }
        }
        Ok(best)
    }

    /// Mean value over `P`.
    pub fn mean(&self, p: &Polytope) -> Result<f64> {
        let vol = p.volume();
        let integral = integrate::integrate(self, p, integrate::default_tolerance(p.dim()))?;
        Ok(integral.value / vol)
    }

    /// `f − mean_P f` together with the applied shift.
    pub fn normalize_mean_zero(&self, p: &Polytope) -> Result<(MaxAffine, f64)> {
        let shift = -self.mean(p)?;
        Ok((self.add_constant(shift), shift))
    }

    /// Measure of the sublevel set `P_a = { x ∈ P : f(x) ≤ a }`.
    pub fn sublevel_volume(&self, p: &Polytope, a: f64, method: SublevelMethod) -> Result<Estimate> {
        self.check_domain(p)?;
        match method {
            SublevelMethod::Exact => {
                let extra: Vec<Halfspace> = self
                    .pieces
                    .iter()
                    .map(|q| Halfspace::new(q.a.iter().map(|v| -v).collect(), q.b - a))
                    .collect();
                let value = match p.intersect(&extra) {
                    Ok(sub) => sub.volume(),
                    Err(Error::Empty) | Err(Error::Degenerate { .. }) => 0.0,
                    Err(e) => return Err(e),
                };
                Ok(Estimate { value, stderr: 0.0 })
            }
            SublevelMethod::MonteCarlo { seed, samples } => {
                let vol = p.volume();
                let pts = p.sample(seed, samples);
                let hits = pts.iter().filter(|x| self.eval(x) <= a).count() as f64;
                let n = samples.max(1) as f64;
                let frac = hits / n;
                Ok(Estimate {
                    value: frac * vol,
                    stderr: vol * (frac * (1.0 - frac) / n).sqrt(),
                })
            }
        }
    }
}

/// Absolute slack of the exact infimum per unit of Lipschitz constant; covers
/// the tolerance of the vertex enumeration.
pub const INFIMUM_TOL: f64 = 1e-9;

/// Default Monte Carlo sample count for sublevel volumes.
pub const SUBLEVEL_SAMPLES: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Infimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Absolute accuracy of `value`.
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SublevelMethod {
    /// Vertex enumeration of `P ∩ {pieces ≤ a}` followed by triangulation.
    Exact,
    MonteCarlo { seed: u64, samples: usize },
}

/// A numerical value with its standard error (zero for exact routes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Relation of an affine expression to zero in a guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub expr: AffinePiece,
    pub relation: Relation,
}

impl Condition {
    fn holds(&self, x: &[f64]) -> bool {
        let v = self.expr.eval(x);
        match self.relation {
            Relation::Lt => v < 0.0,
            Relation::Le => v <= 0.0,
            Relation::Gt => v > 0.0,
            Relation::Ge => v >= 0.0,
        }
    }
}

/// One branch of a piecewise declaration: if all conditions hold, the value
/// is `formula(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub conditions: Vec<Condition>,
    pub formula: AffinePiece,
}

/// Piecewise-affine function given by an ordered guard list (first match wins).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDecl {
    pub guards: Vec<Guard>,
}

impl PiecewiseDecl {
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        self.guards
            .iter()
            .find(|g| g.conditions.iter().all(|c| c.holds(x)))
            .map(|g| g.formula.eval(x))
    }

    /// The steep family on `(0,1)ⁿ`, depending on `x₁` only:
    /// `2m − 1 − 2m²x₁` for `x₁ < 1/m`, `−1` otherwise.
    pub fn steep(n: usize, m: u32) -> Self {
        let m = m as f64;
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let mut ramp = vec![0.0; n];
        ramp[0] = -2.0 * m * m;
        let split = AffinePiece::new(e1, -1.0 / m);
        PiecewiseDecl {
            guards: vec![
                Guard {
                    conditions: vec![Condition { expr: split.clone(), relation: Relation::Lt }],
                    formula: AffinePiece::new(ramp, 2.0 * m - 1.0),
                },
                Guard {
                    conditions: vec![Condition { expr: split, relation: Relation::Ge }],
                    formula: AffinePiece::new(vec![0.0; n], -1.0),
                },
            ],
        }
    }

    /// Converts to the max of the guard formulas and validates the result at
    /// 1000 uniform points of `domain`. Only valid when the declaration is
    /// convex and each formula is the largest one on its own region.
    pub fn to_max_affine(&self, domain: &Polytope, seed: u64) -> Result<MaxAffine> {
        let f = MaxAffine::new(self.guards.iter().map(|g| g.formula.clone()).collect())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let simplices = domain.triangulate();
        for x in crate::polytope::sample_simplices(&simplices, &mut rng, 1000) {
            let Some(declared) = self.eval(&x) else {
                return Err(Error::InvalidArgument(format!("no guard matches {x:?}")));
            };
            let dev = (declared - f.eval(&x)).abs();
            if dev > 1e-12 * declared.abs().max(1.0) {
                return Err(Error::ConversionMismatch { deviation: dev, point: x });
            }
        }
        Ok(f)
    }
}

/// Function JSON: `{"kind": "maxaffine", "pieces": [...]}`,
/// `{"kind": "extremizer_simplex", "n": k}` or
/// `{"kind": "extremizer_steep", "n": k, "m": j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum FunctionSpec {
    #[serde(rename = "maxaffine")]
    MaxAffine { pieces: Vec<AffinePiece> },
    #[serde(rename = "extremizer_simplex")]
    ExtremizerSimplex { n: usize },
    #[serde(rename = "extremizer_steep")]
    ExtremizerSteep { n: usize, m: u32 },
}

impl FunctionSpec {
    /// The function, plus its canonical domain for the extremizer families.
    pub fn resolve(&self) -> Result<(MaxAffine, Option<Polytope>)> {
        match self {
            FunctionSpec::MaxAffine { pieces } => Ok((MaxAffine::new(pieces.clone())?, None)),
            FunctionSpec::ExtremizerSimplex { n } => {
                let (p, f) = crate::inequality::extremizer_simplex(*n)?;
                Ok((f, Some(p)))
            }
            FunctionSpec::ExtremizerSteep { n, m } => {
                let (p, f) = crate::inequality::extremizer_steep(*n, *m)?;
                Ok((f, Some(p)))
            }
        }
    }
}

impl From<&MaxAffine> for FunctionSpec {
    fn from(f: &MaxAffine) -> Self {
        FunctionSpec::MaxAffine { pieces: f.pieces.clone() }
    }
}

impl Serialize for MaxAffine {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MaxAffine {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = FunctionSpec::deserialize(deserializer)?;
        spec.resolve().map(|(f, _)| f).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex_extremizer_2d() -> (Polytope, MaxAffine) {
        (
            Polytope::corner_simplex(2, 1.5).unwrap(),
            MaxAffine::affine(vec![1.0, 1.0], -1.0).unwrap(),
        )
    }

    fn steep(m: u32) -> MaxAffine {
        let m = m as f64;
        MaxAffine::new(vec![
            AffinePiece::new(vec![-2.0 * m * m], 2.0 * m - 1.0),
            AffinePiece::new(vec![0.0], -1.0),
        ])
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let (_, phi) = simplex_extremizer_2d();
        assert_eq!(phi.eval(&[0.5, 0.5]), 0.0);
        let f = steep(2);
        assert_eq!(f.eval(&[0.25]), 1.0);
        assert_eq!(f.eval(&[0.75]), -1.0);
    }

    #[test]
    fn empty_and_mismatched_pieces_rejected() {
        assert!(MaxAffine::new(vec![]).is_err());
        assert!(matches!(
            MaxAffine::new(vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![1.0, 2.0], 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        let twins = MaxAffine::new(vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![1.0], 0.0)]).unwrap();
        assert_eq!(twins.pieces().len(), 1);
    }

    #[test]
    fn infimum_of_affine_on_simplex() {
        let (p, phi) = simplex_extremizer_2d();
        let inf = phi.infimum(&p).unwrap();
        assert_eq!(inf.value, -1.0);
        assert_eq!(inf.argmin, vec![0.0, 0.0]);
    }

    #[test]
    fn infimum_of_steep_family() {
        let p = Polytope::unit_cube(1).unwrap();
        for m in [2, 4, 8, 64] {
            let inf = steep(m).infimum(&p).unwrap();
            assert!((inf.value + 1.0).abs() < 1e-15, "m={m}: {}", inf.value);
        }
    }

    #[test]
    fn infimum_of_abs() {
        let p = Polytope::unit_cube(1).unwrap();
        let f = MaxAffine::new(vec![AffinePiece::new(vec![1.0], -0.3), AffinePiece::new(vec![-1.0], 0.3)]).unwrap();
        let inf = f.infimum(&p).unwrap();
        assert!(inf.value.abs() < 1e-15);
        assert!((inf.argmin[0] - 0.3).abs() < 1e-12);
        let grid = f.infimum_grid(&p).unwrap();
        assert!(grid.value.abs() < 1e-8);
        assert!(grid.value - grid.tol <= inf.value);
        let arrangement = f.infimum_arrangement(&p).unwrap();
        assert!(arrangement.value.abs() < 1e-15);
    }

    #[test]
    fn means_and_normalization() {
        let (p, phi) = simplex_extremizer_2d();
        assert!(phi.mean(&p).unwrap().abs() < 1e-15);
        let (same, shift) = phi.normalize_mean_zero(&p).unwrap();
        assert!(shift.abs() < 1e-15);
        assert!((same.eval(&[0.2, 0.3]) - phi.eval(&[0.2, 0.3])).abs() < 1e-15);

        let c = MaxAffine::constant(2, 3.5).unwrap();
        let (zero, _) = c.normalize_mean_zero(&p).unwrap();
        assert!(zero.eval(&[0.1, 0.1]).abs() < 1e-14);

        let unit = Polytope::unit_cube(1).unwrap();
        let id = MaxAffine::affine(vec![1.0], 0.0).unwrap();
        let (centered, shift) = id.normalize_mean_zero(&unit).unwrap();
        assert!((shift + 0.5).abs() < 1e-15);
        assert!((centered.eval(&[0.0]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn sublevel_volumes_of_simplex_extremizer() {
        // P_a is the corner simplex of side 1 + a, volume (1+a)^n / n!
        let (p, phi) = simplex_extremizer_2d();
        for a in [-0.9, -0.5, 0.0, 0.3, 0.49] {
            let v = phi.sublevel_volume(&p, a, SublevelMethod::Exact).unwrap();
            let expect = (1.0 + a) * (1.0 + a) / 2.0;
            assert!((v.value - expect).abs() < 1e-14, "a={a}: {} vs {expect}", v.value);
        }
        assert_eq!(phi.sublevel_volume(&p, -1.5, SublevelMethod::Exact).unwrap().value, 0.0);
        let full = phi.sublevel_volume(&p, 2.0, SublevelMethod::Exact).unwrap().value;
        assert!((full - 9.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_sublevel_matches_exact() {
        let (p, phi) = simplex_extremizer_2d();
        let mc = phi
            .sublevel_volume(&p, 0.0, SublevelMethod::MonteCarlo { seed: 3, samples: SUBLEVEL_SAMPLES })
            .unwrap();
        assert!((mc.value - 0.5).abs() < 4.0 * mc.stderr, "{mc:?}");
    }

    #[test]
    fn piecewise_conversion_of_steep_family() {
        let p = Polytope::unit_cube(1).unwrap();
        for m in [2u32, 3, 8, 64] {
            let decl = PiecewiseDecl::steep(1, m);
            let f = decl.to_max_affine(&p, 11).unwrap();
            assert_eq!(f, steep(m));
        }
        let cube = Polytope::unit_cube(3).unwrap();
        let f = PiecewiseDecl::steep(3, 4).to_max_affine(&cube, 5).unwrap();
        assert_eq!(f.eval(&[0.1, 0.9, 0.2]), 7.0 - 32.0 * 0.1);
    }

    #[test]
    fn non_convex_declaration_is_caught() {
        // concave tent: conversion to a max must fail
        let p = Polytope::cuboid(&[-1.0], &[1.0]).unwrap();
        let decl = PiecewiseDecl {
            guards: vec![
                Guard {
                    conditions: vec![Condition { expr: AffinePiece::new(vec![1.0], 0.0), relation: Relation::Lt }],
                    formula: AffinePiece::new(vec![1.0], 0.0),
                },
                Guard { conditions: vec![], formula: AffinePiece::new(vec![-1.0], 0.0) },
            ],
        };
        assert!(matches!(decl.to_max_affine(&p, 1), Err(Error::ConversionMismatch { .. })));
    }

    #[test]
    fn function_json() {
        let text = r#"{"kind": "maxaffine", "pieces": [{"a": [1.0, 1.0], "b": -1.0}]}"#;
        let f: MaxAffine = serde_json::from_str(text).unwrap();
        assert_eq!(f.eval(&[0.5, 0.5]), 0.0);
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<MaxAffine>(&back).unwrap(), f);
        let spec: FunctionSpec = serde_json::from_str(r#"{"kind": "extremizer_steep", "n": 2, "m": 4}"#).unwrap();
        let (g, dom) = spec.resolve().unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(dom.unwrap().vertices().len(), 4);
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind": "extremizer_simplex", "n": 2, "x": 1}"#).is_err());
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind": "nope"}"#).is_err());
    }
}
