//! Toric dictionary. A torus-invariant Kähler potential `u` on a toric
//! manifold corresponds to a convex function `ψ_u = ψ₀ + u∘E` on `ℝⁿ`
//! (`E(x) = (e^{x₁},…,e^{xₙ})`), and its Legendre transform `φ_u = ψ_u*` is a
//! convex function on the moment polytope `P`. In these coordinates
//!
//! - `d1(u₀,u₁) = (1/μ(P)) ∫_P |φ_{u₀} − φ_{u₁}|`,
//! - `I(u) = −(1/μ(P)) ∫_P (φ_u − φ₀)`,
//! - `−inf_P φ_u = ψ_u(0)`, which controls `J(u)` up to a manifold constant,
//! - `V = πⁿ n! μ(P)`.
//!
//! Potentials live on a truncated box `[−R,R]ⁿ`; symplectic potentials are
//! gridded over a slightly shrunk bounding box of `P` and only the nodes
//! well inside `P` enter the averages, since `φ_u` may be steep at `∂P`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convexfn::MaxAffine;
use crate::error::{Error, Result};
use crate::legendre::{self, GridFunction};
use crate::polytope::{factorial, Polytope};

/// Half-width of the potential-side box.
pub const TRUNCATION_RADIUS: f64 = 20.0;

/// Relative inset of the dual grid and of the interior mask.
pub const BOUNDARY_MARGIN: f64 = 1e-3;

/// Discrete convexity slack accepted for potentials, relative to their size.
const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixtureKind {
    /// `ψ₀ = log(1+eˣ) − log 2` on `ℝ`, `P = (0,1)`.
    #[serde(rename = "P1")]
    P1,
    /// Sum of two copies of the `P1` potential, `P = (0,1)²`.
    #[serde(rename = "P1xP1")]
    P1xP1,
    /// Fubini-Study on the projective plane: `ψ₀ = log(1+e^{x₁}+e^{x₂}) − log 3`,
    /// `P` the open unit simplex.
    #[serde(rename = "simplex-FS")]
    SimplexFs,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 3] = [FixtureKind::P1, FixtureKind::P1xP1, FixtureKind::SimplexFs];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::P1 => "P1",
            FixtureKind::P1xP1 => "P1xP1",
            FixtureKind::SimplexFs => "simplex-FS",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            FixtureKind::P1 => 1,
            FixtureKind::P1xP1 | FixtureKind::SimplexFs => 2,
        }
    }

    /// Moment polytope at unit scale.
    pub fn polytope(self) -> Polytope {
        let p = match self {
            FixtureKind::P1 => Polytope::unit_cube(1),
            FixtureKind::P1xP1 => Polytope::unit_cube(2),
            FixtureKind::SimplexFs => Polytope::corner_simplex(2, 1.0),
        };
        p.expect("fixture polytopes are full-dimensional")
    }

    /// Total volume `∫ ωⁿ` of the manifold at unit scale.
    pub fn volume(self) -> f64 {
        match self {
            FixtureKind::P1 => PI,
            FixtureKind::P1xP1 => 2.0 * PI * PI,
            FixtureKind::SimplexFs => PI * PI,
        }
    }

    /// `ψ₀` at unit scale, normalized by `ψ₀(0) = 0`.
    pub fn psi0(self, x: &[f64]) -> f64 {
        match self {
            FixtureKind::P1 => softplus(x[0]) - LN_2,
            FixtureKind::P1xP1 => softplus(x[0]) + softplus(x[1]) - 2.0 * LN_2,
            FixtureKind::SimplexFs => {
                let m = x.iter().copied().fold(0.0, f64::max);
                m + ((-m).exp() + x.iter().map(|v| (v - m).exp()).sum::<f64>()).ln() - 3f64.ln()
            }
        }
    }

    pub fn grad_psi0(self, x: &[f64]) -> Vec<f64> {
        match self {
            FixtureKind::P1 | FixtureKind::P1xP1 => x.iter().map(|&v| logistic(v)).collect(),
            FixtureKind::SimplexFs => {
                let m = x.iter().copied().fold(0.0, f64::max);
                let weights: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
                let total = (-m).exp() + weights.iter().sum::<f64>();
                weights.into_iter().map(|w| w / total).collect()
            }
        }
    }

    /// Closed-form `φ₀ = ψ₀*` on the closure of `P` (entropy form).
    pub fn phi0(self, s: &[f64]) -> f64 {
        match self {
            FixtureKind::P1 => xlogx(s[0]) + xlogx(1.0 - s[0]) + LN_2,
            FixtureKind::P1xP1 => s.iter().map(|&v| xlogx(v) + xlogx(1.0 - v)).sum::<f64>() + 2.0 * LN_2,
            FixtureKind::SimplexFs => {
                s.iter().map(|&v| xlogx(v)).sum::<f64>() + xlogx(1.0 - s.iter().sum::<f64>()) + 3f64.ln()
            }
        }
    }

    /// `sup_P |φ₀|` at unit scale (`inf_P φ₀ = −ψ₀(0) = 0`).
    pub fn phi0_sup_abs(self) -> f64 {
        match self {
            FixtureKind::P1 => LN_2,
            FixtureKind::P1xP1 => 2.0 * LN_2,
            FixtureKind::SimplexFs => 3f64.ln(),
        }
    }

    /// Default `(potential, dual)` nodes per axis.
    pub fn default_nodes(self) -> (usize, usize) {
        match self.dim() {
            1 => (1025, 257),
            _ => (129, 129),
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownFixture(s.to_string()))
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// A background potential `ψ₀` scaled by `c` (so `P` becomes `cP`), sampled
/// on `[−R,R]ⁿ`, together with its gridded transform `φ₀` and the interior
/// mask of the dual grid.
#[derive(Clone, Debug)]
pub struct ToricFixture {
    kind: FixtureKind,
    scale: f64,
    polytope: Polytope,
    psi0: GridFunction,
    phi0: GridFunction,
    mask: Vec<bool>,
    masked: usize,
}

/// A symplectic potential `φ_u` on a fixture's dual grid, with the
/// potential-side data when it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ToricPotential {
    psi: Option<GridFunction>,
    phi: GridFunction,
}

impl ToricPotential {
    pub fn phi(&self) -> &GridFunction {
        &self.phi
    }

    pub fn psi(&self) -> Option<&GridFunction> {
        self.psi.as_ref()
    }

    /// The potential of `u + c`: `ψ` rises by `c`, `φ` drops by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Ok(Self {
            psi: self.psi.as_ref().map(|g| g.map(|v| v + c)).transpose()?,
            phi: self.phi.map(|v| v - c)?,
        })
    }
}

impl ToricFixture {
    pub fn new(kind: FixtureKind) -> Result<Self> {
        Self::with_scale(kind, 1.0)
    }

    pub fn with_scale(kind: FixtureKind, scale: f64) -> Result<Self> {
        let (potential, dual) = kind.default_nodes();
        Self::with_grids(kind, scale, potential, dual)
    }

    /// Fixture with `ψ = c·ψ₀`, whose moment polytope is `c·P`.
    pub fn with_grids(kind: FixtureKind, scale: f64, potential_nodes: usize, dual_nodes: usize) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("fixture scale must be positive, got {scale}")));
        }
        if potential_nodes < 2 || dual_nodes < 2 {
            return Err(Error::InvalidArgument("fixture grids need at least two nodes per axis".into()));
        }
        let n = kind.dim();
        let polytope = kind.polytope().scaled(scale)?;
        let psi0 = GridFunction::from_fn(
            vec![(-TRUNCATION_RADIUS, TRUNCATION_RADIUS); n],
            vec![potential_nodes; n],
            |x| scale * kind.psi0(x),
        )?;
        let (lo, hi) = polytope.bounding_box();
        let dual_box: Vec<(f64, f64)> = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| {
                let inset = BOUNDARY_MARGIN * (h - l);
                (l + inset, h - inset)
            })
            .collect();
        let phi0 = legendre::fast_separable_fenchel(&psi0, &dual_box, &vec![dual_nodes; n])?;
        let margin = BOUNDARY_MARGIN * scale;
        let mask: Vec<bool> = (0..phi0.len()).map(|i| polytope.depth(&phi0.node(i)) >= margin).collect();
        let masked = mask.iter().filter(|&&m| m).count();
        if masked == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { kind, scale, polytope, psi0, phi0, mask, masked })
    }

    pub fn kind(&self) -> FixtureKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn psi0(&self) -> &GridFunction {
        &self.psi0
    }

    pub fn phi0(&self) -> &GridFunction {
        &self.phi0
    }

    /// Dual-grid nodes that enter averages and minima.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.masked
    }

    /// Analytic `∫ ωⁿ`, scaling like `cⁿ`.
    pub fn declared_volume(&self) -> f64 {
        self.kind.volume() * self.scale.powi(self.dim() as i32)
    }

    pub fn psi0_exact(&self, x: &[f64]) -> f64 {
        self.scale * self.kind.psi0(x)
    }

    pub fn grad_psi0(&self, x: &[f64]) -> Vec<f64> {
        self.kind.grad_psi0(x).into_iter().map(|g| self.scale * g).collect()
    }

    /// Closed-form `φ₀(s) = c·φ₀¹(s/c)` on the closure of `P`.
    pub fn phi0_exact(&self, s: &[f64]) -> f64 {
        let unit: Vec<f64> = s.iter().map(|v| v / self.scale).collect();
        self.scale * self.kind.phi0(&unit)
    }

    /// `sup_P |φ₀|`.
    pub fn phi0_sup_abs(&self) -> f64 {
        self.scale * self.kind.phi0_sup_abs()
    }

    /// Largest gap between the gridded and the closed-form `φ₀` over masked nodes.
    pub fn phi0_grid_error(&self) -> f64 {
        self.masked_values(&self.phi0)
            .map(|(i, v)| (v - self.phi0_exact(&self.phi0.node(i))).abs())
            .fold(0.0, f64::max)
    }

    fn masked_values<'a>(&'a self, g: &'a GridFunction) -> impl Iterator<Item = (usize, f64)> + 'a {
        g.values().iter().enumerate().filter(move |(i, _)| self.mask[*i]).map(|(i, &v)| (i, v))
    }

    fn check(&self, pot: &ToricPotential) -> Result<()> {
        if !pot.phi.same_grid(&self.phi0) {
            return Err(Error::GridMismatch(format!("potential is not on the {} dual grid", self.name())));
        }
        Ok(())
    }

    /// `u = 0`.
    pub fn background(&self) -> ToricPotential {
        ToricPotential { psi: Some(self.psi0.clone()), phi: self.phi0.clone() }
    }

    /// `ψ₀ + u` on the potential grid.
    pub fn perturbed(&self, u: &MaxAffine) -> Result<GridFunction> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.dim() });
        }
        let values = (0..self.psi0.len()).map(|i| self.psi0.values()[i] + u.eval(&self.psi0.node(i))).collect();
        self.psi0.with_values(values)
    }

    /// The symplectic potential `φ₀ + tφ` of the ray in direction `φ`, sampled
    /// on the dual grid. No potential-side data is attached.
    pub fn along_direction(&self, direction: &MaxAffine, t: f64) -> Result<ToricPotential> {
        if direction.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: direction.dim() });
        }
        let values = (0..self.phi0.len())
            .map(|i| self.phi0.values()[i] + t * direction.eval(&self.phi0.node(i)))
            .collect();
        Ok(ToricPotential { psi: None, phi: self.phi0.with_values(values)? })
    }

    /// `inf` over the closure of `P` of the exact `φ₀ + tφ`.
    ///
    /// On each linearity cell of `φ` (slope `a`) the function is smooth and
    /// strictly convex with free minimizer `∇ψ₀(−t·a)`; when that point leaves
    /// the cell the minimum sits on the cell boundary, found by golden-section
    /// search along each edge.
    pub fn inf_along(&self, direction: &MaxAffine, t: f64) -> Result<f64> {
        if self.dim() > 2 {
            return Err(Error::InvalidArgument("boundary search supports n ≤ 2".into()));
        }
        let g = |s: &[f64]| self.phi0_exact(s) + t * direction.eval(s);
        let mut best = f64::INFINITY;
        for (i, cell) in direction.cells(&self.polytope)? {
            let slope: Vec<f64> = direction.pieces()[i].a.iter().map(|v| -t * v).collect();
            let free = self.grad_psi0(&slope);
            if cell.depth(&free) >= -1e-12 {
                best = best.min(g(&free));
            }
            for facet in cell.facet_vertices() {
                best = best.min(match facet.as_slice() {
                    [v] => g(v),
                    [a, b] => golden_section_segment(&g, a, b),
                    _ => return Err(Error::InvalidArgument("unexpected facet shape".into())),
                });
            }
        }
        Ok(best)
    }
}

/// Minimum of a convex function along the segment `[a, b]`.
fn golden_section_segment(g: &impl Fn(&[f64]) -> f64, a: &[f64], b: &[f64]) -> f64 {
    let point = |lambda: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect() };
    let h = |lambda: f64| g(&point(lambda));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..100 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = h(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = h(x2);
        }
    }
    f1.min(f2).min(h(0.0)).min(h(1.0))
}

/// `φ_u = ψ_u*` on the fixture's dual grid. `psi_u` must live on the
/// fixture's potential grid and be discretely convex.
pub fn symplectic_potential(fix: &ToricFixture, psi_u: &GridFunction) -> Result<ToricPotential> {
    if !psi_u.same_grid(&fix.psi0) {
        return Err(Error::GridMismatch(format!("potential is not on the {} potential grid", fix.name())));
    }
    let size = psi_u.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let defect = psi_u.convexity_defect();
    if defect > CONVEXITY_TOL * size {
        return Err(Error::NotConvex(format!("second difference {:.3e} below zero", defect)));
    }
    let phi = legendre::fast_separable_fenchel(psi_u, fix.phi0.bounds(), fix.phi0.shape())?;
    Ok(ToricPotential { psi: Some(psi_u.clone()), phi })
}

fn masked_mean(fix: &ToricFixture, values: impl Iterator<Item = f64>) -> f64 {
    let sum: f64 = values.zip(&fix.mask).filter(|(_, &m)| m).map(|(v, _)| v).sum();
    sum / fix.masked as f64
}

/// `d1(u₀,u₁)`: mean of `|φ_{u₀} − φ_{u₁}|` over masked nodes.
pub fn d1(fix: &ToricFixture, pot0: &ToricPotential, pot1: &ToricPotential) -> Result<f64> {
    fix.check(pot0)?;
    fix.check(pot1)?;
    Ok(masked_mean(fix, pot0.phi.values().iter().zip(pot1.phi.values()).map(|(a, b)| (a - b).abs())))
}

/// Monge-Ampère energy `I(u) = −mean(φ_u − φ₀)`.
pub fn energy_i(fix: &ToricFixture, pot: &ToricPotential) -> Result<f64> {
    fix.check(pot)?;
    Ok(-masked_mean(fix, pot.phi.values().iter().zip(fix.phi0.values()).map(|(a, b)| a - b)))
}

/// The potential of `u − I(u)`, which has zero energy.
pub fn normalize_i(fix: &ToricFixture, pot: &ToricPotential) -> Result<ToricPotential> {
    let i = energy_i(fix, pot)?;
    pot.shifted(-i)
}

/// `−min φ_u` over masked nodes, the proxy for `J(u)` (equal to `ψ_u(0)` in
/// the continuum, and within a manifold constant of `J` once `I(u) = 0`).
pub fn j_proxy(fix: &ToricFixture, pot: &ToricPotential) -> Result<f64> {
    fix.check(pot)?;
    Ok(-fix.masked_values(&pot.phi).map(|(_, v)| v).fold(f64::INFINITY, f64::min))
}

/// `I(u) + I(v) − 2I(w)` where `φ_w = max(φ_u, φ_v)` is the image of the
/// rooftop envelope of `u` and `v`.
pub fn d1_via_rooftop(fix: &ToricFixture, pot0: &ToricPotential, pot1: &ToricPotential) -> Result<f64> {
    fix.check(pot0)?;
    fix.check(pot1)?;
    let roof = ToricPotential { psi: None, phi: pot0.phi.zip_with(&pot1.phi, f64::max)? };
    Ok(energy_i(fix, pot0)? + energy_i(fix, pot1)? - 2.0 * energy_i(fix, &roof)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeCheck {
    /// Declared `∫ ωⁿ`.
    pub lhs: f64,
    /// `πⁿ n! μ(P)`.
    pub rhs: f64,
    pub relerr: f64,
}

pub fn volume_check(fix: &ToricFixture) -> VolumeCheck {
    let n = fix.dim();
    let lhs = fix.declared_volume();
    let rhs = PI.powi(n as i32) * factorial(n) * fix.polytope.volume();
    VolumeCheck { lhs, rhs, relerr: (lhs - rhs).abs() / lhs.abs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_names_round_trip() {
        for k in FixtureKind::ALL {
            assert_eq!(k.name().parse::<FixtureKind>().unwrap(), k);
        }
        assert_eq!("CP3".parse::<FixtureKind>(), Err(Error::UnknownFixture("CP3".into())));
    }

    #[test]
    fn closed_forms_are_conjugate() {
        for k in FixtureKind::ALL {
            let x = vec![0.3; k.dim()];
            let s = k.grad_psi0(&x);
            let lhs = k.phi0(&s) + k.psi0(&x);
            let rhs: f64 = s.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-14, "{k}");
            assert!(k.psi0(&vec![0.0; k.dim()]).abs() < 1e-15);
        }
    }

    #[test]
    fn gridded_background_matches_closed_form() {
        for k in FixtureKind::ALL {
            let fix = ToricFixture::new(k).unwrap();
            assert!(fix.phi0_grid_error() < 1e-2, "{k}: {}", fix.phi0_grid_error());
            assert!(j_proxy(&fix, &fix.background()).unwrap().abs() < 1e-2);
        }
    }

    #[test]
    fn shift_rule() {
        let fix = ToricFixture::new(FixtureKind::P1).unwrap();
        let psi = fix.psi0().map(|v| v + 0.7).unwrap();
        let pot = symplectic_potential(&fix, &psi).unwrap();
        assert!((d1(&fix, &fix.background(), &pot).unwrap() - 0.7).abs() < 1e-12);
        assert!((energy_i(&fix, &pot).unwrap() - 0.7).abs() < 1e-12);
        let normalized = normalize_i(&fix, &pot).unwrap();
        assert!(energy_i(&fix, &normalized).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_convex_potential_rejected() {
        let fix = ToricFixture::new(FixtureKind::P1).unwrap();
        let psi = GridFunction::from_fn(fix.psi0().bounds().to_vec(), fix.psi0().shape().to_vec(), |x| -x[0] * x[0])
            .unwrap();
        assert!(matches!(symplectic_potential(&fix, &psi), Err(Error::NotConvex(_))));
    }

    #[test]
    fn volumes() {
        for k in FixtureKind::ALL {
            for c in [1.0, 1.5, 2.0] {
                let v = volume_check(&ToricFixture::with_grids(k, c, 9, 9).unwrap());
                assert!(v.relerr <= 1e-12, "{k} at {c}: {v:?}");
            }
        }
    }

    #[test]
    fn inf_along_affine_direction_on_p1() {
        let fix = ToricFixture::new(FixtureKind::P1).unwrap();
        let phi = MaxAffine::affine(vec![1.0], -0.5).unwrap();
        // min over s of s log s + (1−s) log(1−s) + log 2 + t(s − 1/2), attained at s = 1/(1+e^t)
        for t in [0.0, 1.0, 8.0] {
            let s: f64 = 1.0 / (1.0 + f64::exp(t));
            let exact = xlogx(s) + xlogx(1.0 - s) + LN_2 + t * (s - 0.5);
            assert!((fix.inf_along(&phi, t).unwrap() - exact).abs() < 1e-13);
        }
    }
}
