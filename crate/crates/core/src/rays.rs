//! Toric geodesic rays. On the symplectic side a ray issuing from the
//! background is the line `t ↦ φ₀ + tφ` for a convex direction `φ` on `P`;
//! with `∫_P φ = 0` every `u_t` has zero energy. Its `J` slope is
//! `−inf_P φ` and its `d1` speed is `mean_P |φ|`, so the sharp radial
//! inequality reduces to the polytope inequality for `φ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convexfn::{AffinePiece, MaxAffine};
use crate::error::{Error, Result};
use crate::inequality::{self, InequalityReport, Ratio, VerifyOptions};
use crate::integrate::{self, BisectionOptions};
use crate::toric::{self, FixtureKind, ToricFixture};

/// Times of the finite-`t` `J` diagnostic.
pub const DIAGNOSTIC_TIMES: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

/// Times at which the grid `d1` speed is sampled.
pub const SPEED_TIMES: [f64; 3] = [1.0, 2.0, 4.0];

/// Tolerance of the independent integration used by [`radial_check`].
const RAY_INTEGRATION_TOL: f64 = 1e-8;

/// A ray on a fixture, given by its mean-zero nonconstant direction.
#[derive(Clone, Debug)]
pub struct ToricRay<'a> {
    fixture: &'a ToricFixture,
    direction: MaxAffine,
    depth: f64,
    mean_abs: f64,
    mean_abs_err: f64,
}

impl<'a> ToricRay<'a> {
    /// Requires `∫_P φ = 0` up to the integration error and `φ` nonconstant.
    pub fn new(fixture: &'a ToricFixture, direction: MaxAffine) -> Result<Self> {
        let p = fixture.polytope();
        if direction.dim() != fixture.dim() {
            return Err(Error::DimensionMismatch { expected: fixture.dim(), got: direction.dim() });
        }
        let vol = p.volume();
        let tol = integrate::default_tolerance(fixture.dim());
        let total = integrate::integrate(&direction, p, tol)?;
        let sup = direction.supremum(p)?;
        let inf = direction.infimum(p)?;
        let size = sup.abs().max(inf.value.abs()).max(1.0);
        if total.value.abs() > total.error_bound + 1e-12 * size * vol {
            return Err(Error::InvalidArgument(format!(
                "ray direction must have mean zero, got {}",
                total.value / vol
            )));
        }
        if sup - inf.value <= 1e-12 * size {
            return Err(Error::InvalidArgument("ray direction must be nonconstant".into()));
        }
        let abs = integrate::integrate_abs(&direction, p, tol)?;
        Ok(Self {
            fixture,
            direction,
            depth: -inf.value,
            mean_abs: abs.value / vol,
            mean_abs_err: abs.error_bound / vol,
        })
    }

    /// Shifts `direction` to mean zero first.
    pub fn centered(fixture: &'a ToricFixture, direction: &MaxAffine) -> Result<Self> {
        let (centered, _) = direction.normalize_mean_zero(fixture.polytope())?;
        Self::new(fixture, centered)
    }

    pub fn fixture(&self) -> &ToricFixture {
        self.fixture
    }

    pub fn direction(&self) -> &MaxAffine {
        &self.direction
    }

    /// `j(t) = −inf_P (φ₀ + tφ)`, computed from the closed-form `φ₀`.
    pub fn j_at(&self, t: f64) -> Result<f64> {
        Ok(-self.fixture.inf_along(&self.direction, t)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialJ {
    /// `J{u_t} = −inf_P φ`.
    pub value: f64,
    /// `(t, j(t)/t)` for [`DIAGNOSTIC_TIMES`].
    pub diagnostics: Vec<(f64, f64)>,
    /// Every diagnostic lies within `2·sup|φ₀|/t` of `value`.
    pub within_bound: bool,
}

/// Radial `J` slope together with its finite-time approximations, which
/// converge like `O(1/t)` because `φ₀` is bounded.
pub fn radial_j(ray: &ToricRay) -> Result<RadialJ> {
    let bound = 2.0 * ray.fixture.phi0_sup_abs();
    let mut diagnostics = Vec::with_capacity(DIAGNOSTIC_TIMES.len());
    let mut within_bound = true;
    for t in DIAGNOSTIC_TIMES {
        let ratio = ray.j_at(t)? / t;
        within_bound &= (ratio - ray.depth).abs() <= bound / t;
        diagnostics.push((t, ratio));
    }
    Ok(RadialJ { value: ray.depth, diagnostics, within_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Speed {
    /// `mean_P |φ| = d1(u₀, u₁)`.
    pub value: f64,
    pub error_bound: f64,
    /// `(t, d1(u₀, u_t)/t)` on the fixture grid for [`SPEED_TIMES`].
    pub grid: Vec<(f64, f64)>,
    /// The grid ratios agree to `1e−9`.
    pub constant: bool,
}

/// `d1` speed of the ray, with the constant-speed check on the grid.
pub fn speed(ray: &ToricRay) -> Result<Speed> {
    let background = ray.fixture.background();
    let mut grid = Vec::with_capacity(SPEED_TIMES.len());
    for t in SPEED_TIMES {
        let pot = ray.fixture.along_direction(&ray.direction, t)?;
        grid.push((t, toric::d1(ray.fixture, &background, &pot)? / t));
    }
    let first = grid[0].1;
    let constant = grid.iter().all(|&(_, v)| (v - first).abs() <= 1e-9 * first.abs().max(1.0));
    Ok(Speed { value: ray.mean_abs, error_bound: ray.mean_abs_err, grid, constant })
}

/// The radial inequality `c_n J ≤ d1(u₀,u₁) ≤ 2J` for the ray.
///
/// The returned report is [`inequality::verify`] of the direction on `P`.
/// The ratio is recomputed along an independent route (arrangement
/// infimum, certified bisection integral), and a disagreement beyond the
/// combined tolerance is a [`Error::RouteMismatch`].
pub fn radial_check(ray: &ToricRay) -> Result<InequalityReport> {
    let p = ray.fixture.polytope();
    let report = inequality::verify(p, &ray.direction, VerifyOptions::default())?;
    let Ratio::Finite(ratio) = report.ratio else {
        return Err(Error::RouteMismatch("nonconstant direction reported as constant".into()));
    };
    let vol = p.volume();
    let inf = ray.direction.infimum_arrangement(p)?;
    let abs = integrate::integrate_bisection(
        &ray.direction,
        p,
        BisectionOptions { absolute: true, ..BisectionOptions::new(RAY_INTEGRATION_TOL * vol) },
    )?;
    let depth = -inf.value;
    let ray_ratio = abs.value / vol / depth;
    let ray_tol = (abs.error_bound / vol + ray_ratio * inf.tol) / depth;
    if (ray_ratio - ratio).abs() > report.tol + ray_tol {
        return Err(Error::RouteMismatch(format!(
            "ray ratio {ray_ratio} vs polytope ratio {ratio} (tolerance {})",
            report.tol + ray_tol
        )));
    }
    Ok(InequalityReport { method: format!("{}+ray:{}", report.method, ray.fixture.name()), ..report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupLinearity {
    /// Least-squares slope of `t ↦ ψ_{u_t}(0) − ψ₀(0)`.
    pub slope: f64,
    pub intercept: f64,
    /// Largest residual of the affine fit.
    pub max_deviation: f64,
    /// `sup_P φ₀ − inf_P φ₀`, which bounds the intercept drift.
    pub drift_bound: f64,
}

/// Fits `t ↦ −inf_P(φ₀ + tφ) + inf_P φ₀` by a line; asymptotically its slope
/// is `−inf_P φ`.
pub fn sup_linearity_check(ray: &ToricRay, times: &[f64]) -> Result<SupLinearity> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two times".into()));
    }
    if times[0] < 1.0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("times must be increasing and ≥ 1".into()));
    }
    let base = ray.j_at(0.0)?;
    let ys: Vec<f64> = times.iter().map(|&t| Ok(ray.j_at(t)? - base)).collect::<Result<_>>()?;
    let k = times.len() as f64;
    let mt = times.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = times.iter().map(|t| (t - mt) * (t - mt)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let max_deviation = times.iter().zip(&ys).map(|(t, y)| (y - intercept - slope * t).abs()).fold(0.0, f64::max);
    Ok(SupLinearity { slope, intercept, max_deviation, drift_bound: ray.fixture.phi0_sup_abs() })
}

/// A random nonconstant mean-zero direction on the fixture's polytope:
/// `1..=max_pieces` pieces with coefficients uniform in `[−1,1]`.
pub fn random_direction<R: Rng>(rng: &mut R, fixture: &ToricFixture, max_pieces: usize) -> Result<MaxAffine> {
    let n = fixture.dim();
    let p = fixture.polytope();
    loop {
        let count = rng.gen_range(1..=max_pieces.max(1));
        let f = MaxAffine::new(
            (0..count)
                .map(|_| AffinePiece::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(-1.0..1.0)))
                .collect(),
        )?;
        let sup = f.supremum(p)?;
        let inf = f.infimum(p)?.value;
        if sup - inf > 1e-6 {
            return Ok(f.normalize_mean_zero(p)?.0);
        }
    }
}

/// A named direction on a (possibly rescaled) fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct RayCase {
    pub label: String,
    pub kind: FixtureKind,
    pub scale: f64,
    pub direction: MaxAffine,
}

/// Extremal directions realized on the shipped fixtures: the simplex
/// extremizer on `P1` scaled by 2 and `simplex-FS` scaled by 3/2, and the
/// steep family on `P1` and `P1xP1` for `m = 2, 4, …, m_max`.
pub fn standard_rays(m_max: u32) -> Result<Vec<RayCase>> {
    let mut cases = Vec::new();
    for (kind, scale, n) in [(FixtureKind::P1, 2.0, 1), (FixtureKind::SimplexFs, 1.5, 2)] {
        let (_, direction) = inequality::extremizer_simplex(n)?;
        cases.push(RayCase { label: format!("simplex n={n}"), kind, scale, direction });
    }
    for (kind, n) in [(FixtureKind::P1, 1), (FixtureKind::P1xP1, 2)] {
        let mut m = 2;
        while m <= m_max {
            let (_, direction) = inequality::extremizer_steep(n, m)?;
            cases.push(RayCase { label: format!("steep n={n} m={m}"), kind, scale: 1.0, direction });
            m *= 2;
        }
    }
    Ok(cases)
}
