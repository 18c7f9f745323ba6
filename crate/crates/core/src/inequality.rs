//! The sharp double inequality for mean-zero convex functions on a bounded
//! convex polytope `P ⊂ ℝⁿ`:
//!
//! ```text
//! c_n · (−inf_P φ)  ≤  (1/μ(P)) ∫_P |φ|  ≤  2 · (−inf_P φ),
//! c_n = (2/(n+1)) · (n/(n+1))ⁿ
//! ```
//!
//! [`verify`] measures where a given instance falls between the two
//! constants, with explicit tolerance accounting. The extremizer families
//! realize each bound (exactly for the lower one, in the limit `m → ∞` for
//! the upper one).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::convexfn::{AffinePiece, MaxAffine, PiecewiseDecl, SublevelMethod};
use crate::error::{Error, Result};
use crate::integrate::{self, BisectionOptions, Integral};
use crate::polytope::Polytope;

pub const UPPER_CONSTANT: f64 = 2.0;

/// `c_n = (2/(n+1))·(n/(n+1))ⁿ`, the optimal lower constant.
pub fn lower_constant(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let nf = n as f64;
    Ok(2.0 / (nf + 1.0) * (nf / (nf + 1.0)).powi(n as i32))
}

/// The pre-existing coarse lower constant `2^(−2n−6)`.
pub fn baseline_lower_constant(n: usize) -> f64 {
    2f64.powi(-(2 * n as i32) - 6)
}

/// Ratio `mean|φ| / (−inf φ)`, or the sentinel for constant functions where
/// both sides vanish.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Constant,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Constant => None,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => serializer.serialize_f64(*r),
            Ratio::Constant => serializer.serialize_str("constant"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(r) => Ok(Ratio::Finite(r)),
            Raw::Str(s) if s == "constant" => Ok(Ratio::Constant),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unexpected ratio `{s}`"))),
        }
    }
}

/// Everything [`verify`] measured for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityReport {
    pub n: usize,
    pub vol: f64,
    pub mean_abs: f64,
    pub inf: f64,
    pub ratio: Ratio,
    pub lower: f64,
    pub upper: f64,
    pub lower_margin: Option<f64>,
    pub upper_margin: Option<f64>,
    /// Constant added to the input to make its mean zero.
    pub shift: f64,
    /// Absolute uncertainty ε of `ratio`.
    pub tol: f64,
    pub method: String,
}

impl InequalityReport {
    /// `c_n − ε ≤ ratio ≤ 2 + ε`; constant inputs pass vacuously.
    pub fn within_bounds(&self) -> bool {
        match self.ratio {
            Ratio::Constant => true,
            Ratio::Finite(r) => r >= self.lower - self.tol && r <= self.upper + self.tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IntegrationMethod {
    /// Exact integration after cutting along kinks and zero sets.
    #[default]
    Cuts,
    /// Certified longest-edge bisection.
    Bisection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    /// Integration tolerance; defaults to [`integrate::default_tolerance`].
    pub tol: Option<f64>,
    pub method: IntegrationMethod,
}

fn run_integral(f: &MaxAffine, p: &Polytope, tol: f64, method: IntegrationMethod, absolute: bool) -> Result<Integral> {
    match (method, absolute) {
        (IntegrationMethod::Cuts, false) => integrate::integrate(f, p, tol),
        (IntegrationMethod::Cuts, true) => integrate::integrate_abs(f, p, tol),
        (IntegrationMethod::Bisection, absolute) => {
            integrate::integrate_bisection(f, p, BisectionOptions { absolute, ..BisectionOptions::new(tol) })
        }
    }
}

/// Measures `φ` on `P` against both constants. The input is first shifted
/// to mean zero (the shift is recorded in the report).
pub fn verify(p: &Polytope, phi: &MaxAffine, opts: VerifyOptions) -> Result<InequalityReport> {
    let n = p.dim();
    if phi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.dim() });
    }
    let tol = opts.tol.unwrap_or_else(|| integrate::default_tolerance(n));
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let method = match opts.method {
        IntegrationMethod::Cuts => "cuts",
        IntegrationMethod::Bisection => "bisection",
    };
    let vol = p.volume();
    let lower = lower_constant(n)?;

    let total = run_integral(phi, p, tol, opts.method, false)?;
    // `+ 0.0` turns −0 into +0
    let shift = -total.value / vol + 0.0;
    let shift_err = total.error_bound / vol;
    let centered = phi.add_constant(shift);

    let inf = centered.infimum(p)?;
    let sup = centered.supremum(p)?;
    let scale = sup.abs().max(inf.value.abs()).max(1.0);
    if phi.is_constant() || sup - inf.value <= 1e-12 * scale || inf.value >= 0.0 {
        return Ok(InequalityReport {
            n,
            vol,
            mean_abs: 0.0,
            inf: inf.value,
            ratio: Ratio::Constant,
            lower,
            upper: UPPER_CONSTANT,
            lower_margin: None,
            upper_margin: None,
            shift,
            tol: 0.0,
            method: format!("{method}/constant"),
        });
    }

    let abs = run_integral(&centered, p, tol, opts.method, true)?;
    let mean_abs = abs.value / vol;
    let depth = -inf.value;
    let ratio = mean_abs / depth;
    let mean_abs_err = abs.error_bound / vol + shift_err;
    let depth_err = inf.tol + shift_err;
    let eps = (mean_abs_err + depth_err * ratio) / depth;
    Ok(InequalityReport {
        n,
        vol,
        mean_abs,
        inf: inf.value,
        ratio: Ratio::Finite(ratio),
        lower,
        upper: UPPER_CONSTANT,
        lower_margin: Some(ratio - lower),
        upper_margin: Some(UPPER_CONSTANT - ratio),
        shift,
        tol: eps,
        method: method.to_string(),
    })
}

/// The coarse bounds `2^(−2n−6) ≤ ratio ≤ 2 + ε`.
pub fn baseline_constants_check(report: &InequalityReport) -> bool {
    match report.ratio {
        Ratio::Constant => true,
        Ratio::Finite(r) => r >= baseline_lower_constant(report.n) && r <= UPPER_CONSTANT + report.tol,
    }
}

/// Lower-bound extremizer: the simplex with vertices `0, ((n+1)/n)e_k` and
/// `φ(x) = −1 + x₁ + … + xₙ`, which integrates to zero on it.
pub fn extremizer_simplex(n: usize) -> Result<(Polytope, MaxAffine)> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let side = (n as f64 + 1.0) / n as f64;
    let p = Polytope::corner_simplex(n, side)?;
    let phi = MaxAffine::affine(vec![1.0; n], -1.0)?;
    Ok((p, phi))
}

/// Upper-bound family on `(0,1)ⁿ`: `φ = max(2m − 1 − 2m²x₁, −1)`, mean zero.
pub fn extremizer_steep(n: usize, m: u32) -> Result<(Polytope, MaxAffine)> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("steep family needs m ≥ 2, got {m}")));
    }
    let p = Polytope::unit_cube(n)?;
    let phi = PiecewiseDecl::steep(n, m).to_max_affine(&p, u64::from(m))?;
    Ok((p, phi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingCheck {
    /// `μ(P_b)`
    pub lhs: f64,
    /// `((1+b)/(1+a))ⁿ μ(P_a)`
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Rescales (or, when `inf ≥ 0`, shifts) `φ` so that `inf_P φ = −1`.
pub fn normalize_infimum(p: &Polytope, phi: &MaxAffine) -> Result<MaxAffine> {
    let inf = phi.infimum(p)?.value;
    if inf < 0.0 {
        phi.scale(-1.0 / inf)
    } else {
        Ok(phi.add_constant(-1.0 - inf))
    }
}

/// Checks `μ(P_b) ≤ ((1+b)/(1+a))ⁿ μ(P_a)` for `−1 < a < b` after
/// normalizing `inf_P φ = −1`.
pub fn sublevel_scaling_check(
    p: &Polytope,
    phi: &MaxAffine,
    a: f64,
    b: f64,
    method: SublevelMethod,
) -> Result<ScalingCheck> {
    if !(-1.0 < a && a < b) {
        return Err(Error::InvalidArgument(format!("need −1 < a < b, got a = {a}, b = {b}")));
    }
    let f = normalize_infimum(p, phi)?;
    let vol_a = f.sublevel_volume(p, a, method)?;
    let vol_b = f.sublevel_volume(p, b, method)?;
    let factor = ((1.0 + b) / (1.0 + a)).powi(p.dim() as i32);
    let lhs = vol_b.value;
    let rhs = factor * vol_a.value;
    let tol = match method {
        SublevelMethod::Exact => 1e-10 * p.volume(),
        SublevelMethod::MonteCarlo { .. } => 4.0 * (vol_b.stderr.powi(2) + (factor * vol_a.stderr).powi(2)).sqrt(),
    };
    Ok(ScalingCheck { lhs, rhs, tol, pass: lhs <= rhs + tol })
}

/// Parameters of the random instance generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    /// Upper bound on the number of affine pieces.
    pub max_pieces: usize,
    pub verify: VerifyOptions,
}

impl ScanParams {
    pub fn new(seed: u64, count: usize, dim: usize) -> Self {
        Self { seed, count, dim, max_pieces: 12, verify: VerifyOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub reports: Vec<InequalityReport>,
    /// Degenerate random polytopes thrown away and regenerated.
    pub discarded: usize,
}

impl ScanResult {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| !r.within_bounds()).count()
    }
}

fn uniform_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// A random polytope (hull of uniform points, box, or simplex in `[−1,1]ⁿ`,
/// each with probability 1/3) and a random max-affine function with
/// `1..=max_pieces` pieces whose coefficients are uniform in `[−1,1]`.
/// Returns the number of degenerate polytopes rejected along the way.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, max_pieces: usize) -> Result<(Polytope, MaxAffine, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut discarded = 0;
    let p = loop {
        let attempt = match rng.gen_range(0..3) {
            0 => {
                let k = rng.gen_range(n + 1..=n + 8);
                Polytope::from_vertices(n, (0..k).map(|_| uniform_point(rng, n)).collect())
            }
            1 => {
                let (lo, hi): (Vec<f64>, Vec<f64>) = (0..n)
                    .map(|_| {
                        let x = rng.gen_range(-1.0..1.0);
                        let y = rng.gen_range(-1.0..1.0);
                        if x < y {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    })
                    .unzip();
                Polytope::cuboid(&lo, &hi)
            }
            _ => Polytope::simplex((0..=n).map(|_| uniform_point(rng, n)).collect()),
        };
        // thin instances are as degenerate as flat ones for the tolerances in use
        match attempt {
            Ok(p) if p.volume() > 1e-3 => break p,
            Ok(_) | Err(Error::Degenerate { .. }) => discarded += 1,
            Err(e) => return Err(e),
        }
    };
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let f = MaxAffine::new(
        (0..pieces)
            .map(|_| AffinePiece::new(uniform_point(rng, n), rng.gen_range(-1.0..1.0)))
            .collect(),
    )?;
    Ok((p, f, discarded))
}

/// Seeded random scan. Instance `i` uses stream `i` of a ChaCha8 generator
/// seeded with `seed`, so results do not depend on scheduling.
pub fn scan_random(params: ScanParams) -> Result<ScanResult> {
    if params.dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let outcomes: Vec<Result<(InequalityReport, usize)>> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let (p, f, discarded) = random_instance(&mut rng, params.dim, params.max_pieces)?;
            Ok((verify(&p, &f, params.verify)?, discarded))
        })
        .collect();
    let mut reports = Vec::with_capacity(params.count);
    let mut discarded = 0;
    for o in outcomes {
        let (r, d) = o?;
        reports.push(r);
        discarded += d;
    }
    Ok(ScanResult { reports, discarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_constants() {
        assert_eq!(lower_constant(1).unwrap(), 0.5);
        assert!((lower_constant(2).unwrap() - 8.0 / 27.0).abs() < 1e-16);
        assert!((lower_constant(5).unwrap() - (2.0 / 6.0) * (5.0f64 / 6.0).powi(5)).abs() < 1e-16);
        assert!(lower_constant(0).is_err());
    }

    #[test]
    fn simplex_extremizer_attains_lower_bound() {
        for n in 1..=3 {
            let (p, phi) = extremizer_simplex(n).unwrap();
            let r = verify(&p, &phi, VerifyOptions::default()).unwrap();
            assert!(r.lower_margin.unwrap().abs() < 1e-9, "n={n}: {r:?}");
            assert!(r.within_bounds());
        }
        let (p, phi) = extremizer_simplex(1).unwrap();
        let r = verify(&p, &phi, VerifyOptions::default()).unwrap();
        assert!((r.vol - 2.0).abs() < 1e-15);
        assert!((r.mean_abs * r.vol - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_coordinate_on_symmetric_cube() {
        for n in 1..=3 {
            let p = Polytope::cuboid(&vec![-1.0; n], &vec![1.0; n]).unwrap();
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            let f = MaxAffine::affine(a, 0.0).unwrap();
            let r = verify(&p, &f, VerifyOptions::default()).unwrap();
            assert!((r.ratio.value().unwrap() - 0.5).abs() < 1e-12, "n={n}: {r:?}");
        }
    }

    #[test]
    fn steep_family_ratio() {
        let (p, f) = extremizer_steep(1, 8).unwrap();
        let r = verify(&p, &f, VerifyOptions::default()).unwrap();
        assert!((r.ratio.value().unwrap() - 1.7578125).abs() < 1e-9, "{r:?}");
        assert!(r.shift.abs() < 1e-14);
        assert_eq!(f.pieces()[0], AffinePiece::new(vec![-128.0], 15.0));
        assert!(extremizer_steep(1, 1).is_err());
    }

    #[test]
    fn constant_input_gives_sentinel() {
        let p = Polytope::unit_cube(2).unwrap();
        let f = MaxAffine::constant(2, 4.0).unwrap();
        let r = verify(&p, &f, VerifyOptions::default()).unwrap();
        assert_eq!(r.ratio, Ratio::Constant);
        assert!((r.shift + 4.0).abs() < 1e-14);
        assert!(r.within_bounds());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["ratio"], "constant");
        let back: InequalityReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn scaling_equality_on_simplex_extremizer() {
        for n in 1..=3 {
            let (p, phi) = extremizer_simplex(n).unwrap();
            let c = sublevel_scaling_check(&p, &phi, -0.5, 0.0, SublevelMethod::Exact).unwrap();
            assert!(c.pass);
            assert!((c.lhs / (c.rhs / 2f64.powi(n as i32)) - 2f64.powi(n as i32)).abs() < 1e-9);
            assert!((c.lhs - c.rhs).abs() < 1e-12, "{c:?}");
        }
        let (p, phi) = extremizer_simplex(2).unwrap();
        assert!(sublevel_scaling_check(&p, &phi, 0.2, 0.1, SublevelMethod::Exact).is_err());
        let c = sublevel_scaling_check(&p, &phi, 0.1 - 1e-6, 0.1, SublevelMethod::Exact).unwrap();
        assert!(c.pass && (c.rhs / c.lhs - 1.0).abs() < 1e-5);
    }

    #[test]
    fn baseline_is_implied() {
        let (p, phi) = extremizer_simplex(3).unwrap();
        let r = verify(&p, &phi, VerifyOptions::default()).unwrap();
        assert!(baseline_constants_check(&r));
        assert!(lower_constant(3).unwrap() > baseline_lower_constant(3));
        assert_eq!(baseline_lower_constant(1), 1.0 / 256.0);
    }

    #[test]
    fn empty_scan() {
        let r = scan_random(ScanParams::new(1, 0, 2)).unwrap();
        assert!(r.reports.is_empty());
        assert!(scan_random(ScanParams::new(1, 3, 0)).is_err());
    }

    #[test]
    fn scan_is_deterministic() {
        let a = scan_random(ScanParams::new(42, 8, 2)).unwrap();
        let b = scan_random(ScanParams::new(42, 8, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations(), 0);
    }
}
