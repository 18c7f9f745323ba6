//! Integration of max-affine functions over polytopes.
//!
//! Three independent routes are provided:
//!
//! - [`integrate`] / [`integrate_abs`]: the polytope is cut along the kinks of
//!   the integrand (and, for `|f|`, along its zero set), so every simplex of
//!   the resulting triangulation carries a single affine piece of constant
//!   sign and the vertex-mean rule is exact;
//! - [`integrate_bisection`]: longest-edge bisection driven by the convexity
//!   sandwich `max_k ∫ piece_k ≤ ∫ f ≤ ∫ (vertex interpolant)`;
//! - [`layer_cake`] and [`monte_carlo`].
//!
//! Every result carries an error bound; for the first two it is a rigorous
//! bound up to floating-point rounding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convexfn::{AffinePiece, Estimate, MaxAffine, SublevelMethod};
use crate::error::{Error, Result};
use crate::polytope::{sample_simplices, Halfspace, Polytope, Simplex};

/// Maximum number of simplices created by [`integrate_bisection`].
pub const SUBDIVISION_BUDGET: usize = 2_000_000;

/// Default absolute integration tolerance by dimension.
pub fn default_tolerance(n: usize) -> f64 {
    if n <= 2 {
        1e-9
    } else {
        1e-6
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// `|value − exact| ≤ error_bound` (up to rounding).
    pub error_bound: f64,
    /// Number of simplices the value was summed over.
    pub simplices: usize,
    /// `error_bound ≤ tol` was achieved.
    pub converged: bool,
}

/// `vol(S) × mean of the affine values at the vertices`; exact.
pub fn integrate_affine_simplex(piece: &AffinePiece, s: &Simplex) -> f64 {
    let verts = s.vertices();
    let mean = verts.iter().map(|v| piece.eval(v)).sum::<f64>() / verts.len() as f64;
    s.volume() * mean
}

/// Convexity sandwich of `∫_S f`: `(max_k ∫_S piece_k, ∫_S interpolant)`.
fn sandwich(f: &MaxAffine, s: &Simplex, vol: f64) -> (f64, f64) {
    let verts = s.vertices();
    let k = verts.len() as f64;
    let upper = vol * verts.iter().map(|v| f.eval(v)).sum::<f64>() / k;
    let lower = f
        .pieces()
        .iter()
        .map(|p| vol * verts.iter().map(|v| p.eval(v)).sum::<f64>() / k)
        .fold(f64::NEG_INFINITY, f64::max);
    (lower, upper.max(lower))
}

/// Rigorous bounds on `∫_S |f|` from the pointwise enclosure
/// `piece_k ≤ f ≤ interpolant` with `k` the best lower piece.
fn abs_sandwich(f: &MaxAffine, s: &Simplex, vol: f64) -> (f64, f64) {
    let verts = s.vertices();
    let k = verts.len() as f64;
    let best = f
        .pieces()
        .iter()
        .max_by(|p, q| {
            let ip: f64 = verts.iter().map(|v| p.eval(v)).sum();
            let iq: f64 = verts.iter().map(|v| q.eval(v)).sum();
            ip.total_cmp(&iq)
        })
        .expect("at least one piece");
    let lo_vals: Vec<f64> = verts.iter().map(|v| best.eval(v)).collect();
    let hi_vals: Vec<f64> = verts.iter().map(|v| f.eval(v)).collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / k;
    if lo_vals.iter().all(|&v| v >= 0.0) {
        (vol * mean(&lo_vals), vol * mean(&hi_vals))
    } else if hi_vals.iter().all(|&v| v <= 0.0) {
        (-vol * mean(&hi_vals), -vol * mean(&lo_vals))
    } else {
        let top = lo_vals
            .iter()
            .chain(&hi_vals)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        (0.0, vol * top)
    }
}

fn check_dims(f: &MaxAffine, p: &Polytope) -> Result<()> {
    if f.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: f.dim() });
    }
    Ok(())
}

/// Exact integral of `f` over `P` by cutting along the kinks of `f`.
pub fn integrate(f: &MaxAffine, p: &Polytope, tol: f64) -> Result<Integral> {
    check_dims(f, p)?;
    let mut regions = Vec::new();
    for (i, cell) in f.cells(p)? {
        regions.push((1.0, i, cell));
    }
    sum_regions(f, &regions, tol)
}

/// Exact integral of `|f|` over `P` by cutting along the kinks and the zero
/// set of `f`.
pub fn integrate_abs(f: &MaxAffine, p: &Polytope, tol: f64) -> Result<Integral> {
    check_dims(f, p)?;
    let mut regions = Vec::new();
    for (i, cell) in f.cells(p)? {
        let piece = &f.pieces()[i];
        let pos = Halfspace::new(piece.a.clone(), -piece.b);
        let neg = Halfspace::new(piece.a.iter().map(|v| -v).collect(), piece.b);
        for (sign, h) in [(1.0, pos), (-1.0, neg)] {
            match cell.intersect(&[h]) {
                Ok(part) => regions.push((sign, i, part)),
                Err(Error::Empty) | Err(Error::Degenerate { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    sum_regions(f, &regions, tol)
}

fn sum_regions(f: &MaxAffine, regions: &[(f64, usize, Polytope)], tol: f64) -> Result<Integral> {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    let mut gap = 0.0;
    let mut count = 0;
    for (sign, i, region) in regions {
        let piece = &f.pieces()[*i];
        for s in region.triangulate() {
            let vol = s.volume();
            let c = sign * integrate_affine_simplex(piece, &s);
            let (lo, hi) = sandwich(f, &s, vol);
            value += c;
            magnitude += c.abs();
            gap += hi - lo;
            count += 1;
        }
    }
    let error_bound = gap + 8.0 * f64::EPSILON * magnitude.max(f64::MIN_POSITIVE) * (count as f64).sqrt().max(1.0);
    Ok(Integral {
        value,
        error_bound,
        simplices: count,
        converged: error_bound <= tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectionOptions {
    pub tol: f64,
    pub budget: usize,
    /// Integrate `|f|` instead of `f`.
    pub absolute: bool,
}

impl BisectionOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, budget: SUBDIVISION_BUDGET, absolute: false }
    }
}

struct Leaf {
    id: usize,
    simplex: Simplex,
    lower: f64,
    upper: f64,
}

impl Leaf {
    fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Leaf {}

impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Leaf {
    // largest gap first, older leaf first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap()
            .total_cmp(&other.gap())
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Adaptive longest-edge bisection with the convexity certificate. Refines
/// the simplex with the widest enclosure until the summed half-widths drop
/// below `tol` or the budget is exhausted (then `converged` is false).
pub fn integrate_bisection(f: &MaxAffine, p: &Polytope, opts: BisectionOptions) -> Result<Integral> {
    check_dims(f, p)?;
    let bounds = |s: &Simplex| {
        let vol = s.volume();
        if opts.absolute {
            abs_sandwich(f, s, vol)
        } else {
            sandwich(f, s, vol)
        }
    };
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut total_gap = 0.0;
    for s in p.triangulate() {
        let (lower, upper) = bounds(&s);
        total_gap += upper - lower;
        heap.push(Leaf { id: next_id, simplex: s, lower, upper });
        next_id += 1;
    }
    while 0.5 * total_gap > opts.tol && next_id < opts.budget {
        let Some(leaf) = heap.pop() else { break };
        if leaf.gap() <= 0.0 {
            heap.push(leaf);
            break;
        }
        total_gap -= leaf.gap();
        let (i, j) = leaf.simplex.longest_edge();
        let (a, b) = leaf.simplex.bisect(i, j);
        for s in [a, b] {
            let (lower, upper) = bounds(&s);
            total_gap += upper - lower;
            heap.push(Leaf { id: next_id, simplex: s, lower, upper });
            next_id += 1;
        }
    }
    let mut leaves = heap.into_vec();
    leaves.sort_by_key(|l| l.id);
    let value: f64 = leaves.iter().map(|l| 0.5 * (l.lower + l.upper)).sum();
    let half_gap: f64 = leaves.iter().map(|l| 0.5 * l.gap()).sum();
    let error_bound = half_gap + 8.0 * f64::EPSILON * value.abs().max(f64::MIN_POSITIVE);
    Ok(Integral {
        value,
        error_bound,
        simplices: leaves.len(),
        converged: error_bound <= opts.tol,
    })
}

/// Layer-cake quadrature `∫_P f = ∫_0^∞ μ{f ≥ t} dt` for `f ≥ 0` on `P`.
///
/// The part below `inf f` contributes `inf f · μ(P)` exactly; the rest is the
/// trapezoid rule on `levels` intervals of `[inf f, sup f]` applied to
/// `t ↦ μ(P) − μ(P_t)` with exact sublevel volumes. Since that map is
/// nonincreasing, the trapezoid error is at most `h·(g(inf) − g(sup))/2`.
pub fn layer_cake(f: &MaxAffine, p: &Polytope, levels: usize) -> Result<Integral> {
    check_dims(f, p)?;
    if levels == 0 {
        return Err(Error::InvalidArgument("layer cake needs at least one level".into()));
    }
    let inf = f.infimum(p)?;
    if inf.value < -inf.tol {
        return Err(Error::InvalidArgument(format!(
            "layer cake needs a nonnegative integrand, inf = {}",
            inf.value
        )));
    }
    let floor = inf.value.max(0.0);
    let top = f.supremum(p)?;
    let vol = p.volume();
    let base = floor * vol;
    if top <= floor {
        return Ok(Integral { value: base, error_bound: 0.0, simplices: 0, converged: true });
    }
    let h = (top - floor) / levels as f64;
    let mut g = Vec::with_capacity(levels + 1);
    for k in 0..=levels {
        let t = if k == levels { top } else { floor + h * k as f64 };
        let below = f.sublevel_volume(p, t, SublevelMethod::Exact)?.value;
        g.push((vol - below).max(0.0));
    }
    let interior: f64 = g[1..levels].iter().sum();
    let value = base + h * (interior + 0.5 * (g[0] + g[levels]));
    let error_bound = 0.5 * h * (g[0] - g[levels]) + 1e-12 * vol * (top - floor);
    Ok(Integral { value, error_bound, simplices: levels, converged: true })
}

/// Plain Monte Carlo: `μ(P) × sample mean`, with its standard error.
pub fn monte_carlo<F>(f: F, p: &Polytope, seed: u64, samples: usize) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    if samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()));
    }
    let simplices = p.triangulate();
    let vol: f64 = simplices.iter().map(Simplex::volume).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = sample_simplices(&simplices, &mut rng, samples)
        .iter()
        .map(|x| f(x))
        .collect();
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if samples > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate { value: vol * mean, stderr: vol * (var / n).sqrt() })
}
