//! Discrete Legendre-Fenchel transforms of functions sampled on regular box
//! grids: `g(s) = max_x (⟨s,x⟩ − f(x))` with `x` running over grid nodes.
//!
//! [`fenchel`] is the brute-force reference. [`fast_separable_fenchel`]
//! computes the same maximum one axis at a time with a lower-hull sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on the nodes `lo_k + i·(hi_k − lo_k)/(N_k − 1)` of a box, stored
/// row-major with the last axis fastest. A single-node axis sits at `lo_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct GridFunction {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<GridSpec> for GridFunction {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        GridFunction::new(spec.bounds.into_iter().map(|[lo, hi]| (lo, hi)).collect(), spec.shape, spec.values)
    }
}

impl From<GridFunction> for GridSpec {
    fn from(g: GridFunction) -> Self {
        GridSpec { bounds: g.bounds.into_iter().map(|(lo, hi)| [lo, hi]).collect(), shape: g.shape, values: g.values }
    }
}

fn check_grid(bounds: &[(f64, f64)], shape: &[usize]) -> Result<()> {
    if bounds.len() != shape.len() {
        return Err(Error::DimensionMismatch { expected: bounds.len(), got: shape.len() });
    }
    if bounds.is_empty() || shape.contains(&0) {
        return Err(Error::EmptyGrid);
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("invalid grid interval [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn axis_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + i as f64 * h }).collect()
}

impl GridFunction {
    pub fn new(bounds: Vec<(f64, f64)>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_grid(&bounds, &shape)?;
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::GridMismatch(format!("{} values for {len} nodes", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite grid value {v}")));
        }
        Ok(Self { bounds, shape, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(bounds: Vec<(f64, f64)>, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        check_grid(&bounds, &shape)?;
        let len: usize = shape.iter().product();
        let grid = Self { bounds, shape, values: Vec::new() };
        let values = (0..len).into_par_iter().map(|i| f(&grid.node(i))).collect();
        Self::new(grid.bounds, grid.shape, values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node coordinates along axis `k`.
    pub fn axis(&self, k: usize) -> Vec<f64> {
        axis_nodes(self.bounds[k].0, self.bounds[k].1, self.shape[k])
    }

    /// Grid spacing along axis `k` (zero for a single-node axis).
    pub fn step(&self, k: usize) -> f64 {
        if self.shape[k] == 1 {
            0.0
        } else {
            (self.bounds[k].1 - self.bounds[k].0) / (self.shape[k] - 1) as f64
        }
    }

    /// Largest spacing over all axes.
    pub fn max_step(&self) -> f64 {
        (0..self.dim()).map(|k| self.step(k)).fold(0.0, f64::max)
    }

    /// Multi-index of flat position `flat`.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    /// Coordinates of the node at flat position `flat`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.index(flat)
            .into_iter()
            .enumerate()
            .map(|(k, i)| {
                let (lo, hi) = self.bounds[k];
                if self.shape[k] == 1 {
                    lo
                } else if i + 1 == self.shape[k] {
                    hi
                } else {
                    lo + i as f64 * self.step(k)
                }
            })
            .collect()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.bounds.clone(), self.shape.clone(), values)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.bounds == other.bounds && self.shape == other.shape
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |self − other|` over shared nodes.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Most negative second difference `f(x−h) − 2f(x) + f(x+h)` along any
    /// axis, or zero when every axis is discretely convex.
    pub fn convexity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.dim() {
            let stride: usize = self.shape[k + 1..].iter().product();
            for flat in 0..self.len() {
                let i = (flat / stride) % self.shape[k];
                if i == 0 || i + 1 == self.shape[k] {
                    continue;
                }
                let d = self.values[flat - stride] - 2.0 * self.values[flat] + self.values[flat + stride];
                worst = worst.min(d);
            }
        }
        -worst
    }

    /// Range of forward-difference slopes along each axis.
    pub fn slope_range(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|k| {
                if self.shape[k] == 1 {
                    return (0.0, 0.0);
                }
                let stride: usize = self.shape[k + 1..].iter().product();
                let h = self.step(k);
                let mut range = (f64::INFINITY, f64::NEG_INFINITY);
                for flat in 0..self.len() {
                    if (flat / stride) % self.shape[k] + 1 == self.shape[k] {
                        continue;
                    }
                    let d = (self.values[flat + stride] - self.values[flat]) / h;
                    range = (range.0.min(d), range.1.max(d));
                }
                range
            })
            .collect()
    }
}

/// Brute-force discrete transform onto the regular grid over `dual_box`.
pub fn fenchel(f: &GridFunction, dual_box: &[(f64, f64)], dual_shape: &[usize]) -> Result<GridFunction> {
    check_grid(dual_box, dual_shape)?;
    if dual_box.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: dual_box.len() });
    }
    let nodes: Vec<Vec<f64>> = (0..f.len()).map(|i| f.node(i)).collect();
    GridFunction::from_fn(dual_box.to_vec(), dual_shape.to_vec(), |s| {
        nodes
            .iter()
            .zip(&f.values)
            .map(|(x, v)| s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - v)
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// `out[j] = max_i (s_j·x_i − v_i)` for increasing `xs` and `ss`, in
/// `O(|xs| + |ss|)`: only lower-hull vertices of `(x_i, v_i)` can be
/// maximizers, and the maximizing vertex moves right as `s` grows.
fn conjugate_1d(xs: &[f64], vs: &[f64], ss: &[f64], out: &mut [f64], hull: &mut Vec<usize>) {
    hull.clear();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord from a to i
            let cross = (vs[b] - vs[a]) * (xs[i] - xs[a]) - (vs[i] - vs[a]) * (xs[b] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut k = 0;
    for (j, &s) in ss.iter().enumerate() {
        let value = |i: usize| s * xs[i] - vs[i];
        while k + 1 < hull.len() && value(hull[k + 1]) >= value(hull[k]) {
            k += 1;
        }
        out[j] = value(hull[k]);
    }
}

/// Same contract as [`fenchel`], computed axis by axis:
/// `f*(s) = max_{x₁} (s₁x₁ + max_{x₂} (s₂x₂ + …))`.
pub fn fast_separable_fenchel(f: &GridFunction, dual_box: &[(f64, f64)], dual_shape: &[usize]) -> Result<GridFunction> {
    check_grid(dual_box, dual_shape)?;
    let n = f.dim();
    if dual_box.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dual_box.len() });
    }
    let mut shape = f.shape.clone();
    let mut current = f.values.clone();
    let mut hull = Vec::new();
    for k in 0..n {
        let xs = f.axis(k);
        let ss = axis_nodes(dual_box[k].0, dual_box[k].1, dual_shape[k]);
        let outer: usize = shape[..k].iter().product();
        let inner: usize = shape[k + 1..].iter().product();
        let mut next = vec![0.0; outer * ss.len() * inner];
        let mut line = vec![0.0; xs.len()];
        let mut out = vec![0.0; ss.len()];
        for o in 0..outer {
            for r in 0..inner {
                for (i, slot) in line.iter_mut().enumerate() {
                    let v = current[(o * xs.len() + i) * inner + r];
                    // first axis conjugates f itself; later axes conjugate −(partial maximum)
                    *slot = if k == 0 { v } else { -v };
                }
                conjugate_1d(&xs, &line, &ss, &mut out, &mut hull);
                for (j, &v) in out.iter().enumerate() {
                    next[(o * ss.len() + j) * inner + r] = v;
                }
            }
        }
        shape[k] = ss.len();
        current = next;
    }
    GridFunction::new(dual_box.to_vec(), dual_shape.to_vec(), current)
}

/// `max |f** − f|`: transform onto a dual grid of the same shape spanning the
/// discrete slope range of `f`, then back onto `f`'s own grid.
pub fn involution_defect(f: &GridFunction) -> Result<f64> {
    let dual_box = f.slope_range();
    let dual = fast_separable_fenchel(f, &dual_box, &f.shape)?;
    let back = fast_separable_fenchel(&dual, &f.bounds, &f.shape)?;
    back.sup_distance(f)
}
