//! Space-time discretization of the nonlocal model on `Ω = (0, 1)`: each layer carries
//! samples of `z(t, ·)` on its own grid, linked by piecewise-linear interpolation.
//!
//! One step reads `z^{k+1} = P^k z^k + σ(w^k z^k + b^k)` (outside) or
//! `z^{k+1} = P^k z^k + w^k σ(z^k) + b^k` (inside), where `w^k` holds kernel samples
//! premultiplied by quadrature weights.

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_forward, Activation, ControlPath, Layout, Scheme, Tag};
use crate::error::{arg_err, dim_err, Result};
use crate::linalg::{gemv, Mat};
use crate::scalar::Scalar;

/// Sorted abscissae in `[0, 1]` for every time node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SpaceGrid<S> {
    levels: Vec<Vec<S>>,
}

impl<S: Scalar> SpaceGrid<S> {
    /// Arbitrary strictly increasing points in `[0, 1]` per level.
    pub fn new(levels: Vec<Vec<S>>) -> Result<Self> {
        if levels.is_empty() {
            return arg_err("grid needs at least one level");
        }
        for (k, pts) in levels.iter().enumerate() {
            if pts.is_empty() {
                return arg_err(format!("level {k} is empty"));
            }
            if pts.iter().any(|x| !(*x >= S::zero() && *x <= S::one())) {
                return arg_err(format!("level {k} has points outside [0, 1]"));
            }
            if pts.windows(2).any(|w| !(w[1] > w[0])) {
                return arg_err(format!("level {k} is not strictly increasing"));
            }
        }
        Ok(Self { levels })
    }

    /// Uniform grids `x_j = (j−1)/(d_k−1)` of the given widths (each at least 2).
    pub fn uniform(widths: &[usize]) -> Result<Self> {
        if widths.iter().any(|w| *w < 2) {
            return arg_err("uniform grids need width >= 2");
        }
        Self::new(widths.iter().map(|&w| uniform_points(w)).collect())
    }

    pub fn levels(&self) -> &[Vec<S>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[S] {
        &self.levels[k]
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

fn uniform_points<S: Scalar>(w: usize) -> Vec<S> {
    let h = S::one() / S::c((w - 1) as f64);
    (0..w).map(|j| if j == w - 1 { S::one() } else { h * S::c(j as f64) }).collect()
}

/// Composite trapezoid weights on the uniform grid of width `d`: `h(1/2, 1, …, 1, 1/2)`.
pub fn quadrature_weights<S: Scalar>(d: usize) -> Result<Vec<S>> {
    if d < 2 {
        return arg_err("quadrature needs at least two points");
    }
    Ok(crate::linalg::trapezoid_weights(d - 1, S::one() / S::c((d - 1) as f64)))
}

/// Interpolation matrix from grid `from` to grid `to`.
///
/// A target point strictly between `from[ι−1]` and `from[ι]` gets `1 + a` at column `ι` and
/// `−a` at column `ι−1`, `a = (x − from[ι])/(from[ι] − from[ι−1]) ∈ (−1, 0)`; a target point
/// that coincides with a source node gets a unit row.
pub fn build_projection<S: Scalar>(from: &[S], to: &[S]) -> Result<Mat<S>> {
    if from.is_empty() || to.is_empty() {
        return dim_err("empty grid");
    }
    let (lo, hi) = (from[0], from[from.len() - 1]);
    let mut p = Mat::zeros(to.len(), from.len());
    for (j, &x) in to.iter().enumerate() {
        if !(x >= S::zero() && x <= S::one()) || x < lo || x > hi {
            return arg_err(format!("target abscissa {x} outside the source grid"));
        }
        match from.iter().position(|v| *v >= x) {
            Some(i) if from[i] == x => p.set(j, i, S::one()),
            Some(i) => {
                let a = (x - from[i]) / (from[i] - from[i - 1]);
                p.set(j, i, S::one() + a);
                p.set(j, i - 1, -a);
            }
            None => unreachable!("x <= last source node"),
        }
    }
    Ok(p)
}

/// Kernel and bias samples of every layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct KernelPath<S> {
    pub weights: Vec<Mat<S>>,
    pub biases: Vec<Vec<S>>,
}

impl<S: Scalar> KernelPath<S> {
    pub fn new(weights: Vec<Mat<S>>, biases: Vec<Vec<S>>) -> Result<Self> {
        if weights.len() != biases.len() {
            return dim_err("one bias vector per kernel matrix");
        }
        if weights.iter().zip(&biases).any(|(w, b)| w.rows() != b.len()) {
            return dim_err("bias length must match kernel rows");
        }
        Ok(Self { weights, biases })
    }

    /// All-zero kernels for the given grid.
    pub fn zeros(grid: &SpaceGrid<S>) -> Self {
        let w = grid.widths();
        Self {
            weights: w.windows(2).map(|p| Mat::zeros(p[1], p[0])).collect(),
            biases: w[1..].iter().map(|&n| vec![S::zero(); n]).collect(),
        }
    }

    /// Samples `w^k_{jι} = α_ι w(t^{k+1}, x^{k+1}_j, x^k_ι)` and `b^k_j = b(t^{k+1}, x^{k+1}_j)`
    /// on a uniform time grid over `[0, T]`, with trapezoid weights `α` of level `k`.
    pub fn sample(
        grid: &SpaceGrid<S>,
        horizon: f64,
        w: impl Fn(f64, f64, f64) -> f64,
        b: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let n = grid.n_levels() - 1;
        let dt = horizon / n.max(1) as f64;
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        for k in 0..n {
            let (src, dst) = (grid.level(k), grid.level(k + 1));
            let alpha = quadrature_weights::<S>(src.len())?;
            let t = dt * (k + 1) as f64;
            weights.push(Mat::from_fn(dst.len(), src.len(), |j, i| {
                alpha[i] * S::c(w(t, dst[j].as_f64(), src[i].as_f64()))
            }));
            biases.push(dst.iter().map(|x| S::c(b(t, x.as_f64()))).collect());
        }
        Self::new(weights, biases)
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }
}

/// One layer of the nonlocal network.
pub fn nonlocal_step<S: Scalar>(
    z: &[S],
    w: &Mat<S>,
    b: &[S],
    p: &Mat<S>,
    tag: Tag,
    act: Activation,
) -> Result<Vec<S>> {
    if p.cols() != z.len() || w.cols() != z.len() || w.rows() != p.rows() || b.len() != p.rows() {
        return dim_err(format!(
            "layer shapes disagree: z {}, P {:?}, w {:?}, b {}",
            z.len(),
            p.shape(),
            w.shape(),
            b.len()
        ));
    }
    let m = p.rows();
    let mut out = vec![S::zero(); m];
    gemv(p.data(), m, z.len(), z, &mut out);
    let mut f = vec![S::zero(); m];
    match tag {
        Tag::SigmaOutside => {
            gemv(w.data(), m, z.len(), z, &mut f);
            for (o, (fv, bv)) in out.iter_mut().zip(f.iter().zip(b)) {
                *o = *o + act.apply(*fv + *bv);
            }
        }
        Tag::SigmaInside => {
            let s = act.apply_slice(z);
            gemv(w.data(), m, z.len(), &s, &mut f);
            for (o, (fv, bv)) in out.iter_mut().zip(f.iter().zip(b)) {
                *o = *o + (*fv + *bv);
            }
        }
        Tag::Bottleneck => return arg_err("the nonlocal model has no bottleneck variant"),
    }
    Ok(out)
}

/// Runs all layers, returning the state on every level (widths follow the grid).
pub fn integrate_nonlocal<S: Scalar>(
    z0: &[S],
    grid: &SpaceGrid<S>,
    kernels: &KernelPath<S>,
    tag: Tag,
    act: Activation,
) -> Result<Vec<Vec<S>>> {
    if z0.len() != grid.level(0).len() {
        return dim_err("initial profile length differs from the first grid width");
    }
    if kernels.n_layers() + 1 != grid.n_levels() {
        return dim_err("need one kernel per pair of consecutive grid levels");
    }
    let mut states = vec![z0.to_vec()];
    for k in 0..kernels.n_layers() {
        let p = build_projection(grid.level(k), grid.level(k + 1))?;
        let next = nonlocal_step(&states[k], &kernels.weights[k], &kernels.biases[k], &p, tag, act)?;
        states.push(next);
    }
    Ok(states)
}

/// Embeds a finite-dimensional network (`Standard` layout) on a fixed grid of `d` points,
/// with kernel matrices `Δt w^k` and biases `Δt b^k`, runs the nonlocal recursion for every
/// sample and returns the largest deviation from the Euler trajectory.
///
/// The outside field needs `Δt σ(y) = σ(Δt y)`, so it is accepted only for positively
/// homogeneous activations or `Δt = 1`.
pub fn dirac_fixed_grid_equivalence<S: Scalar>(
    x0: &Mat<S>,
    u: &ControlPath<S>,
    tag: Tag,
    act: Activation,
) -> Result<f64> {
    let d = match u.layout() {
        Layout::Standard { d } => d,
        Layout::Bottleneck { .. } => return arg_err("only the standard layout has a nonlocal embedding"),
    };
    let dt = u.dt();
    if tag == Tag::SigmaOutside && !act.positively_homogeneous() && dt != S::one() {
        return arg_err("outside field with a non-homogeneous activation needs dt = 1");
    }
    let points = if d == 1 { vec![S::c(0.5)] } else { uniform_points(d) };
    let grid = SpaceGrid::new(vec![points; u.n_layers() + 1])?;
    let kernels = KernelPath::new(
        (0..u.n_layers())
            .map(|k| Mat::new(d, d, u.node(k)[..d * d].iter().map(|v| *v * dt).collect()))
            .collect::<Result<Vec<_>>>()?,
        (0..u.n_layers()).map(|k| u.node(k)[d * d..].iter().map(|v| *v * dt).collect()).collect(),
    )?;
    let traj = integrate_forward(x0, u, tag, act, Scheme::Euler)?;
    let mut dev: f64 = 0.0;
    for i in 0..x0.rows() {
        let states = integrate_nonlocal(x0.row(i), &grid, &kernels, tag, act)?;
        for (k, z) in states.iter().enumerate() {
            for (a, b) in z.iter().zip(traj.states[k].row(i)) {
                dev = dev.max((*a - *b).abs().as_f64());
            }
        }
    }
    Ok(dev)
}
