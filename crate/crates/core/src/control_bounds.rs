//! Lower bounds on interpolating weights and constructive simultaneous steering along a
//! straight arc by least-norm solves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_forward, Activation, ControlPath, Layout, Scheme, Tag};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{dist_sq, norm, Mat};
use crate::scalar::Scalar;

/// Relative singular-value threshold of the independence check.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundNorm {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    /// Two samples start at the same point but must end apart: no flow can do it.
    pub coincident: bool,
    /// The pair `(i, j)` attaining the maximum.
    pub pair: Option<(usize, usize)>,
}

/// `max_{i≠j} (1/L_σ) log(‖x¹_i − x¹_j‖ / ‖x⁰_i − x⁰_j‖)`, clamped at zero; divided by
/// `√T` for the `L²` variant.
///
/// The factor is `1/L_σ`: each Euler (or exact) step expands pairwise distances by at most
/// `exp(Δt L_σ ‖w‖)`.
pub fn weight_lower_bound<S: Scalar>(
    x0: &Mat<S>,
    x1: &Mat<S>,
    lipschitz: f64,
    horizon: f64,
    which: BoundNorm,
) -> Result<LowerBound> {
    if x0.shape() != x1.shape() {
        return dim_err("initial and target points must have the same shape");
    }
    if x0.rows() < 2 {
        return arg_err("need at least two samples");
    }
    if !(lipschitz > 0.0) || !(horizon > 0.0) {
        return arg_err("Lipschitz constant and horizon must be positive");
    }
    let mut best = LowerBound { value: 0.0, coincident: false, pair: None };
    for i in 0..x0.rows() {
        for j in i + 1..x0.rows() {
            let d0 = dist_sq(x0.row(i), x0.row(j)).sqrt().as_f64();
            let d1 = dist_sq(x1.row(i), x1.row(j)).sqrt().as_f64();
            if d0 == 0.0 {
                if d1 > 0.0 {
                    return Ok(LowerBound { value: f64::INFINITY, coincident: true, pair: Some((i, j)) });
                }
                continue;
            }
            if d1 == 0.0 {
                continue;
            }
            let v = (d1 / d0).ln() / lipschitz;
            if v > best.value {
                best = LowerBound { value: v, coincident: false, pair: Some((i, j)) };
            }
        }
    }
    if which == BoundNorm::L2 {
        best.value /= horizon.sqrt();
    }
    Ok(best)
}

/// Held `L¹` and `L²` norms in time of the weight part of a control, `Σ Δt‖w^k‖` and
/// `(Σ Δt‖w^k‖²)^{1/2}` (Frobenius; `‖w2‖‖w1‖` per node for the bottleneck field).
pub fn weight_norms<S: Scalar>(u: &ControlPath<S>) -> (f64, f64) {
    let dt = u.dt().as_f64();
    let (mut l1, mut l2) = (0.0, 0.0);
    for k in 0..u.n_layers() {
        let node = u.node(k);
        let w = match u.layout() {
            Layout::Standard { d } => norm(&node[..d * d]).as_f64(),
            Layout::Bottleneck { d, h } => {
                norm(&node[..h * d]).as_f64() * norm(&node[h * d..2 * h * d]).as_f64()
            }
        };
        l1 += dt * w;
        l2 += dt * w * w;
    }
    (l1, l2.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastNorm<S> {
    /// `d × d`, row-major.
    pub w: Mat<S>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl<S> LeastNorm<S> {
    /// Norm of the linear map `rhs ↦ w` (Frobenius to Frobenius).
    pub fn operator_norm(&self) -> f64 {
        1.0 / self.sigma_min
    }
}

/// Minimal-Frobenius-norm `w` with `w · basis_i = rhs_i` for every row `i`.
///
/// Computed as `w = R B⁺` with `B = [basis_1 … basis_N]` (`d × N`) through an SVD in double
/// precision. Fails when `σ_min(B) ≤ 1e−10 σ_max(B)`.
pub fn least_norm_solve<S: Scalar>(basis: &Mat<S>, rhs: &Mat<S>) -> Result<LeastNorm<S>> {
    least_norm_at(basis, rhs, 0)
}

fn least_norm_at<S: Scalar>(basis: &Mat<S>, rhs: &Mat<S>, node: usize) -> Result<LeastNorm<S>> {
    let (n, d) = basis.shape();
    if rhs.shape() != (n, d) {
        return dim_err("basis and right-hand side must both be N x d");
    }
    if n == 0 || n > d {
        return arg_err(format!("need 1 <= N <= d, got N = {n}, d = {d}"));
    }
    let b = DMatrix::<f64>::from_fn(d, n, |r, c| basis.get(c, r).as_f64());
    let r = DMatrix::<f64>::from_fn(d, n, |row, c| rhs.get(c, row).as_f64());
    let svd = b.svd(true, true);
    let sv = &svd.singular_values;
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    if !(sigma_min > RANK_TOL * sigma_max) {
        return Err(Error::RankDeficient { node, sigma_min, sigma_max });
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let w = r * pinv;
    Ok(LeastNorm { w: Mat::from_fn(d, d, |i, j| S::c(w[(i, j)])), sigma_min, sigma_max })
}

#[derive(Clone, Debug)]
pub struct Steering<S> {
    /// Inside-parametrized control with zero bias.
    pub control: ControlPath<S>,
    /// `‖x(T) − x¹‖` of the stacked Euler state.
    pub error: f64,
    /// `max_k ‖w^k‖`.
    pub sup_norm: f64,
    /// `C = max_k 1/σ_min`, so that `sup_norm ≤ (C/T)‖x⁰ − x¹‖`.
    pub constant: f64,
}

/// Steers every `x⁰_i` to `x¹_i` simultaneously with `ẋ = w(t) σ(x)`, following the straight
/// arc `γ_i(s) = (1−s) x⁰_i + s x¹_i`: at node `s_k = k/n`, `w^k` is the least-norm solution of
/// `w σ(γ_i(s_k)) = (x¹_i − x⁰_i)/T`. Requires `N ≤ d` and independent `σ(γ_i(s))` at every
/// `s ∈ {0, 1/n, …, 1}`.
pub fn steer_linear_arc<S: Scalar>(
    x0: &Mat<S>,
    x1: &Mat<S>,
    horizon: S,
    act: Activation,
    n_steps: usize,
) -> Result<Steering<S>> {
    if x0.shape() != x1.shape() {
        return dim_err("initial and target points must have the same shape");
    }
    if n_steps == 0 {
        return arg_err("need at least one step");
    }
    if !(horizon > S::zero()) {
        return arg_err("horizon must be positive");
    }
    let (n, d) = x0.shape();
    let rhs = Mat::from_fn(n, d, |i, j| (x1.get(i, j) - x0.get(i, j)) / horizon);
    let layout = Layout::Standard { d };
    let mut values = Vec::with_capacity(n_steps * layout.node_len());
    let mut constant: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for k in 0..=n_steps {
        let s = S::c(k as f64 / n_steps as f64);
        let basis = Mat::from_fn(n, d, |i, j| {
            act.apply((S::one() - s) * x0.get(i, j) + s * x1.get(i, j))
        });
        let sol = least_norm_at(&basis, &rhs, k)?;
        if k == n_steps {
            break;
        }
        constant = constant.max(sol.operator_norm());
        sup = sup.max(sol.w.norm().as_f64());
        values.extend_from_slice(sol.w.data());
        values.extend(std::iter::repeat(S::zero()).take(d));
    }
    let control = ControlPath::new(horizon, n_steps, layout, values)?;
    let traj = integrate_forward(x0, &control, Tag::SigmaInside, act, Scheme::Euler)?;
    let error = dist_sq(traj.terminal().data(), x1.data()).sqrt().as_f64();
    Ok(Steering { control, error, sup_norm: sup, constant })
}
