//! Activations, control parametrizations and forward integration of the neural ODE.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{gemv, gemv_t_acc, outer_acc, Mat};
use crate::scalar::Scalar;

/// Rows integrated per parallel task. Fixed so that reductions happen in the same order
/// regardless of the thread count.
pub(crate) const ROW_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
    /// Slope on the negative half-line, in `[0, 1)`.
    LeakyRelu(f64),
    Identity,
}

impl Activation {
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&slope) {
            return arg_err(format!("leaky slope {slope} outside [0, 1)"));
        }
        Ok(Self::LeakyRelu(slope))
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Sigmoid => 0.25,
            _ => 1.0,
        }
    }

    pub fn zero_at_zero(&self) -> bool {
        !matches!(self, Self::Sigmoid)
    }

    pub fn positively_homogeneous(&self) -> bool {
        matches!(self, Self::Relu | Self::LeakyRelu(_) | Self::Identity)
    }

    #[inline]
    pub fn apply<S: Scalar>(&self, x: S) -> S {
        match *self {
            Self::Tanh => x.tanh(),
            Self::Sigmoid => {
                if x >= S::zero() {
                    S::one() / (S::one() + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (S::one() + e)
                }
            }
            Self::Relu => x.max(S::zero()),
            Self::LeakyRelu(a) => {
                if x > S::zero() {
                    x
                } else {
                    S::c(a) * x
                }
            }
            Self::Identity => x,
        }
    }

    /// Derivative, with the subgradient conventions `relu'(0) = 0` and `leaky'(0) = a`.
    #[inline]
    pub fn deriv<S: Scalar>(&self, x: S) -> S {
        match *self {
            Self::Tanh => {
                let t = x.tanh();
                S::one() - t * t
            }
            Self::Sigmoid => {
                let s = self.apply(x);
                s * (S::one() - s)
            }
            Self::Relu => {
                if x > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Self::LeakyRelu(a) => {
                if x > S::zero() {
                    S::one()
                } else {
                    S::c(a)
                }
            }
            Self::Identity => S::one(),
        }
    }

    pub fn apply_slice<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        x.iter().map(|v| self.apply(*v)).collect()
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tanh => write!(f, "tanh"),
            Self::Sigmoid => write!(f, "sigmoid"),
            Self::Relu => write!(f, "relu"),
            Self::LeakyRelu(a) => write!(f, "leaky_relu:{a}"),
            Self::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    /// Accepts `tanh`, `sigmoid`, `relu`, `identity`, `leaky_relu` (slope 0.01) or `leaky_relu:<slope>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.split_once(':') {
            Some(("leaky_relu", slope)) => {
                let a = slope
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad leaky slope `{slope}`")))?;
                Self::leaky_relu(a)
            }
            Some(_) => arg_err(format!("unknown activation `{s}`")),
            None => match lower.as_str() {
                "tanh" => Ok(Self::Tanh),
                "sigmoid" => Ok(Self::Sigmoid),
                "relu" => Ok(Self::Relu),
                "leaky_relu" => Ok(Self::LeakyRelu(0.01)),
                "identity" | "linear" => Ok(Self::Identity),
                _ => arg_err(format!("unknown activation `{s}`")),
            },
        }
    }
}

/// Where the nonlinearity sits in the vector field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    /// `σ(w x + b)`
    SigmaOutside,
    /// `w σ(x) + b`
    SigmaInside,
    /// `w2 σ(w1 x + b1) + b2`
    Bottleneck,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SigmaOutside => "outside",
            Self::SigmaInside => "inside",
            Self::Bottleneck => "bottleneck",
        })
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "outside" | "sigma_outside" => Ok(Self::SigmaOutside),
            "inside" | "sigma_inside" => Ok(Self::SigmaInside),
            "bottleneck" => Ok(Self::Bottleneck),
            _ => arg_err(format!("unknown parametrization `{s}`")),
        }
    }
}

/// Shape of the parameters held at one node, flattened as
/// `[w (row-major), b]` or `[w1, w2, b1, b2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    Standard { d: usize },
    Bottleneck { d: usize, h: usize },
}

impl Layout {
    pub fn for_tag(tag: Tag, d: usize, h: usize) -> Self {
        match tag {
            Tag::Bottleneck => Self::Bottleneck { d, h },
            _ => Self::Standard { d },
        }
    }

    pub fn state_dim(&self) -> usize {
        match *self {
            Self::Standard { d } | Self::Bottleneck { d, .. } => d,
        }
    }

    pub fn node_len(&self) -> usize {
        match *self {
            Self::Standard { d } => d * d + d,
            Self::Bottleneck { d, h } => 2 * h * d + h + d,
        }
    }

    /// Length of the weight part (everything except the biases).
    pub fn weight_len(&self) -> usize {
        match *self {
            Self::Standard { d } => d * d,
            Self::Bottleneck { d, h } => 2 * h * d,
        }
    }

    pub fn check_tag(&self, tag: Tag) -> Result<()> {
        match (self, tag) {
            (Self::Bottleneck { .. }, Tag::Bottleneck) => Ok(()),
            (Self::Standard { .. }, Tag::SigmaInside | Tag::SigmaOutside) => Ok(()),
            _ => dim_err(format!("layout {self:?} incompatible with parametrization {tag}")),
        }
    }
}

/// Piecewise-constant control: node `k` holds the parameters on `[t_k, t_{k+1})`,
/// with `t_k = k T / n_layers`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ControlPath<S> {
    horizon: S,
    n_layers: usize,
    layout: Layout,
    values: Vec<S>,
}

impl<S: Scalar> ControlPath<S> {
    pub fn new(horizon: S, n_layers: usize, layout: Layout, values: Vec<S>) -> Result<Self> {
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return arg_err(format!("horizon must be positive, got {horizon}"));
        }
        if n_layers == 0 {
            return arg_err("at least one layer required");
        }
        if values.len() != n_layers * layout.node_len() {
            return dim_err(format!(
                "{} control values for {n_layers} nodes of length {}",
                values.len(),
                layout.node_len()
            ));
        }
        Ok(Self { horizon, n_layers, layout, values })
    }

    pub fn zeros(horizon: S, n_layers: usize, layout: Layout) -> Result<Self> {
        Self::new(horizon, n_layers, layout, vec![S::zero(); n_layers * layout.node_len()])
    }

    /// Same parameters at every node.
    pub fn constant(horizon: S, n_layers: usize, layout: Layout, node: &[S]) -> Result<Self> {
        if node.len() != layout.node_len() {
            return dim_err("node length does not match layout");
        }
        Self::new(horizon, n_layers, layout, node.repeat(n_layers))
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dt(&self) -> S {
        self.horizon / S::c(self.n_layers as f64)
    }

    pub fn node_len(&self) -> usize {
        self.layout.node_len()
    }

    pub fn node(&self, k: usize) -> &[S] {
        let p = self.node_len();
        &self.values[k * p..(k + 1) * p]
    }

    pub fn node_mut(&mut self, k: usize) -> &mut [S] {
        let p = self.node_len();
        &mut self.values[k * p..(k + 1) * p]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[S]> {
        self.values.chunks(self.node_len())
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    /// The `n_layers + 1` grid points `t_0 = 0, …, t_N = T`.
    pub fn times(&self) -> Vec<S> {
        let dt = self.dt();
        (0..=self.n_layers)
            .map(|k| if k == self.n_layers { self.horizon } else { dt * S::c(k as f64) })
            .collect()
    }

    /// Euclidean norm of the stacked parameters at node `k`.
    pub fn node_norm(&self, k: usize) -> S {
        crate::linalg::norm(self.node(k))
    }

    /// Norms of the weight and bias parts at node `k` (Frobenius).
    pub fn split_norms(&self, k: usize) -> (S, S) {
        let node = self.node(k);
        let wl = self.layout.weight_len();
        (crate::linalg::norm(&node[..wl]), crate::linalg::norm(&node[wl..]))
    }

    /// Same grid and layout, new values.
    pub fn with_values(&self, values: Vec<S>) -> Result<Self> {
        Self::new(self.horizon, self.n_layers, self.layout, values)
    }

    /// Same values on a different horizon.
    pub fn with_horizon(&self, horizon: S) -> Result<Self> {
        Self::new(horizon, self.n_layers, self.layout, self.values.clone())
    }

    pub fn scaled(&self, factor: S) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = *v * factor);
        out
    }
}

/// States of all samples at every grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct StackedTrajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<Mat<S>>,
}

impl<S: Scalar> StackedTrajectory<S> {
    pub fn initial(&self) -> &Mat<S> {
        &self.states[0]
    }

    pub fn terminal(&self) -> &Mat<S> {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn horizon(&self) -> S {
        *self.times.last().expect("trajectory has at least one time")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Euler,
    Rk4,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" => Ok(Self::Euler),
            "rk4" => Ok(Self::Rk4),
            _ => arg_err(format!("unknown scheme `{s}`")),
        }
    }
}

/// Evaluates the field for one sample. `scratch` must hold at least `max(d, h)` values.
#[inline]
pub(crate) fn field_row<S: Scalar>(
    tag: Tag,
    layout: Layout,
    p: &[S],
    act: Activation,
    x: &[S],
    out: &mut [S],
    scratch: &mut [S],
) {
    match layout {
        Layout::Standard { d } => {
            let (w, b) = p.split_at(d * d);
            match tag {
                Tag::SigmaOutside => {
                    gemv(w, d, d, x, out);
                    for (o, bi) in out.iter_mut().zip(b) {
                        *o = act.apply(*o + *bi);
                    }
                }
                _ => {
                    let s = &mut scratch[..d];
                    for (si, xi) in s.iter_mut().zip(x) {
                        *si = act.apply(*xi);
                    }
                    gemv(w, d, d, s, out);
                    for (o, bi) in out.iter_mut().zip(b) {
                        *o = *o + *bi;
                    }
                }
            }
        }
        Layout::Bottleneck { d, h } => {
            let (w1, rest) = p.split_at(h * d);
            let (w2, rest) = rest.split_at(d * h);
            let (b1, b2) = rest.split_at(h);
            let z = &mut scratch[..h];
            gemv(w1, h, d, x, z);
            for (zi, bi) in z.iter_mut().zip(b1) {
                *zi = act.apply(*zi + *bi);
            }
            gemv(w2, d, h, z, out);
            for (o, bi) in out.iter_mut().zip(b2) {
                *o = *o + *bi;
            }
        }
    }
}

/// Vector-Jacobian product of the field for one sample: given the cotangent `a` of the
/// output, adds `J_pᵀ a` into `gp` and writes `J_xᵀ a` into `gx`.
pub(crate) fn field_row_vjp<S: Scalar>(
    tag: Tag,
    layout: Layout,
    p: &[S],
    act: Activation,
    x: &[S],
    a: &[S],
    gp: &mut [S],
    gx: &mut [S],
) {
    match layout {
        Layout::Standard { d } => {
            let (w, b) = p.split_at(d * d);
            let (gw, gb) = gp.split_at_mut(d * d);
            gx.iter_mut().for_each(|v| *v = S::zero());
            match tag {
                Tag::SigmaOutside => {
                    // s = σ'(w x + b) ⊙ a
                    let mut s = vec![S::zero(); d];
                    gemv(w, d, d, x, &mut s);
                    for ((si, bi), ai) in s.iter_mut().zip(b).zip(a) {
                        *si = act.deriv(*si + *bi) * *ai;
                    }
                    outer_acc(gw, &s, x, S::one());
                    for (g, si) in gb.iter_mut().zip(&s) {
                        *g = *g + *si;
                    }
                    gemv_t_acc(w, d, d, &s, gx);
                }
                _ => {
                    let sx: Vec<S> = x.iter().map(|v| act.apply(*v)).collect();
                    outer_acc(gw, a, &sx, S::one());
                    for (g, ai) in gb.iter_mut().zip(a) {
                        *g = *g + *ai;
                    }
                    gemv_t_acc(w, d, d, a, gx);
                    for (g, xi) in gx.iter_mut().zip(x) {
                        *g = *g * act.deriv(*xi);
                    }
                }
            }
        }
        Layout::Bottleneck { d, h } => {
            let (w1, rest) = p.split_at(h * d);
            let (w2, rest) = rest.split_at(d * h);
            let (b1, _) = rest.split_at(h);
            let (gw1, grest) = gp.split_at_mut(h * d);
            let (gw2, grest) = grest.split_at_mut(d * h);
            let (gb1, gb2) = grest.split_at_mut(h);
            let mut z = vec![S::zero(); h];
            gemv(w1, h, d, x, &mut z);
            for (zi, bi) in z.iter_mut().zip(b1) {
                *zi = *zi + *bi;
            }
            let hz: Vec<S> = z.iter().map(|v| act.apply(*v)).collect();
            outer_acc(gw2, a, &hz, S::one());
            for (g, ai) in gb2.iter_mut().zip(a) {
                *g = *g + *ai;
            }
            // cotangent of the hidden pre-activation
            let mut s = vec![S::zero(); h];
            gemv_t_acc(w2, d, h, a, &mut s);
            for (si, zi) in s.iter_mut().zip(&z) {
                *si = *si * act.deriv(*zi);
            }
            outer_acc(gw1, &s, x, S::one());
            for (g, si) in gb1.iter_mut().zip(&s) {
                *g = *g + *si;
            }
            gx.iter_mut().for_each(|v| *v = S::zero());
            gemv_t_acc(w1, h, d, &s, gx);
        }
    }
}

fn scratch_len(layout: Layout) -> usize {
    match layout {
        Layout::Standard { d } => d,
        Layout::Bottleneck { d, h } => d.max(h),
    }
}

fn check_shapes<S: Scalar>(tag: Tag, layout: Layout, x: &Mat<S>) -> Result<()> {
    layout.check_tag(tag)?;
    if x.cols() != layout.state_dim() {
        return dim_err(format!(
            "state has {} columns, control expects d = {}",
            x.cols(),
            layout.state_dim()
        ));
    }
    if x.rows() == 0 {
        return dim_err("empty state");
    }
    Ok(())
}

/// The field applied to every row of `x` with the parameters of a single node.
pub fn vector_field<S: Scalar>(
    tag: Tag,
    layout: Layout,
    params: &[S],
    x: &Mat<S>,
    act: Activation,
) -> Result<Mat<S>> {
    check_shapes(tag, layout, x)?;
    if params.len() != layout.node_len() {
        return dim_err("parameter vector does not match layout");
    }
    let d = layout.state_dim();
    let mut out = Mat::zeros(x.rows(), d);
    let mut scratch = vec![S::zero(); scratch_len(layout)];
    for i in 0..x.rows() {
        field_row(tag, layout, params, act, x.row(i), out.row_mut(i), &mut scratch);
    }
    Ok(out)
}

/// Integrates one block of rows over all nodes; returns node-major states of the block.
fn integrate_block<S: Scalar>(
    x0: &[S],
    u: &ControlPath<S>,
    tag: Tag,
    act: Activation,
    scheme: Scheme,
) -> Vec<S> {
    let layout = u.layout();
    let d = layout.state_dim();
    let rows = x0.len() / d;
    let n = u.n_layers();
    let dt = u.dt();
    let half = dt / S::c(2.0);
    let sixth = dt / S::c(6.0);
    let mut out = Vec::with_capacity((n + 1) * x0.len());
    out.extend_from_slice(x0);
    let mut scratch = vec![S::zero(); scratch_len(layout)];
    let mut k1 = vec![S::zero(); d];
    let mut k2 = vec![S::zero(); d];
    let mut k3 = vec![S::zero(); d];
    let mut k4 = vec![S::zero(); d];
    let mut tmp = vec![S::zero(); d];
    for k in 0..n {
        let p = u.node(k);
        let base = k * x0.len();
        for r in 0..rows {
            let x = &out[base + r * d..base + (r + 1) * d];
            let x: Vec<S> = x.to_vec();
            field_row(tag, layout, p, act, &x, &mut k1, &mut scratch);
            match scheme {
                Scheme::Euler => {
                    for j in 0..d {
                        tmp[j] = x[j] + dt * k1[j];
                    }
                }
                Scheme::Rk4 => {
                    for j in 0..d {
                        tmp[j] = x[j] + half * k1[j];
                    }
                    field_row(tag, layout, p, act, &tmp, &mut k2, &mut scratch);
                    for j in 0..d {
                        tmp[j] = x[j] + half * k2[j];
                    }
                    field_row(tag, layout, p, act, &tmp, &mut k3, &mut scratch);
                    for j in 0..d {
                        tmp[j] = x[j] + dt * k3[j];
                    }
                    field_row(tag, layout, p, act, &tmp, &mut k4, &mut scratch);
                    for j in 0..d {
                        tmp[j] = x[j]
                            + sixth * (k1[j] + S::c(2.0) * k2[j] + S::c(2.0) * k3[j] + k4[j]);
                    }
                }
            }
            out.extend_from_slice(&tmp);
        }
    }
    out
}

/// Integrates every sample through the held control. Training always uses Euler;
/// RK4 evaluates the held control of the enclosing interval at every stage.
///
/// Fails on non-finite states (reporting the first bad node) and when the growth
/// bound of [`gronwall_bound`] is exceeded.
pub fn integrate_forward<S: Scalar>(
    x0: &Mat<S>,
    u: &ControlPath<S>,
    tag: Tag,
    act: Activation,
    scheme: Scheme,
) -> Result<StackedTrajectory<S>> {
    let layout = u.layout();
    check_shapes(tag, layout, x0)?;
    if !x0.is_finite() {
        return Err(Error::Divergence { node: 0 });
    }
    let d = layout.state_dim();
    let n = u.n_layers();
    let blocks: Vec<Vec<S>> = x0
        .data()
        .par_chunks(ROW_CHUNK * d)
        .map(|chunk| integrate_block(chunk, u, tag, act, scheme))
        .collect();

    let rows = x0.rows();
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut data = Vec::with_capacity(rows * d);
        for (b, block) in blocks.iter().enumerate() {
            let block_rows = (rows - b * ROW_CHUNK).min(ROW_CHUNK);
            let len = block_rows * d;
            data.extend_from_slice(&block[k * len..(k + 1) * len]);
        }
        let m = Mat::new(rows, d, data)?;
        if !m.is_finite() {
            return Err(Error::Divergence { node: k });
        }
        states.push(m);
    }
    let traj = StackedTrajectory { times: u.times(), states };
    assert_growth_bound(&traj, u, act)?;
    Ok(traj)
}

static BOUND_CHECKS: AtomicU64 = AtomicU64::new(0);
static BOUND_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide counters of the growth-bound assertion made by every integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundStats {
    pub checks: u64,
    pub violations: u64,
}

pub fn bound_stats() -> BoundStats {
    BoundStats {
        checks: BOUND_CHECKS.load(Ordering::Relaxed),
        violations: BOUND_VIOLATIONS.load(Ordering::Relaxed),
    }
}

fn assert_growth_bound<S: Scalar>(
    traj: &StackedTrajectory<S>,
    u: &ControlPath<S>,
    act: Activation,
) -> Result<()> {
    BOUND_CHECKS.fetch_add(1, Ordering::Relaxed);
    let bound = gronwall_bound(traj.initial(), u, act);
    if bound.is_infinite() {
        return Ok(());
    }
    let limit = bound * (S::one() + S::check_slack());
    for (k, x) in traj.states.iter().enumerate() {
        let nrm = x.norm();
        if nrm > limit {
            BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            return Err(Error::BoundViolation { node: k, norm: nrm.as_f64(), bound: bound.as_f64() });
        }
    }
    Ok(())
}

/// Constant `C = N · max(1, L_σ) · e` of the growth bound.
pub fn gronwall_constant(n_samples: usize, act: Activation) -> f64 {
    n_samples as f64 * act.lipschitz().max(1.0) * std::f64::consts::E
}

/// A priori bound `C (‖x0‖ + √T ‖b‖_{L²}) exp(√T ‖w‖_{L²})` on the stacked state norm.
///
/// The L² norms are those of the held (piecewise-constant) control, which makes the bound
/// rigorous for the Euler recursion as well as for the exact flow. For the bottleneck
/// field, `‖w‖` and `‖b‖` are replaced by the effective per-node rates `L‖w2‖‖w1‖` and
/// `L‖w2‖‖b1‖ + ‖b2‖`. Activations with `σ(0) ≠ 0` get an infinite bound.
pub fn gronwall_bound<S: Scalar>(x0: &Mat<S>, u: &ControlPath<S>, act: Activation) -> S {
    if !act.zero_at_zero() {
        return S::infinity();
    }
    let dt = u.dt();
    let l = S::c(act.lipschitz());
    let (mut w_sq, mut b_sq) = (S::zero(), S::zero());
    for k in 0..u.n_layers() {
        let (wn, bn) = match u.layout() {
            Layout::Standard { .. } => u.split_norms(k),
            Layout::Bottleneck { d, h } => {
                let node = u.node(k);
                let n = crate::linalg::norm::<S>;
                let w1 = n(&node[..h * d]);
                let w2 = n(&node[h * d..2 * h * d]);
                let b1 = n(&node[2 * h * d..2 * h * d + h]);
                let b2 = n(&node[2 * h * d + h..]);
                (l * w2 * w1, l * w2 * b1 + b2)
            }
        };
        w_sq = w_sq + dt * wn * wn;
        b_sq = b_sq + dt * bn * bn;
    }
    let root_t = u.horizon().sqrt();
    let c = S::c(gronwall_constant(x0.rows(), act));
    c * (x0.norm() + root_t * b_sq.sqrt()) * (root_t * w_sq.sqrt()).exp()
}

