use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    field_row_vjp, integrate_forward, Activation, ControlPath, Scheme, StackedTrajectory, Tag, ROW_CHUNK,
};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{dist_sq, norm, trapezoid_weights, Mat};
use crate::scalar::Scalar;

use super::projector::{check_labels, LossKind, Projector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Regularization {
    /// Squared `H^k` norm, `k ∈ {0, 1}`.
    Sobolev(u8),
    /// `L¹` norm of `‖u(t)‖` under the pointwise constraint `‖u(t)‖ ≤ bound`.
    L1 { bound: f64 },
}

/// Which cost to minimize:
///
/// `[final]·φ(x(T)) + (α/2)·reg(u) + (β/2)∫‖x − x_d‖² + [L¹ mode]·∫φ(x(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FunctionalSpec<S> {
    pub loss: LossKind,
    pub projector: Projector<S>,
    pub alpha: S,
    pub beta: S,
    pub regularization: Regularization,
    /// Running target, one row per sample.
    pub target: Option<Mat<S>>,
    pub include_final_cost: bool,
    /// Reference minimum of the training error used by tolerance-based stopping rules.
    pub min_phi: S,
}

impl<S: Scalar> FunctionalSpec<S> {
    /// Plain weight-decay problem: `φ(x(T)) + (α/2)‖u‖²_{H^k}`.
    pub fn weight_decay(loss: LossKind, projector: Projector<S>, alpha: S, k: u8) -> Self {
        Self {
            loss,
            projector,
            alpha,
            beta: S::zero(),
            regularization: Regularization::Sobolev(k),
            target: None,
            include_final_cost: true,
            min_phi: S::zero(),
        }
    }

    /// Adds the running tracking term `(β/2)∫‖x − x_d‖²`.
    pub fn with_tracking(mut self, beta: S, target: Mat<S>) -> Self {
        self.beta = beta;
        self.target = Some(target);
        self
    }

    /// `(α/2)‖u‖_{L¹} + ∫φ(x(t))` with `‖u(t)‖ ≤ bound`; no final cost.
    pub fn l1(loss: LossKind, projector: Projector<S>, alpha: S, bound: f64) -> Self {
        Self {
            loss,
            projector,
            alpha,
            beta: S::zero(),
            regularization: Regularization::L1 { bound },
            target: None,
            include_final_cost: false,
            min_phi: S::zero(),
        }
    }

    pub fn is_l1(&self) -> bool {
        matches!(self.regularization, Regularization::L1 { .. })
    }

    pub fn l1_bound(&self) -> Option<f64> {
        match self.regularization {
            Regularization::L1 { bound } => Some(bound),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= S::zero()) || !(self.beta >= S::zero()) {
            return arg_err("alpha and beta must be nonnegative");
        }
        match self.regularization {
            Regularization::Sobolev(k) if k > 1 => return arg_err(format!("Sobolev order {k} not in {{0, 1}}")),
            Regularization::L1 { bound } if !(bound > 0.0) => return arg_err("L1 bound must be positive"),
            _ => {}
        }
        if self.beta > S::zero() && self.target.is_none() {
            return arg_err("beta > 0 requires a running target");
        }
        if !self.include_final_cost && !self.is_l1() && !(self.beta > S::zero()) {
            return arg_err("dropping the final cost requires beta > 0");
        }
        Ok(())
    }
}

/// Trapezoid weights of the held control: samples at `t_0..t_N` with `u(t_N) := u^{N−1}`.
pub fn control_weights<S: Scalar>(n_layers: usize, dt: S) -> Vec<S> {
    let mut w = trapezoid_weights(n_layers, dt);
    let last = w.pop().expect("n_layers >= 1");
    w[n_layers - 1] = w[n_layers - 1] + last;
    w
}

/// Squared `H^k` norm by the trapezoid rule; the `k = 1` part sums `‖u^{k+1} − u^k‖²/Δt`.
pub fn reg_norm<S: Scalar>(u: &ControlPath<S>, k: u8) -> Result<S> {
    let n = u.n_layers();
    if k > 1 {
        return arg_err(format!("Sobolev order {k} not in {{0, 1}}"));
    }
    if k == 1 && n < 2 {
        return arg_err("H1 norm needs at least two nodes");
    }
    let dt = u.dt();
    let w = control_weights(n, dt);
    let mut total = (0..n).fold(S::zero(), |s, j| {
        let v = u.node_norm(j);
        s + w[j] * v * v
    });
    if k == 1 {
        total = total + derivative_part(u);
    }
    Ok(total)
}

/// `Σ_k ‖u^{k+1} − u^k‖² / Δt`.
pub fn derivative_part<S: Scalar>(u: &ControlPath<S>) -> S {
    let dt = u.dt();
    (0..u.n_layers().saturating_sub(1))
        .fold(S::zero(), |s, j| s + dist_sq(u.node(j + 1), u.node(j)) / dt)
}

/// Trapezoid rule of `‖u(t)‖` for the held control.
pub fn l1_norm<S: Scalar>(u: &ControlPath<S>) -> S {
    let w = control_weights(u.n_layers(), u.dt());
    (0..u.n_layers()).fold(S::zero(), |s, j| s + w[j] * u.node_norm(j))
}

/// Unweighted pieces of the cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CostBreakdown<S> {
    /// `φ(x(T))`, computed whether or not it enters the cost.
    pub training_error: S,
    /// `‖u‖²_{H^k}` or `‖u‖_{L¹}`.
    pub regularization: S,
    /// `∫‖x − x_d‖²`.
    pub tracking: S,
    /// `∫φ(x(t))`.
    pub running_loss: S,
}

pub struct Evaluation<S> {
    pub cost: S,
    pub breakdown: CostBreakdown<S>,
    pub trajectory: StackedTrajectory<S>,
}

/// Gradient with respect to the node values (same layout as [`ControlPath::values`])
/// and, when the projector is trainable, `θ1` and `θ2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient<S> {
    pub control: Vec<S>,
    pub projector: Vec<S>,
}

impl<S: Scalar> Gradient<S> {
    pub fn flat(&self) -> Vec<S> {
        let mut g = self.control.clone();
        g.extend_from_slice(&self.projector);
        g
    }
}

fn check_problem<S: Scalar>(u: &ControlPath<S>, x0: &Mat<S>, labels: &Mat<S>, spec: &FunctionalSpec<S>) -> Result<()> {
    spec.validate()?;
    check_labels(x0, labels, &spec.projector)?;
    if let Some(t) = &spec.target {
        if t.shape() != x0.shape() {
            return dim_err("running target must have the shape of the stacked state");
        }
    }
    if let Regularization::Sobolev(1) = spec.regularization {
        if u.n_layers() < 2 {
            return arg_err("H1 regularization needs at least two nodes");
        }
    }
    if let Some(m) = spec.l1_bound() {
        let limit = S::c(m) * (S::one() + S::check_slack());
        for k in 0..u.n_layers() {
            let nrm = u.node_norm(k);
            if nrm > limit {
                return Err(Error::Constraint { node: k, norm: nrm.as_f64(), bound: m });
            }
        }
    }
    Ok(())
}

fn mean_loss<S: Scalar>(x: &Mat<S>, labels: &Mat<S>, spec: &FunctionalSpec<S>) -> S {
    let total: S = (0..x.rows())
        .map(|i| spec.projector.sample_loss(x.row(i), labels.row(i), spec.loss))
        .sum();
    total / S::c(x.rows() as f64)
}

/// Integrates (Euler) and evaluates the cost.
pub fn evaluate<S: Scalar>(
    u: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
) -> Result<Evaluation<S>> {
    check_problem(u, x0, labels, spec)?;
    let trajectory = integrate_forward(x0, u, tag, act, Scheme::Euler)?;
    let n = u.n_layers();
    let tau = trapezoid_weights(n, u.dt());
    let half = S::c(0.5);

    let training_error = mean_loss(trajectory.terminal(), labels, spec);
    let regularization = match spec.regularization {
        Regularization::Sobolev(k) => reg_norm(u, k)?,
        Regularization::L1 { .. } => l1_norm(u),
    };
    let tracking = match &spec.target {
        Some(xd) => trajectory
            .states
            .iter()
            .zip(&tau)
            .fold(S::zero(), |s, (x, w)| s + *w * dist_sq(x.data(), xd.data())),
        None => S::zero(),
    };
    let running_loss = if spec.is_l1() {
        trajectory
            .states
            .iter()
            .zip(&tau)
            .fold(S::zero(), |s, (x, w)| s + *w * mean_loss(x, labels, spec))
    } else {
        S::zero()
    };

    let mut cost = half * spec.alpha * regularization + half * spec.beta * tracking + running_loss;
    if spec.include_final_cost {
        cost = cost + training_error;
    }
    Ok(Evaluation {
        cost,
        breakdown: CostBreakdown { training_error, regularization, tracking, running_loss },
        trajectory,
    })
}

pub fn cost<S: Scalar>(
    u: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
) -> Result<S> {
    Ok(evaluate(u, x0, labels, spec, tag, act)?.cost)
}

/// Cost and its exact reverse-mode gradient through the unrolled Euler scheme.
pub fn cost_and_grad<S: Scalar>(
    u: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
) -> Result<(Evaluation<S>, Gradient<S>)> {
    let eval = evaluate(u, x0, labels, spec, tag, act)?;
    let grad = backward(u, labels, spec, tag, act, &eval.trajectory);
    Ok((eval, grad))
}

pub fn grad<S: Scalar>(
    u: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
) -> Result<Gradient<S>> {
    Ok(cost_and_grad(u, x0, labels, spec, tag, act)?.1)
}

fn backward<S: Scalar>(
    u: &ControlPath<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
    traj: &StackedTrajectory<S>,
) -> Gradient<S> {
    let layout = u.layout();
    let d = layout.state_dim();
    let p_len = layout.node_len();
    let n = u.n_layers();
    let dt = u.dt();
    let rows = labels.rows();
    let inv_rows = S::one() / S::c(rows as f64);
    let tau = trapezoid_weights(n, dt);
    let theta_len = spec.projector.param_len();
    let running = spec.is_l1();

    // Weight of φ's gradient at node k: terminal cost plus the running-loss quadrature.
    let phi_weight = |k: usize| {
        let mut w = if running { tau[k] } else { S::zero() };
        if k == n && spec.include_final_cost {
            w = w + S::one();
        }
        w * inv_rows
    };

    let chunk_grads: Vec<(Vec<S>, Vec<S>)> = (0..rows.div_ceil(ROW_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut gu = vec![S::zero(); u.values().len()];
            let mut gth = vec![S::zero(); theta_len];
            let mut lam = vec![S::zero(); d];
            let mut gx = vec![S::zero(); d];
            let mut a = vec![S::zero(); d];
            let add_running = |k: usize, i: usize, lam: &mut [S], gth: &mut [S]| {
                let x = traj.states[k].row(i);
                let wphi = phi_weight(k);
                if wphi != S::zero() {
                    let (_, dx, dth) = spec.projector.loss_grad(x, labels.row(i), spec.loss);
                    for (l, g) in lam.iter_mut().zip(&dx) {
                        *l = *l + wphi * *g;
                    }
                    for (t, g) in gth.iter_mut().zip(&dth) {
                        *t = *t + wphi * *g;
                    }
                }
                if let Some(xd) = &spec.target {
                    let wb = spec.beta * tau[k];
                    if wb != S::zero() {
                        for ((l, xv), tv) in lam.iter_mut().zip(x).zip(xd.row(i)) {
                            *l = *l + wb * (*xv - *tv);
                        }
                    }
                }
            };
            for i in c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(rows) {
                lam.iter_mut().for_each(|v| *v = S::zero());
                add_running(n, i, &mut lam, &mut gth);
                for k in (0..n).rev() {
                    for (ai, li) in a.iter_mut().zip(&lam) {
                        *ai = dt * *li;
                    }
                    field_row_vjp(
                        tag,
                        layout,
                        u.node(k),
                        act,
                        traj.states[k].row(i),
                        &a,
                        &mut gu[k * p_len..(k + 1) * p_len],
                        &mut gx,
                    );
                    for (li, g) in lam.iter_mut().zip(&gx) {
                        *li = *li + *g;
                    }
                    add_running(k, i, &mut lam, &mut gth);
                }
            }
            (gu, gth)
        })
        .collect();

    // Fixed-order reduction keeps the result independent of the thread count.
    let mut control = vec![S::zero(); u.values().len()];
    let mut projector = vec![S::zero(); theta_len];
    for (gu, gth) in chunk_grads {
        control.iter_mut().zip(gu).for_each(|(a, b)| *a = *a + b);
        projector.iter_mut().zip(gth).for_each(|(a, b)| *a = *a + b);
    }

    add_reg_grad(u, spec, &mut control);
    Gradient { control, projector }
}

fn add_reg_grad<S: Scalar>(u: &ControlPath<S>, spec: &FunctionalSpec<S>, g: &mut [S]) {
    let n = u.n_layers();
    let p = u.node_len();
    let dt = u.dt();
    let alpha = spec.alpha;
    if alpha == S::zero() {
        return;
    }
    let w = control_weights(n, dt);
    match spec.regularization {
        Regularization::Sobolev(k) => {
            for j in 0..n {
                for (gv, uv) in g[j * p..(j + 1) * p].iter_mut().zip(u.node(j)) {
                    *gv = *gv + alpha * w[j] * *uv;
                }
            }
            if k == 1 {
                let c = alpha / dt;
                for j in 0..n - 1 {
                    for q in 0..p {
                        let diff = u.node(j + 1)[q] - u.node(j)[q];
                        g[(j + 1) * p + q] = g[(j + 1) * p + q] + c * diff;
                        g[j * p + q] = g[j * p + q] - c * diff;
                    }
                }
            }
        }
        Regularization::L1 { .. } => {
            let half = S::c(0.5);
            for j in 0..n {
                let nrm = norm(u.node(j));
                if nrm == S::zero() {
                    continue;
                }
                let f = half * alpha * w[j] / nrm;
                for (gv, uv) in g[j * p..(j + 1) * p].iter_mut().zip(u.node(j)) {
                    *gv = *gv + f * *uv;
                }
            }
        }
    }
}
