//! Depth-growing training: shallow-then-deepen pre-training and windowed training for
//! tracking problems.

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_forward, Activation, ControlPath, Scheme, Tag};
use crate::error::{arg_err, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::train::{adam_train, random_control, AdamConfig, FunctionalSpec, Projector, TrainReport};

/// Deepens `u` (N0 nodes on `[0, T0]`) to `n1` nodes with step `dt`.
///
/// The node values are joined affinely (held constant past the last node), the resulting
/// path is rescaled to `T1 = n1·dt` as `(T0/T1)·ũ(s·T0/T1)`, and sampled at `k·dt`.
pub fn grow_depth<S: Scalar>(u: &ControlPath<S>, n1: usize, dt: S) -> Result<ControlPath<S>> {
    let n0 = u.n_layers();
    if n1 <= n0 {
        return arg_err(format!("new depth {n1} must exceed current depth {n0}"));
    }
    if !(dt > S::zero()) {
        return arg_err("step must be positive");
    }
    let t0 = u.horizon();
    let t1 = dt * S::c(n1 as f64);
    let ratio = t0 / t1;
    let dt0 = u.dt();
    let p = u.node_len();
    let mut values = Vec::with_capacity(n1 * p);
    for k in 0..n1 {
        let t = dt * S::c(k as f64) * ratio;
        let pos = t / dt0;
        let j = pos.floor().to_usize().unwrap_or(0);
        if j + 1 >= n0 {
            values.extend(u.node(n0 - 1).iter().map(|v| *v * ratio));
        } else {
            let f = pos - S::c(j as f64);
            let (a, b) = (u.node(j), u.node(j + 1));
            values.extend(a.iter().zip(b).map(|(x, y)| ratio * (*x + f * (*y - *x))));
        }
    }
    ControlPath::new(t1, n1, u.layout(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub dt: f64,
    /// Depths to visit in order; the first is the shallow starting network.
    pub schedule: Vec<usize>,
    /// Training-error tolerance that ends the schedule.
    pub tol: f64,
    pub adam: AdamConfig,
    pub init_scale: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome<S> {
    pub control: ControlPath<S>,
    pub projector: Projector<S>,
    pub reports: Vec<TrainReport>,
    pub depths: Vec<usize>,
    pub converged: bool,
}

/// Trains a shallow network, then repeatedly deepens it with [`grow_depth`] and retrains,
/// stopping at the first depth whose training error is within `tol`. The projector is
/// carried from stage to stage.
pub fn greedy_pretrain<S: Scalar>(
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
    layout: crate::dynamics::Layout,
    cfg: &GreedyConfig,
) -> Result<GreedyOutcome<S>> {
    if !(cfg.tol > 0.0) {
        return arg_err("tolerance must be positive");
    }
    if cfg.schedule.is_empty() || cfg.schedule.windows(2).any(|w| w[1] <= w[0]) {
        return arg_err("schedule must be non-empty and strictly increasing");
    }
    let dt = S::c(cfg.dt);
    let adam = cfg.adam.clone().with_tol(cfg.tol);
    let n0 = cfg.schedule[0];
    let mut u = random_control(dt * S::c(n0 as f64), n0, layout, cfg.init_scale, cfg.seed)?;
    let mut spec = spec.clone();
    let mut reports = Vec::new();
    let mut depths = Vec::new();
    for (stage, &n) in cfg.schedule.iter().enumerate() {
        if stage > 0 {
            u = grow_depth(&u, n, dt)?;
        }
        let trained = adam_train(&u, x0, labels, &spec, tag, act, &adam)?;
        u = trained.control;
        spec.projector = trained.projector;
        depths.push(n);
        let done = trained.report.converged;
        reports.push(trained.report);
        if done {
            return Ok(GreedyOutcome { control: u, projector: spec.projector, reports, depths, converged: true });
        }
    }
    Ok(GreedyOutcome { control: u, projector: spec.projector, reports, depths, converged: false })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Length `T1` of every window.
    pub window: f64,
    pub nodes_per_window: usize,
    /// Stop once `|φ(x(i T1)) − min φ| < tol`.
    pub tol: f64,
    pub max_windows: usize,
    pub adam: AdamConfig,
    pub init_scale: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct WindowedOutcome<S> {
    /// Window controls laid end to end on `[0, windows·T1]`.
    pub control: ControlPath<S>,
    pub projector: Projector<S>,
    pub reports: Vec<TrainReport>,
    pub windows: usize,
    pub converged: bool,
}

/// Solves the tracking problem on `[0, T1]`, `[T1, 2T1]`, … in turn. Each window starts
/// from the previous terminal state and is initialized with the previous window's control.
pub fn windowed_turnpike_train<S: Scalar>(
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
    layout: crate::dynamics::Layout,
    cfg: &WindowConfig,
) -> Result<WindowedOutcome<S>> {
    if !(cfg.window > 0.0) || !(cfg.tol > 0.0) {
        return arg_err("window length and tolerance must be positive");
    }
    if cfg.max_windows == 0 || cfg.nodes_per_window == 0 {
        return arg_err("need at least one window and one node per window");
    }
    if spec.include_final_cost || !(spec.beta > S::zero()) {
        return arg_err("windowed training expects a tracking functional without final cost");
    }
    let t1 = S::c(cfg.window);
    let mut u = random_control(t1, cfg.nodes_per_window, layout, cfg.init_scale, cfg.seed)?;
    let mut x = x0.clone();
    let mut values = Vec::new();
    let mut reports = Vec::new();
    let mut spec = spec.clone();
    let mut converged = false;
    for _ in 0..cfg.max_windows {
        let trained = adam_train(&u, &x, labels, &spec, tag, act, &cfg.adam)?;
        u = trained.control;
        spec.projector = trained.projector;
        values.extend_from_slice(u.values());
        x = integrate_forward(&x, &u, tag, act, Scheme::Euler)?.terminal().clone();
        let gap = (trained.report.training_error - spec.min_phi.as_f64()).abs();
        reports.push(trained.report);
        if gap < cfg.tol {
            converged = true;
            break;
        }
    }
    let windows = reports.len();
    let control = ControlPath::new(
        t1 * S::c(windows as f64),
        windows * cfg.nodes_per_window,
        layout,
        values,
    )?;
    Ok(WindowedOutcome { control, projector: spec.projector, reports, windows, converged })
}
