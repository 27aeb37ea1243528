//! Losses, projectors, the cost functionals, their gradients and Adam training.

mod adam;
mod functional;
mod projector;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{Adam, AdamConfig};
pub use functional::{
    control_weights, cost, cost_and_grad, derivative_part, evaluate, grad, l1_norm, reg_norm, CostBreakdown,
    Evaluation, FunctionalSpec, Gradient, Regularization,
};
pub use projector::{training_error, LossKind, Projector, ProjectorKind};

use crate::dynamics::{Activation, ControlPath, Layout, Tag};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Radial projection of every node onto the ball `‖u^k‖ ≤ M`.
pub fn project_ball<S: Scalar>(u: &ControlPath<S>, m: S) -> ControlPath<S> {
    let mut out = u.clone();
    for k in 0..out.n_layers() {
        let nrm = out.node_norm(k);
        if nrm > m {
            let mut f = m / nrm;
            let orig = out.node(k).to_vec();
            // rounding can leave the norm a few ulps above m; shrink until feasible so that
            // projecting twice is a no-op
            loop {
                out.node_mut(k).iter_mut().zip(&orig).for_each(|(v, o)| *v = *o * f);
                if out.node_norm(k) <= m {
                    break;
                }
                f = f * (S::one() - S::epsilon());
            }
        }
    }
    out
}

/// Control with i.i.d. entries uniform on `[−scale, scale]`.
pub fn random_control<S: Scalar>(
    horizon: S,
    n_layers: usize,
    layout: Layout,
    scale: f64,
    seed: u64,
) -> Result<ControlPath<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_layers * layout.node_len())
        .map(|_| S::c(if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 }))
        .collect();
    ControlPath::new(horizon, n_layers, layout, values)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Cost at every evaluated iterate, starting with the initial guess.
    pub costs: Vec<f64>,
    pub cost: f64,
    pub training_error: f64,
    pub regularization: f64,
    pub tracking: f64,
    pub running_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_clock_s: f64,
}

impl TrainReport {
    fn record<S: Scalar>(&mut self, cost: S, b: &CostBreakdown<S>) {
        self.costs.push(cost.as_f64());
        self.cost = cost.as_f64();
        self.training_error = b.training_error.as_f64();
        self.regularization = b.regularization.as_f64();
        self.tracking = b.tracking.as_f64();
        self.running_loss = b.running_loss.as_f64();
    }
}

/// Result of a training run: the control, the (possibly updated) projector and the report.
#[derive(Clone, Debug)]
pub struct Trained<S> {
    pub control: ControlPath<S>,
    pub projector: Projector<S>,
    pub report: TrainReport,
}

/// Full-batch Adam on the cost. In `L¹` mode every step is followed by [`project_ball`].
///
/// Deterministic: the only randomness lives in the caller's initial guess and data.
pub fn adam_train<S: Scalar>(
    u_init: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
    cfg: &AdamConfig,
) -> Result<Trained<S>> {
    if !(cfg.lr > 0.0) {
        return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    let start = Instant::now();
    let mut spec = spec.clone();
    let bound = spec.l1_bound().map(S::c);
    let mut u = match bound {
        Some(m) => project_ball(u_init, m),
        None => u_init.clone(),
    };
    let n_u = u.values().len();
    let mut opt = Adam::new(n_u + spec.projector.param_len(), cfg.clone());
    let mut report = TrainReport::default();

    let abort = |it: usize, reason: String, mut report: TrainReport| {
        report.iterations = it;
        report.wall_clock_s = start.elapsed().as_secs_f64();
        Error::TrainingAborted { iteration: it, reason, report: Box::new(report) }
    };

    let mut it = 0;
    loop {
        let (eval, g) = match cost_and_grad(&u, x0, labels, &spec, tag, act) {
            Ok(r) => r,
            Err(e @ (Error::Divergence { .. } | Error::BoundViolation { .. })) => {
                return Err(abort(it, e.to_string(), report));
            }
            Err(e) => return Err(e),
        };
        if !eval.cost.is_finite() {
            return Err(abort(it, "non-finite cost".into(), report));
        }
        report.record(eval.cost, &eval.breakdown);
        if let Some(tol) = cfg.tol {
            if eval.breakdown.training_error.as_f64() <= tol {
                report.converged = true;
                break;
            }
        }
        if it == cfg.iters {
            break;
        }
        let mut params = u.values().to_vec();
        params.extend(spec.projector.params());
        opt.step(&mut params, &g.flat());
        u.values_mut().copy_from_slice(&params[..n_u]);
        spec.projector.set_params(&params[n_u..]);
        if let Some(m) = bound {
            u = project_ball(&u, m);
        }
        it += 1;
    }
    report.iterations = it;
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(Trained { control: u, projector: spec.projector, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    /// Normwise `‖g − fd‖_∞ / ‖g‖_∞` (falls back to the absolute error when g ≡ 0).
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub coordinates: usize,
}

/// Compares [`grad`] with central differences of step `h` over every control coordinate and,
/// if trainable, every projector coordinate.
pub fn finite_difference_check<S: Scalar>(
    u: &ControlPath<S>,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
    h: f64,
) -> Result<GradCheck> {
    let g = grad(u, x0, labels, spec, tag, act)?.flat();
    let n_u = u.values().len();
    let base: Vec<S> = u.values().iter().copied().chain(spec.projector.params()).collect();
    let eval = |p: &[S]| -> Result<f64> {
        let uu = u.with_values(p[..n_u].to_vec())?;
        let mut sp = spec.clone();
        sp.projector.set_params(&p[n_u..]);
        Ok(cost(&uu, x0, labels, &sp, tag, act)?.as_f64())
    };
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let mut abs = 0.0f64;
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + S::c(h);
        let fp = eval(&p)?;
        p[i] = base[i] - S::c(h);
        let fm = eval(&p)?;
        p[i] = base[i];
        let fd = (fp - fm) / (2.0 * h);
        let gi = g[i].as_f64();
        let err = (gi - fd).abs();
        abs = abs.max(err);
    }
    let rel = if gmax > 0.0 { abs / gmax } else { abs };
    Ok(GradCheck { max_rel_err: rel, max_abs_err: abs, coordinates: base.len() })
}
