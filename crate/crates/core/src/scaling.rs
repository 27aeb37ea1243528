//! Exact time rescaling of controls for positively homogeneous fields.
//!
//! If `f(λu, x) = λ f(u, x)` for `λ > 0`, then `u^T(t) = (T0/T) u(t T0/T)` on `[0, T]`
//! produces the trajectory of `u` reparametrized in time. With the node count kept fixed,
//! the Euler updates `Δt' f(u', x) = Δt f(u, x)` coincide node for node.

use crate::dynamics::{Activation, ControlPath, Tag};
use crate::error::{arg_err, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::train::{cost, reg_norm, training_error, FunctionalSpec, Regularization};

/// Maps a control on `[0, T0]` to `[0, T]`, keeping the node count.
pub fn rescale_control<S: Scalar>(u: &ControlPath<S>, horizon: S) -> Result<ControlPath<S>> {
    if !(horizon > S::zero()) || !horizon.is_finite() {
        return arg_err(format!("target horizon must be positive, got {horizon}"));
    }
    u.scaled(u.horizon() / horizon).with_horizon(horizon)
}

/// Whether the field is positively homogeneous of degree one in the control.
pub fn is_homogeneous(tag: Tag, act: Activation) -> bool {
    match tag {
        Tag::SigmaInside => true,
        Tag::SigmaOutside => act.positively_homogeneous(),
        Tag::Bottleneck => false,
    }
}

pub fn check_homogeneous(tag: Tag, act: Activation) -> Result<()> {
    if is_homogeneous(tag, act) {
        Ok(())
    } else {
        arg_err(format!("{tag} field with {act} is not positively homogeneous in the control"))
    }
}

/// Both sides of the scaled-cost identity for a weight-decay problem (`k = 0`, `β = 0`):
///
/// `lhs = J_T(rescale(u0, T))`, `rhs = φ(x^{u0}(T0)) + (α/2)(T0/T)‖u0‖²_{L²}`.
pub fn scaled_cost_identity<S: Scalar>(
    u0: &ControlPath<S>,
    horizon: S,
    x0: &Mat<S>,
    labels: &Mat<S>,
    spec: &FunctionalSpec<S>,
    tag: Tag,
    act: Activation,
) -> Result<(S, S)> {
    check_homogeneous(tag, act)?;
    if spec.regularization != Regularization::Sobolev(0) || spec.beta != S::zero() || !spec.include_final_cost {
        return arg_err("the scaled-cost identity needs k = 0, beta = 0 and the final cost");
    }
    let rescaled = rescale_control(u0, horizon)?;
    let lhs = cost(&rescaled, x0, labels, spec, tag, act)?;
    let traj = crate::dynamics::integrate_forward(x0, u0, tag, act, crate::dynamics::Scheme::Euler)?;
    let phi = training_error(traj.terminal(), labels, &spec.projector, spec.loss)?;
    let rhs = phi + S::c(0.5) * spec.alpha * (u0.horizon() / horizon) * reg_norm(u0, 0)?;
    Ok((lhs, rhs))
}
