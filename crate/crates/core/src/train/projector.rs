use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{dot, Mat};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectorKind {
    Linear,
    Softmax,
    /// `tanh(θ1 x + θ2)` with scalar output.
    TanhAffine,
}

impl FromStr for ProjectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "softmax" => Ok(Self::Softmax),
            "tanh_affine" | "tanh" => Ok(Self::TanhAffine),
            _ => arg_err(format!("unknown projector `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// `(1/2m) Σ_j |p_j − y_j|²`
    Mse,
    /// `log(1 + exp(−⟨p, y⟩))`
    Logistic,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(Self::Mse),
            "logistic" => Ok(Self::Logistic),
            _ => arg_err(format!("unknown loss `{s}`")),
        }
    }
}

/// Maps terminal states to predictions: `g(θ1 x + θ2)` with `g` the identity, softmax or tanh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Projector<S> {
    kind: ProjectorKind,
    theta1: Mat<S>,
    theta2: Vec<S>,
    trainable: bool,
}

impl<S: Scalar> Projector<S> {
    pub fn new(kind: ProjectorKind, theta1: Mat<S>, theta2: Vec<S>, trainable: bool) -> Result<Self> {
        if theta1.rows() != theta2.len() {
            return dim_err("theta1 rows must match theta2 length");
        }
        if theta1.rows() == 0 || theta1.cols() == 0 {
            return dim_err("empty projector");
        }
        if kind == ProjectorKind::TanhAffine && theta1.rows() != 1 {
            return arg_err("tanh-affine projector has a single output");
        }
        Ok(Self { kind, theta1, theta2, trainable })
    }

    /// Frozen identity map on `R^d`.
    pub fn identity(d: usize) -> Self {
        Self {
            kind: ProjectorKind::Linear,
            theta1: Mat::identity(d),
            theta2: vec![S::zero(); d],
            trainable: false,
        }
    }

    /// Tanh-affine readout with `θ1` drawn uniformly from `[−scale, scale]` and `θ2 = 0`.
    pub fn random_tanh_affine(d: usize, scale: f64, seed: u64, trainable: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta1 = Mat::from_fn(1, d, |_, _| S::c(rng.gen_range(-scale..=scale)));
        Self { kind: ProjectorKind::TanhAffine, theta1, theta2: vec![S::zero()], trainable }
    }

    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    pub fn theta1(&self) -> &Mat<S> {
        &self.theta1
    }

    pub fn theta2(&self) -> &[S] {
        &self.theta2
    }

    pub fn trainable(&self) -> bool {
        self.trainable
    }

    pub fn set_trainable(&mut self, trainable: bool) {
        self.trainable = trainable;
    }

    pub fn input_dim(&self) -> usize {
        self.theta1.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.theta1.rows()
    }

    /// Number of trainable scalars (zero when frozen).
    pub fn param_len(&self) -> usize {
        if self.trainable {
            self.theta1.data().len() + self.theta2.len()
        } else {
            0
        }
    }

    /// `θ1` (row-major) followed by `θ2`, or empty when frozen.
    pub fn params(&self) -> Vec<S> {
        if !self.trainable {
            return Vec::new();
        }
        let mut p = self.theta1.data().to_vec();
        p.extend_from_slice(&self.theta2);
        p
    }

    pub fn set_params(&mut self, p: &[S]) {
        if !self.trainable {
            return;
        }
        let n1 = self.theta1.data().len();
        self.theta1.data_mut().copy_from_slice(&p[..n1]);
        self.theta2.copy_from_slice(&p[n1..]);
    }

    fn pre_activation(&self, x: &[S]) -> Vec<S> {
        let mut z = self.theta1.mul_vec(x);
        for (zi, t) in z.iter_mut().zip(&self.theta2) {
            *zi = *zi + *t;
        }
        z
    }

    fn squash(&self, z: &[S]) -> Vec<S> {
        match self.kind {
            ProjectorKind::Linear => z.to_vec(),
            ProjectorKind::TanhAffine => z.iter().map(|v| v.tanh()).collect(),
            ProjectorKind::Softmax => {
                let mx = z.iter().fold(S::neg_infinity(), |m, v| m.max(*v));
                let e: Vec<S> = z.iter().map(|v| (*v - mx).exp()).collect();
                let s: S = e.iter().copied().sum();
                e.into_iter().map(|v| v / s).collect()
            }
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.squash(&self.pre_activation(x))
    }

    /// Loss of one sample and its gradients with respect to `x` and (if trainable) `θ`.
    pub(crate) fn loss_grad(&self, x: &[S], y: &[S], loss: LossKind) -> (S, Vec<S>, Vec<S>) {
        let z = self.pre_activation(x);
        let p = self.squash(&z);
        let (l, dp) = loss_and_grad(&p, y, loss);
        let dz: Vec<S> = match self.kind {
            ProjectorKind::Linear => dp,
            ProjectorKind::TanhAffine => {
                dp.iter().zip(&p).map(|(g, pi)| *g * (S::one() - *pi * *pi)).collect()
            }
            ProjectorKind::Softmax => {
                let s = dot(&dp, &p);
                dp.iter().zip(&p).map(|(g, pi)| *pi * (*g - s)).collect()
            }
        };
        let d = x.len();
        let mut dx = vec![S::zero(); d];
        crate::linalg::gemv_t_acc(self.theta1.data(), z.len(), d, &dz, &mut dx);
        let dtheta = if self.trainable {
            let mut g = vec![S::zero(); self.param_len()];
            crate::linalg::outer_acc(&mut g[..z.len() * d], &dz, x, S::one());
            g[z.len() * d..].copy_from_slice(&dz);
            g
        } else {
            Vec::new()
        };
        (l, dx, dtheta)
    }

    pub fn sample_loss(&self, x: &[S], y: &[S], loss: LossKind) -> S {
        loss_and_grad(&self.apply(x), y, loss).0
    }
}

/// `log(1 + e^v)` without overflow.
fn softplus<S: Scalar>(v: S) -> S {
    if v > S::zero() {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn loss_and_grad<S: Scalar>(p: &[S], y: &[S], loss: LossKind) -> (S, Vec<S>) {
    match loss {
        LossKind::Mse => {
            let m = S::c(p.len() as f64);
            let r: Vec<S> = p.iter().zip(y).map(|(a, b)| *a - *b).collect();
            let l = dot(&r, &r) / (S::c(2.0) * m);
            (l, r.into_iter().map(|v| v / m).collect())
        }
        LossKind::Logistic => {
            let s = dot(p, y);
            // d/ds log(1 + e^{−s}) = −1 / (1 + e^{s})
            let ds = -(S::one() / (S::one() + s.exp()));
            (softplus(-s), y.iter().map(|v| ds * *v).collect())
        }
    }
}

/// Mean loss of the projected states against the labels.
pub fn training_error<S: Scalar>(
    states: &Mat<S>,
    labels: &Mat<S>,
    projector: &Projector<S>,
    loss: LossKind,
) -> Result<S> {
    check_labels(states, labels, projector)?;
    let total: S = (0..states.rows())
        .map(|i| projector.sample_loss(states.row(i), labels.row(i), loss))
        .sum();
    Ok(total / S::c(states.rows() as f64))
}

pub(crate) fn check_labels<S: Scalar>(
    states: &Mat<S>,
    labels: &Mat<S>,
    projector: &Projector<S>,
) -> Result<()> {
    if states.rows() != labels.rows() {
        return dim_err(format!("{} states but {} labels", states.rows(), labels.rows()));
    }
    if projector.input_dim() != states.cols() || projector.output_dim() != labels.cols() {
        return dim_err(format!(
            "projector maps R^{} -> R^{}, data is {} -> {}",
            projector.input_dim(),
            projector.output_dim(),
            states.cols(),
            labels.cols()
        ));
    }
    Ok(())
}
