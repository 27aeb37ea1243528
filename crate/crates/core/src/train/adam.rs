use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub iters: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Stop as soon as the training error drops to this value.
    pub tol: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, iters: 1000, beta1: 0.9, beta2: 0.999, eps: 1e-8, tol: None }
    }
}

impl AdamConfig {
    pub fn new(lr: f64, iters: usize) -> Self {
        Self { lr, iters, ..Self::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }
}

/// Bias-corrected Adam state for a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam<S> {
    cfg: AdamConfig,
    m: Vec<S>,
    v: Vec<S>,
    t: i32,
}

impl<S: Scalar> Adam<S> {
    pub fn new(n: usize, cfg: AdamConfig) -> Self {
        Self { cfg, m: vec![S::zero(); n], v: vec![S::zero(); n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [S], grad: &[S]) {
        assert_eq!(params.len(), self.m.len(), "parameter length changed between steps");
        self.t += 1;
        let b1 = S::c(self.cfg.beta1);
        let b2 = S::c(self.cfg.beta2);
        let one = S::one();
        let c1 = one - b1.powi(self.t);
        let c2 = one - b2.powi(self.t);
        let lr = S::c(self.cfg.lr);
        let eps = S::c(self.cfg.eps);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] = params[i] - lr * mh / (vh.sqrt() + eps);
        }
    }
}
