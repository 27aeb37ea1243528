//! Synthetic data: concentric spheres and zero augmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl Default for Radii {
    fn default() -> Self {
        Self { r1: 0.5, r2: 1.0, r3: 1.5 }
    }
}

/// Inner ball `|x| ≤ r1` labelled −1, shell `r2 ≤ |x| ≤ r3` labelled +1.
///
/// Even indices belong to the inner class, so the classes differ by at most one sample.
/// Radii are uniform in their band and directions uniform on the sphere.
pub fn concentric_spheres<S: Scalar>(dim: usize, n: usize, radii: Radii, seed: u64) -> Result<(Mat<S>, Mat<S>)> {
    let Radii { r1, r2, r3 } = radii;
    if !(0.0 < r1 && r1 < r2 && r2 <= r3) {
        return arg_err(format!("radii must satisfy 0 < r1 < r2 <= r3, got {r1}, {r2}, {r3}"));
    }
    if !(1..=2).contains(&dim) {
        return arg_err(format!("dimension must be 1 or 2, got {dim}"));
    }
    if n < 2 {
        return arg_err("need at least two samples");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * dim);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let inner = i % 2 == 0;
        let r = if inner { rng.gen_range(0.0..=r1) } else { rng.gen_range(r2..=r3) };
        if dim == 1 {
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            x.push(S::c(s * r));
        } else {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            x.push(S::c(r * a.cos()));
            x.push(S::c(r * a.sin()));
        }
        y.push(S::c(if inner { -1.0 } else { 1.0 }));
    }
    Ok((Mat::new(n, dim, x)?, Mat::new(n, 1, y)?))
}

/// Appends `d_aug − d` zero coordinates to every row.
pub fn augment_zeros<S: Scalar>(x: &Mat<S>, d_aug: usize) -> Result<Mat<S>> {
    if d_aug < x.cols() {
        return arg_err(format!("cannot augment {} columns to {d_aug}", x.cols()));
    }
    Ok(Mat::from_fn(x.rows(), d_aug, |i, j| if j < x.cols() { x.get(i, j) } else { S::zero() }))
}

/// Running target placing each sample at `+c` or `−c` according to the sign of its label.
pub fn label_targets<S: Scalar>(labels: &Mat<S>, point: &[S]) -> Mat<S> {
    Mat::from_fn(labels.rows(), point.len(), |i, j| {
        if labels.get(i, 0) > S::zero() {
            point[j]
        } else {
            -point[j]
        }
    })
}
