#![allow(dead_code)]

use odenet::dynamics::{ControlPath, Layout};
use odenet::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| rng.gen_range(-scale..=scale))
}

pub fn rand_control(rng: &mut ChaCha8Rng, horizon: f64, n: usize, layout: Layout, scale: f64) -> ControlPath<f64> {
    let values = (0..n * layout.node_len()).map(|_| rng.gen_range(-scale..=scale)).collect();
    ControlPath::new(horizon, n, layout, values).unwrap()
}

pub fn scalar_path(horizon: f64, values: &[f64]) -> ControlPath<f64> {
    // d = 1 standard layout: node = [w, b]
    let v = values.iter().flat_map(|b| [0.0, *b]).collect();
    ControlPath::new(horizon, values.len(), Layout::Standard { d: 1 }, v).unwrap()
}
