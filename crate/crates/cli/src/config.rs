//! TOML experiment configuration. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub dynamics: Dynamics,
    #[serde(default)]
    pub horizon: Horizon,
    #[serde(default)]
    pub functional: Functional,
    #[serde(default)]
    pub data: Data,
    #[serde(default)]
    pub optimizer: Optimizer,
    pub sweep: Option<Sweep>,
    pub greedy: Option<Greedy>,
    pub steer: Option<Steer>,
    pub bounds: Option<Bounds>,
    pub nonlocal: Option<Nonlocal>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Dynamics {
    /// `inside`, `outside` or `bottleneck`.
    pub tag: String,
    pub activation: String,
    /// State dimension after zero augmentation; defaults to the data dimension.
    pub width: Option<usize>,
    /// Hidden width of the bottleneck field.
    pub hidden: Option<usize>,
    pub scheme: String,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self { tag: "inside".into(), activation: "tanh".into(), width: None, hidden: None, scheme: "euler".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Horizon {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_layers: usize,
}

impl Default for Horizon {
    fn default() -> Self {
        Self { t: 1.0, n_layers: 10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Functional {
    pub alpha: f64,
    pub beta: f64,
    pub k: u8,
    pub loss: String,
    pub l1_bound: Option<f64>,
    /// Running target `±target` by label sign; required when `beta > 0`.
    pub target: Option<Vec<f64>>,
    pub final_cost: Option<bool>,
    /// `tanh_affine`, `linear`, `softmax` or `identity`.
    pub projector: String,
    pub projector_trainable: bool,
    pub projector_scale: f64,
}

impl Default for Functional {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            k: 0,
            loss: "mse".into(),
            l1_bound: None,
            target: None,
            final_cost: None,
            projector: "tanh_affine".into(),
            projector_trainable: true,
            projector_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Data {
    /// `spheres` or `points`.
    pub kind: String,
    /// Dimension of the generated spheres (1 or 2).
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub radii: [f64; 3],
    /// Inputs and labels for `kind = "points"`.
    pub points: Option<Vec<Vec<f64>>>,
    pub labels: Option<Vec<Vec<f64>>>,
}

impl Default for Data {
    fn default() -> Self {
        Self { kind: "spheres".into(), dim: 2, n: 128, seed: 0, radii: [0.5, 1.0, 1.5], points: None, labels: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Optimizer {
    pub lr: f64,
    pub iters: usize,
    /// Seed of the initial control and projector.
    pub seed: u64,
    pub init_scale: f64,
    pub tol: Option<f64>,
}

impl Default for Optimizer {
    fn default() -> Self {
        Self { lr: 1e-2, iters: 500, seed: 0, init_scale: 0.1, tol: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub horizons: Vec<f64>,
    /// Layers per horizon; defaults to `⌊T^{3/2}⌋` (at least 1).
    pub n_layers: Option<Vec<usize>>,
    /// Horizon the trained controls are rescaled to before taking norms.
    #[serde(default = "one")]
    pub reference: f64,
    /// Start each horizon from the previous solution, resampled onto the new grid.
    #[serde(default)]
    pub warm_start: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Greedy {
    /// `pretrain` (deepening schedule) or `windowed`.
    #[serde(default = "pretrain")]
    pub mode: String,
    pub dt: Option<f64>,
    pub schedule: Option<Vec<usize>>,
    pub tol: f64,
    pub window: Option<f64>,
    pub nodes_per_window: Option<usize>,
    pub max_windows: Option<usize>,
}

fn pretrain() -> String {
    "pretrain".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Steer {
    pub x0: Vec<Vec<f64>>,
    pub x1: Vec<Vec<f64>>,
    pub horizons: Vec<f64>,
    #[serde(default = "steps")]
    pub n_steps: usize,
}

fn steps() -> usize {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    /// Inputs and targets; taken from `[data]` and the trained terminal states when `train = true`.
    pub x0: Option<Vec<Vec<f64>>>,
    pub x1: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub train: bool,
    pub lipschitz: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlocal {
    pub widths: Vec<usize>,
    /// `sin`, `affine` or `zero`.
    #[serde(default = "sin")]
    pub profile: String,
    /// Amplitude of a random smooth kernel; zero passes the profile through.
    #[serde(default)]
    pub kernel_scale: f64,
    /// Width and depth of the random fixed-grid equivalence check.
    #[serde(default = "four")]
    pub dirac_width: usize,
    #[serde(default = "ten")]
    pub dirac_layers: usize,
}

fn sin() -> String {
    "sin".into()
}

fn four() -> usize {
    4
}

fn ten() -> usize {
    10
}
