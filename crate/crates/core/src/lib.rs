//! Continuous-time supervised learning with neural ODEs.
//!
//! The control `u(t) = [w(t), b(t)]` of `ẋ = f(u(t), x)` is discretized by direct shooting:
//! piecewise-constant parameters on a uniform grid, an explicit Euler scheme, and exact
//! reverse-mode gradients through the unrolled scheme. Everything is generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod control_bounds;
pub mod datasets;
pub mod dynamics;
pub mod error;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod nonlocal;
pub mod scalar;
pub mod scaling;
pub mod train;
pub mod turnpike;

pub use dynamics::{Activation, Layout, Scheme, Tag};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use train::{AdamConfig, LossKind, ProjectorKind, Regularization};

pub type Mat = linalg::Mat<f64>;
pub type ControlPath = dynamics::ControlPath<f64>;
pub type StackedTrajectory = dynamics::StackedTrajectory<f64>;
pub type Projector = train::Projector<f64>;
pub type FunctionalSpec = train::FunctionalSpec<f64>;
pub type Trained = train::Trained<f64>;
