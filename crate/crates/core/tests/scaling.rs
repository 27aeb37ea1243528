mod common;

use approx::assert_relative_eq;
use odenet::datasets::{augment_zeros, concentric_spheres, Radii};
use odenet::dynamics::{integrate_forward, Activation, ControlPath, Layout, Scheme, Tag};
use odenet::linalg::Mat;
use odenet::scaling::{check_homogeneous, is_homogeneous, rescale_control, scaled_cost_identity};
use odenet::train::{
    adam_train, cost, reg_norm, training_error, AdamConfig, FunctionalSpec, LossKind, Projector, ProjectorKind,
};

use common::{rand_control, rand_mat, rng};

#[test]
fn identity_and_constant_example() {
    let mut r = rng(0);
    let u = rand_control(&mut r, 2.0, 5, Layout::Standard { d: 2 }, 1.0);
    assert_eq!(rescale_control(&u, 2.0).unwrap(), u);

    let one = ControlPath::constant(1.0, 10, Layout::Standard { d: 1 }, &[1.0, 0.0]).unwrap();
    let v = rescale_control(&one, 4.0).unwrap();
    assert_eq!(v.horizon(), 4.0);
    assert_eq!(v.n_layers(), 10);
    assert!(v.nodes().all(|n| n == [0.25, 0.0]));
    assert_relative_eq!(reg_norm(&one, 0).unwrap(), 1.0, epsilon = 1e-14);
    assert_relative_eq!(reg_norm(&v, 0).unwrap(), 0.25, epsilon = 1e-14);
}

#[test]
fn rejects_bad_horizon_and_non_homogeneous_fields() {
    let u = ControlPath::constant(1.0, 2, Layout::Standard { d: 1 }, &[1.0, 0.0]).unwrap();
    assert!(rescale_control(&u, 0.0).is_err());
    assert!(rescale_control(&u, -1.0).is_err());
    assert!(rescale_control(&u, f64::NAN).is_err());
    assert!(is_homogeneous(Tag::SigmaInside, Activation::Tanh));
    assert!(is_homogeneous(Tag::SigmaOutside, Activation::Relu));
    assert!(is_homogeneous(Tag::SigmaOutside, Activation::LeakyRelu(0.1)));
    assert!(check_homogeneous(Tag::SigmaOutside, Activation::Tanh).is_err());
    assert!(check_homogeneous(Tag::Bottleneck, Activation::Relu).is_err());
}

#[test]
fn rescaling_is_a_group_action() {
    let mut r = rng(1);
    let u = rand_control(&mut r, 1.5, 7, Layout::Standard { d: 3 }, 2.0);
    let a = rescale_control(&rescale_control(&u, 4.0).unwrap(), 9.0).unwrap();
    let b = rescale_control(&u, 9.0).unwrap();
    assert_eq!(a.horizon(), b.horizon());
    for (p, q) in a.values().iter().zip(b.values()) {
        assert_relative_eq!(*p, *q, max_relative = 1e-15);
    }
}

#[test]
fn regularization_scaling_laws() {
    let mut r = rng(2);
    let u = rand_control(&mut r, 1.0, 12, Layout::Standard { d: 2 }, 1.0);
    for t in [0.5, 3.0, 10.0] {
        let v = rescale_control(&u, t).unwrap();
        let ratio = 1.0 / t;
        assert_relative_eq!(reg_norm(&v, 0).unwrap(), ratio * reg_norm(&u, 0).unwrap(), max_relative = 1e-13);
        let du = reg_norm(&u, 1).unwrap() - reg_norm(&u, 0).unwrap();
        let dv = reg_norm(&v, 1).unwrap() - reg_norm(&v, 0).unwrap();
        assert_relative_eq!(dv, ratio.powi(3) * du, max_relative = 1e-12);
    }
}

#[test]
fn euler_trajectories_coincide_node_for_node() {
    let mut r = rng(3);
    let x0 = rand_mat(&mut r, 9, 3, 1.0);
    for (tag, act) in [
        (Tag::SigmaInside, Activation::Tanh),
        (Tag::SigmaInside, Activation::Sigmoid),
        (Tag::SigmaOutside, Activation::Relu),
        (Tag::SigmaOutside, Activation::LeakyRelu(0.2)),
    ] {
        let u = rand_control(&mut r, 1.0, 20, Layout::Standard { d: 3 }, 1.5);
        let a = integrate_forward(&x0, &u, tag, act, Scheme::Euler).unwrap();
        for t in [0.1, 7.0, 81.0] {
            let b = integrate_forward(&x0, &rescale_control(&u, t).unwrap(), tag, act, Scheme::Euler).unwrap();
            for (sa, sb) in a.states.iter().zip(&b.states) {
                assert!(sa.max_abs_diff(sb) <= 1e-12, "{tag:?} {act:?} T={t}");
            }
        }
    }
}

#[test]
fn trained_sweep_controls_share_endpoints_after_rescaling() {
    let (x, y) = concentric_spheres::<f64>(2, 64, Radii::default(), 5).unwrap();
    let x0 = augment_zeros(&x, 3).unwrap();
    let spec = FunctionalSpec::weight_decay(LossKind::Mse, Projector::random_tanh_affine(3, 1.0, 1, false), 1.0, 0);
    let u0 = odenet::train::random_control(9.0, 27, Layout::Standard { d: 3 }, 0.1, 2).unwrap();
    let t = adam_train(&u0, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh, &AdamConfig::new(1e-2, 30)).unwrap();
    let back = rescale_control(&t.control, 1.0).unwrap();
    let a = integrate_forward(&x0, &t.control, Tag::SigmaInside, Activation::Tanh, Scheme::Euler).unwrap();
    let b = integrate_forward(&x0, &back, Tag::SigmaInside, Activation::Tanh, Scheme::Euler).unwrap();
    assert!(a.terminal().max_abs_diff(b.terminal()) <= 1e-12);
}

fn identity_spec(r: &mut rand_chacha::ChaCha8Rng, d: usize, alpha: f64) -> FunctionalSpec<f64> {
    let p = Projector::new(ProjectorKind::TanhAffine, rand_mat(r, 1, d, 1.0), vec![0.2], false).unwrap();
    FunctionalSpec::weight_decay(LossKind::Mse, p, alpha, 0)
}

#[test]
fn zero_control_identity() {
    let mut r = rng(4);
    let x0 = rand_mat(&mut r, 5, 2, 1.0);
    let y = Mat::from_fn(5, 1, |i, _| if i < 2 { 1.0 } else { -1.0 });
    let spec = identity_spec(&mut r, 2, 1.0);
    let u0 = ControlPath::zeros(1.0, 4, Layout::Standard { d: 2 }).unwrap();
    let (lhs, rhs) = scaled_cost_identity(&u0, 6.0, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh).unwrap();
    let phi0 = training_error(&x0, &y, &spec.projector, LossKind::Mse).unwrap();
    assert_relative_eq!(lhs, phi0, epsilon = 1e-15);
    assert_relative_eq!(rhs, phi0, epsilon = 1e-15);
}

#[test]
fn regularization_part_shrinks_by_horizon_ratio() {
    let mut r = rng(5);
    let x0 = rand_mat(&mut r, 4, 2, 1.0);
    let y = Mat::from_fn(4, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let spec = identity_spec(&mut r, 2, 1.0);
    let mut no_reg = spec.clone();
    no_reg.alpha = 0.0;
    let u0 = rand_control(&mut r, 1.0, 6, Layout::Standard { d: 2 }, 1.0);
    let u10 = rescale_control(&u0, 10.0).unwrap();
    let reg = |u: &ControlPath<f64>| {
        cost(u, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh).unwrap()
            - cost(u, &x0, &y, &no_reg, Tag::SigmaInside, Activation::Tanh).unwrap()
    };
    assert_relative_eq!(reg(&u10), reg(&u0) / 10.0, max_relative = 1e-12);
}

#[test]
fn scaled_cost_identity_on_random_draws() {
    let mut r = rng(6);
    for i in 0..20 {
        let d = 1 + i % 3;
        let x0 = rand_mat(&mut r, 6, d, 1.0);
        let y = Mat::from_fn(6, 1, |k, _| if k % 2 == 0 { 1.0 } else { -1.0 });
        let spec = identity_spec(&mut r, d, 0.5 + i as f64 * 0.1);
        let t0 = 0.5 + i as f64 * 0.25;
        let u0 = rand_control(&mut r, t0, 3 + i, Layout::Standard { d }, 1.0);
        let (tag, act) = if i % 2 == 0 {
            (Tag::SigmaInside, Activation::Tanh)
        } else {
            (Tag::SigmaOutside, Activation::Relu)
        };
        let t = 1.0 + 3.0 * i as f64;
        let (lhs, rhs) = scaled_cost_identity(&u0, t, &x0, &y, &spec, tag, act).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "draw {i}: {lhs} vs {rhs}");
    }
}

#[test]
fn scaled_cost_identity_rejects_mismatched_specs() {
    let mut r = rng(7);
    let x0 = rand_mat(&mut r, 2, 2, 1.0);
    let y = Mat::from_fn(2, 1, |_, _| 1.0);
    let u0 = rand_control(&mut r, 1.0, 3, Layout::Standard { d: 2 }, 1.0);
    let base = identity_spec(&mut r, 2, 1.0);
    let mut h1 = base.clone();
    h1.regularization = odenet::Regularization::Sobolev(1);
    let tracking = base.clone().with_tracking(1.0, Mat::zeros(2, 2));
    for s in [h1, tracking] {
        assert!(scaled_cost_identity(&u0, 2.0, &x0, &y, &s, Tag::SigmaInside, Activation::Tanh).is_err());
    }
    assert!(scaled_cost_identity(&u0, 2.0, &x0, &y, &base, Tag::SigmaOutside, Activation::Tanh).is_err());
}
