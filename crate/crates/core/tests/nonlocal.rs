mod common;

use approx::assert_relative_eq;
use odenet::dynamics::{Activation, ControlPath, Layout, Tag};
use odenet::linalg::Mat;
use odenet::nonlocal::{
    build_projection, dirac_fixed_grid_equivalence, integrate_nonlocal, nonlocal_step, quadrature_weights, KernelPath,
    SpaceGrid,
};
use rand::Rng;

#[test]
fn trapezoid_weights() {
    assert_eq!(quadrature_weights::<f64>(2).unwrap(), vec![0.5, 0.5]);
    assert_eq!(quadrature_weights::<f64>(3).unwrap(), vec![0.25, 0.5, 0.25]);
    assert!(quadrature_weights::<f64>(1).is_err());
    let grid = SpaceGrid::<f64>::uniform(&[101]).unwrap();
    let a = quadrature_weights::<f64>(101).unwrap();
    let integral: f64 = a.iter().zip(grid.level(0)).map(|(w, x)| w * x).sum();
    assert_relative_eq!(integral, 0.5, epsilon = 1e-15);
    assert!(a.iter().all(|w| *w > 0.0));
    assert_relative_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
}

#[test]
fn projection_examples() {
    let same = SpaceGrid::<f64>::uniform(&[5]).unwrap();
    assert_eq!(build_projection(same.level(0), same.level(0)).unwrap(), Mat::identity(5));

    let g = SpaceGrid::<f64>::uniform(&[3, 4]).unwrap();
    let p = build_projection(g.level(0), g.level(1)).unwrap();
    // x = 1/3 lies between 0 and 0.5
    let row = p.row(1);
    assert_relative_eq!(row[0], 1.0 / 3.0, epsilon = 1e-15);
    assert_relative_eq!(row[1], 2.0 / 3.0, epsilon = 1e-15);
    assert_eq!(row[2], 0.0);
    assert_eq!(p.row(0), &[1.0, 0.0, 0.0]);
    assert_eq!(p.row(3), &[0.0, 0.0, 1.0]);
}

#[test]
fn projection_rows_sum_to_one_and_reproduce_affine_functions() {
    let mut r = common::rng(4);
    for _ in 0..50 {
        let (m, n) = (r.gen_range(2..30), r.gen_range(2..30));
        let g = SpaceGrid::<f64>::uniform(&[m, n]).unwrap();
        let p = build_projection(g.level(0), g.level(1)).unwrap();
        let (c0, c1) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let samples: Vec<f64> = g.level(0).iter().map(|x| c0 + c1 * x).collect();
        let out = p.mul_vec(&samples);
        for (j, x) in g.level(1).iter().enumerate() {
            let row = p.row(j);
            assert!(row.iter().filter(|v| **v != 0.0).count() <= 2);
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
            assert!((out[j] - (c0 + c1 * x)).abs() <= 1e-13);
        }
    }
}

#[test]
fn grids_and_projections_reject_bad_points() {
    assert!(SpaceGrid::<f64>::new(vec![vec![0.0, 0.5, 0.5]]).is_err());
    assert!(SpaceGrid::<f64>::new(vec![vec![0.0, 1.5]]).is_err());
    assert!(SpaceGrid::<f64>::uniform(&[1]).is_err());
    assert!(build_projection(&[0.2, 0.8], &[0.0, 1.0]).is_err());
}

#[test]
fn zero_layer_on_a_fixed_grid_is_the_identity() {
    let z = vec![0.3, -1.0, 2.0];
    let w = Mat::zeros(3, 3);
    let p = Mat::identity(3);
    for tag in [Tag::SigmaOutside, Tag::SigmaInside] {
        assert_eq!(nonlocal_step(&z, &w, &[0.0; 3], &p, tag, Activation::Tanh).unwrap(), z);
    }
    assert!(nonlocal_step(&z, &w, &[0.0; 3], &p, Tag::Bottleneck, Activation::Tanh).is_err());
    assert!(nonlocal_step(&z, &Mat::zeros(2, 3), &[0.0; 3], &p, Tag::SigmaInside, Activation::Tanh).is_err());
}

#[test]
fn expanding_with_a_zero_kernel_interpolates() {
    let g = SpaceGrid::<f64>::uniform(&[3, 4]).unwrap();
    let p = build_projection(g.level(0), g.level(1)).unwrap();
    let z = vec![1.0, 3.0, 2.0];
    let out = nonlocal_step(&z, &Mat::zeros(4, 3), &[0.0; 4], &p, Tag::SigmaInside, Activation::Tanh).unwrap();
    assert_eq!(out, p.mul_vec(&z));
    assert_relative_eq!(out[1], 1.0 / 3.0 + 2.0, epsilon = 1e-15);
}

#[test]
fn widths_are_followed() {
    let g = SpaceGrid::<f64>::uniform(&[3, 5, 4]).unwrap();
    let states = integrate_nonlocal(&[0.0, 0.5, 1.0], &g, &KernelPath::zeros(&g), Tag::SigmaInside, Activation::Tanh).unwrap();
    assert_eq!(states.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 5, 4]);
    // affine profiles pass through exactly
    for (z, x) in states.iter().zip(g.levels()) {
        for (a, b) in z.iter().zip(x) {
            assert!((a - b).abs() <= 1e-15);
        }
    }
    let constant = SpaceGrid::<f64>::uniform(&[4, 4, 4]).unwrap();
    let s = integrate_nonlocal(&[2.0; 4], &constant, &KernelPath::zeros(&constant), Tag::SigmaOutside, Activation::Tanh)
        .unwrap();
    assert!(s.iter().all(|z| z == &vec![2.0; 4]));
    assert!(integrate_nonlocal(&[0.0; 2], &g, &KernelPath::zeros(&g), Tag::SigmaInside, Activation::Tanh).is_err());
}

#[test]
fn sine_profile_survives_refine_and_coarsen() {
    let g = SpaceGrid::<f64>::uniform(&[11, 21, 11]).unwrap();
    let z0: Vec<f64> = g.level(0).iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let states = integrate_nonlocal(&z0, &g, &KernelPath::zeros(&g), Tag::SigmaInside, Activation::Tanh).unwrap();
    for (z, x) in states.iter().zip(g.levels()) {
        for (a, b) in z.iter().zip(x) {
            assert!((a - (std::f64::consts::PI * b).sin()).abs() < 0.02);
        }
    }
}

#[test]
fn sampled_kernels_carry_quadrature_weights() {
    let g = SpaceGrid::<f64>::uniform(&[3, 2]).unwrap();
    let k = KernelPath::sample(&g, 1.0, |_, _, _| 1.0, |t, x| t + x).unwrap();
    assert_eq!(k.n_layers(), 1);
    assert_eq!(k.weights[0].row(0), &[0.25, 0.5, 0.25]);
    assert_eq!(k.biases[0], vec![1.0, 2.0]);
    // constant kernel integrates the profile: ∫ z = mean of an affine profile
    let z = vec![1.0, 2.0, 3.0];
    let p = build_projection(g.level(0), g.level(1)).unwrap();
    let out = nonlocal_step(&z, &k.weights[0], &[0.0, 0.0], &p, Tag::SigmaInside, Activation::Identity).unwrap();
    assert_relative_eq!(out[0], 1.0 + 2.0);
    assert_relative_eq!(out[1], 3.0 + 2.0);
}

#[test]
fn fixed_grid_embedding_reproduces_finite_networks() {
    let mut r = common::rng(8);
    let x0 = common::rand_mat(&mut r, 5, 4, 1.0);
    let zero = ControlPath::zeros(2.0, 10, Layout::Standard { d: 4 }).unwrap();
    assert_eq!(dirac_fixed_grid_equivalence(&x0, &zero, Tag::SigmaInside, Activation::Tanh).unwrap(), 0.0);
    for (tag, act, horizon) in [
        (Tag::SigmaInside, Activation::Tanh, 2.0),
        (Tag::SigmaInside, Activation::Sigmoid, 3.0),
        (Tag::SigmaOutside, Activation::Relu, 2.0),
        (Tag::SigmaOutside, Activation::Tanh, 10.0),
    ] {
        let u = common::rand_control(&mut r, horizon, 10, Layout::Standard { d: 4 }, 1.0);
        let dev = dirac_fixed_grid_equivalence(&x0, &u, tag, act).unwrap();
        assert!(dev <= 1e-12, "{tag:?} {act:?}: {dev}");
    }
    let u = common::rand_control(&mut r, 2.0, 10, Layout::Standard { d: 4 }, 1.0);
    assert!(dirac_fixed_grid_equivalence(&x0, &u, Tag::SigmaOutside, Activation::Tanh).is_err());
}

#[test]
fn scalar_linear_growth_through_the_embedding() {
    // ẋ = x with 100 Euler steps on [0, 1]: (1.01)^100
    let u = ControlPath::constant(1.0, 100, Layout::Standard { d: 1 }, &[1.0, 0.0]).unwrap();
    let x0 = Mat::from_rows(&[vec![1.0]]).unwrap();
    assert_eq!(dirac_fixed_grid_equivalence(&x0, &u, Tag::SigmaInside, Activation::Identity).unwrap(), 0.0);
    let grid = SpaceGrid::new(vec![vec![0.5]; 101]).unwrap();
    let k = KernelPath::new(vec![Mat::from_rows(&[vec![0.01]]).unwrap(); 100], vec![vec![0.0]; 100]).unwrap();
    let states = integrate_nonlocal(&[1.0], &grid, &k, Tag::SigmaInside, Activation::Identity).unwrap();
    assert_relative_eq!(states[100][0], 1.01f64.powi(100), max_relative = 1e-13);
}
