//! Acceptance suite: one PASS/WARN/FAIL line per criterion, nonzero exit on any FAIL.
//! Runs as a plain binary (`harness = false`) so the report is never captured.

use std::time::{Duration, Instant};

use odenet::control_bounds::{steer_linear_arc, weight_lower_bound, weight_norms, BoundNorm};
use odenet::datasets::{augment_zeros, concentric_spheres, label_targets, Radii};
use odenet::dynamics::{bound_stats, integrate_forward, Activation, ControlPath, Layout, Scheme, Tag};
use odenet::greedy::grow_depth;
use odenet::linalg::{dist_sq, Mat};
use odenet::nonlocal::{build_projection, dirac_fixed_grid_equivalence, integrate_nonlocal, KernelPath, SpaceGrid};
use odenet::scaling::{rescale_control, scaled_cost_identity};
use odenet::train::{
    adam_train, evaluate, finite_difference_check, l1_norm, random_control, reg_norm, AdamConfig, FunctionalSpec,
    LossKind, Projector, ProjectorKind,
};
use odenet::turnpike::{bangbang_profile, compress_control, final_time_gap, turnpike_fit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Warn(String),
    Fail(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| r.gen_range(-scale..=scale))
}

fn rand_control(r: &mut ChaCha8Rng, horizon: f64, n: usize, layout: Layout, scale: f64) -> ControlPath<f64> {
    let v = (0..n * layout.node_len()).map(|_| r.gen_range(-scale..=scale)).collect();
    ControlPath::new(horizon, n, layout, v).unwrap()
}

fn pm_labels(n: usize) -> Mat<f64> {
    Mat::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 })
}

fn gradient_check() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = 1 + i % 4;
        let n = 1 + (i * 7) % 5;
        let layers = 1 + (i * 3) % 8;
        let (tag, layout) = match i % 3 {
            0 => (Tag::SigmaInside, Layout::Standard { d }),
            1 => (Tag::SigmaOutside, Layout::Standard { d }),
            _ => (Tag::Bottleneck, Layout::Bottleneck { d, h: 2 }),
        };
        let act = if i % 2 == 0 { Activation::Tanh } else { Activation::Sigmoid };
        let x0 = rand_mat(&mut r, n, d, 1.0);
        let y = pm_labels(n);
        let proj = Projector::new(ProjectorKind::TanhAffine, rand_mat(&mut r, 1, d, 1.0), vec![0.1], true).unwrap();
        let spec = match i % 4 {
            0 => FunctionalSpec::weight_decay(LossKind::Mse, proj, 0.5, 0),
            1 => FunctionalSpec::weight_decay(LossKind::Logistic, proj, 0.3, 1),
            2 => FunctionalSpec::weight_decay(LossKind::Mse, proj, 0.4, i as u8 % 2)
                .with_tracking(1.5, rand_mat(&mut r, n, d, 1.0)),
            _ => FunctionalSpec::l1(LossKind::Mse, proj, 0.8, 100.0),
        };
        let u = rand_control(&mut r, 1.5, layers, layout, 0.8);
        match finite_difference_check(&u, &x0, &y, &spec, tag, act, 1e-5) {
            Ok(c) => worst = worst.max(c.max_rel_err),
            Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
        }
    }
    verdict(worst <= 1e-6, format!("20 instances, worst relative error {worst:.2e} (limit 1e-6)"))
}

fn scaling_exactness() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 1 + i % 3;
        let (tag, act) = if i % 2 == 0 {
            (Tag::SigmaInside, Activation::Tanh)
        } else {
            (Tag::SigmaOutside, Activation::Relu)
        };
        let x0 = rand_mat(&mut r, 4, d, 1.0);
        let horizon = r.gen_range(0.2..5.0);
        let u = rand_control(&mut r, horizon, 5 + i % 20, Layout::Standard { d }, 1.0);
        let target = r.gen_range(0.1..100.0);
        let a = integrate_forward(&x0, &u, tag, act, Scheme::Euler).unwrap();
        let b = integrate_forward(&x0, &rescale_control(&u, target).unwrap(), tag, act, Scheme::Euler).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            worst = worst.max(sa.max_abs_diff(sb));
        }
    }
    verdict(worst <= 1e-12, format!("50 draws, worst node deviation {worst:.2e} (limit 1e-12)"))
}

fn cost_identity() -> Verdict {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for ratio in [2.0, 10.0, 100.0] {
        for i in 0..20 {
            let d = 1 + i % 3;
            let x0 = rand_mat(&mut r, 5, d, 1.0);
            let y = pm_labels(5);
            let p = Projector::new(ProjectorKind::TanhAffine, rand_mat(&mut r, 1, d, 1.0), vec![0.2], false).unwrap();
            let spec = FunctionalSpec::weight_decay(LossKind::Mse, p, r.gen_range(0.1..2.0), 0);
            let t0 = r.gen_range(0.5..3.0);
            let u0 = rand_control(&mut r, t0, 3 + i, Layout::Standard { d }, 1.0);
            let (tag, act) = if i % 2 == 0 {
                (Tag::SigmaInside, Activation::Tanh)
            } else {
                (Tag::SigmaOutside, Activation::Relu)
            };
            let (lhs, rhs) = scaled_cost_identity(&u0, ratio * t0, &x0, &y, &spec, tag, act).unwrap();
            worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    verdict(worst <= 1e-10, format!("60 draws, worst scaled gap {worst:.2e} (limit 1e-10)"))
}

fn horizon_sweep() -> Verdict {
    let (x, y) = concentric_spheres::<f64>(2, 256, Radii::default(), 0).unwrap();
    let x0 = augment_zeros(&x, 3).unwrap();
    let mut spec = FunctionalSpec::weight_decay(LossKind::Mse, Projector::random_tanh_affine(3, 1.0, 0, true), 1.0, 0);
    let mut prev: Option<ControlPath<f64>> = None;
    let (mut errs, mut norms) = (Vec::new(), Vec::new());
    for t in [1.0f64, 3.0, 9.0, 27.0] {
        let n = t.powf(1.5).floor() as usize;
        let u0 = match &prev {
            Some(p) => grow_depth(p, n, t / n as f64).unwrap(),
            None => random_control(t, n, Layout::Standard { d: 3 }, 0.1, 0).unwrap(),
        };
        let tr = adam_train(&u0, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh, &AdamConfig::new(3e-3, 8000)).unwrap();
        spec.projector = tr.projector.clone();
        errs.push(tr.report.training_error);
        norms.push(reg_norm(&rescale_control(&tr.control, 1.0).unwrap(), 0).unwrap().sqrt());
        prev = Some(tr.control);
    }
    let monotone = errs.windows(2).all(|w| w[1] <= 1.05 * w[0]);
    let (a, b) = (norms[2], norms[3]);
    let spread = (a - b).abs() / a.max(b);
    verdict(
        monotone && errs[3] < 0.05 && spread <= 0.2,
        format!("errors {errs:.4?}, rescaled norms T=9 {a:.3} / T=27 {b:.3} ({:.1}% apart)", 100.0 * spread),
    )
}

/// Tracking problem on the one-dimensional spheres lifted to the plane, targets ±(2, 2).
fn tracking_run(seed: u64, final_cost: bool) -> (odenet::turnpike::TurnpikeReport, odenet::turnpike::FinalGap) {
    let (x, y) = concentric_spheres::<f64>(1, 128, Radii::default(), seed).unwrap();
    let x0 = augment_zeros(&x, 2).unwrap();
    let xd = label_targets(&y, &[2.0, 2.0]);
    let mut spec = FunctionalSpec::weight_decay(LossKind::Mse, Projector::random_tanh_affine(2, 1.0, seed, true), 2.0, 1)
        .with_tracking(100.0, xd.clone());
    spec.include_final_cost = final_cost;
    let (tag, act) = (Tag::SigmaOutside, Activation::LeakyRelu(0.1));
    let u0 = random_control(20.0, 50, Layout::Standard { d: 2 }, 0.1, seed).unwrap();
    let tr = adam_train(&u0, &x0, &y, &spec, tag, act, &AdamConfig::new(5e-3, 8000)).unwrap();
    let traj = integrate_forward(&x0, &tr.control, tag, act, Scheme::Euler).unwrap();
    (turnpike_fit(&traj, &xd).unwrap(), final_time_gap(&traj, &xd).unwrap())
}

fn turnpike_reproduction() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let (rep, _) = tracking_run(seed, true);
        let (mu, r2) = (rep.mu.unwrap_or(f64::NAN), rep.r_squared.unwrap_or(f64::NAN));
        let frac = rep.mid_mean / rep.initial_distance;
        ok &= mu > 0.0 && r2 > 0.9 && frac < 0.1;
        parts.push(format!("seed {seed}: mu {mu:.3} R2 {r2:.3} mid/d0 {frac:.3}"));
    }
    verdict(ok, parts.join("; "))
}

fn stabilization() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let (_, g) = tracking_run(seed, false);
        ok &= g.stabilized;
        parts.push(format!("seed {seed}: final {:.4} min {:.4}", g.gap, g.min));
    }
    verdict(ok, parts.join("; "))
}

fn compression() -> Verdict {
    // drift b = −1/2 from x = 4 down to 0 under the L1 functional with φ = x²/2
    let (horizon, n) = (10.0, 100);
    let v: Vec<f64> = (0..n).flat_map(|k| [0.0, if k < 80 { -0.5 } else { 0.0 }]).collect();
    let u = ControlPath::new(horizon, n, Layout::Standard { d: 1 }, v).unwrap();
    let x0 = Mat::from_rows(&[vec![4.0]]).unwrap();
    let y = Mat::zeros(1, 1);
    let p = Projector::new(ProjectorKind::Linear, Mat::identity(1), vec![0.0], false).unwrap();
    let spec = FunctionalSpec::l1(LossKind::Mse, p, 1.0, 1.0);
    let run = |c: &ControlPath<f64>| evaluate(c, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh).unwrap();
    let before = run(&u);
    let mut ok = true;
    let mut parts = Vec::new();
    for (omega, intervals) in [(0.25, vec![(1.0, 5.0)]), (0.5, vec![(1.0, 5.0)]), (0.5, vec![(1.0, 3.0), (4.0, 6.0)])] {
        let c = compress_control(&u, &intervals, omega).unwrap();
        let l1_gap = (l1_norm(&u) - l1_norm(&c)).abs();
        let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
        let drop = before.breakdown.running_loss - run(&c).breakdown.running_loss;
        let need = omega * omega * total;
        ok &= l1_gap <= 1e-12 && drop >= need - 1e-8;
        parts.push(format!("omega {omega} x{}: L1 gap {l1_gap:.1e}, drop {drop:.3} >= {need:.3}", intervals.len()));
    }
    verdict(ok, parts.join("; "))
}

fn bangbang() -> Verdict {
    let mut failures = 0;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let (x, y) = concentric_spheres::<f64>(1, 128, Radii::default(), seed).unwrap();
        let x0 = augment_zeros(&x, 2).unwrap();
        let proj = Projector::new(ProjectorKind::Linear, Mat::new(1, 2, vec![0.5, 0.5]).unwrap(), vec![0.0], true).unwrap();
        let spec = FunctionalSpec::l1(LossKind::Mse, proj, 0.1, 5.0);
        let u0 = random_control(10.0, 50, Layout::Standard { d: 2 }, 0.1, seed).unwrap();
        let cfg = AdamConfig::new(2e-2, 4000);
        let tr = adam_train(&u0, &x0, &y, &spec, Tag::SigmaInside, Activation::Tanh, &cfg).unwrap();
        let bb = bangbang_profile(&tr.control, 5.0, 0.05).unwrap();
        if !(bb.intermediate < 0.1 && bb.switch_time.is_some()) {
            failures += 1;
        }
        parts.push(format!("seed {seed}: intermediate {:.2} T' {:?}", bb.intermediate, bb.switch_time));
    }
    let detail = parts.join("; ");
    match failures {
        0 => Verdict::Pass(detail),
        1 => Verdict::Warn(format!("one seed off profile; {detail}")),
        _ => Verdict::Fail(detail),
    }
}

fn weight_bounds() -> Verdict {
    let x0 = Mat::new(2, 1, vec![-0.1, 0.1]).unwrap();
    let y = Mat::new(2, 1, vec![-1.0, 1.0]).unwrap();
    let closed = weight_lower_bound(&x0, &y, 1.0, 1.0, BoundNorm::L1).unwrap().value;
    let mut ok = (closed - 10f64.ln()).abs() <= 1e-15 && (closed - 2.302585).abs() < 1e-6;
    let (mut fitted, mut total, mut slack) = (0, 0, f64::INFINITY);
    for act in [Activation::Tanh, Activation::Sigmoid, Activation::Relu, Activation::LeakyRelu(0.1)] {
        for t in [1.0, 2.0, 4.0] {
            total += 1;
            let spec = FunctionalSpec::weight_decay(LossKind::Mse, Projector::identity(1), 1e-3, 0);
            let u0 = random_control(t, 20, Layout::Standard { d: 1 }, 0.1, 1).unwrap();
            let tr = adam_train(&u0, &x0, &y, &spec, Tag::SigmaInside, act, &AdamConfig::new(5e-2, 2000)).unwrap();
            if tr.report.training_error >= 1e-3 {
                continue;
            }
            fitted += 1;
            let traj = integrate_forward(&x0, &tr.control, Tag::SigmaInside, act, Scheme::Euler).unwrap();
            let lb = weight_lower_bound(&x0, traj.terminal(), act.lipschitz(), t, BoundNorm::L1).unwrap();
            let (w1, _) = weight_norms(&tr.control);
            ok &= w1 >= lb.value;
            slack = slack.min(w1 - lb.value);
        }
    }
    ok &= fitted > 0;
    verdict(ok, format!("log-ratio {closed:.6}; {fitted}/{total} runs fitted, smallest margin {slack:.3}"))
}

fn steering() -> Verdict {
    let x0 = Mat::<f64>::from_rows(&[vec![0.9, 0.05], vec![0.05, 0.9]]).unwrap();
    let x1 = Mat::<f64>::identity(2);
    let dist = dist_sq(x0.data(), x1.data()).sqrt();
    let mut ratios = Vec::new();
    let mut worst: f64 = 0.0;
    for t in [1.0, 2.0, 4.0] {
        let s = steer_linear_arc(&x0, &x1, t, Activation::Tanh, 2000).unwrap();
        worst = worst.max(s.error);
        ratios.push(s.sup_norm * t / dist);
    }
    let spread = ratios.iter().map(|r| (r - ratios[0]).abs() / ratios[0]).fold(0.0, f64::max);
    verdict(
        worst < 1e-3 && spread <= 0.01,
        format!("worst error {worst:.2e}, normalized sup norms {ratios:.4?} ({:.2}% spread)", 100.0 * spread),
    )
}

fn discretization() -> Verdict {
    let mut r = rng(11);
    let mut rows_ok = true;
    let mut affine: f64 = 0.0;
    for _ in 0..50 {
        let g = SpaceGrid::<f64>::uniform(&[r.gen_range(2..30), r.gen_range(2..30)]).unwrap();
        let p = build_projection(g.level(0), g.level(1)).unwrap();
        let (c0, c1) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let out = p.mul_vec(&g.level(0).iter().map(|x| c0 + c1 * x).collect::<Vec<_>>());
        for (j, x) in g.level(1).iter().enumerate() {
            let row = p.row(j);
            rows_ok &= row.iter().filter(|v| **v != 0.0).count() <= 2 && (row.iter().sum::<f64>() - 1.0).abs() <= 1e-14;
            affine = affine.max((out[j] - (c0 + c1 * x)).abs());
        }
    }
    let x0 = rand_mat(&mut r, 5, 4, 1.0);
    let mut dirac: f64 = 0.0;
    for (tag, act) in [
        (Tag::SigmaInside, Activation::Tanh),
        (Tag::SigmaInside, Activation::Sigmoid),
        (Tag::SigmaOutside, Activation::Relu),
    ] {
        let u = rand_control(&mut r, 2.0, 10, Layout::Standard { d: 4 }, 1.0);
        dirac = dirac.max(dirac_fixed_grid_equivalence(&x0, &u, tag, act).unwrap());
    }
    let g = SpaceGrid::<f64>::uniform(&[11, 21, 11]).unwrap();
    let sin = |x: f64| (std::f64::consts::PI * x).sin();
    let z0: Vec<f64> = g.level(0).iter().map(|x| sin(*x)).collect();
    let states = integrate_nonlocal(&z0, &g, &KernelPath::zeros(&g), Tag::SigmaInside, Activation::Tanh).unwrap();
    let mut sin_err: f64 = 0.0;
    for (z, xs) in states.iter().zip(g.levels()) {
        for (a, x) in z.iter().zip(xs) {
            sin_err = sin_err.max((a - sin(*x)).abs());
        }
    }
    verdict(
        rows_ok && affine <= 1e-12 && dirac <= 1e-12 && sin_err < 0.02,
        format!("rows ok {rows_ok}, affine error {affine:.1e}, Dirac deviation {dirac:.1e}, sine error {sin_err:.4}"),
    )
}

fn growth_bound() -> Verdict {
    let s = bound_stats();
    verdict(s.checks > 0 && s.violations == 0, format!("{} checks, {} violations", s.checks, s.violations))
}

fn main() {
    type Check = fn() -> Verdict;
    let suite: [(u32, &str, u64, Check); 12] = [
        (1, "gradient vs finite differences", 30, gradient_check),
        (2, "rescaling exactness", 10, scaling_exactness),
        (3, "scaled cost identity", 10, cost_identity),
        (4, "horizon sweep", 600, horizon_sweep),
        (5, "turnpike fit", 300, turnpike_reproduction),
        (6, "final-time stabilization", 300, stabilization),
        (7, "L1 compression", 5, compression),
        (8, "bang-bang profile", 300, bangbang),
        (9, "weight lower bound", 60, weight_bounds),
        (10, "linear-arc steering", 10, steering),
        (11, "variable-width discretization", 10, discretization),
        (12, "growth bound never violated", 1, growth_bound),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in suite {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let over = took > Duration::from_secs(budget);
        let (tag, detail) = match v {
            Verdict::Pass(d) if !over => ("PASS", d),
            Verdict::Warn(d) if !over => ("WARN", d),
            Verdict::Pass(d) | Verdict::Warn(d) => ("FAIL", format!("over the {budget} s budget; {d}")),
            Verdict::Fail(d) => ("FAIL", d),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] criterion {id:>2} {name} ({:.1} s): {detail}", took.as_secs_f64());
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
