//! Subcommand implementations. Each writes its artifacts into the output directory.

use std::fmt;
use std::path::{Path, PathBuf};

use odenet::control_bounds::{steer_linear_arc, weight_lower_bound, weight_norms, BoundNorm};
use odenet::datasets::{augment_zeros, concentric_spheres, label_targets, Radii};
use odenet::dynamics::{integrate_forward, Activation, ControlPath, Layout, Scheme, Tag};
use odenet::greedy::{greedy_pretrain, grow_depth, windowed_turnpike_train, GreedyConfig, WindowConfig};
use odenet::io::{write_json, write_labels, write_trajectory};
use odenet::linalg::{dist_sq, Mat};
use odenet::nonlocal::{build_projection, dirac_fixed_grid_equivalence, integrate_nonlocal, KernelPath, SpaceGrid};
use odenet::scaling::rescale_control;
use odenet::train::{adam_train, random_control, reg_norm, AdamConfig, FunctionalSpec, LossKind, Projector, ProjectorKind};
use odenet::turnpike::{bangbang_profile, final_time_gap, turnpike_fit};
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::config::Config;

/// Relative tolerance used for the bang-bang classification in reports.
const BANGBANG_TOL: f64 = 0.05;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<odenet::Error> for Failure {
    fn from(e: odenet::Error) -> Self {
        use odenet::Error as E;
        match e {
            E::Divergence { .. }
            | E::BoundViolation { .. }
            | E::Constraint { .. }
            | E::RankDeficient { .. }
            | E::TrainingAborted { .. } => Failure::Numerical(e.to_string()),
            E::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn bad<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

/// Command-line overrides shared by all subcommands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub no_final_cost: bool,
    pub l1: Option<f64>,
}

pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub scheme: Scheme,
}

impl Context {
    pub fn new(mut config: Config, out: PathBuf, ov: &Overrides) -> Outcome<Self> {
        if let Some(seed) = ov.seed {
            config.data.seed = seed;
            config.optimizer.seed = seed;
        }
        if let Some(s) = &ov.scheme {
            config.dynamics.scheme = s.clone();
        }
        if ov.no_final_cost {
            config.functional.final_cost = Some(false);
        }
        if let Some(m) = ov.l1 {
            config.functional.l1_bound = Some(m);
        }
        let scheme: Scheme = config.dynamics.scheme.parse()?;
        std::fs::create_dir_all(&out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
        Ok(Self { config, out, scheme })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn name(&self, default: &str) -> String {
        self.config.experiment.clone().unwrap_or_else(|| default.to_string())
    }
}

/// Everything needed to train one network.
pub struct Problem {
    pub x0: Mat<f64>,
    pub labels: Mat<f64>,
    pub spec: FunctionalSpec<f64>,
    pub tag: Tag,
    pub act: Activation,
    pub layout: Layout,
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Outcome<Mat<f64>> {
    if rows.is_empty() {
        return bad(format!("{what} is empty"));
    }
    Mat::from_rows(rows).map_err(|e| Failure::Config(format!("{what}: {e}")))
}

fn load_data(cfg: &Config) -> Outcome<(Mat<f64>, Mat<f64>)> {
    let d = &cfg.data;
    match d.kind.as_str() {
        "spheres" => {
            let radii = Radii { r1: d.radii[0], r2: d.radii[1], r3: d.radii[2] };
            Ok(concentric_spheres(d.dim, d.n, radii, d.seed)?)
        }
        "points" => {
            let (Some(p), Some(l)) = (&d.points, &d.labels) else {
                return bad("data.kind = \"points\" needs data.points and data.labels");
            };
            let x = rows_to_mat(p, "data.points")?;
            let y = rows_to_mat(l, "data.labels")?;
            if x.rows() != y.rows() {
                return bad("data.points and data.labels have different lengths");
            }
            Ok((x, y))
        }
        other => bad(format!("unknown data.kind `{other}`")),
    }
}

fn projector(cfg: &Config, d: usize, m: usize) -> Outcome<Projector<f64>> {
    let f = &cfg.functional;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.optimizer.seed ^ 0x9e37_79b9_7f4a_7c15);
    let scale = f.projector_scale;
    let p = match f.projector.as_str() {
        "identity" => {
            let mut p = Projector::identity(d);
            p.set_trainable(f.projector_trainable);
            p
        }
        "tanh_affine" => {
            if m != 1 {
                return bad("the tanh_affine projector needs scalar labels");
            }
            Projector::random_tanh_affine(d, scale, cfg.optimizer.seed, f.projector_trainable)
        }
        other => {
            let kind: ProjectorKind = other.parse()?;
            let theta1 = Mat::from_fn(m, d, |_, _| rng.gen_range(-scale..=scale));
            Projector::new(kind, theta1, vec![0.0; m], f.projector_trainable)?
        }
    };
    Ok(p)
}

pub fn build_problem(cfg: &Config) -> Outcome<Problem> {
    let (x, labels) = load_data(cfg)?;
    let tag: Tag = cfg.dynamics.tag.parse()?;
    let act: Activation = cfg.dynamics.activation.parse()?;
    let d = cfg.dynamics.width.unwrap_or(x.cols());
    let x0 = augment_zeros(&x, d)?;
    let hidden = cfg.dynamics.hidden.unwrap_or(d);
    if tag == Tag::Bottleneck && hidden == 0 {
        return bad("dynamics.hidden must be positive");
    }
    let layout = Layout::for_tag(tag, d, hidden);
    let f = &cfg.functional;
    let loss: LossKind = f.loss.parse()?;
    let proj = projector(cfg, d, labels.cols())?;
    let mut spec = match f.l1_bound {
        Some(m) => FunctionalSpec::l1(loss, proj, f.alpha, m),
        None => FunctionalSpec::weight_decay(loss, proj, f.alpha, f.k),
    };
    if f.beta > 0.0 {
        let Some(t) = &f.target else {
            return bad("functional.beta > 0 needs functional.target");
        };
        if t.len() != d {
            return bad(format!("functional.target has length {}, state dimension is {d}", t.len()));
        }
        spec = spec.with_tracking(f.beta, label_targets(&labels, t));
    }
    if let Some(fc) = f.final_cost {
        spec.include_final_cost = fc;
    }
    spec.validate()?;
    Ok(Problem { x0, labels, spec, tag, act, layout })
}

fn adam(cfg: &Config) -> AdamConfig {
    let o = &cfg.optimizer;
    let mut a = AdamConfig::new(o.lr, o.iters);
    a.tol = o.tol;
    a
}

fn check_horizon(t: f64, n: usize) -> Outcome<()> {
    if !(t > 0.0 && t.is_finite()) || n == 0 {
        return bad(format!("horizon T = {t} with {n} layers is invalid"));
    }
    Ok(())
}

fn node_norms(u: &ControlPath<f64>) -> Vec<f64> {
    (0..u.n_layers()).map(|k| u.node_norm(k)).collect()
}

fn write_outputs(ctx: &Context, p: &Problem, u: &ControlPath<f64>) -> Outcome<odenet::StackedTrajectory> {
    let traj = integrate_forward(&p.x0, u, p.tag, p.act, ctx.scheme)?;
    write_trajectory(ctx.path("trajectory.csv"), &traj)?;
    write_labels(ctx.path("labels.csv"), &p.labels)?;
    Ok(traj)
}

fn metrics(ctx: &Context, name: &str, turnpike: Value, train: Value, extra: Value) -> Outcome<()> {
    let mut doc = json!({
        "experiment": name,
        "config": ctx.config,
        "turnpike": turnpike,
        "train": train,
    });
    if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
        d.extend(e);
    }
    write_json(ctx.path("metrics.json"), &doc)?;
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn train(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let p = build_problem(cfg)?;
    check_horizon(cfg.horizon.t, cfg.horizon.n_layers)?;
    let u0 = random_control(cfg.horizon.t, cfg.horizon.n_layers, p.layout, cfg.optimizer.init_scale, cfg.optimizer.seed)?;
    let mut spec = p.spec.clone();
    let trained = adam_train(&u0, &p.x0, &p.labels, &spec, p.tag, p.act, &adam(cfg))?;
    spec.projector = trained.projector.clone();
    write_outputs(ctx, &Problem { spec, ..p }, &trained.control)?;
    metrics(
        ctx,
        &ctx.name("train"),
        Value::Null,
        to_value(&trained.report),
        json!({ "control_norms": node_norms(&trained.control) }),
    )
}

pub fn sweep_horizon(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let Some(sw) = &cfg.sweep else {
        return bad("sweep-horizon needs a [sweep] section");
    };
    if sw.horizons.is_empty() {
        return bad("sweep.horizons is empty");
    }
    let layers: Vec<usize> = match &sw.n_layers {
        Some(l) if l.len() == sw.horizons.len() => l.clone(),
        Some(_) => return bad("sweep.n_layers must have one entry per horizon"),
        None => sw.horizons.iter().map(|t| (t.powf(1.5).floor() as usize).max(1)).collect(),
    };
    let p = build_problem(cfg)?;
    odenet::scaling::check_homogeneous(p.tag, p.act)?;
    let mut records = Vec::new();
    let mut last: Option<odenet::train::Trained<f64>> = None;
    let mut spec = p.spec.clone();
    for (&t, &n) in sw.horizons.iter().zip(&layers) {
        check_horizon(t, n)?;
        let u0 = match &last {
            Some(prev) if sw.warm_start => {
                spec.projector = prev.projector.clone();
                grow_depth(&prev.control, n, t / n as f64)?
            }
            _ => random_control(t, n, p.layout, cfg.optimizer.init_scale, cfg.optimizer.seed)?,
        };
        let trained = adam_train(&u0, &p.x0, &p.labels, &spec, p.tag, p.act, &adam(cfg))?;
        let rescaled = rescale_control(&trained.control, sw.reference)?;
        records.push(json!({
            "T": t,
            "n_layers": n,
            "training_error": trained.report.training_error,
            "cost": trained.report.cost,
            "iterations": trained.report.iterations,
            "l2_norm": reg_norm(&trained.control, 0)?.sqrt(),
            "rescaled_l2_norm": reg_norm(&rescaled, 0)?.sqrt(),
            "reference": sw.reference,
        }));
        last = Some(trained);
    }
    let trained = last.expect("at least one horizon");
    let mut spec = p.spec.clone();
    spec.projector = trained.projector.clone();
    write_outputs(ctx, &Problem { spec, ..p }, &trained.control)?;
    write_json(ctx.path("sweep.json"), &json!({ "experiment": ctx.name("sweep-horizon"), "records": records }))?;
    metrics(ctx, &ctx.name("sweep-horizon"), Value::Null, to_value(&trained.report), json!({ "sweep": records }))
}

pub fn turnpike(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let p = build_problem(cfg)?;
    if p.spec.target.is_none() && !p.spec.is_l1() {
        return bad("turnpike needs a running target (functional.beta > 0) or the L1 regime (--l1 M)");
    }
    check_horizon(cfg.horizon.t, cfg.horizon.n_layers)?;
    let mut u0 = random_control(cfg.horizon.t, cfg.horizon.n_layers, p.layout, cfg.optimizer.init_scale, cfg.optimizer.seed)?;
    if let Some(m) = p.spec.l1_bound() {
        u0 = odenet::train::project_ball(&u0, m);
    }
    let trained = adam_train(&u0, &p.x0, &p.labels, &p.spec, p.tag, p.act, &adam(cfg))?;
    let mut spec = p.spec.clone();
    spec.projector = trained.projector.clone();
    let bangbang = match spec.l1_bound() {
        Some(m) => Some(bangbang_profile(&trained.control, m, BANGBANG_TOL)?),
        None => None,
    };
    let (tag, act, target, final_cost) = (p.tag, p.act, spec.target.clone(), spec.include_final_cost);
    let traj = write_outputs(ctx, &Problem { spec, ..p }, &trained.control)?;
    let mut gap = Value::Null;
    let report = match &target {
        Some(xd) => {
            // the fit always uses the Euler states the functional was trained on
            let euler = if ctx.scheme == Scheme::Euler {
                traj
            } else {
                integrate_forward(traj.initial(), &trained.control, tag, act, Scheme::Euler)?
            };
            if !final_cost {
                gap = to_value(&final_time_gap(&euler, xd)?);
            }
            let mut r = turnpike_fit(&euler, xd)?;
            r.bangbang = bangbang.clone();
            to_value(&r)
        }
        None => Value::Null,
    };
    metrics(
        ctx,
        &ctx.name("turnpike"),
        report,
        to_value(&trained.report),
        json!({ "bangbang": bangbang, "final_gap": gap, "control_norms": node_norms(&trained.control) }),
    )
}

pub fn greedy(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let Some(g) = &cfg.greedy else {
        return bad("greedy needs a [greedy] section");
    };
    let p = build_problem(cfg)?;
    let o = &cfg.optimizer;
    let (control, projector, reports, summary) = match g.mode.as_str() {
        "pretrain" => {
            let Some(schedule) = g.schedule.clone() else {
                return bad("greedy.schedule is required in pretrain mode");
            };
            let dt = g.dt.unwrap_or(cfg.horizon.t / cfg.horizon.n_layers as f64);
            let gc = GreedyConfig { dt, schedule, tol: g.tol, adam: adam(cfg), init_scale: o.init_scale, seed: o.seed };
            let out = greedy_pretrain(&p.x0, &p.labels, &p.spec, p.tag, p.act, p.layout, &gc)?;
            let s = json!({ "mode": "pretrain", "depths": out.depths, "converged": out.converged });
            (out.control, out.projector, out.reports, s)
        }
        "windowed" => {
            let (Some(window), Some(nodes)) = (g.window, g.nodes_per_window) else {
                return bad("greedy.window and greedy.nodes_per_window are required in windowed mode");
            };
            let wc = WindowConfig {
                window,
                nodes_per_window: nodes,
                tol: g.tol,
                max_windows: g.max_windows.unwrap_or(10),
                adam: adam(cfg),
                init_scale: o.init_scale,
                seed: o.seed,
            };
            let out = windowed_turnpike_train(&p.x0, &p.labels, &p.spec, p.tag, p.act, p.layout, &wc)?;
            let s = json!({ "mode": "windowed", "windows": out.windows, "converged": out.converged });
            (out.control, out.projector, out.reports, s)
        }
        other => return bad(format!("unknown greedy.mode `{other}`")),
    };
    let mut spec = p.spec.clone();
    spec.projector = projector;
    write_outputs(ctx, &Problem { spec, ..p }, &control)?;
    let stages: Vec<Value> = reports.iter().map(to_value).collect();
    let mut doc = summary;
    doc["experiment"] = json!(ctx.name("greedy"));
    doc["stages"] = json!(stages);
    doc["training_errors"] = json!(reports.iter().map(|r| r.training_error).collect::<Vec<_>>());
    write_json(ctx.path("greedy.json"), &doc)?;
    let last = reports.last().map(to_value).unwrap_or(Value::Null);
    metrics(ctx, &ctx.name("greedy"), Value::Null, last, json!({ "greedy": doc }))
}

pub fn steer(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let Some(s) = &cfg.steer else {
        return bad("steer needs a [steer] section");
    };
    let x0 = rows_to_mat(&s.x0, "steer.x0")?;
    let x1 = rows_to_mat(&s.x1, "steer.x1")?;
    if x0.shape() != x1.shape() {
        return bad("steer.x0 and steer.x1 have different shapes");
    }
    let act: Activation = cfg.dynamics.activation.parse()?;
    let dist = dist_sq(x0.data(), x1.data()).sqrt();
    let mut records = Vec::new();
    for &t in &s.horizons {
        check_horizon(t, s.n_steps)?;
        let st = steer_linear_arc(&x0, &x1, t, act, s.n_steps)?;
        let ratio = if dist > 0.0 { st.sup_norm * t / dist } else { 0.0 };
        records.push(json!({
            "T": t,
            "n_steps": s.n_steps,
            "error": st.error,
            "sup_norm": st.sup_norm,
            "constant": st.constant,
            "normalized_sup_norm": ratio,
        }));
        if records.len() == 1 {
            let traj = integrate_forward(&x0, &st.control, Tag::SigmaInside, act, ctx.scheme)?;
            write_trajectory(ctx.path("trajectory.csv"), &traj)?;
        }
    }
    write_json(
        ctx.path("steer.json"),
        &json!({ "experiment": ctx.name("steer"), "distance": dist, "records": records }),
    )?;
    Ok(())
}

pub fn bounds(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let Some(b) = &cfg.bounds else {
        return bad("bounds needs a [bounds] section");
    };
    let act: Activation = cfg.dynamics.activation.parse()?;
    let lip = b.lipschitz.unwrap_or(act.lipschitz());
    let mut doc = json!({ "experiment": ctx.name("bounds"), "lipschitz": lip });
    if b.train {
        let p = build_problem(cfg)?;
        check_horizon(cfg.horizon.t, cfg.horizon.n_layers)?;
        let u0 = random_control(cfg.horizon.t, cfg.horizon.n_layers, p.layout, cfg.optimizer.init_scale, cfg.optimizer.seed)?;
        let trained = adam_train(&u0, &p.x0, &p.labels, &p.spec, p.tag, p.act, &adam(cfg))?;
        let traj = integrate_forward(&p.x0, &trained.control, p.tag, p.act, Scheme::Euler)?;
        // the reached terminal states are exact representatives of the fitted outputs
        let x1 = traj.terminal().clone();
        let t = cfg.horizon.t;
        let l1 = weight_lower_bound(&p.x0, &x1, lip, t, BoundNorm::L1)?;
        let l2 = weight_lower_bound(&p.x0, &x1, lip, t, BoundNorm::L2)?;
        let (w1, w2) = weight_norms(&trained.control);
        doc["training_error"] = json!(trained.report.training_error);
        doc["bound_l1"] = json!(l1.value);
        doc["bound_l2"] = json!(l2.value);
        doc["weight_l1"] = json!(w1);
        doc["weight_l2"] = json!(w2);
        doc["pair"] = json!(l1.pair);
        doc["satisfied"] = json!(w1 >= l1.value && w2 >= l2.value);
        doc["train"] = to_value(&trained.report);
        write_trajectory(ctx.path("trajectory.csv"), &traj)?;
    } else {
        let (Some(a), Some(c)) = (&b.x0, &b.x1) else {
            return bad("bounds needs x0 and x1, or train = true");
        };
        let x0 = rows_to_mat(a, "bounds.x0")?;
        let x1 = rows_to_mat(c, "bounds.x1")?;
        let t = cfg.horizon.t;
        let l1 = weight_lower_bound(&x0, &x1, lip, t, BoundNorm::L1)?;
        let l2 = weight_lower_bound(&x0, &x1, lip, t, BoundNorm::L2)?;
        doc["bound_l1"] = json!(l1.value);
        doc["bound_l2"] = json!(l2.value);
        doc["coincident"] = json!(l1.coincident);
        doc["pair"] = json!(l1.pair);
    }
    write_json(ctx.path("bounds.json"), &doc)?;
    Ok(())
}

fn profile(name: &str, x: f64) -> Outcome<f64> {
    Ok(match name {
        "sin" => (std::f64::consts::PI * x).sin(),
        "affine" => 0.5 + 2.0 * x,
        "zero" => 0.0,
        other => return bad(format!("unknown nonlocal.profile `{other}`")),
    })
}

pub fn nonlocal_demo(ctx: &Context) -> Outcome<()> {
    let cfg = &ctx.config;
    let Some(n) = &cfg.nonlocal else {
        return bad("nonlocal-demo needs a [nonlocal] section");
    };
    let tag: Tag = cfg.dynamics.tag.parse()?;
    let act: Activation = cfg.dynamics.activation.parse()?;
    let grid = SpaceGrid::<f64>::uniform(&n.widths)?;
    let z0 = grid.level(0).iter().map(|x| profile(&n.profile, *x)).collect::<Outcome<Vec<_>>>()?;
    let kernels = if n.kernel_scale == 0.0 {
        KernelPath::zeros(&grid)
    } else {
        let s = n.kernel_scale;
        let pi = std::f64::consts::PI;
        KernelPath::sample(&grid, cfg.horizon.t, |t, x, xi| s * (pi * x).sin() * (pi * xi).cos() * (1.0 + t), |_, _| 0.0)?
    };
    let states = integrate_nonlocal(&z0, &grid, &kernels, tag, act)?;
    let mut profile_err: f64 = 0.0;
    for (z, x) in states.iter().zip(grid.levels()) {
        for (a, b) in z.iter().zip(x) {
            profile_err = profile_err.max((a - profile(&n.profile, *b)?).abs());
        }
    }
    let (mut row_err, mut max_nnz, mut affine_err) = (0.0f64, 0usize, 0.0f64);
    for k in 0..grid.n_levels() - 1 {
        let p = build_projection(grid.level(k), grid.level(k + 1))?;
        let samples: Vec<f64> = grid.level(k).iter().map(|x| 0.5 + 2.0 * x).collect();
        let out = p.mul_vec(&samples);
        for (j, x) in grid.level(k + 1).iter().enumerate() {
            let row = p.row(j);
            row_err = row_err.max((row.iter().sum::<f64>() - 1.0).abs());
            max_nnz = max_nnz.max(row.iter().filter(|v| **v != 0.0).count());
            affine_err = affine_err.max((out[j] - (0.5 + 2.0 * x)).abs());
        }
    }
    let d = n.dirac_width.max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.optimizer.seed);
    let layout = Layout::Standard { d };
    let u = ControlPath::new(
        cfg.horizon.t,
        n.dirac_layers.max(1),
        layout,
        (0..n.dirac_layers.max(1) * layout.node_len()).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
    )?;
    let x0 = Mat::from_fn(3, d, |_, _| rng.gen_range(-1.0..=1.0));
    let dirac_act = if tag == Tag::SigmaOutside && !act.positively_homogeneous() { Activation::Relu } else { act };
    let dirac = dirac_fixed_grid_equivalence(&x0, &u, tag, dirac_act)?;
    write_json(
        ctx.path("nonlocal.json"),
        &json!({
            "experiment": ctx.name("nonlocal-demo"),
            "widths": n.widths,
            "final_state": states.last(),
            "profile_error": profile_err,
            "projection": { "max_row_sum_error": row_err, "max_nonzeros": max_nnz, "max_affine_error": affine_err },
            "dirac_deviation": dirac,
            "dirac_activation": dirac_act.to_string(),
        }),
    )?;
    Ok(())
}

pub fn read_config(path: &Path) -> Outcome<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}
