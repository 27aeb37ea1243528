//! Diagnostics for long-horizon structure: exponential turnpike fits, final-time
//! stabilization, bang-bang profiles and the compression of slow control arcs.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlPath, StackedTrajectory};
use crate::error::{arg_err, dim_err, Result};
use crate::linalg::{dist_sq, norm, Mat};
use crate::scalar::Scalar;

/// Distances below this are excluded from the log-linear fit.
const FIT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `γ e^{−μt}`
    OneSided,
    /// `γ (e^{−μt} + e^{−μ(T−t)})`
    TwoSided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BangBangProfile {
    pub at_bound: f64,
    pub at_zero: f64,
    pub intermediate: f64,
    pub counts: [usize; 3],
    /// Start of the contiguous tail of near-zero nodes.
    pub switch_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnpikeReport {
    pub times: Vec<f64>,
    /// `‖x(t_k) − x_d‖` of the stacked state.
    pub distances: Vec<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub r_squared: Option<f64>,
    pub model: Option<FitModel>,
    pub degenerate: bool,
    pub initial_distance: f64,
    /// Mean distance over `[T/4, 3T/4]`.
    pub mid_mean: f64,
    pub final_gap: f64,
    pub bangbang: Option<BangBangProfile>,
}

pub fn distances<S: Scalar>(traj: &StackedTrajectory<S>, x_d: &Mat<S>) -> Result<Vec<f64>> {
    if traj.is_empty() {
        return arg_err("empty trajectory");
    }
    if traj.states[0].shape() != x_d.shape() {
        return dim_err("target shape differs from the stacked state");
    }
    Ok(traj.states.iter().map(|x| dist_sq(x.data(), x_d.data()).sqrt().as_f64()).collect())
}

struct Fit {
    log_gamma: f64,
    mu: f64,
    sse: f64,
}

fn one_sided(t: &[f64], y: &[f64]) -> Fit {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let icept = ym - slope * tm;
    let sse = t.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    Fit { log_gamma: icept, mu: -slope, sse }
}

/// `log(e^{−μt} + e^{−μ(T−t)})` for `t ≤ T/2`.
fn two_sided_shape(mu: f64, t: f64, horizon: f64) -> f64 {
    -mu * t + (-mu * (horizon - 2.0 * t)).exp().ln_1p()
}

/// Residual sum of squares with `log γ` profiled out.
fn two_sided_sse(mu: f64, t: &[f64], y: &[f64], horizon: f64) -> (f64, f64) {
    let r: Vec<f64> = t.iter().zip(y).map(|(a, b)| b - two_sided_shape(mu, *a, horizon)).collect();
    let lg = r.iter().sum::<f64>() / r.len() as f64;
    (r.iter().map(|v| (v - lg).powi(2)).sum(), lg)
}

fn two_sided(t: &[f64], y: &[f64], horizon: f64) -> Fit {
    // Coarse log-spaced scan, then golden-section refinement around the best point.
    let (lo, hi) = (1e-3 / horizon, 1e3 / horizon);
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect();
    let best = (0..=steps)
        .min_by(|&a, &b| {
            let sa = two_sided_sse(grid[a], t, y, horizon).0;
            let sb = two_sided_sse(grid[b], t, y, horizon).0;
            sa.total_cmp(&sb)
        })
        .expect("non-empty grid");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(steps)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |m: f64| two_sided_sse(m, t, y, horizon).0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mu = 0.5 * (a + b);
    let (sse, lg) = two_sided_sse(mu, t, y, horizon);
    Fit { log_gamma: lg, mu, sse }
}

/// Fits the distance-to-target curve on the leading half `[0, T/2]`.
///
/// Both `γe^{−μt}` and `γ(e^{−μt} + e^{−μ(T−t)})` are fitted to `log d_k` by least squares
/// and the one with the smaller residual is kept. A pure one-sided fit is biased on the
/// symmetric profile because the trailing exponential is not negligible at `T/2`.
pub fn turnpike_fit<S: Scalar>(traj: &StackedTrajectory<S>, x_d: &Mat<S>) -> Result<TurnpikeReport> {
    let dist = distances(traj, x_d)?;
    let times: Vec<f64> = traj.times.iter().map(|t| t.as_f64()).collect();
    let horizon = *times.last().expect("non-empty");
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (ti, di) in times.iter().zip(&dist) {
        if *ti <= 0.5 * horizon + 1e-12 * horizon && *di > FIT_FLOOR {
            t.push(*ti);
            y.push(di.ln());
        }
    }
    let mid: Vec<f64> = times
        .iter()
        .zip(&dist)
        .filter(|(ti, _)| **ti >= 0.25 * horizon && **ti <= 0.75 * horizon)
        .map(|(_, d)| *d)
        .collect();
    let mid_mean = if mid.is_empty() { f64::NAN } else { mid.iter().sum::<f64>() / mid.len() as f64 };

    let mut report = TurnpikeReport {
        times: times.clone(),
        distances: dist.clone(),
        gamma: None,
        mu: None,
        r_squared: None,
        model: None,
        degenerate: true,
        initial_distance: dist[0],
        mid_mean,
        final_gap: *dist.last().expect("non-empty"),
        bangbang: None,
    };
    if t.len() < 2 {
        return Ok(report);
    }
    let one = one_sided(&t, &y);
    let two = two_sided(&t, &y, horizon);
    let (fit, model) = if two.sse < one.sse { (two, FitModel::TwoSided) } else { (one, FitModel::OneSided) };
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let r2 = if sst > 0.0 { 1.0 - fit.sse / sst } else if fit.sse <= 1e-24 { 1.0 } else { 0.0 };
    report.gamma = Some(fit.log_gamma.exp());
    report.mu = Some(fit.mu);
    report.r_squared = Some(r2);
    report.model = Some(model);
    report.degenerate = false;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalGap {
    pub gap: f64,
    pub min: f64,
    /// `gap ≤ min + 1e−6 + 0.01·min`.
    pub stabilized: bool,
}

/// Compares the final distance to the target with the smallest distance over time.
pub fn final_time_gap<S: Scalar>(traj: &StackedTrajectory<S>, x_d: &Mat<S>) -> Result<FinalGap> {
    let dist = distances(traj, x_d)?;
    let gap = *dist.last().expect("non-empty");
    let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-6 + 0.01 * min;
    Ok(FinalGap { gap, min, stabilized: gap <= min + tol })
}

/// Classifies every node as near zero (`‖u^k‖ ≤ tol·M`), at the bound
/// (`|‖u^k‖ − M| ≤ tol·M`) or intermediate.
pub fn bangbang_profile<S: Scalar>(u: &ControlPath<S>, m: f64, tol_rel: f64) -> Result<BangBangProfile> {
    if !(m > 0.0) {
        return arg_err("bound must be positive");
    }
    if !(tol_rel > 0.0 && tol_rel < 0.5) {
        return arg_err("relative tolerance must lie in (0, 0.5)");
    }
    let n = u.n_layers();
    let mut counts = [0usize; 3];
    let mut zero = Vec::with_capacity(n);
    for k in 0..n {
        let v = u.node_norm(k).as_f64();
        let z = v <= tol_rel * m;
        zero.push(z);
        if z {
            counts[1] += 1;
        } else if (v - m).abs() <= tol_rel * m {
            counts[0] += 1;
        } else {
            counts[2] += 1;
        }
    }
    let tail = zero.iter().rev().take_while(|z| **z).count();
    let switch_time = (tail > 0).then(|| u.times()[n - tail].as_f64());
    let f = |c: usize| c as f64 / n as f64;
    Ok(BangBangProfile {
        at_bound: f(counts[0]),
        at_zero: f(counts[1]),
        intermediate: f(counts[2]),
        counts,
        switch_time,
    })
}

/// Speeds up the control on each interval `(t_i, t_i')`: the interval's control is played
/// `1/(1−ω)` times faster and louder, followed by zero until `t_i'`.
///
/// Interval ends are snapped to the nearest grid nodes and must lie strictly inside
/// `(0, T)`. The compressed length is `n'' = ⌈n(1−ω)⌉` nodes; output node `j` collects the
/// source cells overlapping `[j c, (j+1) c)`, `c = n/n''`, with norm `Σ_k o_jk ‖u^k‖` and the
/// direction of `Σ_k o_jk u^k`. This preserves the node quadrature of `‖u‖` exactly and
/// keeps `‖ū‖ ≤ c·max‖u^k‖ ≤ M` when `‖u‖ ≤ (1−ω)M` on the intervals.
pub fn compress_control<S: Scalar>(u: &ControlPath<S>, intervals: &[(f64, f64)], omega: f64) -> Result<ControlPath<S>> {
    if !(omega > 0.0 && omega < 1.0) {
        return arg_err("omega must lie in (0, 1)");
    }
    let n = u.n_layers();
    let dt = u.dt().as_f64();
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(intervals.len());
    for &(a, b) in intervals {
        let ia = (a / dt).round() as i64;
        let ib = (b / dt).round() as i64;
        if ia < 1 || ib > n as i64 - 1 || ib <= ia {
            return arg_err(format!("interval ({a}, {b}) must map to interior nodes of the grid"));
        }
        spans.push((ia as usize, ib as usize));
    }
    spans.sort_unstable();
    if spans.windows(2).any(|w| w[1].0 < w[0].1) {
        return arg_err("intervals overlap");
    }
    let mut out = u.clone();
    let p = u.node_len();
    for (a, b) in spans {
        let len = b - a;
        let short = ((len as f64) * (1.0 - omega)).ceil().max(1.0) as usize;
        let c = len as f64 / short as f64;
        for j in 0..len {
            out.node_mut(a + j).iter_mut().for_each(|v| *v = S::zero());
        }
        for j in 0..short {
            let (lo, hi) = (j as f64 * c, (j as f64 + 1.0) * c);
            let mut mag = S::zero();
            let mut dir = vec![S::zero(); p];
            let mut widest = (0.0, a);
            for k in (lo.floor() as usize)..len.min(hi.ceil() as usize) {
                let o = (hi.min(k as f64 + 1.0) - lo.max(k as f64)).max(0.0);
                if o <= 0.0 {
                    continue;
                }
                let src = u.node(a + k);
                let sn = norm(src);
                mag = mag + S::c(o) * sn;
                for (dv, sv) in dir.iter_mut().zip(src) {
                    *dv = *dv + S::c(o) * *sv;
                }
                let weight = o * sn.as_f64();
                if weight > widest.0 {
                    widest = (weight, a + k);
                }
            }
            let mut dn = norm(&dir);
            if dn == S::zero() && mag > S::zero() {
                dir = u.node(widest.1).to_vec();
                dn = norm(&dir);
            }
            if dn > S::zero() {
                let f = mag / dn;
                for (o, dv) in out.node_mut(a + j).iter_mut().zip(&dir) {
                    *o = *dv * f;
                }
            }
        }
    }
    Ok(out)
}
