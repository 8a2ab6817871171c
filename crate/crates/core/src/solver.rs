//! Constrained minimization `J = inf { a(u) : b(u) = 1 }` over radial profiles.
//!
//! Iterates keep their values on a fixed base node set; the constraint is
//! restored after every step by an exact dilation, so the only node sets ever
//! seen are uniform rescalings of the base one and the kernel is built once.

use serde::{Deserialize, Serialize};

use crate::energy::{dot, gagliardo_energy, gagliardo_gradient, potential_energy, potential_gradient};
use crate::error::{Error, Result};
use crate::identity::pohozaev_residual;
use crate::kernel::AngularKernel;
use crate::nonlinearity::Nonlinearity;
use crate::params::Params;
use crate::profile::{RadialGrid, RadialProfile};
use crate::symmetrize::{resample_pl_volume, symmetrize_radial};

/// Initializer radii tried in order until `b(w_R) > 0`.
pub const R_SCHEDULE: [f64; 4] = [4.0, 8.0, 16.0, 32.0];
const WINDOW: usize = 20;
const MAX_BACKTRACKS: usize = 30;
const FEASIBILITY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// First trial step, relative to the weighted norm of the first iterate.
    pub step0: f64,
    pub shrink: f64,
    pub grow: f64,
    /// Stop when the projected gradient falls below this fraction of the full one.
    pub grad_tol: f64,
    /// Stop when `a` drops by less than this (relative) over the last 20 iterations.
    pub energy_tol: f64,
    pub symmetrize_every: usize,
    pub deterministic: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 20000,
            step0: 0.05,
            shrink: 0.5,
            grow: 1.5,
            grad_tol: 1e-6,
            energy_tol: 1e-9,
            symmetrize_every: 10,
            deterministic: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::domain(format!("solve config: {what}")));
        if self.max_iters < 1 {
            return bad("max_iters must be at least 1");
        }
        if !(self.step0 > 0.0 && self.grad_tol > 0.0 && self.energy_tol > 0.0) {
            return bad("step0 and tolerances must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.grow >= 1.0) {
            return bad("need 0 < shrink < 1 <= grow");
        }
        if self.symmetrize_every < 1 {
            return bad("symmetrize_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub a: f64,
    pub b_defect: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(rename = "J_est")]
    pub j_est: f64,
    pub sigma_bar: f64,
    pub a_final: f64,
    pub b_final: f64,
    pub pohozaev_residual: f64,
    pub lagrange_mismatch: f64,
    pub weak_residual: f64,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub initializer_radius: f64,
    /// Guarded rearrangements that were kept.
    pub symmetrizations: usize,
    pub test_bank: Vec<String>,
    /// Worst `|b - 1|` seen after any projection.
    pub max_b_defect: f64,
}

/// `u` dilated so that `b = 1`.
pub fn project_constraint(u: &RadialProfile, nl: &Nonlinearity, params: &Params) -> Result<RadialProfile> {
    let b = potential_energy(u, nl, params).b;
    if !(b > 0.0) {
        return Err(Error::Constraint { b });
    }
    if b == 1.0 {
        return Ok(u.clone());
    }
    let out = u.dilate(b.powf(-1.0 / params.nf()))?;
    let defect = (potential_energy(&out, nl, params).b - 1.0).abs();
    if defect > FEASIBILITY {
        return Err(Error::Constraint { b: 1.0 + defect });
    }
    Ok(out)
}

/// Descent state carried between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepState {
    /// Absolute step along the Riesz direction; seeded from `step0` on first use.
    pub tau: Option<f64>,
    pub a: f64,
    pub config: SolveConfig,
    /// Projected over full gradient norm at the last call.
    pub grad_ratio: f64,
}

impl StepState {
    pub fn new(a: f64, config: SolveConfig) -> Self {
        StepState { tau: None, a, config, grad_ratio: f64::INFINITY }
    }
}

/// Remove from `d` its component along `g`, both as Riesz vectors for weights `w`.
pub(crate) fn remove_component(d: &mut [f64], g: &[f64], w: &[f64]) {
    let gg: f64 = g.iter().zip(w).map(|(x, w)| w * x * x).sum();
    if gg > 0.0 {
        let dg: f64 = d.iter().zip(g).zip(w).map(|((x, y), w)| w * x * y).sum();
        let c = dg / gg;
        for (x, y) in d.iter_mut().zip(g) {
            *x -= c * y;
        }
    }
}

fn weighted_norm(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
}

/// One projected gradient step with backtracking.
pub fn descend_step(
    u: &RadialProfile,
    state: &mut StepState,
    nl: &Nonlinearity,
    params: &Params,
    kernel: &AngularKernel,
) -> Result<(RadialProfile, bool)> {
    let n = params.n;
    let m = u.m();
    let w = u.dual_volumes(n);
    let ga = gagliardo_gradient(u, kernel)?;
    let gb = potential_gradient(u, nl, params);
    // Riesz vectors; the outermost node stays at zero
    let riesz = |g: &[f64]| -> Vec<f64> { (0..=m).map(|i| if i == m { 0.0 } else { g[i] / w[i] }).collect() };
    let full = riesz(&ga);
    let gb_r = riesz(&gb);
    let mut d: Vec<f64> = full.iter().map(|x| -x).collect();
    remove_component(&mut d, &gb_r, &w);
    let full_norm = weighted_norm(&full, &w);
    let d_norm = weighted_norm(&d, &w);
    state.grad_ratio = if full_norm > 0.0 { d_norm / full_norm } else { 0.0 };
    if state.grad_ratio < state.config.grad_tol {
        return Ok((u.clone(), false));
    }
    let mut tau = state.tau.unwrap_or(state.config.step0 * weighted_norm(u.values(), &w) / d_norm);
    for _ in 0..MAX_BACKTRACKS {
        let trial = u.with_values(u.values().iter().zip(&d).map(|(x, y)| x + tau * y).collect())?;
        // leaving b > 0 counts as a rejected trial: the step shrinks toward the current iterate
        if let Ok(next) = project_constraint(&trial, nl, params) {
            let a = gagliardo_energy(&next, kernel)?;
            if a < state.a {
                state.a = a;
                state.tau = Some(tau * state.config.grow);
                return Ok((next, true));
            }
        }
        tau *= state.config.shrink;
    }
    Err(Error::StepFailure { backtracks: MAX_BACKTRACKS, grad_norm: d_norm })
}

/// The fixed test bank at length scale `ell`, with a label per profile.
pub fn test_bank(nodes: &[f64], ell: f64) -> Result<Vec<(String, RadialProfile)>> {
    let mut bank: Vec<(String, Box<dyn Fn(f64) -> f64>)> = Vec::new();
    for w in [0.5, 1.0, 2.0] {
        bank.push((format!("gaussian(width={w})"), Box::new(move |r: f64| (-(r / (w * ell)).powi(2)).exp())));
    }
    for c in [0.5, 1.0, 2.0] {
        bank.push((format!("tent(radius={c})"), Box::new(move |r: f64| (1.0 - r / (c * ell)).max(0.0))));
    }
    for w in [1.0, 2.0] {
        bank.push((
            format!("wavelet(width={w})"),
            Box::new(move |r: f64| {
                let z = (r / (w * ell)).powi(2);
                (1.0 - z) * (-z).exp()
            }),
        ));
    }
    for c in [0.5, 1.0, 1.5, 2.0] {
        bank.push((format!("bump(center={c})"), Box::new(move |r: f64| (-((r - c * ell) / (0.5 * ell)).powi(2)).exp())));
    }
    bank.into_iter()
        .map(|(name, f)| {
            let mut v = RadialProfile::from_fn(nodes.to_vec(), f)?;
            // bank members vanish at the outer node like every iterate
            let mut vals = v.values().to_vec();
            *vals.last_mut().unwrap() = 0.0;
            v = v.with_values(vals)?;
            Ok((name, v))
        })
        .collect()
}

/// Radius where `|u|` first drops to half its maximum.
pub fn half_width(u: &RadialProfile) -> f64 {
    let top = u.sup_norm();
    let nodes = u.nodes();
    let vals = u.values();
    for i in 1..nodes.len() {
        if vals[i].abs() <= 0.5 * top {
            let (a, b) = (vals[i - 1].abs(), vals[i].abs());
            let t = if a > b { (a - 0.5 * top) / (a - b) } else { 1.0 };
            return nodes[i - 1] + t * (nodes[i] - nodes[i - 1]);
        }
    }
    u.rmax()
}

/// `max_v |<a'(u),v> - mu <b'(u),v>| / (1 + |<a'(u),v>|)` over the bank.
fn bank_mismatch(u: &RadialProfile, mu: f64, nl: &Nonlinearity, params: &Params, kernel: &AngularKernel, bank: &[(String, RadialProfile)]) -> Result<f64> {
    let ga = gagliardo_gradient(u, kernel)?;
    let gb = potential_gradient(u, nl, params);
    let mut worst = 0.0f64;
    for (_, v) in bank {
        let pa = dot(&ga, v.values());
        let pb = dot(&gb, v.values());
        worst = worst.max((pa - mu * pb).abs() / (1.0 + pa.abs()));
    }
    Ok(worst)
}

/// Lagrange mismatch at a feasible `u` with multiplier `J (N - sp)/N`.
pub fn lagrange_check(
    u: &RadialProfile,
    j_est: f64,
    nl: &Nonlinearity,
    params: &Params,
    kernel: &AngularKernel,
    bank: &[(String, RadialProfile)],
) -> Result<f64> {
    bank_mismatch(u, j_est * params.q1() / params.nf(), nl, params, kernel, bank)
}

/// Profile with `values` on the base nodes dilated by `sigma`.
fn on_scaled(base: &[f64], sigma: f64, values: Vec<f64>) -> Result<RadialProfile> {
    RadialProfile::new(base.iter().map(|r| r * sigma).collect(), values)
}

/// First feasible initializer along the radius schedule, already projected.
pub fn feasible_start(nl: &Nonlinearity, params: &Params, base: &[f64]) -> Result<(f64, RadialProfile)> {
    let rmax = *base.last().unwrap();
    for big_r in R_SCHEDULE {
        if big_r + 1.0 > rmax {
            break;
        }
        let w = nl.initial_guess(params, big_r, base.to_vec())?;
        if potential_energy(&w, nl, params).b > 0.0 {
            return Ok((big_r, project_constraint(&w, nl, params)?));
        }
    }
    Err(Error::InfeasibleStart { radii: R_SCHEDULE.to_vec() })
}

/// Minimize, rescale by `sigma_bar`, and evaluate every residual.
pub fn solve(nl: &Nonlinearity, params: &Params, grid: &RadialGrid, config: &SolveConfig) -> Result<(SolveReport, RadialProfile)> {
    let base = grid.nodes()?;
    let kernel = AngularKernel::build(params, &base);
    solve_with_kernel(nl, params, &kernel, config)
}

pub fn solve_with_kernel(nl: &Nonlinearity, params: &Params, kernel: &AngularKernel, config: &SolveConfig) -> Result<(SolveReport, RadialProfile)> {
    params.require_solver_dim()?;
    config.validate()?;
    let base = kernel.nodes().to_vec();
    let (big_r, mut u) = feasible_start(nl, params, &base)?;
    let mut a = gagliardo_energy(&u, kernel)?;
    let mut state = StepState::new(a, *config);
    let mut max_defect = (potential_energy(&u, nl, params).b - 1.0).abs();
    let mut trace = vec![TraceEntry { iter: 0, a, b_defect: max_defect, step: 0.0 }];
    let mut history = vec![a];
    let mut symmetrizations = 0;
    let mut iterations = 0;
    let mut converged = false;
    for k in 1..=config.max_iters {
        iterations = k;
        let (next, accepted) = descend_step(&u, &mut state, nl, params, kernel)?;
        if !accepted {
            converged = true;
            break;
        }
        // rebuild from the base nodes so rounding never drifts off the kernel's node set
        let sigma = kernel.scale_of(&next)?;
        u = on_scaled(&base, sigma, next.values().to_vec())?;
        a = state.a;
        let defect = (potential_energy(&u, nl, params).b - 1.0).abs();
        max_defect = max_defect.max(defect);
        trace.push(TraceEntry { iter: k, a, b_defect: defect, step: state.tau.unwrap_or(0.0) / config.grow });

        if k % config.symmetrize_every == 0 {
            if let Some((v, av)) = guarded_symmetrization(&u, a, nl, params, kernel, &base)? {
                u = v;
                a = av;
                state.a = av;
                symmetrizations += 1;
                let defect = (potential_energy(&u, nl, params).b - 1.0).abs();
                max_defect = max_defect.max(defect);
                trace.push(TraceEntry { iter: k, a, b_defect: defect, step: 0.0 });
            }
        }
        history.push(a);
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            if (old - a) <= config.energy_tol * a.abs() {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        let old = history[history.len().saturating_sub(1 + WINDOW)];
        return Err(Error::SolverDiverged { iters: iterations, rel_decrease: (old - a) / a.abs() });
    }

    let j_est = a;
    let arg = params.q1() * j_est / params.nf();
    if !(arg > 0.0) {
        return Err(Error::domain(format!("(N - sp) J / N = {arg} must be positive to rescale")));
    }
    let sigma_bar = arg.powf(1.0 / params.sp());
    let ubar = u.dilate(sigma_bar)?;
    let bank = test_bank(u.nodes(), half_width(&u))?;
    let lagrange_mismatch = lagrange_check(&u, j_est, nl, params, kernel, &bank)?;
    let bank_bar = test_bank(ubar.nodes(), half_width(&ubar))?;
    let weak_residual = bank_mismatch(&ubar, 1.0, nl, params, kernel, &bank_bar)?;
    let a_bar = gagliardo_energy(&ubar, kernel)?;
    let b_final = potential_energy(&ubar, nl, params).b;
    let p_bar = pohozaev_residual(&ubar, nl, kernel)?;
    let report = SolveReport {
        j_est,
        sigma_bar,
        a_final: a_bar,
        b_final,
        pohozaev_residual: p_bar,
        lagrange_mismatch,
        weak_residual,
        trace,
        iterations,
        initializer_radius: big_r,
        symmetrizations,
        test_bank: bank.into_iter().map(|(name, _)| name).collect(),
        max_b_defect: max_defect,
    };
    Ok((report, ubar))
}

/// Rearrange, resample onto the iterate's nodes and re-project; kept only if `a` does not grow.
fn guarded_symmetrization(
    u: &RadialProfile,
    a: f64,
    nl: &Nonlinearity,
    params: &Params,
    kernel: &AngularKernel,
    base: &[f64],
) -> Result<Option<(RadialProfile, f64)>> {
    let s = symmetrize_radial(u, params.n);
    if &s == u {
        return Ok(None);
    }
    let resampled = resample_pl_volume(&s, u.nodes(), params.n);
    let Ok(projected) = project_constraint(&resampled, nl, params) else { return Ok(None) };
    let sigma = kernel.scale_of(&projected)?;
    let v = on_scaled(base, sigma, projected.values().to_vec())?;
    let av = gagliardo_energy(&v, kernel)?;
    Ok(if av <= a { Some((v, av)) } else { None })
}
