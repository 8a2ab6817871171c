//! Scaling identities: the Pohozaev balance and the integration by parts
//! formula behind it.
//!
//! For a radial field `X(x) = χ(|x|) x` the double-integral side weights the
//! Gagliardo integrand by
//! `div X(x) + div X(y) - (N+sp) (X(x) - X(y))·(x - y) / |x - y|^2`
//! and is evaluated with the same radial pair reduction as the energy. The
//! single-integral side `-p ∫ X·∇u (-Δ)^s_p u` goes through the pointwise
//! operator instead, so the two sides share no quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{gagliardo_energy, potential_energy};
use crate::error::{Error, Result};
use crate::kernel::{ray_exit, sphere_average, AngularKernel, PairOrders, PairRule};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{flp_apply, QuadSpec};
use crate::params::{sphere_area, Params};
use crate::profile::RadialProfile;
use crate::quadrature::legendre;

/// `P(u) = (N - sp) a(u) - N b(u)`.
pub fn pohozaev_residual(u: &RadialProfile, nl: &Nonlinearity, kernel: &AngularKernel) -> Result<f64> {
    let pr = &kernel.params;
    let a = gagliardo_energy(u, kernel)?;
    let b = potential_energy(u, nl, pr).b;
    Ok(pr.q1() * a - pr.nf() * b)
}

/// Radial vector fields `X(x) = χ(|x|) x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorFieldSpec {
    /// `χ ≡ 1`; not compactly supported, used for the exact bracket.
    Identity,
    /// `χ(r) = ψ(λ r)` with the quintic smoothstep cutoff `ψ`.
    IdentityCutoff { lambda: f64 },
    /// `χ` tabulated on radial nodes and interpolated like a profile; must end at zero.
    CustomRadial { nodes: Vec<f64>, chi: Vec<f64> },
}

/// `1` below 1, `0` above 2, quintic smoothstep between.
pub fn cutoff(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let z = t - 1.0;
        1.0 - z * z * z * (10.0 - z * (15.0 - 6.0 * z))
    }
}

pub fn cutoff_deriv(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        let z = t - 1.0;
        -30.0 * z * z * (1.0 - z) * (1.0 - z)
    }
}

impl VectorFieldSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            VectorFieldSpec::Identity => Ok(()),
            VectorFieldSpec::IdentityCutoff { lambda } => {
                if lambda.is_finite() && *lambda > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("cutoff scale lambda = {lambda} must be positive")))
                }
            }
            VectorFieldSpec::CustomRadial { nodes, chi } => {
                let prof = RadialProfile::new(nodes.clone(), chi.clone())?;
                if *prof.values().last().unwrap() != 0.0 {
                    return Err(Error::domain("custom radial field must vanish at its last node"));
                }
                Ok(())
            }
        }
    }

    fn profile(&self) -> Option<RadialProfile> {
        match self {
            VectorFieldSpec::CustomRadial { nodes, chi } => RadialProfile::new(nodes.clone(), chi.clone()).ok(),
            _ => None,
        }
    }

    /// Radius beyond which `X` vanishes.
    pub fn support(&self) -> Option<f64> {
        match self {
            VectorFieldSpec::Identity => None,
            VectorFieldSpec::IdentityCutoff { lambda } => Some(2.0 / lambda),
            VectorFieldSpec::CustomRadial { nodes, .. } => nodes.last().copied(),
        }
    }

    fn chi_fn(&self) -> Box<dyn Fn(f64) -> (f64, f64) + Sync + '_> {
        match self {
            VectorFieldSpec::Identity => Box::new(|_| (1.0, 0.0)),
            VectorFieldSpec::IdentityCutoff { lambda } => {
                let l = *lambda;
                Box::new(move |r| (cutoff(l * r), l * cutoff_deriv(l * r)))
            }
            VectorFieldSpec::CustomRadial { .. } => {
                let prof = self.profile().expect("validated field");
                Box::new(move |r| (prof.eval(r), if r == 0.0 { 0.0 } else { prof.deriv(r) }))
            }
        }
    }

    /// `(χ(r), χ'(r))`.
    pub fn chi(&self, r: f64) -> (f64, f64) {
        (self.chi_fn())(r)
    }

    /// Estimate of `sup (|χ| + r |χ'|)`, a Lipschitz bound for `X`.
    pub fn lipschitz(&self) -> f64 {
        let top = self.support().unwrap_or(1.0);
        let f = self.chi_fn();
        (0..=4096)
            .map(|k| {
                let r = top * k as f64 / 4096.0;
                let (c, d) = f(r);
                c.abs() + r * d.abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The bracket at points `x ≠ y` of `R^N`.
pub fn divergence_bracket(field: &VectorFieldSpec, x: &[f64], y: &[f64], params: &Params) -> Result<f64> {
    if x.len() != params.n || y.len() != params.n {
        return Err(Error::domain(format!("points must have {} coordinates", params.n)));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let dd: f64 = d.iter().map(|c| c * c).sum();
    if dd == 0.0 {
        return Err(Error::domain("bracket undefined at x = y"));
    }
    let f = field.chi_fn();
    let norm = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (rx, ry) = (norm(x), norm(y));
    let ((cx, dx), (cy, dy)) = (f(rx), f(ry));
    let nf = params.nf();
    let div = |c: f64, dc: f64, r: f64| nf * c + r * dc;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| cx * a - cy * b).collect();
    let ratio = diff.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / dd;
    Ok((div(cx, dx, rx) + div(cy, dy, ry) - nf * ratio) - params.sp() * ratio)
}

/// Bracket for `x = r e_1`, `y = ρ ω` with `ω` at polar angle `θ`, in cancellation-free form.
fn radial_bracket(chi: &dyn Fn(f64) -> (f64, f64), params: &Params, r: f64, rho: f64, s2: f64) -> (f64, f64) {
    let nf = params.nf();
    let ((cr, dr), (cp, dp)) = (chi(r), chi(rho));
    let delta = r - rho;
    let dist2 = delta * delta + 4.0 * r * rho * s2;
    // y·(x - y) = ρ (r cos θ - ρ) = ρ (δ - 2 r sin²(θ/2))
    let ratio = cr + (cr - cp) * rho * (delta - 2.0 * r * s2) / dist2;
    let br = (nf * cr + r * dr + nf * cp + rho * dp - nf * ratio) - params.sp() * ratio;
    (br, dist2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketStats {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_residual: f64,
    pub bracket_stats: BracketStats,
}

fn check_support(field: &VectorFieldSpec, u: &RadialProfile) -> Result<()> {
    match field.support() {
        Some(top) if top > u.rmax() * (1.0 + 1e-12) => Err(Error::domain(format!(
            "field support radius {top} exceeds the profile's Rmax = {}; use a larger grid or cutoff scale",
            u.rmax()
        ))),
        _ => Ok(()),
    }
}

/// `(C/2) ∬ |u(x) - u(y)|^p |x - y|^{-(N+sp)} [bracket] dx dy`.
pub fn ibp_lhs(u: &RadialProfile, field: &VectorFieldSpec, params: &Params, orders: PairOrders) -> Result<f64> {
    field.validate()?;
    check_support(field, u)?;
    let ang = legendre(orders.angular);
    let nu = 0.5 * params.kernel_exp();
    let sp = params.sp();
    let big_r = u.rmax();
    let chi = field.chi_fn();
    let kern = |r: f64, rho: f64| {
        let rr = r * rho;
        let w = if rr > 0.0 { (r - rho).abs() / rr.sqrt() } else { f64::INFINITY };
        sphere_average(params.n, &ang, w, |t| {
            let s = (0.5 * t).sin();
            let (br, dist2) = radial_bracket(&*chi, params, r, rho, s * s);
            br * dist2.powf(-nu)
        })
    };
    let identity = matches!(field, VectorFieldSpec::Identity);
    // y beyond Rmax: X(y) = 0 (or y itself for the identity), integrated along rays from x
    let ext = |r: f64| {
        let w = if r > 0.0 { (big_r - r) / (r * big_r).sqrt() } else { f64::INFINITY };
        if identity {
            return params.q1() * sphere_average(params.n, &ang, w, |t| ray_exit(r, big_r, t).powf(-sp)) / sp;
        }
        let (c, dc) = chi(r);
        let div = params.nf() * c + r * dc;
        sphere_average(params.n, &ang, w, |t| {
            let l = ray_exit(r, big_r, t);
            div * l.powf(-sp) / sp + params.kernel_exp() * c * r * t.cos() * l.powf(-1.0 - sp) / (1.0 + sp)
        })
    };
    let rule = PairRule::build(u.nodes(), params, orders, kern, ext);
    let (total, _) = rule.sum_p(u.values(), params.p);
    Ok(0.5 * params.constant() * total)
}

/// Gauss points and weights of `∫_0^{top} · r^{N-1} dr` over the profile's cells,
/// split at `extra` radii.
fn radial_points(u: &RadialProfile, top: f64, extra: &[f64], n: usize) -> Vec<(f64, f64)> {
    let gl = legendre(4);
    let mut cuts: Vec<f64> = u.nodes().iter().copied().filter(|r| *r < top).collect();
    cuts.extend(extra.iter().copied().filter(|r| *r > 0.0 && *r < top));
    cuts.push(top);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let h = w[1] - w[0];
        for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
            let r = w[0] + h * x;
            out.push((r, wt * h * r.powi(n as i32 - 1)));
        }
    }
    out
}

fn field_breaks(field: &VectorFieldSpec) -> Vec<f64> {
    match field {
        VectorFieldSpec::IdentityCutoff { lambda } => vec![1.0 / lambda, 2.0 / lambda],
        VectorFieldSpec::CustomRadial { nodes, .. } => nodes.clone(),
        VectorFieldSpec::Identity => vec![],
    }
}

/// `-p ∫ X·∇u (-Δ)^s_p u dx` through the pointwise operator.
pub fn ibp_rhs(u: &RadialProfile, field: &VectorFieldSpec, params: &Params, quad: &QuadSpec) -> Result<f64> {
    field.validate()?;
    check_support(field, u)?;
    let top = field.support().unwrap_or(u.rmax()).min(u.rmax());
    let pts = radial_points(u, top, &field_breaks(field), params.n);
    let chi = field.chi_fn();
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&(r, w)| -> Result<f64> {
            let du = if r == 0.0 { 0.0 } else { u.deriv(r) };
            let (c, _) = chi(r);
            if du == 0.0 || c == 0.0 {
                return Ok(0.0);
            }
            Ok(w * c * r * du * flp_apply(u, r, params, quad)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(-params.p * sphere_area(params.n) * vals.iter().sum::<f64>())
}

/// Min and max of the bracket over a fixed lattice of radial pairs and angles
/// inside `[0, 1.5 × support]`.
pub fn bracket_stats(field: &VectorFieldSpec, params: &Params, extent: f64) -> BracketStats {
    let chi = field.chi_fn();
    let top = 1.5 * field.support().unwrap_or(extent);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..64 {
        let r = top * (i as f64 + 0.5) / 64.0;
        for j in 0..64 {
            let rho = top * (j as f64 + 0.25) / 64.0;
            for k in 0..25 {
                let th = std::f64::consts::PI * (k as f64 + 0.5) / 25.0;
                let s = (0.5 * th).sin();
                let (b, _) = radial_bracket(&*chi, params, r, rho, s * s);
                lo = lo.min(b);
                hi = hi.max(b);
            }
        }
    }
    BracketStats { min: lo, max: hi }
}

/// Both sides of the integration by parts formula.
pub fn ibp_check(u: &RadialProfile, field: &VectorFieldSpec, params: &Params, quad: &QuadSpec) -> Result<IdentityReport> {
    ibp_check_with(u, field, params, quad, PairOrders::default())
}

pub fn ibp_check_with(u: &RadialProfile, field: &VectorFieldSpec, params: &Params, quad: &QuadSpec, orders: PairOrders) -> Result<IdentityReport> {
    if !params.pointwise_ok {
        return Err(Error::PointwiseUnsupported { s: params.s, p: params.p, bound: 2.0 * (params.p - 1.0) / params.p });
    }
    let lhs = ibp_lhs(u, field, params, orders)?;
    let rhs = ibp_rhs(u, field, params, quad)?;
    Ok(IdentityReport {
        lhs,
        rhs,
        rel_residual: (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())),
        bracket_stats: bracket_stats(field, params, u.rmax()),
    })
}

/// One row of the cutoff study; `lambda = 0` is the limit row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub lambda: f64,
    /// `(C/(2p)) ∬ |u(x)-u(y)|^p |x-y|^{-(N+sp)} [bracket]`.
    pub lhs: f64,
    /// `N ∫ φ_λ G(u)`.
    pub g_term: f64,
    /// `λ ∫ G(u) x·(∇φ)(λx)`.
    pub lambda_term: f64,
    /// `-∫ X·∇u (-Δ)^s_p u`, equal to the two G-terms when `u` solves the equation.
    pub operator_term: f64,
    /// `lhs - g_term - lambda_term`.
    pub assembled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitStudy {
    pub rows: Vec<LimitRow>,
    pub limit: LimitRow,
    pub pohozaev_residual: f64,
}

/// Evaluate the cutoff identity along decreasing `lambdas`.
pub fn cutoff_limit_study(
    u: &RadialProfile,
    nl: &Nonlinearity,
    params: &Params,
    lambdas: &[f64],
    quad: &QuadSpec,
    kernel: &AngularKernel,
) -> Result<LimitStudy> {
    if !params.pointwise_ok {
        return Err(Error::PointwiseUnsupported { s: params.s, p: params.p, bound: 2.0 * (params.p - 1.0) / params.p });
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("lambdas must be positive and strictly decreasing"));
    }
    let n = params.n;
    let nf = params.nf();
    let p = params.p;
    let big_g = |t: f64| nl.big_g(t);
    // the operator does not depend on λ: evaluate it once on every point any row needs
    let mut breaks: Vec<f64> = lambdas.iter().flat_map(|l| [1.0 / l, 2.0 / l]).collect();
    breaks.sort_by(f64::total_cmp);
    let pts = radial_points(u, u.rmax(), &breaks, n);
    let flp: Vec<f64> = pts
        .par_iter()
        .map(|&(r, _)| -> Result<f64> {
            if r == 0.0 || u.deriv(r) == 0.0 {
                return Ok(0.0);
            }
            Ok(flp_apply(u, r, params, quad)?.value)
        })
        .collect::<Result<_>>()?;
    let omega = sphere_area(n);
    let operator_term = |chi: &dyn Fn(f64) -> f64| -> f64 {
        let s: f64 = pts.iter().zip(&flp).map(|(&(r, w), f)| w * chi(r) * r * u.deriv(r) * f).sum();
        -omega * s
    };
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let field = VectorFieldSpec::IdentityCutoff { lambda };
        let lhs = ibp_lhs(u, &field, params, PairOrders::default())? / p;
        let g_term = nf * u.volume_integral_weighted(n, big_g, |r| cutoff(lambda * r));
        let lambda_term = u.volume_integral_weighted(n, big_g, |r| lambda * r * cutoff_deriv(lambda * r));
        rows.push(LimitRow {
            lambda,
            lhs,
            g_term,
            lambda_term,
            operator_term: operator_term(&|r| cutoff(lambda * r)),
            assembled: lhs - g_term - lambda_term,
        });
    }
    let a = gagliardo_energy(u, kernel)?;
    let b = potential_energy(u, nl, params).b;
    let limit_lhs = params.q1() * a;
    let limit = LimitRow {
        lambda: 0.0,
        lhs: limit_lhs,
        g_term: nf * b,
        lambda_term: 0.0,
        operator_term: operator_term(&|_| 1.0),
        assembled: limit_lhs - nf * b,
    };
    Ok(LimitStudy { rows, limit, pohozaev_residual: pohozaev_residual(u, nl, kernel)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialGrid;
    use proptest::prelude::*;

    fn p2() -> Params {
        Params::validate(2, 0.5, 2.0).unwrap()
    }

    fn bump(m: usize, rmax: f64) -> RadialProfile {
        let nodes = RadialGrid::with_size(m, rmax).nodes().unwrap();
        let top = rmax;
        RadialProfile::from_fn(nodes, |r| if r < top { (-r * r).exp() * (1.0 - (r / top).powi(2)).powi(3) } else { 0.0 }).unwrap()
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(2.5), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        for k in 1..100 {
            let t = 1.0 + k as f64 / 100.0;
            let fd = (cutoff(t + 1e-6) - cutoff(t - 1e-6)) / 2e-6;
            assert!((fd - cutoff_deriv(t)).abs() < 1e-8);
            assert!(cutoff_deriv(t) <= 0.0);
        }
    }

    proptest! {
        #[test]
        fn identity_bracket_is_constant(x in prop::array::uniform3(-5.0f64..5.0), y in prop::array::uniform3(-5.0f64..5.0)) {
            let pr = Params::validate(3, 0.4, 2.5).unwrap();
            prop_assume!(x != y);
            let b = divergence_bracket(&VectorFieldSpec::Identity, &x, &y, &pr).unwrap();
            prop_assert_eq!(b, pr.q1());
        }

        #[test]
        fn radial_form_matches_vector_form(r in 0.0f64..3.0, rho in 0.0f64..3.0, th in 0.01f64..3.13) {
            let pr = p2();
            let field = VectorFieldSpec::IdentityCutoff { lambda: 1.3 };
            let x = [r, 0.0];
            let y = [rho * th.cos(), rho * th.sin()];
            let s = (0.5 * th).sin();
            let chi = field.chi_fn();
            let (fast, _) = radial_bracket(&*chi, &pr, r, rho, s * s);
            let slow = divergence_bracket(&field, &x, &y, &pr).unwrap();
            prop_assert!((fast - slow).abs() < 1e-9 * (1.0 + slow.abs()));
        }
    }

    #[test]
    fn bracket_examples() {
        let pr = p2();
        let field = VectorFieldSpec::IdentityCutoff { lambda: 0.1 };
        let far = divergence_bracket(&field, &[25.0, 3.0], &[-21.0, 0.5], &pr).unwrap();
        assert_eq!(far, 0.0);
        for eps in [1e-2, 1e-4, 1e-6] {
            let b = divergence_bracket(&field, &[3.0 + eps, 1.0], &[3.0, 1.0], &pr).unwrap();
            assert!((b - pr.q1()).abs() < 1e-12);
        }
        assert!(matches!(divergence_bracket(&field, &[1.0, 1.0], &[1.0, 1.0], &pr), Err(Error::Domain(_))));
        assert!(matches!(divergence_bracket(&field, &[1.0], &[1.0, 1.0], &pr), Err(Error::Domain(_))));
    }

    #[test]
    fn bracket_bound_is_scale_free() {
        let pr = p2();
        let maxes: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&lambda| {
                let st = bracket_stats(&VectorFieldSpec::IdentityCutoff { lambda }, &pr, 1.0);
                st.max.abs().max(st.min.abs())
            })
            .collect();
        for m in &maxes {
            assert!((m - maxes[0]).abs() < 0.05 * maxes[0]);
        }
    }

    #[test]
    fn field_validation() {
        assert!(VectorFieldSpec::IdentityCutoff { lambda: 0.0 }.validate().is_err());
        let bad = VectorFieldSpec::CustomRadial { nodes: vec![0.0, 1.0, 2.0], chi: vec![1.0, 1.0, 0.5] };
        assert!(bad.validate().is_err());
        let good = VectorFieldSpec::CustomRadial { nodes: vec![0.0, 1.0, 2.0], chi: vec![1.0, 1.0, 0.0] };
        good.validate().unwrap();
        assert_eq!(good.support(), Some(2.0));
        let l = VectorFieldSpec::IdentityCutoff { lambda: 0.5 }.lipschitz();
        let l2 = VectorFieldSpec::IdentityCutoff { lambda: 0.05 }.lipschitz();
        assert!(l > 3.0 && l < 3.6);
        assert!((l - l2).abs() < 1e-12);
        let parsed: VectorFieldSpec = toml::from_str("kind = \"identity_cutoff\"\nlambda = 0.25").unwrap();
        assert_eq!(parsed, VectorFieldSpec::IdentityCutoff { lambda: 0.25 });
    }

    #[test]
    fn identity_field_gives_scaled_energy() {
        let pr = p2();
        let u = bump(64, 8.0);
        let kernel = AngularKernel::build(&pr, u.nodes());
        let a = gagliardo_energy(&u, &kernel).unwrap();
        let lhs = ibp_lhs(&u, &VectorFieldSpec::Identity, &pr, PairOrders::default()).unwrap();
        assert!((lhs - pr.p * pr.q1() * a).abs() < 1e-11 * lhs.abs());
    }

    #[test]
    fn zero_and_homogeneity() {
        let pr = p2();
        let quad = QuadSpec::default();
        let field = VectorFieldSpec::IdentityCutoff { lambda: 0.5 };
        let u = bump(48, 6.0);
        let zero = u.scaled(0.0);
        let r0 = ibp_check(&zero, &field, &pr, &quad).unwrap();
        assert_eq!((r0.lhs, r0.rhs), (0.0, 0.0));
        let r1 = ibp_check(&u, &field, &pr, &quad).unwrap();
        let r2 = ibp_check(&u.scaled(2.0), &field, &pr, &quad).unwrap();
        let rm = ibp_check(&u.scaled(-1.0), &field, &pr, &quad).unwrap();
        let k = 2f64.powf(pr.p);
        assert!((r2.lhs - k * r1.lhs).abs() < 1e-12 * r2.lhs.abs());
        assert!((r2.rhs - k * r1.rhs).abs() < 1e-12 * r2.rhs.abs());
        assert!((rm.lhs - r1.lhs).abs() < 1e-13 * r1.lhs.abs());
        assert!((rm.rhs - r1.rhs).abs() < 1e-13 * r1.rhs.abs());
        let rel = |r: &IdentityReport| (r.lhs - r.rhs).abs() / r.lhs.abs().max(r.rhs.abs());
        assert!((rel(&r1) - rel(&r2)).abs() < 1e-10);
    }

    #[test]
    fn support_and_pointwise_guards() {
        let u = bump(48, 6.0);
        let field = VectorFieldSpec::IdentityCutoff { lambda: 0.2 };
        assert!(matches!(ibp_check(&u, &field, &p2(), &QuadSpec::default()), Err(Error::Domain(_))));
        let bad = Params::validate(2, 0.9, 1.5).unwrap();
        assert!(matches!(
            ibp_check(&u, &VectorFieldSpec::IdentityCutoff { lambda: 1.0 }, &bad, &QuadSpec::default()),
            Err(Error::PointwiseUnsupported { .. })
        ));
    }

    #[test]
    fn pohozaev_root_under_dilation() {
        let pr = p2();
        let nl = Nonlinearity::two_power(1.0, 3.0, &pr).unwrap();
        let u = bump(64, 8.0).scaled(4.0);
        let kernel = AngularKernel::build(&pr, u.nodes());
        assert_eq!(pohozaev_residual(&u.scaled(0.0), &nl, &kernel).unwrap(), 0.0);
        let a = gagliardo_energy(&u, &kernel).unwrap();
        let b = potential_energy(&u, &nl, &pr).b;
        assert!(a > 0.0 && b > 0.0);
        let star = (pr.q1() * a / (pr.nf() * b)).powf(1.0 / pr.sp());
        let f = |sigma: f64| pohozaev_residual(&u.dilate(sigma).unwrap(), &nl, &kernel).unwrap();
        let (mut lo, mut hi) = (star / 4.0, star * 4.0);
        assert!(f(lo).signum() != f(hi).signum());
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - star).abs() < 1e-6 * star);
    }
}
