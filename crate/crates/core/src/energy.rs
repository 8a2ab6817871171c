//! Gagliardo energy `a`, potential energies `b = b1 - b2`, and their first variations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{AngularKernel, PairOrders};
use crate::nonlinearity::Nonlinearity;
use crate::params::Params;
use crate::profile::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub a_value: f64,
    pub b_value: f64,
    pub b1_value: f64,
    pub b2_value: f64,
    /// Contribution of diagonal and adjacent cell pairs to `a`.
    pub diag_band_estimate: f64,
    /// `|a - a_refined|` with every quadrature order doubled, if computed.
    pub quad_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Potential {
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
}

fn scale_factor(kernel: &AngularKernel, u: &RadialProfile) -> Result<f64> {
    let sigma = kernel.scale_of(u)?;
    Ok(if sigma == 1.0 { 1.0 } else { sigma.powf(kernel.params.q1()) })
}

/// `(C/(2p)) ∬ |u(x) - u(y)|^p |x - y|^{-(N+sp)} dx dy` and its near-diagonal part.
pub fn gagliardo_energy_parts(u: &RadialProfile, kernel: &AngularKernel) -> Result<(f64, f64)> {
    let f = scale_factor(kernel, u)?;
    let pr = &kernel.params;
    let c = pr.constant() / (2.0 * pr.p) * f;
    let (total, near) = kernel.rule.sum_p(u.values(), pr.p);
    Ok((c * total, c * near))
}

pub fn gagliardo_energy(u: &RadialProfile, kernel: &AngularKernel) -> Result<f64> {
    Ok(gagliardo_energy_parts(u, kernel)?.0)
}

/// Nodal gradient `∂a/∂u_i`.
pub fn gagliardo_gradient(u: &RadialProfile, kernel: &AngularKernel) -> Result<Vec<f64>> {
    let f = scale_factor(kernel, u)?;
    let pr = &kernel.params;
    let c = 0.5 * pr.constant() * f;
    Ok(kernel.rule.pairing_coefficients(u.values(), pr.p).into_iter().map(|g| c * g).collect())
}

/// `(C/2) ∬ |u(x)-u(y)|^{p-2}(u(x)-u(y))(v(x)-v(y)) |x-y|^{-(N+sp)} dx dy`.
pub fn gagliardo_first_variation(u: &RadialProfile, v: &RadialProfile, kernel: &AngularKernel) -> Result<f64> {
    check_shared(u, v)?;
    let g = gagliardo_gradient(u, kernel)?;
    Ok(dot(&g, v.values()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_shared(u: &RadialProfile, v: &RadialProfile) -> Result<()> {
    if u.nodes() != v.nodes() {
        return Err(Error::KernelMismatch("test profile does not share the nodes of u".into()));
    }
    Ok(())
}

pub fn potential_energy(u: &RadialProfile, nl: &Nonlinearity, params: &Params) -> Potential {
    let n = params.n;
    let b1 = u.volume_integral(n, |t| nl.eval(t).big_g1);
    let b2 = u.volume_integral(n, |t| nl.eval(t).big_g2);
    Potential { b: b1 - b2, b1, b2 }
}

/// `∫ g(u) v dx`.
pub fn potential_first_variation(u: &RadialProfile, v: &RadialProfile, nl: &Nonlinearity, params: &Params) -> Result<f64> {
    check_shared(u, v)?;
    Ok(u.volume_pairing(v, params.n, |t| nl.g(t)))
}

/// Nodal gradient `∂b/∂u_i`.
pub fn potential_gradient(u: &RadialProfile, nl: &Nonlinearity, params: &Params) -> Vec<f64> {
    u.volume_gradient(params.n, |t| nl.g(t))
}

/// Full report; `refine` adds the doubled-order residual at the cost of a second kernel build.
pub fn energy_report(u: &RadialProfile, nl: &Nonlinearity, kernel: &AngularKernel, refine: bool) -> Result<EnergyReport> {
    let (a, near) = gagliardo_energy_parts(u, kernel)?;
    let pot = potential_energy(u, nl, &kernel.params);
    let quad_residual = if refine {
        let fine = AngularKernel::build_with(&kernel.params, kernel.nodes(), PairOrders::default().refined());
        Some((gagliardo_energy(u, &fine)? - a).abs())
    } else {
        None
    };
    Ok(EnergyReport {
        a_value: a,
        b_value: pot.b,
        b1_value: pot.b1,
        b2_value: pot.b2,
        diag_band_estimate: near,
        quad_residual,
    })
}

/// Convenience bundle of the objects every energy evaluation needs.
#[derive(Debug, Clone)]
pub struct Energy {
    pub params: Params,
    pub nl: Nonlinearity,
    pub kernel: AngularKernel,
}

impl Energy {
    pub fn new(params: Params, nl: Nonlinearity, kernel: AngularKernel) -> Self {
        Energy { params, nl, kernel }
    }

    pub fn a(&self, u: &RadialProfile) -> Result<f64> {
        gagliardo_energy(u, &self.kernel)
    }

    pub fn b(&self, u: &RadialProfile) -> f64 {
        potential_energy(u, &self.nl, &self.params).b
    }

    pub fn grad_a(&self, u: &RadialProfile) -> Result<Vec<f64>> {
        gagliardo_gradient(u, &self.kernel)
    }

    pub fn grad_b(&self, u: &RadialProfile) -> Vec<f64> {
        potential_gradient(u, &self.nl, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialGrid;

    fn setup(m: usize, rmax: f64, s: f64, p: f64) -> (Params, AngularKernel, RadialProfile) {
        let params = Params::validate(2, s, p).unwrap();
        let nodes = RadialGrid::with_size(m, rmax).nodes().unwrap();
        let k = AngularKernel::build(&params, &nodes);
        let u = RadialProfile::from_fn(nodes, |r| (-r * r).exp()).unwrap();
        (params, k, u)
    }

    #[test]
    fn zero_profile_has_zero_energy() {
        let (_, k, u) = setup(48, 6.0, 0.5, 2.0);
        assert_eq!(gagliardo_energy(&u.scaled(0.0), &k).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_energy_matches_fourier_value() {
        // p = 2: ∬|u(x)-u(y)|^2/|x-y|^{N+2s} = (2/C_std) ∫|ξ|^{2s}|û|^2 dξ/(2π)^N
        let (params, k, u) = setup(128, 8.0, 0.5, 2.0);
        let s = params.s;
        let g = statrs::function::gamma::gamma;
        let c_std = s * 4f64.powf(s) * g(1.0 + s) / (std::f64::consts::PI * g(1.0 - s));
        // û = π e^{-|ξ|^2/4}, halved for the 1/(2p) prefactor against 2/C_std
        let fourier = std::f64::consts::PI / 2.0 * 2f64.powf(s) * g(1.0 + s) / 2.0;
        let exact = params.constant() / c_std * fourier;
        let a = gagliardo_energy(&u, &k).unwrap();
        assert!((a / exact - 1.0).abs() < 2e-4, "{a} vs {exact}");
    }

    #[test]
    fn pairing_with_self_is_p_times_energy() {
        for p in [1.8, 2.0, 3.0] {
            let (_, k, u) = setup(48, 6.0, 0.3, p);
            let a = gagliardo_energy(&u, &k).unwrap();
            let pair = gagliardo_first_variation(&u, &u, &k).unwrap();
            assert!((pair / (p * a) - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn pairing_matches_central_difference() {
        let (_, k, u) = setup(48, 6.0, 0.5, 2.6);
        let v = RadialProfile::from_fn(u.nodes().to_vec(), |r| r * (-(r - 1.0) * (r - 1.0)).exp()).unwrap();
        let h = 1e-5;
        let plus = u.with_values(u.values().iter().zip(v.values()).map(|(a, b)| a + h * b).collect()).unwrap();
        let minus = u.with_values(u.values().iter().zip(v.values()).map(|(a, b)| a - h * b).collect()).unwrap();
        let fd = (gagliardo_energy(&plus, &k).unwrap() - gagliardo_energy(&minus, &k).unwrap()) / (2.0 * h);
        let pair = gagliardo_first_variation(&u, &v, &k).unwrap();
        assert!((fd / pair - 1.0).abs() < 1e-6, "{fd} vs {pair}");
    }

    #[test]
    fn dilated_profiles_reuse_the_kernel() {
        let (params, k, u) = setup(48, 6.0, 0.5, 2.0);
        let a = gagliardo_energy(&u, &k).unwrap();
        let a2 = gagliardo_energy(&u.dilate(2.0).unwrap(), &k).unwrap();
        assert!((a2 / a - 2f64.powf(params.q1())).abs() < 1e-12);
        let other = RadialProfile::from_fn(RadialGrid::with_size(48, 7.0).nodes().unwrap(), |_| 0.0).unwrap();
        assert!(matches!(gagliardo_energy(&other, &k), Err(Error::KernelMismatch(_))));
    }

    #[test]
    fn potential_report_invariants() {
        let (params, k, u) = setup(48, 6.0, 0.5, 2.0);
        let nl = Nonlinearity::two_power(1.0, 3.0, &params).unwrap();
        let u = u.scaled(2.5);
        let rep = energy_report(&u, &nl, &k, false).unwrap();
        assert!((rep.b_value - (rep.b1_value - rep.b2_value)).abs() <= 1e-12);
        assert!(rep.b1_value >= 0.0 && rep.b2_value >= 0.0 && rep.a_value >= 0.0);
        assert!(rep.b2_value >= 0.5 * u.lq_mass(2, 2.0) * (1.0 - 1e-12));
        let zero = potential_energy(&u.scaled(0.0), &nl, &params);
        assert_eq!((zero.b, zero.b1, zero.b2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn potential_pairing_matches_central_difference() {
        let (params, _, u) = setup(48, 6.0, 0.5, 2.0);
        let nl = Nonlinearity::two_power(1.0, 3.0, &params).unwrap();
        let u = u.with_values(u.values().iter().map(|x| 3.0 * x - 0.4).collect()).unwrap();
        let v = RadialProfile::from_fn(u.nodes().to_vec(), |r| (1.0 - r).tanh()).unwrap();
        let h = 1e-5;
        let shift = |c: f64| u.with_values(u.values().iter().zip(v.values()).map(|(a, b)| a + c * b).collect()).unwrap();
        let fd = (potential_energy(&shift(h), &nl, &params).b - potential_energy(&shift(-h), &nl, &params).b) / (2.0 * h);
        let pair = potential_first_variation(&u, &v, &nl, &params).unwrap();
        assert!((fd / pair - 1.0).abs() < 1e-6, "{fd} vs {pair}");
        let grad = potential_gradient(&u, &nl, &params);
        assert!((dot(&grad, v.values()) / pair - 1.0).abs() < 1e-12);
    }
}
