//! Two-power nonlinearity `g(t) = -m|t|^{p-2}t + |t|^{q-2}t` and its split.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::profile::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    TwoPower,
    /// Two-power below `splice`, constant `g` above it.
    Spliced { splice: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonlinearity {
    pub m: f64,
    pub q: f64,
    pub p: f64,
    pub family: Family,
    /// First zero of `G` beyond the origin, `(qm/p)^{1/(q-p)}`.
    pub zeta_star: f64,
    /// Witness with `G(zeta) > 0` used by the initializer.
    pub zeta: f64,
}

/// `(g, G, g1, g2, G1, G2)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eval {
    pub g: f64,
    pub big_g: f64,
    pub g1: f64,
    pub g2: f64,
    pub big_g1: f64,
    pub big_g2: f64,
}

impl Nonlinearity {
    pub fn two_power(m: f64, q: f64, params: &Params) -> Result<Self> {
        Self::with_family(m, q, params, Family::TwoPower)
    }

    pub fn with_family(m: f64, q: f64, params: &Params, family: Family) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain(format!("m = {m} must be positive")));
        }
        if !(q > params.p) {
            return Err(Error::domain(format!("q = {q} must exceed p = {}", params.p)));
        }
        if !(q < params.pstar) {
            return Err(Error::domain(format!("q = {q} must be below the critical exponent {}", params.pstar)));
        }
        let p = params.p;
        let zeta_star = (q * m / p).powf(1.0 / (q - p));
        if let Family::Spliced { splice } = family {
            if !(splice > zeta_star) || !splice.is_finite() {
                return Err(Error::domain(format!("splice point {splice} must exceed {zeta_star}")));
            }
        }
        let mut nl = Nonlinearity { m, q, p, family, zeta_star, zeta: 0.0 };
        nl.zeta = nl.choose_zeta();
        Ok(nl)
    }

    /// Same family with an explicit witness `zeta`.
    pub fn with_zeta(mut self, zeta: f64) -> Result<Self> {
        if !(self.eval(zeta).big_g > 0.0) {
            return Err(Error::domain(format!("G({zeta}) is not positive")));
        }
        self.zeta = zeta;
        Ok(self)
    }

    /// Smallest point of a 64-point grid on `(0, 2ζ*]` with `G >= 0.1 max G`.
    fn choose_zeta(&self) -> f64 {
        let top = 2.0 * self.zeta_star;
        let grid: Vec<f64> = (1..=64).map(|k| top * k as f64 / 64.0).collect();
        let gmax = grid.iter().map(|&t| self.eval(t).big_g).fold(f64::NEG_INFINITY, f64::max);
        grid.into_iter().find(|&t| self.eval(t).big_g >= 0.1 * gmax).unwrap_or(top)
    }

    pub fn eval(&self, t: f64) -> Eval {
        let a = t.abs();
        let sg = t.signum();
        let (m, p, q) = (self.m, self.p, self.q);
        let (g1, big_g1) = match self.family {
            Family::Spliced { splice } if a > splice => {
                let gt = splice.powf(q - 1.0) - m * splice.powf(p - 1.0);
                let g1 = splice.powf(q - 1.0) + m * (a.powf(p - 1.0) - splice.powf(p - 1.0));
                let big = splice.powf(q) / q + gt * (a - splice) + m / p * (a.powf(p) - splice.powf(p));
                (g1, big)
            }
            _ => (a.powf(q - 1.0), a.powf(q) / q),
        };
        let g2 = m * a.powf(p - 1.0);
        let big_g2 = m / p * a.powf(p);
        Eval {
            g: sg * (g1 - g2),
            big_g: big_g1 - big_g2,
            g1: sg * g1,
            g2: sg * g2,
            big_g1,
            big_g2,
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        self.eval(t).g
    }

    pub fn big_g(&self, t: f64) -> f64 {
        self.eval(t).big_g
    }

    /// `sup_{0<|t|<=t_max} |g(t)/(|t|^{p-2}t) + m| / |t|^{q-p}` on a sample.
    pub fn small_t_defect(&self, t_max: f64) -> f64 {
        (1..=200)
            .map(|k| t_max * k as f64 / 200.0)
            .map(|t| (self.g(t) / t.powf(self.p - 1.0) + self.m).abs() / t.powf(self.q - self.p))
            .fold(0.0, f64::max)
    }

    /// `|g(t)| / |t|^{p*-1}` at `t`, which must vanish as `t` grows.
    pub fn critical_ratio(&self, params: &Params, t: f64) -> f64 {
        self.g(t).abs() / t.abs().powf(params.pstar - 1.0)
    }

    /// The profile equal to `zeta` on `[0, R]`, linear down to 0 on `[R, R+1]`.
    pub fn initial_guess(&self, params: &Params, big_r: f64, nodes: Vec<f64>) -> Result<RadialProfile> {
        let _ = params;
        if !(big_r > 0.0) {
            return Err(Error::domain(format!("initializer radius {big_r} must be positive")));
        }
        let rmax = nodes.last().copied().unwrap_or(0.0);
        if rmax < big_r + 1.0 {
            return Err(Error::domain(format!("grid Rmax = {rmax} is below R + 1 = {}", big_r + 1.0)));
        }
        let z = self.zeta;
        RadialProfile::from_fn(nodes, |r| {
            if r <= big_r {
                z
            } else if r <= big_r + 1.0 {
                z * (big_r + 1.0 - r)
            } else {
                0.0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::legendre;
    use proptest::prelude::*;

    fn reference() -> Nonlinearity {
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        Nonlinearity::two_power(1.0, 3.0, &p).unwrap()
    }

    #[test]
    fn rejects_critical_q() {
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        assert!(matches!(Nonlinearity::two_power(1.0, 4.0, &p), Err(Error::Domain(_))));
        assert!(matches!(Nonlinearity::two_power(1.0, 2.0, &p), Err(Error::Domain(_))));
        assert!(matches!(Nonlinearity::two_power(0.0, 3.0, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_forms_at_one() {
        let e = reference().eval(1.0);
        assert_eq!(e.g, 0.0);
        assert!((e.big_g + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!((e.g1, e.g2), (1.0, 1.0));
        assert!((e.big_g1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.big_g2, 0.5);
        assert_eq!(reference().eval(0.0), Eval { g: 0.0, big_g: 0.0, g1: 0.0, g2: 0.0, big_g1: 0.0, big_g2: 0.0 });
    }

    #[test]
    fn split_for_reference_model() {
        let nl = reference();
        for &t in &[0.3, 1.7, -2.2] {
            let e = nl.eval(t);
            assert!((e.g1 - t.signum() * t * t).abs() < 1e-14);
            assert!((e.g2 - t).abs() < 1e-15);
        }
        assert!(nl.big_g(2.0) > 0.0);
        assert!((nl.big_g(2.0) - 2.0 / 3.0).abs() < 1e-14);
        assert!(nl.big_g(nl.zeta) > 0.0);
        assert!(nl.zeta <= 2.0 * nl.zeta_star);
    }

    #[test]
    fn hypotheses() {
        let nl = reference();
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        assert!(nl.small_t_defect(0.1) <= 2.0);
        assert!(nl.critical_ratio(&p, 1e6) < nl.critical_ratio(&p, 1e3));
        assert!(nl.critical_ratio(&p, 1e8) < 1e-7);
    }

    #[test]
    fn spliced_family() {
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        let nl = Nonlinearity::with_family(1.0, 3.0, &p, Family::Spliced { splice: 3.0 }).unwrap();
        let g_t = nl.g(3.0);
        assert_eq!(nl.g(10.0), g_t);
        let e = nl.eval(7.5);
        assert!((e.g1 - e.g2 - e.g).abs() < 1e-12);
        assert!((e.big_g1 - e.big_g2 - e.big_g).abs() < 1e-12);
        assert!(nl.critical_ratio(&p, 1e4) < 1e-6);
        let two = Nonlinearity::two_power(1.0, 3.0, &p).unwrap();
        assert_eq!(nl.eval(2.5), two.eval(2.5));
    }

    #[test]
    fn initializer_shape() {
        let nl = reference().with_zeta(2.0).unwrap();
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        let nodes: Vec<f64> = (0..=100).map(|i| i as f64 * 0.125).collect();
        let w = nl.initial_guess(&p, 8.0, nodes).unwrap();
        assert_eq!(w.eval(8.0), 2.0);
        assert_eq!(w.eval(9.0), 0.0);
        assert!((w.eval(8.5) - 1.0).abs() < 1e-14);
        assert!((w.eval(8.3) - 1.4).abs() < 1e-13);
    }

    fn primitive_by_quadrature(nl: &Nonlinearity, t: f64, pick: impl Fn(&Eval) -> f64) -> f64 {
        // x = t y^2 removes the power singularity at 0; split at the splice kink
        let rule = legendre(20);
        let mut cuts = vec![0.0, 1.0];
        if let Family::Spliced { splice } = nl.family {
            if splice < t {
                cuts.insert(1, (splice / t).sqrt());
            }
        }
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            for k in 0..32 {
                let a = w[0] + (w[1] - w[0]) * k as f64 / 32.0;
                let b = w[0] + (w[1] - w[0]) * (k + 1) as f64 / 32.0;
                acc += rule.integrate(a, b, |y| pick(&nl.eval(t * y * y)) * 2.0 * t * y);
            }
        }
        acc
    }

    proptest! {
        #[test]
        fn split_and_parity(t in -50.0f64..50.0, m in 0.2f64..3.0, q in 2.1f64..3.9) {
            let p = Params::validate(2, 0.5, 2.0).unwrap();
            for fam in [Family::TwoPower, Family::Spliced { splice: 4.0 * (q * m / 2.0).powf(1.0 / (q - 2.0)) }] {
                let nl = Nonlinearity::with_family(m, q, &p, fam).unwrap();
                let e = nl.eval(t);
                let f = nl.eval(-t);
                prop_assert!((e.g1 - e.g2 - e.g).abs() <= 1e-12 * (1.0 + e.g.abs()));
                prop_assert!((e.big_g1 - e.big_g2 - e.big_g).abs() <= 1e-12 * (1.0 + e.big_g.abs()));
                prop_assert_eq!(f.g, -e.g);
                prop_assert_eq!(f.big_g, e.big_g);
                prop_assert_eq!(f.g1, -e.g1);
                prop_assert_eq!(f.g2, -e.g2);
                if t >= 0.0 {
                    prop_assert!(e.g1 >= 0.0);
                    prop_assert!(e.g2 >= m * t.powf(1.0) * (1.0 - 1e-15));
                }
            }
        }

        #[test]
        fn primitives_match_quadrature(t in 0.01f64..6.0, p in 1.5f64..3.0) {
            let params = Params::validate(3, 0.5, p).unwrap();
            let q = 0.5 * (p + params.pstar);
            let nl = Nonlinearity::with_family(1.0, q, &params, Family::Spliced { splice: 2.0 * (q / p).powf(1.0 / (q - p)) }).unwrap();
            let e = nl.eval(t);
            prop_assert!((primitive_by_quadrature(&nl, t, |e| e.g1) - e.big_g1).abs() <= 1e-9 * (1.0 + e.big_g1));
            prop_assert!((primitive_by_quadrature(&nl, t, |e| e.g2) - e.big_g2).abs() <= 1e-9 * (1.0 + e.big_g2));
        }
    }
}
