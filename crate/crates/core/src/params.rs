//! The exponent triple `(N, s, p)` and quantities derived from it.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    /// Critical exponent `Np/(N - sp)`.
    pub pstar: f64,
    /// Whether the symmetrized pointwise representation applies.
    pub pointwise_ok: bool,
}

impl Params {
    pub fn validate(n: usize, s: f64, p: f64) -> Result<Params> {
        if n < 1 {
            return Err(Error::domain(format!("dimension N = {n} must be at least 1")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("s = {s} must lie in (0, 1)")));
        }
        let nf = n as f64;
        if !(p > 1.0) {
            return Err(Error::domain(format!("p = {p} must exceed 1")));
        }
        if !(p < nf / s) {
            return Err(Error::domain(format!("p = {p} must be below N/s = {}", nf / s)));
        }
        Ok(Params {
            n,
            s,
            p,
            pstar: nf * p / (nf - s * p),
            pointwise_ok: p >= 2.0 || s < 2.0 * (p - 1.0) / p,
        })
    }

    /// Reject dimensions the solver does not handle.
    pub fn require_solver_dim(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("solver requires N >= 2, got N = {}", self.n)));
        }
        Ok(())
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// `N - sp`, the dilation exponent of the Gagliardo energy.
    pub fn q1(&self) -> f64 {
        self.nf() - self.sp()
    }

    /// Kernel exponent `N + sp`.
    pub fn kernel_exp(&self) -> f64 {
        self.nf() + self.sp()
    }

    pub fn constant(&self) -> f64 {
        normalization_constant(self)
    }

    /// Area of the unit sphere in `R^N`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }

    /// Volume of the unit ball in `R^N`.
    pub fn ball_volume(&self) -> f64 {
        sphere_area(self.n) / self.nf()
    }
}

/// `(sp/2)(1-s) 2^(2s-1) pi^(-(N-1)/2) Gamma((N+sp)/2) / Gamma((p+1)/2) * Gamma(2-s)`.
pub fn normalization_constant(params: &Params) -> f64 {
    let (n, s, p) = (params.nf(), params.s, params.p);
    let sp = s * p;
    let lg = ln_gamma((n + sp) / 2.0) - ln_gamma((p + 1.0) / 2.0) + ln_gamma(2.0 - s);
    0.5 * sp * (1.0 - s) * 2f64.powf(2.0 * s - 1.0) * PI.powf(-(n - 1.0) / 2.0) * lg.exp()
}

/// Area of the unit sphere `S^(d-1)` in `R^d`; `sphere_area(1) = 2`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let h = d as f64 / 2.0;
            2.0 * PI.powf(h) / gamma(h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triple() {
        let p = Params::validate(2, 0.5, 2.0).unwrap();
        assert_eq!(p.pstar, 4.0);
        assert!(p.pointwise_ok);
        assert!((p.constant() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn pointwise_screen() {
        let p = Params::validate(2, 0.9, 1.5).unwrap();
        assert!(!p.pointwise_ok);
    }

    #[test]
    fn rejects_bounds() {
        for (n, s, p) in [(2, 0.5, 5.0), (2, 0.5, 4.0), (2, 0.0, 2.0), (2, 1.0, 2.0), (0, 0.5, 2.0), (2, 0.5, 1.0), (2, f64::NAN, 2.0)] {
            assert!(matches!(Params::validate(n, s, p), Err(Error::Domain(_))), "{n} {s} {p}");
        }
    }

    #[test]
    fn constant_vanishes_as_s_to_one() {
        let p = Params::validate(2, 1.0 - 1e-9, 1.5).unwrap();
        assert!(p.constant() < 1e-8);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-15);
    }
}
