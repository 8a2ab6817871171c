//! Radial grids and radial profiles.
//!
//! A profile stores nodal values on `0 = r_0 < ... < r_M = Rmax` and is zero
//! beyond `Rmax`. Pointwise evaluation uses a cubic Hermite interpolant whose
//! slopes are finite differences of the nodal values, so every evaluation is a
//! fixed linear combination of at most four neighbouring values. Volume
//! integrals (potential energy, masses) instead treat the profile as piecewise
//! linear in the volume coordinate `V = |B_1| r^N`; that representation is
//! exactly covariant under dilation and is the one the rearrangement preserves.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{legendre, Rule};

/// Graded radial node set: geometric toward the origin below 1, uniform above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    /// Number of intervals.
    pub m: usize,
    pub rmax: f64,
    /// Geometric grading ratio below r = 1.
    pub ratio: f64,
    /// Smallest positive node is at most this.
    pub r_inner_min: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { m: 256, rmax: 40.0, ratio: 1.15, r_inner_min: 0.05 }
    }
}

impl RadialGrid {
    pub fn with_size(m: usize, rmax: f64) -> Self {
        RadialGrid { m, rmax, ..Default::default() }
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.rmax > 1.0) || !self.rmax.is_finite() {
            return Err(Error::domain(format!("grid Rmax = {} must exceed 1", self.rmax)));
        }
        if !(self.ratio > 1.0) || !(self.r_inner_min > 0.0 && self.r_inner_min < 1.0) {
            return Err(Error::domain("grid grading ratio must exceed 1 and r_inner_min lie in (0, 1)"));
        }
        let k = ((1.0 / self.r_inner_min).ln() / self.ratio.ln()).ceil() as usize;
        if self.m < k + 2 {
            return Err(Error::domain(format!("grid needs at least {} intervals, got M = {}", k + 2, self.m)));
        }
        let mut nodes = Vec::with_capacity(self.m + 1);
        nodes.push(0.0);
        for j in (1..=k).rev() {
            nodes.push(self.ratio.powi(-(j as i32)));
        }
        let nu = self.m - k - 1;
        let h = (self.rmax - 1.0) / nu as f64;
        for i in 0..=nu {
            nodes.push(if i == nu { self.rmax } else { 1.0 + h * i as f64 });
        }
        Ok(nodes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

/// Linear weights of an interpolated value over consecutive nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub len: usize,
    pub coef: [f64; 4],
}

impl Stencil {
    pub const ZERO: Stencil = Stencil { start: 0, len: 0, coef: [0.0; 4] };

    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.coef[k] * values[self.start + k];
        }
        acc
    }
}

impl RadialProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes.len() != values.len() {
            return Err(Error::domain("profile needs at least 3 nodes and one value per node"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::domain("first node must be r = 0"));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!("nodes not strictly increasing at index {}", i + 1)));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::domain("profile contains non-finite entries"));
        }
        Ok(RadialProfile { nodes, values })
    }

    /// Sample `f` at the nodes.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rmax(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of intervals.
    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nodes.clone(), values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialProfile { nodes: self.nodes.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `r -> u(r / sigma)`: nodes scaled, values untouched.
    pub fn dilate(&self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!("dilation factor {sigma} must be positive")));
        }
        if sigma == 1.0 {
            return Ok(self.clone());
        }
        let nodes = self.nodes.iter().map(|r| r * sigma).collect();
        Self::new(nodes, self.values.clone())
    }

    fn interval(&self, r: f64) -> Option<usize> {
        if !(r >= 0.0) || r > self.rmax() {
            return None;
        }
        let i = self.nodes.partition_point(|&x| x <= r);
        Some(i.saturating_sub(1).min(self.m() - 1))
    }

    /// Slope coefficients at node `i` as (first node, weights over three nodes).
    fn slope(&self, i: usize) -> (usize, [f64; 3]) {
        let x = &self.nodes;
        let m = self.m();
        if i == 0 {
            (0, [0.0; 3])
        } else if i == m {
            let h1 = x[m] - x[m - 1];
            let h0 = x[m - 1] - x[m - 2];
            let k = h1 / (h1 + h0);
            // (1+k) d_{M-1} - k d_{M-2}
            let a = (1.0 + k) / h1;
            let b = k / h0;
            (m - 2, [b, -a - b, a])
        } else {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let s = h0 + h1;
            (i - 1, [-h1 / (h0 * s), (h1 / h0 - h0 / h1) / s, h0 / (h1 * s)])
        }
    }

    fn hermite_stencil(&self, c: usize, basis: [f64; 4]) -> Stencil {
        // basis = [value_c, value_{c+1}, slope_c, slope_{c+1}] multipliers
        let start = c.saturating_sub(1);
        let end = (c + 2).min(self.m());
        let mut coef = [0.0; 4];
        coef[c - start] += basis[0];
        coef[c + 1 - start] += basis[1];
        for (node, w) in [(c, basis[2]), (c + 1, basis[3])] {
            let (s0, sc) = self.slope(node);
            for (k, v) in sc.iter().enumerate() {
                if *v != 0.0 {
                    coef[s0 + k - start] += w * v;
                }
            }
        }
        Stencil { start, len: end - start + 1, coef }
    }

    /// Interpolation weights for `u(r)`.
    pub fn stencil(&self, r: f64) -> Stencil {
        let Some(c) = self.interval(r) else { return Stencil::ZERO };
        let h = self.nodes[c + 1] - self.nodes[c];
        let t = (r - self.nodes[c]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let basis = [2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2, h * (t3 - 2.0 * t2 + t), h * (t3 - t2)];
        self.hermite_stencil(c, basis)
    }

    /// Interpolation weights for `u'(r)`; zero at the origin.
    pub fn deriv_stencil(&self, r: f64) -> Stencil {
        let Some(c) = self.interval(r) else { return Stencil::ZERO };
        if r == 0.0 {
            return Stencil::ZERO;
        }
        let h = self.nodes[c + 1] - self.nodes[c];
        let t = (r - self.nodes[c]) / h;
        let t2 = t * t;
        let basis = [(6.0 * t2 - 6.0 * t) / h, (6.0 * t - 6.0 * t2) / h, 3.0 * t2 - 4.0 * t + 1.0, 3.0 * t2 - 2.0 * t];
        self.hermite_stencil(c, basis)
    }

    /// Nodal slope from divided differences (exactly zero on constant data).
    fn slope_value(&self, i: usize) -> f64 {
        let (x, u) = (&self.nodes, &self.values);
        let m = self.m();
        if i == 0 {
            return 0.0;
        }
        let d = |k: usize| (u[k + 1] - u[k]) / (x[k + 1] - x[k]);
        if i == m {
            let h1 = x[m] - x[m - 1];
            let h0 = x[m - 1] - x[m - 2];
            let k = h1 / (h1 + h0);
            return d(m - 1) + k * (d(m - 1) - d(m - 2));
        }
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        (h0 * d(i) + h1 * d(i - 1)) / (h0 + h1)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let Some(c) = self.interval(r) else { return 0.0 };
        let h = self.nodes[c + 1] - self.nodes[c];
        let t = (r - self.nodes[c]) / h;
        let t2 = t * t;
        let u0 = self.values[c];
        u0 + (3.0 - 2.0 * t) * t2 * (self.values[c + 1] - u0)
            + h * t * (1.0 - t) * ((1.0 - t) * self.slope_value(c) - t * self.slope_value(c + 1))
    }

    /// `U(r0 + dr) - U(r0)`, free of cancellation when both radii share a cell.
    pub fn increment(&self, r0: f64, dr: f64) -> f64 {
        let r1 = r0 + dr;
        match (self.interval(r0), self.interval(r1)) {
            (Some(c), Some(c1)) if c == c1 => {
                let h = self.nodes[c + 1] - self.nodes[c];
                let a = (r0 - self.nodes[c]) / h;
                let b = (r1 - self.nodes[c]) / h;
                let d = dr / h;
                let (s1, s2) = (a + b, a * a + a * b + b * b);
                let dy = self.values[c + 1] - self.values[c];
                d * (dy * (3.0 * s1 - 2.0 * s2)
                    + h * self.slope_value(c) * (1.0 - 2.0 * s1 + s2)
                    + h * self.slope_value(c + 1) * (s2 - s1))
            }
            _ => self.eval(r1) - self.eval(r0),
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        self.deriv_stencil(r).apply(&self.values)
    }

    /// Nodal slopes of the interpolant.
    pub fn slopes(&self) -> Vec<f64> {
        (0..=self.m())
            .map(|i| {
                let (s0, c) = self.slope(i);
                c.iter().enumerate().map(|(k, w)| w * self.values[s0 + k]).sum()
            })
            .collect()
    }

    /// Largest discrete second difference of the nodal values.
    pub fn second_difference_seminorm(&self) -> f64 {
        let d = self.slopes();
        let mut worst = 0.0f64;
        for i in 0..self.m() {
            let h = self.nodes[i + 1] - self.nodes[i];
            worst = worst.max(((d[i + 1] - d[i]) / h).abs());
        }
        worst
    }

    /// Volume coordinates `|B_1| r_i^N`.
    pub fn volumes(&self, n: usize) -> Vec<f64> {
        let vb = crate::params::sphere_area(n) / n as f64;
        self.nodes.iter().map(|r| vb * r.powi(n as i32)).collect()
    }

    /// Value of the piecewise-linear-in-volume representation at `r`; bounded by
    /// neighbouring nodal values, so suited to step-like profiles.
    pub fn eval_linear_in_volume(&self, n: usize, r: f64) -> f64 {
        let Some(c) = self.interval(r) else { return 0.0 };
        let (a, b) = (self.nodes[c].powi(n as i32), self.nodes[c + 1].powi(n as i32));
        let t = (r.powi(n as i32) - a) / (b - a);
        self.values[c] + t * (self.values[c + 1] - self.values[c])
    }

    /// `∫ F(u) dx` with `u` piecewise linear in volume.
    pub fn volume_integral(&self, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let rule = legendre(8);
        let v = self.volumes(n);
        let mut acc = 0.0;
        for i in 0..self.m() {
            acc += pl_interval(&rule, v[i], v[i + 1], self.values[i], self.values[i + 1], &f);
        }
        acc
    }

    /// `∫ w(|x|) f(u) dx` in the same representation; `w ≡ 1` gives [`Self::volume_integral`].
    pub fn volume_integral_weighted(&self, n: usize, f: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64) -> f64 {
        let rule = legendre(8);
        let v = self.volumes(n);
        let vb = crate::params::sphere_area(n) / n as f64;
        let mut acc = 0.0;
        for i in 0..self.m() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            let (v0, v1) = (v[i], v[i + 1]);
            let g = |t: f64| {
                let r = ((v0 + (v1 - v0) * t) / vb).powf(1.0 / n as f64);
                f(a + (b - a) * t) * w(r)
            };
            acc += split_at_zero(&rule, a, b, &g) * (v1 - v0);
        }
        acc
    }

    /// Discrete `∫ |u|^q dx`.
    pub fn lq_mass(&self, n: usize, q: f64) -> f64 {
        self.volume_integral(n, |t| t.abs().powf(q))
    }

    /// `∫ f(u) v dx` with both `u` and `v` piecewise linear in volume.
    pub fn volume_pairing(&self, v: &RadialProfile, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let rule = legendre(8);
        let vol = self.volumes(n);
        let mut acc = 0.0;
        for i in 0..self.m() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            let (c, d) = (v.values[i], v.values[i + 1]);
            let g = |t: f64| f(a + (b - a) * t) * (c + (d - c) * t);
            acc += split_at_zero(&rule, a, b, &g) * (vol[i + 1] - vol[i]);
        }
        acc
    }

    /// Gradient of `∫ F(u) dx` with respect to the nodal values, `f = F'`.
    pub fn volume_gradient(&self, n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let rule = legendre(8);
        let vol = self.volumes(n);
        let mut grad = vec![0.0; self.nodes.len()];
        for i in 0..self.m() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            let dv = vol[i + 1] - vol[i];
            grad[i] += split_at_zero(&rule, a, b, &|t| f(a + (b - a) * t) * (1.0 - t)) * dv;
            grad[i + 1] += split_at_zero(&rule, a, b, &|t| f(a + (b - a) * t) * t) * dv;
        }
        grad
    }

    /// Dual volumes `(V_{i+1} - V_{i-1}) / 2` used as the descent metric.
    pub fn dual_volumes(&self, n: usize) -> Vec<f64> {
        let v = self.volumes(n);
        let m = self.m();
        (0..=m)
            .map(|i| {
                let lo = if i == 0 { v[0] } else { v[i - 1] };
                let hi = if i == m { v[m] } else { v[i + 1] };
                0.5 * (hi - lo)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u\n");
        for (r, u) in self.nodes.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt_f64(*r), fmt_f64(*u));
        }
        out
    }

    pub fn from_csv(text: &str, file: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "r,u" => {}
            Some((_, h)) => {
                return Err(Error::Schema { file: file.into(), message: format!("expected header `r,u`, found `{}`", h.trim()) })
            }
            None => return Err(Error::Schema { file: file.into(), message: "missing header `r,u`".into() }),
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let perr = |message: String| Error::Parse { file: file.into(), line: lineno, message };
            let mut cols = line.split(',');
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(perr(format!("expected two columns, found `{line}`")));
            };
            let r: f64 = a.trim().parse().map_err(|e| perr(format!("bad r `{}`: {e}", a.trim())))?;
            let u: f64 = b.trim().parse().map_err(|e| perr(format!("bad u `{}`: {e}", b.trim())))?;
            if !r.is_finite() || !u.is_finite() {
                return Err(perr("non-finite entry".into()));
            }
            if nodes.is_empty() && r != 0.0 {
                return Err(perr(format!("first node must be r = 0, found {r}")));
            }
            if let Some(&last) = nodes.last() {
                if !(r > last) {
                    return Err(perr(format!("r column not strictly increasing: {r} after {last}")));
                }
            }
            nodes.push(r);
            values.push(u);
        }
        Self::new(nodes, values).map_err(|e| Error::Schema { file: file.into(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Lossless decimal form of a double.
pub(crate) fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `∫_{v0}^{v1} F(u) dV` for `u` linear from `a` to `b`.
pub(crate) fn pl_interval(rule: &Rule, v0: f64, v1: f64, a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    split_at_zero(rule, a, b, &|t| f(a + (b - a) * t)) * (v1 - v0)
}

/// `∫_0^1 g(t) dt`, splitting where the segment `a -> b` crosses zero.
fn split_at_zero(rule: &Rule, a: f64, b: f64, g: &impl Fn(f64) -> f64) -> f64 {
    if a * b < 0.0 {
        let t0 = a / (a - b);
        rule.integrate(0.0, t0, g) + rule.integrate(t0, 1.0, g)
    } else {
        rule.integrate(0.0, 1.0, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> RadialProfile {
        let nodes = RadialGrid::with_size(96, 8.0).nodes().unwrap();
        RadialProfile::from_fn(nodes, |r| (-r * r).exp()).unwrap()
    }

    #[test]
    fn linear_in_volume_evaluation() {
        let u = bump();
        for (i, r) in u.nodes().iter().enumerate() {
            assert_eq!(u.eval_linear_in_volume(2, *r), u.values()[i]);
        }
        let (r0, r1) = (u.nodes()[40], u.nodes()[41]);
        let mid = ((r0 * r0 + r1 * r1) / 2.0).sqrt();
        let want = 0.5 * (u.values()[40] + u.values()[41]);
        assert!((u.eval_linear_in_volume(2, mid) - want).abs() < 1e-14);
        assert_eq!(u.eval_linear_in_volume(2, 9.0), 0.0);
    }

    #[test]
    fn weighted_volume_integral_reduces_to_plain() {
        let u = bump();
        for n in [1, 2, 3] {
            let a = u.volume_integral(n, |t| t * t);
            let b = u.volume_integral_weighted(n, |t| t * t, |_| 1.0);
            assert!((a - b).abs() < 1e-13 * a);
        }
        // weight cutting at r = 1: compare against a fine direct quadrature
        let w = u.volume_integral_weighted(2, |t| t, |r| if r < 1.0 { 1.0 } else { 0.0 });
        let exact = std::f64::consts::PI * (1.0 - (-1.0f64).exp());
        assert!((w - exact).abs() < 2e-3 * exact, "{w} {exact}");
    }

    #[test]
    fn increment_is_accurate_near_the_origin() {
        let u = bump();
        for r in [0.0, 0.3, 2.2, 7.9] {
            for dr in [0.01, -0.02, 0.3, 1.0] {
                if r + dr < 0.0 || r + dr > 8.0 {
                    continue;
                }
                let d = u.increment(r, dr);
                assert!((d - (u.eval(r + dr) - u.eval(r))).abs() < 1e-14, "{r} {dr}");
            }
        }
        // quadratic at the origin: the ratio must settle to the second coefficient
        let (a, b) = (u.increment(0.0, 1e-9) / 1e-18, u.increment(0.0, 1e-10) / 1e-20);
        assert!((a / b - 1.0).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn grid_shape() {
        let g = RadialGrid::default();
        let x = g.nodes().unwrap();
        assert_eq!(x.len(), 257);
        assert_eq!(x[0], 0.0);
        assert_eq!(*x.last().unwrap(), 40.0);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        assert!(x[1] <= 0.05);
        assert!(RadialGrid::with_size(256, 1.0).nodes().is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_and_quadratics() {
        let u = bump();
        for (r, v) in u.nodes().iter().zip(u.values()) {
            assert!((u.eval(*r) - v).abs() < 1e-15);
        }
        assert_eq!(u.eval(8.5), 0.0);
        let q = RadialProfile::from_fn(u.nodes().to_vec(), |r| 3.0 - r * r).unwrap();
        for &r in &[0.0, 0.013, 0.4, 1.7, 5.55] {
            assert!((q.eval(r) - (3.0 - r * r)).abs() < 1e-12);
            assert!((q.deriv(r) + 2.0 * r).abs() < 1e-11, "{r}");
        }
    }

    #[test]
    fn stencil_is_linear() {
        let u = bump();
        let s = u.stencil(2.345);
        assert!(s.len <= 4);
        assert!((s.apply(u.values()) - u.eval(2.345)).abs() < 1e-16);
        assert!((s.coef[..s.len].iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dilation_composes() {
        let u = bump();
        let a = u.dilate(2.0).unwrap().dilate(0.25).unwrap();
        let b = u.dilate(0.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(u.dilate(1.0).unwrap(), u);
        assert!(u.dilate(0.0).is_err());
    }

    #[test]
    fn volume_integral_is_dilation_covariant() {
        let u = bump();
        let f = |t: f64| t * t * (1.0 - t);
        let b1 = u.volume_integral(2, f);
        let b2 = u.dilate(2.0).unwrap().volume_integral(2, f);
        assert!((b2 / b1 - 4.0).abs() < 1e-13);
        let fine = RadialProfile::from_fn(RadialGrid { m: 600, rmax: 8.0, ratio: 1.03, r_inner_min: 0.01 }.nodes().unwrap(), |r| (-r * r).exp()).unwrap();
        let mass = fine.lq_mass(2, 2.0);
        assert!((mass - std::f64::consts::PI / 2.0).abs() < 5e-4, "{mass}");
    }

    #[test]
    fn csv_round_trip() {
        let u = bump().scaled(1.0 / 3.0);
        let v = RadialProfile::from_csv(&u.to_csv(), "mem").unwrap();
        assert_eq!(u, v);
        assert!(matches!(RadialProfile::from_csv("x,y\n0,1\n", "f"), Err(Error::Schema { .. })));
        let bad = "r,u\n0,1\n0.5,1\n0.4,1\n1,0\n";
        match RadialProfile::from_csv(bad, "f") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
