//! Radial reduction of the double integral `∬ F(u(x), u(y)) k(x, y) dx dy`.
//!
//! A [`PairRule`] is a list of weighted point pairs `(r, ρ)` together with a
//! list of weighted single points for the part of the domain where `y` lies
//! outside the truncation ball. Cells are integrated three ways: the diagonal
//! cell by a Duffy map with Gauss-Jacobi weights that absorb the
//! `|r - ρ|^(p-1-sp)` singularity, the two neighbours of the diagonal by a
//! corner Duffy map, and all remaining cell pairs by tensor Gauss-Legendre.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::{sphere_area, Params};
use crate::profile::{RadialProfile, Stencil};
use crate::quadrature::{jacobi_left, legendre, Rule};

const MAGIC: &[u8; 8] = b"FRACPAK1";
const CHUNK: usize = 8192;

/// Quadrature orders of a pair rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOrders {
    pub diag: usize,
    pub near: usize,
    pub far: usize,
    /// Cell pairs with index gap up to this use `near` points per axis.
    pub band: usize,
    pub angular: usize,
}

impl Default for PairOrders {
    fn default() -> Self {
        PairOrders { diag: 10, near: 6, far: 3, band: 4, angular: 8 }
    }
}

impl PairOrders {
    /// Every order doubled.
    pub fn refined(&self) -> Self {
        PairOrders { diag: 2 * self.diag, near: 2 * self.near, far: 2 * self.far, band: self.band, angular: 2 * self.angular }
    }
}

/// Panels `[0, w], [w, 2w], [2w, 4w], ..., [.., π]` in the polar angle.
pub(crate) fn theta_panels(w: f64) -> Vec<(f64, f64)> {
    let pi = std::f64::consts::PI;
    if !(w > 0.0) || w >= pi {
        return vec![(0.0, pi)];
    }
    let w = w.max(1e-14);
    let mut out = vec![(0.0, w)];
    let mut t = w;
    while 2.0 * t < pi {
        out.push((t, 2.0 * t));
        t *= 2.0;
    }
    out.push((t, pi));
    out
}

/// `∫_{S^{N-1}} f(θ) dσ` for an integrand depending only on the polar angle,
/// with panels graded toward `θ = 0` at width `w`.
pub(crate) fn sphere_average(n: usize, rule: &Rule, w: f64, f: impl Fn(f64) -> f64) -> f64 {
    let pi = std::f64::consts::PI;
    if n == 1 {
        return f(0.0) + f(pi);
    }
    let mut acc = 0.0;
    for (lo, hi) in theta_panels(w) {
        acc += rule.integrate(lo, hi, |t| if n == 2 { f(t) } else { f(t) * t.sin().powi(n as i32 - 2) });
    }
    acc * sphere_area(n - 1)
}

/// `∫_{S^{N-1}} |r e_1 - ρ ω|^{-(N+sp)} dσ(ω)`.
pub fn angular_kernel(params: &Params, rule: &Rule, r: f64, rho: f64) -> f64 {
    let nu = 0.5 * params.kernel_exp();
    let d = r - rho;
    let rr = r * rho;
    let w = if rr > 0.0 { d.abs() / rr.sqrt() } else { f64::INFINITY };
    sphere_average(params.n, rule, w, |t| {
        let s = (0.5 * t).sin();
        (d * d + 4.0 * rr * s * s).powf(-nu)
    })
}

/// Distance from `r e_1` to the sphere of radius `big_r` along a ray at polar angle `t`.
pub(crate) fn ray_exit(r: f64, big_r: f64, t: f64) -> f64 {
    let st = t.sin();
    let c = t.cos();
    let root = (big_r * big_r - r * r * st * st).sqrt();
    if c > 0.0 {
        // avoid cancellation in root - r cos t
        (big_r * big_r - r * r) / (root + r * c)
    } else {
        root - r * c
    }
}

/// `∫_{|y| > R} |r e_1 - y|^{-(N+sp)} dy` for `r < R`.
pub fn exterior_kernel(params: &Params, rule: &Rule, r: f64, big_r: f64) -> f64 {
    let sp = params.sp();
    let w = if r > 0.0 { (big_r - r) / (r * big_r).sqrt() } else { f64::INFINITY };
    sphere_average(params.n, rule, w, |t| ray_exit(r, big_r, t).powf(-sp)) / sp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pair {
    pub i: u32,
    pub j: u32,
    pub w: f64,
}

/// Weighted pairs and exterior points over a fixed node set.
#[derive(Debug, Clone)]
pub struct PairRule {
    pub(crate) nodes: Vec<f64>,
    pub(crate) points: Vec<f64>,
    pub(crate) stencils: Vec<Stencil>,
    pub(crate) pairs: Vec<Pair>,
    /// The first `n_near` pairs belong to diagonal or adjacent cells.
    pub(crate) n_near: usize,
    pub(crate) ext: Vec<(u32, f64)>,
    pub(crate) orders: PairOrders,
}

struct Layout {
    points: Vec<f64>,
    /// (point, point, geometric factor)
    pairs: Vec<(u32, u32, f64)>,
    n_near: usize,
    ext: Vec<(u32, f64)>,
}

fn layout(nodes: &[f64], params: &Params, orders: &PairOrders) -> Layout {
    let n = params.n as i32;
    let alpha = params.p - 1.0 - params.sp();
    let m = nodes.len() - 1;
    let omega = sphere_area(params.n);
    let vol = |r: f64, rho: f64| omega * (r * rho).powi(n - 1);

    let gj1 = jacobi_left(orders.diag, alpha + 1.0);
    let gj0 = jacobi_left(orders.diag, alpha);
    let gl_diag = legendre(orders.diag);
    let near = legendre(orders.near);
    let far = legendre(orders.far);

    let mut points = Vec::new();
    let mut pairs = Vec::new();
    let push = |points: &mut Vec<f64>, r: f64| {
        points.push(r);
        (points.len() - 1) as u32
    };

    for c in 0..m {
        let (a, b) = (nodes[c], nodes[c + 1]);
        let h = b - a;
        for (xi, wx) in gj1.nodes.iter().zip(&gj1.weights) {
            let r = a + h * xi;
            let ir = push(&mut points, r);
            for (eta, we) in gj0.nodes.iter().zip(&gj0.weights) {
                let rho = a + h * xi * (1.0 - eta);
                let ip = push(&mut points, rho);
                let g = 2.0 * wx * we * h * h * xi.powf(-alpha) * eta.powf(-alpha) * vol(r, rho);
                pairs.push((ir, ip, g));
            }
        }
        if c + 1 < m {
            let (h1, h2) = (h, nodes[c + 2] - b);
            for (x, wx) in gj1.nodes.iter().zip(&gj1.weights) {
                for (e, we) in gj_pairs(&gl_diag) {
                    let base = 2.0 * wx * we * h1 * h2 * x.powf(-alpha);
                    for (uu, vv) in [(*x, x * e), (x * e, *x)] {
                        let r = b - h1 * uu;
                        let rho = b + h2 * vv;
                        let ir = push(&mut points, r);
                        let ip = push(&mut points, rho);
                        pairs.push((ir, ip, base * vol(r, rho)));
                    }
                }
            }
        }
    }
    let n_near = pairs.len();

    let near_pts: Vec<u32> = (0..m)
        .flat_map(|c| near.nodes.iter().map(move |x| (c, *x)))
        .map(|(c, x)| nodes[c] + (nodes[c + 1] - nodes[c]) * x)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|r| push(&mut points, r))
        .collect();
    let far_pts: Vec<u32> = (0..m)
        .flat_map(|c| far.nodes.iter().map(move |x| (c, *x)))
        .map(|(c, x)| nodes[c] + (nodes[c + 1] - nodes[c]) * x)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|r| push(&mut points, r))
        .collect();

    for c in 0..m {
        let h = nodes[c + 1] - nodes[c];
        for c2 in c + 2..m {
            let h2 = nodes[c2 + 1] - nodes[c2];
            let (rule, pts) = if c2 - c <= orders.band { (&near, &near_pts) } else { (&far, &far_pts) };
            let k = rule.len();
            for a in 0..k {
                for b in 0..k {
                    let i = pts[c * k + a];
                    let j = pts[c2 * k + b];
                    let g = 2.0 * rule.weights[a] * rule.weights[b] * h * h2 * vol(points[i as usize], points[j as usize]);
                    pairs.push((i, j, g));
                }
            }
        }
    }

    // exterior: 2 ω ∫_0^R |u|^p r^{N-1} T(r) dr
    let mut ext = Vec::new();
    for c in 0..m.saturating_sub(1) {
        let h = nodes[c + 1] - nodes[c];
        for a in 0..near.len() {
            let i = near_pts[c * near.len() + a];
            let r = points[i as usize];
            ext.push((i, 2.0 * omega * near.weights[a] * h * r.powi(n - 1)));
        }
    }
    let (a, b) = (nodes[m - 1], nodes[m]);
    let h = b - a;
    let mut cuts: Vec<f64> = (0..30).map(|k| b - h * 0.5f64.powi(k)).collect();
    cuts.push(b);
    for win in cuts.windows(2) {
        let seg = win[1] - win[0];
        for (x, w) in near.nodes.iter().zip(&near.weights) {
            let r = win[0] + seg * x;
            let i = push(&mut points, r);
            ext.push((i, 2.0 * omega * w * seg * r.powi(n - 1)));
        }
    }
    Layout { points, pairs, n_near, ext }
}

fn gj_pairs(rule: &Rule) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.nodes.iter().copied().zip(rule.weights.iter().copied())
}

impl PairRule {
    /// Build with pair kernel `kern(r, ρ)` and exterior kernel `ext(r)`.
    pub fn build<K, E>(nodes: &[f64], params: &Params, orders: PairOrders, kern: K, ext: E) -> Self
    where
        K: Fn(f64, f64) -> f64 + Sync,
        E: Fn(f64) -> f64 + Sync,
    {
        let lay = layout(nodes, params, &orders);
        let points = &lay.points;
        let pairs: Vec<Pair> = lay
            .pairs
            .par_iter()
            .with_min_len(1024)
            .map(|&(i, j, g)| Pair { i, j, w: g * kern(points[i as usize], points[j as usize]) })
            .collect();
        let ext_w: Vec<(u32, f64)> = lay.ext.par_iter().map(|&(i, g)| (i, g * ext(points[i as usize]))).collect();
        Self::finish(nodes, lay.points, pairs, lay.n_near, ext_w, orders)
    }

    fn finish(nodes: &[f64], points: Vec<f64>, pairs: Vec<Pair>, n_near: usize, ext: Vec<(u32, f64)>, orders: PairOrders) -> Self {
        let proto = RadialProfile::new(nodes.to_vec(), vec![0.0; nodes.len()]).expect("validated nodes");
        let stencils = points.iter().map(|&r| proto.stencil(r)).collect();
        PairRule { nodes: nodes.to_vec(), points, stencils, pairs, n_near, ext, orders }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    fn point_values(&self, values: &[f64]) -> Vec<f64> {
        self.stencils.iter().map(|s| s.apply(values)).collect()
    }

    /// `(Σ_pairs w |U_i - U_j|^p + Σ_ext w |U_k|^p, near-diagonal part)`.
    pub fn sum_p(&self, values: &[f64], p: f64) -> (f64, f64) {
        let u = self.point_values(values);
        let pw = |d: f64| if p == 2.0 { d * d } else { d.abs().powf(p) };
        let partial: Vec<f64> = self
            .pairs
            .par_chunks(CHUNK)
            .map(|ch| ch.iter().map(|q| q.w * pw(u[q.i as usize] - u[q.j as usize])).sum::<f64>())
            .collect();
        let near_chunks = self.n_near / CHUNK;
        let mut near: f64 = partial[..near_chunks].iter().sum();
        near += self.pairs[near_chunks * CHUNK..self.n_near]
            .iter()
            .map(|q| q.w * pw(u[q.i as usize] - u[q.j as usize]))
            .sum::<f64>();
        let total: f64 = partial.iter().sum::<f64>() + self.ext.iter().map(|&(k, w)| w * pw(u[k as usize])).sum::<f64>();
        (total, near)
    }

    /// Nodal gradient of `sum_p` divided by `p`, i.e. the coefficients of
    /// `Σ w φ(U_i - U_j)(V_i - V_j) + Σ w φ(U_k) V_k` with `φ(t) = |t|^{p-2} t`.
    pub fn pairing_coefficients(&self, values: &[f64], p: f64) -> Vec<f64> {
        let u = self.point_values(values);
        let phi = |d: f64| if p == 2.0 { d } else if d == 0.0 { 0.0 } else { d.abs().powf(p - 2.0) * d };
        let npts = self.points.len();
        let acc: Vec<Vec<f64>> = self
            .pairs
            .par_chunks(CHUNK * 8)
            .map(|ch| {
                let mut a = vec![0.0; npts];
                for q in ch {
                    let f = q.w * phi(u[q.i as usize] - u[q.j as usize]);
                    a[q.i as usize] += f;
                    a[q.j as usize] -= f;
                }
                a
            })
            .collect();
        let mut pt = vec![0.0; npts];
        for a in &acc {
            for (x, y) in pt.iter_mut().zip(a) {
                *x += y;
            }
        }
        for &(k, w) in &self.ext {
            pt[k as usize] += w * phi(u[k as usize]);
        }
        let mut grad = vec![0.0; self.nodes.len()];
        for (s, f) in self.stencils.iter().zip(&pt) {
            for k in 0..s.len {
                grad[s.start + k] += s.coef[k] * f;
            }
        }
        grad
    }

    fn content_hash(&self, params: &Params, tag: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(tag.as_bytes());
        h.update((params.n as u64).to_le_bytes());
        h.update(params.s.to_le_bytes());
        h.update(params.p.to_le_bytes());
        for o in [self.orders.diag, self.orders.near, self.orders.far, self.orders.band, self.orders.angular] {
            h.update((o as u64).to_le_bytes());
        }
        for x in &self.nodes {
            h.update(x.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// The energy kernel `|x - y|^{-(N+sp)}` reduced to radial pairs.
///
/// Built once per `(params, node set)`; because the kernel is homogeneous it
/// also serves every uniformly dilated copy of the node set.
#[derive(Debug, Clone)]
pub struct AngularKernel {
    pub params: Params,
    pub rule: PairRule,
    hash: [u8; 32],
}

impl AngularKernel {
    pub fn build(params: &Params, nodes: &[f64]) -> Self {
        Self::build_with(params, nodes, PairOrders::default())
    }

    pub fn build_with(params: &Params, nodes: &[f64], orders: PairOrders) -> Self {
        let ang = legendre(orders.angular);
        let big_r = *nodes.last().unwrap();
        let rule = PairRule::build(
            nodes,
            params,
            orders,
            |r, rho| angular_kernel(params, &ang, r, rho),
            |r| exterior_kernel(params, &ang, r, big_r),
        );
        let hash = rule.content_hash(params, "energy");
        AngularKernel { params: *params, rule, hash }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash)
    }

    /// Dilation factor `σ` with `u.nodes = σ · kernel.nodes`, if any.
    pub fn scale_of(&self, u: &RadialProfile) -> Result<f64> {
        let base = self.nodes();
        let un = u.nodes();
        if un.len() != base.len() {
            return Err(Error::KernelMismatch(format!("profile has {} nodes, kernel {}", un.len(), base.len())));
        }
        let sigma = un[un.len() - 1] / base[base.len() - 1];
        for (k, (a, b)) in un.iter().zip(base).enumerate() {
            if (a - sigma * b).abs() > 1e-12 * a.abs().max(sigma * b.abs()) {
                return Err(Error::KernelMismatch(format!("node {k}: {a} is not {sigma} x {b}")));
            }
        }
        Ok(sigma)
    }

    /// Build, or load from `dir` when a sidecar with the same content hash exists.
    pub fn build_cached(params: &Params, nodes: &[f64], dir: &Path) -> Result<Self> {
        let orders = PairOrders::default();
        let lay = layout(nodes, params, &orders);
        let probe = PairRule::finish(nodes, lay.points, Vec::new(), lay.n_near, Vec::new(), orders);
        let hash = probe.content_hash(params, "energy");
        let path = dir.join(format!("kernel-{}.bin", &hex::encode(hash)[..16]));
        if let Ok(mut f) = std::fs::File::open(&path) {
            let mut buf = Vec::new();
            f.read_to_end(&mut buf).map_err(|e| Error::io(&path, e))?;
            if let Some(k) = Self::decode(params, nodes, orders, hash, &buf) {
                log::debug!("kernel cache hit {}", path.display());
                return Ok(k);
            }
            log::warn!("ignoring stale kernel cache {}", path.display());
        }
        let k = Self::build_with(params, nodes, orders);
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(&k.encode()).map_err(|e| Error::io(&path, e))?;
        Ok(k)
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(56 + 8 * (self.rule.pairs.len() + self.rule.ext.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.hash);
        out.extend_from_slice(&(self.rule.pairs.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.rule.ext.len() as u64).to_le_bytes());
        for q in &self.rule.pairs {
            out.extend_from_slice(&q.w.to_le_bytes());
        }
        for (_, w) in &self.rule.ext {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    fn decode(params: &Params, nodes: &[f64], orders: PairOrders, hash: [u8; 32], buf: &[u8]) -> Option<Self> {
        if buf.len() < 56 || &buf[..8] != MAGIC || buf[8..40] != hash {
            return None;
        }
        let np = u64::from_le_bytes(buf[40..48].try_into().ok()?) as usize;
        let ne = u64::from_le_bytes(buf[48..56].try_into().ok()?) as usize;
        let lay = layout(nodes, params, &orders);
        if np != lay.pairs.len() || ne != lay.ext.len() || buf.len() != 56 + 8 * (np + ne) {
            return None;
        }
        let mut ws = buf[56..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let pairs = lay.pairs.iter().map(|&(i, j, _)| Pair { i, j, w: ws.next().unwrap() }).collect();
        let ext = lay.ext.iter().map(|&(i, _)| (i, ws.next().unwrap())).collect();
        let rule = PairRule::finish(nodes, lay.points, pairs, lay.n_near, ext, orders);
        Some(AngularKernel { params: *params, rule, hash })
    }
}
