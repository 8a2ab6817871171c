#![allow(dead_code)]

use std::f64::consts::PI;

use fracp::quadrature::legendre;
use fracp::{Params, RadialProfile};

/// Lanczos log-gamma (g = 7, n = 9), independent of the library's Γ.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// The normalization constant accumulated in log space.
pub fn constant_by_log_gamma(n: usize, s: f64, p: f64) -> f64 {
    let nf = n as f64;
    let sp = s * p;
    let log = (0.5 * sp).ln() + (1.0 - s).ln() + (2.0 * s - 1.0) * 2f64.ln() - 0.5 * (nf - 1.0) * PI.ln()
        + ln_gamma(0.5 * (nf + sp))
        - ln_gamma(0.5 * (p + 1.0))
        + ln_gamma(2.0 - s);
    log.exp()
}

fn phi(a: f64, p: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.abs().powf(p - 2.0) * a
    }
}

/// `∫_a^b f` with nodes clustered cubically toward both ends.
fn graded(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = legendre(24);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        // τ in [0,1] → s = τ^3 distance from an endpoint
        let s = x * x * x;
        let ds = 3.0 * x * x;
        acc += w * ds * half * (f(a + half * s) + f(b - half * s));
    }
    acc
}

/// Operator value for `N = 2` by a second, independently laid out quadrature:
/// logarithmic radial panels, the bracket over the full half circle, and
/// angular pieces split and graded at both level-crossing cusps.
pub fn operator_oracle(u: &RadialProfile, r: f64, params: &Params) -> f64 {
    assert_eq!(params.n, 2);
    let p = params.p;
    let sp = params.sp();
    let u0 = u.eval(r);
    let shell = |t: f64| -> f64 {
        let f = |th: f64| {
            let c = th.cos();
            let plus = (r * r + t * t + 2.0 * r * t * c).max(0.0).sqrt();
            let minus = (r * r + t * t - 2.0 * r * t * c).max(0.0).sqrt();
            phi(u0 - u.eval(plus), p) + phi(u0 - u.eval(minus), p)
        };
        let mut cuts = vec![0.0, PI];
        if r > 0.0 && t < 2.0 * r {
            let c = (t / (2.0 * r)).acos();
            cuts = vec![0.0, c, PI - c, PI];
        }
        2.0 * cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| graded(w[0], w[1], &f)).sum::<f64>()
    };
    let big_t = r + u.rmax();
    let gl = legendre(16);
    // below t0 the shell is taken as a pure power of t; the O(t0) error of
    // that model is removed by extrapolating two starting radii to zero
    let from = |t0: f64| -> f64 {
        let (s0, s1) = (shell(t0), shell(0.5 * t0));
        let alpha = (s0 / s1).log2();
        let inner = if s0 == 0.0 { 0.0 } else { s0 * t0.powf(-sp) / (alpha - sp) };
        let (y0, y1) = (t0.ln(), big_t.ln());
        let panels = ((y1 - y0) / 0.2).ceil() as usize;
        let dy = (y1 - y0) / panels as f64;
        let mut acc = inner;
        for k in 0..panels {
            let a = y0 + dy * k as f64;
            acc += gl.integrate(a, a + dy, |y| {
                let t = y.exp();
                shell(t) * t.powf(-sp)
            });
        }
        acc
    };
    let acc = 2.0 * from(1e-4) - from(2e-4);
    let tail = 2.0 * phi(u0, p) * 2.0 * PI * big_t.powf(-sp) / sp;
    0.5 * params.constant() * (acc + tail)
}

/// Exact operator value at the origin for `p = 2`, any `N`: on each cell the
/// bracket is the interpolating cubic, integrated in closed form on the
/// first cell and by 20-point Gauss on the others.
pub fn origin_value_p2(u: &RadialProfile, params: &Params) -> f64 {
    assert_eq!(params.p, 2.0);
    let sp = params.sp();
    let (x, y, m) = (u.nodes(), u.values(), u.slopes());
    let u0 = y[0];
    let cubic = |i: usize| {
        let h = x[i + 1] - x[i];
        let c2 = 3.0 * (y[i + 1] - y[i]) - h * (2.0 * m[i] + m[i + 1]);
        let c3 = 2.0 * (y[i] - y[i + 1]) + h * (m[i] + m[i + 1]);
        (h, h * m[i], c2, c3)
    };
    let (h, c1, c2, c3) = cubic(0);
    assert_eq!(c1, 0.0);
    let mut acc = -(c2 / (2.0 - sp) + c3 / (3.0 - sp)) * h.powf(-sp);
    let gl = legendre(20);
    for i in 1..u.m() {
        let (h, c1, c2, c3) = cubic(i);
        let a = x[i];
        let d0 = u0 - y[i];
        acc += gl.integrate(a, a + h, |t| {
            let tau = (t - a) / h;
            (d0 - tau * (c1 + tau * (c2 + tau * c3))) * t.powf(-1.0 - sp)
        });
    }
    acc += u0 * u.rmax().powf(-sp) / sp;
    let omega = match params.n {
        1 => 2.0,
        n => 2.0 * PI.powf(0.5 * n as f64) / ln_gamma(0.5 * n as f64).exp(),
    };
    0.5 * params.constant() * 2.0 * omega * acc
}

/// `lim_R (∫_{|z|_∞ < R + 1/2} z_1^2 |z|^{-3} dz - Σ_{0 < |k|_∞ ≤ R} k_1^2 |k|^{-3})`: the integral runs over
/// the union of the cells owned by the summed lattice points. Richardson-extrapolated in `1/R`.
fn lattice_defect() -> f64 {
    let square = 4.0 * (1.0 + 2f64.sqrt()).ln();
    let at = |r: i64| {
        let mut sum = 0.0;
        for i in -r..=r {
            for j in -r..=r {
                if i != 0 || j != 0 {
                    let (x, y) = (i as f64, j as f64);
                    sum += x * x / (x * x + y * y).powf(1.5);
                }
            }
        }
        (r as f64 + 0.5) * square - sum
    };
    2.0 * at(800) - at(400)
}

/// `∫_{|y - x|_∞ > L} |x - y|^{-(2+sp)} dy` for the square `[-L, L]^2`.
fn square_exterior(x: f64, y: f64, l: f64, sp: f64) -> f64 {
    let n = 4096;
    let mut acc = 0.0;
    for k in 0..n {
        let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let (c, s) = (t.cos(), t.sin());
        let ex = if c > 0.0 { (l - x) / c } else if c < 0.0 { (-l - x) / c } else { f64::INFINITY };
        let ey = if s > 0.0 { (l - y) / s } else if s < 0.0 { (-l - y) / s } else { f64::INFINITY };
        acc += ex.min(ey).powf(-sp);
    }
    acc * 2.0 * PI / n as f64 / sp
}

/// Brute-force `a(u)` for `N = 2, s = 1/2, p = 2` from grid samples: a Riemann double
/// sum off the diagonal, a lattice-defect correction for the missing near-diagonal
/// part, and the exterior of the square. `grad_sq` is `|∇u|^2`; `u` must vanish near
/// the square's edge.
pub fn planar_energy(grid: &fracp::PlanarGrid, grad_sq: impl Fn(f64, f64) -> f64, params: &Params) -> f64 {
    assert!(params.n == 2 && params.p == 2.0 && params.s == 0.5);
    let n = grid.n();
    let h = grid.spacing();
    let pts: Vec<(f64, f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (x, y) = grid.point(i, j);
            (x, y, grid.value(i, j))
        })
        .collect();
    let mut pair = 0.0;
    for (a, &(x1, y1, u1)) in pts.iter().enumerate() {
        for &(x2, y2, u2) in &pts[a + 1..] {
            let d2 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
            pair += (u1 - u2).powi(2) / (d2 * d2.sqrt());
        }
    }
    pair *= 2.0 * h.powi(4);
    let defect = lattice_defect();
    let l = grid.half_width() + 0.5 * h;
    let mut near = 0.0;
    let mut ext = 0.0;
    for &(x, y, u) in &pts {
        near += grad_sq(x, y);
        if u != 0.0 {
            ext += u * u * square_exterior(x, y, l, 1.0);
        }
    }
    near *= h.powi(3) * defect;
    ext *= 2.0 * h * h;
    params.constant() / (2.0 * params.p) * (pair + near + ext)
}
