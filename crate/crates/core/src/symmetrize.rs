//! Decreasing rearrangements.
//!
//! Both rearrangements produce profiles that are piecewise linear in the
//! volume coordinate, so their superlevel sets have exactly the measure of
//! the input's (up to the ramp width used for step data).

use crate::params::sphere_area;
use crate::planar::PlanarGrid;
use crate::profile::RadialProfile;

const RAMP: f64 = 1e-11;

fn radius_of(volume: f64, n: usize) -> f64 {
    let vb = sphere_area(n) / n as f64;
    (volume / vb).powf(1.0 / n as f64)
}

/// Build a profile from `(V, value)` knots, dropping knots whose radii collide.
fn from_volume_knots(knots: &[(f64, f64)], n: usize) -> RadialProfile {
    let mut nodes: Vec<f64> = Vec::with_capacity(knots.len());
    let mut values: Vec<f64> = Vec::with_capacity(knots.len());
    for &(v, t) in knots {
        let r = if v <= 0.0 { 0.0 } else { radius_of(v, n) };
        match nodes.last() {
            Some(&last) if r <= last => {
                // collided knot: keep the later value so the profile still ends correctly
                *values.last_mut().unwrap() = t;
            }
            _ => {
                nodes.push(r);
                values.push(t);
            }
        }
    }
    while nodes.len() < 3 {
        let last = *nodes.last().unwrap();
        let next = if last > 0.0 { last * (1.0 + 1e-6) } else { 1.0 };
        nodes.push(next);
        values.push(*values.last().unwrap());
    }
    RadialProfile::new(nodes, values).expect("knots are finite and increasing")
}

/// Schwarz symmetrization of `|f|` for cell-counted step data.
pub fn schwarz_symmetrize(f: &PlanarGrid) -> RadialProfile {
    let area = f.cell_area();
    let mut v: Vec<f64> = f.values().iter().map(|x| x.abs()).filter(|x| *x > 0.0).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    if v.is_empty() {
        let rho = (area / std::f64::consts::PI).sqrt();
        return RadialProfile::new(vec![0.0, 0.5 * rho, rho], vec![0.0; 3]).unwrap();
    }
    // distinct levels with their cumulative measure
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    for (k, &t) in v.iter().enumerate() {
        let end = (k + 1) as f64 * area;
        match blocks.last_mut() {
            Some(b) if b.0 == t => b.1 = end,
            _ => blocks.push((t, end)),
        }
    }
    let mut knots = vec![(0.0, blocks[0].0)];
    for (k, &(t, end)) in blocks.iter().enumerate() {
        let next = blocks.get(k + 1).map_or(0.0, |b| b.0);
        let mut eps = RAMP * area;
        // widen the ramp until its ends map to distinct radii
        while radius_of(end + eps, 2) <= radius_of(end - eps, 2) {
            eps *= 10.0;
        }
        knots.push((end - eps, t));
        knots.push((end + eps, next));
    }
    from_volume_knots(&knots, 2)
}

/// Decreasing rearrangement of `|u|` in the radial representation.
pub fn symmetrize_radial(u: &RadialProfile, n: usize) -> RadialProfile {
    let vals = u.values();
    if vals.iter().all(|v| *v >= 0.0) && vals.windows(2).all(|w| w[1] <= w[0]) {
        return u.clone();
    }
    let vol = u.volumes(n);
    // segments of |u| linear in V, split at sign changes
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for i in 0..u.m() {
        let (a, b) = (vals[i], vals[i + 1]);
        let (v0, v1) = (vol[i], vol[i + 1]);
        if a * b < 0.0 {
            let t = a / (a - b);
            let vm = v0 + t * (v1 - v0);
            segs.push((v0, vm, a.abs(), 0.0));
            segs.push((vm, v1, 0.0, b.abs()));
        } else {
            segs.push((v0, v1, a.abs(), b.abs()));
        }
    }
    let mut levels: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
    if segs.iter().any(|s| s.2 == 0.0 || s.3 == 0.0) {
        levels.push(0.0);
    }
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();

    // measure of {|u| > t} and of {|u| >= t}
    let measure = |t: f64| -> (f64, f64) {
        let mut gt = 0.0;
        let mut ge = 0.0;
        for &(v0, v1, a, b) in &segs {
            let len = v1 - v0;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo == hi {
                if lo > t {
                    gt += len;
                }
                if lo >= t {
                    ge += len;
                }
            } else if t < lo {
                gt += len;
                ge += len;
            } else if t < hi {
                let frac = (hi - t) / (hi - lo);
                gt += len * frac;
                ge += len * frac;
            } else if t == hi {
                // single point; measure zero
            }
        }
        (gt, ge)
    };

    let mut knots = Vec::with_capacity(2 * levels.len());
    for &t in &levels {
        let (gt, ge) = measure(t);
        knots.push((gt, t));
        if ge > gt {
            knots.push((ge, t));
        }
    }
    let vmax = vol[u.m()];
    if let Some(&(v_last, _)) = knots.last() {
        if v_last < vmax {
            knots.push((vmax, 0.0));
        }
    }
    from_volume_knots(&knots, n)
}

/// Resample a profile onto `nodes`, treating both as piecewise linear in volume.
pub fn resample_pl_volume(u: &RadialProfile, nodes: &[f64], n: usize) -> RadialProfile {
    let vu = u.volumes(n);
    let vb = sphere_area(n) / n as f64;
    let vals = u.values();
    let mut out = Vec::with_capacity(nodes.len());
    let mut k = 0;
    for &r in nodes {
        let v = vb * r.powi(n as i32);
        if v > vu[u.m()] {
            out.push(0.0);
            continue;
        }
        while k + 1 < u.m() && vu[k + 1] < v {
            k += 1;
        }
        let t = ((v - vu[k]) / (vu[k + 1] - vu[k])).clamp(0.0, 1.0);
        out.push(vals[k] + t * (vals[k + 1] - vals[k]));
    }
    RadialProfile::new(nodes.to_vec(), out).expect("resampled values are finite")
}
