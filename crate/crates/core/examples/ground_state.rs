//! Constrained minimization on a coarse grid, then the rescaled solution.
//!
//! `cargo run --release --example ground_state -- 256` runs the reference resolution.

use fracp::{solve, Nonlinearity, Params, RadialGrid, SolveConfig};

fn main() -> fracp::Result<()> {
    let m = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(96);
    let params = Params::validate(2, 0.5, 2.0)?;
    let nl = Nonlinearity::two_power(1.0, 3.0, &params)?;
    let grid = RadialGrid { m, rmax: if m >= 256 { 40.0 } else { 16.0 }, ..RadialGrid::default() };
    let (rep, ubar) = solve(&nl, &params, &grid, &SolveConfig::default())?;
    println!("J ~ {:.6} after {} iterations ({} rearrangements kept)", rep.j_est, rep.iterations, rep.symmetrizations);
    println!("sigma_bar = {:.6}", rep.sigma_bar);
    println!("a(u) = {:.6}, b(u) = {:.6}, P(u) = {:.2e}", rep.a_final, rep.b_final, rep.pohozaev_residual);
    println!("lagrange mismatch {:.2e}, weak residual {:.2e}", rep.lagrange_mismatch, rep.weak_residual);
    for r in [0.0, 0.1, 0.2, 0.4, 0.8, 1.6] {
        println!("  u({r}) = {:.5}", ubar.eval(r));
    }
    Ok(())
}
