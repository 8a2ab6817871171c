//! Integration by parts with a cutoff field, and the cutoff study on a bump.

use fracp::identity::{cutoff_limit_study, ibp_check};
use fracp::{AngularKernel, Nonlinearity, Params, QuadSpec, RadialGrid, RadialProfile, VectorFieldSpec};

fn main() -> fracp::Result<()> {
    let params = Params::validate(2, 0.5, 2.0)?;
    let nodes = RadialGrid::with_size(128, 12.0).nodes()?;
    let u = RadialProfile::from_fn(nodes, |r| 3.0 * (-r * r).exp())?;
    let quad = QuadSpec::default();

    for lambda in [1.0, 0.5, 0.2] {
        let rep = ibp_check(&u, &VectorFieldSpec::IdentityCutoff { lambda }, &params, &quad)?;
        println!(
            "lambda = {lambda}: lhs {:.8} rhs {:.8} rel {:.1e}, bracket in [{:.3}, {:.3}]",
            rep.lhs, rep.rhs, rep.rel_residual, rep.bracket_stats.min, rep.bracket_stats.max
        );
    }

    // not a solution, so assembled rows need not vanish; lhs and operator_term still agree
    let nl = Nonlinearity::two_power(1.0, 3.0, &params)?;
    let kernel = AngularKernel::build(&params, u.nodes());
    let study = cutoff_limit_study(&u, &nl, &params, &[2.0, 1.0, 0.5], &quad, &kernel)?;
    for row in study.rows.iter().chain([&study.limit]) {
        println!(
            "lambda = {:<4} lhs {:.6} operator {:.6} G-terms {:.6} + {:.2e}",
            row.lambda, row.lhs, row.operator_term, row.g_term, row.lambda_term
        );
    }
    println!("P(u) = {:.6}", study.pohozaev_residual);
    Ok(())
}
