//! Gagliardo and potential energies, and how they move under dilation.

use fracp::energy::energy_report;
use fracp::{AngularKernel, Energy, Nonlinearity, Params, RadialGrid, RadialProfile};

fn main() -> fracp::Result<()> {
    let params = Params::validate(2, 0.5, 2.0)?;
    let nl = Nonlinearity::two_power(1.0, 3.0, &params)?;
    let nodes = RadialGrid::default().nodes()?;
    let kernel = AngularKernel::build(&params, &nodes);
    let u = RadialProfile::from_fn(nodes, |r| 3.0 * (-r * r).exp())?;

    let rep = energy_report(&u, &nl, &kernel, true)?;
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());

    let e = Energy::new(params, nl, kernel);
    let (a, b) = (e.a(&u)?, e.b(&u));
    for sigma in [0.5, 2.0, 4.0] {
        let v = u.dilate(sigma)?;
        println!(
            "sigma = {sigma}: a ratio {:.12} (expect {:.12}), b ratio {:.12} (expect {})",
            e.a(&v)? / a,
            sigma.powf(params.q1()),
            e.b(&v) / b,
            sigma.powf(params.nf())
        );
    }
    Ok(())
}
