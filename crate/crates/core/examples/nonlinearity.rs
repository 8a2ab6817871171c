use fracp::{Nonlinearity, Params};

fn main() -> fracp::Result<()> {
    let params = Params::validate(2, 0.5, 2.0)?;
    let nl = Nonlinearity::two_power(1.0, 3.0, &params)?;
    println!("zeta* = {:.6}, initializer level zeta = {:.6}", nl.zeta_star, nl.zeta);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "g", "G", "G1", "G2");
    for k in 0..=8 {
        let t = 0.375 * k as f64;
        let e = nl.eval(t);
        println!("{t:>6.3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", e.g, e.big_g, e.big_g1, e.big_g2);
    }
    // q must be subcritical
    println!("{}", Nonlinearity::two_power(1.0, 5.0, &params).unwrap_err());
    Ok(())
}
