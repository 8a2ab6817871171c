//! Pointwise fractional p-Laplacian of a Gaussian for a few (s, p).

use fracp::{flp_apply, Params, QuadSpec, RadialGrid, RadialProfile};

fn main() -> fracp::Result<()> {
    let nodes = RadialGrid::default().nodes()?;
    let u = RadialProfile::from_fn(nodes, |r| (-r * r).exp())?;
    let quad = QuadSpec::default();
    for (s, p) in [(0.5, 2.0), (0.3, 1.8), (0.5, 3.0)] {
        let params = Params::validate(2, s, p)?;
        println!("s = {s}, p = {p}");
        for r in [0.0, 0.5, 1.0, 1.5, 2.5, 5.0] {
            let v = flp_apply(&u, r, &params, &quad)?;
            println!("  r = {r:>4}: {:>+.8e}  tail <= {:.1e}", v.value, v.tail_bound);
        }
    }
    let bad = Params::validate(2, 0.9, 1.5)?;
    if let Err(e) = flp_apply(&u, 0.0, &bad, &quad) {
        println!("{e}");
    }
    Ok(())
}
