use fracp::{normalization_constant, Params};

fn main() {
    println!("{:>3} {:>5} {:>5} {:>14}", "N", "s", "p", "C");
    for (n, s, p) in [(1, 0.3, 2.0), (2, 0.5, 2.0), (3, 0.5, 2.0), (2, 0.3, 1.8), (2, 0.7, 2.5), (3, 0.9, 3.0)] {
        match Params::validate(n, s, p) {
            Ok(params) => println!("{n:>3} {s:>5} {p:>5} {:>14.10}", normalization_constant(&params)),
            Err(e) => println!("{n:>3} {s:>5} {p:>5} {e}"),
        }
    }
    // sp >= N is rejected
    println!("{}", Params::validate(2, 0.8, 3.0).unwrap_err());
}
