//! Drive a command from an inline TOML config and read back the record.

use fracp::run::{run, Command};
use fracp::RunConfig;

const CONFIG: &str = r#"
[params]
N = 2
s = 0.5
p = 2.0

[grid]
M = 96
Rmax = 10.0

[operator]
radii = [0.0, 1.0]

[operator.profile]
kind = "gaussian"
amplitude = 2.0
width = 0.7
"#;

fn main() -> fracp::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join("fracp-example");
    let record = run(Command::Operator, &cfg, &out)?;
    for d in &record.outputs {
        println!("{} {}", d.sha256, d.path.display());
    }
    println!("{}", serde_json::to_string_pretty(&record.payload).unwrap());

    match RunConfig::parse("[grid]\nM = 96\nrmax = 10.0\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
