//! Driving the command layer from Rust: parse a run configuration and execute
//! `analyze`, `verify` and `constrain` without touching the filesystem.

use aaphase::cli::{execute, Command};
use aaphase::config::RunConfig;

const SPIN: &str = r#"
model = "spin_half"

[spin_half]
mu_B0 = 1.0
theta = 1.5707963267948966
"#;

const CONSTRAIN: &str = r#"
model = "raw_spectrum"

[raw_spectrum]
labels = ["L1", "L2"]
values = ["1", "-1"]

[constrain]
trials = ["3", "1/2"]
"#;

fn main() {
    let spin = RunConfig::parse(SPIN, None).unwrap();
    for cmd in [Command::Analyze, Command::Verify] {
        let out = execute(cmd, &spin);
        println!("== {} (exit {})\n{}", cmd.as_str(), out.exit_code, out.body);
    }
    let out = execute(Command::Constrain, &RunConfig::parse(CONSTRAIN, None).unwrap());
    println!("== constrain (exit {})\n{}", out.exit_code, out.body);
}
