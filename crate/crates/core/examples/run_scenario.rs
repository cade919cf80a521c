//! Parse a scenario from text and run it in a temporary directory.

use conelab::scenario::{parse_config, run};

fn main() -> conelab::Result<()> {
    let text = "experiment = entropy_scan\nname = example\n[solver]\nlengths = 4, 8, 16\nseeds = 0..3\n";
    let cfg = match parse_config(text) {
        Ok(cfg) => cfg,
        Err(issues) => {
            for i in issues {
                eprintln!("{i}");
            }
            std::process::exit(2);
        }
    };
    let dir = std::env::temp_dir().join("conelab-example");
    let report = run(&cfg, Some(&dir))?;
    print!("{}", report.summary());
    println!("outputs in {}", dir.display());
    Ok(())
}
