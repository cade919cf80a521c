//! Configuration-driven experiment runner.
//!
//! A scenario names one experiment plus its settings. [`run`] executes it,
//! writes `report.json` and CSV data into the output directory and returns
//! the report.

mod config;
mod report;
mod run;

use std::path::Path;
use std::time::Instant;

pub use config::{parse_config, ConfigIssue, Experiment, ScenarioConfig, Value};
pub use report::{Check, RunReport, Status, Versions, EXIT_CONFIG};

use crate::error::Result;

const PLOT_SCRIPT: &str = r#"# Plots every CSV next to this script. Needs matplotlib.
import csv, glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as f:
        rows = list(csv.reader(f))
    head, body = rows[0], rows[1:]
    if not body:
        continue
    fig, ax = plt.subplots()
    try:
        cols = [[float(r[i]) for r in body] for i in range(len(head))]
    except ValueError:
        continue
    for i in range(1, len(head)):
        if head[i] == "seed":
            continue
        ys = [abs(v) for v in cols[i]]
        if any(v > 0 for v in ys):
            ax.semilogy(cols[0], ys, ".", label=head[i])
    ax.set_xlabel(head[0])
    ax.legend()
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)
"#;

/// Runs the scenario, writing artifacts under `out_dir` (the configured
/// directory when `None`). Domain errors end up in the report, not as `Err`;
/// only failing to create the directory or write the report is an `Err`.
pub fn run(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunReport> {
    let dir = out_dir.unwrap_or(&cfg.out_dir);
    std::fs::create_dir_all(dir)?;
    let start = Instant::now();
    let mut out = run::Outputs { dir, csv: cfg.write_csv, checks: Vec::new(), artifacts: Vec::new() };
    let outcome = run::execute(cfg, &mut out);
    if cfg.plot_script && cfg.write_csv && outcome.is_ok() {
        std::fs::write(dir.join("plot.py"), PLOT_SCRIPT)?;
        out.artifacts.push("plot.py".into());
    }
    let (status, error) = match outcome {
        Err(e) => (Status::DomainError, Some(e.to_string())),
        Ok(()) if out.checks.iter().all(|c| c.pass) => (Status::Pass, None),
        Ok(()) => (Status::ChecksFailed, None),
    };
    out.artifacts.push("report.json".into());
    let report = RunReport {
        scenario: cfg.clone(),
        pass: status == Status::Pass,
        checks: out.checks,
        status,
        error,
        artifacts: out.artifacts,
        wall_clock_s: start.elapsed().as_secs_f64(),
        versions: Versions { conelab: env!("CARGO_PKG_VERSION").into() },
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| crate::Error::Io(e.to_string()))?;
    std::fs::write(dir.join("report.json"), json + "\n")?;
    Ok(report)
}
