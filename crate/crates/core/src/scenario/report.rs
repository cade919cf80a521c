use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `<=`, `>=` or `>`: how `value` must compare with `bound`.
    pub relation: String,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, relation: &str, bound: f64, pass: bool) -> Self {
        Self { name: name.into(), value, relation: relation.into(), bound, pass }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    ChecksFailed,
    DomainError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ChecksFailed => 1,
            Status::DomainError => 3,
        }
    }
}

/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub conelab: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub status: Status,
    pub error: Option<String>,
    pub artifacts: Vec<String>,
    pub wall_clock_s: f64,
    pub versions: Versions,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// One line per check, then the verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            s += &format!("{tag}  {}: {:e} {} {:e}\n", c.name, c.value, c.relation, c.bound);
        }
        if let Some(e) = &self.error {
            s += &format!("ERROR {e}\n");
        }
        s += &format!("{} ({:.2} s)\n", if self.pass { "pass" } else { "fail" }, self.wall_clock_s);
        s
    }
}
