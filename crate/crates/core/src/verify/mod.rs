//! Verification suite: the toolkit's invariants checked on shipped
//! fixtures at fixed tolerances, one pass/fail record per check.

mod checks;
pub mod fixtures;

use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::capacity::{reparametrize_capacity, ReparamOptions};
use crate::domain::HullConfig;
use crate::error::Result;

/// Identifier and title of every check, in run order.
pub const CHECKS: [(&str, &str); 12] = [
    ("A1", "radial capacity law"),
    ("A2", "weight normalization"),
    ("A3", "symmetric pair"),
    ("A4", "capacity identity"),
    ("A5", "telescoping partition sums"),
    ("A6", "monotonicity of lmr"),
    ("A7", "round trip"),
    ("A8", "disk kernel"),
    ("A9", "slit disk kernel structure"),
    ("A10", "difference quotient ratio"),
    ("A11", "power bound"),
    ("A12", "weights under a preliminary map"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    /// Worst measured deviation.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: measured {:.3e}, tolerance {:.1e}, {:.2} s; {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

/// Outcome of a check body: pass flag, worst deviation, tolerance, detail.
pub(crate) struct Outcome {
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Fixtures of one suite run; capacity reparametrizations are computed
/// once and shared between checks.
pub struct Suite {
    injected: Option<Vec<HullConfig>>,
    configs: OnceLock<Result<Vec<HullConfig>>>,
    pair: OnceLock<Result<HullConfig>>,
    two: OnceLock<Result<HullConfig>>,
}

impl Default for Suite {
    fn default() -> Self {
        Self::shipped()
    }
}

fn reparam(cfg: &HullConfig) -> Result<HullConfig> {
    reparametrize_capacity(&cfg.clone().validate()?, &ReparamOptions::default())
}

impl Suite {
    pub fn shipped() -> Self {
        Self { injected: None, configs: OnceLock::new(), pair: OnceLock::new(), two: OnceLock::new() }
    }

    /// Suite whose randomized fixtures are replaced by `configs`, taken as
    /// already capacity-parametrized.
    pub fn with_configs(configs: Vec<HullConfig>) -> Self {
        Self { injected: Some(configs), ..Self::shipped() }
    }

    pub(crate) fn configs(&self) -> Result<&[HullConfig]> {
        let r = self.configs.get_or_init(|| match &self.injected {
            Some(c) => c.iter().map(|c| c.clone().validate()).collect(),
            None => fixtures::random_configs(fixtures::SEED, 5).iter().map(reparam).collect(),
        });
        r.as_deref().map_err(Clone::clone)
    }

    pub(crate) fn pair(&self) -> Result<&HullConfig> {
        self.pair.get_or_init(|| reparam(&fixtures::symmetric_pair())).as_ref().map_err(Clone::clone)
    }

    pub(crate) fn two_slits(&self) -> Result<&HullConfig> {
        self.two.get_or_init(|| reparam(&fixtures::two_slits())).as_ref().map_err(Clone::clone)
    }

    /// Runs one check; unknown identifiers and internal errors fail.
    pub fn run(&self, id: &str) -> CheckResult {
        let title = CHECKS.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown check");
        let start = Instant::now();
        let out = checks::run(self, id);
        let seconds = start.elapsed().as_secs_f64();
        match out {
            Ok(o) => CheckResult { id: id.into(), title: title.into(), passed: o.passed, measured: o.measured, tolerance: o.tolerance, detail: o.detail, seconds },
            Err(e) => CheckResult {
                id: id.into(),
                title: title.into(),
                passed: false,
                measured: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("error {}: {e}", e.kind()),
                seconds,
            },
        }
    }

    pub fn run_all(&self) -> Vec<CheckResult> {
        CHECKS.iter().map(|c| self.run(c.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_fails_without_panicking() {
        let r = Suite::shipped().run("A0");
        assert!(!r.passed && r.detail.contains("InvalidDomain"));
    }

    #[test]
    fn closed_form_checks_pass() {
        let suite = Suite::shipped();
        for id in ["A1", "A5", "A8", "A9"] {
            let r = suite.run(id);
            assert!(r.passed, "{}", r.line());
            assert!(r.line().starts_with(&format!("{id} PASS")));
        }
    }

    #[test]
    fn injected_configs_are_used() {
        let raw = fixtures::random_configs(3, 1);
        let r = Suite::with_configs(raw).run("A4");
        assert!(!r.passed, "{}", r.line());
    }
}
