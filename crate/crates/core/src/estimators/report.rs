use serde::Serialize;

/// One pass/fail rule with a human-readable justification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rule {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Rule {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Rule {
        Rule { name: name.into(), pass, detail: detail.into() }
    }
}

/// Deterministic summary of one experiment: config echo, results, rules.
/// Wall-clock data lives elsewhere so that the report is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<C: Serialize, R: Serialize> {
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub results: R,
    pub rules: Vec<Rule>,
    pub passed: bool,
}

impl<C: Serialize, R: Serialize> ExperimentReport<C, R> {
    pub fn new(command: &str, seed: u64, config: C, results: R, rules: Vec<Rule>) -> Self {
        let passed = rules.iter().all(|r| r.pass);
        ExperimentReport { command: command.into(), seed, config, results, rules, passed }
    }
}
