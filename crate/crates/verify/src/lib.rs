//! Pass/fail bookkeeping for the acceptance run in `tests/acceptance.rs`.

use std::time::Duration;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub criterion: u32,
    pub pass: bool,
    pub summary: String,
    /// Extra lines printed under the verdict.
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(criterion: u32, pass: bool, summary: impl Into<String>) -> Self {
        Verdict {
            criterion,
            pass,
            summary: summary.into(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} {}",
            self.criterion,
            if self.pass { "PASS" } else { "FAIL" },
            self.summary
        )
    }
}

pub fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Prints every verdict and returns whether all of them passed.
pub fn report(verdicts: &[Verdict]) -> bool {
    for v in verdicts {
        println!("{}", v.line());
        for n in &v.notes {
            println!("    {n}");
        }
    }
    let failed: Vec<String> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.criterion.to_string())
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", verdicts.len());
    } else {
        println!("acceptance: {} of {} criteria fail ({})", failed.len(), verdicts.len(), failed.join(", "));
    }
    failed.is_empty()
}
