//! Machine-readable reports for the law and coherence suites.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub law: String,
    pub instance: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// One suite run: a list of per-law entries with counterexample payloads on
/// failure. A report passes when every entry passes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn new(suite: impl Into<String>) -> Self {
        CheckReport { suite: suite.into(), entries: Vec::new() }
    }

    pub fn pass(&mut self, law: impl Into<String>, instance: impl Into<String>) {
        self.entries.push(CheckEntry {
            law: law.into(),
            instance: instance.into(),
            pass: true,
            detail: None,
        });
    }

    pub fn fail(
        &mut self,
        law: impl Into<String>,
        instance: impl Into<String>,
        detail: impl Into<String>,
    ) {
        self.entries.push(CheckEntry {
            law: law.into(),
            instance: instance.into(),
            pass: false,
            detail: Some(detail.into()),
        });
    }

    /// Record a batch: pass when the failure list is empty, otherwise one
    /// failing entry per message.
    pub fn batch(&mut self, law: &str, instance: &str, failures: &[String]) {
        if failures.is_empty() {
            self.pass(law, instance);
        } else {
            for f in failures {
                self.fail(law, instance, f.clone());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// One human line: name, counts, first failure if any.
    pub fn summary(&self) -> String {
        let total = self.entries.len();
        let failed = self.entries.iter().filter(|e| !e.pass).count();
        if failed == 0 {
            format!("{}: ok ({total} checks)", self.suite)
        } else {
            let first = self.failures().next().map(|e| e.law.clone()).unwrap_or_default();
            format!("{}: FAILED {failed}/{total} (first: {first})", self.suite)
        }
    }
}
