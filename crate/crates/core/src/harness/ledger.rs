use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this run; the entry says why.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl AuditEntry {
    pub fn check(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            detail: reason.into(),
        }
    }
}

/// Ordered audit results of one command.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ledger(pub Vec<AuditEntry>);

impl Ledger {
    pub fn push(&mut self, e: AuditEntry) {
        self.0.push(e);
    }

    pub fn extend(&mut self, other: Ledger) {
        self.0.extend(other.0);
    }

    /// True when no entry failed.
    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|e| e.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&AuditEntry> {
        self.0.iter().find(|e| e.name == name)
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.0
    }
}
