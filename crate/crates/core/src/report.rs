//! Machine-readable command reports with a content hash.

use crate::certificate::{Certificate, Status};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandReport {
    pub command: String,
    pub arguments: Vec<String>,
    /// SHA-256 of the input files, in argument order.
    pub fingerprint: String,
    pub status: Status,
    pub certificates: Vec<Certificate>,
    pub counterexamples: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// SHA-256 of the canonical report without `timing_ms` and `hash`.
    pub hash: String,
    pub timing_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Fingerprint of several inputs: each is hashed, then the list of hashes.
pub fn fingerprint(inputs: &[Vec<u8>]) -> String {
    let joined: Vec<String> = inputs.iter().map(|b| sha256_hex(b)).collect();
    sha256_hex(joined.join("\n").as_bytes())
}

impl CommandReport {
    pub fn new(
        command: impl Into<String>,
        arguments: Vec<String>,
        fingerprint: String,
        certificates: Vec<Certificate>,
        result: Option<Value>,
        error: Option<String>,
    ) -> Self {
        let counterexamples: Vec<Value> = certificates
            .iter()
            .filter_map(|c| c.counterexample.as_ref().map(|cx| serde_json::json!({ "claim": c.claim, "counterexample": cx })))
            .collect();
        let status = if error.is_none() && certificates.iter().all(Certificate::passed) { Status::Pass } else { Status::Fail };
        let mut report = CommandReport {
            command: command.into(),
            arguments,
            fingerprint,
            status,
            certificates,
            counterexamples,
            result,
            error,
            hash: String::new(),
            timing_ms: 0,
        };
        report.hash = report.content_hash();
        report
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Hash of the canonical serialization with the timing and hash fields cleared.
    pub fn content_hash(&self) -> String {
        let mut bare = self.clone();
        bare.hash = String::new();
        bare.timing_ms = 0;
        sha256_hex(serde_json::to_string(&bare).expect("serializable report").as_bytes())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {} {}\n", self.command, self.arguments.join(" "));
        out.push_str(&format!("fingerprint: {}\n", self.fingerprint));
        for c in &self.certificates {
            let tag = if c.passed() { "pass" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {}\n", c.claim));
            if let Some(cx) = &c.counterexample {
                out.push_str(&format!("       counterexample: {cx}\n"));
            }
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out.push_str(&format!("status: {}\n", if self.passed() { "pass" } else { "fail" }));
        out.push_str(&format!("hash: {}\n", self.hash));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_is_outside_the_hash() {
        let mut c = Certificate::new("claim");
        c.witness(3);
        let mut r = CommandReport::new("validate", vec!["x.json".into()], fingerprint(&[b"abc".to_vec()]), vec![c], None, None);
        let h = r.hash.clone();
        r.timing_ms = 1234;
        assert_eq!(r.content_hash(), h);
        assert!(r.passed());
        let mut bad = Certificate::new("other");
        bad.fail("why");
        let r2 = CommandReport::new("validate", vec![], String::new(), vec![bad], None, None);
        assert!(!r2.passed());
        assert_eq!(r2.counterexamples.len(), 1);
    }
}
