//! Pass/fail records for checked claims, with witnesses and a counterexample.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub status: Status,
    pub witnesses: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl Certificate {
    pub fn new(claim: impl Into<String>) -> Self {
        Certificate { claim: claim.into(), status: Status::Pass, witnesses: Vec::new(), counterexample: None }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn witness(&mut self, w: impl Serialize) {
        self.witnesses.push(serde_json::to_value(w).expect("serializable witness"));
    }

    /// Marks the claim failed; the first counterexample is kept.
    pub fn fail(&mut self, counterexample: impl Serialize) {
        self.status = Status::Fail;
        if self.counterexample.is_none() {
            self.counterexample = Some(serde_json::to_value(counterexample).expect("serializable counterexample"));
        }
    }

    /// Records `ok` as a witness outcome, failing with `detail` otherwise.
    pub fn check(&mut self, ok: bool, detail: impl Serialize) {
        if !ok {
            self.fail(detail);
        }
    }

    /// Folds a sub-certificate in: its failure fails this one.
    pub fn absorb(&mut self, sub: Certificate) {
        if !sub.passed() {
            let cx = serde_json::json!({ "claim": sub.claim, "counterexample": sub.counterexample });
            self.fail(cx);
        }
        self.witnesses.push(serde_json::json!({ "claim": sub.claim, "status": sub.status }));
    }

    pub fn into_result(self) -> crate::Result<Certificate> {
        if self.passed() {
            Ok(self)
        } else {
            Err(crate::Error::Semantic(format!(
                "{} failed: {}",
                self.claim,
                self.counterexample.as_ref().map(|v| v.to_string()).unwrap_or_default()
            )))
        }
    }
}
