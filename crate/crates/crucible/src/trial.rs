//! Trial outcomes and the child protocol.
//!
//! A strategy runner is a child process that prints exactly one JSON object
//! on its last stdout line:
//!
//! ```json
//! {"status":"found","time_s":0.012,"tests":37,"discards":0,
//!  "counterexample":"((T E 2 9 E) 2 5)","gen_time_s":0.004,"exec_time_s":0.008}
//! ```
//!
//! `status` is one of `"found"`, `"gave_up"`, `"error"`; `counterexample`
//! is required exactly when the status is `found`; `gen_time_s` and
//! `exec_time_s` are optional. Exit code 0 for found/gave_up. The `timeout`
//! status is assigned by the driver when it kills the child, never by the
//! child itself.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Found,
    GaveUp,
    Timeout,
    Error,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Found => "found",
            TrialStatus::GaveUp => "gave_up",
            TrialStatus::Timeout => "timeout",
            TrialStatus::Error => "error",
        }
    }
}

/// One strategy run's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub status: TrialStatus,
    pub time_s: f64,
    pub tests: u64,
    pub discards: u64,
    pub counterexample: Option<String>,
    pub gen_time_s: Option<f64>,
    pub exec_time_s: Option<f64>,
    /// Captured output attached to `error` results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialResult {
    pub fn error(message: impl Into<String>, time_s: f64) -> TrialResult {
        TrialResult {
            status: TrialStatus::Error,
            time_s,
            tests: 0,
            discards: 0,
            counterexample: None,
            gen_time_s: None,
            exec_time_s: None,
            error: Some(message.into()),
        }
    }

    /// The protocol line a child prints. Keys are emitted in sorted order;
    /// consumers must not rely on field order.
    pub fn to_protocol_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("status".into(), self.status.as_str().into());
        obj.insert("time_s".into(), self.time_s.into());
        obj.insert("tests".into(), self.tests.into());
        obj.insert("discards".into(), self.discards.into());
        if let Some(ce) = &self.counterexample {
            obj.insert("counterexample".into(), ce.as_str().into());
        }
        if let Some(t) = self.gen_time_s {
            obj.insert("gen_time_s".into(), t.into());
        }
        if let Some(t) = self.exec_time_s {
            obj.insert("exec_time_s".into(), t.into());
        }
        if let Some(e) = &self.error {
            obj.insert("error".into(), e.as_str().into());
        }
        serde_json::Value::Object(obj).to_string()
    }
}

/// Schema-invalid child output, listing every missing or ill-typed field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("protocol violation: {}", .problems.join("; "))]
pub struct ProtocolViolation {
    pub problems: Vec<String>,
}

fn get_f64(
    obj: &serde_json::Map<String, serde_json::Value>,
    field: &str,
    required: bool,
    problems: &mut Vec<String>,
) -> Option<f64> {
    match obj.get(field) {
        None => {
            if required {
                problems.push(format!("missing field `{field}`"));
            }
            None
        }
        Some(v) => match v.as_f64() {
            Some(x) if x >= 0.0 => Some(x),
            Some(_) => {
                problems.push(format!("field `{field}` must be non-negative"));
                None
            }
            None => {
                problems.push(format!("field `{field}` must be a number"));
                None
            }
        },
    }
}

fn get_u64(
    obj: &serde_json::Map<String, serde_json::Value>,
    field: &str,
    problems: &mut Vec<String>,
) -> u64 {
    match obj.get(field) {
        None => {
            problems.push(format!("missing field `{field}`"));
            0
        }
        Some(v) => match v.as_u64() {
            Some(x) => x,
            None => {
                problems.push(format!("field `{field}` must be a non-negative integer"));
                0
            }
        },
    }
}

/// Parse and strictly validate a child's output: the last non-empty stdout
/// line must be a protocol JSON object. Unknown fields are ignored.
pub fn parse_trial_output(bytes: &[u8]) -> Result<TrialResult, ProtocolViolation> {
    let text = std::str::from_utf8(bytes).map_err(|_| ProtocolViolation {
        problems: vec!["output is not valid UTF-8".into()],
    })?;
    let line = text
        .lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| ProtocolViolation {
            problems: vec!["no output".into()],
        })?;
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| ProtocolViolation {
        problems: vec![format!("last line is not JSON: {e}")],
    })?;
    let obj = value.as_object().ok_or_else(|| ProtocolViolation {
        problems: vec!["last line is not a JSON object".into()],
    })?;

    let mut problems = Vec::new();

    let status = match obj.get("status") {
        None => {
            problems.push("missing field `status`".into());
            None
        }
        Some(serde_json::Value::String(s)) => match s.as_str() {
            "found" => Some(TrialStatus::Found),
            "gave_up" => Some(TrialStatus::GaveUp),
            "error" => Some(TrialStatus::Error),
            other => {
                problems.push(format!(
                    "field `status` must be one of found/gave_up/error, got `{other}`"
                ));
                None
            }
        },
        Some(_) => {
            problems.push("field `status` must be a string".into());
            None
        }
    };

    let time_s = get_f64(obj, "time_s", true, &mut problems).unwrap_or(0.0);
    let tests = get_u64(obj, "tests", &mut problems);
    let discards = get_u64(obj, "discards", &mut problems);
    let gen_time_s = get_f64(obj, "gen_time_s", false, &mut problems);
    let exec_time_s = get_f64(obj, "exec_time_s", false, &mut problems);

    let counterexample = match obj.get("counterexample") {
        None | Some(serde_json::Value::Null) => {
            if status == Some(TrialStatus::Found) {
                problems.push("missing field `counterexample` (required when found)".into());
            }
            None
        }
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(_) => {
            problems.push("field `counterexample` must be a string".into());
            None
        }
    };

    let error = match obj.get("error") {
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        _ => None,
    };

    if !problems.is_empty() {
        return Err(ProtocolViolation { problems });
    }

    Ok(TrialResult {
        status: status.expect("status validated"),
        time_s,
        tests,
        discards,
        counterexample,
        gen_time_s,
        exec_time_s,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_found_record() {
        let line = br#"{"status":"found","time_s":0.012,"tests":37,"discards":0,"counterexample":"(T E 2 9 E), k=2, v=5"}"#;
        let r = parse_trial_output(line).unwrap();
        assert_eq!(r.status, TrialStatus::Found);
        assert_eq!(r.time_s, 0.012);
        assert_eq!(r.tests, 37);
        assert_eq!(r.discards, 0);
        assert_eq!(r.counterexample.as_deref(), Some("(T E 2 9 E), k=2, v=5"));
        assert_eq!(r.gen_time_s, None);
    }

    #[test]
    fn missing_fields_all_listed() {
        let err = parse_trial_output(br#"{"status":"found"}"#).unwrap_err();
        let all = err.problems.join("\n");
        assert!(all.contains("time_s"));
        assert!(all.contains("tests"));
        assert!(all.contains("discards"));
        assert!(all.contains("counterexample"));
        assert_eq!(err.problems.len(), 4);
    }

    #[test]
    fn parses_gave_up_record() {
        let line = br#"{"status":"gave_up","time_s":1.5,"tests":10000,"discards":250000}"#;
        let r = parse_trial_output(line).unwrap();
        assert_eq!(r.status, TrialStatus::GaveUp);
        assert_eq!(r.tests, 10_000);
        assert_eq!(r.discards, 250_000);
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn only_last_line_is_parsed_and_unknown_fields_ignored() {
        let out = b"building...\nwarmup done\n{\"status\":\"gave_up\",\"time_s\":1.0,\"tests\":5,\"discards\":0,\"extra\":42}\n";
        let r = parse_trial_output(out).unwrap();
        assert_eq!(r.status, TrialStatus::GaveUp);
        assert_eq!(r.tests, 5);
    }

    #[test]
    fn ill_typed_fields_reported() {
        let err =
            parse_trial_output(br#"{"status":"maybe","time_s":"fast","tests":-1,"discards":0}"#)
                .unwrap_err();
        assert_eq!(err.problems.len(), 3);
    }

    #[test]
    fn protocol_line_round_trips() {
        let r = TrialResult {
            status: TrialStatus::Found,
            time_s: 0.25,
            tests: 12,
            discards: 3,
            counterexample: Some("((T E 1 0 E) 2 5)".into()),
            gen_time_s: Some(0.1),
            exec_time_s: Some(0.15),
            error: None,
        };
        let again = parse_trial_output(r.to_protocol_line().as_bytes()).unwrap();
        assert_eq!(r, again);
    }
}
