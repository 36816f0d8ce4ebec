//! Task files: a ring, named inputs and a list of tasks.

use std::collections::BTreeSet;
use std::fmt;

use cartan_core::coeff::{Policy, Q, Ring, TVar};
use serde_json::Value;

pub const KINDS: [&str; 7] = ["verify-identities", "ch-check", "connection", "flatness", "cyclic-homology", "primitive-form", "compatibility"];

#[derive(Debug, Clone, PartialEq)]
pub enum TaskError {
    /// Malformed input; exit 2.
    Schema(String),
    /// A named hypothesis does not hold; exit 3.
    Precondition(String),
}

impl fmt::Display for TaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskError::Schema(s) => write!(f, "schema error: {s}"),
            TaskError::Precondition(s) => write!(f, "precondition failed: {s}"),
        }
    }
}

impl std::error::Error for TaskError {}

pub fn schema(s: impl Into<String>) -> TaskError {
    TaskError::Schema(s.into())
}

pub fn pre(s: impl fmt::Display) -> TaskError {
    TaskError::Precondition(s.to_string())
}

#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub kind: String,
    pub params: Value,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TaskFile {
    pub ring: Ring,
    pub inputs: Value,
    pub tasks: Vec<Task>,
}

fn q_of(v: &Value, what: &str) -> Result<Q, TaskError> {
    match v {
        Value::Number(n) => n.as_i64().map(|i| Q::from_integer(i as i128)).ok_or_else(|| schema(format!("{what}: expected an integer or a rational string"))),
        Value::String(s) => s.trim().parse::<Q>().map_err(|_| schema(format!("{what}: `{s}` is not a rational"))),
        _ => Err(schema(format!("{what}: expected a number"))),
    }
}

fn int_of(v: &Value, what: &str) -> Result<i64, TaskError> {
    v.as_i64().ok_or_else(|| schema(format!("{what}: expected an integer")))
}

/// `ring`: z_order, energy_cut, e_window [lo, hi], t [{name, degree}],
/// norm_constant, and optionally t_order (default 3).
pub fn parse_ring(v: &Value) -> Result<Ring, TaskError> {
    let o = v.as_object().ok_or_else(|| schema("ring: expected an object"))?;
    for k in o.keys() {
        if !["z_order", "energy_cut", "e_window", "t", "t_order", "norm_constant"].contains(&k.as_str()) {
            return Err(schema(format!("ring: unknown field `{k}`")));
        }
    }
    let field = |k: &str| o.get(k).ok_or_else(|| schema(format!("ring: missing `{k}`")));
    let z = int_of(field("z_order")?, "ring.z_order")?;
    let t_order = o.get("t_order").map(|x| int_of(x, "ring.t_order")).transpose()?.unwrap_or(3);
    if z < 1 || t_order < 1 {
        return Err(schema("ring: orders must be positive"));
    }
    let energy_cut = q_of(field("energy_cut")?, "ring.energy_cut")?;
    let w = field("e_window")?.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema("ring.e_window: expected [lo, hi]"))?;
    let (lo, hi) = (int_of(&w[0], "ring.e_window")?, int_of(&w[1], "ring.e_window")?);
    let mut tvars = vec![];
    for (i, t) in field("t")?.as_array().ok_or_else(|| schema("ring.t: expected a list"))?.iter().enumerate() {
        let name = t.get("name").and_then(Value::as_str).ok_or_else(|| schema(format!("ring.t[{i}]: missing name")))?;
        let degree = int_of(t.get("degree").ok_or_else(|| schema(format!("ring.t[{i}]: missing degree")))?, "degree")?;
        tvars.push(TVar { name: name.into(), degree: degree as i32 });
    }
    let norm = q_of(field("norm_constant")?, "ring.norm_constant")?;
    let policy = Policy { z_order: z as u32, energy_cut, t_order: t_order as u32, e_window: (lo as i32, hi as i32) };
    Ring::with_norm(policy, tvars, norm).map_err(|e| schema(format!("ring: {e}")))
}

pub fn parse(text: &str) -> Result<TaskFile, TaskError> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema(format!("json: {e}")))?;
    let o = v.as_object().ok_or_else(|| schema("top level: expected an object"))?;
    let ring = parse_ring(o.get("ring").ok_or_else(|| schema("missing `ring`"))?)?;
    let inputs = o.get("inputs").cloned().unwrap_or(Value::Object(Default::default()));
    if !inputs.is_object() {
        return Err(schema("inputs: expected an object"));
    }
    let list = o.get("tasks").and_then(Value::as_array).ok_or_else(|| schema("missing `tasks` list"))?;
    let mut tasks = vec![];
    let mut names = BTreeSet::new();
    for (i, t) in list.iter().enumerate() {
        let kind = t.get("kind").and_then(Value::as_str).ok_or_else(|| schema(format!("tasks[{i}]: missing kind")))?;
        if !KINDS.contains(&kind) {
            return Err(schema(format!("tasks[{i}]: unknown kind `{kind}`; expected one of {}", KINDS.join(", "))));
        }
        let name = match t.get("name") {
            Some(n) => n.as_str().ok_or_else(|| schema(format!("tasks[{i}]: name must be a string")))?.to_string(),
            None => format!("{i:02}-{kind}"),
        };
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(schema(format!("tasks[{i}]: `{name}` is not a usable file name")));
        }
        if !names.insert(name.clone()) {
            return Err(schema(format!("tasks[{i}]: duplicate name `{name}`")));
        }
        let seed = match t.get("seed") {
            None | Some(Value::Null) => None,
            Some(s) => Some(s.as_u64().ok_or_else(|| schema(format!("tasks[{i}]: seed must be a non-negative integer")))?),
        };
        if kind == "verify-identities" && seed.is_none() {
            return Err(schema(format!("tasks[{i}]: randomized suites need a seed")));
        }
        let params = t.get("params").cloned().unwrap_or(Value::Object(Default::default()));
        if !params.is_object() {
            return Err(schema(format!("tasks[{i}]: params must be an object")));
        }
        tasks.push(Task { name, kind: kind.into(), params, seed });
    }
    Ok(TaskFile { ring, inputs, tasks })
}

/// Typed access to a params object.
pub struct Params<'a>(pub &'a Value);

impl Params<'_> {
    pub fn usize(&self, k: &str, default: usize) -> Result<usize, TaskError> {
        match self.0.get(k) {
            None => Ok(default),
            Some(v) => v.as_u64().map(|x| x as usize).ok_or_else(|| schema(format!("params.{k}: expected a non-negative integer"))),
        }
    }

    pub fn int(&self, k: &str, default: i64) -> Result<i64, TaskError> {
        match self.0.get(k) {
            None => Ok(default),
            Some(v) => int_of(v, &format!("params.{k}")),
        }
    }

    pub fn bool(&self, k: &str, default: bool) -> Result<bool, TaskError> {
        match self.0.get(k) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| schema(format!("params.{k}: expected a boolean"))),
        }
    }

    pub fn str<'b>(&'b self, k: &str, default: &'b str) -> Result<&'b str, TaskError> {
        match self.0.get(k) {
            None => Ok(default),
            Some(v) => v.as_str().ok_or_else(|| schema(format!("params.{k}: expected a string"))),
        }
    }

    pub fn choice<'b>(&'b self, k: &str, default: &'b str, allowed: &[&str]) -> Result<&'b str, TaskError> {
        let s = self.str(k, default)?;
        if allowed.contains(&s) {
            Ok(s)
        } else {
            Err(schema(format!("params.{k}: `{s}` is not one of {}", allowed.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RING: &str = r#"{"z_order": 3, "energy_cut": "2", "e_window": [0, 4], "t": [{"name": "t", "degree": 0}], "norm_constant": 2}"#;

    #[test]
    fn ring_fields() {
        let r = parse_ring(&serde_json::from_str(RING).unwrap()).unwrap();
        assert_eq!(r.policy.z_order, 3);
        assert_eq!(r.tvars[0].name, "t");
        let bad: Value = serde_json::from_str(r#"{"z_order": 3}"#).unwrap();
        assert!(matches!(parse_ring(&bad), Err(TaskError::Schema(_))));
    }

    #[test]
    fn seeds_required_for_suites() {
        let text = format!(r#"{{"ring": {RING}, "tasks": [{{"kind": "verify-identities"}}]}}"#);
        assert!(matches!(parse(&text), Err(TaskError::Schema(_))));
        let text = format!(r#"{{"ring": {RING}, "tasks": [{{"kind": "verify-identities", "seed": 1}}]}}"#);
        assert_eq!(parse(&text).unwrap().tasks[0].name, "00-verify-identities");
    }

    #[test]
    fn unknown_kind() {
        let text = format!(r#"{{"ring": {RING}, "tasks": [{{"kind": "plot"}}]}}"#);
        assert!(matches!(parse(&text), Err(TaskError::Schema(_))));
    }
}
