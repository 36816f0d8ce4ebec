//! Task runner behind the `cartan` binary.

pub mod exec;
pub mod explain;
pub mod shipped;
pub mod task;

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use cartan_core::conn::stamp_of;
use cartan_core::report::Check;
use rayon::prelude::*;
use serde_json::{json, Value};

use task::{Task, TaskError, TaskFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Precondition,
    Schema,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "residual-failure",
            Status::Precondition => "precondition-failure",
            Status::Schema => "schema-error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Schema => 2,
            Status::Precondition => 3,
        }
    }
}

pub struct TaskResult {
    pub name: String,
    pub status: Status,
    pub failing: Vec<String>,
    pub report: Value,
}

/// Worst status across tasks: schema errors, then preconditions, then residuals.
pub fn overall(results: &[TaskResult]) -> Status {
    results.iter().map(|r| r.status).max().unwrap_or(Status::Pass)
}

fn check_json(c: &Check, stamp: &str) -> Value {
    json!({
        "name": c.name,
        "checked": c.checked,
        "zero_residuals": c.zero_count(),
        "failed": c.failed,
        "passed": c.passed(),
        "stamp": c.stamp.clone().unwrap_or_else(|| stamp.to_string()),
        "failures": c.failures,
    })
}

pub fn run_task(t: &Task, file: &TaskFile) -> TaskResult {
    let stamp = stamp_of(&file.ring);
    let mut report = json!({
        "task": t.name,
        "kind": t.kind,
        "seed": t.seed,
        "params": t.params,
        "stamp": stamp,
    });
    let (status, failing) = match exec::execute(t, &file.inputs, &file.ring) {
        Ok(out) => {
            let failing: Vec<String> = out.report.failing().into_iter().map(String::from).collect();
            report["checks"] = Value::Array(out.report.checks.iter().map(|c| check_json(c, &stamp)).collect());
            report["data"] = out.data;
            (if failing.is_empty() { Status::Pass } else { Status::Fail }, failing)
        }
        Err(e) => {
            report["error"] = json!(e.to_string());
            (if matches!(e, TaskError::Schema(_)) { Status::Schema } else { Status::Precondition }, vec![])
        }
    };
    report["status"] = json!(status.as_str());
    report["passed"] = json!(status == Status::Pass);
    TaskResult { name: t.name.clone(), status, failing, report }
}

/// Writes to a temporary sibling, then renames over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().context("report path has no parent")?;
    let tmp = dir.join(format!(".{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("report")));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn render(report: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// Runs every task of `file` on `jobs` threads (0: rayon default) and writes
/// `<out>/<task>.json` for each.
pub fn run_file(file: &TaskFile, out: &Path, jobs: usize) -> anyhow::Result<Vec<TaskResult>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<anyhow::Result<TaskResult>> = pool.install(|| {
        file.tasks
            .par_iter()
            .map(|t| {
                let r = run_task(t, file);
                write_atomic(&out.join(format!("{}.json", t.name)), &render(&r.report))?;
                Ok(r)
            })
            .collect()
    });
    results.into_iter().collect()
}

/// A path, or the name of a shipped task file.
pub fn load(spec: &str) -> Result<String, TaskError> {
    match fs::read_to_string(spec) {
        Ok(t) => Ok(t),
        Err(e) => shipped::get(spec).map(String::from).ok_or_else(|| task::schema(format!("cannot read `{spec}`: {e}"))),
    }
}

pub fn parse_with_override(text: &str, seed_override: Option<u64>) -> Result<TaskFile, TaskError> {
    let mut f = task::parse(text)?;
    if let Some(s) = seed_override {
        for t in &mut f.tasks {
            t.seed = Some(s);
        }
    }
    Ok(f)
}

pub fn list_fixtures() -> String {
    let mut s = String::new();
    s.push_str(&format!("categories: {}\n", exec::CATEGORIES.join(", ")));
    s.push_str(&format!("hypercommutative algebras: {}\n", exec::HYPERCOMS.join(", ")));
    s.push_str(&format!("calculi: {}\n", exec::CALCULI.join(", ")));
    s.push_str(&format!("task kinds: {}\n", task::KINDS.join(", ")));
    s.push_str("shipped task files:\n");
    for (name, text) in shipped::SHIPPED {
        let tasks = task::parse(text).map(|f| f.tasks.iter().map(|t| format!("{} ({})", t.name, t.kind)).collect::<Vec<_>>().join(", ")).unwrap_or_default();
        s.push_str(&format!("  {name}: {tasks}\n"));
    }
    s
}
