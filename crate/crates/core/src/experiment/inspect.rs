use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Human-readable digest of an artifact directory's `summary.json`.
pub fn inspect(dir: impl AsRef<Path>) -> Result<String> {
    let path = dir.as_ref().join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let s: Value = serde_json::from_str(&text)?;
    let mut out = String::new();
    let mut line = |label: &str, value: String| {
        let _ = writeln!(out, "{label:<22} {value}");
    };
    let show = |v: &Value| match v {
        Value::Null => "-".to_string(),
        Value::String(x) => x.clone(),
        other => other.to_string(),
    };
    line("run_id", show(&s["run_id"]));
    line("config_hash", show(&s["config_hash"]));
    line("halt", show(&s["halt"]["reason"]));
    line(
        "rounds",
        format!(
            "{} of {}",
            show(&s["rounds_completed"]),
            show(&s["rounds_requested"])
        ),
    );
    line(
        "examples",
        format!(
            "{} train, {} test",
            show(&s["train_examples"]),
            show(&s["test_examples"])
        ),
    );
    line(
        "stumps / rows",
        format!("{} / {}", show(&s["stumps"]), show(&s["rows"])),
    );
    line(
        "min error",
        format!(
            "{} overall, {} after round {}",
            show(&s["min_error"]["overall"]),
            show(&s["min_error"]["after_burn_in"]),
            show(&s["min_error"]["burn_in"])
        ),
    );
    if let Some((t, m)) = s["margins"]["min_margin_trace"]
        .as_array()
        .and_then(|a| a.last())
        .and_then(|p| Some((p.get(0)?, p.get(1)?)))
    {
        line("min margin", format!("{} at T={}", show(m), show(t)));
    }
    if let Some(d) = s["frequency_drift"].as_object() {
        line(
            "frequency drift",
            format!("{} (L1, T/2 to T)", show(&d["l1_count"])),
        );
    }
    if let Some(a) = s["selection_frequencies"].as_array() {
        line("rows selected", a.len().to_string());
    }
    if let Some(sv) = s["support_vectors"].as_object() {
        let size = sv["support_set"].as_array().map_or(0, Vec::len);
        line(
            "support vectors",
            format!("{size} (criteria agree: {})", show(&sv["criteria_agree"])),
        );
    }
    if let Some(c) = s["cycle"].as_object() {
        let text = match &c["detected"] {
            Value::Null => "none".to_string(),
            d => format!(
                "period {} from round {} (verified: {})",
                show(&d["period"]),
                show(&d["start"]),
                show(&c["verified"])
            ),
        };
        line("cycle", text);
    }
    if let Some(te) = s["test_error"].as_object() {
        line(
            "test error",
            format!(
                "{} final, tail std {}",
                show(&te["final_error"]),
                show(&te["tail_std"])
            ),
        );
    }
    if let Some(files) = s["artifacts"].as_array() {
        line("artifacts", files.len().to_string());
    }
    Ok(out)
}
