use std::path::{Path, PathBuf};

use crate::error::HarnessError;

const TEMPLATE: &str = r#"#!/usr/bin/env python3
"""Regret and constraint violation with 95% bands, from an aggregate CSV."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
AGGREGATE = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, {path})
OUTPUT = sys.argv[2] if len(sys.argv) > 2 else AGGREGATE.rsplit(".", 1)[0] + ".png"

cols = {
    "k": [],
    "cum_regret_mean": [],
    "cum_regret_lo": [],
    "cum_regret_hi": [],
    "cum_violation_mean": [],
    "cum_violation_lo": [],
    "cum_violation_hi": [],
}
with open(AGGREGATE, newline="") as fh:
    for row in csv.DictReader(fh):
        for name in cols:
            cols[name].append(float(row[name]))

fig, (ax_r, ax_v) = plt.subplots(1, 2, figsize=(10, 4))
panels = [
    (ax_r, "cum_regret", "Regret"),
    (ax_v, "cum_violation", "Constraint violation"),
]
for ax, key, title in panels:
    ax.plot(cols["k"], cols[key + "_mean"], color="tab:blue")
    ax.fill_between(cols["k"], cols[key + "_lo"], cols[key + "_hi"], color="tab:blue", alpha=0.25)
    ax.set_xlabel("episode k")
    ax.set_title(title)
    ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(OUTPUT, dpi=150)
print(OUTPUT)
"#;

/// Writes a standalone matplotlib script that renders the two-panel
/// regret/violation figure from `aggregate`.
pub fn emit_plot_script(aggregate: &Path, script: &Path) -> Result<PathBuf, HarnessError> {
    if !aggregate.is_file() {
        return Err(HarnessError::Io {
            path: aggregate.to_owned(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "aggregate CSV not found"),
        });
    }
    // Relative to the script so the output directory can be moved.
    let default = match (aggregate.parent(), script.parent()) {
        (Some(a), Some(s)) if a == s => aggregate.file_name().map(|n| Path::new(n).to_owned()),
        _ => None,
    }
    .unwrap_or_else(|| aggregate.canonicalize().unwrap_or_else(|_| aggregate.to_owned()));
    let literal = python_string(&default.to_string_lossy());
    let body = TEMPLATE.replace("{path}", &literal);
    std::fs::write(script, body).map_err(|source| HarnessError::Io {
        path: script.to_owned(),
        source,
    })?;
    Ok(script.to_owned())
}

fn python_string(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}
