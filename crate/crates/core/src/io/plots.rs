//! Self-contained matplotlib scripts that read the emitted CSVs.

use std::fs;
use std::path::Path;

use crate::error::Result;

/// Script plotting the standard diagnostics of `series.csv` in `dir`, plus
/// density panels for any `snapshot_*.csv` profiles there.
pub fn series_script(title: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Diagnostics plots for run '{title}'. Run from the output directory.
import csv, glob, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def load(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return {{k: [float(r[k]) for r in rows] for k in rows[0]}}

s = load(os.path.join(here, "series.csv"))
fig, ax = plt.subplots(2, 3, figsize=(13, 7))
for a, key in zip(ax.flat, ["mass", "energy", "entropy", "max_u", "graph_residual", "ckp_gap"]):
    a.plot(s["t"], s[key])
    a.set_title(key)
    a.set_xlabel("t")
fig.suptitle("{title}")
fig.tight_layout()
fig.savefig(os.path.join(here, "diagnostics.png"), dpi=120)

profiles = sorted(glob.glob(os.path.join(here, "profile_*.csv")))
if profiles:
    fig, ax = plt.subplots(1, len(profiles), figsize=(3.2 * len(profiles), 3), sharey=True)
    if len(profiles) == 1:
        ax = [ax]
    for a, path in zip(ax, profiles):
        p = load(path)
        a.plot(p["x"], p["u"])
        a.set_title(os.path.basename(path)[8:-4])
        a.set_xlabel("x")
    ax[0].set_ylabel("u")
    fig.tight_layout()
    fig.savefig(os.path.join(here, "profiles.png"), dpi=120)
"#
    )
}

/// Script for a γ-sweep summary (`sweep_summary.csv`).
pub fn sweep_script() -> String {
    r#"#!/usr/bin/env python3
# Incompressible-limit indicators against gamma.
import csv, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "sweep_summary.csv")) as f:
    rows = list(csv.DictReader(f))
g = [float(r["gamma"]) for r in rows]
fig, ax = plt.subplots(1, 3, figsize=(12, 3.5))
for a, key in zip(ax, ["graph_residual", "complementarity_residual", "pairing"]):
    a.loglog(g, [abs(float(r[key])) for r in rows], "o-")
    a.set_title(key)
    a.set_xlabel("gamma")
fig.tight_layout()
fig.savefig(os.path.join(here, "sweep.png"), dpi=120)
"#
    .to_string()
}

pub fn write_script(path: impl AsRef<Path>, script: &str) -> Result<()> {
    fs::write(path, script)?;
    Ok(())
}
