"""Generate standalone matplotlib scripts for experiment CSVs; nothing is rendered here."""

from __future__ import annotations

from pathlib import Path

_HEADER = '''"""Render the CSV artifacts of one experiment. Generated file; needs matplotlib."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def read(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {k: [] for k in rows[0]} if rows else {}
    for r in rows:
        for k, v in r.items():
            try:
                cols[k].append(float(v))
            except ValueError:
                cols[k].append(float("nan"))
    return cols

'''

_BODIES = {
    "mutual-info-curve": '''
fig, ax = plt.subplots(figsize=(6, 4))
for name in FILES:
    c = read(name)
    label = name.removeprefix("info_sigma_").removesuffix(".csv")
    ax.plot(c["t"], c["J"], label=f"sigma = {label}")
ax.axhline(c["H0"][0], color="grey", lw=0.8, ls=":")
ax.set_xlabel("t")
ax.set_ylabel("J (nats)")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "mutual_information.png", dpi=150)
''',
    "sample-paths": '''
rows = [n for n in FILES if n.startswith("paths_row")]
fig, axes = plt.subplots(len(rows), 2, figsize=(10, 3.5 * len(rows)), squeeze=False)
for r, name in enumerate(rows):
    c = read(name)
    for col in c:
        if col == "t":
            continue
        side = 0 if col.startswith("market_") else 1
        axes[r, side].plot(c["t"], c[col], label=col.split("_", 1)[1])
    axes[r, 0].set_title(f"row {r}: market price")
    axes[r, 1].set_title(f"row {r}: informed valuation")
    for ax in axes[r]:
        ax.set_xlabel("t")
        ax.legend()
fig.tight_layout()
fig.savefig(HERE / "sample_paths.png", dpi=150)
''',
    "averaged-paths": '''
rows = [n for n in FILES if n.startswith("averaged_row")]
fig, axes = plt.subplots(1, len(rows), figsize=(5 * len(rows), 4), squeeze=False)
for r, name in enumerate(rows):
    c = read(name)
    ax = axes[0, r]
    for col in c:
        if col != "t":
            ax.plot(c["t"], c[col], ls="-" if col.startswith("market_") else "--", label=col)
    ax.set_xlabel("t")
    ax.set_title(f"row {r}")
    ax.legend()
fig.tight_layout()
fig.savefig(HERE / "averaged_paths.png", dpi=150)
''',
    "delta-J-curve": '''
c = read("info_deltaJ.csv")
q = read("deltaJ_quadrature.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.errorbar(c["t"], c["deltaJ"], yerr=[3 * s for s in c["se_deltaJ"]], fmt="o", ms=3, label="paired Monte Carlo")
ax.plot(q["t"], q["deltaJ"], label="quadrature")
ax.set_xlabel("t")
ax.set_ylabel("delta J (nats)")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "delta_J.png", dpi=150)
''',
    "pnl-backtest": '''
c = read("pnl.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.errorbar(c["t"], c["diff"], yerr=[3 * s for s in c["se"]], fmt="o-", ms=3)
ax.axhline(0, color="grey", lw=0.8)
ax.set_xlabel("decision time t")
ax.set_ylabel("informed - market total P&L")
fig.tight_layout()
fig.savefig(HERE / "pnl_difference.png", dpi=150)
''',
    "invariant-suite": '''
with open(HERE / "invariants.csv", newline="") as fh:
    rows = list(csv.DictReader(fh))
fig, ax = plt.subplots(figsize=(7, 0.35 * len(rows) + 1))
ax.barh(range(len(rows)), [1] * len(rows), color=["tab:green" if r["passed"] == "True" else "tab:red" for r in rows])
ax.set_yticks(range(len(rows)), [r["check"] for r in rows])
ax.set_xticks([])
fig.tight_layout()
fig.savefig(HERE / "invariants.png", dpi=150)
''',
}


def emit_plot_script(artifacts, kind: str, script_path) -> Path:
    """Write a plotting script for ``artifacts`` (CSV paths) next to them and return its path."""
    artifacts = [Path(a) for a in artifacts]
    if not artifacts:
        raise ValueError("no artifacts to plot")
    missing = [str(a) for a in artifacts if not a.exists()]
    if missing:
        raise FileNotFoundError("expected artifacts are missing: " + ", ".join(missing))
    if kind not in _BODIES:
        raise ValueError(f"no plot template for kind {kind!r}")
    names = [a.name for a in artifacts if a.suffix == ".csv"]
    script = Path(script_path)
    script.write_text(_HEADER + f"FILES = {names!r}\n" + _BODIES[kind])
    return script
