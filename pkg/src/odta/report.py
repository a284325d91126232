"""Aggregation of trial metrics into summary and comparison tables.

Input is the per-trial metrics CSV (one row per seed, policy, scenario
cell). Summaries carry mean and standard deviation per (policy, fleet,
deadline_mode, n_requests) cell. Policy pairs are compared with the
symmetric percentage difference |a - b| / ((a + b) / 2) * 100, averaged
over the low and high request-count bands; the symmetric form is used
because plain ratios cannot exceed 100% while observed gaps do. The
report path also renders the headline trend figures next to the tables.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import pandas as pd

SUMMARY_COLUMNS = (
    "policy", "fleet", "deadline_mode", "n_requests", "trials",
    "mean_penalty_s", "std_penalty_s", "mean_rejected", "std_rejected",
    "mean_completed",
)

PERCDIFF_COLUMNS = (
    "policy_a", "policy_b", "fleet", "deadline_mode", "band",
    "pct_diff_rejected", "pct_diff_penalty",
)

# Written atop the difference table so the convention travels with it.
PERCDIFF_NOTE = "# symmetric percentage difference |a-b|/((a+b)/2)*100, averaged over each band"

# Request-count bands mirror the low- and high-load halves of the
# scenario sweep; 160 belongs to both.
BANDS = (("40-160", 40, 160), ("160-280", 160, 280))

_CELL = ["policy", "fleet", "deadline_mode", "n_requests"]


def load_metrics(source: str | Path) -> pd.DataFrame:
    """Read one metrics CSV, or every metrics*.csv under a directory."""
    src = Path(source)
    if src.is_dir():
        paths = sorted(src.glob("metrics*.csv"))
        if not paths:
            raise FileNotFoundError("no metrics*.csv under %s" % src)
    else:
        if not src.is_file():
            raise FileNotFoundError(str(src))
        paths = [src]
    frames = [pd.read_csv(p) for p in paths]
    df = pd.concat(frames, ignore_index=True)
    if df.empty:
        raise ValueError("metrics input is empty")
    return df


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """Mean/std per scenario cell, one row per cell, stable order."""
    grouped = df.groupby(_CELL, as_index=False).agg(
        trials=("seed", "size"),
        mean_penalty_s=("cum_penalty_s", "mean"),
        std_penalty_s=("cum_penalty_s", "std"),
        mean_rejected=("rejected", "mean"),
        std_rejected=("rejected", "std"),
        mean_completed=("completed", "mean"),
    )
    grouped[["std_penalty_s", "std_rejected"]] = grouped[
        ["std_penalty_s", "std_rejected"]
    ].fillna(0.0)
    return grouped.sort_values(_CELL, kind="mergesort").reset_index(drop=True)


def symmetric_pct_diff(a: float, b: float) -> float:
    """|a - b| over the midpoint, as a percentage; 0 when both are 0."""
    mid = (a + b) / 2.0
    if mid == 0.0:
        return 0.0
    return abs(a - b) / mid * 100.0


def policy_differences(summary: pd.DataFrame) -> pd.DataFrame:
    """Banded pairwise policy gaps. Per request count the two policies'
    cell means feed the symmetric difference; band values average those
    per-count differences."""
    rows = []
    policies = sorted(summary["policy"].unique())
    for pol_a, pol_b in itertools.combinations(policies, 2):
        for (fleet, mode), cell in summary.groupby(["fleet", "deadline_mode"]):
            a = cell[cell["policy"] == pol_a].set_index("n_requests")
            b = cell[cell["policy"] == pol_b].set_index("n_requests")
            shared = a.index.intersection(b.index)
            for label, lo, hi in BANDS:
                ns = [n for n in shared if lo <= n <= hi]
                if not ns:
                    continue
                rej = [symmetric_pct_diff(a.loc[n, "mean_rejected"], b.loc[n, "mean_rejected"]) for n in ns]
                pen = [symmetric_pct_diff(a.loc[n, "mean_penalty_s"], b.loc[n, "mean_penalty_s"]) for n in ns]
                rows.append((pol_a, pol_b, fleet, mode, label,
                             math.fsum(rej) / len(rej), math.fsum(pen) / len(pen)))
    return pd.DataFrame(rows, columns=list(PERCDIFF_COLUMNS))


def render_figures(summary: pd.DataFrame, out_dir: str | Path) -> list[Path]:
    """Mean rejected and mean penalty against request count, one figure
    per fleet and measure, written as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    measures = (
        ("mean_rejected", "mean rejected requests", "rejected"),
        ("mean_penalty_s", "mean cumulative penalty (s)", "penalty"),
    )
    for fleet, per_fleet in summary.groupby("fleet"):
        for column, ylabel, stem in measures:
            fig, ax = plt.subplots(figsize=(6.0, 4.0))
            for (policy, mode), cell in per_fleet.groupby(["policy", "deadline_mode"]):
                cell = cell.sort_values("n_requests")
                ax.plot(cell["n_requests"], cell[column], marker="o",
                        label="%s %s" % (policy, mode))
            ax.set_xlabel("requests per trial")
            ax.set_ylabel(ylabel)
            ax.set_title(str(fleet))
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize=8)
            fig.tight_layout()
            path = out / ("%s_%s.png" % (stem, fleet))
            fig.savefig(path, dpi=120, metadata={"Software": "odta"})
            plt.close(fig)
            written.append(path)
    return written


def write_report(df: pd.DataFrame, out_dir: str | Path, figures: bool = True) -> dict[str, object]:
    """Summary CSV, policy-difference CSV, and trend figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(df)
    diffs = policy_differences(summary)
    summary_path = out / "summary.csv"
    percdiff_path = out / "percdiff.csv"
    summary.to_csv(summary_path, index=False)
    with open(percdiff_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(PERCDIFF_NOTE + "\n")
        diffs.to_csv(fh, index=False)
    paths: dict[str, object] = {"summary": summary_path, "percdiff": percdiff_path}
    if figures:
        paths["figures"] = render_figures(summary, out)
    return paths
