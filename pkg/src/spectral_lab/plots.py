"""Best-effort SVG rendering of a report directory.

Per anchor: log-log norm trace, resonance trajectories with the vanishing
disk, and a singular-value count heat map over (y, R).  Missing traces are
skipped with a note rather than failing the run.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path: Path):
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def _floats(rows, col):
    out = []
    for row in rows:
        try:
            out.append(float(row[col]))
        except (ValueError, IndexError):
            out.append(np.nan)
    return np.array(out)


def emit_plots(report_dir) -> list:
    """Render plots/<tag>.svg for every traced anchor in the report."""
    report_dir = Path(report_dir)
    verdict_path = report_dir / "verdicts.json"
    if not verdict_path.exists():
        raise FileNotFoundError(f"no verdicts.json under {report_dir}")
    verdicts = json.loads(verdict_path.read_text())
    vanishing_tol = 1e-3
    resolved = report_dir / "config.resolved.json"
    if resolved.exists():
        vanishing_tol = json.loads(resolved.read_text()) \
            .get("tolerances", {}).get("vanishing", 1e-3)

    written = []
    plots_dir = report_dir / "plots"
    for verdict in verdicts:
        traces = verdict.get("traces", [])
        probe = next((t for t in traces if t.endswith("_probe.csv")), None)
        track = next((t for t in traces if t.endswith("_resonances.csv")), None)
        if probe is None and track is None:
            print(f"note: no traces for lambda={verdict.get('lambda')}, skipped")
            continue
        tag = Path(probe or track).name.rsplit("_", 1)[0]
        plots_dir.mkdir(parents=True, exist_ok=True)
        fig, axes = plt.subplots(1, 3, figsize=(13, 4))
        fig.suptitle(f"lambda = {verdict.get('lambda')}  "
                     f"[{verdict.get('status')}]")

        if probe is not None and (report_dir / probe).exists():
            header, rows = _read_csv(report_dir / probe)
            y = _floats(rows, header.index("y"))
            norm = _floats(rows, header.index("norm"))
            axes[0].loglog(y, norm, "o-", ms=3)
            axes[0].set_xlabel("y")
            axes[0].set_ylabel("||T||")
            axes[0].set_title("norm trace")
            axes[0].invert_xaxis()

            s_cols = [(i, h) for i, h in enumerate(header)
                      if h.startswith("s_count_R")]
            if s_cols:
                grid = np.array([_floats(rows, i) for i, _ in s_cols])
                im = axes[2].imshow(grid, aspect="auto", origin="lower",
                                    cmap="viridis")
                axes[2].set_xticks(range(0, len(y), max(1, len(y) // 6)))
                axes[2].set_xticklabels([f"{v:.1e}" for v in
                                         y[::max(1, len(y) // 6)]], fontsize=6)
                axes[2].set_yticks(range(len(s_cols)))
                axes[2].set_yticklabels([h.split("R", 1)[1]
                                         for _, h in s_cols], fontsize=7)
                axes[2].set_xlabel("y")
                axes[2].set_ylabel("R")
                axes[2].set_title("s-number counts")
                fig.colorbar(im, ax=axes[2], shrink=0.8)
        else:
            print(f"note: probe trace missing for {tag}, panel skipped")

        if track is not None and (report_dir / track).exists():
            header, rows = _read_csv(report_dir / track)
            jcol = header.index("j")
            curves = {}
            for row in rows:
                curves.setdefault(int(row[jcol]), []).append(row)
            for jcurve, pts in sorted(curves.items()):
                re = _floats(pts, header.index("re_r"))
                im = _floats(pts, header.index("im_r"))
                axes[1].plot(re, im, ".-", ms=2, lw=0.7, label=f"r_{jcurve}")
            disk = plt.Circle((0, 0), vanishing_tol, color="red", fill=False,
                              ls="--", lw=0.8)
            axes[1].add_patch(disk)
            axes[1].set_xlabel("Re r")
            axes[1].set_ylabel("Im r")
            axes[1].set_title("resonance trajectories")
            if len(curves) <= 8:
                axes[1].legend(fontsize=6)
            axes[1].axis("equal")
        else:
            print(f"note: resonance trace missing for {tag}, panel skipped")

        out = plots_dir / f"{tag}.svg"
        fig.tight_layout()
        fig.savefig(out, format="svg")
        plt.close(fig)
        written.append(out)
    return written
