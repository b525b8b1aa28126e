"""Experiment runner: configs in, verdicts + traces + plots directory out.

Anchors are classified independently (optionally on a thread pool) and the
report is assembled in grid order, so a fixed config and seed reproduce
verdicts.json byte for byte.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .classify import (
    ExperimentConfig,
    STATUS_INCONCLUSIVE,
    classify_point,
    parse_config,
)
from .errors import ConfigParseError
from .models import dump_model
from .resolvent import sandwiched_resolvent
from .serialization import complex_matrix_to_json, complex_vector_to_json

VERDICTS_FILE = "verdicts.json"
CONJECTURES_FILE = "conjectures.json"
RESOLVED_CONFIG_FILE = "config.resolved.json"


@dataclass
class ReportBundle:
    """Everything run_experiment wrote, plus the in-memory verdicts."""

    out_dir: Path
    verdicts: list
    config: ExperimentConfig
    verdict_path: Path
    trace_paths: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if any(v.status == STATUS_INCONCLUSIVE
                        for v in self.verdicts) else 0


class _TraceSink:
    """Writes per-anchor probe and resonance CSV traces under out/traces."""

    def __init__(self, out_dir: Path, tag: str):
        self.out_dir = out_dir
        self.tag = tag

    def __call__(self, lam, probe, track, index_trace, r_grid) -> list:
        written = []
        traces_dir = self.out_dir / "traces"
        traces_dir.mkdir(parents=True, exist_ok=True)
        if probe is not None:
            name = f"traces/{self.tag}_probe.csv"
            self._write_probe(traces_dir / f"{self.tag}_probe.csv",
                              probe, index_trace, r_grid)
            written.append(name)
        if track is not None:
            name = f"traces/{self.tag}_resonances.csv"
            self._write_track(traces_dir / f"{self.tag}_resonances.csv", track)
            written.append(name)
        return written

    @staticmethod
    def _write_probe(path: Path, probe, index_trace, r_grid):
        eig = index_trace.get("eig")
        sn = index_trace.get("s")

        def counts(est, y):
            if est is None:
                return {}
            return {r: c for (yy, r, c) in est.per_y_counts if yy == y}

        header = ["y", "norm", "cauchy_residual"]
        header += [f"eig_count_R{r!r}" for r in r_grid]
        header += [f"s_count_R{r!r}" for r in r_grid]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for idx, y in enumerate(probe.offsets):
                row = [repr(float(y)), repr(probe.norm_trace[idx]),
                       "" if idx == 0 else repr(probe.cauchy_residuals[idx - 1])]
                ce = counts(eig, float(y))
                cs = counts(sn, float(y))
                row += [ce.get(r, "") for r in r_grid]
                row += [cs.get(r, "") for r in r_grid]
                writer.writerow(row)

    @staticmethod
    def _write_track(path: Path, track):
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["y", "j", "re_r", "im_r", "at_infinity",
                             "matching_cost"])
            for step, y in enumerate(track.offsets):
                cost = "" if step == 0 else repr(float(track.matching_cost[step - 1]))
                for jcurve in range(track.curves.shape[0]):
                    value = track.curves[jcurve, step]
                    infinite = not np.isfinite(value)
                    writer.writerow([
                        repr(float(y)), jcurve,
                        "" if infinite else repr(float(value.real)),
                        "" if infinite else repr(float(value.imag)),
                        int(infinite), cost])


def _resolved_config_dict(config: ExperimentConfig) -> dict:
    return {
        "schema": "spectral-lab/experiment/v1",
        "model": dump_model(config.model),
        "lambda_grid": [float(x) for x in config.lambda_grid],
        "path": {"y0": config.path.y0, "ratio": config.path.ratio,
                 "count": config.path.count},
        "r_grid": [float(r) for r in config.r_grid],
        "s_grid": [float(s) for s in config.s_grid],
        "n_max": config.n_max,
        "seed": config.seed,
        "witnesses": {
            "explicit": [complex_matrix_to_json(j) for _, j in config.witnesses],
            "random_count": 0,  # all witnesses materialized above
        },
        "tolerances": {
            "probe": config.tolerances.probe,
            "vanishing": config.tolerances.vanishing,
            "null_space": config.tolerances.null_space,
            "intersection": config.tolerances.intersection,
        },
        "conjecture_psi": [complex_vector_to_json(v)
                           for v in config.conjecture_psi],
    }


def _conjecture_traces(config: ExperimentConfig) -> list:
    """Raw boundary traces of <psi, T_{lam+iy}(H0) psi> per supplied psi.

    Reported verbatim under a "conjecture experiments" label; no verdict is
    attached to these numbers.
    """
    entries = []
    for lam in config.lambda_grid:
        path = config.path_at(lam)
        for p_idx, psi in enumerate(config.conjecture_psi):
            rows = []
            for y in path.offsets():
                t = sandwiched_resolvent(config.model, None,
                                         complex(lam, y)).t
                val = complex(np.vdot(psi, t @ psi))
                rows.append([float(y), val.real, val.imag])
            entries.append({"lambda": float(lam), "psi_index": p_idx,
                            "trace": rows})
    return entries


def run_experiment(config_source, out_dir=None, jobs=None, seed=None) -> ReportBundle:
    """Classify every anchor in the config and write the report bundle.

    config_source: path to a JSON config, or an already parsed mapping /
    ExperimentConfig.  out_dir / seed override the config values; jobs > 1
    classifies anchors on a thread pool (output order stays grid order).
    """
    base_dir = None
    if isinstance(config_source, ExperimentConfig):
        config = config_source
    else:
        if isinstance(config_source, (str, Path)):
            path = Path(config_source)
            try:
                document = json.loads(path.read_text())
            except OSError as exc:
                raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigParseError(
                    f"config {path} is not valid JSON: line {exc.lineno} "
                    f"column {exc.colno}: {exc.msg}") from exc
            base_dir = path.parent
        elif isinstance(config_source, Mapping):
            document = config_source
        else:
            raise ConfigParseError(
                f"unsupported config source {type(config_source).__name__}")
        if seed is not None:
            document = dict(document)
            document["seed"] = int(seed)
        config = parse_config(document, base_dir=base_dir)

    target = Path(out_dir) if out_dir is not None else \
        Path(config.output_dir or "spectral-lab-out")
    target.mkdir(parents=True, exist_ok=True)

    def classify(idx_lam):
        idx, lam = idx_lam
        sink = _TraceSink(target, f"point_{idx:03d}")
        return classify_point(config.model, lam, config, trace_sink=sink)

    items = list(enumerate(config.lambda_grid))
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(classify, items))
    else:
        verdicts = [classify(item) for item in items]

    verdict_path = target / VERDICTS_FILE
    payload = [v.to_json_dict() for v in verdicts]
    verdict_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    (target / RESOLVED_CONFIG_FILE).write_text(
        json.dumps(_resolved_config_dict(config), indent=2, sort_keys=True) + "\n")

    if config.conjecture_psi:
        body = {"schema": "spectral-lab/conjectures/v1",
                "label": "conjecture experiments",
                "entries": _conjecture_traces(config)}
        (target / CONJECTURES_FILE).write_text(
            json.dumps(body, indent=2, sort_keys=True) + "\n")

    trace_paths = sorted(str(p.relative_to(target))
                         for p in (target / "traces").glob("*.csv")) \
        if (target / "traces").exists() else []
    return ReportBundle(out_dir=target, verdicts=verdicts, config=config,
                        verdict_path=verdict_path, trace_paths=trace_paths)
