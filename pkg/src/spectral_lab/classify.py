"""Per-point classification: regular, semi-regular, or singular evidence.

For each real anchor the pipeline (1) probes the boundary limit of the bare
operator, (2) on failure searches the coupling line H0 + s F*F and then a
bank of bounded witnesses for a regular member, and (3) always gathers the
escape indices, resonance trajectories, spectral multiplicity and (on dense
models) the intersection of rigged spectral windows.  Semi-regularity can be
witnessed; essential singularity at finite size can only be evidenced, and
the verdict names say so.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .boundary import (
    BoundaryPath,
    eigenvalue_escape_index,
    probe_limit,
    s_number_escape_index,
)
from .errors import ConfigParseError
from .models import (
    RiggedModel,
    eigenvalue_multiplicity,
    is_dense,
    load_model,
    make_model,
    spectral_diameter,
)
from .resonance import oscillation_measure, trace_resonances, \
    vanishing_resonances
from .serialization import (
    complex_matrix_from_json,
    complex_vector_from_json,
    encode_float,
    real_vector_from_json,
)
from .subspaces import (
    lippmann_schwinger_null_space,
    nested_intersection,
    rigged_window_span,
)

EXPERIMENT_SCHEMA = "spectral-lab/experiment/v1"
VERDICT_SCHEMA = "spectral-lab/verdict/v1"

STATUS_REGULAR = "regular"
STATUS_SEMI_REGULAR = "semi_regular"
STATUS_INCONCLUSIVE = "inconclusive"
STATUS_SINGULAR_EVIDENCE = "essentially_singular_evidence"

# Dyadic window-shrink levels for the nested-range intersection.
WINDOW_LEVELS = 9


@dataclass
class Evidence:
    """Numeric singularity evidence gathered for one anchor."""

    l_hat: float = 0.0
    n_hat: float = 0.0
    vanishing_resonance_count: int = 0
    upsilon_dim: int | None = None
    f_intersection_dim: int | None = None
    oscillation_max: float = 0.0
    eigen_multiplicity_at_lambda: int = 0

    def to_json_dict(self) -> dict:
        return {
            "l_hat": encode_float(self.l_hat),
            "n_hat": encode_float(self.n_hat),
            "vanishing_resonance_count": self.vanishing_resonance_count,
            "upsilon_dim": self.upsilon_dim,
            "f_intersection_dim": self.f_intersection_dim,
            "oscillation_max": encode_float(self.oscillation_max),
            "eigen_multiplicity_at_lambda": self.eigen_multiplicity_at_lambda,
        }


@dataclass
class PointVerdict:
    """Classification record for one real anchor."""

    lam: float
    status: str
    witness: str | None
    evidence: Evidence
    traces: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema": VERDICT_SCHEMA,
            "lambda": self.lam,
            "status": self.status,
            "witness": self.witness,
            "evidence": self.evidence.to_json_dict(),
            "traces": list(self.traces),
            "errors": list(self.errors),
        }


@dataclass
class Tolerances:
    probe: float = 1e-8
    vanishing: float = 1e-3
    null_space: float | None = None   # None -> library default cut
    intersection: float = 1e-8

    def validate(self):
        for name in ("probe", "vanishing", "intersection"):
            if getattr(self, name) <= 0:
                raise ConfigParseError(
                    f"tolerances.{name}: must be positive, got {getattr(self, name)}")
        if self.null_space is not None and self.null_space <= 0:
            raise ConfigParseError(
                f"tolerances.null_space: must be positive or null")


@dataclass
class ExperimentConfig:
    """Validated experiment plan: model, anchors, schedule, grids, witnesses."""

    model: RiggedModel
    lambda_grid: list
    path: BoundaryPath
    r_grid: list
    s_grid: list
    n_max: int
    witnesses: list            # (label, K x K Hermitian ndarray) pairs
    seed: int
    tolerances: Tolerances
    output_dir: str | None = None
    conjecture_psi: list = field(default_factory=list)

    def path_at(self, lam: float) -> BoundaryPath:
        return self.path.at(lam)


def random_witnesses(k: int, count: int, seed: int) -> list:
    """Hermitian Gaussian couplings symmetrized and scaled to unit norm."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        raw = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        j = (raw + raw.conj().T) / 2.0
        j /= np.linalg.norm(j, 2)
        out.append((f"random#{i}", j))
    return out


def _parse_grid(value, where: str) -> list:
    if isinstance(value, Mapping):
        for key in ("start", "stop", "count"):
            if key not in value:
                raise ConfigParseError(f"{where}.{key}: missing field")
        count = int(value["count"])
        if count < 1:
            raise ConfigParseError(f"{where}.count: must be >= 1")
        return [float(x) for x in
                np.linspace(float(value["start"]), float(value["stop"]), count)]
    try:
        return [float(x) for x in real_vector_from_json(value, where)]
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc


def parse_config(document: Mapping, base_dir=None) -> ExperimentConfig:
    """Validate an experiment document and resolve the model and witnesses."""
    if not isinstance(document, Mapping):
        raise ConfigParseError("experiment config must be a JSON object")
    schema = document.get("schema")
    if schema != EXPERIMENT_SCHEMA:
        raise ConfigParseError(
            f"schema: expected {EXPERIMENT_SCHEMA!r}, got {schema!r}")
    if "model" not in document:
        raise ConfigParseError("model: missing field")
    model_doc = document["model"]
    if isinstance(model_doc, str):
        path = Path(base_dir or ".") / model_doc
        try:
            model_doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigParseError(f"model: cannot read {path}: {exc}") from exc
        model = load_model(model_doc)
    elif isinstance(model_doc, Mapping):
        model = load_model(model_doc) if "schema" in model_doc \
            else make_model(model_doc)
    else:
        raise ConfigParseError("model: expected an object or a file path")

    lambda_grid = _parse_grid(document.get("lambda_grid"), "lambda_grid")

    path_doc = document.get("path", {})
    if not isinstance(path_doc, Mapping):
        raise ConfigParseError("path: expected an object")
    try:
        path = BoundaryPath(lam=0.0,
                            y0=float(path_doc.get("y0", 0.1)),
                            ratio=float(path_doc.get("ratio", 0.5)),
                            count=int(path_doc.get("count", 30)))
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"path: {exc}") from exc

    r_grid = _parse_grid(document.get("r_grid", [0.25, 1.0, 4.0, 16.0]), "r_grid")
    if sorted(r_grid) != r_grid or any(r <= 0 for r in r_grid):
        raise ConfigParseError(f"r_grid: must be ascending positive, got {r_grid}")
    s_grid = _parse_grid(
        document.get("s_grid", {"start": -2.0, "stop": 2.0, "count": 41}),
        "s_grid")

    n_max = int(document.get("n_max", min(3, model.aux_dim)))
    if n_max < 1:
        raise ConfigParseError(f"n_max: must be >= 1, got {n_max}")

    seed = int(document.get("seed", 0))
    wit_doc = document.get("witnesses", {"random_count": 3})
    if not isinstance(wit_doc, Mapping):
        raise ConfigParseError("witnesses: expected an object")
    witnesses = []
    k = model.aux_dim
    for i, mat in enumerate(wit_doc.get("explicit", [])):
        try:
            j = complex_matrix_from_json(mat, f"witnesses.explicit[{i}]")
        except ValueError as exc:
            raise ConfigParseError(str(exc)) from exc
        if j.shape != (k, k):
            raise ConfigParseError(
                f"witnesses.explicit[{i}]: expected {k}x{k}, got {j.shape}")
        witnesses.append((f"explicit#{i}", (j + j.conj().T) / 2.0))
    random_count = int(wit_doc.get("random_count", 0))
    if random_count < 0:
        raise ConfigParseError("witnesses.random_count: must be >= 0")
    witnesses.extend(random_witnesses(k, random_count, seed))

    tol_doc = document.get("tolerances", {})
    if not isinstance(tol_doc, Mapping):
        raise ConfigParseError("tolerances: expected an object")
    tolerances = Tolerances(
        probe=float(tol_doc.get("probe", 1e-8)),
        vanishing=float(tol_doc.get("vanishing", 1e-3)),
        null_space=(None if tol_doc.get("null_space") is None
                    else float(tol_doc["null_space"])),
        intersection=float(tol_doc.get("intersection", 1e-8)))
    tolerances.validate()

    psi = []
    for i, vec in enumerate(document.get("conjecture_psi", [])):
        try:
            v = complex_vector_from_json(vec, f"conjecture_psi[{i}]")
        except ValueError as exc:
            raise ConfigParseError(str(exc)) from exc
        if v.size != k:
            raise ConfigParseError(
                f"conjecture_psi[{i}]: expected length {k}, got {v.size}")
        psi.append(v)

    output_dir = document.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigParseError("output_dir: expected a string")

    return ExperimentConfig(model=model, lambda_grid=lambda_grid, path=path,
                            r_grid=r_grid, s_grid=s_grid, n_max=n_max,
                            witnesses=witnesses, seed=seed,
                            tolerances=tolerances, output_dir=output_dir,
                            conjecture_psi=psi)


def window_deltas(model: RiggedModel) -> list:
    """Dyadic window half-widths delta0 * 2^-i, delta0 = spectral diameter / 4."""
    diameter = spectral_diameter(model)
    delta0 = diameter / 4.0 if diameter > 0 else 1.0
    return [delta0 * 2.0 ** (-i) for i in range(WINDOW_LEVELS)]


def _squeeze_intersection(model, lam, tol) -> int:
    spans = [rigged_window_span(model, lam, d) for d in window_deltas(model)]
    meet = nested_intersection(spans, tol=tol)
    return meet.dim


def classify_point(model: RiggedModel, lam: float, config: ExperimentConfig,
                   trace_sink=None) -> PointVerdict:
    """Run the full diagnostic pipeline at one anchor.

    Every stage failure is recorded on the verdict and the remaining stages
    still run.  `trace_sink`, when given, receives the probe trace and the
    resonance track for CSV export and returns relative file names.
    """
    lam = float(lam)
    path = config.path_at(lam)
    tols = config.tolerances
    k = model.aux_dim
    errors = []
    evidence = Evidence()
    status = None
    witness_label = None
    witness_matrix = None
    witness_verdict = None

    # Stage 1: bare probe.
    probe0 = None
    try:
        probe0 = probe_limit(model, None, path, tol=tols.probe)
        if probe0.converged:
            status = STATUS_REGULAR
            witness_matrix = np.zeros((k, k))
            witness_verdict = probe0
    except Exception as exc:
        errors.append(f"probe[J=0]: {exc}")

    # Stage 2: witness search along the coupling line, then the bank.
    if status is None:
        candidates = [(f"s={s}", s * np.eye(k))
                      for s in config.s_grid if s != 0.0]  # J=0 already probed
        candidates.extend(config.witnesses)
        for label, j in candidates:
            try:
                verdict = probe_limit(model, j, path, tol=tols.probe)
            except Exception as exc:
                errors.append(f"probe[{label}]: {exc}")
                continue
            if verdict.converged:
                status = STATUS_SEMI_REGULAR
                witness_label = label
                witness_matrix = j
                witness_verdict = verdict
                break

    # Regularized eigenspace through the convergent witness (J=0 when regular).
    if witness_verdict is not None:
        try:
            space = lippmann_schwinger_null_space(witness_verdict,
                                                  witness_matrix,
                                                  tol=tols.null_space)
            evidence.upsilon_dim = space.dim
        except Exception as exc:
            errors.append(f"upsilon[{witness_label or 'J=0'}]: {exc}")

    # Stage 3: evidence gathered regardless of the outcome so far.
    index_trace = {}
    try:
        est_l = eigenvalue_escape_index(model, None, lam, config.r_grid,
                                        config.n_max, path)
        evidence.l_hat = est_l.value
        index_trace["eig"] = est_l
    except Exception as exc:
        errors.append(f"l_hat: {exc}")
    try:
        est_n = s_number_escape_index(model, None, lam, config.r_grid,
                                      config.n_max, path)
        evidence.n_hat = est_n.value
        index_trace["s"] = est_n
    except Exception as exc:
        errors.append(f"n_hat: {exc}")

    track = None
    try:
        track = trace_resonances(model, path)
        evidence.vanishing_resonance_count = len(
            vanishing_resonances(track, tols.vanishing))
        tail = min(5, path.count)
        evidence.oscillation_max = float(oscillation_measure(track, tail).max())
    except Exception as exc:
        errors.append(f"resonances: {exc}")

    try:
        evidence.eigen_multiplicity_at_lambda = eigenvalue_multiplicity(model, lam)
    except Exception as exc:
        errors.append(f"multiplicity: {exc}")

    if is_dense(model):
        try:
            evidence.f_intersection_dim = _squeeze_intersection(
                model, lam, tols.intersection)
        except Exception as exc:
            errors.append(f"f_intersection: {exc}")

    # Stage 4: resolve the status from the evidence when no witness worked.
    if status is None:
        ambient = model.ambient_dim
        multiplicity_heavy = (
            ambient is not None
            and evidence.eigen_multiplicity_at_lambda
            >= max(2, math.ceil(ambient / 2)))
        f_heavy = (evidence.f_intersection_dim is not None
                   and evidence.f_intersection_dim >= k / 2)
        if (evidence.l_hat > 0 or evidence.n_hat > 0 or f_heavy
                or multiplicity_heavy):
            status = STATUS_SINGULAR_EVIDENCE
        else:
            status = STATUS_INCONCLUSIVE

    verdict = PointVerdict(lam=lam, status=status, witness=witness_label,
                           evidence=evidence, errors=errors)
    if trace_sink is not None:
        verdict.traces = trace_sink(lam=lam, probe=probe0, track=track,
                                    index_trace=index_trace,
                                    r_grid=config.r_grid)
    return verdict
