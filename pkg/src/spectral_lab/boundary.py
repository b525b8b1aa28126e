"""Boundary limits of sandwiched resolvents along vertical schedules.

The spectral parameter descends along z_k = lam + i * y0 * q^k.  A probe
declares norm convergence from the Cauchy tail of the trace; escape indices
count how many eigenvalues (or singular values) leave every disk as the
boundary is approached, with the norm trace gating what counts as growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    NearSingularSolveError,
    NotAtEigenvalueError,
    ScheduleTooShortError,
)
from .models import BlockEigenvalueModel, RiggedModel
from .resolvent import eigenvalues, s_numbers, sandwiched_resolvent

# Number of trailing schedule points inspected for growth/tail statistics.
TAIL_WINDOW = 5
# Norm must climb by at least this factor across the tail window to count as
# growth; a convergent trace settles to ratio 1.
GROWTH_FACTOR = 1.5


@dataclass(frozen=True)
class BoundaryPath:
    """Anchor lam with geometric offsets y0 * ratio^k, k = 0..count-1."""

    lam: float
    y0: float = 0.1
    ratio: float = 0.5
    count: int = 30

    def __post_init__(self):
        if self.y0 <= 0:
            raise ValueError(f"y0 must be positive, got {self.y0}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")
        if self.count < 3:
            raise ValueError(f"count must be >= 3, got {self.count}")

    def offsets(self) -> np.ndarray:
        return self.y0 * self.ratio ** np.arange(self.count)

    def at(self, lam: float) -> "BoundaryPath":
        """Same schedule re-anchored at a different real number."""
        return replace(self, lam=float(lam))


@dataclass
class LimitVerdict:
    """Outcome of driving T_{lam+iy} toward the real axis."""

    converged: bool
    limit_estimate: np.ndarray | None
    cauchy_residuals: list
    norm_trace: list
    lam: float
    offsets: np.ndarray
    tol: float

    @property
    def final_residual(self) -> float:
        return self.cauchy_residuals[-1]


def probe_limit(model: RiggedModel, j, path: BoundaryPath,
                tol: float = 1e-8) -> LimitVerdict:
    """Detect the norm limit of T_{lam+iy}(H0 + F*JF) as y -> 0+.

    Convergence requires the last three Cauchy residuals to sit below
    tol * (1 + ||T_last||) and to be non-increasing.  The estimate is the
    sandwich at the smallest offset, converged or not.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    ys = path.offsets()
    traces = []
    for y in ys:
        try:
            traces.append(sandwiched_resolvent(model, j, complex(path.lam, y)).t)
        except NearSingularSolveError as exc:
            raise NearSingularSolveError(
                f"solve failed at y={y:.3e} along the schedule for "
                f"lam={path.lam}: {exc}", condition=exc.condition,
                y=float(y)) from exc
    norms = [float(np.linalg.norm(t, 2)) for t in traces]
    residuals = [float(np.linalg.norm(b - a, 2))
                 for a, b in zip(traces, traces[1:])]
    last3 = residuals[-3:]
    threshold = tol * (1.0 + norms[-1])
    converged = (len(last3) == 3
                 and all(r <= threshold for r in last3)
                 and last3[0] >= last3[1] >= last3[2])
    return LimitVerdict(converged=converged, limit_estimate=traces[-1],
                        cauchy_residuals=residuals, norm_trace=norms,
                        lam=path.lam, offsets=ys, tol=tol)


@dataclass
class IndexEstimate:
    """Escape-index evidence over a (y, R) grid.

    value is 0.0 (bounded), a finite grid radius, or math.inf when counts keep
    pace with a growing norm trace at the largest radius.  per_y_counts holds
    (y, R, count) rows; monotone_growth records whether the norm trace grew
    through the tail window.
    """

    value: float
    per_y_counts: list
    monotone_growth: bool

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def counts_for(self, r: float) -> list:
        return [c for (_, rr, c) in self.per_y_counts if rr == r]


def _escape_index(moduli_of, model, j, lam, r_grid, n_max, path,
                  growth_factor=GROWTH_FACTOR) -> IndexEstimate:
    r_grid = [float(r) for r in r_grid]
    if not r_grid or any(r <= 0 for r in r_grid) or sorted(r_grid) != r_grid:
        raise ValueError(f"r_grid must be ascending positive reals: {r_grid}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    path = path.at(lam)
    if path.count < TAIL_WINDOW:
        raise ScheduleTooShortError(
            f"need at least {TAIL_WINDOW} offsets, got {path.count}")
    ys = path.offsets()
    norms = []
    counts = {r: [] for r in r_grid}
    table = []
    for y in ys:
        t = sandwiched_resolvent(model, j, complex(lam, y)).t
        vals = np.abs(moduli_of(t))
        norms.append(float(np.linalg.norm(t, 2)))
        for r in r_grid:
            c = int(np.sum(vals >= r))
            counts[r].append(c)
            table.append((float(y), r, c))

    tail_norms = norms[-TAIL_WINDOW:]
    strictly_up = all(b > a for a, b in zip(tail_norms, tail_norms[1:]))
    grew = strictly_up and tail_norms[-1] >= growth_factor * tail_norms[0]

    def qualifies(r: float) -> bool:
        seq = counts[r]
        tail = seq[-TAIL_WINDOW:]
        non_decreasing = all(b >= a for a, b in zip(tail, tail[1:]))
        return (grew and non_decreasing
                and seq[-1] >= n_max and seq[-2] >= n_max)

    qualifying = [r for r in r_grid if qualifies(r)]
    if not qualifying:
        value = 0.0
    elif qualifying[-1] == r_grid[-1]:
        # counts keep pace out to the largest disk while the norm grows
        value = math.inf
    else:
        value = qualifying[-1]
    return IndexEstimate(value=value, per_y_counts=table, monotone_growth=grew)


def eigenvalue_escape_index(model: RiggedModel, j, lam: float, r_grid,
                            n_max: int, path: BoundaryPath) -> IndexEstimate:
    """How many eigenvalues of T_{lam+iy} escape each disk |mu| >= R.

    Returns math.inf evidence when at least n_max eigenvalues sit outside the
    largest grid radius at the schedule tail while the norm trace keeps
    growing; exactly 0.0 for bounded traces.
    """
    return _escape_index(eigenvalues, model, j, lam, r_grid, n_max, path)


def s_number_escape_index(model: RiggedModel, j, lam: float, r_grid,
                          n_max: int, path: BoundaryPath) -> IndexEstimate:
    """Same tail criterion as eigenvalue_escape_index, over singular values."""
    return _escape_index(s_numbers, model, j, lam, r_grid, n_max, path)


def blowup_rate(model: BlockEigenvalueModel, lam: float, n: int,
                path: BoundaryPath) -> float:
    """Extrapolated limit of y * s_n(T_{lam+iy}(H)) at the isolated eigenvalue.

    Fits a + b*y on the tail window and reports a; the bounded block
    contributes the O(y) slope.  n is 1-based.
    """
    if not isinstance(model, BlockEigenvalueModel):
        raise NotAtEigenvalueError(
            f"blow-up extrapolation needs a BlockEigenvalueModel, "
            f"got {type(model).__name__}")
    if lam != model.lambda0:
        raise NotAtEigenvalueError(
            f"lam={lam} is not the model eigenvalue {model.lambda0}")
    if not 1 <= n <= model.aux_dim:
        raise ValueError(f"need 1 <= n <= {model.aux_dim}, got {n}")
    path = path.at(lam)
    if path.count < TAIL_WINDOW:
        raise ScheduleTooShortError(
            f"need at least {TAIL_WINDOW} offsets, got {path.count}")
    ys = path.offsets()[-TAIL_WINDOW:]
    scaled = []
    for y in ys:
        sv = s_numbers(sandwiched_resolvent(model, None, complex(lam, y)).t)
        scaled.append(float(y * sv[n - 1]))
    slope, intercept = np.polyfit(ys, scaled, 1)
    return float(intercept)
