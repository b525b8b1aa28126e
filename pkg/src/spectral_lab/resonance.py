"""Coupling resonances of (H0, F*F) and their boundary trajectories.

The eigenvalues mu_j of T_z(H0) determine where the coupling line
H_s = H0 + s F*F develops a pole at spectral parameter z: the resonance
values are r_j(z) = -1/mu_j, with mu_j = 0 sent to the point at infinity.
Trajectories along a boundary schedule are stitched by minimum-cost
assignment in the chordal metric of the Riemann sphere, so infinity is an
ordinary point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .boundary import BoundaryPath, probe_limit
from .models import RiggedModel
from .resolvent import eigenvalues, sandwiched_resolvent

# |mu| below this multiple of s_1(T) maps the resonance to infinity.
INFINITY_CUT = 1e-14
# Assignment cost gap under which curve matching is recorded as ambiguous.
AMBIGUITY_TOL = 1e-12
# Matching-cost spike factor flagged as possible branching.  Compared against
# the larger neighbouring step: on a geometric schedule smooth curves make the
# costs themselves decay geometrically, so a global median would flag every
# early step.
BRANCH_SPIKE_FACTOR = 10.0
# Assignment is exact; cost grows cubically, so cap the sphere dimension.
MAX_CURVES = 64

_INF = complex(np.inf, 0.0)


def chordal_distance(u: complex, v: complex) -> float:
    """Chordal metric on the Riemann sphere: 2|u-v| / sqrt((1+|u|^2)(1+|v|^2)).

    complex(inf, 0) represents the point at infinity; d(u, inf) = 2/sqrt(1+|u|^2).
    """
    u_inf = not np.isfinite(u)
    v_inf = not np.isfinite(v)
    if u_inf and v_inf:
        return 0.0
    if u_inf:
        return 2.0 / np.hypot(1.0, abs(v))
    if v_inf:
        return 2.0 / np.hypot(1.0, abs(u))
    return 2.0 * abs(u - v) / (np.hypot(1.0, abs(u)) * np.hypot(1.0, abs(v)))


def resonances_at(model: RiggedModel, z: complex) -> np.ndarray:
    """Coupling resonances r_j(z) = -1/mu_j(T_z(H0)) on the extended plane."""
    t = sandwiched_resolvent(model, None, complex(z)).t
    mu = eigenvalues(t)
    top = np.linalg.norm(t, 2)
    out = np.empty(mu.size, dtype=complex)
    for i, m in enumerate(mu):
        out[i] = _INF if abs(m) <= INFINITY_CUT * top else -1.0 / m
    return out


def _cost_matrix(prev, cur) -> np.ndarray:
    k = prev.size
    cost = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            cost[a, b] = chordal_distance(prev[a], cur[b])
    return cost


def _cost_spikes(costs: np.ndarray) -> list:
    """1-based steps whose matching cost jumps clear of both neighbours.

    The opening step has no left context and is never flagged.
    """
    spikes = []
    for i in range(1, len(costs)):
        left = costs[i - 1]
        right = costs[i + 1] if i + 1 < len(costs) else left
        if costs[i] > BRANCH_SPIKE_FACTOR * max(left, right) \
                and costs[i] > 1e-12:
            spikes.append(i + 1)
    return spikes


def _match(cost: np.ndarray):
    """Best assignment, its cost, and the optimality gap to second best."""
    rows, cols = linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    if cost.shape[0] < 2:
        return cols, best, np.inf
    big = 1e9  # dwarfs any chordal total (<= 2K)
    second = np.inf
    for r, c in zip(rows, cols):
        saved = cost[r, c]
        cost[r, c] = big
        rr, cc = linear_sum_assignment(cost)
        val = float(cost[rr, cc].sum())
        cost[r, c] = saved
        if val < big / 2:  # alternative avoiding the forbidden edge exists
            second = min(second, val)
    return cols, best, second - best


@dataclass
class ResonanceTrack:
    """Matched resonance trajectories along a boundary schedule.

    curves[j, k] is the j-th trajectory at offset y_k, with complex(inf, 0)
    marking passages through the point at infinity.
    """

    lam: float
    offsets: np.ndarray
    curves: np.ndarray
    matching_cost: np.ndarray
    ambiguous_steps: list = field(default_factory=list)
    possible_branching: list = field(default_factory=list)

    @property
    def at_infinity(self) -> np.ndarray:
        return ~np.isfinite(self.curves)


def trace_resonances(model: RiggedModel, path: BoundaryPath) -> ResonanceTrack:
    """Follow each resonance down the schedule by minimum-cost matching.

    Steps whose best and second-best assignments differ by less than the
    ambiguity tolerance are recorded (first assignment kept); matching-cost
    spikes above 10x the neighbouring-step median are flagged as possible
    branching.
    """
    k = model.aux_dim
    if k > MAX_CURVES:
        raise ValueError(f"assignment matching capped at {MAX_CURVES} curves, "
                         f"model has {k}")
    ys = path.offsets()
    curves = np.empty((k, ys.size), dtype=complex)
    curves[:, 0] = resonances_at(model, complex(path.lam, ys[0]))
    costs = np.empty(ys.size - 1)
    ambiguous = []
    for step, y in enumerate(ys[1:], start=1):
        fresh = resonances_at(model, complex(path.lam, y))
        cost = _cost_matrix(curves[:, step - 1], fresh)
        assignment, total, gap = _match(cost)
        curves[:, step] = fresh[assignment]
        costs[step - 1] = total
        if gap < AMBIGUITY_TOL:
            ambiguous.append(step)
    return ResonanceTrack(lam=path.lam, offsets=ys, curves=curves,
                          matching_cost=costs, ambiguous_steps=ambiguous,
                          possible_branching=_cost_spikes(costs))


def vanishing_resonances(track: ResonanceTrack, tol: float) -> list:
    """Curves whose tail sits inside the disk |r| <= tol and keeps shrinking.

    Their count is the working proxy for the rank of the pole part of
    s -> T_z(H_s) at the anchor.
    """
    out = []
    for jcurve in range(track.curves.shape[0]):
        tail = np.abs(track.curves[jcurve, -3:])
        if np.all(np.isfinite(tail)) and np.all(tail <= tol) \
                and tail[0] >= tail[1] >= tail[2]:
            out.append(jcurve)
    return out


@dataclass
class CouplingSweep:
    """Regularity flags for the coupling line H0 + s F*F at a fixed anchor."""

    s_grid: list
    regular_flags: list
    witness: list   # final Cauchy residual per s (None where the solve failed)
    errors: list    # error text per s (None where clean)


def regular_couplings(model: RiggedModel, lam: float, s_grid, path: BoundaryPath,
                      tol: float = 1e-8) -> CouplingSweep:
    """Probe the boundary limit of T(H0 + s F*F) for every s on the grid.

    Solver failures are recorded per grid point and do not abort the sweep.
    """
    k = model.aux_dim
    path = path.at(lam)
    flags, witnesses, errors = [], [], []
    for s in s_grid:
        coupling = float(s) * np.eye(k)
        try:
            verdict = probe_limit(model, coupling, path, tol=tol)
        except Exception as exc:  # recorded; the sweep must finish
            flags.append(False)
            witnesses.append(None)
            errors.append(f"s={float(s)}: {exc}")
            continue
        flags.append(bool(verdict.converged))
        witnesses.append(verdict.final_residual)
        errors.append(None)
    return CouplingSweep(s_grid=[float(s) for s in s_grid],
                         regular_flags=flags, witness=witnesses, errors=errors)


def oscillation_measure(track: ResonanceTrack, tail: int) -> np.ndarray:
    """Chordal diameter of the last `tail` points of each curve.

    A diameter bounded away from zero under schedule refinement is evidence
    that the resonance fails to converge on the sphere.
    """
    if not 1 <= tail <= track.offsets.size:
        raise ValueError(
            f"tail must be in [1, {track.offsets.size}], got {tail}")
    k = track.curves.shape[0]
    out = np.zeros(k)
    for jcurve in range(k):
        pts = track.curves[jcurve, -tail:]
        diam = 0.0
        for a in range(pts.size):
            for b in range(a + 1, pts.size):
                diam = max(diam, chordal_distance(pts[a], pts[b]))
        out[jcurve] = diam
    return out
