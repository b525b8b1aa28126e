"""Regularized eigenspaces, rigged spectral ranges, and subspace geometry.

The homogeneous Lippmann-Schwinger equation (1 - T_{lam+i0}(H + F*JF) J) u = 0
defines a boundary-value generalization of the eigenspace at lam; its solution
space is estimated from the small singular directions of the limit matrix.
Companion utilities intersect the nested ranges F E_O(H) over shrinking
spectral windows O and measure inclusions via principal angles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryPath, LimitVerdict, probe_limit
from .errors import NonNestedWarning, NotConvergedError, NotLocalizedError, \
    UnsupportedModelError
from .models import RiggedModel, is_dense, perturbed_dense, rigging_matrix, \
    spectral_projection
from .resolvent import sandwiched_resolvent
from .serialization import complex_matrix_to_json

# Default null-space cut: NULL_TOL_FACTOR * (1 + ||T J||).
NULL_TOL_FACTOR = 1e-7
# The cut must dominate the probe's own accuracy by this margin.
RESIDUAL_MARGIN = 10.0
# Rank cut for orthonormalizing rigged spectral ranges, relative to ||F||.
WINDOW_RANK_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """A subspace of the auxiliary space given by orthonormal basis columns."""

    basis: np.ndarray
    tol: float | None = None  # rank cut used to build the basis, if any

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @staticmethod
    def zero(ambient: int) -> "Subspace":
        return Subspace(np.zeros((ambient, 0), dtype=complex))

    @staticmethod
    def from_span(columns: np.ndarray, tol: float) -> "Subspace":
        """Orthonormalize the column span, cutting ranks at tol."""
        columns = np.atleast_2d(np.asarray(columns, dtype=complex))
        if columns.shape[1] == 0:
            return Subspace(columns, tol=tol)
        u, s, _ = np.linalg.svd(columns, full_matrices=False)
        rank = int(np.sum(s > tol))
        return Subspace(np.ascontiguousarray(u[:, :rank]), tol=tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def to_json(self) -> dict:
        return {"basis": complex_matrix_to_json(self.basis)
                if self.dim else [], "dim": self.dim, "tol": self.tol}


def max_principal_angle(a: Subspace, b: Subspace) -> float:
    """Largest canonical angle; pi/2 when dimensions differ (no equality).

    Two zero-dimensional subspaces are at distance 0 by convention.  Small
    angles come from the sine (projection-defect) form, which stays accurate
    where arccos of a near-unit cosine loses half the working digits.
    """
    if a.dim == 0 and b.dim == 0:
        return 0.0
    if a.dim != b.dim:
        return float(np.pi / 2)
    cosines = np.linalg.svd(a.basis.conj().T @ b.basis, compute_uv=False)
    smallest = np.clip(cosines[-1], 0.0, 1.0)
    if smallest < np.sqrt(0.5):
        return float(np.arccos(smallest))
    residual = a.basis - b.basis @ (b.basis.conj().T @ a.basis)
    sine = np.clip(np.linalg.norm(residual, 2), 0.0, 1.0)
    return float(np.arcsin(sine))


def inclusion_defect(a: Subspace, b: Subspace) -> float:
    """max over unit u in a of dist(u, b); ~0 certifies a inside b."""
    if a.dim == 0:
        return 0.0
    residual = a.basis - b.basis @ (b.basis.conj().T @ a.basis)
    return float(np.linalg.norm(residual, 2))


def lippmann_schwinger_null_space(limit, j, tol: float | None = None) -> Subspace:
    """Null directions of (1 - T_limit J) from its small singular values.

    `limit` is a LimitVerdict (preferred; must be converged) or a bare matrix.
    Singular values below tol * (1 + ||T J||) count as null, with tol
    defaulting to NULL_TOL_FACTOR; the cut is raised to RESIDUAL_MARGIN times
    the probe's final Cauchy residual when that is larger, so the reported
    dimension is stable at the probe's accuracy.  A bare matrix is accepted
    as-is: away from a regular witness the result is a formal null space with
    no boundary-eigenspace interpretation.
    """
    floor = 0.0
    if isinstance(limit, LimitVerdict):
        if not limit.converged:
            raise NotConvergedError(
                f"limit estimate at lam={limit.lam} did not converge "
                f"(final residual {limit.final_residual:.3e})")
        floor = RESIDUAL_MARGIN * limit.final_residual
        t = limit.limit_estimate
    else:
        t = np.atleast_2d(np.asarray(limit, dtype=complex))
    k = t.shape[0]
    j = np.atleast_2d(np.asarray(j, dtype=complex))
    tj = t @ j
    scale = 1.0 + np.linalg.norm(tj, 2)
    cut = max((NULL_TOL_FACTOR if tol is None else float(tol)) * scale, floor)
    _, s, vh = np.linalg.svd(np.eye(k) - tj)
    null_dim = int(np.sum(s <= cut))
    basis = vh[k - null_dim:].conj().T if null_dim else np.zeros((k, 0), complex)
    return Subspace(np.ascontiguousarray(basis), tol=cut)


def regularized_eigenspace(model: RiggedModel, lam: float, j,
                           path: BoundaryPath, probe_tol: float = 1e-8,
                           null_tol: float | None = None) -> Subspace:
    """Boundary-value eigenspace estimate through one regular coupling witness.

    Probes T(H0 + F*JF) down the schedule; raises NotConvergedError when the
    witness is not regular at lam.
    """
    k = model.aux_dim
    jmat = np.zeros((k, k)) if j is None else np.atleast_2d(np.asarray(j))
    verdict = probe_limit(model, None if j is None else jmat,
                          path.at(lam), tol=probe_tol)
    if not verdict.converged:
        raise NotConvergedError(
            f"witness is not regular at lam={lam}: final residual "
            f"{verdict.final_residual:.3e}")
    return lippmann_schwinger_null_space(verdict, jmat, tol=null_tol)


def witness_independence_angle(model: RiggedModel, lam: float, j1, j2,
                               path: BoundaryPath, probe_tol: float = 1e-8,
                               null_tol: float | None = None) -> float:
    """Principal-angle distance between eigenspace estimates from two witnesses.

    Both couplings must be regular at lam; the error message names the one
    that failed.
    """
    spaces = []
    for tag, j in (("first", j1), ("second", j2)):
        try:
            spaces.append(regularized_eigenspace(model, lam, j, path,
                                                 probe_tol, null_tol))
        except NotConvergedError as exc:
            raise NotConvergedError(f"{tag} witness: {exc}") from exc
    return max_principal_angle(spaces[0], spaces[1])


def rigged_window_span(model: RiggedModel, lam: float, delta: float,
                       j=None) -> Subspace:
    """Orthonormal basis of ran(F E_O(H)) for the window O = (lam-d, lam+d)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not is_dense(model):
        raise UnsupportedModelError(
            f"spectral windows need a dense model, got {type(model).__name__}")
    projector = spectral_projection(model, (lam - delta, lam + delta), j=j)
    f = rigging_matrix(model)
    cut = WINDOW_RANK_TOL * np.linalg.norm(f, 2)
    return Subspace.from_span(f @ projector, tol=cut)


def nested_intersection(subspaces, tol: float = 1e-8) -> Subspace:
    """Common subspace of a (nominally nested) family.

    Averages the orthogonal projectors and keeps the eigenvectors with
    eigenvalue >= 1 - tol; for an exactly nested family this returns the
    smallest member.  A dimension increase along the list triggers a
    NonNestedWarning but the computation proceeds.
    """
    subspaces = list(subspaces)
    if not subspaces:
        raise ValueError("need at least one subspace")
    dims = [s.dim for s in subspaces]
    if any(b > a for a, b in zip(dims, dims[1:])):
        warnings.warn(f"subspace dimensions not non-increasing: {dims}",
                      NonNestedWarning, stacklevel=2)
    ambient = subspaces[0].ambient
    if min(dims) == 0:
        return Subspace.zero(ambient)
    avg = np.zeros((ambient, ambient), dtype=complex)
    for s in subspaces:
        avg += s.projector()
    avg /= len(subspaces)
    vals, vecs = np.linalg.eigh(avg)
    keep = vals >= 1.0 - tol
    basis = np.ascontiguousarray(vecs[:, keep])
    return Subspace(basis, tol=tol)


def lippmann_schwinger_residual(model: RiggedModel, j, lam: float, y: float,
                                f_vec) -> float:
    """|| F f - T_{lam+iy}(H1) J F f || for a spectrally localized f.

    Requires ||(H0 - lam) f|| <= y ||f|| (f in the 2y spectral window of H0);
    the residual is then bounded by 2 y ||F R_{lam+iy}(H1)|| ||f||.
    """
    if not is_dense(model):
        raise UnsupportedModelError(
            f"localized residual needs a dense model, got {type(model).__name__}")
    if y <= 0:
        raise ValueError(f"offset y must be positive, got {y}")
    f_vec = np.asarray(f_vec, dtype=complex).ravel()
    h0 = perturbed_dense(model, None)
    defect = np.linalg.norm(h0 @ f_vec - lam * f_vec)
    bound = y * np.linalg.norm(f_vec) + 1e-10
    if defect > bound:
        raise NotLocalizedError(
            f"||(H0 - lam) f|| = {defect:.3e} exceeds y||f|| + 1e-10 = {bound:.3e}")
    frig = rigging_matrix(model)
    k = frig.shape[0]
    jmat = np.zeros((k, k)) if j is None else np.atleast_2d(np.asarray(j))
    t = sandwiched_resolvent(model, jmat, complex(lam, y), method="direct").t
    ff = frig @ f_vec
    return float(np.linalg.norm(ff - t @ (jmat @ ff)))
