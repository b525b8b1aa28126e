"""Sandwiched resolvents T_z(H) = F (H - z)^{-1} F* and their spectral data.

Two evaluation routes are provided and cross-checked: a direct dense solve
(H + F*JF - z) X = F*, and the second-resolvent identity
T_J = (1 + T0 J)^{-1} T0 applied to the unperturbed sandwich T0.  Analytic
models (scalar compact, free lattice) only support the identity route, dense
models support both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NearSingularSolveError,
    RealAxisEvaluationError,
    ResonantCouplingError,
    UnsupportedModelError,
)
from .models import (
    FreeJacobiModel,
    RiggedModel,
    ScalarCompactModel,
    _symmetrize,
    free_jacobi_green,
    is_dense,
    perturbed_dense,
    rigging_matrix,
)

# Condition estimate above which a dense resolvent solve is rejected.
CONDITION_LIMIT = 1e14
# Relative smallest-singular-value cut declaring (1 + T0 J) resonant.
RESONANT_TOL = 1e-12
# Most negative eigenvalue (relative to ||A||) tolerated when taking a PSD root.
PSD_CLIP_RTOL = 1e-12


@dataclass(frozen=True)
class SandwichedResolvent:
    """A K x K sandwiched resolvent with its evaluation metadata."""

    t: np.ndarray
    z: complex
    j: np.ndarray | None
    model_id: str


def _as_matrix(t) -> np.ndarray:
    if isinstance(t, SandwichedResolvent):
        return t.t
    return np.atleast_2d(np.asarray(t, dtype=complex))


def _hermitian_coupling(j, k: int) -> np.ndarray:
    j = np.atleast_2d(np.asarray(j, dtype=complex))
    if j.shape != (k, k):
        raise ValueError(f"coupling must be {k}x{k}, got {j.shape}")
    return _symmetrize(j, "coupling J")


def bare_sandwich(model: RiggedModel, z: complex) -> np.ndarray:
    """T_z(H0) without coupling: dense solve or closed form."""
    z = complex(z)
    if z.imag == 0.0:
        raise RealAxisEvaluationError(f"Im z must be nonzero, got z={z}")
    if isinstance(model, ScalarCompactModel):
        return np.diag(model.weights ** 2 / (model.lambda0 - z))
    if isinstance(model, FreeJacobiModel):
        k = model.aux_dim
        t = np.empty((k, k), dtype=complex)
        for a in range(k):
            for b in range(k):
                t[a, b] = (model.weights[a] * model.weights[b]
                           * free_jacobi_green(model.sites[a], model.sites[b], z))
        return t
    return _dense_sandwich(model, None, z)


def _dense_sandwich(model: RiggedModel, j, z: complex) -> np.ndarray:
    h = perturbed_dense(model, j)
    f = rigging_matrix(model)
    a = h - z * np.eye(h.shape[0])
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NearSingularSolveError(
            f"resolvent solve at z={z} has condition estimate {cond:.3e}",
            condition=float(cond))
    return f @ np.linalg.solve(a, f.conj().T)


def _identity_sandwich(model: RiggedModel, j, z: complex) -> np.ndarray:
    t0 = bare_sandwich(model, z)
    if j is None:
        return t0
    j = _hermitian_coupling(j, t0.shape[0])
    t0j = t0 @ j
    b = np.eye(t0.shape[0]) + t0j
    smin = np.linalg.svd(b, compute_uv=False)[-1]
    if smin < RESONANT_TOL * (1.0 + np.linalg.norm(t0j, 2)):
        raise ResonantCouplingError(
            f"1 + T0 J numerically singular at z={z}: "
            f"smallest singular value {smin:.3e}")
    return np.linalg.solve(b, t0)


def sandwiched_resolvent(model: RiggedModel, j, z: complex,
                         method: str = "auto") -> SandwichedResolvent:
    """Evaluate T_z(H0 + F* J F).

    method: "direct" (dense solve, dense models only), "identity"
    (second-resolvent route through T_z(H0)), or "auto" (direct when dense).
    """
    z = complex(z)
    if z.imag == 0.0:
        raise RealAxisEvaluationError(f"Im z must be nonzero, got z={z}")
    if method == "auto":
        method = "direct" if is_dense(model) else "identity"
    if method == "direct":
        if not is_dense(model):
            raise UnsupportedModelError(
                f"direct solve needs a dense model, got {type(model).__name__}")
        t = _dense_sandwich(model, j, z)
    elif method == "identity":
        t = _identity_sandwich(model, j, z)
    else:
        raise ValueError(f"unknown method {method!r}")
    jmat = None if j is None else _hermitian_coupling(j, t.shape[0])
    return SandwichedResolvent(t=t, z=z, j=jmat, model_id=model.model_id)


def s_numbers(t) -> np.ndarray:
    """Singular values in non-increasing order."""
    return np.linalg.svd(_as_matrix(t), compute_uv=False)


def eigenvalues(t) -> np.ndarray:
    """Full complex spectrum with multiplicity, sorted by descending modulus."""
    mu = np.linalg.eigvals(_as_matrix(t))
    order = np.lexsort((-mu.imag, -mu.real, -np.abs(mu)))
    return mu[order]


def operator_norm(t) -> float:
    return float(np.linalg.norm(_as_matrix(t), 2))


def rank_truncation_residual(t, n: int) -> float:
    """| s_{n+1}(T) - ||T - T_n|| | for the best rank-n SVD truncation.

    Checks that rank-n truncation error equals the (n+1)-st singular value;
    the returned residual should sit at round-off level.
    """
    a = _as_matrix(t)
    k = min(a.shape)
    if not 0 <= n < k:
        raise ValueError(f"need 0 <= n < {k}, got n={n}")
    u, s, vh = np.linalg.svd(a)
    truncated = (u[:, :n] * s[:n]) @ vh[:n] if n > 0 else np.zeros_like(a)
    return float(abs(s[n] - np.linalg.norm(a - truncated, 2)))


def fan_inequality_slack(a, b, n: int) -> float:
    """s_n(A) + ||B|| - s_{n+1}(A+B); non-negative up to round-off (n >= 1)."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    k = min(a.shape)
    if not 1 <= n < k:
        raise ValueError(f"need 1 <= n < {k}, got n={n}")
    sa = np.linalg.svd(a, compute_uv=False)
    sab = np.linalg.svd(a + b, compute_uv=False)
    return float(sa[n - 1] + np.linalg.norm(b, 2) - sab[n])


def psd_sqrt(a: np.ndarray, clip_rtol: float = PSD_CLIP_RTOL) -> np.ndarray:
    """Hermitian square root, clipping round-off-negative eigenvalues to 0."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    vals, vecs = np.linalg.eigh((a + a.conj().T) / 2.0)
    scale = max(np.abs(vals).max(), 1e-300)
    if vals.min() < -clip_rtol * scale:
        raise ValueError(
            f"matrix is indefinite: eigenvalue {vals.min():.3e} below "
            f"-{clip_rtol:.0e} * {scale:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def rigging_resolvent_norm(model: RiggedModel, j, lam: float, y: float) -> float:
    """Operator norm of F R_{lam+iy}(H0 + F*JF) for dense models."""
    if not is_dense(model):
        raise UnsupportedModelError(
            f"explicit F R_z needs a dense model, got {type(model).__name__}")
    if y <= 0:
        raise ValueError(f"offset y must be positive, got {y}")
    h = perturbed_dense(model, j)
    f = rigging_matrix(model)
    z = complex(lam, y)
    # F R_z = (R_zbar F*)^*; one K-column adjoint solve.
    ystack = np.linalg.solve(h - np.conj(z) * np.eye(h.shape[0]), f.conj().T)
    return float(np.linalg.norm(ystack.conj().T, 2))


def imaginary_part_identity_residual(model: RiggedModel, j, lam: float,
                                     y: float) -> float:
    """| ||F R_z(H1)|| - y^{-1/2} ||sqrt(Im T_z(H1))|| | at z = lam + iy.

    Both sides are computed independently (adjoint solve vs Hermitian root of
    the sandwich's imaginary part); the exact identity makes the residual pure
    round-off.
    """
    lhs = rigging_resolvent_norm(model, j, lam, y)
    t = sandwiched_resolvent(model, j, complex(lam, y), method="direct").t
    im_t = (t - t.conj().T) / 2j
    root = psd_sqrt(im_t, clip_rtol=1e-12)
    rhs = np.linalg.norm(root, 2) / np.sqrt(y)
    return float(abs(lhs - rhs))
