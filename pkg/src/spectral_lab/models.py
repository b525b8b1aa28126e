"""Operator models on rigged Hilbert spaces, their spectra and projections.

A model bundles a self-adjoint operator H0 with a rigging F mapping the base
space into a K-dimensional auxiliary space.  Four variants are supported:

* ``FiniteMatrixModel``    -- dense Hermitian H0 with an arbitrary full-row-rank
  rigging; the workhorse for randomized checks.
* ``BlockEigenvalueModel`` -- an isolated eigenvalue of controlled multiplicity
  next to a spectrally separated block, H = lambda0*P (+) G.
* ``ScalarCompactModel``   -- H0 = lambda0*Id with a diagonal compact rigging
  given by a non-increasing positive weight sequence.
* ``FreeJacobiModel``      -- the free lattice Laplacian on the integers with a
  finite-rank rigging supported on a few sites; its resolvent is analytic.

Models are validated on construction, then frozen; all downstream operations
are pure functions of their inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import (
    GapViolationError,
    ModelLoadError,
    NonHermitianError,
    RankDeficientRiggingError,
    RealAxisEvaluationError,
    UnsupportedModelError,
)
from .serialization import complex_matrix_to_json, complex_matrix_from_json

MODEL_SCHEMA = "spectral-lab/model/v1"

# Relative asymmetry accepted before a Hermitian payload is rejected.
HERMITIAN_RTOL = 1e-12
# Rigging rank cut, relative to the largest singular value.
RANK_TOL_FACTOR = 1e-10
# Modulus-tie tolerance for the lattice Green's function branch choice.
BRANCH_TIE_TOL = 1e-14


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def _symmetrize(a, name: str) -> np.ndarray:
    """Accept round-off level asymmetry, reject anything larger."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape[0] != a.shape[1]:
        raise NonHermitianError(f"{name} must be square, got shape {a.shape}")
    scale = np.linalg.norm(a)
    defect = np.linalg.norm(a - a.conj().T)
    if defect > HERMITIAN_RTOL * max(scale, 1e-300):
        raise NonHermitianError(
            f"{name} is not Hermitian: asymmetry {defect:.3e} exceeds "
            f"{HERMITIAN_RTOL:.0e} * norm ({scale:.3e})")
    return (a + a.conj().T) / 2.0


def _check_rigging_rank(f: np.ndarray, name="f") -> None:
    k, n = f.shape
    if k > n:
        raise RankDeficientRiggingError(
            f"{name} has more rows ({k}) than columns ({n}); rank {k} impossible")
    sv = np.linalg.svd(f, compute_uv=False)
    if sv[-1] <= RANK_TOL_FACTOR * sv[0]:
        raise RankDeficientRiggingError(
            f"{name} is numerically rank deficient: smallest singular value "
            f"{sv[-1]:.3e} <= {RANK_TOL_FACTOR:.0e} * {sv[0]:.3e}")


def _digest(kind: str, *arrays) -> str:
    h = hashlib.sha1(kind.encode())
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class FiniteMatrixModel:
    """Dense Hermitian operator with a full-row-rank rigging (K <= N)."""

    h0: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        h0 = _symmetrize(self.h0, "h0")
        f = np.atleast_2d(np.asarray(self.f, dtype=complex))
        if f.shape[1] != h0.shape[0]:
            raise RankDeficientRiggingError(
                f"rigging has {f.shape[1]} columns but h0 is {h0.shape[0]}x{h0.shape[0]}")
        _check_rigging_rank(f)
        object.__setattr__(self, "h0", _freeze(h0))
        object.__setattr__(self, "f", _freeze(f))

    @property
    def aux_dim(self):
        return self.f.shape[0]

    @property
    def ambient_dim(self):
        return self.h0.shape[0]

    @property
    def model_id(self):
        return _digest("finite_matrix", self.h0, self.f)


@dataclass(frozen=True, eq=False)
class BlockEigenvalueModel:
    """Isolated eigenvalue lambda0 of multiplicity p_rank next to a block g.

    Represents H = lambda0 * P  (+)  g on C^(p_rank) (+) C^M, with the rigging
    acting on the full space.  The spectrum of g must stay at a positive
    distance from lambda0.
    """

    lambda0: float
    p_rank: int
    g: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        if self.p_rank < 1:
            raise GapViolationError(f"p_rank must be >= 1, got {self.p_rank}")
        g = _symmetrize(self.g, "g")
        gap = np.abs(np.linalg.eigvalsh(g) - self.lambda0).min()
        if gap <= 1e-12 * (1.0 + np.linalg.norm(g)):
            raise GapViolationError(
                f"spec(g) touches lambda0={self.lambda0}: gap {gap:.3e}")
        f = np.atleast_2d(np.asarray(self.f, dtype=complex))
        if f.shape[1] != self.p_rank + g.shape[0]:
            raise RankDeficientRiggingError(
                f"rigging has {f.shape[1]} columns, expected p_rank + M = "
                f"{self.p_rank + g.shape[0]}")
        _check_rigging_rank(f)
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "p_rank", int(self.p_rank))
        object.__setattr__(self, "g", _freeze(g))
        object.__setattr__(self, "f", _freeze(f))

    @property
    def gap(self):
        return float(np.abs(np.linalg.eigvalsh(self.g) - self.lambda0).min())

    @property
    def aux_dim(self):
        return self.f.shape[0]

    @property
    def ambient_dim(self):
        return self.p_rank + self.g.shape[0]

    @property
    def model_id(self):
        return _digest("block_eigenvalue", np.array([self.lambda0, self.p_rank]),
                       self.g, self.f)


@dataclass(frozen=True, eq=False)
class ScalarCompactModel:
    """H0 = lambda0 * Id with rigging F = diag(weights), weights decreasing to 0.

    A finite truncation of the classic compact-rigged scalar operator; every
    sandwiched-resolvent quantity is available in closed form.
    """

    lambda0: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w <= 0):
            raise RankDeficientRiggingError("weights must be strictly positive")
        if np.any(np.diff(w) > 0):
            raise RankDeficientRiggingError("weights must be non-increasing")
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def aux_dim(self):
        return self.weights.size

    @property
    def ambient_dim(self):
        return self.weights.size

    @property
    def model_id(self):
        return _digest("scalar_compact", np.array([self.lambda0]), self.weights)


@dataclass(frozen=True, eq=False)
class FreeJacobiModel:
    """Free discrete Laplacian on the integer lattice, spectrum [-2, 2].

    The rigging maps u to (w_i * u(n_i))_i for distinct sites n_i and positive
    weights w_i; the sandwiched resolvent is assembled from the closed-form
    lattice Green's function.
    """

    sites: tuple
    weights: np.ndarray

    def __post_init__(self):
        sites = tuple(int(n) for n in self.sites)
        if len(sites) == 0:
            raise RankDeficientRiggingError("need at least one site")
        if len(set(sites)) != len(sites):
            raise RankDeficientRiggingError(f"sites must be distinct, got {sites}")
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != len(sites):
            raise RankDeficientRiggingError(
                f"{w.size} weights for {len(sites)} sites")
        if np.any(w <= 0):
            raise RankDeficientRiggingError("weights must be strictly positive")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def aux_dim(self):
        return len(self.sites)

    @property
    def ambient_dim(self):
        return None  # infinite lattice

    @property
    def model_id(self):
        return _digest("free_jacobi", np.array(self.sites), self.weights)


RiggedModel = Union[FiniteMatrixModel, BlockEigenvalueModel,
                    ScalarCompactModel, FreeJacobiModel]

_KINDS = {
    "finite_matrix": FiniteMatrixModel,
    "block_eigenvalue": BlockEigenvalueModel,
    "scalar_compact": ScalarCompactModel,
    "free_jacobi": FreeJacobiModel,
}


def is_dense(model: RiggedModel) -> bool:
    """True when the operator has an explicit finite matrix representation."""
    return isinstance(model, (FiniteMatrixModel, BlockEigenvalueModel))


def dense_h0(model: RiggedModel) -> np.ndarray:
    if isinstance(model, FiniteMatrixModel):
        return np.array(model.h0)
    if isinstance(model, BlockEigenvalueModel):
        n = model.ambient_dim
        h = np.zeros((n, n), dtype=complex)
        h[:model.p_rank, :model.p_rank] = model.lambda0 * np.eye(model.p_rank)
        h[model.p_rank:, model.p_rank:] = model.g
        return h
    raise UnsupportedModelError(
        f"{type(model).__name__} has no dense operator representation")


def rigging_matrix(model: RiggedModel) -> np.ndarray:
    if isinstance(model, (FiniteMatrixModel, BlockEigenvalueModel)):
        return np.array(model.f)
    if isinstance(model, ScalarCompactModel):
        return np.diag(model.weights).astype(complex)
    raise UnsupportedModelError(
        f"{type(model).__name__} has no finite rigging matrix")


def perturbed_dense(model: RiggedModel, j=None) -> np.ndarray:
    """Dense matrix of H0 + F* J F."""
    h = dense_h0(model)
    if j is None:
        return h
    f = rigging_matrix(model)
    j = _symmetrize(j, "j")
    if j.shape[0] != f.shape[0]:
        raise RankDeficientRiggingError(
            f"coupling is {j.shape[0]}x{j.shape[0]} but rigging has {f.shape[0]} rows")
    return h + f.conj().T @ j @ f


def make_model(description: Mapping) -> RiggedModel:
    """Build and validate a model from a structured record.

    Matrix-valued fields accept either ndarrays or nested [re, im] documents.
    """
    if not isinstance(description, Mapping):
        raise ModelLoadError(f"model description must be a mapping, got "
                             f"{type(description).__name__}")
    kind = description.get("kind")
    if kind not in _KINDS:
        raise ModelLoadError(
            f"model.kind: expected one of {sorted(_KINDS)}, got {kind!r}")
    try:
        if kind == "finite_matrix":
            return FiniteMatrixModel(
                h0=complex_matrix_from_json(description["h0"], "model.h0"),
                f=complex_matrix_from_json(description["f"], "model.f"))
        if kind == "block_eigenvalue":
            return BlockEigenvalueModel(
                lambda0=float(description["lambda0"]),
                p_rank=int(description["p_rank"]),
                g=complex_matrix_from_json(description["g"], "model.g"),
                f=complex_matrix_from_json(description["f"], "model.f"))
        if kind == "scalar_compact":
            return ScalarCompactModel(
                lambda0=float(description["lambda0"]),
                weights=np.asarray(description["weights"], dtype=float))
        return FreeJacobiModel(
            sites=tuple(description["sites"]),
            weights=np.asarray(description["weights"], dtype=float))
    except KeyError as exc:
        raise ModelLoadError(f"model.{exc.args[0]}: missing field") from exc
    except (TypeError, ValueError) as exc:
        raise ModelLoadError(f"model payload invalid: {exc}") from exc


def load_model(document: Mapping) -> RiggedModel:
    """Validate the schema tag and construct the model."""
    if not isinstance(document, Mapping):
        raise ModelLoadError("model document must be a JSON object")
    schema = document.get("schema")
    if schema != MODEL_SCHEMA:
        raise ModelLoadError(
            f"model.schema: expected {MODEL_SCHEMA!r}, got {schema!r}")
    return make_model(document)


def dump_model(model: RiggedModel) -> dict:
    doc = {"schema": MODEL_SCHEMA}
    if isinstance(model, FiniteMatrixModel):
        doc.update(kind="finite_matrix",
                   h0=complex_matrix_to_json(model.h0),
                   f=complex_matrix_to_json(model.f))
    elif isinstance(model, BlockEigenvalueModel):
        doc.update(kind="block_eigenvalue", lambda0=model.lambda0,
                   p_rank=model.p_rank,
                   g=complex_matrix_to_json(model.g),
                   f=complex_matrix_to_json(model.f))
    elif isinstance(model, ScalarCompactModel):
        doc.update(kind="scalar_compact", lambda0=model.lambda0,
                   weights=[float(w) for w in model.weights])
    elif isinstance(model, FreeJacobiModel):
        doc.update(kind="free_jacobi", sites=list(model.sites),
                   weights=[float(w) for w in model.weights])
    else:
        raise UnsupportedModelError(f"cannot serialize {type(model).__name__}")
    return doc


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with a unitary matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def spectral_decomposition(model: RiggedModel, j=None) -> SpectralDecomposition:
    """Eigen-decompose H0 + F* J F for dense-representable models."""
    if not is_dense(model):
        raise UnsupportedModelError(
            f"{type(model).__name__} has analytic spectral data; "
            "no dense eigendecomposition")
    h = perturbed_dense(model, j)
    vals, vecs = np.linalg.eigh(h)
    return SpectralDecomposition(_freeze(vals), _freeze(vecs))


def spectral_projection(model: RiggedModel, interval, j=None) -> np.ndarray:
    """Orthogonal projection onto eigenvectors with eigenvalue strictly inside
    the open interval."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError(f"empty interval ({a}, {b})")
    dec = spectral_decomposition(model, j)
    inside = (dec.eigenvalues > a) & (dec.eigenvalues < b)
    v = dec.eigenvectors[:, inside]
    return v @ v.conj().T


def eigenvalue_multiplicity(model: RiggedModel, lam: float, atol=None) -> int:
    """Number of eigenvalues within atol of lam (0 for the free lattice)."""
    if isinstance(model, FreeJacobiModel):
        return 0  # purely absolutely continuous spectrum
    if isinstance(model, ScalarCompactModel):
        scale = 1.0 + abs(model.lambda0)
        tol = atol if atol is not None else 1e-8 * scale
        return model.aux_dim if abs(lam - model.lambda0) <= tol else 0
    dec = spectral_decomposition(model)
    scale = 1.0 + max(np.abs(dec.eigenvalues).max(), abs(lam))
    tol = atol if atol is not None else 1e-8 * scale
    return int(np.sum(np.abs(dec.eigenvalues - lam) <= tol))


def spectral_diameter(model: RiggedModel) -> float:
    """Diameter of the spectrum of H0 (4.0 for the free lattice band)."""
    if isinstance(model, FreeJacobiModel):
        return 4.0
    if isinstance(model, ScalarCompactModel):
        return 0.0
    vals = spectral_decomposition(model).eigenvalues
    return float(vals[-1] - vals[0])


def free_jacobi_green(n: int, m: int, z: complex) -> complex:
    """Green's function of the free lattice Laplacian at sites (n, m).

    Uses the decaying branch w of w + 1/w = z with |w| < 1, so that
    G(n, m; z) = w^|n-m| / (w - 1/w).  The branch choice makes G Herglotz:
    Im G(n, n; z) has the sign of Im z.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise RealAxisEvaluationError(
            f"Green's function evaluation requires Im z != 0, got z={z}")
    disc = np.sqrt(z * z - 4.0 + 0j)
    roots = ((z - disc) / 2.0, (z + disc) / 2.0)
    moduli = (abs(roots[0]), abs(roots[1]))
    if abs(moduli[0] - moduli[1]) <= BRANCH_TIE_TOL * max(moduli):
        raise RealAxisEvaluationError(
            f"branch tie at z={z}: both roots have modulus {moduli[0]:.6e}")
    w = roots[0] if moduli[0] < moduli[1] else roots[1]
    return complex(w ** abs(int(n) - int(m)) / (w - 1.0 / w))
