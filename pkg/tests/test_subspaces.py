import numpy as np
import pytest

from spectral_lab import (
    BoundaryPath,
    FiniteMatrixModel,
    NonNestedWarning,
    NotConvergedError,
    NotLocalizedError,
    ScalarCompactModel,
    Subspace,
    UnsupportedModelError,
    inclusion_defect,
    lippmann_schwinger_null_space,
    lippmann_schwinger_residual,
    max_principal_angle,
    nested_intersection,
    probe_limit,
    regularized_eigenspace,
    rigged_window_span,
    rigging_resolvent_norm,
    witness_independence_angle,
)

from _helpers import random_hermitian, random_rigging


def unit(vec):
    vec = np.asarray(vec, dtype=complex)
    return vec / np.linalg.norm(vec)


class TestSubspace:
    def test_from_span_orthonormalizes(self):
        rng = np.random.default_rng(61)
        cols = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        space = Subspace.from_span(cols, tol=1e-10)
        assert space.dim == 3
        gram = space.basis.conj().T @ space.basis
        assert np.abs(gram - np.eye(3)).max() < 1e-12

    def test_rank_cut(self):
        cols = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
        assert Subspace.from_span(cols, tol=1e-10).dim == 1

    def test_json_round_trip_keeps_tolerance(self):
        space = Subspace.from_span(np.eye(3)[:, :2], tol=1e-9)
        doc = space.to_json()
        assert doc["dim"] == 2
        assert doc["tol"] == 1e-9


class TestPrincipalAngles:
    def test_same_space_zero(self):
        space = Subspace.from_span(np.array([[1.0, 0], [1.0, 1], [0, 1.0]]),
                                   tol=1e-12)
        assert max_principal_angle(space, space) < 1e-8

    def test_orthogonal_lines(self):
        a = Subspace(np.eye(3)[:, :1].astype(complex))
        b = Subspace(np.eye(3)[:, 1:2].astype(complex))
        assert abs(max_principal_angle(a, b) - np.pi / 2) < 1e-12
        assert abs(inclusion_defect(a, b) - 1.0) < 1e-12

    def test_zero_dim_conventions(self):
        zero = Subspace.zero(3)
        line = Subspace(np.eye(3)[:, :1].astype(complex))
        assert max_principal_angle(zero, zero) == 0.0
        assert inclusion_defect(zero, line) == 0.0
        assert abs(max_principal_angle(zero, line) - np.pi / 2) < 1e-12

    def test_inclusion_defect_detects_subset(self):
        rng = np.random.default_rng(62)
        big = Subspace.from_span(
            rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3)),
            tol=1e-10)
        small = Subspace(big.basis[:, :2])
        assert inclusion_defect(small, big) <= 1e-12


class TestNullSpace:
    def test_zero_coupling_gives_trivial_space(self):
        t = np.diag([0.3 + 0.1j, -0.2])
        space = lippmann_schwinger_null_space(t, np.zeros((2, 2)))
        assert space.dim == 0

    def test_scalar_unit_product(self):
        space = lippmann_schwinger_null_space(np.array([[1.0]]),
                                              np.array([[1.0]]))
        assert space.dim == 1
        assert abs(abs(space.basis[0, 0]) - 1.0) < 1e-12

    def test_against_dense_svd_rank(self):
        # embedded solution: h0=diag(0,2), f=I, J=diag(1,0) makes lam=0
        # regular for H1 with T(0+i0) = diag(1, 1/2); null of 1-TJ is e1
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        j = np.diag([1.0, 0.0])
        verdict = probe_limit(model, j, BoundaryPath(lam=0.0), tol=1e-8)
        assert verdict.converged
        space = lippmann_schwinger_null_space(verdict, j)
        t_exact = np.diag([1.0, 0.5])
        sv = np.linalg.svd(np.eye(2) - t_exact @ j, compute_uv=False)
        assert space.dim == int(np.sum(sv <= 1e-7))
        assert inclusion_defect(space, Subspace(np.eye(2)[:, :1].astype(complex))) \
            <= 1e-6

    def test_unconverged_probe_rejected(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        verdict = probe_limit(model, None, BoundaryPath(lam=0.0), tol=1e-8)
        assert not verdict.converged
        with pytest.raises(NotConvergedError):
            lippmann_schwinger_null_space(verdict, np.eye(2))


class TestWitnessIndependence:
    def test_identical_witnesses(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        j = 0.7 * np.eye(2)
        angle = witness_independence_angle(model, 0.0, j, j,
                                           BoundaryPath(lam=0.0))
        assert angle <= 1e-8

    def test_trivial_spaces_agree(self):
        model = FiniteMatrixModel(h0=np.diag([1.0, 2.0]), f=np.eye(2))
        angle = witness_independence_angle(model, 5.0, 0.3 * np.eye(2),
                                           0.9 * np.eye(2),
                                           BoundaryPath(lam=5.0))
        assert angle == 0.0

    def test_scaled_witness_same_space(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        j1 = 0.7 * np.eye(2)
        angle = witness_independence_angle(model, 0.0, j1, 2.0 * j1,
                                           BoundaryPath(lam=0.0))
        assert angle <= 1e-6

    def test_failing_witness_named(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        with pytest.raises(NotConvergedError, match="second"):
            witness_independence_angle(model, 0.0, 0.7 * np.eye(2),
                                       np.zeros((2, 2)),
                                       BoundaryPath(lam=0.0))


class TestRiggedWindowSpan:
    def test_full_window_full_rank(self):
        rng = np.random.default_rng(63)
        model = FiniteMatrixModel(h0=np.diag([0.0, 1.0, 2.0]),
                                  f=random_rigging(rng, 3, 3))
        span = rigged_window_span(model, 1.0, delta=10.0)
        assert span.dim == 3

    def test_simple_eigenvalue_window(self):
        rng = np.random.default_rng(64)
        f = random_rigging(rng, 2, 3)
        model = FiniteMatrixModel(h0=np.diag([0.0, 1.0, 2.0]), f=f)
        span = rigged_window_span(model, 1.0, delta=0.5)
        assert span.dim == 1
        target = Subspace.from_span(f[:, 1:2], tol=1e-12)
        assert max_principal_angle(span, target) <= 1e-10

    def test_window_rank_matches_eigen_oracle(self):
        rng = np.random.default_rng(65)
        h = random_hermitian(rng, 8)
        f = random_rigging(rng, 8, 8)
        model = FiniteMatrixModel(h0=h, f=f)
        vals, vecs = np.linalg.eigh(h)
        lo, hi = (vals[1] + vals[0]) / 2, (vals[4] + vals[3]) / 2
        span = rigged_window_span(model, (lo + hi) / 2,
                                  delta=(hi - lo) / 2)
        assert span.dim == 3
        target = Subspace.from_span(f @ vecs[:, 1:4], tol=1e-10)
        assert max_principal_angle(span, target) <= 1e-8

    def test_analytic_model_unsupported(self):
        with pytest.raises(UnsupportedModelError):
            rigged_window_span(ScalarCompactModel(0.0, [1.0]), 0.0, 0.1)


class TestNestedIntersection:
    def test_identical_family(self):
        space = Subspace.from_span(np.array([[1.0, 0], [0, 1.0], [1.0, 1.0]]),
                                   tol=1e-12)
        meet = nested_intersection([space, space, space])
        assert meet.dim == space.dim
        assert max_principal_angle(meet, space) <= 1e-10

    def test_plane_intersection(self):
        e = np.eye(3).astype(complex)
        a = Subspace(e[:, [0, 1]])
        b = Subspace(e[:, [1, 2]])
        with pytest.warns(NonNestedWarning):
            # equal dims are fine, but b is not inside a; force the warning
            # branch with an increasing family and check the math separately
            nested_intersection([Subspace(e[:, [0]]), a])
        meet = nested_intersection([a, b])
        assert meet.dim == 1
        assert max_principal_angle(meet, Subspace(e[:, [1]])) <= 1e-10

    def test_zero_member_collapses(self):
        e = np.eye(2).astype(complex)
        meet = nested_intersection([Subspace(e), Subspace.zero(2)])
        assert meet.dim == 0

    def test_shrinking_windows_around_double_eigenvalue(self):
        # oracle: the rigged eigenbasis image of the multiplicity-2 eigenvalue
        rng = np.random.default_rng(66)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5))
                            + 1j * rng.standard_normal((5, 5)))
        vals = np.array([0.5, 0.5, 2.0, 3.0, 4.0])
        h = (q * vals) @ q.conj().T
        f = random_rigging(rng, 5, 5)
        model = FiniteMatrixModel(h0=h, f=f)
        deltas = [1.2 * 2.0 ** (-i) for i in range(9)]
        spans = [rigged_window_span(model, 0.5, d) for d in deltas]
        meet = nested_intersection(spans, tol=1e-8)
        assert meet.dim == 2
        target = Subspace.from_span(f @ q[:, :2], tol=1e-10)
        assert max_principal_angle(meet, target) <= 1e-8


class TestLippmannSchwingerResidual:
    def test_exact_eigenvector_tightened_bound(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        j = 0.7 * np.eye(2)
        y = 1e-3
        f_vec = np.array([1.0, 0.0])
        residual = lippmann_schwinger_residual(model, j, 0.0, y, f_vec)
        fr_norm = rigging_resolvent_norm(model, j, 0.0, y)
        assert residual <= y * fr_norm + 1e-10
        assert residual <= 2 * y * fr_norm + 1e-10

    def test_boundary_localized_vector(self):
        y = 1e-2
        gap_pos = y * (1 - 1e-3)
        model = FiniteMatrixModel(h0=np.diag([gap_pos, 3.0]), f=np.eye(2))
        j = 0.4 * np.eye(2)
        residual = lippmann_schwinger_residual(model, j, 0.0, y,
                                               np.array([1.0, 0.0]))
        bound = 2 * y * rigging_resolvent_norm(model, j, 0.0, y) + 1e-10
        assert residual <= bound

    def test_halving_offset_keeps_ratio(self):
        rng = np.random.default_rng(67)
        h = random_hermitian(rng, 4)
        vals, vecs = np.linalg.eigh(h)
        model = FiniteMatrixModel(h0=h, f=random_rigging(rng, 4, 4))
        j = random_hermitian(rng, 4) * 0.3
        lam = vals[1]
        f_vec = vecs[:, 1]
        ratios = []
        for y in (1e-2, 5e-3):
            residual = lippmann_schwinger_residual(model, j, lam, y, f_vec)
            ratios.append(residual / (y * rigging_resolvent_norm(model, j, lam, y)))
        assert ratios[1] <= ratios[0] * 1.1

    def test_not_localized_rejected(self):
        model = FiniteMatrixModel(h0=np.diag([0.0, 2.0]), f=np.eye(2))
        with pytest.raises(NotLocalizedError):
            lippmann_schwinger_residual(model, None, 0.0, 1e-3,
                                        unit([1.0, 1.0]))


class TestRegularizedEigenspace:
    def test_matches_rigged_eigenvector_image(self):
        rng = np.random.default_rng(68)
        f = random_rigging(rng, 3, 3)
        model = FiniteMatrixModel(h0=np.diag([0.5, 2.0, 3.0]), f=f)
        space = regularized_eigenspace(model, 0.5, 0.8 * np.eye(3),
                                       BoundaryPath(lam=0.5))
        assert space.dim == 1
        target = Subspace.from_span(f[:, :1], tol=1e-12)
        assert max_principal_angle(space, target) <= 1e-6
