import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cases import CANONICAL, E, ENTRY_SETS, mp_entry, quadrature_entries
from fockdyn.linalg import (
    ConvergenceError,
    SpectrumHitError,
    build_matrix,
    format_complex,
    mat_power,
    mat_power_diff,
    matrix_to_csv,
    op_norm,
    resolvent_norm,
)
from fockdyn.symbolcore import OperatorParams, bound_constant, iterate_params


class TestBuildMatrix:
    def test_diagonal(self):
        T = build_matrix(OperatorParams(0.5), 3).entries
        assert np.array_equal(T, np.diag([1, 0.5, 0.25]))

    def test_composition_entries(self):
        T = build_matrix(OperatorParams(0.5, 1), 2).entries
        assert np.allclose(T, [[1, 1], [0, 0.5]], rtol=0, atol=1e-15)

    def test_translation_single_entry(self):
        T = build_matrix(OperatorParams(1, 1, -1, E(-0.5)), 1).entries
        assert T[0, 0] == pytest.approx(E(-0.5), rel=1e-15)

    def test_read_only(self):
        M = build_matrix(OperatorParams(0.5), 3)
        with pytest.raises(ValueError):
            M.entries[0, 0] = 2

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            build_matrix(OperatorParams(0.5), 0)

    def test_unbounded_warns_and_builds(self):
        with pytest.warns(UserWarning, match="bounded operator"):
            M = build_matrix(OperatorParams(1, 1), 8)
        assert not M.bounded and M.entries.shape == (8, 8)

    def test_unbounded_norm_grows(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            norms = [op_norm(build_matrix(OperatorParams(1, 1), n).entries) for n in (16, 32, 64)]
        assert norms[0] < norms[1] < norms[2]
        assert norms[2] > 2 * norms[0]

    @pytest.mark.parametrize("P", ENTRY_SETS, ids=range(len(ENTRY_SETS)))
    def test_quadrature_oracle(self, P):
        Q = quadrature_entries(P, 11)
        T = build_matrix(P, 11).entries
        # exact zeros (e.g. c = 0 below the diagonal) carry no relative scale
        assert np.all(np.abs(T - Q) <= 1e-8 * np.abs(Q) + 1e-14 * np.abs(Q).max())

    @pytest.mark.parametrize("P", ENTRY_SETS, ids=range(len(ENTRY_SETS)))
    def test_high_precision_sum(self, P):
        T = build_matrix(P, 128).entries
        for n, m in [(0, 0), (3, 17), (17, 3), (40, 41), (90, 60), (60, 90), (127, 127), (127, 100)]:
            want = mp_entry(P, n, m)
            scale = max(abs(want), 1e-14 * np.abs(T[: n + 1, : m + 1]).max())
            assert abs(T[n, m] - want) <= 1e-10 * scale, (n, m)

    def test_methods_agree(self):
        P = OperatorParams(0.5j, 0.3, 0.2j, 1.2)
        A = build_matrix(P, 30, method="direct").entries
        B = build_matrix(P, 30, method="laguerre").entries
        assert np.allclose(A, B, rtol=1e-10, atol=1e-12 * np.abs(A).max())

    @pytest.mark.parametrize("a,u0", [(0.5, 1), (0.5, 2), (0, -1), (0.5j, 1)])
    @pytest.mark.parametrize("b", [0, 1])
    def test_c_zero_upper_triangular(self, a, u0, b):
        T = build_matrix(OperatorParams(a, b, 0, u0), 64).entries
        assert not np.any(np.tril(T, -1))
        want = np.array([u0 * complex(a) ** m for m in range(64)])
        assert np.allclose(np.diag(T), want, rtol=0, atol=1e-12)


ITERATE_SETS = [P for P in ENTRY_SETS if abs(P.a) < 1] + [c[1] for c in CANONICAL if abs(c[1].b) == 0]
TRANSLATIONS = [OperatorParams(1, 1, -1, E(-0.5)), OperatorParams(1j, 1, -1j, 0.5 * E(-0.5))]


class TestIterateConsistency:
    @pytest.mark.parametrize("P", ITERATE_SETS, ids=range(len(ITERATE_SETS)))
    def test_leading_block(self, P):
        T = build_matrix(P, 64).entries
        for n in range(1, 5):
            k = 64 - 8 * n
            A = build_matrix(iterate_params(P, n).as_params(), 64).entries
            assert np.abs(A[:k, :k] - mat_power(T, n)[:k, :k]).max() <= 1e-6

    def test_exact_for_pure_dilation(self):
        P = OperatorParams(0.5, 0, 0, 0.9)
        T = build_matrix(P, 64).entries
        A = build_matrix(iterate_params(P, 4).as_params(), 64).entries
        assert np.allclose(A, mat_power(T, 4), rtol=1e-12, atol=0)

    @pytest.mark.xfail(strict=True, reason="|a| = 1, b != 0 leaks past an 8n margin (about 3e-3 at n = 2)")
    @pytest.mark.parametrize("P", TRANSLATIONS, ids=["translation", "rotation"])
    def test_translation_with_8n_margin(self, P):
        T = build_matrix(P, 64).entries
        A = build_matrix(iterate_params(P, 2).as_params(), 64).entries
        assert np.abs(A[:48, :48] - mat_power(T, 2)[:48, :48]).max() <= 1e-6

    @pytest.mark.parametrize("P", TRANSLATIONS, ids=["translation", "rotation"])
    def test_translation_with_16n_margin(self, P):
        T = build_matrix(P, 128).entries
        for n in range(1, 5):
            k = 128 - 16 * n
            A = build_matrix(iterate_params(P, n).as_params(), 128).entries
            assert np.abs(A[:k, :k] - mat_power(T, n)[:k, :k]).max() <= 1e-6


TRIANGULAR = [c for c in CANONICAL if c[1].c == 0]
SANDWICH_SETS = [OperatorParams(0.5, 1), OperatorParams(0.5j, 0.3, 0.2j, 1.2), OperatorParams(0.5, 0, 1, 1)]


class TestNorms:
    def test_examples(self):
        assert op_norm(np.eye(5)) == pytest.approx(1, abs=1e-12)
        assert op_norm(np.diag([1, 0.5, 0.25])) == pytest.approx(1, abs=1e-12)
        assert op_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2, abs=1e-12)
        assert op_norm(np.zeros((3, 3))) == 0

    @pytest.mark.parametrize("P", SANDWICH_SETS, ids=range(3))
    def test_sandwich(self, P):
        norms = [op_norm(build_matrix(P, n).entries) for n in (32, 64, 128)]
        assert norms[0] <= norms[1] * (1 + 1e-9) and norms[1] <= norms[2] * (1 + 1e-9)
        M = bound_constant(P)
        assert M - 0.05 * M <= norms[-1] <= M / abs(P.a) + 0.05 * M

    @settings(max_examples=40, deadline=None)
    @given(arrays(complex, (7, 7), elements=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)))
    def test_against_svd_and_adjoint(self, A):
        want = np.linalg.svd(A, compute_uv=False)[0]
        got = op_norm(A)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)
        assert op_norm(A.conj().T) == pytest.approx(got, rel=1e-9, abs=1e-12)

    def test_iteration_cap(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(50, 50))
        with pytest.raises(ConvergenceError) as info:
            op_norm(A, maxiter=3)
        assert info.value.vector.shape == (50,) and info.value.residual >= 0


class TestResolvent:
    def test_examples(self):
        assert resolvent_norm(np.array([[0.5]]), 1) == pytest.approx(2, rel=1e-12)
        assert resolvent_norm(np.eye(3), 1.5) == pytest.approx(2, rel=1e-12)
        T = build_matrix(OperatorParams(0, 0, 0, -1), 4).entries
        assert resolvent_norm(T, -1 - 1e-3) >= 1000 * (1 - 1e-2)

    def test_spectrum_hit(self):
        with pytest.raises(SpectrumHitError, match="lambda"):
            resolvent_norm(np.diag([1.0, 0.5]), 0.5)
        with pytest.raises(SpectrumHitError):
            resolvent_norm(np.array([[0, 1], [1, 0]], dtype=complex), 1)

    @pytest.mark.parametrize("name,P,_", TRIANGULAR, ids=[c[0] for c in TRIANGULAR])
    def test_distance_bound_triangular(self, name, P, _):
        T = build_matrix(P, 24).entries
        eig = np.diag(T)
        for lam in [1.5, -1.2 + 0.3j, 2j, 1 + 1e-3]:
            dist = np.abs(lam - eig).min()
            assert resolvent_norm(T, lam) >= (1 - 1e-9) / dist

    @settings(max_examples=30, deadline=None)
    @given(arrays(complex, (6, 6), elements=st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)),
           st.complex_numbers(min_magnitude=7, max_magnitude=20, allow_nan=False, allow_infinity=False))
    def test_against_svd(self, A, lam):
        want = 1 / np.linalg.svd(lam * np.eye(6) - A, compute_uv=False)[-1]
        assert resolvent_norm(A, lam) == pytest.approx(want, rel=1e-9)
        U = np.triu(A)
        want = 1 / np.linalg.svd(lam * np.eye(6) - U, compute_uv=False)[-1]
        assert resolvent_norm(U, lam) == pytest.approx(want, rel=1e-9)


class TestPowers:
    def test_mat_power(self):
        A = np.array([[1, 1], [0, 1]], dtype=complex)
        assert np.array_equal(mat_power(A, 5), [[1, 5], [0, 1]])
        assert np.array_equal(mat_power(A, 0), np.eye(2))

    def test_power_diff_examples(self):
        assert mat_power_diff(np.eye(4), 3) == (pytest.approx(1), 0)
        n, d = mat_power_diff(np.array([[0.5]]), 2)
        assert n == pytest.approx(0.25) and d == pytest.approx(0.125)

    def test_power_diff_lower_bound(self):
        T = build_matrix(OperatorParams(0.5, 1, 0, 0.9), 64).entries
        _, d = mat_power_diff(T, 5)
        assert d >= 0.9**5 * 0.1 * (1 - 1e-6)


class TestCsv:
    def test_first_line(self):
        text = matrix_to_csv(build_matrix(OperatorParams(0.5), 3).entries)
        assert text.splitlines()[0] == "1+0j,0+0j,0+0j"

    def test_round_trip(self):
        T = build_matrix(OperatorParams(0.5j, 0.3, 0.2j, 1.2), 6).entries
        rows = [[complex(x) for x in line.split(",")] for line in matrix_to_csv(T).splitlines()]
        assert np.array_equal(np.array(rows), T)

    def test_format(self):
        assert format_complex(-0.0 - 0.0j) == "0+0j"
        assert format_complex(1 / 3 - 2j) == "0.33333333333333331-2j"
