import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmlab.errors import (
    EmptyTail,
    GridRequired,
    NegativeEntry,
    NegativeRadius,
    NonzeroDiagonal,
    PointOutOfDomain,
    UnknownRule,
)
from qpmlab.oracle import random_space
from qpmlab.spaces import (
    IntervalSpace,
    MatrixSpace,
    ball_membership,
    classify_cauchy,
    classify_convergence,
    conjugate,
    distance,
    metric_closure,
    space_from_json,
    symmetrize,
    verify_axioms,
)

MAXDIFF = IntervalSpace(0.0, 10.0, "maxdiff")


def naive_closure(raw):
    m = [list(map(float, r)) for r in raw]
    n = len(m)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if m[i][k] + m[k][j] < m[i][j]:
                    m[i][j] = m[i][k] + m[k][j]
    return np.array(m)


def naive_triangle_witnesses(m):
    n = len(m)
    return [(x, y, z) for x, y, z in itertools.product(range(n), repeat=3)
            if m[x][z] > m[x][y] + m[y][z] + 1e-9]


class TestDistance:
    def test_maxdiff_values(self):
        assert distance(MAXDIFF, 6.0, 4.0) == 2.0
        assert distance(MAXDIFF, 4.0, 6.0) == 0.0
        assert distance(MAXDIFF, 3.3, 3.3) == 0.0

    def test_matrix_lookup(self):
        s = MatrixSpace([[0, 1], [0, 0]])
        assert distance(s, 0, 1) == 1.0
        assert distance(s, 1, 0) == 0.0

    @pytest.mark.parametrize("x", [-1, 2, 0.5, True, "0"])
    def test_out_of_domain_matrix(self, x):
        with pytest.raises(PointOutOfDomain):
            distance(MatrixSpace([[0, 1], [0, 0]]), x, 0)

    @pytest.mark.parametrize("x", [-0.1, 10.5, "a"])
    def test_out_of_domain_interval(self, x):
        with pytest.raises(PointOutOfDomain):
            distance(MAXDIFF, x, 1.0)

    def test_constructor_rejects_bad_matrices(self):
        with pytest.raises(NegativeEntry):
            MatrixSpace([[0, -1], [0, 0]])
        with pytest.raises(NonzeroDiagonal):
            MatrixSpace([[1, 0], [0, 0]])
        with pytest.raises(ValueError):
            MatrixSpace([[0, float("nan")], [0, 0]])

    def test_unknown_rule(self):
        with pytest.raises(UnknownRule):
            IntervalSpace(0, 1, "nope")


class TestConjugateSymmetrize:
    def test_maxdiff_conjugate(self):
        assert conjugate(MAXDIFF).distance(4.0, 6.0) == 2.0
        assert conjugate(conjugate(MAXDIFF)).distance(6.0, 4.0) == 2.0

    def test_transpose(self):
        s = MatrixSpace([[0, 1], [0, 0]])
        np.testing.assert_array_equal(conjugate(s).dist, [[0, 0], [1, 0]])
        np.testing.assert_array_equal(conjugate(conjugate(s)).dist, s.dist)

    def test_symmetric_space_unchanged(self):
        s = MatrixSpace([[0, 2, 3], [2, 0, 1], [3, 1, 0]])
        np.testing.assert_array_equal(conjugate(s).dist, s.dist)

    def test_maxdiff_symmetrization_is_abs(self):
        sym = symmetrize(MAXDIFF)
        assert sym.distance(6.0, 4.0) == 2.0
        grid = np.linspace(0, 10, 41)
        for a in grid:
            for b in grid:
                assert sym.distance(a, b) == abs(a - b)
        assert sym.distance(7.0, 7.0) == 0.0

    def test_symmetrize_of_conjugate(self):
        s = random_space(7, 3)
        np.testing.assert_array_equal(symmetrize(s).dist, symmetrize(conjugate(s)).dist)
        assert np.array_equal(symmetrize(s).dist, symmetrize(s).dist.T)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 9), st.integers(0, 10_000))
    def test_symmetrized_t0_space_is_metric(self, n, seed):
        s = symmetrize(random_space(n, seed))
        D = s.dist
        off = ~np.eye(n, dtype=bool)
        assert np.all(D[off] > 0)
        assert verify_axioms(s).ok


class TestVerifyAxioms:
    def test_two_point_pass(self):
        rep = verify_axioms(MatrixSpace([[0, 1], [0, 0]]))
        assert rep.ok and rep.t0_ok

    def test_t0_failure(self):
        rep = verify_axioms(MatrixSpace([[0, 0], [0, 0]]))
        assert not rep.ok and rep.t0_ok is False
        assert [(f.axiom, f.witness) for f in rep.failures] == [("t0", (0, 1))]
        assert verify_axioms(MatrixSpace([[0, 0], [0, 0]]), check_t0=False).ok

    def test_triangle_failure_matches_brute_force(self):
        m = [[0, 5, 1], [9, 0, 9], [9, 1, 0]]
        expected = naive_triangle_witnesses(m)
        assert expected == [(0, 2, 1)]
        rep = verify_axioms(MatrixSpace(m))
        tri = [f for f in rep.failures if f.axiom == "triangle"]
        assert [f.witness for f in tri] == expected
        assert tri[0].values == (5.0, 1.0, 1.0)

    def test_interval_needs_grid(self):
        with pytest.raises(GridRequired):
            verify_axioms(MAXDIFF)

    def test_interval_sampled(self):
        rep = verify_axioms(MAXDIFF, grid=0.25)
        assert rep.ok and rep.sampled and rep.t0_ok
        assert rep.n_points == 41


class TestBalls:
    def test_open_ball(self):
        assert ball_membership(MAXDIFF, 6.0, 2.0, 5.0)
        assert not ball_membership(MAXDIFF, 6.0, 2.0, 4.0)
        assert ball_membership(MAXDIFF, 6.0, 2.0, 4.0, closed=True)
        assert ball_membership(MAXDIFF, 6.0, 0.1, 6.0)

    def test_views(self):
        # d^-1(6, 4) = d(4, 6) = 0, so 4 is in every conjugate ball at 6
        assert ball_membership(MAXDIFF, 6.0, 0.5, 4.0, view="inv")
        assert not ball_membership(MAXDIFF, 6.0, 2.0, 4.0, view="sym")

    def test_negative_radius(self):
        with pytest.raises(NegativeRadius):
            ball_membership(MAXDIFF, 6.0, -1.0, 5.0, closed=True)
        with pytest.raises(NegativeRadius):
            ball_membership(MAXDIFF, 6.0, 0.0, 5.0)
        assert ball_membership(MAXDIFF, 6.0, 0.0, 6.0, closed=True)


class TestConvergence:
    seq = [10 / 2**n for n in range(41)]

    def test_to_zero(self):
        v = classify_convergence(MAXDIFF, self.seq, 0.0, tol=1e-12)
        assert v.left and not v.right and not v.ds
        assert v.left_sup == 0.0
        # the tail n = 30..40 has sup x_n = 10 / 2**30
        assert v.right_sup == 10 / 2**30
        long = [10 / 2**n for n in range(200)]
        assert classify_convergence(MAXDIFF, long, 0.0, tol=1e-12).ds

    def test_to_three(self):
        v = classify_convergence(MAXDIFF, self.seq, 3.0, tol=1e-12)
        assert not v.left and v.right
        assert v.left_sup == 3 - 10 / 2**40

    def test_constant(self):
        v = classify_convergence(MAXDIFF, [2.5] * 8, 2.5, tol=0.0)
        assert v.left and v.right and v.ds

    def test_empty(self):
        with pytest.raises(EmptyTail):
            classify_convergence(MAXDIFF, [], 0.0, 1e-9)


class TestCauchy:
    def test_harmonic_left_k(self):
        seq = [1 / n for n in range(1, 201)]
        v = classify_cauchy(MAXDIFF, seq, tol=0.01)
        # tail is n = 151..200, so sup d(x_k, x_n) = 1/151 - 1/200
        assert v.sups["left_k"] == pytest.approx(1 / 151 - 1 / 200, abs=1e-15)
        assert v.left_k and v.left_d

    def test_constant(self):
        v = classify_cauchy(MAXDIFF, [4.0] * 5, tol=0.0)
        assert v.left_d and v.left_k and v.right_d and v.right_k and v.ds

    def test_discrete_alternating(self):
        s = MatrixSpace([[0, 1], [1, 0]])
        v = classify_cauchy(s, [0, 1] * 4, tol=0.5)
        assert not any([v.left_d, v.left_k, v.right_d, v.right_k, v.ds])

    def test_short(self):
        with pytest.raises(EmptyTail):
            classify_cauchy(MAXDIFF, [1.0, 2.0], 0.1)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 7), st.integers(0, 5000),
           st.lists(st.integers(0, 6), min_size=3, max_size=30),
           st.sampled_from([0.0, 0.5, 1.0, 3.0, 10.0]))
    def test_lattice_and_duality(self, n, seed, idx, tol):
        s = random_space(n, seed)
        seq = [i % n for i in idx]
        v = classify_cauchy(s, seq, tol)
        assert not v.ds or (v.left_k and v.right_k)
        assert not v.left_k or v.left_d
        assert not v.right_k or v.right_d
        assert v.ds == (v.left_k and v.right_k)
        w = classify_cauchy(conjugate(s), seq, tol)
        assert v.left_k == w.right_k and v.right_k == w.left_k


class TestMetricClosure:
    def test_closed_input_unchanged(self):
        np.testing.assert_array_equal(metric_closure([[0, 1], [1, 0]]).dist, [[0, 1], [1, 0]])

    def test_shortcut(self):
        raw = [[0, 3, 10], [2, 0, 4], [9, 1, 0]]
        expected = naive_closure(raw)
        assert expected[0, 2] == 7.0
        np.testing.assert_array_equal(metric_closure(raw).dist, expected)

    def test_errors(self):
        with pytest.raises(NegativeEntry):
            metric_closure([[0, -1], [1, 0]])
        with pytest.raises(NonzeroDiagonal):
            metric_closure([[0, 1], [1, 2]])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 8).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 20), min_size=n, max_size=n), min_size=n, max_size=n)))
    def test_properties(self, rows):
        raw = np.array(rows, dtype=float)
        np.fill_diagonal(raw, 0)
        c = metric_closure(raw).dist
        np.testing.assert_array_equal(c, naive_closure(raw))
        assert np.all(c <= raw) and np.all(np.diag(c) == 0)
        np.testing.assert_array_equal(metric_closure(c).dist, c)
        assert not naive_triangle_witnesses(c.tolist())


def test_json_round_trip():
    s = MatrixSpace([[0, 1.5], [0, 0]])
    assert np.array_equal(space_from_json(s.to_json()).dist, s.dist)
    i = space_from_json(MAXDIFF.to_json())
    assert (i.lo, i.hi, i.rule) == (0.0, 10.0, "maxdiff")
    assert MAXDIFF.to_json() == {"kind": "interval", "lo": 0.0, "hi": 10.0, "rule": "maxdiff"}
