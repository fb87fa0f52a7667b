import numpy as np
import pytest

from qpmlab.errors import NoFeasibleSuccessor, TraceTooShort, UnknownVariant
from qpmlab.gauge import Affine, Constant
from qpmlab.hausdorff import TableMap, f_end, f_fixed, f_start
from qpmlab.oracle import exhaustive_hypothesis_check
from qpmlab.solver import (
    Candidate,
    Inequality,
    IterationTrace,
    Outcome,
    Step,
    VariantSpec,
    decay_diagnostics,
    evaluate_candidates,
    feasible_successors,
    select_successor,
    solve,
    trace_from_csv,
    trace_to_csv,
    verify_trace,
)
from qpmlab.spaces import MatrixSpace, conjugate, symmetrize

from conftest import CATALOG, SUITE_GRID, chain_scenario, random_scenario

V1 = CATALOG["V1"]


def cand(y, f, h):
    return Candidate(y, f, h, (Inequality("successor", f, f),))


class TestVariantSpec:
    def test_unknown(self):
        with pytest.raises(UnknownVariant):
            VariantSpec("V9", phi=Constant(0.5))

    def test_eta_required(self):
        with pytest.raises(ValueError):
            VariantSpec("V3", phi=Affine(0.5))

    def test_required_props_covered(self):
        assert {"phi_nondecreasing", "phi_subadditive"} <= CATALOG["V7"].pair.declared_props
        assert CATALOG["GABA_C"].c == 0.5


class TestFeasibleSuccessors:
    def test_example_x6_rejected(self, example):
        sp, T = example
        for v in (CATALOG["GABA_PHI"], CATALOG["V2"]):
            assert feasible_successors(sp, T, 6.0, v) == []
            table = {c.y: (c.f_y, c.inequalities[0].rhs) for c in evaluate_candidates(sp, T, 6.0, v)}
            assert table == {4.0: (2.0, 1.0), 5.0: (2.5, 0.5)}

    def test_example_x10_tight(self, example):
        sp, T = example
        ok = feasible_successors(sp, T, 10.0, V1)
        # phi(f(10)) * H({10}, {5}) = 0.5 * 5 = 2.5 = f(5)
        assert [(c.y, c.slack) for c in ok] == [(5.0, 0.0)]

    @pytest.mark.parametrize("vid", sorted(CATALOG))
    @pytest.mark.parametrize("mode", ["start", "end", "fixed"])
    def test_identity_map(self, vid, mode):
        s, _ = random_scenario(7)
        T = TableMap({x: [x] for x in s.points()})
        v = CATALOG[vid].with_mode(mode)
        for x in s.points():
            ok = feasible_successors(s, T, x, v)
            assert [(c.y, c.slack) for c in ok] == [(x, 0.0)]


class TestSelect:
    def test_min_f(self):
        assert select_successor([cand(5, 2.5, 1), cand(4, 2.0, 2)]) == 4

    def test_single(self):
        assert select_successor([cand(3, 1.0, 1.0)]) == 3

    def test_ties(self):
        assert select_successor([cand(7, 1.0, 1.0), cand(2, 1.0, 1.0)]) == 2
        assert select_successor([cand(7, 1.0, 0.5), cand(2, 1.0, 1.0)]) == 7
        assert select_successor([cand(7, 1.0, 1.0), cand(2, 1.0, 1.0)], how="first") == 7

    def test_empty(self):
        with pytest.raises(NoFeasibleSuccessor):
            select_successor([])


class TestSolve:
    def test_example_from_10(self, example):
        sp, T = example
        tr = solve(sp, T, V1, 10.0, eps_conv=1e-8)
        assert tr.outcome.converged
        assert tr.points[:4] == [10.0, 5.0, 2.5, 1.25]
        assert tr.points == [10 / 2**n for n in range(len(tr.points))]
        assert tr.outcome.f <= 1e-8 and abs(tr.outcome.x) < 1e-6
        assert not verify_trace(sp, T, V1, tr.steps)

    def test_example_from_6_violates(self, example):
        sp, T = example
        tr = solve(sp, T, V1, 6.0)
        assert tr.outcome.kind == "violation" and tr.outcome.x == 6.0 and not tr.steps
        vals = {c.y: (c.inequalities[0].lhs, c.inequalities[0].rhs) for c in tr.outcome.candidates}
        assert vals == {4.0: (2.0, 1.0), 5.0: (2.5, 0.5)}

    def test_identity_converges_immediately(self):
        s, _ = random_scenario(3)
        T = TableMap({x: [x] for x in s.points()})
        tr = solve(s, T, V1, 1)
        assert tr.outcome.converged and tr.outcome.x == 1 and tr.iterations == 0

    def test_max_iter(self):
        s = MatrixSpace([[0, 1], [1, 0]])
        T = TableMap({0: [1], 1: [0]})
        tr = solve(s, T, VariantSpec("V3", phi=Affine(2.0), eta=Affine(0.5)), 0, max_iter=7)
        assert tr.outcome.kind == "max_iter" and tr.iterations == 7

    def test_bad_args(self, example):
        sp, T = example
        with pytest.raises(ValueError):
            solve(sp, T, V1, 10.0, eps_conv=0)

    @pytest.mark.parametrize("vid", sorted(CATALOG))
    def test_traces_valid_and_bounded(self, vid):
        v = CATALOG[vid]
        for seed in range(120):
            s, T = random_scenario(seed) if seed % 2 else chain_scenario(seed)
            for x0 in s.points():
                tr = solve(s, T, v, x0)
                assert not verify_trace(s, T, v, tr.steps)
                for st in tr.steps:
                    assert st.d_n <= st.f and st.y in T(st.x)
                if tr.outcome.converged:
                    assert tr.outcome.f <= 1e-8
                    assert abs(f_start(s, T, tr.outcome.x) - tr.outcome.f) <= 1e-12


class TestModes:
    @pytest.mark.parametrize("vid", sorted(CATALOG))
    def test_end_is_start_on_conjugate(self, vid):
        v = CATALOG[vid]
        for seed in range(60):
            s, T = random_scenario(seed)
            c = conjugate(s)
            for x0 in s.points():
                a = solve(s, T, v.with_mode("end"), x0)
                b = solve(c, T, v, x0)
                assert a.steps == b.steps and a.outcome == b.outcome
                if a.outcome.converged:
                    assert f_end(s, T, a.outcome.x) == a.outcome.f

    @pytest.mark.parametrize("vid", sorted(CATALOG))
    def test_fixed_equals_start_on_symmetric_spaces(self, vid):
        v = CATALOG[vid]
        for seed in range(60):
            s, T = random_scenario(seed)
            sym = symmetrize(s)
            for x0 in s.points():
                a = solve(sym, T, v.with_mode("fixed"), x0)
                b = solve(sym, T, v, x0)
                assert a.steps == b.steps and a.outcome == b.outcome

    def test_fixed_converges_to_fixed_point(self):
        found = 0
        for seed in range(400):
            s, T = random_scenario(seed)
            v = CATALOG["V1"].with_mode("fixed")
            for x0 in s.points():
                tr = solve(s, T, v, x0)
                if tr.outcome.converged:
                    found += 1
                    x = tr.outcome.x
                    assert f_fixed(s, T, x) <= 1e-8 and x in T(x)
        assert found > 100


class TestDecay:
    def test_example_trace(self, example):
        sp, T = example
        rep = decay_diagnostics(solve(sp, T, V1, 10.0))
        assert rep.q_hat == 0.5 and set(rep.ratios) == {0.5}
        assert rep.dn_eq_Dn and rep.dn_lt_2Dn
        assert rep.monotone and rep.monotone_from == 0
        assert rep.left_k.left_k

    def test_constant_trace(self):
        sp = MatrixSpace([[0, 1], [1, 0]])
        steps = tuple(Step(n, 0, 0.0, 0.0, 0, 0.0) for n in range(3))
        tr = IterationTrace(V1, 0, 1e-8, 10, 1e-9, steps, Outcome("max_iter", 0, 0.0), sp)
        rep = decay_diagnostics(tr)
        assert rep.ratios == () and rep.q_hat == 0.0 and rep.monotone

    def test_too_short(self, example):
        sp, T = example
        with pytest.raises(TraceTooShort):
            decay_diagnostics(solve(sp, T, V1, 0.0))

    def test_v2_scenarios_dn_below_2Dn(self):
        v = CATALOG["V2"]
        checked = 0
        for seed in range(300):
            s, T = chain_scenario(seed)
            if not exhaustive_hypothesis_check(s, T, v, gauge_grid=SUITE_GRID).passed:
                continue
            for x0 in s.points():
                tr = solve(s, T, v, x0)
                if len(tr.points) >= 3:
                    checked += 1
                    assert decay_diagnostics(tr).dn_lt_2Dn
        assert checked > 50

    def test_gaba_c_rate_bounded_by_c(self):
        v = CATALOG["GABA_C"]
        for seed in range(300):
            s, T = chain_scenario(seed)
            if not exhaustive_hypothesis_check(s, T, v, gauge_grid=SUITE_GRID).passed:
                continue
            for x0 in s.points():
                tr = solve(s, T, v, x0)
                if len(tr.points) >= 3:
                    assert decay_diagnostics(tr).q_hat <= 0.5 + 1e-12


class TestCsv:
    def test_round_trip_interval(self, example):
        sp, T = example
        tr = solve(sp, T, V1, 10.0)
        text = trace_to_csv(tr)
        assert text.splitlines()[0] == "n,x,f,d_n,y,slack"
        assert text.splitlines()[-1].startswith("outcome,converged,")
        steps, outcome = trace_from_csv(text)
        assert tuple(steps) == tr.steps
        assert outcome == ("converged", tr.outcome.x, tr.outcome.f)
        assert not verify_trace(sp, T, V1, steps)

    def test_round_trip_matrix(self):
        s, T = chain_scenario(4)
        tr = solve(s, T, V1, s.n - 1)
        steps, outcome = trace_from_csv(trace_to_csv(tr))
        assert tuple(steps) == tr.steps and all(isinstance(st.x, int) for st in steps)

    def test_tampered_trace_detected(self, example):
        sp, T = example
        tr = solve(sp, T, V1, 10.0)
        bad = list(tr.steps)
        bad[2] = Step(2, bad[2].x, bad[2].f + 1.0, bad[2].d_n, bad[2].y, bad[2].slack)
        assert verify_trace(sp, T, V1, bad)


def test_v3_counterexample_has_no_startpoint():
    """Hypotheses of V3/V4 hold, yet f never reaches 0: phi(t) = 2t lets f stall."""
    D = np.array([[0, 1, 4, 4], [1, 0, 4, 4], [4, 4, 0, 1], [4, 4, 1, 0]], dtype=float)
    s = MatrixSpace(D)
    T = TableMap({0: [1, 2], 1: [0, 3], 2: [3, 0], 3: [2, 1]})
    for vid in ("V3", "V4"):
        v = VariantSpec(vid, phi=Affine(2.0), eta=Affine(3.0))
        rep = exhaustive_hypothesis_check(s, T, v)
        assert rep.passed, rep.to_dict()
        assert [f_start(s, T, x) for x in range(4)] == [4.0] * 4
        tr = solve(s, T, v, 0, max_iter=50)
        assert tr.outcome.kind == "max_iter"
