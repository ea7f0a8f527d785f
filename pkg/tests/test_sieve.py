import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grsieve.config import GrsConfig
from grsieve.geometry import Box, subdivide
from grsieve.sieve import (
    BoxBudgetExceeded,
    ObjectiveError,
    ObjectiveSpec,
    RunStatus,
    classify,
    enclosure_interval,
    evaluate_level,
    finesse_bounds,
    run_single_m,
    sieve_step,
)


def scalar_spec(f, lo, hi, **kw):
    return ObjectiveSpec("f", Box(tuple(lo), tuple(hi)), f, **kw)


def square():
    return scalar_spec(lambda x: float(x[0] ** 2), (-1.0,), (1.0,))


def quarter_frontier():
    return evaluate_level(subdivide(Box((-1.0,), (1.0,)), 4), square())


# -- evaluate_level -------------------------------------------------------------

def test_evaluate_level_square():
    fr = quarter_frontier()
    assert fr.values.tolist() == [0.5625, 0.0625, 0.0625, 0.5625]
    assert fr.v_k == 0.0625
    assert fr.eval_count == 4
    assert fr.delta == 0.5


def test_evaluate_level_constant():
    spec = scalar_spec(lambda x: 7.0, (0.0, 0.0), (1.0, 1.0))
    fr = evaluate_level(subdivide(spec.domain, 3), spec, eval_count=10)
    assert fr.values.tolist() == [7.0] * 9
    assert fr.v_k == 7.0
    assert fr.eval_count == 19


def test_evaluate_level_single_domain_box():
    spec = scalar_spec(lambda x: float(np.sum(x ** 2)), (-5.0, -5.0), (5.0, 5.0))
    fr = evaluate_level([spec.domain], spec)
    assert fr.v_k == 0.0
    assert fr.level == 0


def test_evaluate_level_order_independent():
    boxes = subdivide(Box((-1.0, 0.0), (1.0, 2.0)), 5)
    spec = scalar_spec(lambda x: float(np.sin(3 * x[0]) + x[1] ** 2), (-1.0, 0.0), (1.0, 2.0))
    a = evaluate_level(boxes, spec)
    b = evaluate_level(boxes[::-1], spec)
    assert a.v_k == b.v_k
    assert sorted(a.values.tolist()) == sorted(b.values.tolist())


def test_evaluate_level_rejects_nan_and_names_point():
    spec = scalar_spec(lambda x: math.nan if x[0] > 0.5 else 0.0, (0.0,), (1.0,))
    with pytest.raises(ObjectiveError, match=r"0\.75"):
        evaluate_level(subdivide(spec.domain, 2), spec)


def test_evaluate_level_rejects_infinity():
    spec = scalar_spec(lambda x: math.inf, (0.0,), (1.0,))
    with pytest.raises(ObjectiveError):
        evaluate_level([spec.domain], spec)


def test_evaluate_level_rejects_mixed_levels():
    a, b = subdivide(Box((0.0,), (1.0,)), 2)
    deeper = subdivide(b, 2)[0]
    with pytest.raises(ValueError):
        evaluate_level([a, deeper], square())


def test_vectorized_and_scalar_specs_agree():
    f = lambda x: np.sum(np.cos(3 * np.asarray(x)), axis=-1)  # noqa: E731
    box = Box((-1.0, -2.0), (2.0, 1.0))
    boxes = subdivide(box, 7)
    a = evaluate_level(boxes, ObjectiveSpec("v", box, f, vectorized=True))
    b = evaluate_level(boxes, ObjectiveSpec("s", box, lambda x: float(f(x))))
    assert np.array_equal(a.values, b.values)


# -- classify -------------------------------------------------------------------

def test_classify_all_good():
    cls = classify(quarter_frontier(), 2.0)
    assert cls.threshold == 1.0625
    assert cls.good_count == 4 and cls.bad_count == 0


def test_classify_half():
    cls = classify(quarter_frontier(), 0.5)
    assert cls.threshold == 0.3125
    assert cls.good_count == 2 and cls.bad_count == 2
    assert sorted(e.point[0] for e in cls.good) == [-0.25, 0.25]
    assert sorted(e.center_value for e in cls.bad) == [0.5625, 0.5625]


def test_classify_constant():
    spec = scalar_spec(lambda x: 3.0, (0.0,), (1.0,))
    cls = classify(evaluate_level(subdivide(spec.domain, 6), spec), 1e-9)
    assert cls.good_count == 6 and cls.bad == []


def test_classify_rejects_nonpositive_bound():
    with pytest.raises(ValueError):
        classify(quarter_frontier(), 0.0)


# -- enclosure_interval ---------------------------------------------------------

def test_enclosure_examples():
    e = enclosure_interval(1.0, 0.1, 2.0)
    assert (e.lo, e.hi) == pytest.approx((0.8, 1.4))
    e = enclosure_interval(0.0625, 0.5, 2.0)
    assert (e.lo, e.hi) == (-0.9375, 2.0625)
    e = enclosure_interval(4.5, 0.0, 10.0)
    assert (e.lo, e.hi) == (4.5, 4.5)
    assert e.width == 0.0


@settings(max_examples=100)
@given(st.floats(-1e6, 1e6), st.floats(0, 1e3), st.floats(1e-6, 1e3))
def test_enclosure_width_is_three_delta_m(v, d, m):
    e = enclosure_interval(v, d, m)
    assert e.width == pytest.approx(3 * d * m, rel=1e-9, abs=1e-6)
    assert v in e


# -- finesse_bounds -------------------------------------------------------------

def lookup_spec(table, lo, hi):
    return scalar_spec(lambda x: table[round(float(x[0]), 6)], (lo,), (hi,))


def test_finesse_example():
    spec = lookup_spec({0.5: 1.0, 1.5: 2.0, 2.5: 5.0}, 0.0, 3.0)
    fin = finesse_bounds(evaluate_level(subdivide(spec.domain, 3), spec), 2.0)
    assert (fin.a_k, fin.b_k) == (0.5, 2.0)


def test_finesse_all_equal():
    spec = scalar_spec(lambda x: 1.0, (0.0,), (1.0,))
    fin = finesse_bounds(evaluate_level(subdivide(spec.domain, 4), spec), 1.0)
    assert (fin.a_k, fin.b_k, fin.delta_in_range) == (0.0, 0.0, False)


def test_finesse_two_values():
    spec = lookup_spec({0.25: 0.0, 0.75: 3.0}, 0.0, 1.0)
    fr = evaluate_level(subdivide(spec.domain, 2), spec)
    assert fr.delta == 0.5
    fin = finesse_bounds(fr, 3.0)
    assert (fin.a_k, fin.b_k, fin.delta_in_range) == (1.0, 1.0, False)


# -- sieve_step -----------------------------------------------------------------

def test_sieve_step_linear():
    spec = scalar_spec(lambda x: float(x[0]), (0.0,), (1.0,))
    fr = evaluate_level([spec.domain], spec)
    nxt = sieve_step(fr, spec, 1.0, 2)
    assert nxt.values.tolist() == [0.25, 0.75]
    assert nxt.v_k == 0.25
    assert nxt.delta == fr.delta / 2


def test_sieve_step_constant_keeps_everything():
    spec = scalar_spec(lambda x: 1.0, (0.0,), (1.0,))
    fr = evaluate_level(subdivide(spec.domain, 5), spec)
    assert len(sieve_step(fr, spec, 0.1, 2)) == 10


def test_sieve_step_square_splits_middle_boxes():
    nxt = sieve_step(quarter_frontier(), square(), 0.5, 2)
    assert sorted(nxt.centers()[:, 0].tolist()) == [-0.375, -0.125, 0.125, 0.375]
    assert sorted(nxt.values.tolist()) == [0.015625, 0.015625, 0.140625, 0.140625]


def test_sieve_step_box_cap():
    with pytest.raises(BoxBudgetExceeded):
        sieve_step(quarter_frontier(), square(), 2.0, 2, GrsConfig(max_boxes=7))


# -- run_single_m ---------------------------------------------------------------

def test_run_single_m_shifted_square():
    f = lambda x: (np.asarray(x)[..., 0] - 0.3) ** 2  # noqa: E731
    spec = ObjectiveSpec("sq", Box((0.0,), (1.0,)), f, vectorized=True)
    # Independent oracle: 10^5 + 1 grid points.
    grid = np.linspace(0.0, 1.0, 100_001)
    vals = (grid - 0.3) ** 2
    oracle_min, oracle_arg = vals.min(), grid[vals.argmin()]
    assert oracle_min == pytest.approx(0.0, abs=1e-15) and oracle_arg == pytest.approx(0.3)

    cfg = GrsConfig(initial_split=10, refine_split=10, tol=1e-3)
    r = run_single_m(spec, 2.0, cfg)
    d = r.final_frontier.delta
    assert r.status is RunStatus.CONVERGED
    assert abs(r.v_final - oracle_min) <= 3 * d * 2.0
    assert r.final_frontier.contains_point([0.3])
    assert r.v_final == r.final_frontier.v_k
    assert r.v_final in r.enclosure
    assert d * 2.0 <= 1e-3 or d <= 1e-3


def test_run_single_m_constant():
    spec = scalar_spec(lambda x: 5.0, (0.0, 0.0), (1.0, 2.0))
    r = run_single_m(spec, 3.0, GrsConfig(initial_split=3, tol=0.05))
    assert r.v_final == 5.0
    assert all(s.bad_count == 0 for s in r.per_level_stats)
    assert len(r.final_frontier) == 9 * 4 ** (r.levels_run - 1)


def test_run_single_m_sphere_paper_partition():
    spec = ObjectiveSpec("sphere", Box((-5.0, -5.0), (5.0, 5.0)),
                         lambda x: np.sum(np.asarray(x) ** 2, axis=-1), vectorized=True)
    # Independent oracle: 1001^2 grid includes the origin.
    axis = np.linspace(-5, 5, 1001)
    oracle_min = float((axis[:, None] ** 2 + axis[None, :] ** 2).min())
    assert oracle_min == 0.0
    m = 10 * math.sqrt(2) + 0.1
    r = run_single_m(spec, m, GrsConfig())
    d = r.final_frontier.delta
    assert r.final_frontier.lattice.cells[0] % 60 == 0
    assert abs(r.v_final - oracle_min) <= 3 * d * m
    assert r.final_frontier.contains_point([0.0, 0.0])


def test_run_single_m_reports_box_cap():
    spec = scalar_spec(lambda x: 1.0, (0.0, 0.0), (1.0, 1.0))
    r = run_single_m(spec, 1.0, GrsConfig(initial_split=10, max_boxes=300))
    assert r.status is RunStatus.BOX_BUDGET_EXCEEDED
    assert r.levels_run == 1 and r.v_final == 1.0


def test_run_single_m_reports_eval_cap():
    spec = scalar_spec(lambda x: 1.0, (0.0, 0.0), (1.0, 1.0))
    r = run_single_m(spec, 1.0, GrsConfig(initial_split=10, max_evals=450))
    assert r.status is RunStatus.EVAL_BUDGET_EXCEEDED
    assert r.eval_count == 100


def test_run_single_m_on_level_sees_every_level():
    seen = []
    r = run_single_m(square(), 1.0, GrsConfig(initial_split=4, refine_split=3, tol=0.01),
                     on_level=lambda c: seen.append(c.frontier.level))
    assert seen == list(range(1, r.levels_run + 1))


# -- properties -----------------------------------------------------------------

@st.composite
def cone_problems(draw):
    """f(x) = c + s*|x - p|, Lipschitz constant s, unique minimizer p."""
    n = draw(st.integers(1, 2))
    lo = np.array([draw(st.floats(-5, 4)) for _ in range(n)])
    hi = lo + np.array([draw(st.floats(0.5, 5)) for _ in range(n)])
    p = np.array([draw(st.floats(0, 1)) for _ in range(n)]) * (hi - lo) + lo
    s = draw(st.floats(0.1, 10))
    c = draw(st.floats(-10, 10))
    f = lambda x: c + s * np.linalg.norm(np.asarray(x) - p, axis=-1)  # noqa: E731
    spec = ObjectiveSpec("cone", Box(tuple(lo), tuple(hi)), f, vectorized=True,
                         known_lipschitz=s, ground_truth_min=c,
                         ground_truth_minimizers=(tuple(p),))
    return spec


def small_config(draw_split, refine):
    return GrsConfig(initial_split=draw_split, refine_split=refine, tol=0.02)


@settings(max_examples=40, deadline=None)
@given(cone_problems(), st.integers(2, 7), st.integers(2, 3), st.floats(1.0, 3.0))
def test_containment_under_true_bound(spec, split, refine, factor):
    m = spec.known_lipschitz * factor
    (p,) = spec.ground_truth_minimizers

    def check(cls):
        fr = cls.frontier
        e = enclosure_interval(fr.v_k, fr.delta, m)
        assert e.lo <= spec.ground_truth_min <= e.hi
        assert cls.good_frontier().contains_point(p)

    run_single_m(spec, m, small_config(split, refine), on_level=check)


@settings(max_examples=40, deadline=None)
@given(cone_problems(), st.integers(2, 7), st.floats(0.05, 5.0))
def test_classification_partitions_and_keeps_argmin(spec, split, m):
    def check(cls):
        good, bad = cls.good_frontier().keys(), set(map(tuple, cls.frontier.index[~cls.good_mask]))
        assert not good & bad
        assert good | bad == cls.frontier.keys()
        assert cls.good_mask[cls.frontier.argmin]

    run_single_m(spec, m, small_config(split, 2), on_level=check)


@settings(max_examples=40, deadline=None)
@given(cone_problems(), st.integers(2, 7), st.sampled_from([3, 5]), st.floats(0.05, 5.0))
def test_odd_refinement_never_raises_v(spec, split, refine, m):
    r = run_single_m(spec, m, small_config(split, refine))
    vs = [s.v_k for s in r.per_level_stats]
    assert all(b <= a for a, b in zip(vs, vs[1:]))


@settings(max_examples=15, deadline=None)
@given(cone_problems(), st.integers(2, 7), st.floats(0.5, 5.0))
def test_parallel_evaluation_is_bit_identical(spec, split, m):
    base = GrsConfig(initial_split=split, refine_split=2, tol=0.02, chunk_size=7)
    a = run_single_m(spec, m, base)
    b = run_single_m(spec, m, base.with_(workers=3))
    assert np.array_equal(a.final_frontier.index, b.final_frontier.index)
    assert np.array_equal(a.final_frontier.values, b.final_frontier.values)
    assert a.per_level_stats == b.per_level_stats
