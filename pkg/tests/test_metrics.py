import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicml.metrics import (
    CorrelationError,
    average_ranks,
    correlation_report,
    kendall_tau,
    learning_curve,
    pearson,
    spearman,
)


# -- brute-force oracles -------------------------------------------------------


def pearson_oracle(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def rank_oracle(x):
    # rank = 1 + (#smaller) + (#equal - 1) / 2
    return [1 + sum(b < a for b in x) + (sum(b == a for b in x) - 1) / 2 for a in x]


def kendall_oracle(x, y):
    c = d = tx = ty = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            sx = np.sign(x[i] - x[j])
            sy = np.sign(y[i] - y[j])
            if sx == 0 and sy == 0:
                continue
            if sx == 0:
                tx += 1
            elif sy == 0:
                ty += 1
            elif sx == sy:
                c += 1
            else:
                d += 1
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def tied_vectors(rng, n=100):
    # few distinct values so ties are everywhere
    x = rng.integers(0, 12, size=n).astype(float)
    y = x + rng.integers(-4, 5, size=n)
    return x.tolist(), y.tolist()


# -- examples ------------------------------------------------------------------


def test_pearson_examples():
    x = np.arange(10.0)
    assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-15)
    assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-15)


def test_spearman_examples():
    x = np.linspace(0.1, 3, 20)
    assert spearman(x, np.exp(x) ** 3) == 1.0
    assert spearman(x, x[::-1]) == -1.0


def test_kendall_examples():
    assert kendall_tau([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0
    assert kendall_tau([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3, abs=1e-15)


def test_average_ranks_ties():
    assert average_ranks([10, 20, 20, 5]).tolist() == [2.0, 3.5, 3.5, 1.0]


@pytest.mark.parametrize("f", [pearson, spearman, kendall_tau])
def test_constant_side_is_an_error(f):
    with pytest.raises(CorrelationError):
        f([1, 1, 1], [1, 2, 3])
    with pytest.raises(CorrelationError):
        f([1, 2, 3], [4, 4, 4])


@pytest.mark.parametrize("f", [pearson, spearman, kendall_tau])
def test_shape_errors(f):
    with pytest.raises(CorrelationError):
        f([1.0], [2.0])
    with pytest.raises(CorrelationError):
        f([1, 2, 3], [1, 2])
    with pytest.raises(CorrelationError):
        f([1, 2, float("nan")], [1, 2, 3])


# -- oracle equivalence --------------------------------------------------------


def test_random_vectors_match_direct_formulas(rng):
    for _ in range(20):
        x, y = rng.normal(size=100), rng.normal(size=100)
        assert abs(pearson(x, y) - pearson_oracle(x.tolist(), y.tolist())) <= 1e-12


def test_tied_vectors_match_oracles(rng):
    for _ in range(100):
        x, y = tied_vectors(rng)
        assert abs(average_ranks(x) - np.array(rank_oracle(x))).max() == 0
        assert abs(spearman(x, y) - pearson_oracle(rank_oracle(x), rank_oracle(y))) <= 1e-12
        assert abs(kendall_tau(x, y) - kendall_oracle(x, y)) <= 1e-12
        assert abs(pearson(x, y) - pearson_oracle(x, y)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=2, max_size=60),
)
def test_kendall_property_vs_oracle(pairs):
    x = [float(a) for a, _ in pairs]
    y = [float(b) for _, b in pairs]
    if len(set(x)) < 2 or len(set(y)) < 2:
        with pytest.raises(CorrelationError):
            kendall_tau(x, y)
        return
    assert abs(kendall_tau(x, y) - kendall_oracle(x, y)) <= 1e-12


# -- invariants ----------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 10), st.floats(-5, 5))
def test_invariances_and_symmetry(seed, a, b):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=40), r.normal(size=40)
    assert pearson(x, y) == pytest.approx(pearson(a * x + b, y), abs=1e-12)
    assert spearman(x, y) == spearman(np.exp(x), y)
    assert kendall_tau(x, y) == kendall_tau(x**3, y)
    for f in (pearson, spearman, kendall_tau):
        assert f(x, y) == pytest.approx(f(y, x), abs=1e-14)
        assert -1.0 <= f(x, y) <= 1.0


def test_correlation_report():
    rep = correlation_report([1, 2, 3, 5], [2, 4, 6, 10])
    assert (rep.kendall, rep.spearman, rep.n) == (1.0, 1.0, 4)
    assert rep.as_row()["pearson"] == pytest.approx(1.0)


# -- learning curve ------------------------------------------------------------


def _linear_fit(x, y, seed):
    coef, *_ = np.linalg.lstsq(np.c_[x, np.ones(len(x))], y, rcond=None)
    return lambda xv: np.c_[xv, np.ones(len(xv))] @ coef


def test_learning_curve_full_pool_has_zero_std(rng):
    x = rng.normal(size=(60, 3))
    y = x @ [1.0, 2.0, -1.0] + rng.normal(scale=0.5, size=60)
    xv = rng.normal(size=(40, 3))
    yv = xv @ [1.0, 2.0, -1.0]
    pts = learning_curve(x, y, xv, yv, [10, 30, 60], _linear_fit, perturbations=10, seed=0)
    assert [p.size for p in pts] == [10, 30, 60]
    assert all(v == pytest.approx(0, abs=1e-12) for v in pts[-1].std.values())
    # mean Spearman non-decreasing in size up to 0.05
    s = [p.mean["spearman"] for p in pts]
    assert all(b >= a - 0.05 for a, b in zip(s, s[1:]))


def test_learning_curve_size_errors(rng):
    x, y = rng.normal(size=(10, 2)), rng.normal(size=10)
    with pytest.raises(ValueError):
        learning_curve(x, y, x, y, [11], _linear_fit)
    with pytest.raises(ValueError):
        learning_curve(x, y, x, y, [1], _linear_fit)
