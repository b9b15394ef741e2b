import math

import pytest

from exactmultinom import BracketError, itp_bracket, itp_root


def bound(a, b, eps, n0=1):
    return math.ceil(math.log2((b - a) / (2 * eps))) + n0


def test_linear():
    assert itp_root(lambda x: x - 0.5, 0, 1, eps=1e-8) == pytest.approx(0.5, abs=1e-8)


def test_sqrt2():
    assert itp_root(lambda x: x * x - 2, 1, 2, eps=1e-8) == pytest.approx(math.sqrt(2), abs=1e-8)


def test_step():
    step = lambda x: -1.0 if x < 0.3 else 1.0
    res = itp_bracket(step, 0, 1, eps=1e-6)
    assert abs(res.root - 0.3) <= 1e-6
    assert res.a < 0.3 <= res.b
    assert res.iterations <= bound(0, 1, 1e-6)


def test_decreasing_function():
    res = itp_bracket(lambda x: 0.25 - x, 0, 1, eps=1e-9)
    assert res.root == pytest.approx(0.25, abs=1e-9)
    assert res.fa >= 0 >= res.fb


def test_root_on_endpoint():
    assert itp_root(lambda x: x, 0, 1) == 0.0
    assert itp_root(lambda x: x - 1, 0, 1) == 1.0


def test_no_sign_change():
    with pytest.raises(BracketError, match=r"f\(a\)=1.0, f\(b\)=2.0"):
        itp_root(lambda x: x + 1, 0, 1)


def test_bad_bracket():
    with pytest.raises(BracketError):
        itp_root(lambda x: x, 1, 0)


def test_known_endpoint_values_are_not_recomputed():
    calls = []

    def f(x):
        calls.append(x)
        return x - 0.3

    res = itp_bracket(f, 0, 1, eps=1e-4, fa=-0.3, fb=0.7)
    assert 0.0 not in calls and 1.0 not in calls
    assert len(calls) == res.iterations
