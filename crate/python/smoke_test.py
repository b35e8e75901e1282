"""Smoke test for the Python bindings.

Build and install first:

    pip install --no-build-isolation ./crates/py

Then run ``python python/smoke_test.py`` or ``pytest python/smoke_test.py``.
"""

import math

import hadamard_vo_py as hv


def close(x, y, rel):
    return abs(x - y) <= rel * abs(y)


def test_special_functions():
    assert close(hv.gamma(0.5), math.sqrt(math.pi), 1e-14)
    assert close(hv.gamma(-0.5), -2.0 * math.sqrt(math.pi), 1e-13)
    assert close(hv.digamma(1.0), -0.5772156649015329, 1e-13)
    assert close(hv.gen_binomial(0.5, 2), 0.375, 1e-15)


def test_marchaud_of_log_square_at_e():
    t = math.e
    # 2/Γ(3 − t/10)·(ln t)^{2 − t/10} with ln t = 1
    expected = 2.0 / math.gamma(3.0 - t / 10.0)
    assert close(hv.closed_form("marchaud", t), expected, 1e-12)
    assert close(hv.oracle("marchaud", t), expected, 1e-9)


def test_expansion_is_bounded():
    points = [1.5, 2.5, 3.5, 4.5]
    approx = hv.approximate("integral", points, n=1, big_n=4)
    for t, v in zip(points, approx):
        err = abs(v - hv.closed_form("integral", t))
        assert err <= hv.error_bound("integral", t, n=1, big_n=4)


def test_solvers():
    fde = hv.solve_fde(big_n=5)
    assert fde["t"][-1] == 5.0
    assert abs(fde["x"][-1] - math.log(5.0) ** 2) <= 0.05
    assert fde["l2_error"][0] <= 0.1
    fvp = hv.solve_fvp(big_n=3)
    assert fvp["residual_norm"][0] <= 1e-8
    assert abs(fvp["x"][-1] - math.log(5.0) ** 2) <= 1e-8
    assert fvp["l2_error"][0] <= 0.1


def test_errors():
    for call in (
        lambda: hv.closed_form("marchaud", 2.0, order=(1.5, 0.0)),
        lambda: hv.oracle("riesz", 2.0),
        lambda: hv.approximate("caputo", [2.0], side="right"),
    ):
        try:
            call()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        hv.gamma(0.0)
    except ArithmeticError:
        pass
    else:
        raise AssertionError("expected ArithmeticError at the pole")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
    print("smoke test passed")
