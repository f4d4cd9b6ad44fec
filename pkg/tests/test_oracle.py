"""Closed-form dead-core profile and analytic eigenpair oracles."""

import numpy as np
import pytest

from deadcore import example_instance, laplace_eigenpair_1d


def test_instance_arithmetic():
    inst = example_instance(1.0, 0.8)
    assert inst.r == pytest.approx(2.5)
    assert inst.v(np.pi / 2) == pytest.approx(0.4)
    # |a(0)| = r^q (r - 1)
    assert inst.negative_sup == pytest.approx(2.5 ** 0.8 * 1.5)
    assert abs(inst.a(0.0)) == pytest.approx(inst.negative_sup)


def test_pointwise_pde_identity():
    inst = example_instance(1.0, 0.8)
    x = np.linspace(-np.pi / 2 + 1e-9, np.pi - 1e-9, 1000)
    res = np.abs(np.abs(inst.dv(x)) ** inst.gamma * inst.d2v(x)
                 + inst.a(x) * inst.v(x) ** inst.q)
    assert float(np.max(res)) <= 1e-12


def test_validity_window_errors():
    with pytest.raises(ValueError, match="gamma"):
        example_instance(1.0, 0.4)     # needs gamma < 2q
    with pytest.raises(ValueError, match="q"):
        example_instance(0.5, 1.6)     # needs q < gamma+1


def test_weight_sign_pattern():
    inst = example_instance(1.0, 0.8)
    x = np.linspace(-np.pi / 2 + 1e-6, np.pi - 1e-6, 500)
    a = inst.a(x)
    neg = np.cos(x) ** 2 > 1.0 / inst.r
    pos = np.cos(x) ** 2 < 1.0 / inst.r
    assert np.all(a[neg] < 0)
    assert np.all(a[pos] > 0)
    assert np.any(neg) and np.any(pos)


def test_c1_gluing_at_zero():
    inst = example_instance(1.0, 0.8)
    hs = np.array([1e-2, 1e-3, 1e-4])
    # one-sided quotients of v and v' vanish as h -> 0 (r > 2)
    quot_v = inst.v(hs) / hs
    quot_dv = inst.dv(hs) / hs
    assert np.all(np.diff(quot_v) < 0) and quot_v[-1] < 1e-5
    assert np.all(np.diff(quot_dv) < 0) and quot_dv[-1] < 2e-2
    assert inst.v(0.0) == 0.0 and inst.dv(0.0) == 0.0 and inst.d2v(0.0) == 0.0


def test_laplace_eigenpair_values():
    assert laplace_eigenpair_1d((0.0, np.pi)).lambda_plus == pytest.approx(1.0)
    assert laplace_eigenpair_1d((0.0, 1.0)).lambda_plus == pytest.approx(np.pi ** 2)
    pair = laplace_eigenpair_1d((1.0, 3.0))
    assert pair.phi(2.0) == pytest.approx(1.0)
    assert pair.phi(1.0) == pytest.approx(0.0, abs=1e-15)
