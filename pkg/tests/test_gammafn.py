import math

import numpy as np
import pytest

from varker.gammafn import gamma, gamma_array


def test_matches_stdlib_on_unit_range():
    # the kernel moments only ever need (0, 3]; stdlib gamma is the oracle
    xs = np.linspace(1e-3, 3.0, 4001)
    worst = max(abs(gamma(float(x)) - math.gamma(float(x))) / math.gamma(float(x)) for x in xs)
    assert worst < 1e-13


def test_known_values():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma(2.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(1.5) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-14)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-13)


def test_poles_rejected():
    for x in (0.0, -1.0, -2.0):
        with pytest.raises(ValueError):
            gamma(x)


def test_array_variant_agrees_pointwise():
    xs = np.linspace(0.05, 2.0, 57)
    out = gamma_array(xs)
    ref = np.array([math.gamma(float(x)) for x in xs])
    assert np.max(np.abs(out - ref) / ref) < 1e-13


def test_array_variant_rejects_nonpositive():
    with pytest.raises(ValueError):
        gamma_array(np.array([0.5, -0.5]))
