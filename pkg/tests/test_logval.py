import math

import numpy as np
import pytest

from dlgeo.logval import LogScaledValue, log_sum


def test_roundtrip_and_extreme_scale():
    v = LogScaledValue.from_complex(1.5 - 0.5j)
    assert v.value() == pytest.approx(1.5 - 0.5j)
    big = LogScaledValue.from_complex(2.0, log_shift=-1e5)
    assert big.log_mag == pytest.approx(math.log(2.0) - 1e5)
    assert abs(big.phase - 1.0) < 1e-15


def test_mul_div_add():
    a = LogScaledValue.from_complex(3.0, log_shift=-500.0)
    b = LogScaledValue.from_complex(-2.0, log_shift=-500.0)
    assert (a * b).log_mag == pytest.approx(math.log(6.0) - 1000.0)
    assert (a * b).sign == -1
    assert (a / b).value() == pytest.approx(-1.5)
    s = a + b
    assert s.log_mag == pytest.approx(math.log(1.0) - 500.0)
    assert s.sign == 1


def test_log_sum_matches_direct(rng):
    vals = rng.normal(size=12) + 1j * rng.normal(size=12)
    direct = vals.sum()
    summed = log_sum([LogScaledValue.from_complex(v) for v in vals])
    assert summed.value() == pytest.approx(direct, rel=1e-13)


def test_cancelation_to_zero():
    a = LogScaledValue.from_complex(1.0)
    assert (a - a).is_zero()
    assert (a - a).sign == 0


def test_real_strict():
    v = LogScaledValue.from_complex(2.0 + 2e-9j, log_shift=-300.0)
    sign, lg = v.real_strict(tol=1e-6)
    assert sign == 1 and lg == pytest.approx(math.log(2.0) - 300.0, abs=1e-12)
    bad = LogScaledValue.from_complex(1.0 + 0.1j)
    with pytest.raises(ValueError):
        bad.real_strict(tol=1e-6)


def test_representable_range():
    lo = LogScaledValue.from_log(-1e6)
    hi = LogScaledValue.from_log(1e6)
    assert (lo * hi).log_mag == pytest.approx(0.0)
    assert (hi / lo).log_mag == pytest.approx(2e6)
