import math

import numpy as np
import pytest

from dlgeo.asymptotics import (
    convergence_study,
    fgue_tail,
    fit_decay_exponent,
    gaussian_product,
    remark2_coefficient,
    remark2_probability,
    study_to_csv,
    t11_leading,
)
from dlgeo.errors import DomainError


def test_gaussian_product_values():
    assert gaussian_product(0.0, 0.0) == pytest.approx(1.0 / (2 * math.pi))
    assert gaussian_product(1.0, 0.0) == pytest.approx(math.exp(-0.5) / (2 * math.pi))
    assert gaussian_product(0.3, 0.7) == pytest.approx(gaussian_product(0.7, 0.3))


def test_t11_leading_log_value():
    v = t11_leading(16.0, 0.0, 0.0, 0.5)
    want = -(256.0 / 3.0) - math.log(64.0 * math.pi ** 2)
    assert v.log_mag == pytest.approx(want, abs=1e-12)
    assert v.sign == 1


def test_t11_leading_monotone_in_radius():
    vals = [t11_leading(16.0, e, x, 0.5).log_mag
            for (e, x) in ((0, 0), (1, 0), (1, 1), (2, 1))]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_fgue_tail_value_and_algebra():
    v = fgue_tail(10.0)
    assert math.exp(v.log_mag) == pytest.approx(1.94e-21, rel=0.01)
    L = 3.7
    lhs = fgue_tail(L).log_mag - fgue_tail(4 * L).log_mag
    rhs = (4.0 / 3.0) * 7.0 * L ** 1.5 + math.log(4.0)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_closed_forms_vs_30_digit_oracle():
    import mpmath as mp
    with mp.workdps(30):
        for L, ell, x, s in ((9.0, 0.0, 0.0, 0.5), (16.0, 1.0, 1.0, 0.5),
                             (25.0, 0.5, -1.0, 0.3)):
            want = (-(mp.mpf(4) / 3) * mp.mpf(L) ** mp.mpf(1.5)
                    - (mp.mpf(ell) ** 2 + mp.mpf(x) ** 2) / 2
                    - mp.log(16 * mp.pi ** 2 * mp.mpf(s) * (1 - mp.mpf(s)) * L))
            assert t11_leading(L, ell, x, s).log_mag == pytest.approx(float(want), abs=1e-10)
        for L in (6.0, 10.0, 25.0):
            want = -(mp.mpf(4) / 3) * mp.mpf(L) ** mp.mpf(1.5) - mp.log(8 * mp.pi * L)
            assert fgue_tail(L).log_mag == pytest.approx(float(want), abs=1e-10)
        for s in (0.3, 0.5, 0.7):
            want = (2 * mp.mpf(s) - 1) / (2 * mp.sqrt(mp.mpf(s) * (1 - mp.mpf(s))))
            assert remark2_coefficient(s) == pytest.approx(float(want), abs=1e-14)


def test_remark2_coefficient_values():
    assert remark2_coefficient(0.5) == 0.0
    assert remark2_coefficient(0.7) == pytest.approx(0.4 / (2 * math.sqrt(0.21)))
    with pytest.raises(DomainError):
        remark2_coefficient(1.0)


def test_remark2_probability_structure():
    # symmetric ell interval kills the first-moment correction
    sym = remark2_probability(9.0, (-1.0, 1.0), (-0.7, 0.7), 0.7)
    mass_x = math.erf(1.0 / math.sqrt(2))
    mass_e = math.erf(0.7 / math.sqrt(2))
    assert sym == pytest.approx(mass_x * mass_e, rel=1e-14)
    # one-sided interval picks up the (2s-1) term with the right sign
    lo = remark2_probability(9.0, (-1.0, 1.0), (0.0, 1.0), 0.7)
    base = remark2_probability(9.0, (-1.0, 1.0), (0.0, 1.0), 0.5)
    assert lo > base


def test_remark2_first_moment_integral():
    import mpmath as mp
    a, b = 0.3, 1.7
    want = float(mp.quad(lambda t: t * mp.exp(-t * t / 2) / mp.sqrt(2 * mp.pi), [a, b]))
    phi = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    assert phi(a) - phi(b) == pytest.approx(want, rel=1e-12)


def test_fit_decay_exponent_recovers_synthetic():
    Ls = [9.0, 16.0, 25.0, 36.0]
    errs = [3.0 * L ** -1.25 for L in Ls]
    alpha, logc, hw = fit_decay_exponent(Ls, errs)
    assert alpha == pytest.approx(1.25, abs=1e-12)
    assert logc == pytest.approx(math.log(3.0), abs=1e-12)


def test_convergence_study_smoke_and_determinism():
    result = convergence_study([9.0, 16.0], 0.5, [(0.0, 0.0)])
    assert [r.L for r in result.records] == [9.0, 16.0]
    errs = [r.abs_err for r in result.records]
    assert errs[1] < errs[0]
    # parallel run must reproduce the records bit for bit
    result2 = convergence_study([9.0, 16.0], 0.5, [(0.0, 0.0)], threads=2)
    for a, b in zip(result.records, result2.records):
        assert a.ratio == b.ratio and a.abs_err == b.abs_err


def test_convergence_study_failure_markers():
    result = convergence_study([9.0], 0.5, [(0.0, 0.0), (-20.0, 0.0)])
    ok, bad = result.records
    assert ok.error is None
    assert bad.error is not None and math.isnan(bad.ratio)
    # aggregate ignores the failed point
    assert math.isfinite(result.point_signed_coefficient(0.0, 0.0))


def test_study_csv_shape(tmp_path):
    result = convergence_study([9.0, 16.0], 0.5, [(0.0, 0.0)])
    text = study_to_csv(result, tmp_path / "study.csv")
    lines = text.strip().splitlines()
    assert lines[0] == "L,s,ell,x,ratio,abs_err,alpha_fit"
    assert len(lines) == 1 + 2 + 1 + 1  # records + per-point aggregate + overall
    assert lines[-1].startswith("aggregate,")
    assert (tmp_path / "study.csv").read_text() == text
