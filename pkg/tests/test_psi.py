import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rifields.errors import DiagnosticWarning, DomainError
from rifields.psi import (ROSENTHAL_CONSTANT, ROSENTHAL_CONSTANT_SYMMETRIC, MomentCurve,
                          PsiFunction, gaussian_moment_root, gls_norm, natural_function,
                          rosenthal_transform)

# sup_p |Z|_p / sqrt(p) by a 2e5-point log grid on the closed gamma formula
GAUSS_PSI2 = 0.7978845608026928


def test_gaussian_moment_root_low_orders():
    assert gaussian_moment_root(2.0) == pytest.approx(1.0, rel=1e-14)
    assert gaussian_moment_root(4.0) == pytest.approx(3.0 ** 0.25, rel=1e-14)
    assert gaussian_moment_root(1.0, 2.0) == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-14)


def test_power_psi_is_normalized():
    psi = PsiFunction.power(2)
    p = psi.grid()
    assert psi(p).min() >= 1 - 1e-12
    assert psi(4.0) == pytest.approx(2.0)


def test_psi_rejects_outside_support():
    psi = PsiFunction.power(2)
    with pytest.raises(DomainError):
        psi(1.0)
    with pytest.raises(DomainError):
        PsiFunction.constant(1.0, support=(3.0, 2.0))


def test_gaussian_norm_matches_oracle():
    assert gls_norm(MomentCurve.gaussian(), PsiFunction.power(2)) == pytest.approx(GAUSS_PSI2, rel=1e-9)


def test_constant_and_uniform_norms():
    psi = PsiFunction.power(2)
    assert gls_norm(MomentCurve.constant(3.0), psi) == pytest.approx(3.0, rel=1e-8)
    unif = MomentCurve(lambda p: (1.0 / (p + 1)) ** (1.0 / p))
    assert gls_norm(unif, psi) == pytest.approx(0.5, rel=1e-8)


def test_norm_is_infinite_for_fast_growing_moments():
    lognormal = MomentCurve(lambda p: np.exp(np.asarray(p) / 2.0))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        v = gls_norm(lognormal, PsiFunction.power(2))
    assert math.isinf(v)
    assert any(issubclass(r.category, DiagnosticWarning) for r in rec)


def test_slow_growth_is_truncated_at_the_grid_cap():
    # |Z|_p / p^(1/3) grows like p^(1/6): below the 10x-median rule, so the
    # sup over (1, 400) is returned (reference from the gamma formula)
    v = gls_norm(MomentCurve.gaussian(), PsiFunction.power(3))
    assert v == pytest.approx(1.6478037203095157, rel=1e-7)


def test_zero_curve_has_zero_norm():
    assert gls_norm(MomentCurve.zero(), PsiFunction.power(2)) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100.0))
def test_norm_is_homogeneous(c):
    psi = PsiFunction.power(2)
    base = gls_norm(MomentCurve.gaussian(), psi)
    assert gls_norm(MomentCurve.gaussian(c), psi) == pytest.approx(c * base, rel=1e-9)


def test_natural_function_gives_unit_norms():
    fam = [MomentCurve.gaussian(s) for s in (0.5, 1.0, 2.0)]
    psi = natural_function(fam)
    for c in fam:
        assert gls_norm(c, psi) <= 1.0 + 1e-9
    assert max(gls_norm(c, psi) for c in fam) == pytest.approx(1.0, abs=1e-9)


def test_rosenthal_values():
    psi = PsiFunction.power(2)
    r = rosenthal_transform(psi)
    assert r.support == (2.0, math.inf)
    # C_R * 4 / ln 4 * sqrt(4)
    assert r(4.0) == pytest.approx(ROSENTHAL_CONSTANT * 8 / math.log(4), rel=1e-12)
    assert r(4.0) == pytest.approx(10.251098466937348, rel=1e-12)
    rs = rosenthal_transform(psi, symmetric=True)
    assert rs(4.0) / r(4.0) == pytest.approx(ROSENTHAL_CONSTANT_SYMMETRIC / ROSENTHAL_CONSTANT)


def test_rosenthal_minimum_is_at_e_for_constant_psi():
    r = rosenthal_transform(PsiFunction.constant(1.0))
    p = np.geomspace(2.0001, 50, 20001)
    assert p[np.argmin(r(p))] == pytest.approx(math.e, rel=1e-3)
    assert r(p).min() == pytest.approx(ROSENTHAL_CONSTANT * math.e, rel=1e-7)


def test_rosenthal_needs_room_above_two():
    with pytest.raises(DomainError):
        rosenthal_transform(PsiFunction.constant(1.0, support=(1.0, 2.0)))


def test_sample_moment_curve_matches_direct_formula(rng):
    x = rng.standard_normal(500)
    c = MomentCurve.from_samples(x)
    for p in (1.5, 3.0, 7.0):
        assert c(p) == pytest.approx(np.mean(np.abs(x) ** p) ** (1 / p), rel=1e-12)


def test_record_round_trip():
    for psi in (PsiFunction.power(2), rosenthal_transform(PsiFunction.power(1)),
                PsiFunction.tabulated([1.5, 3, 9], [1.0, 1.5, 3.0], support=(1.0, math.inf))):
        back = PsiFunction.from_record(psi.to_record())
        p = np.array([2.5, 4.0, 30.0])
        np.testing.assert_allclose(back(p), psi(p), rtol=1e-12)
