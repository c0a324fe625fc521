import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import special

from rsa_kinetics.errors import BracketError, QuadratureError
from rsa_kinetics.specfun import EIN_SWITCH, e1, ein, find_root, integrate, integrate_semi_infinite, log_beta

# 30-digit reference values
EIN_FROZEN = {
    1e-8: 9.9999999750000002648e-9,
    0.5: 0.44384207911774836294,
    3.9: 1.942459363318352153,
    4.1: 1.9915515192478646051,
    20.0: 3.5729479385538791069,
    300.0: 6.28099813955773392,
}


@pytest.mark.parametrize("z, expected", sorted(EIN_FROZEN.items()))
def test_ein_frozen(z, expected):
    assert ein(z) == pytest.approx(expected, rel=1e-13, abs=1e-22)


def test_ein_zero_and_negative():
    assert ein(0.0) == 0.0
    with pytest.raises(ValueError):
        ein(-1.0)


@given(st.floats(min_value=1e-3, max_value=50.0))
def test_ein_matches_e1_identity(z):
    # Ein(z) = E1(z) + ln z + gamma
    assert ein(z) == pytest.approx(special.exp1(z) + math.log(z) + 0.5772156649015329, rel=1e-12, abs=1e-14)


def test_ein_continuous_at_switch():
    lo, hi = ein(EIN_SWITCH * (1 - 1e-12)), ein(EIN_SWITCH * (1 + 1e-12))
    assert abs(hi - lo) < 1e-11


@given(st.floats(min_value=0.0, max_value=100.0), st.floats(min_value=1e-3, max_value=10.0))
def test_ein_increasing(z, dz):
    assert ein(z + dz) >= ein(z)


def test_e1_against_scipy():
    for z in (0.1, 1.0, 5.0, 30.0):
        assert e1(z) == pytest.approx(special.exp1(z), rel=1e-12)


def test_log_beta_frozen():
    assert log_beta(2.5, 0.75) == pytest.approx(-0.44783810920451082714, rel=1e-14)


@given(st.floats(min_value=0.01, max_value=50), st.floats(min_value=0.01, max_value=50))
def test_log_beta_symmetric(a, b):
    assert log_beta(a, b) == pytest.approx(log_beta(b, a), abs=1e-12)


def test_log_beta_domain():
    with pytest.raises(ValueError):
        log_beta(0.0, 1.0)


def test_integrate_polynomial_exact():
    r = integrate(lambda x: x**3 - 2 * x, 0.0, 2.0)
    assert r.converged
    assert r.value == pytest.approx(0.0, abs=1e-12)


def test_integrate_against_quad():
    f = lambda x: math.exp(-x) * math.sin(3 * x)
    ref, _ = sp_integrate.quad(f, 0, 5, epsabs=1e-13)
    assert integrate(f, 0.0, 5.0, tol=1e-11).value == pytest.approx(ref, abs=1e-10)


def test_integrate_empty_and_reversed():
    assert integrate(math.cos, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(math.cos, 1.0, 0.0)


def test_integrate_singular_endpoint():
    r = integrate(lambda x: 1 / math.sqrt(x) if x > 0 else math.inf, 0.0, 1.0, tol=1e-8)
    assert r.value == pytest.approx(2.0, abs=1e-3)


def test_integrate_reports_nan_location():
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda x: math.nan if x > 0.5 else 1.0, 0.0, 1.0)
    assert exc.value.location is not None


def test_semi_infinite_with_tail():
    r = integrate_semi_infinite(lambda x: math.exp(-x), 1e-10, lambda T: math.exp(-T))
    assert r.value == pytest.approx(1.0, abs=1e-9)


def test_find_root():
    assert find_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1, -1.0, 1.0)
