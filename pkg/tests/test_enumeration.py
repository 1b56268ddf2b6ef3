import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hptri.enumeration import (
    Q_CRIT,
    catalan,
    log_phi,
    phi_closed,
    phi_recurrence,
    q_of_theta,
    quad_count,
    ratio_limit,
    theta_of_q,
    z_closed,
    z_series,
)
from hptri.errors import DomainError, ResourceError, TailBoundUnavailable

PINNED = {(0, 2): 1, (0, 3): 1, (1, 3): 4, (0, 4): 2, (0, 5): 5}


def test_pinned_counts():
    for (n, m), want in PINNED.items():
        assert phi_closed(n, m) == want
        assert phi_recurrence(n, m) == want


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10), st.integers(2, 10))
def test_closed_equals_recurrence(n, m):
    assert phi_closed(n, m) == phi_recurrence(n, m)


def test_catalan_identity():
    for k in range(21):
        assert phi_closed(0, k + 2) == catalan(k)
    assert catalan(0) == 1 and catalan(3) == 5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 30), st.integers(2, 30))
def test_log_phi_matches_exact(n, m):
    assert math.isclose(log_phi(n, m), math.log(phi_closed(n, m)),
                        rel_tol=1e-11, abs_tol=1e-11)


def test_term_ratio_excess_quadratic():
    # the geometric tail of z_series needs the exact location of the region
    # where phi(n+1,m)/phi(n,m) exceeds 27/2; the sign is a quadratic in n
    from hptri.enumeration import _ratio_excess_sign

    for m in range(2, 20):
        u = 2 * (m - 2)
        for n in range(80):
            r = Fraction(phi_closed(n + 1, m), phi_closed(n, m))
            assert (r > Fraction(27, 2)) == (_ratio_excess_sign(n, u) > 0)


def test_domain_errors():
    with pytest.raises(DomainError):
        phi_closed(-1, 3)
    with pytest.raises(DomainError):
        phi_closed(0, 1)
    with pytest.raises(DomainError):
        phi_closed(1.5, 3)
    with pytest.raises(ResourceError):
        phi_recurrence(4, 3, cap=2)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=0, max_value=Fraction(1, 6)))
def test_theta_q_round_trip(theta):
    q = q_of_theta(theta)
    t = theta_of_q(q)
    assert abs(t * (1 - 2 * t) ** 2 - float(q)) <= 1e-14


def test_theta_endpoints():
    assert theta_of_q(0) <= 1e-12
    # dq/dtheta vanishes at the critical point, so theta is recovered only to
    # about sqrt(residual) there
    assert abs(theta_of_q(Q_CRIT) - 1.0 / 6.0) < 1e-6


def test_z_exact_critical_values():
    assert z_closed(2, Fraction(1, 6)) == Fraction(9, 8)
    assert z_closed(3, Fraction(1, 6)) == Fraction(27, 16)
    assert z_closed(4, 0) == phi_closed(0, 4)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(2, 12),
    st.fractions(min_value=0, max_value=Fraction(7, 100)),
    st.integers(1, 14),
)
def test_z_series_brackets_closed_form(m, q, cutoff):
    lower, tail = z_series(m, q, cutoff)
    theta = 0 if q == 0 else theta_of_q(q)
    z = z_closed(m, theta)
    # the bracket is exact for the true Z; z_closed is itself a double
    # approximation, so allow a few ulp of slack around it
    eps = 5e-14 * float(z)
    assert lower - eps <= z <= lower + tail + eps


def test_z_series_needs_subcritical_q():
    with pytest.raises(TailBoundUnavailable):
        z_series(3, Q_CRIT, 5)


def test_quad_counts():
    assert quad_count(1, 0) == 1
    assert quad_count(2, 0) == 1  # the square face itself, nothing inside
    with pytest.raises(DomainError):
        quad_count(0, 1)


def test_ratio_limit_values():
    assert ratio_limit(0, 0, 1.0) == 1.0
    assert ratio_limit(1, 0, math.inf) == 0.25
    assert ratio_limit(0, 1, math.inf) == 0.0
    # a = 0 reproduces the half-plane constants: (1/3)^2 and 2/27
    assert math.isclose(ratio_limit(1, 0, 0.0), 1.0 / 9.0)
    assert math.isclose(ratio_limit(0, 1, 0.0), 2.0 / 27.0)


def test_ratio_limit_is_the_count_ratio_limit():
    # phi(n-1, m)/phi(n, m) along m = n approaches ratio_limit(0, 1, 1)
    n = 4000
    got = math.exp(log_phi(n - 1, n) - log_phi(n, n))
    assert math.isclose(got, ratio_limit(0, 1, 1.0), rel_tol=2e-3)
