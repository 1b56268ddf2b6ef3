"""Exact and log-scale enumeration of rooted triangulations of polygons.

Counts are of type II triangulations (multiple edges allowed, no self-loops)
of an m-gon with n internal vertices.  Boundary length m >= 2 is used directly
everywhere; the shift to the closed formula's index happens only inside
phi_closed / log_phi / z_closed.  The degenerate 2-gon with no internal vertex
counts as 1 (its two boundary edges identified into a single edge).

Two numeric regimes: exact big integers / Fractions for verification-scale
inputs, and log-gamma doubles for sampler-scale inputs where exact tables are
infeasible.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, ResourceError, TailBoundUnavailable

Q_CRIT = Fraction(2, 27)


def _check_nm(n, m):
    if not (isinstance(n, int) and isinstance(m, int)):
        raise DomainError("n and m must be integers, got (%r, %r)" % (n, m))
    if n < 0 or m < 2:
        raise DomainError("need n >= 0 and m >= 2, got (n=%d, m=%d)" % (n, m))


@lru_cache(maxsize=None)
def phi_closed(n, m):
    """Number of rooted triangulations of an m-gon with n internal vertices.

    Exact integer; the closed product formula is rational term by term, so
    integrality is asserted during evaluation.
    """
    _check_nm(n, m)
    mm = m - 2
    num = (
        2 ** (n + 1)
        * math.factorial(2 * mm + 1)
        * math.factorial(2 * mm + 3 * n)
    )
    den = (
        math.factorial(mm) ** 2
        * math.factorial(n)
        * math.factorial(2 * mm + 2 * n + 2)
    )
    q, r = divmod(num, den)
    if r != 0:
        raise AssertionError("non-integer count at (n=%d, m=%d)" % (n, m))
    return q


_REC_CAP = 64


@lru_cache(maxsize=None)
def _phi_rec(n, m, cap):
    # Root-face decomposition: the triangle on the root edge either has an
    # internal apex (boundary grows by one, n drops by one) or its apex is the
    # boundary vertex d steps away, splitting the polygon into a (d+1)-gon and
    # an (m-d)-gon sharing the internal vertices n1 + n2 = n.
    if m == 2:
        if n == 0:
            return 1
        return _phi_rec(n - 1, 3, cap)
    if n > cap or m > cap:
        raise ResourceError(
            "recurrence table exceeds cap %d at (n=%d, m=%d)" % (cap, n, m)
        )
    total = _phi_rec(n - 1, m + 1, cap) if n >= 1 else 0
    for d in range(1, m - 1):
        for n1 in range(n + 1):
            total += _phi_rec(n1, d + 1, cap) * _phi_rec(n - n1, m - d, cap)
    return total


def phi_recurrence(n, m, cap=_REC_CAP):
    """Independent oracle for phi_closed via the root-face decomposition.

    Memoized; raises ResourceError if the recursion needs entries beyond
    (cap, cap).  Intended for desk-scale cross-checks only.
    """
    _check_nm(n, m)
    return _phi_rec(n, m, cap)


def log_phi(n, m):
    """Natural log of phi_closed(n, m), via lgamma; good to ~1e-12 relative."""
    _check_nm(n, m)
    mm = m - 2
    return (
        (n + 1) * math.log(2.0)
        + math.lgamma(2 * mm + 2)
        + math.lgamma(2 * mm + 3 * n + 1)
        - 2.0 * math.lgamma(mm + 1)
        - math.lgamma(n + 1)
        - math.lgamma(2 * mm + 2 * n + 3)
    )


def catalan(k):
    """The k-th Catalan number (2k)! / (k! (k+1)!)."""
    if k < 0:
        raise DomainError("k must be >= 0")
    return math.comb(2 * k, k) // (k + 1)


def theta_of_q(q, iters=200):
    """Invert q = theta (1 - 2 theta)^2 on [0, 1/6] by bisection.

    The cubic is strictly increasing there (derivative (1-2t)(1-6t) >= 0), so
    bisection is unconditionally stable.  Forward residual <= 1e-14.
    """
    qf = float(q)
    if not (0.0 <= qf <= float(Q_CRIT) * (1 + 1e-15)):
        raise DomainError("q must lie in [0, 2/27], got %r" % (q,))
    lo, hi = 0.0, 1.0 / 6.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid * (1.0 - 2.0 * mid) ** 2 < qf:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    if abs(theta * (1.0 - 2.0 * theta) ** 2 - qf) > 1e-14:
        raise AssertionError("bisection residual too large for q=%r" % (q,))
    return theta


def _check_theta(theta):
    t = float(theta)
    if not (0.0 <= t <= 1.0 / 6.0 + 1e-15):
        raise DomainError("theta must lie in [0, 1/6], got %r" % (theta,))


def q_of_theta(theta):
    """Forward map theta -> theta (1 - 2 theta)^2; exact on Fractions."""
    _check_theta(theta)
    return theta * (1 - 2 * theta) ** 2


def z_closed(m, theta):
    """Partition function Z_m(q) at q = theta(1-2theta)^2, closed form.

    Exact Fraction when theta is a Fraction (or int), float otherwise.
    """
    if m < 2:
        raise DomainError("m must be >= 2")
    _check_theta(theta)
    mm = m - 2
    if isinstance(theta, int):
        theta = Fraction(theta)
    if isinstance(theta, Fraction):
        coeff = (1 - 6 * theta) * (mm + 1) + 1
        binom = Fraction(math.factorial(2 * mm),
                         math.factorial(mm) * math.factorial(mm + 2))
        return coeff * binom * (1 - 2 * theta) ** (-(2 * mm + 2))
    t = float(theta)
    return math.exp(log_z(m, t))


def log_z(m, theta):
    """log Z_m at q = theta(1-2theta)^2 in doubles; stable for large m."""
    if m < 2:
        raise DomainError("m must be >= 2")
    t = float(theta)
    _check_theta(t)
    mm = m - 2
    coeff = (1.0 - 6.0 * t) * (mm + 1) + 1.0
    return (
        math.log(coeff)
        + math.lgamma(2 * mm + 1)
        - math.lgamma(mm + 1)
        - math.lgamma(mm + 3)
        - (2 * mm + 2) * math.log1p(-2.0 * t)
    )


# The term ratio phi(n+1,m)/phi(n,m) tends to 27/2 as n grows, but it is NOT
# below 27/2 uniformly: writing u = 2(m-2), the excess
#     ratio(n) - 27/2  has the sign of
#     f(n) = -270 n^2 + (9u^2 - 153u - 570) n + (4u^3 - 3u^2 - 145u - 300),
# a downward parabola in n, so the ratio exceeds 27/2 on (at most) a single
# interval of n.  Past that interval the tail is dominated by a geometric
# series of ratio 13.5*q, which converges for q < 2/27.
_RATIO_SUP = Fraction(27, 2)


def _ratio_excess_sign(n, u):
    return (
        -270 * n * n
        + (9 * u * u - 153 * u - 570) * n
        + (4 * u ** 3 - 3 * u * u - 145 * u - 300)
    )


def z_series(m, q, cutoff):
    """Truncated series for Z_m(q) with a rigorous tail bound.

    Returns (lower, tail_bound) with lower <= Z_m(q) <= lower + tail_bound.
    The partial sum is computed in exact rational arithmetic and rounded
    down; the bound on the omitted tail is rounded up.  If the geometric
    domination does not yet hold at `cutoff`, exact terms are added beyond it
    until it does (the returned bracket is always valid).
    """
    if m < 2:
        raise DomainError("m must be >= 2")
    if cutoff < 1:
        raise DomainError("cutoff must be >= 1")
    qf = Fraction(q)
    if qf < 0:
        raise DomainError("q must be >= 0")
    if qf >= Q_CRIT:
        raise TailBoundUnavailable(
            "geometric tail bound needs q < 2/27, got %r" % (q,)
        )
    u = 2 * (m - 2)
    # smallest k past the parabola vertex with ratio <= 27/2 for all n >= k
    vertex = max(0, -(-(9 * u * u - 153 * u - 570) // 540))
    k = cutoff + 1
    while k < vertex or _ratio_excess_sign(k, u) > 0:
        k += 1
    partial = Fraction(0)
    qpow = Fraction(1)
    for n in range(k):
        partial += phi_closed(n, m) * qpow
        qpow *= qf
    # qpow is now q^k; ratio(n) <= 27/2 for every n >= k
    tail = phi_closed(k, m) * qpow / (1 - _RATIO_SUP * qf)
    lower = float(partial)
    if lower > partial:
        lower = math.nextafter(lower, -math.inf)
    # the returned bound covers Z - lower, so the rounding of the partial sum
    # down to `lower` is folded into the tail before rounding it up
    tail += partial - Fraction(lower)
    tail_f = float(tail)
    if tail_f < tail:
        tail_f = math.nextafter(tail_f, math.inf)
    return lower, tail_f


def quad_count(m, n):
    """Number of rooted quadrangulations of a 2m-gon with n internal vertices."""
    if m < 1 or n < 0:
        raise DomainError("need m >= 1 and n >= 0, got (m=%d, n=%d)" % (m, n))
    val = (
        Fraction(3) ** (n - 1)
        * Fraction(math.factorial(3 * m),
                   math.factorial(m) * math.factorial(2 * m - 1))
        * Fraction(math.factorial(2 * n + 3 * m - 3),
                   math.factorial(n) * math.factorial(n + 3 * m - 1))
    )
    if val.denominator != 1:
        raise AssertionError("non-integer quad count at (m=%d, n=%d)" % (m, n))
    return val.numerator


def ratio_limit(j, k, a):
    """Limit of phi(n-k, m-j)/phi(n, m) along m ~ a*n as n -> infinity.

    a = math.inf is allowed; the two bases degenerate to 1/4 and 0.
    """
    if a == math.inf:
        base_j, base_k = 0.25, 0.0
    else:
        af = float(a)
        if af < 0:
            raise DomainError("a must be in [0, inf]")
        base_j = (af + 1.0) ** 2 / (2.0 * af + 3.0) ** 2
        base_k = 2.0 * (af + 1.0) ** 2 / (2.0 * af + 3.0) ** 3
    return base_j ** j * base_k ** k
