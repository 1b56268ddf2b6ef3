"""Single-step peeling law for the one-parameter half-planar family.

A law is the pair (alpha, beta): alpha is the probability that the peeled
triangle's apex is a fresh internal vertex; a triangle whose apex sits on the
boundary at distance i >= 1 (either side), enclosing k internal vertices,
carries probability phi(k, i+1) alpha^k beta^(i+k).  beta is pinned by total
mass one, with two branches meeting at alpha = 2/3:

    beta = (2 - alpha)^2 / 16   (alpha <= 2/3, theta = alpha/4)
    beta = alpha (1 - alpha)/2  (alpha >= 2/3, theta = (1 - alpha)/2)

Exact rational arithmetic is used whenever alpha is rational and indices are
small; log-space doubles otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .enumeration import (
    log_phi,
    log_z,
    phi_closed,
    q_of_theta,
    theta_of_q,
    z_closed,
)
from .errors import DomainError, NumericAnomaly

_EXACT_MAX_I = 64
_TWO_THIRDS = Fraction(2, 3)


@dataclass(frozen=True)
class PeelEvent:
    """One peeling step: a fresh internal apex, or a boundary reattachment.

    kind is 'alpha' or 'boundary'.  Boundary events carry the side, the
    boundary distance i >= 1 of the apex, the number k >= 0 of internal
    vertices enclosed, and (when produced by a map builder) the canonical
    code of the enclosed patch so that logs replay bit-exactly.
    """

    kind: str
    side: str | None = None
    i: int | None = None
    k: int | None = None
    patch_code: tuple | None = None

    def __post_init__(self):
        if self.kind == "alpha":
            if self.side is not None or self.i is not None or self.k is not None:
                raise DomainError("alpha events carry no (side, i, k)")
        elif self.kind == "boundary":
            if self.side not in ("left", "right"):
                raise DomainError("side must be 'left' or 'right'")
            if not (isinstance(self.i, int) and self.i >= 1):
                raise DomainError("i must be an int >= 1")
            if not (isinstance(self.k, int) and self.k >= 0):
                raise DomainError("k must be an int >= 0")
        else:
            raise DomainError("kind must be 'alpha' or 'boundary'")

    def key(self):
        """The (kind, side, i, k) tuple, ignoring the patch code."""
        return (self.kind, self.side, self.i, self.k)


@dataclass(frozen=True)
class QSummary:
    """Vertex/face counts of a finite boundary-touching sub-map event.

    v_total = V(Q), v_boundary = V(B) (vertices of Q on the original
    boundary), faces = F(Q).  If boundary_edge_count = |dQ| is supplied the
    consistency relation F = 2 V(B) - |dQ| - 2 is checked.
    """

    v_total: int
    v_boundary: int
    faces: int
    boundary_edge_count: int | None = None

    def __post_init__(self):
        if self.v_boundary < 2 or self.faces < 1:
            raise DomainError("need v_boundary >= 2 and faces >= 1")
        if self.v_total < self.v_boundary:
            raise DomainError("v_total must be >= v_boundary")
        if self.boundary_edge_count is not None:
            expect = 2 * self.v_boundary - self.boundary_edge_count - 2
            if self.faces != expect:
                raise DomainError(
                    "faces=%d inconsistent with 2*V(B)-|dQ|-2=%d"
                    % (self.faces, expect)
                )


@dataclass(frozen=True)
class PeelLaw:
    alpha: object  # Fraction or float in [0, 1)
    beta: object
    theta: object
    phase: str  # 'subcritical' | 'critical' | 'supercritical'
    q: object  # alpha * beta
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def exact(self):
        return isinstance(self.alpha, Fraction)

    @property
    def alpha_f(self):
        return float(self.alpha)

    @property
    def beta_f(self):
        return float(self.beta)

    @property
    def q_f(self):
        return float(self.q)


def law_from_alpha(alpha):
    """Build the peeling law for alpha in [0, 1); rationals stay exact."""
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
    elif isinstance(alpha, float):
        a = alpha
    else:
        raise DomainError("alpha must be a number, got %r" % (alpha,))
    if not (0 <= a < 1):
        raise DomainError("alpha must lie in [0, 1), got %r" % (alpha,))
    two_thirds = _TWO_THIRDS if isinstance(a, Fraction) else 2.0 / 3.0
    if a < two_thirds:
        phase = "subcritical"
        beta = (2 - a) ** 2 / 16
        theta = a / 4
    elif a == two_thirds:
        phase = "critical"
        beta = (2 - a) ** 2 / 16
        theta = a / 4
    else:
        phase = "supercritical"
        beta = a * (1 - a) / 2
        theta = (1 - a) / 2
    return PeelLaw(alpha=a, beta=beta, theta=theta, phase=phase, q=a * beta)


def p_ik(law, i, k):
    """Probability of the one-sided boundary event at distance i enclosing k."""
    if i < 1 or k < 0:
        raise DomainError("need i >= 1 and k >= 0")
    if law.exact and i <= _EXACT_MAX_I and k <= _EXACT_MAX_I:
        return float(p_ik_exact(law, i, k))
    a, b = law.alpha_f, law.beta_f
    if a == 0.0:
        return b ** i if k == 0 else 0.0
    return math.exp(log_phi(k, i + 1) + k * math.log(a) + (i + k) * math.log(b))


def p_ik_exact(law, i, k):
    """Exact rational p_ik; requires a rational law."""
    if not law.exact:
        raise DomainError("exact mode needs rational alpha")
    return phi_closed(k, i + 1) * law.alpha ** k * law.beta ** (i + k)


def _poly_factor_log(i):
    # log of 2/4^i * (2i-2)!/((i-1)!(i+1)!)
    return (
        math.log(2.0)
        - i * math.log(4.0)
        + math.lgamma(2 * i - 1)
        - math.lgamma(i)
        - math.lgamma(i + 2)
    )


def p_i_exact(law, i):
    """Exact rational two-sided mass at distance i (both sides, all k)."""
    if not law.exact:
        raise DomainError("exact mode needs rational alpha")
    if i < 1:
        raise DomainError("need i >= 1")
    c = Fraction(2, 4 ** i) * Fraction(
        math.factorial(2 * i - 2),
        math.factorial(i - 1) * math.factorial(i + 1),
    )
    a = law.alpha
    if law.phase == "critical":
        return c
    if law.phase == "subcritical":
        return c * ((1 - Fraction(3, 2) * a) * i + 1)
    gamma = 2 / a - 2
    return c * gamma ** i * ((3 * a - 2) * i + 1)


def log_p_i(law, i):
    """log of the two-sided mass p_i in doubles (any alpha)."""
    if i < 1:
        raise DomainError("need i >= 1")
    a = law.alpha_f
    base = _poly_factor_log(i)
    if law.phase == "critical":
        return base
    if law.phase == "subcritical":
        return base + math.log((1.0 - 1.5 * a) * i + 1.0)
    gamma = 2.0 / a - 2.0
    return base + i * math.log(gamma) + math.log((3.0 * a - 2.0) * i + 1.0)


def p_i(law, i):
    """Two-sided mass at boundary distance i, phase-dispatched closed form."""
    if law.exact and i <= _EXACT_MAX_I:
        return float(p_i_exact(law, i))
    return math.exp(log_p_i(law, i))


def total_mass_partial(law, I):
    """alpha + sum of p_i for i <= I, with compensated summation."""
    if I < 1:
        raise DomainError("need I >= 1")
    return math.fsum([law.alpha_f] + [p_i(law, i) for i in range(1, I + 1)])


def conditional_k(law, i, k):
    """P(k enclosed | boundary event at distance i) = phi(k,i+1) q^k / Z_{i+1}(q)."""
    if i < 1 or k < 0:
        raise DomainError("need i >= 1 and k >= 0")
    if law.alpha_f == 0.0:
        return 1.0 if k == 0 else 0.0
    if law.exact and i <= _EXACT_MAX_I and k <= _EXACT_MAX_I:
        z = z_closed(i + 1, law.theta)
        return float(phi_closed(k, i + 1) * law.q ** k / z)
    return math.exp(
        log_phi(k, i + 1) + k * math.log(law.q_f) - log_z(i + 1, float(law.theta))
    )


def event_probability(q_summary, law):
    """Probability of observing a given finite sub-map at the boundary.

    Equals alpha^(V(Q) - V(B)) * beta^(F(Q) - V(Q) + V(B)).
    """
    s = q_summary
    ea = s.v_total - s.v_boundary
    eb = s.faces - s.v_total + s.v_boundary
    if ea < 0 or eb < 0:
        raise DomainError("summary yields negative exponents (%d, %d)" % (ea, eb))
    if law.exact:
        return float(law.alpha ** ea * law.beta ** eb)
    return law.alpha_f ** ea * law.beta_f ** eb


# Default cap on the lazily extended inverse-CDF search.  In the subcritical
# phase i has an infinite-mean power tail, so a single unlucky uniform can
# demand an arbitrarily large jump; past the cap the draw fails loudly
# (NumericAnomaly) instead of grinding through millions of terms.
_HARD_CAP = 10 ** 6


def _extend_cum(entry, term):
    """Append one term with Neumaier-compensated running summation."""
    s, c = entry["s"], entry["c"]
    tot = s + term
    if abs(s) >= abs(term):
        c += (s - tot) + term
    else:
        c += (term - tot) + s
    entry["s"] = tot
    entry["c"] = c
    entry["cum"].append(tot + c)


def _cum_p(law, upto):
    """Lazily extended compensated cumulative sums of p_i."""
    entry = law._cache.setdefault("cum_p", {"cum": [], "s": 0.0, "c": 0.0})
    cum = entry["cum"]
    while len(cum) < upto:
        _extend_cum(entry, p_i(law, len(cum) + 1))
    return cum


def _cum_k(law, i, upto):
    cache = law._cache.setdefault("cum_k", {})
    entry = cache.setdefault(i, {"cum": [], "s": 0.0, "c": 0.0})
    cum = entry["cum"]
    while len(cum) < upto + 1:
        _extend_cum(entry, conditional_k(law, i, len(cum)))
    return cum


def sample_event(law, rng, hard_cap=_HARD_CAP, hard_cap_k=None):
    """Draw one peeling event by inverse CDF.

    rng is a numpy Generator.  i has unbounded support with heavy tails, so
    the cumulative table is extended lazily; a mass deficit larger than 1e-9
    (or exceeding the hard cap on i) raises NumericAnomaly rather than
    silently truncating.  hard_cap_k bounds the conditional volume draw
    separately (near criticality k scales like i^2); it defaults to hard_cap.
    """
    cap_k = hard_cap if hard_cap_k is None else hard_cap_k
    u = rng.random()
    if u < law.alpha_f:
        return PeelEvent(kind="alpha")
    v = u - law.alpha_f
    i = 1
    while True:
        cum = _cum_p(law, i)
        if cum[i - 1] >= v:
            break
        if i >= hard_cap or (i >= 64 and cum[i - 1] == cum[i // 2 - 1]):
            if v - cum[i - 1] <= 1e-9:
                break  # attribute the rounding sliver to the current i
            raise NumericAnomaly(
                "inverse-CDF mass deficit %.3g at i=%d" % (v - cum[i - 1], i)
            )
        i += 1
    side = "right" if rng.random() < 0.5 else "left"
    # conditional draw of k given i
    w = rng.random()
    k = 0
    while True:
        cum_k = _cum_k(law, i, k)
        if cum_k[k] >= w:
            break
        # stagnation only signals an exhausted tail once mass has actually
        # accumulated: for huge i the bulk of k | i sits near O(i) and the
        # leading terms underflow to exact zero
        if k >= cap_k or (
            k >= 64 and cum_k[k] > 0.0 and cum_k[k] == cum_k[k // 2]
        ):
            if w - cum_k[k] <= 1e-9:
                break
            raise NumericAnomaly(
                "conditional-k mass deficit %.3g at (i=%d, k=%d)"
                % (w - cum_k[k], i, k)
            )
        k += 1
    return PeelEvent(kind="boundary", side=side, i=i, k=k)


def quad_limit_constants(a):
    """Limit constants (alpha4, beta4) of the quadrangulation family."""
    if a == math.inf:
        alpha4 = 0.0
    else:
        af = float(a)
        if af < 0:
            raise DomainError("a must lie in [0, inf]")
        alpha4 = 3.0 / (4.0 * (1.0 + 3.0 * af) * (2.0 + 3.0 * af))
    beta4 = (2.0 / 27.0) * (math.sqrt(3.0 + alpha4) - math.sqrt(alpha4)) ** 3
    return alpha4, beta4


def quad_event_probability(faces, v_new, a):
    """Limit probability of a finite sub-map event in the quadrangulation family.

    faces = F(Q), v_new = V(Q) - V(B).
    """
    if faces < 0 or v_new < 0:
        raise DomainError("need faces >= 0 and v_new >= 0")
    if a == math.inf:
        base_f, base_v = 4.0 / 27.0, 0.0
    else:
        af = float(a)
        if af < 0:
            raise DomainError("a must lie in [0, inf]")
        base_f = 4.0 * (1.0 + 3.0 * af) ** 3 / (27.0 * (2.0 + 3.0 * af) ** 3)
        base_v = 9.0 * (2.0 + 3.0 * af) / (4.0 * (1.0 + 3.0 * af) ** 2)
    return base_f ** faces * base_v ** v_new


def tail_exponent(law, i_lo, i_hi):
    """Fit log p_i ~ const + exponent*log(i) + rate*i over [i_lo, i_hi].

    Returns (exponent, rate).  Critical laws fit exponent -5/2 with rate 0,
    subcritical -3/2 with rate 0, supercritical rate log(2/alpha - 2).
    """
    import numpy as np

    if not (1 < i_lo < i_hi):
        raise DomainError("need 1 < i_lo < i_hi")
    if i_hi - i_lo < 3:
        raise DomainError("fit window too small")
    ii = np.arange(i_lo, i_hi + 1, dtype=float)
    y = np.array([log_p_i(law, int(i)) for i in ii])
    X = np.column_stack([np.ones_like(ii), np.log(ii), ii])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[1]), float(coef[2])


__all__ = [
    "PeelEvent",
    "PeelLaw",
    "QSummary",
    "conditional_k",
    "event_probability",
    "law_from_alpha",
    "log_p_i",
    "p_i",
    "p_i_exact",
    "p_ik",
    "p_ik_exact",
    "quad_event_probability",
    "quad_limit_constants",
    "sample_event",
    "tail_exponent",
    "total_mass_partial",
]
