"""Map-level samplers: radius-r hull builder, finite polygon samplers
(uniform and Boltzmann), and the non-simple expand / core pair.

Randomness contract: numpy's default PCG64 generator seeded through
SeedSequence(seed, stream); identical (seed, stream) reproduce identical
maps bit-exactly on any platform.
"""

from __future__ import annotations

import bisect
import math
from collections.abc import Hashable
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .enumeration import Q_CRIT, log_phi, log_z, phi_closed, theta_of_q
from .errors import DomainError, NumericAnomaly, StructuralError
from .peeling_law import PeelEvent, law_from_alpha, sample_event
from .planar_map import (
    EXTERNAL,
    EventLog,
    FiniteMap,
    HalfPlaneMap,
    Store,
    build_polygon,
    degenerate_two_gon,
    glue_patch,
    new_floor,
    select_peel_index,
    validate,
)

_EXACT_NODE_LIMIT = 80  # n + m below this: exact big-integer case weights


@lru_cache(maxsize=2048)
def _exact_case_table(M, n):
    """All case choices at a (boundary M, interior n) node with their exact
    cumulative weights, for bisection sampling."""
    cases = []
    cum = []
    total = 0
    if n >= 1:
        total += phi_closed(n - 1, M + 1)
        cases.append(("A", n - 1))
        cum.append(total)
    for d in range(1, M - 1):
        for n1 in range(n + 1):
            total += phi_closed(n1, d + 1) * phi_closed(n - n1, M - d)
            cases.append(("B", d, n1, n - n1))
            cum.append(total)
    return cases, cum


def _log_catalan(k):
    return math.lgamma(2 * k + 1) - math.lgamma(k + 1) - math.lgamma(k + 2)


@lru_cache(maxsize=1 << 20)
def _lphi(n, m):
    return log_phi(n, m)


_LOG2 = math.log(2.0)


def _lphi_vec(n, m):
    """log phi(n, m) for scalar n over a numpy integer array m."""
    mm = m - 2.0
    return (
        (n + 1) * _LOG2
        + gammaln(2.0 * mm + 2.0)
        + gammaln(2.0 * mm + 3.0 * n + 1.0)
        - 2.0 * gammaln(mm + 1.0)
        - math.lgamma(n + 1)
        - gammaln(2.0 * mm + 2.0 * n + 3.0)
    )


_LAW_CACHE = {}


def _get_law(alpha):
    """Share PeelLaw instances (and their cumulative tables) per alpha."""
    key = alpha if isinstance(alpha, Hashable) else float(alpha)
    law = _LAW_CACHE.get(key)
    if law is None:
        law = law_from_alpha(alpha)
        _LAW_CACHE[key] = law
    return law


def make_rng(seed, stream=0):
    """Deterministic, platform-independent generator stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def _as_rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(seed_or_rng)


def _randbelow(rng, n):
    """Uniform integer in [0, n) for arbitrary-precision n, by rejection on
    bit_length-sized draws assembled from 32-bit chunks."""
    if n <= 1:
        return 0
    bits = int(n - 1).bit_length()
    chunks = (bits + 31) // 32
    excess = 32 * chunks - bits
    while True:
        r = 0
        for w in rng.integers(0, 1 << 32, size=chunks, dtype=np.uint64):
            r = (r << 32) | int(w)
        r >>= excess
        if r < n:
            return r


@dataclass(frozen=True)
class Schedule:
    """Peel-edge selection rule."""

    kind: str = "leftmost_near_root"

    def __post_init__(self):
        if self.kind not in (
            "leftmost_near_root",
            "root_adjacent",
            "uniform_random_exposed",
        ):
            raise DomainError("unknown schedule kind %r" % (self.kind,))


# ---------------------------------------------------------------------------
# Finite polygon samplers
# ---------------------------------------------------------------------------


class UniformPolicy:
    """Case choices proportional to exact counts: the result is uniform over
    the phi(n, m) triangulations of the m-gon with n internal vertices."""

    def __init__(self, n, rng):
        self.initial = n
        self.rng = rng

    def choose(self, M, n):
        if M == 2 and n == 0:
            return (("E",),)
        if n == 0 and M > _EXACT_NODE_LIMIT:
            return self._choose_catalan(M)
        if n + M <= _EXACT_NODE_LIMIT:
            return self._choose_exact(M, n)
        return self._choose_corner(M, n)

    def _choose_catalan(self, M):
        # n = 0: only splits, with P(d) = C(d-1) C(M-d-2) / C(M-2) (Catalan
        # convolution).  The mass concentrates at the two ends, so scanning
        # d = 1, M-2, 2, M-3, ... exits after O(1) expected terms.
        lcm = _log_catalan(M - 2)
        u = self.rng.random()
        acc = 0.0
        lo, hi = 1, M - 2
        d = lo
        while lo <= hi:
            for d in ((lo,) if lo == hi else (lo, hi)):
                acc += math.exp(
                    _log_catalan(d - 1) + _log_catalan(M - d - 2) - lcm
                )
                if u < acc:
                    return (("B", d), 0, 0)
            lo += 1
            hi -= 1
        if acc < 1.0 - 1e-6:
            raise NumericAnomaly(
                "Catalan split weights sum to %r at m=%d" % (acc, M)
            )
        return (("B", d), 0, 0)

    def _cases(self, M, n):
        if n >= 1:
            yield ("A", n - 1)
        for d in range(1, M - 1):
            for n1 in range(n + 1):
                yield ("B", d, n1, n - n1)

    def _choose_exact(self, M, n):
        cases, cum = _exact_case_table(M, n)
        total = cum[-1]
        if total != phi_closed(n, M):
            raise StructuralError("case weights do not sum to phi(n, m)")
        r = _randbelow(self.rng, total)
        return self._emit(cases[bisect.bisect_right(cum, r)])

    def _choose_corner(self, M, n):
        # Log-weight inverse CDF over the A-case and the (d, n1) split grid.
        # Bands of fixed n1 are evaluated whole (vectorized) in the order
        # 0, n, 1, n-1, ...: band mass decays away from the two n1 ends, so
        # few bands are touched in expectation, and a band costs O(M) numpy
        # work instead of O(M) Python-level weight evaluations.
        log_total = _lphi(n, M)
        u = self.rng.random()
        acc = 0.0
        if n >= 1:
            acc += math.exp(_lphi(n - 1, M + 1) - log_total)
            if u < acc:
                return (("A",), n - 1)
        last = None
        d_arr = np.arange(1, M - 1)
        blo, bhi = 0, n
        while blo <= bhi:
            for n1 in ((blo,) if blo == bhi else (blo, bhi)):
                if len(d_arr) == 0:
                    continue
                w = np.exp(
                    _lphi_vec(n1, d_arr + 1)
                    + _lphi_vec(n - n1, M - d_arr)
                    - log_total
                )
                cw = np.cumsum(w)
                tot = float(cw[-1])
                if u < acc + tot:
                    j = int(np.searchsorted(cw, u - acc, side="right"))
                    d = int(d_arr[min(j, len(d_arr) - 1)])
                    return (("B", d), n1, n - n1)
                acc += tot
                last = (int(d_arr[-1]), n1)
            blo += 1
            bhi -= 1
        if u - acc > 1e-9 or (last is None and n < 1):
            raise NumericAnomaly(
                "case probabilities sum to %r at (m=%d, n=%d)" % (acc, M, n)
            )
        if last is None:  # rounding sliver on an A-only node (M == 2)
            return (("A",), n - 1)
        d, n1 = last
        return (("B", d), n1, n - n1)

    def _emit(self, case):
        if case[0] == "A":
            return (("A",), case[1])
        _, d, n1, n2 = case
        return (("B", d), n1, n2)


class BoltzmannPolicy:
    """Case choices weighted by partition-function ratios; the result has
    probability q^n / Z_m(q).  The per-node weight-sum-to-1 assertion is a
    numerical re-proof of the Z recurrence."""

    initial = None

    def __init__(self, q, rng):
        self.q = float(q)
        self.rng = rng
        self.theta = theta_of_q(q)

    def _lz(self, m):
        return log_z(m, self.theta)

    def choose(self, M, st):
        lzM = self._lz(M)
        cases = []
        probs = []
        if M == 2:
            cases.append(("E",))
            probs.append(math.exp(-lzM))
        if self.q > 0.0:
            cases.append(("A",))
            probs.append(math.exp(math.log(self.q) + self._lz(M + 1) - lzM))
        for d in range(1, M - 1):
            cases.append(("B", d))
            probs.append(math.exp(self._lz(d + 1) + self._lz(M - d) - lzM))
        if abs(math.fsum(probs) - 1.0) > 1e-9:
            raise NumericAnomaly(
                "Boltzmann case probabilities sum to %r at m=%d"
                % (math.fsum(probs), M)
            )
        u = self.rng.random()
        acc = 0.0
        for case, p in zip(cases, probs):
            acc += p
            if u < acc:
                break
        if case == ("E",):
            return (case,)
        if case == ("A",):
            return (case, None)
        return (case, None, None)


def uniform_polygon(m, n, seed_or_rng):
    """Uniform rooted triangulation of an m-gon with n internal vertices."""
    if m < 2 or n < 0:
        raise DomainError("need m >= 2 and n >= 0")
    rng = _as_rng(seed_or_rng)
    fm = build_polygon(m, UniformPolicy(n, rng))
    if fm.n != n:
        raise StructuralError("sampler produced n=%d, wanted %d" % (fm.n, n))
    return fm


def boltzmann_polygon(m, q, seed_or_rng):
    """Boltzmann-distributed triangulation of an m-gon at weight q <= 2/27."""
    if m < 2:
        raise DomainError("m must be >= 2")
    qf = float(q)
    if not (0.0 <= qf <= float(Q_CRIT) * (1 + 1e-15)):
        raise DomainError("q must lie in [0, 2/27], got %r" % (q,))
    rng = _as_rng(seed_or_rng)
    return build_polygon(m, BoltzmannPolicy(qf, rng))


# ---------------------------------------------------------------------------
# Half-plane builders
# ---------------------------------------------------------------------------


def _one_step(mp, law, rng, schedule_kind, r=None, max_jump=None,
              max_patch=None):
    """Select, draw and apply one peeling event; returns the logged event,
    or None when the radius-r stopping rule fires."""
    idx = select_peel_index(mp, schedule_kind, r=r, rng=rng)
    if idx is None:
        return None
    if max_jump is None and max_patch is None:
        ev = sample_event(law, rng)
    else:
        kw = {}
        if max_jump is not None:
            kw["hard_cap"] = max_jump
        if max_patch is not None:
            kw["hard_cap_k"] = max_patch
        ev = sample_event(law, rng, **kw)
    if ev.kind == "alpha":
        mp.attach_alpha_at(idx)
        return ev
    patch = uniform_polygon(ev.i + 1, ev.k, rng)
    hole = mp.attach_jump_at(idx, ev.side, ev.i)
    mp.fill_hole(hole, patch)
    return replace(ev, patch_code=patch.code)


def build_ball(alpha, r, seed, schedule="leftmost_near_root", width=1,
               max_steps=10 ** 7, max_jump=None, max_patch=None,
               return_log=False):
    """Hull of the ball of radius r around the root under the given law.

    Peels until no exposed vertex is within distance r of the root edge.
    Termination is almost sure; `max_steps` converts a numeric leak into a
    diagnostic (with the partial map attached) instead of a silent truncation.
    """
    if r < 1:
        raise DomainError("r must be >= 1")
    kind = getattr(schedule, "kind", schedule)
    law = _get_law(alpha)
    rng = _as_rng(seed)
    mp = new_floor(width)
    events = []
    for _ in range(max_steps):
        ev = _one_step(mp, law, rng, kind, r=r, max_jump=max_jump,
                       max_patch=max_patch)
        if ev is None:
            if return_log:
                return mp, EventLog(kind, width, tuple(events))
            return mp
        events.append(ev)
    raise NumericAnomaly("ball build exceeded %d steps" % max_steps, partial=mp)


def peel_steps(alpha, steps, seed, schedule="leftmost_near_root", width=1):
    """Apply exactly `steps` peeling events; returns (map, event log)."""
    if steps < 0:
        raise DomainError("steps must be >= 0")
    kind = getattr(schedule, "kind", schedule)
    law = _get_law(alpha)
    rng = _as_rng(seed)
    mp = new_floor(width)
    events = []
    for _ in range(steps):
        events.append(_one_step(mp, law, rng, kind))
    return mp, EventLog(kind, width, tuple(events))


# ---------------------------------------------------------------------------
# Non-simple expand / core
# ---------------------------------------------------------------------------


def pendant_loop_patch():
    """The minimal triangulation of the 1-gon: one internal vertex joined to
    the boundary-loop vertex by a doubled pendant edge, giving the single
    internal (non-simple) triangle.  This is the unique 1-gon triangulation
    with the fewest internal vertices (n = 1; n = 0 is impossible since the
    interior of a self-loop cannot be a triangle)."""
    s = Store(mode="general")
    u = s.new_vertex()
    w = s.new_vertex()
    fc = s.new_face("face")
    lo, li = s.new_edge(u, u, EXTERNAL, fc)
    p, p2 = s.new_edge(u, w, fc, fc)
    s.set_next(lo, lo)
    s.set_next(li, p)
    s.set_next(p, p2)
    s.set_next(p2, li)
    return FiniteMap(s, lo, 1, 1)


@dataclass(frozen=True)
class NonSimpleParams:
    """Parameters of the loop-decorated family.

    Each edge is replaced by Geometric(q_geo) parallel copies; every 2-gon so
    created receives a self-loop at its left endpoint with probability gamma
    (right endpoint otherwise), filled by a draw from nu_left / nu_right.
    When the source law has alpha > 0, symmetry forces gamma = 1/2 and a
    single nu; asymmetric choices are only admissible at alpha = 0.
    """

    q_geo: float
    gamma: float = 0.5
    nu_left: object = None  # callable rng -> FiniteMap (1-gon); default pendant
    nu_right: object = None
    source_alpha: object = None

    def __post_init__(self):
        if not (0.0 <= self.q_geo < 1.0):
            raise DomainError("q_geo must lie in [0, 1)")
        if not (0.0 <= self.gamma <= 1.0):
            raise DomainError("gamma must lie in [0, 1]")
        if self.source_alpha is not None and float(self.source_alpha) > 0.0:
            if self.gamma != 0.5:
                raise DomainError("gamma must be 1/2 when the source alpha > 0")
            if self.nu_left is not None or self.nu_right is not None:
                if self.nu_left is not self.nu_right:
                    raise DomainError(
                        "distinct side measures need source alpha = 0"
                    )


def _copy_store(src):
    s = Store(mode=src.mode)
    s.twin = list(src.twin)
    s.nxt = list(src.nxt)
    s.prv = list(src.prv)
    s.origin = list(src.origin)
    s.face = list(src.face)
    s.he_alive = list(src.he_alive)
    s.v_alive = list(src.v_alive)
    s.f_alive = list(src.f_alive)
    s.f_kind = list(src.f_kind)
    return s


def expand_nonsimple(fm, params, seed_or_rng, multiplicities=None):
    """Decorate a simple-mode finite map with parallel edges and filled
    self-loops; returns a new general-mode map.

    When `multiplicities` is a list, the per-edge Geometric multiplicity
    draws are appended to it (one entry per edge of `fm`).
    """
    if not isinstance(fm, FiniteMap):
        raise DomainError("expand operates on finite maps")
    if fm.degenerate:
        raise DomainError("cannot expand the degenerate 2-gon")
    if fm.store.mode != "simple":
        raise DomainError("expand needs a simple-mode map")
    rng = _as_rng(seed_or_rng)
    s = _copy_store(fm.store)
    s.mode = "general"
    pairs = [
        (h, s.twin[h])
        for h in range(len(s.twin))
        if s.he_alive[h] and h < s.twin[h]
    ]
    for h, t in pairs:
        g = 1 if params.q_geo == 0.0 else int(rng.geometric(1.0 - params.q_geo))
        if multiplicities is not None:
            multiplicities.append(g)
        if g == 1:
            continue
        u, v = s.origin[h], s.origin[t]
        prev = h  # side facing the next inserted 2-gon
        for _ in range(g - 1):
            fg = s.new_face("face")
            b, a = s.new_edge(v, u, fg, fg)  # b: v->u, a: u->v
            s.set_next(b, a)
            s.set_next(a, b)
            s.twin[prev] = b
            s.twin[b] = prev
            prev = a
        s.twin[prev] = t
        s.twin[t] = prev
        # decorate each inserted 2-gon with a self-loop and fill it
        for fg in range(len(s.f_alive) - (g - 1), len(s.f_alive)):
            b = next(
                hh
                for hh in range(len(s.twin))
                if s.he_alive[hh] and s.face[hh] == fg and s.origin[hh] == v
            )
            a = s.nxt[b]
            left = rng.random() < params.gamma
            at = u if left else v  # u is the origin of the lower-id side
            hole_f = s.new_face("hole")
            lout, lin = s.new_edge(at, at, fg, hole_f)
            s.set_next(lin, lin)
            if left:
                # triangle orbit b (v->u), loop at u, a (u->v)
                s.set_next(b, lout)
                s.set_next(lout, a)
                s.set_next(a, b)
            else:
                s.set_next(lout, b)
                s.set_next(b, a)
                s.set_next(a, lout)
            gen = params.nu_left if left else params.nu_right
            patch = gen(rng) if gen is not None else pendant_loop_patch()
            if patch.m != 1:
                raise DomainError("nu must produce 1-gon patches")
            glue_patch(s, [lin], hole_f, patch)
    v_alive, _, _ = s.counts()
    return FiniteMap(s, fm.root, fm.m, v_alive - fm.m)


def core(gm):
    """Undo the loop decoration: delete each self-loop with its interior,
    then merge every 2-gon's edge pair; returns a simple-mode map."""
    if not isinstance(gm, FiniteMap):
        raise DomainError("core operates on finite maps")
    s = _copy_store(gm.store)
    alive = s.alive_half_edges()
    loops = {h for h in alive if s.origin[h] == s.head(h)}
    # face reachability from the external face, loops acting as walls
    reach = {EXTERNAL}
    stack = [h for h in alive if s.face[h] == EXTERNAL]
    seen_he = set(stack)
    while stack:
        h = stack.pop()
        t = s.twin[h]
        if h not in loops:
            f = s.face[t]
            if f not in reach:
                reach.add(f)
                for g in s.face_orbit(t):
                    if g not in seen_he:
                        seen_he.add(g)
                        stack.append(g)
    for h in alive:
        if s.face[h] not in reach:
            s.kill_he(h)
    for h in sorted(loops):
        if not s.he_alive[h]:
            continue  # interior side already deleted with its region
        if s.face[h] not in reach:
            s.kill_he(h)
            continue
        s.set_next(s.prv[h], s.nxt[h])
        s.kill_he(h)
    # merge 2-gon faces
    for f in range(len(s.f_alive)):
        if not s.f_alive[f]:
            continue
        he_f = [h for h in range(len(s.twin)) if s.he_alive[h] and s.face[h] == f]
        if not he_f:
            s.kill_face(f)
            continue
        if len(he_f) != 2:
            continue
        x = he_f[0]
        y = s.nxt[x]
        if y != he_f[1] or s.nxt[y] != x:
            raise StructuralError("degree-2 face with broken orbit")
        a2, b2 = s.twin[x], s.twin[y]
        if a2 == y:
            raise StructuralError("isolated doubled edge outside the grammar")
        s.twin[a2] = b2
        s.twin[b2] = a2
        s.kill_he(x)
        s.kill_he(y)
        s.kill_face(f)
    s.mode = "simple"
    v_alive, _, _ = s.counts()
    out = FiniteMap(s, gm.root, gm.m, v_alive - gm.m)
    rep = validate(out)
    if not rep.ok:
        raise StructuralError("core output invalid: %s" % rep.violations[:3])
    return out
