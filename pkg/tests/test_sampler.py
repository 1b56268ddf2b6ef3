import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

import hptri.sampler as sampler_mod
from hptri.enumeration import phi_closed, z_closed  # noqa: F401 (z in docs)
from hptri.errors import DomainError, NumericAnomaly
from hptri.planar_map import to_json_dict, validate
from hptri.sampler import (
    NonSimpleParams,
    Schedule,
    UniformPolicy,
    boltzmann_polygon,
    build_ball,
    core,
    expand_nonsimple,
    make_rng,
    peel_steps,
    pendant_loop_patch,
    uniform_polygon,
)


def _code_frequencies(m, n, N, seed):
    rng = make_rng(seed)
    c = Counter()
    for _ in range(N):
        c[uniform_polygon(m, n, rng).canonical_code()] += 1
    return c


def test_uniform_polygon_is_uniform_small():
    # phi(1, 3) = 4 distinct triangulations; uniformity by chi-square
    N = 8000
    c = _code_frequencies(3, 1, N, seed=100)
    assert len(c) == phi_closed(1, 3) == 4
    _, p = chisquare(list(c.values()))
    assert p > 1e-3


def test_uniform_polygon_is_uniform_medium():
    # phi(0, 6) = Catalan(4) = 14 fan-free triangulations of the hexagon
    N = 28000
    c = _code_frequencies(6, 0, N, seed=101)
    assert len(c) == phi_closed(0, 6) == 14
    _, p = chisquare(list(c.values()))
    assert p > 1e-3


def test_uniform_polygon_interior_count_exact():
    for m, n in ((2, 5), (4, 0), (5, 7)):
        fm = uniform_polygon(m, n, make_rng(5))
        assert (fm.m, fm.n) == (m, n)


def test_corner_policy_matches_exact_policy():
    # force the log-weight path and compare case frequencies with the exact
    # big-integer path on the same node
    M, n, N = 10, 6, 20000
    exact_probs = {}
    tot = phi_closed(n, M)
    exact_probs[(("A",), n - 1)] = Fraction(phi_closed(n - 1, M + 1), tot)
    for d in range(1, M - 1):
        for n1 in range(n + 1):
            exact_probs[(("B", d), n1, n - n1)] = Fraction(
                phi_closed(n1, d + 1) * phi_closed(n - n1, M - d), tot
            )
    saved = sampler_mod._EXACT_NODE_LIMIT
    sampler_mod._EXACT_NODE_LIMIT = 0
    try:
        rng = make_rng(42)
        c = Counter()
        for _ in range(N):
            c[UniformPolicy(n, rng).choose(M, n)] += 1
    finally:
        sampler_mod._EXACT_NODE_LIMIT = saved
    keys = sorted(exact_probs, key=lambda k: -exact_probs[k])
    obs = np.array([c[k] for k in keys], dtype=float)
    exp = np.array([float(exact_probs[k]) * N for k in keys])
    big = exp >= 5
    o = list(obs[big]) + ([obs[~big].sum()] if (~big).any() else [])
    e = list(exp[big]) + ([exp[~big].sum()] if (~big).any() else [])
    o, e = np.array(o), np.array(e)
    _, p = chisquare(o, e * o.sum() / e.sum())
    assert p > 1e-3


def test_catalan_policy_matches_exact_policy():
    # interior-free nodes use the Catalan split shortcut above the limit
    M, N = 9, 20000
    tot = phi_closed(0, M)
    exact_probs = {
        (("B", d), 0, 0): Fraction(phi_closed(0, d + 1) * phi_closed(0, M - d), tot)
        for d in range(1, M - 1)
    }
    saved = sampler_mod._EXACT_NODE_LIMIT
    sampler_mod._EXACT_NODE_LIMIT = 0
    try:
        rng = make_rng(43)
        c = Counter()
        for _ in range(N):
            c[UniformPolicy(0, rng).choose(M, 0)] += 1
    finally:
        sampler_mod._EXACT_NODE_LIMIT = saved
    keys = sorted(exact_probs)
    obs = [c[k] for k in keys]
    exp = [float(exact_probs[k]) * N for k in keys]
    _, p = chisquare(obs, exp)
    assert p > 1e-3


def test_boltzmann_zero_interior_probability():
    # P(n = 0) at m = 3, q = 2/27 equals 1 / Z_3 = 16/27
    q = Fraction(2, 27)
    expect = float(1 / z_closed(3, Fraction(1, 6)))
    N = 20000
    rng = make_rng(7)
    hits = sum(1 for _ in range(N) if boltzmann_polygon(3, q, rng).n == 0)
    sigma = math.sqrt(expect * (1 - expect) / N)
    assert abs(hits / N - expect) < 3 * sigma


def test_boltzmann_interior_distribution():
    # P(n) = phi(n, m) q^n / Z_m(q) for the 2-gon at a subcritical q
    q = Fraction(1, 20)
    N = 20000
    rng = make_rng(17)
    c = Counter(boltzmann_polygon(2, q, rng).n for _ in range(N))
    # normalizer by direct series (terms decay geometrically at this q)
    zf = sum(float(phi_closed(n, 2) * q ** n) for n in range(80))
    probs = [float(phi_closed(n, 2)) * float(q) ** n / zf for n in range(6)]
    obs = [c.pop(n, 0) for n in range(6)] + [sum(c.values())]
    exp = [p * N for p in probs] + [(1 - sum(probs)) * N]
    _, p = chisquare(obs, exp)
    assert p > 1e-3


def test_domain_errors():
    with pytest.raises(DomainError):
        uniform_polygon(1, 0, 0)
    with pytest.raises(DomainError):
        boltzmann_polygon(3, 0.1, 0)  # q > 2/27
    with pytest.raises(DomainError):
        build_ball(0.5, 0, seed=1)
    with pytest.raises(DomainError):
        Schedule("bogus")


def test_make_rng_reproducible_and_streamed():
    a = make_rng(123).random(), make_rng(123).random()
    assert a[0] == a[1]
    assert make_rng(123, stream=1).random() != make_rng(123).random()


def test_build_ball_reproducible():
    m1 = build_ball(2 / 3, 2, seed=50, max_jump=10 ** 4, max_patch=10 ** 4)
    m2 = build_ball(2 / 3, 2, seed=50, max_jump=10 ** 4, max_patch=10 ** 4)
    assert to_json_dict(m1) == to_json_dict(m2)


def test_build_ball_alpha_zero_no_internal_vertices():
    for seed in range(10):
        try:
            mp = build_ball(0.0, 2, seed=seed, max_jump=10 ** 4,
                            max_patch=10 ** 4)
        except NumericAnomaly:
            continue
        assert mp.n_internal == 0
        assert validate(mp).ok


def test_build_ball_cap_raises_with_partial():
    # tiny caps force the resource guard; the partial map is attached
    raised = False
    for seed in range(40):
        try:
            build_ball(1 / 3, 3, seed=seed, max_jump=8, max_patch=8)
        except NumericAnomaly:
            raised = True
            break
    assert raised


def test_peel_steps_log_lengths():
    mp, log = peel_steps(2 / 3, 25, seed=5)
    assert len(log.events) == 25
    assert validate(mp).ok


def test_pendant_loop_patch_shape():
    patch = pendant_loop_patch()
    assert (patch.m, patch.n) == (1, 1)


def test_nonsimple_params_constraints():
    with pytest.raises(DomainError):
        NonSimpleParams(q_geo=1.0)
    with pytest.raises(DomainError):
        NonSimpleParams(q_geo=0.5, gamma=0.7, source_alpha=0.5)
    NonSimpleParams(q_geo=0.5, gamma=0.7, source_alpha=0.0)  # fine at alpha=0


def test_expand_core_identity():
    rng = make_rng(900)
    for q_geo in (0.0, 0.3, 0.6):
        params = NonSimpleParams(q_geo=q_geo)
        for t in range(40):
            fm = uniform_polygon(5, 3, rng)
            gm = expand_nonsimple(fm, params, rng)
            assert validate(gm).ok
            back = core(gm)
            assert back.canonical_code() == fm.canonical_code()


def test_expand_multiplicities_are_geometric():
    rng = make_rng(901)
    params = NonSimpleParams(q_geo=0.4)
    mult = []
    for _ in range(300):
        fm = uniform_polygon(4, 2, rng)
        expand_nonsimple(fm, params, rng, multiplicities=mult)
    # one multiplicity per edge of each source map
    v, e, f = uniform_polygon(4, 2, make_rng(0)).counts()
    assert len(mult) == 300 * e
    c = Counter(mult)
    probs = [0.6 * 0.4 ** (g - 1) for g in range(1, 8)]
    obs = [c.pop(g, 0) for g in range(1, 8)] + [sum(c.values())]
    exp = [p * len(mult) for p in probs] + [(1 - sum(probs)) * len(mult)]
    _, p = chisquare(obs, exp)
    assert p > 1e-3


def test_expand_qgeo_zero_is_identity_on_codes():
    rng = make_rng(902)
    fm = uniform_polygon(6, 2, rng)
    gm = expand_nonsimple(fm, NonSimpleParams(q_geo=0.0), rng)
    assert (gm.m, gm.n) == (fm.m, fm.n)
    assert core(gm).canonical_code() == fm.canonical_code()


def test_expand_rejects_general_mode_input():
    rng = make_rng(903)
    fm = uniform_polygon(4, 1, rng)
    gm = expand_nonsimple(fm, NonSimpleParams(q_geo=0.3), rng)
    with pytest.raises(DomainError):
        expand_nonsimple(gm, NonSimpleParams(q_geo=0.3), rng)
