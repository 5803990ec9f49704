import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levelcross.billiards import DEFAULT_GAMMA, CylinderBilliard, DomainError, RectBilliard
from levelcross.crossings import (CrossingWindow, classify_sign, crossing_of_pair, enumerate_crossings,
                                  scan_crossings)

G = DEFAULT_GAMMA


def test_symmetric_rect_pair(rect):
    (c,) = crossing_of_pair(rect, rect.key(1, 2), rect.key(2, 1))
    assert (c.mu_star, c.energy, c.V) == (1.0, 5.0, 6.0)
    assert c.sign == "."


def test_rect_pair_13_22(rect):
    (c,) = crossing_of_pair(rect, rect.key(1, 3), rect.key(2, 2))
    assert c.mu_star == pytest.approx(math.sqrt(5 / 3), rel=1e-15)
    assert c.energy == pytest.approx(8.262364471909157, rel=1e-14)
    assert c.V == pytest.approx(6.0, rel=1e-14)
    # v = mu*|n1^2 - n1'^2| / eps = 3 mu / (8 mu) exactly
    assert c.v == pytest.approx(15 / 32, rel=1e-14)


def test_rect_pair_without_positive_root(rect):
    assert crossing_of_pair(rect, rect.key(1, 1), rect.key(2, 2)) == []
    assert crossing_of_pair(rect, rect.key(1, 1), rect.key(1, 2)) == []


def test_cylinder_kramers_neighbours(cyl):
    (c,) = crossing_of_pair(cyl, cyl.key(1, 0), cyl.key(0, 0))
    assert c.mu_star == pytest.approx(0.5, abs=1e-15)
    assert c.energy == pytest.approx(1 / math.pi**2 + 1, rel=1e-15)
    assert c.sign == "-"
    assert classify_sign(cyl, c) == "-"


def test_cylinder_parallel_parabolas(cyl):
    assert crossing_of_pair(cyl, cyl.key(2, 0), cyl.key(2, 3)) == []


def test_cylinder_sign_by_slopes(cyl):
    (c,) = crossing_of_pair(cyl, cyl.key(3, 0), cyl.key(1, 1))
    assert c.mu_star == pytest.approx(2 - 3 * math.pi**2 / 16, rel=1e-14)
    h = 1e-6
    sa = (cyl.h(3, 0, c.mu_star + h) - cyl.h(3, 0, c.mu_star - h)) / (2 * h)
    sb = (cyl.h(1, 1, c.mu_star + h) - cyl.h(1, 1, c.mu_star - h)) / (2 * h)
    assert c.sign == ("+" if sa * sb > 0 else "-") == "+"


def test_invalid_pairs(rect, cyl):
    with pytest.raises(DomainError):
        crossing_of_pair(rect, rect.key(2, 3), rect.key(2, 3))
    with pytest.raises(DomainError):
        crossing_of_pair(cyl, cyl.key(-1, 0), cyl.key(-1, 0))
    with pytest.raises(DomainError):
        classify_sign(rect, crossing_of_pair(rect, rect.key(1, 2), rect.key(2, 1))[0])


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30), st.integers(1, 30))
def test_rect_pair_symmetry_and_residual(a, b, c, d):
    r = RectBilliard()
    if (a, b) == (c, d):
        return
    x = crossing_of_pair(r, r.key(a, b), r.key(c, d))
    y = crossing_of_pair(r, r.key(c, d), r.key(a, b))
    assert x == y
    for cr in x:
        k1, k2 = cr.pair
        e1, e2 = r.h(k1.n1, k1.n2, cr.mu_star), r.h(k2.n1, k2.n2, cr.mu_star)
        assert abs(e1 - e2) <= 1e-9 * max(1.0, cr.energy)
        assert cr.V == pytest.approx(abs(r.dh(k1.n1, k1.n2, cr.mu_star) - r.dh(k2.n1, k2.n2, cr.mu_star)),
                                     rel=1e-12, abs=1e-12)
        assert 0.0 <= cr.v <= 1.0 + 1e-12


@given(st.integers(-30, 30), st.integers(0, 30), st.integers(-30, 30), st.integers(0, 30))
def test_cylinder_pair_symmetry_and_ranges(a, b, c, d):
    m = CylinderBilliard()
    if (a, b) == (c, d):
        return
    x = crossing_of_pair(m, m.key(a, b), m.key(c, d))
    assert x == crossing_of_pair(m, m.key(c, d), m.key(a, b))
    for cr in x:
        k1, k2 = cr.pair
        assert abs(m.h(k1.n1, k1.n2, cr.mu_star) - m.h(k2.n1, k2.n2, cr.mu_star)) <= 1e-9 * max(1.0, cr.energy)
        assert classify_sign(m, cr) == cr.sign
        limit = 1.0 if cr.sign == "+" else 2.0
        assert cr.v <= limit + 1e-12


def test_small_rect_window(rect):
    cs = enumerate_crossings(CrossingWindow(rect, 10.0, 1.0, 2.0))
    pairs = cs.pair_keys()
    assert ((1, 3), (2, 2)) in pairs
    # mu* = 1 lies in the half-open window [1, 2)
    assert ((1, 2), (2, 1)) in pairs
    brute = []
    for a in range(1, 7):
        for b in range(1, 7):
            for c in range(1, 7):
                for d in range(1, 7):
                    if (a, b) < (c, d):
                        for cr in crossing_of_pair(rect, rect.key(a, b), rect.key(c, d)):
                            if 1.0 <= cr.mu_star < 2.0 and cr.energy <= 10.0:
                                brute.append(((a, b), (c, d)))
    assert sorted(pairs) == sorted(brute)


def test_ground_state_only(rect):
    assert len(enumerate_crossings(CrossingWindow(rect, 2.0, 0.2, 5.0))) == 0


def test_window_additivity(rect, cyl):
    for model, cuts, emax in ((rect, (1.0, 1.37, 2.0), 400.0), (cyl, (0.0, 0.41, 1.0), 300.0)):
        a = len(enumerate_crossings(CrossingWindow(model, emax, cuts[0], cuts[1])))
        b = len(enumerate_crossings(CrossingWindow(model, emax, cuts[1], cuts[2])))
        c = len(enumerate_crossings(CrossingWindow(model, emax, cuts[0], cuts[2])))
        assert a + b == c


def test_worker_independence(cyl):
    w = CrossingWindow(cyl, 400.0, 0.0, 1.0)
    a, b = enumerate_crossings(w, 1), enumerate_crossings(w, 3)
    for f in ("n1", "n2", "n1p", "n2p", "mu_star", "energy", "V", "v", "sign"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()


def test_closed_window_adds_endpoint(rect):
    half = enumerate_crossings(CrossingWindow(rect, 50.0, 0.5, 1.0))
    closed = enumerate_crossings(CrossingWindow(rect, 50.0, 0.5, 1.0, closed=True))
    extra = set(closed.pair_keys()) - set(half.pair_keys())
    assert extra and all(c.mu_star == 1.0 for c in closed if c.pair[0][1:] + c.pair[1][1:] in
                         [p[0] + p[1] for p in extra])


def test_flux_halves_balance(cyl_1400):
    lo = int(np.count_nonzero(cyl_1400.mu_star < 0.5))
    hi = len(cyl_1400) - lo
    assert abs(lo - hi) <= 3 * math.sqrt(lo + hi)


def test_sequence_api(cyl_1400):
    assert len(cyl_1400) == cyl_1400.n_plus + cyl_1400.n_minus
    first = cyl_1400[0]
    assert first.mu_star == cyl_1400.mu_star[0]
    order = np.lexsort((cyl_1400.energy, cyl_1400.mu_star))
    assert np.all(np.diff(cyl_1400.mu_star) >= 0)


def _match(fast, slow):
    fk = fast.pair_keys()
    sk = [(a, b) for a, b, _, _ in slow]
    assert sorted(fk) == sorted(sk)
    ref = {(a, b): mu for a, b, mu, _ in slow}
    for k, mu in zip(fk, fast.mu_star):
        assert abs(mu - ref[k]) <= 1e-9


def test_oracle_rect_small(rect):
    w = CrossingWindow(rect, 40.0, 1.0, 2.0)
    _match(enumerate_crossings(w), scan_crossings(w))


def test_oracle_cylinder_small(cyl):
    w = CrossingWindow(cyl, 30.0, 0.0, 1.0)
    _match(enumerate_crossings(w), scan_crossings(w))
