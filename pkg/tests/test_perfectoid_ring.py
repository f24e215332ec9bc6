from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fontaine_lab.errors import LevelCapExceeded
from fontaine_lab.perfectoid_ring import (
    PerfSeries,
    eps_power,
    extended_residue,
    frobenius_perf,
    mirabolic_act,
    normalize,
    raise_level,
)
from fontaine_lab.series_rings import LaurentSeries, Truncation, frobenius, residue_log

TR = Truncation(3, 4, 40, 40)
Q = TR.q

laurent = st.dictionaries(st.integers(-2, 8), st.integers(0, Q - 1), min_size=1, max_size=6)


def perf(d, level=0):
    return PerfSeries(level, LaurentSeries.from_dict(TR, d))


def test_raise_level_examples():
    pi = perf({1: 1})
    up = raise_level(pi)
    assert up.level == 1
    assert up.body.eq_at(LaurentSeries.one_plus_pi_power(TR, 3) - LaurentSeries.constant(TR, 1))
    one = perf({0: 1})
    assert raise_level(one).body.eq_at(LaurentSeries.constant(TR, 1))


@given(laurent)
def test_raise_then_frobenius(d):
    z = perf(d)
    # phi of the level-1 variable is the level-0 variable: phi(raise(z)) = raise(phi(z))
    lhs = frobenius_perf(raise_level(z), 1)
    rhs = raise_level(frobenius_perf(z, 1))
    assert lhs.eq_at(rhs, 20)


def test_frobenius_perf_examples():
    z = perf({-1: 2, 3: 1})
    assert frobenius_perf(z, 0).eq_at(z)
    pi1 = perf({1: 1}, level=1)
    assert frobenius_perf(pi1, 1).eq_at(raise_level(perf({1: 1})))


@given(laurent)
def test_frobenius_round_trip(d):
    z = perf(d)
    assert frobenius_perf(frobenius_perf(z, 1), -1).eq_at(z, 20)
    assert frobenius_perf(frobenius_perf(z, -1), 1).eq_at(z, 20)


def test_eps_power_examples():
    assert eps_power(0, TR).eq_at(perf({0: 1}))
    assert eps_power(1, TR).eq_at(perf({0: 1, 1: 1}))
    cube = eps_power(Fraction(1, 3), TR) ** 3
    assert cube.eq_at(perf({0: 1, 1: 1}), 30)
    with pytest.raises(LevelCapExceeded):
        eps_power(Fraction(1, 81), TR, level_cap=3)


def test_extended_residue_examples():
    z = perf({-2: 4, -1: 1, 2: 3})
    assert extended_residue(z).residue == residue_log(z.body).residue
    w = frobenius_perf(perf({-1: 1}), -1)
    assert extended_residue(w).residue == 1


@given(laurent, st.integers(0, 2))
def test_extended_residue_level_independent(d, j):
    z = perf(d)
    w = z
    for _ in range(j):
        w = raise_level(w)
    assert extended_residue(w).residue == extended_residue(z).residue
    assert extended_residue(frobenius_perf(z, 1)).residue == extended_residue(z).residue


def test_normalize_lowers_level():
    z = perf({-1: 1, 2: 5})
    assert normalize(raise_level(z)).level == 0


@given(laurent, st.sampled_from([(0, 2, 1), (1, 1, 0), (0, 1, 2)]),
       st.sampled_from([(1, 1, 0), (0, 4, 0), (0, 1, 1)]))
def test_mirabolic_action_composes(d, g1, g2):
    z = perf(d)
    k1, a1, b1 = g1
    k2, a2, b2 = g2
    lhs = mirabolic_act(k1, a1, b1, mirabolic_act(k2, a2, b2, z))
    prod = (k1 + k2, a1 * a2, 3**k1 * a1 * b2 + b1)
    rhs = mirabolic_act(*prod, z)
    assert lhs.eq_at(rhs, 15)


def test_json_round_trip():
    z = perf({-1: 3, 4: 2}, level=2)
    assert PerfSeries.from_json(z.to_json(), TR).eq_at(z)


def test_identity_check_uses_frobenius():
    f = LaurentSeries.from_dict(TR, {-1: 1})
    assert raise_level(PerfSeries(0, f)).body.eq_at(frobenius(f))
