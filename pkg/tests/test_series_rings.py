from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fontaine_lab.errors import NotInPiAplus, PoleOverflow
from fontaine_lab.padic_core import Character, PadicInt
from fontaine_lab.series_rings import (
    LaurentSeries,
    Truncation,
    TwistedModuleElement,
    a_exponent,
    frobenius,
    gamma_action,
    phi_decompose,
    phi_recompose,
    psi,
    residue_log,
    solve_phi_minus_one,
    solve_twisted_gamma,
    substitute,
    twisted_apply,
)

TR = Truncation(3, 4, 40, 40)
Q = TR.q


def series(d: dict[int, int], tr: Truncation = TR) -> LaurentSeries:
    return LaurentSeries.from_dict(tr, d)


laurent = st.dictionaries(st.integers(-3, 12), st.integers(0, Q - 1), min_size=1, max_size=8)
integral = st.dictionaries(st.integers(0, 12), st.integers(0, Q - 1), min_size=1, max_size=8)


# -- pure-python oracles ------------------------------------------------------


def convolve(a: dict[int, int], b: dict[int, int], q: int, top: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j <= top:
                out[i + j] = (out.get(i + j, 0) + x * y) % q
    return {k: v for k, v in out.items() if v}


def residue_oracle(d: dict[int, int], q: int) -> int:
    # f / (1 + pi) = f * sum (-pi)^k; the pi^-1 coefficient
    return sum(c * (-1) ** (-1 - e) for e, c in d.items() if e <= -1) % q


def as_dict(f: LaurentSeries, top: int) -> dict[int, int]:
    return {k: f.coeff(k) for k in range(-f.pole, top + 1) if f.coeff(k)}


# -- ring operations ----------------------------------------------------------


def test_small_products():
    pi, ip = LaurentSeries.pi(TR), LaurentSeries.inv_pi(TR)
    assert ((LaurentSeries.constant(TR, 1) + pi) * ip).eq_at(series({-1: 1, 0: 1}))
    assert (ip * pi).eq_at(LaurentSeries.constant(TR, 1))
    g = series({1: 2, 3: 5})
    assert substitute(pi, g).eq_at(g, 30)


@given(laurent, laurent)
def test_product_matches_convolution(a, b):
    prod = series(a) * series(b)
    top = 20
    assert as_dict(prod, top) == convolve(a, b, Q, top)


def test_pole_cap_enforced():
    with pytest.raises(PoleOverflow):
        LaurentSeries.monomial(TR, -41)


# -- Frobenius ------------------------------------------------------------------


def test_frobenius_examples():
    pi = LaurentSeries.pi(TR)
    assert frobenius(pi).eq_at(LaurentSeries.one_plus_pi_power(TR, 3) - LaurentSeries.constant(TR, 1))
    assert frobenius(LaurentSeries.constant(TR, 1)).eq_at(LaurentSeries.constant(TR, 1))
    tr9 = Truncation(3, 4, 9, 40)
    ip = frobenius(LaurentSeries.inv_pi(tr9))
    assert (ip * frobenius(LaurentSeries.pi(tr9))).eq_at(LaurentSeries.constant(tr9, 1), 9)


@given(laurent)
def test_frobenius_is_multiplicative(d):
    f, g = series(d), series({-1: 1, 2: 4})
    lhs, rhs = frobenius(f * g), frobenius(f) * frobenius(g)
    assert lhs.eq_at(rhs, 25)


@given(laurent, st.sampled_from([2, 4, 5, 7, 67]))
def test_frobenius_commutes_with_gamma(d, b):
    f = series(d)
    lhs = frobenius(gamma_action(b, f))
    rhs = gamma_action(b, frobenius(f))
    assert lhs.eq_at(rhs, 25)


# -- gamma ----------------------------------------------------------------------


def test_gamma_examples():
    pi = LaurentSeries.pi(TR)
    f = series({-2: 3, 1: 7})
    assert gamma_action(1, f).eq_at(f, 30)
    a = a_exponent(TR)
    s = gamma_action(a, pi)
    assert s.coeff(1) == a.residue % Q and s.coeff(0) == 0
    back = gamma_action(a.inverse(), s)
    assert back.eq_at(pi, 30)


# -- psi and the phi-decomposition ------------------------------------------------


def test_psi_examples():
    ip = LaurentSeries.inv_pi(TR)
    assert psi(ip).eq_at(ip, 30)
    # oracle: sum_i (1+pi)^i phi(1/pi) = phi(1/pi) phi(pi)/pi = 1/pi
    recon = phi_recompose([ip, ip, ip])
    assert recon.eq_at(ip, 30)
    pi = LaurentSeries.pi(TR)
    f = LaurentSeries.one_plus_pi_power(TR, 1) * frobenius(pi)
    assert psi(f).is_zero()


@given(laurent)
def test_psi_phi_identity(d):
    f = series(d)
    assert psi(frobenius(f)).eq_at(f, 25)


@given(laurent, integral)
def test_projection_formula(df, dg):
    f, g = series(df), series(dg)
    lhs = psi(f * frobenius(g))
    rhs = psi(f) * g
    assert lhs.eq_at(rhs, 15)


@given(laurent)
def test_decompose_recompose(d):
    f = series(d)
    assert phi_recompose(phi_decompose(f)).eq_at(f, 30)


# -- residue ------------------------------------------------------------------------


def test_residue_examples():
    ip = LaurentSeries.inv_pi(TR)
    assert residue_log(series({0: 5, 3: 1})).residue == 0
    assert residue_log(ip).residue == 1
    half = PadicInt.from_fraction(3, 4, Fraction(1, 2))
    assert residue_log(ip + half).residue == 1


@given(laurent)
def test_residue_matches_oracle(d):
    assert residue_log(series(d)).residue == residue_oracle(d, Q)


@given(laurent)
def test_residue_phi_invariant(d):
    f = series(d)
    assert residue_log(frobenius(f)).residue == residue_log(f).residue


@given(laurent, st.sampled_from([2, 4, 5, 7, 67]))
def test_residue_gamma_twist(d, b):
    f = series(d)
    lhs = residue_log(gamma_action(b, f)).residue
    assert (lhs * b - residue_log(f).residue) % Q == 0


@given(st.lists(laurent, min_size=2, max_size=2))
def test_residue_vanishes_when_psi_vanishes(ds):
    comps = [LaurentSeries.zero(TR)] + [series(d) for d in ds]
    f = phi_recompose(comps)
    assert psi(f).is_zero()
    assert residue_log(f).residue == 0


# -- solvers -------------------------------------------------------------------------


def test_solve_phi_minus_one():
    z = LaurentSeries.zero(TR)
    assert solve_phi_minus_one(z).is_zero()
    pi = LaurentSeries.pi(TR)
    assert solve_phi_minus_one(frobenius(pi) - pi).eq_at(pi, 30)
    y = series({2: 1})
    x = solve_phi_minus_one(y)
    assert (frobenius(x) - x).eq_at(y, 30)
    with pytest.raises(NotInPiAplus):
        solve_phi_minus_one(series({0: 1}))


def test_solve_twisted_gamma():
    chi = Character.chi(3, 4)
    assert solve_twisted_gamma(chi, LaurentSeries.zero(TR)).is_zero()
    # the input is a truncated series, so psi-type components keep about N / p^n digits
    tr2 = Truncation(3, 2, 80, 40)
    x = LaurentSeries.one_plus_pi_power(tr2, 1)
    a = a_exponent(tr2)
    y = gamma_action(a, x).scale(a.residue) - x
    sol = solve_twisted_gamma(Character.chi(3, 2), y)
    assert sol.prec >= 5
    assert sol.eq_at(x, sol.prec)


def test_solve_twisted_gamma_claims_no_digits_it_lacks():
    x = LaurentSeries.one_plus_pi_power(TR, 1)
    a = a_exponent(TR)
    y = gamma_action(a, x).scale(a.residue) - x
    sol = solve_twisted_gamma(Character.chi(3, 4), y)
    assert sol.prec < 0


def test_twisted_apply():
    one = Character.trivial(3, 4)
    chi = Character.chi(3, 4)
    pi = LaurentSeries.pi(TR)
    a = a_exponent(TR)
    assert twisted_apply("phi", TwistedModuleElement(one, pi)).coeff.eq_at(frobenius(pi))
    g = twisted_apply("gamma", TwistedModuleElement(chi, pi)).coeff
    assert g.eq_at(gamma_action(a, pi).scale(a.residue), 30)
    u = Character.unramified(3, 4, 7)
    c = twisted_apply("phi", TwistedModuleElement(u, LaurentSeries.constant(TR, 1))).coeff
    assert c.eq_at(LaurentSeries.constant(TR, 7))


def test_json_round_trip():
    f = series({-2: 5, 0: 1, 7: 80})
    assert LaurentSeries.from_json(f.to_json(), TR).eq_at(f)
