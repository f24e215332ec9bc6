import pytest

from fontaine_lab.cohomology import kummer_identify
from fontaine_lab.errors import MalformedParameter, PathologicalLocus
from fontaine_lab.padic_core import Character, PadicInt, QpStarElement, degree_F, generator_a
from fontaine_lab.principal_series import (
    ParamPoint,
    catego_check,
    class_from_hom_line,
    galois_rep,
    jacquet_image,
    kummer_iota,
    kummer_iota_matrix,
    orthogonal_class,
    pairing_matrix,
    parse_line,
    same_line,
    validate_param,
)
from fontaine_lab.series_rings import Truncation

P, N = 3, 2
ONE = Character.trivial(P, N)
CHI = Character.chi(P, N)
CHI2 = CHI * CHI
UNR4 = Character.unramified(P, N, 4)
UNR7 = Character.unramified(P, N, 7)
OMEGA = Character.make(P, N, 1, 1, 1)

LINES = {"v_p": (1, 0), "tau": (0, 1), "v_p+tau": (1, 1)}

GENERIC = [
    (CHI2, ONE), (ONE, CHI), (UNR4, ONE), (ONE, UNR4), (CHI2, UNR4),
    (CHI * UNR4, CHI), (OMEGA, ONE), (UNR7, CHI2), (ONE / CHI, UNR4),
]
EXCEPTIONAL = [(CHI, ONE, LINES["v_p"]), (CHI * UNR4, UNR4, LINES["tau"]), (CHI2, CHI, LINES["v_p+tau"])]


def grid():
    return [ParamPoint(d1, d2) for d1, d2 in GENERIC] + [ParamPoint(d1, d2, l) for d1, d2, l in EXCEPTIONAL]


# -- parameters ---------------------------------------------------------------------------


def test_validate_param_examples():
    assert validate_param(ParamPoint(CHI, ONE, (1, 0))).line == (1, 0)
    assert validate_param(ParamPoint(CHI2, ONE)).line is None
    with pytest.raises(MalformedParameter):
        validate_param(ParamPoint(CHI, ONE))
    with pytest.raises(MalformedParameter):
        validate_param(ParamPoint(CHI2, ONE, (1, 0)))
    with pytest.raises(MalformedParameter):
        validate_param(ParamPoint(CHI, ONE, (3, 6)))


def test_grid_is_classified_correctly():
    pts = grid()
    assert len(pts) == 12
    assert sum(z.exceptional for z in pts) == 3
    assert not any(z.pathological for z in pts)


def test_same_line_and_parse():
    assert same_line((1, 2), (2, 4), 3, 2)
    assert not same_line((1, 2), (1, 3), 3, 2)
    assert parse_line("1,-1") == (1, -1)
    with pytest.raises(MalformedParameter):
        parse_line("1;2")


# -- iota on Kummer classes --------------------------------------------------------------


@pytest.mark.parametrize("p", [3, 5])
def test_kummer_iota_examples(p):
    F = degree_F(p)
    q = p**N
    pp = QpStarElement(1, PadicInt(p, 6, 0, 1))
    a = QpStarElement(0, generator_a(p, 6))
    pa = QpStarElement(1, generator_a(p, 6))
    norm = lambda h: tuple(c % q for c in h.as_pair())  # noqa: E731
    assert norm(kummer_iota(pp)) == (0, F % q)
    assert norm(kummer_iota(a)) == (-F % q, 0)
    assert norm(kummer_iota(pa)) == (-F % q, F % q)


def test_kummer_iota_matrix():
    assert kummer_iota_matrix(3, 2) == [[0, 7], [2, 0]]


@pytest.mark.parametrize("p", [3, 5])
def test_pairing_matches_kummer_identification(p):
    tr = Truncation(p, 3, 80, 40)
    kd = kummer_identify(tr)
    Pm = pairing_matrix(p, 3)
    X = [[kd.coordinates[k][i] for i in range(2)] for k in ("u1v1", "u2v2")]
    # Tr(c_i cup cl(l_j)) = -[F:Q_p] sum_k X[i][k] l_j(alpha_k)
    for i in range(2):
        for j in range(2):
            pred = -kd.degree_F * sum(X[i][k] * Pm[j][k] for k in range(2))
            assert pred == kd.matrix[i][j]


# -- the two recipes ------------------------------------------------------------------------


def test_galois_rep_examples():
    assert galois_rep(ParamPoint(CHI2, CHI, (1, 0))).kind == "nonsplit-with-class"
    assert galois_rep(ParamPoint(CHI2, ONE)).kind == "nonsplit-unique"
    assert galois_rep(ParamPoint(UNR4, UNR4)).kind == "split"
    g = galois_rep(ParamPoint(CHI, ONE, (1, 0)))
    assert same_line(g.extension_class, (0, 1), 3, 2)
    g = galois_rep(ParamPoint(CHI, ONE, (0, 1)))
    assert same_line(g.extension_class, (1, 0), 3, 2)


@pytest.mark.parametrize("line", list(LINES.values()) + [(2, 5), (4, 1)])
def test_orthogonality_oracle(line):
    cls = orthogonal_class(line, 3, 2)
    # c_vp * x + c_tau * y = 0 against (Kum p, Kum a) coordinates
    assert (line[0] * cls[0] + line[1] * cls[1]) % 9 == 0
    assert same_line(class_from_hom_line(line, 3, 2), cls, 3, 2)


def test_jacquet_image_examples():
    J = jacquet_image(ParamPoint(CHI2, ONE))
    assert J.kind == "character" and J.character.eq_at(ONE / CHI, 2)
    J = jacquet_image(ParamPoint(CHI, ONE, (1, 1)))
    assert J.kind == "line" and J.line == (1, 1)
    J = jacquet_image(ParamPoint(UNR4, UNR4))
    assert J.pathological and J.character.eq_at(CHI, 2)
    J = jacquet_image(ParamPoint(CHI2, ONE), level=(3, 9))
    assert J.tail is not None and J.tail(2) == pow(2, -1, 9)


# -- the round trip ---------------------------------------------------------------------------


@pytest.mark.parametrize("z", grid(), ids=[f"pt{i}" for i in range(12)])
def test_catego_grid(z):
    assert catego_check(z)


@pytest.mark.parametrize("delta", [ONE, CHI, UNR4, OMEGA, CHI * UNR7], ids=["1", "chi", "unr4", "omega", "chi_unr7"])
@pytest.mark.parametrize("name", list(LINES))
def test_twist_invariance(delta, name):
    L = LINES[name]
    assert catego_check(ParamPoint(CHI * delta, delta, L)) == catego_check(ParamPoint(CHI, ONE, L))


def test_pathological_point_raises():
    with pytest.raises(PathologicalLocus):
        catego_check(ParamPoint(UNR4, UNR4))


def test_catego_at_p5():
    one, chi = Character.trivial(5, 3), Character.chi(5, 3)
    assert catego_check(ParamPoint(chi * chi, one))
    assert catego_check(ParamPoint(chi, one, (1, 2)))


def test_param_json():
    d = ParamPoint(CHI, ONE, (1, 1)).to_json()
    assert d["line"] == [1, 1] and d["delta1"] == CHI.to_json()
