"""Parameter bookkeeping for principal series of GL_2(Q_p).

A parameter is a pair of characters (delta1, delta2), together with a line in
Hom(Q_p^*, Z_p) when delta1 = chi delta2.  Lines are written projectively in
the (v_p, tau) basis as pairs (c_vp, c_tau); extension classes in
H^1(chi) are written in the (Kum(p), Kum(a)) basis.

Two independent recipes are compared:

* the Galois side solves the pairing equation l(alpha) = 0 for the class;
* the automorphic side reads the Jacquet image, uses the twisted-invariant
  rank to decide between a unique extension and a line, and pulls the line
  back through iota_chi on Kummer classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .errors import LevelTooSmall, MalformedParameter, PathologicalLocus, SingularSystem
from .function_spaces import (
    character_level_ok,
    character_tail,
    tau_modulus,
    twisted_invariants,
)
from .padic_core import (
    Character,
    HomQpStar,
    PadicInt,
    QpStarElement,
    degree_F,
    generator_a,
    tau,
)

Line = tuple[int, int]


def _primitive(line: Line, p: int, n: int) -> Line:
    q = p**n
    x, y = line[0] % q, line[1] % q
    if x % p == 0 and y % p == 0:
        raise MalformedParameter("a line needs a coordinate that is a unit")
    return (x, y)


def same_line(l1: Line, l2: Line, p: int, n: int) -> bool:
    """Projective equality of primitive vectors over Z/p^n."""
    (x1, y1), (x2, y2) = _primitive(l1, p, n), _primitive(l2, p, n)
    return (x1 * y2 - x2 * y1) % p**n == 0


@dataclass(frozen=True)
class ParamPoint:
    delta1: Character
    delta2: Character
    line: Line | None = None

    @property
    def p(self) -> int:
        return self.delta1.p

    @property
    def n(self) -> int:
        return min(self.delta1.n, self.delta2.n)

    @property
    def exceptional(self) -> bool:
        """delta1 = chi delta2, where the fibre is a projective line."""
        chi = Character.chi(self.p, self.n)
        return self.delta1.eq_at(chi * self.delta2, self.n)

    @property
    def pathological(self) -> bool:
        return self.delta1.eq_at(self.delta2, self.n)

    def to_json(self) -> dict:
        d = {"delta1": self.delta1.to_json(), "delta2": self.delta2.to_json()}
        if self.line is not None:
            d["line"] = list(self.line)
        return d


def validate_param(z: ParamPoint) -> ParamPoint:
    if z.delta1.p != z.delta2.p:
        raise MalformedParameter("characters over different primes")
    if z.exceptional:
        if z.line is None:
            raise MalformedParameter("delta1 = chi delta2 needs a line (c_vp, c_tau)")
        return ParamPoint(z.delta1, z.delta2, _primitive(z.line, z.p, z.n))
    if z.line is not None:
        raise MalformedParameter("a line is only allowed when delta1 = chi delta2")
    return z


# ---------------------------------------------------------------------------
# iota_chi on Kummer classes
# ---------------------------------------------------------------------------


def kummer_iota(alpha: QpStarElement) -> HomQpStar:
    """iota_chi(Kum(alpha)) = [F:Q_p] (v_p(alpha) tau - tau(alpha) v_p)."""
    p = alpha.p
    t = tau(alpha)
    F = degree_F(p)
    return HomQpStar(-t * F, PadicInt(p, t.n, 0, F * alpha.k))


def kummer_iota_matrix(p: int, n: int) -> list[list[int]]:
    """Columns: iota_chi(Kum(p)), iota_chi(Kum(a)) in (c_vp, c_tau) coordinates."""
    digits = n + 4
    cols = [kummer_iota(QpStarElement(1, PadicInt(p, digits, 0, 1))),
            kummer_iota(QpStarElement(0, generator_a(p, digits)))]
    q = p**n
    return [[c.as_pair()[i] % q for c in cols] for i in range(2)]


def pairing_matrix(p: int, n: int) -> list[list[int]]:
    """P[i][j] = l_i(alpha_j) for l in (v_p, tau) and alpha in (p, a)."""
    digits = n + 4
    alphas = [QpStarElement(1, PadicInt(p, digits, 0, 1)),
              QpStarElement(0, generator_a(p, digits))]
    homs = [HomQpStar.make(p, n, 1, 0), HomQpStar.make(p, n, 0, 1)]
    return [[h(al).with_precision(n).residue for al in alphas] for h in homs]


def orthogonal_class(line: Line, p: int, n: int, P: list[list[int]] | None = None) -> Line:
    """The (Kum(p), Kum(a)) class X with l(X) = 0 for l spanning the line."""
    P = pairing_matrix(p, n) if P is None else P
    c_vp, c_tau = _primitive(line, p, n)
    # row vector r = (c_vp, c_tau) P; solve r . x = 0
    r0 = (c_vp * P[0][0] + c_tau * P[1][0]) % p**n
    r1 = (c_vp * P[0][1] + c_tau * P[1][1]) % p**n
    return _primitive((r1, -r0), p, n)


def class_from_hom_line(line: Line, p: int, n: int, M: list[list[int]] | None = None) -> Line:
    """Pull a line of homomorphisms back to a Kummer class through iota_chi.

    Over Z/p^n the matrix of iota_chi has determinant [F:Q_p]^2, which is a
    unit only for odd p; for p = 2 the preimage is found by the adjugate,
    which is correct projectively.
    """
    M = kummer_iota_matrix(p, n) if M is None else M
    q = p**n
    (a, b), (c, d) = M
    det = (a * d - b * c) % q
    if det == 0:
        raise SingularSystem("iota_chi is degenerate on Kummer classes")
    c_vp, c_tau = _primitive(line, p, n)
    x = (d * c_vp - b * c_tau) % q
    y = (-c * c_vp + a * c_tau) % q
    g = gcd(gcd(x, y), q)
    return _primitive((x // g, y // g), p, n) if g > 1 else _primitive((x, y), p, n)


# ---------------------------------------------------------------------------
# the two recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaloisRepRecipe:
    kind: str  # "nonsplit-unique" | "nonsplit-with-class" | "split"
    delta1: Character
    delta2: Character
    extension_class: Line | None = None

    def to_json(self) -> dict:
        d = {"kind": self.kind, "delta1": self.delta1.to_json(), "delta2": self.delta2.to_json()}
        if self.extension_class is not None:
            d["extension_class"] = {"Kum_p": self.extension_class[0], "Kum_a": self.extension_class[1]}
        return d


@dataclass(frozen=True)
class JacquetImageDesc:
    kind: str  # "character" | "line"
    twist: Character
    character: Character | None = None
    line: Line | None = None
    pathological: bool = False
    tail: object = None

    def to_json(self) -> dict:
        d = {"kind": self.kind, "twist": self.twist.to_json(), "pathological": self.pathological}
        if self.character is not None:
            d["character"] = self.character.to_json()
        if self.line is not None:
            d["line"] = {"c_vp": self.line[0], "c_tau": self.line[1]}
        return d


def galois_rep(z: ParamPoint) -> GaloisRepRecipe:
    z = validate_param(z)
    if z.pathological:
        return GaloisRepRecipe("split", z.delta1, z.delta2)
    if z.exceptional:
        cls = orthogonal_class(z.line, z.p, z.n)
        return GaloisRepRecipe("nonsplit-with-class", z.delta1, z.delta2, cls)
    return GaloisRepRecipe("nonsplit-unique", z.delta1, z.delta2)


def jacquet_image(z: ParamPoint, level: tuple[int, int] | None = None) -> JacquetImageDesc:
    """The Jacquet line: chi delta2 / delta1 twisted by delta1 / chi, or the line twisted by delta2."""
    z = validate_param(z)
    chi = Character.chi(z.p, z.n)
    if z.exceptional:
        return JacquetImageDesc("line", z.delta2, line=z.line)
    eta = chi * z.delta2 / z.delta1
    tail = character_tail(eta, *level) if level is not None else None
    return JacquetImageDesc("character", z.delta1 / chi, character=eta,
                            pathological=z.pathological, tail=tail)


def natural_level(delta: Character) -> tuple[int, int]:
    """A level (m, r) through which delta factors and where v_p and tau live.

    r is a multiple of p^n: when delta = 1 mod p the free generator of the
    eigenspace is (delta - 1)/p rather than the delta-tail itself, and it only
    becomes periodic at that length.
    """
    p, n = delta.p, delta.n
    q = p**n
    order = 1
    while pow(delta.val_p.residue, order, q) != 1:
        order += 1
    r = order * q // gcd(order, q)
    m = tau_modulus(p, n)
    while not character_level_ok(delta, m, r):
        m += 1
        if m > tau_modulus(p, n) + n:
            raise LevelTooSmall("no small level for this character")
    return m, r


@lru_cache(maxsize=None)
def _invariant_rank(key: tuple) -> tuple[int, bool]:
    eta = Character.make(*key)
    level = natural_level(eta)
    inv = twisted_invariants(eta, level)
    return inv.free_rank, inv.contains(character_tail(eta, *level))


def _key(d: Character) -> tuple:
    """d reduced to the first precision at which it differs from 1 (1 if trivial).

    The rank of the eigenspace is read there, which keeps the linear system small.
    """
    p = d.p
    k = 1
    while k < d.n and Character.make(p, k, d.val_p.residue, d.teich_i, d.val_a.residue).is_trivial():
        k += 1
    q = p**k
    reduced = Character.make(p, k, d.val_p.residue % q, d.teich_i, d.val_a.residue % q)
    if reduced.is_trivial():
        k, q = 1, p
    return (p, k, d.val_p.residue % q, d.teich_i, d.val_a.residue % q)


def catego_check(z: ParamPoint) -> bool:
    """Read the extension off the Jacquet image and compare with the Galois recipe."""
    z = validate_param(z)
    if z.pathological:
        raise PathologicalLocus("delta1 = delta2: no extension is attached")
    p, n = z.p, z.n
    chi = Character.chi(p, n)
    J = jacquet_image(z)
    G = galois_rep(z)
    if J.kind == "character":
        eta = J.character
        rank, has_tail = _invariant_rank(_key(eta))
        if rank != 1 or not has_tail:
            return False
        d1, d2 = chi * J.twist, eta * J.twist
        return (G.kind == "nonsplit-unique" and G.delta1.eq_at(d1, n)
                and G.delta2.eq_at(d2, n))
    rank, _ = _invariant_rank(_key(Character.trivial(p, n)))
    if rank != 2:
        return False
    cls = class_from_hom_line(J.line, p, n)
    d1, d2 = chi * J.twist, J.twist
    return (G.kind == "nonsplit-with-class" and G.delta1.eq_at(d1, n)
            and G.delta2.eq_at(d2, n) and same_line(cls, G.extension_class, p, n))


def parse_line(text: str) -> Line:
    try:
        a, b = (int(s) for s in text.split(","))
    except ValueError as exc:
        raise MalformedParameter(f"line must be 'c_vp,c_tau': {exc}") from exc
    return (a, b)
