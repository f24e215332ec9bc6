"""The Herr complex of a rank-one module D(delta) and its explicit H^1 bases.

Cochains: C^0 = D, C^1 = D + D, C^2 = D with

    d0(x) = ((phi_D - 1) x, (gamma_D - 1) x),
    d1(u, v) = (gamma_D - 1) u - (phi_D - 1) v,

where phi_D = delta(p) phi and gamma_D = delta(a) sigma_a.  The first slot of
a cocycle is the phi-side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import zpn_linalg
from .dictionary import phi_f_function
from .errors import (
    DecompositionInfeasible,
    InsufficientPrecision,
    MalformedInput,
    SingularSystem,
    TruncationTooSmall,
)
from .function_spaces import delta_average, dilation_solve, tail_class_to_hom
from .padic_core import Character, HomQpStar, PadicInt, degree_F
from .series_rings import (
    LaurentSeries,
    Truncation,
    a_exponent,
    frobenius,
    gamma_action,
    phi_decompose,
    psi_precision,
    residue_log,
    solve_phi_minus_one,
    solve_twisted_gamma_components,
    twisted_gamma,
    twisted_phi,
)


@dataclass(frozen=True)
class Cocycle:
    delta: Character
    u: LaurentSeries
    v: LaurentSeries

    @property
    def tr(self) -> Truncation:
        return self.u.tr

    def __add__(self, other: Cocycle) -> Cocycle:
        return Cocycle(self.delta, self.u + other.u, self.v + other.v)

    def __sub__(self, other: Cocycle) -> Cocycle:
        return Cocycle(self.delta, self.u - other.u, self.v - other.v)

    def scale(self, s: int) -> Cocycle:
        return Cocycle(self.delta, self.u.scale(s), self.v.scale(s))

    def to_json(self) -> dict:
        return {"delta": self.delta.to_json(), "u": self.u.to_json(), "v": self.v.to_json()}

    @classmethod
    def from_json(cls, d: dict, tr: Truncation | None = None) -> Cocycle:
        try:
            delta = Character.from_json(d["delta"]) if isinstance(d["delta"], dict) else None
            u = LaurentSeries.from_json(d["u"], tr)
            v = LaurentSeries.from_json(d["v"], tr or u.tr)
        except (KeyError, TypeError) as exc:
            raise MalformedInput(f"bad Cocycle JSON: {exc}") from exc
        if delta is None:
            name = str(d["delta"])
            delta = Character.chi(u.p, u.tr.n) if name == "chi" else Character.trivial(u.p, u.tr.n)
        return cls(delta, u, v)


def gamma_minus_one(delta: Character, x: LaurentSeries) -> LaurentSeries:
    return twisted_gamma(delta, x) - x


def phi_minus_one(delta: Character, x: LaurentSeries) -> LaurentSeries:
    return twisted_phi(delta, x) - x


def coboundary(delta: Character, x: LaurentSeries) -> Cocycle:
    return Cocycle(delta, phi_minus_one(delta, x), gamma_minus_one(delta, x))


def defect(c: Cocycle) -> LaurentSeries:
    return gamma_minus_one(c.delta, c.u) - phi_minus_one(c.delta, c.v)


def is_cocycle(c: Cocycle) -> bool:
    d = defect(c)
    if d.prec is not None and d.prec < 0:
        raise InsufficientPrecision("cocycle defect known to negative degree only")
    return d.is_zero()


# ---------------------------------------------------------------------------
# explicit bases
# ---------------------------------------------------------------------------


def basis_h1_trivial(tr: Truncation) -> tuple[Cocycle, Cocycle]:
    one = Character.trivial(tr.p, tr.n)
    c1 = LaurentSeries.constant(tr, 1)
    z = LaurentSeries.zero(tr)
    return Cocycle(one, c1, z), Cocycle(one, z, c1)


@dataclass(frozen=True)
class CyclotomicBasis:
    c1: Cocycle
    c2: Cocycle
    gamma_u1: LaurentSeries
    u2_components: tuple[LaurentSeries, ...]

    @property
    def pair(self) -> tuple[Cocycle, Cocycle]:
        return self.c1, self.c2

    def psi_u2_structural(self) -> bool:
        """psi(u2) = 0 read off the phi-decomposition the solver built."""
        return self.u2_components[0].is_zero()

    def psi_u2_numeric(self) -> tuple[bool, int]:
        """Numeric psi(u2) modulo p, at the pi-adic precision that survives."""
        u2 = self.c2.u
        tr1 = Truncation(u2.p, 1, u2.tr.N, u2.tr.pole_cap)
        reduced = LaurentSeries(tr1, u2.start, u2.c % u2.p, u2.prec, 0)
        ps = phi_decompose(reduced)[0]
        return ps.is_zero(), int(ps.prec_value)


_BASIS_CACHE: dict = {}


def basis_h1_cyclotomic(tr: Truncation) -> CyclotomicBasis:
    """(u1, v1) with u1 = 1/pi + 1/2, and (u2, v2) with v2 = 1/pi, psi(u2) = 0."""
    if tr in _BASIS_CACHE:
        return _BASIS_CACHE[tr]
    p, n = tr.p, tr.n
    chi = Character.chi(p, n)
    inv_pi = LaurentSeries.inv_pi(tr)
    u1 = inv_pi + PadicInt.from_fraction(p, n, Fraction(1, 2))
    g = gamma_minus_one(chi, u1)
    v1 = solve_phi_minus_one(g)
    v2 = inv_pi
    u2, comps = solve_twisted_gamma_components(chi, phi_minus_one(chi, v2))
    basis = CyclotomicBasis(Cocycle(chi, u1, v1), Cocycle(chi, u2, v2), g, tuple(comps))
    _BASIS_CACHE[tr] = basis
    return basis


# ---------------------------------------------------------------------------
# cup product and trace
# ---------------------------------------------------------------------------


def cup_trace(ctilde: Cocycle, c: Cocycle) -> PadicInt:
    """res_0((u~ phi(v) - v~ sigma_a(u)) dpi/(1+pi)) for c~ over D(chi), c over D(1).

    With the phi-side in the first slot this is the product compatible with
    d0 and d1: it kills coboundaries on either side.
    """
    a = a_exponent(c.tr)
    z = ctilde.u * frobenius(c.v) - ctilde.v * gamma_action(a, c.u)
    return residue_log(z)


def cup_table(tr: Truncation) -> list[list[int]]:
    b = basis_h1_cyclotomic(tr)
    t1, t2 = basis_h1_trivial(tr)
    q = tr.q
    out = []
    for ct in b.pair:
        row = []
        for c in (t1, t2):
            r = cup_trace(ct, c).to_int()
            row.append(r - q if r > q // 2 else r)
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# decomposition in the explicit basis
# ---------------------------------------------------------------------------


@dataclass
class H1Class:
    alpha: int
    beta: int
    certificate: LaurentSeries
    precision: int
    n: int

    def coords(self) -> tuple[int, int]:
        return self.alpha, self.beta


def _column_data(delta: Character, e: int, tr: Truncation) -> tuple[LaurentSeries, LaurentSeries]:
    x = LaurentSeries.monomial(tr, e)
    return phi_minus_one(delta, x), gamma_minus_one(delta, x)


def h1_decompose(c: Cocycle, X: int | None = None) -> H1Class:
    """alpha, beta, x with c = alpha (u1, v1) + beta (u2, v2) + d0(x), over Z/p^n."""
    tr = c.tr
    p, n, q = tr.p, tr.n, tr.q
    basis = basis_h1_cyclotomic(tr)
    b1, b2 = basis.pair
    series = [c.u, c.v, b1.u, b1.v, b2.u, b2.v]
    Ne = int(min(min(s.prec_value for s in series), tr.N))
    if Ne < 1:
        raise DecompositionInfeasible("truncation too small for a decomposition")
    if X is None:
        # phi multiplies poles by about p, and gamma_D - 1 can drop one order
        X = max(-(-c.u.pole // p), c.v.pole) + 1
        X = min(X, (tr.pole_cap - (n - 1) * (p - 1)) // p)
    cols = []
    for e in range(-X, Ne + 1):
        cu, cv = _column_data(c.delta, e, tr)
        cols.append((cu, cv))
    all_u = [b1.u, b2.u, c.u] + [cu for cu, _ in cols]
    all_v = [b1.v, b2.v, c.v] + [cv for _, cv in cols]
    if any(s.prec is not None and s.prec < Ne for s in all_u + all_v):
        Ne = min(int(s.prec_value) for s in all_u + all_v)
    lo_u = -max(s.pole for s in all_u)
    lo_v = -max(s.pole for s in all_v)
    rows_u, rows_v = Ne - lo_u + 1, Ne - lo_v + 1

    def block(s_u: LaurentSeries, s_v: LaurentSeries) -> np.ndarray:
        return np.concatenate([s_u.dense(lo_u, Ne), s_v.dense(lo_v, Ne)])

    ncol = 2 + len(cols)
    A = np.zeros((rows_u + rows_v, ncol), dtype=np.int64)
    A[:, 0] = block(b1.u, b1.v)
    A[:, 1] = block(b2.u, b2.v)
    for i, (cu, cv) in enumerate(cols):
        if cols and -X + i > Ne:
            break
        A[:, 2 + i] = block(cu, cv)
    rhs = block(c.u, c.v)
    try:
        sol = zpn_linalg.solve(A, rhs, p, n)
    except SingularSystem as exc:
        raise DecompositionInfeasible(f"class not in the span of the basis at this truncation: {exc}") from exc
    K = zpn_linalg.kernel(A, p, n)
    if K.shape[1] and np.any(K[:2, :] % q):
        raise DecompositionInfeasible("coordinates not determined at this truncation")
    alpha, beta = int(sol[0]) % q, int(sol[1]) % q
    x = LaurentSeries(tr, -X, [int(v) for v in sol[2:]], prec=Ne)
    cert = c - b1.scale(alpha) - b2.scale(beta) - coboundary(c.delta, x)
    if not (cert.u.truncate(Ne).is_zero() and cert.v.truncate(Ne).is_zero()):
        raise DecompositionInfeasible("certificate check failed")
    return H1Class(alpha, beta, x, Ne, n)


# ---------------------------------------------------------------------------
# iota_chi, two ways
# ---------------------------------------------------------------------------


def iota_chi(c: Cocycle, pipeline: str = "decompose") -> HomQpStar:
    tr = c.tr
    if pipeline == "decompose":
        h = h1_decompose(c)
        return HomQpStar.make(tr.p, tr.n, h.alpha, h.beta)
    if pipeline == "direct":
        # the Delta-invariant part of the class; for p = 3 this is already phi_u
        F = delta_average(phi_f_function(c.u))
        sol = dilation_solve(F)
        return tail_class_to_hom(sol.solution.tail)
    raise MalformedInput(f"unknown pipeline {pipeline!r}")


# ---------------------------------------------------------------------------
# H^0
# ---------------------------------------------------------------------------


@dataclass
class H0Result:
    delta: Character
    module_type: list[int]
    generators: list[LaurentSeries] = field(repr=False)

    @property
    def free_rank(self) -> int:
        return sum(1 for k in self.module_type if k == self.delta.n)


def h0_compute(delta: Character, tr: Truncation, X: int | None = None, Nx: int | None = None) -> H0Result:
    """Kernel of d0 on Laurent polynomials with pole <= X and degree <= Nx."""
    p, n, q = tr.p, tr.n, tr.q
    X = n if X is None else X
    Nx = min(tr.N, 30) if Nx is None else Nx
    if Nx < 1:
        raise TruncationTooSmall("truncation too small for H^0")
    cols = [_column_data(delta, e, tr) for e in range(-X, Nx + 1)]
    lo_u = -max(cu.pole for cu, _ in cols)
    lo_v = -max(cv.pole for _, cv in cols)
    A = np.zeros((Nx - lo_u + 1 + Nx - lo_v + 1, len(cols)), dtype=np.int64)
    for i, (cu, cv) in enumerate(cols):
        A[:, i] = np.concatenate([cu.dense(lo_u, Nx), cv.dense(lo_v, Nx)])
    K = zpn_linalg.kernel(A, p, n)
    mt = zpn_linalg.module_type(K, p, n) if K.shape[1] else []
    gens = [LaurentSeries(tr, -X, [int(v) for v in K[:, j]], prec=Nx) for j in range(K.shape[1])]
    return H0Result(delta, mt, gens)


# ---------------------------------------------------------------------------
# Kummer identification
# ---------------------------------------------------------------------------


@dataclass
class KummerData:
    matrix: list[list[int]]
    degree_F: int
    coordinates: dict[str, tuple[Fraction, Fraction]]  # (Kum(p), Kum(a)) coordinates


def kummer_identify(tr: Truncation) -> KummerData:
    """Coordinates of the cyclotomic basis in the Kummer basis.

    With cl(1,0) = v_p, cl(0,1) = tau and Tr(Kum(alpha) cup cl(l)) = -l(alpha)
    (the pairing in the other order), a class X = x_p Kum(p) + x_a Kum(a)
    has Tr_F(X cup cl(l)) = -[F:Q_p] (x_p l(p) + x_a l(a)); so the coordinates
    are minus the rows of the cup table divided by [F:Q_p].
    """
    M = cup_table(tr)
    F = degree_F(tr.p)
    coords = {}
    for name, row in zip(("u1v1", "u2v2"), M):
        # l = v_p has (l(p), l(a)) = (1, 0); l = tau has (0, 1)
        coords[name] = (Fraction(-row[0], F), Fraction(-row[1], F))
    return KummerData(M, F, coords)


def iota_of_kummer(tr: Truncation, kd: KummerData) -> dict[str, tuple[Fraction, Fraction]]:
    """Invert the coordinates and push Kum(p), Kum(a) through iota_chi (basis images v_p, tau)."""
    (x11, x12), (x21, x22) = kd.coordinates["u1v1"], kd.coordinates["u2v2"]
    det = x11 * x22 - x12 * x21
    if det == 0:
        raise SingularSystem("Kummer coordinates are degenerate")
    # Kum(p) = y1 c1 + y2 c2 etc.: invert the 2x2 matrix with rows = basis classes
    inv = [[x22 / det, -x12 / det], [-x21 / det, x11 / det]]
    b = basis_h1_cyclotomic(tr)
    images = [iota_chi(c, "decompose").as_pair() for c in b.pair]
    out = {}
    for name, col in (("Kum_p", 0), ("Kum_a", 1)):
        y1, y2 = inv[col][0], inv[col][1]
        out[name] = (y1 * images[0][0] + y2 * images[1][0], y1 * images[0][1] + y2 * images[1][1])
    return out
