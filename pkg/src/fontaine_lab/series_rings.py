"""Truncated Laurent series over Z/p^n and the operators phi, psi, sigma_b.

A :class:`LaurentSeries` is ``p^shift * sum_{k >= start} c_k pi^k`` with the
coefficients known modulo p^n.  ``prec`` is the pi-adic precision: the
coefficients of degree ``<= prec`` are known and everything above is
unknown.  ``prec = None`` marks an exact Laurent polynomial.

Modulo p^n every element of O_E has a bounded pole, and phi, psi send
Laurent polynomials to Laurent polynomials, so exact inputs stay exact
under those operators.  sigma_b does not preserve polynomials and always
returns a truncated series.

Precision rules used throughout (v = lowest known degree):

* product: ``min(v_f + prec_g, v_g + prec_f)``;
* phi and sigma_b preserve ``prec``;
* psi turns ``prec = P`` with pole m into ``s^n(P + 1) - m - 1`` where
  ``s(j) = ceil((j - p + 1) / p)``: modulo p^n psi only contracts the
  pi-adic filtration by about p^n, which is a real loss and is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import zpn_linalg
from .errors import (
    InsufficientPrecision,
    MalformedInput,
    NotInPiAplus,
    NotPsiZero,
    PoleOverflow,
    PrecisionError,
    SingularSystem,
)
from .padic_core import (
    Character,
    PadicInt,
    a_residue,
    binom_row,
    c_of,
    vp_factorial,
)

INF = math.inf


@dataclass(frozen=True)
class Truncation:
    """Working precision: p-adic digits n, pi-adic degree N, pole cap."""

    p: int
    n: int = 4
    N: int = 80
    pole_cap: int = 40

    @property
    def q(self) -> int:
        return self.p**self.n

    def with_N(self, N: int) -> Truncation:
        return Truncation(self.p, self.n, N, self.pole_cap)


# ---------------------------------------------------------------------------
# low-level polynomial helpers on int64 arrays
# ---------------------------------------------------------------------------


def _arr(x, q: int) -> np.ndarray:
    return np.asarray(np.array(x, dtype=object) % q, dtype=np.int64)


def _mul(a: np.ndarray, b: np.ndarray, q: int, length: int | None = None) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=np.int64)
    if length is not None:
        a, b = a[:length], b[:length]
    out = np.convolve(a, b) % q
    return out if length is None else out[:length]


def _inv_series(h: np.ndarray, length: int, q: int) -> np.ndarray:
    """Inverse of a power series with unit constant term, to ``length`` terms."""
    inv0 = pow(int(h[0]), -1, q)
    x = np.array([inv0], dtype=np.int64)
    k = 1
    while k < length:
        k = min(2 * k, length)
        hx = _mul(h[:k], x, q, k)
        two_minus = (-hx) % q
        two_minus[0] = (two_minus[0] + 2) % q
        x = _mul(x, two_minus, q, k)
    return x[:length]


def _horner(coeffs: np.ndarray, g: np.ndarray, q: int, length: int | None) -> np.ndarray:
    """sum coeffs[k] g^k, truncated to ``length`` terms when given."""
    acc = np.zeros(1, dtype=np.int64)
    for c in coeffs[::-1]:
        acc = _mul(acc, g, q, length) if len(acc) else acc
        if len(acc) == 0:
            acc = np.zeros(1, dtype=np.int64)
        acc[0] = (acc[0] + int(c)) % q
    return acc


@lru_cache(maxsize=64)
def _shift_matrix(d: int, q: int, sign: int) -> np.ndarray:
    """M with (M r)_j = sum_k r_k C(k, j) sign^(k-j): re-expansion at x -> x + sign."""
    M = np.zeros((d, d), dtype=np.int64)
    row = np.zeros(d, dtype=np.int64)
    for k in range(d):
        new = row.copy()
        new[1:] = row[:-1]
        new[0] = 0
        new = (new + sign * row) % q if k else new
        new[k] = 1
        row = new
        M[: k + 1, k] = row[: k + 1]
    return M


def _taylor_shift(r: np.ndarray, q: int, sign: int) -> np.ndarray:
    """Coefficients of R(x + sign) given those of R(x)."""
    d = len(r)
    if d == 0:
        return r
    M = _shift_matrix(d, q, sign)
    return (M.astype(object).dot(r.astype(object)) % q).astype(np.int64)


# ---------------------------------------------------------------------------
# LaurentSeries
# ---------------------------------------------------------------------------


class LaurentSeries:
    __slots__ = ("tr", "start", "c", "prec", "shift")

    def __init__(self, tr: Truncation, start: int, coeffs, prec: int | None = None,
                 shift: int = 0, check_pole: bool = True):
        c = _arr(coeffs, tr.q) if not isinstance(coeffs, np.ndarray) else coeffs % tr.q
        c = np.asarray(c, dtype=np.int64)
        if prec is not None:
            keep = max(0, prec - start + 1)
            c = c[:keep]
        nz = np.flatnonzero(c)
        if len(nz) == 0:
            c = np.zeros(0, dtype=np.int64)
            start = 0 if prec is None else min(0, prec + 1)
        else:
            start = start + int(nz[0])
            c = c[nz[0]: nz[-1] + 1]
        self.tr = tr
        self.start = start
        self.c = c
        self.c.setflags(write=False)
        self.prec = prec
        self.shift = shift
        if check_pole and self.pole > tr.pole_cap:
            raise PoleOverflow(f"pole {self.pole} exceeds cap {tr.pole_cap}")

    # -- construction -------------------------------------------------------
    @classmethod
    def zero(cls, tr: Truncation) -> LaurentSeries:
        return cls(tr, 0, [])

    @classmethod
    def monomial(cls, tr: Truncation, k: int, coeff: int = 1) -> LaurentSeries:
        return cls(tr, k, [coeff])

    @classmethod
    def constant(cls, tr: Truncation, value: int) -> LaurentSeries:
        return cls(tr, 0, [value])

    @classmethod
    def pi(cls, tr: Truncation) -> LaurentSeries:
        return cls.monomial(tr, 1)

    @classmethod
    def inv_pi(cls, tr: Truncation) -> LaurentSeries:
        return cls.monomial(tr, -1)

    @classmethod
    def one_plus_pi_power(cls, tr: Truncation, b: int) -> LaurentSeries:
        """(1 + pi)^b; exact for b >= 0, truncated at N otherwise."""
        if b >= 0:
            return cls(tr, 0, binom_row(b, b, tr.q))
        return cls(tr, 0, binom_row(b, tr.N, tr.q), prec=tr.N)

    @classmethod
    def from_dict(cls, tr: Truncation, terms: dict[int, int], prec: int | None = None) -> LaurentSeries:
        if not terms:
            return cls(tr, 0, [], prec)
        lo, hi = min(terms), max(terms)
        c = [0] * (hi - lo + 1)
        for k, v in terms.items():
            c[k - lo] = v
        return cls(tr, lo, c, prec)

    # -- basic properties ---------------------------------------------------
    @property
    def p(self) -> int:
        return self.tr.p

    @property
    def q(self) -> int:
        return self.tr.q

    @property
    def exact(self) -> bool:
        return self.prec is None

    @property
    def pole(self) -> int:
        return max(0, -self.start) if len(self.c) else 0

    @property
    def val(self) -> float | int:
        return self.start if len(self.c) else INF

    @property
    def degree(self) -> int:
        return self.start + len(self.c) - 1 if len(self.c) else -1

    @property
    def prec_value(self) -> float | int:
        return INF if self.prec is None else self.prec

    def coeff(self, k: int) -> int:
        if self.prec is not None and k > self.prec:
            raise InsufficientPrecision(f"coefficient of degree {k} beyond precision {self.prec}")
        i = k - self.start
        return int(self.c[i]) if 0 <= i < len(self.c) else 0

    def coeff_padic(self, k: int) -> PadicInt:
        return PadicInt(self.p, self.tr.n, self.shift, self.coeff(k))

    def terms(self) -> dict[int, int]:
        return {self.start + i: int(v) for i, v in enumerate(self.c) if v}

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients of degrees lo..hi (requires them to be known)."""
        if self.prec is not None and hi > self.prec:
            raise InsufficientPrecision(f"degree {hi} beyond precision {self.prec}")
        out = np.zeros(hi - lo + 1, dtype=np.int64)
        for i, v in enumerate(self.c):
            k = self.start + i
            if lo <= k <= hi:
                out[k - lo] = v
        return out

    def with_prec(self, prec: int | None) -> LaurentSeries:
        if prec is not None and self.prec is not None and prec > self.prec:
            raise InsufficientPrecision(f"cannot raise precision {self.prec} -> {prec}")
        return LaurentSeries(self.tr, self.start, self.c, prec, self.shift)

    def truncate(self, prec: int) -> LaurentSeries:
        return self.with_prec(min(prec, self.prec_value) if self.prec is not None else prec)

    def retruncate(self, tr: Truncation) -> LaurentSeries:
        prec = self.prec if self.prec is None else min(self.prec, tr.N)
        return LaurentSeries(tr, self.start, self.c, prec, self.shift)

    def is_zero(self) -> bool:
        return len(self.c) == 0

    def in_A_plus(self) -> bool:
        return self.pole == 0

    def in_pi_A_plus(self) -> bool:
        if self.prec is not None and self.prec < 0:
            raise InsufficientPrecision("constant term unknown")
        return self.pole == 0 and self.coeff(0) == 0

    def pole_part(self) -> LaurentSeries:
        t = {k: v for k, v in self.terms().items() if k < 0}
        return LaurentSeries.from_dict(self.tr, t)

    def eq_at(self, other: LaurentSeries, N: int | None = None) -> bool:
        """Equality of coefficients up to degree N (default: common precision)."""
        common = min(self.prec_value, other.prec_value)
        if N is None:
            N = common
        if N > common:
            raise InsufficientPrecision(f"comparison at degree {N} beyond precision {common}")
        d = self - other
        return all(k > N for k in d.terms())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (self.tr.p == other.tr.p and self.tr.n == other.tr.n and self.prec == other.prec
                and self.shift == other.shift and self.start == other.start
                and np.array_equal(self.c, other.c))

    def __hash__(self):
        return hash((self.tr.p, self.tr.n, self.prec, self.shift, self.start, self.c.tobytes()))

    def __repr__(self) -> str:
        terms = self.terms()
        body = " + ".join(f"{v}*pi^{k}" for k, v in list(terms.items())[:6]) or "0"
        if len(terms) > 6:
            body += " + ..."
        tail = "" if self.prec is None else f" + O(pi^{self.prec + 1})"
        off = f"p^{self.shift}*" if self.shift else ""
        return f"LaurentSeries({off}({body}){tail} mod {self.p}^{self.tr.n})"

    # -- ring operations ---------------------------------------------------
    def _align(self, other: LaurentSeries) -> tuple[LaurentSeries, LaurentSeries]:
        if self.shift == other.shift:
            return self, other
        lo = min(self.shift, other.shift)

        def lift(f):
            k = f.shift - lo
            return LaurentSeries(f.tr, f.start, (f.c.astype(object) * f.p**k) % f.q, f.prec, lo)

        return lift(self), lift(other)

    def _coerce(self, other) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            return other
        if isinstance(other, int):
            return LaurentSeries.constant(self.tr, other)
        if isinstance(other, PadicInt):
            if other.v < 0:
                return LaurentSeries(self.tr, 0, [other.residue], shift=other.v)
            return LaurentSeries.constant(self.tr, other.to_int())
        return NotImplemented

    def __add__(self, other) -> LaurentSeries:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._align(other)
        prec = None if a.prec is None and b.prec is None else min(a.prec_value, b.prec_value)
        if not len(a.c):
            return LaurentSeries(a.tr, b.start, b.c, prec, a.shift)
        if not len(b.c):
            return LaurentSeries(a.tr, a.start, a.c, prec, a.shift)
        lo = min(a.start, b.start)
        hi = max(a.degree, b.degree)
        out = np.zeros(hi - lo + 1, dtype=np.int64)
        out[a.start - lo: a.start - lo + len(a.c)] += a.c
        out[b.start - lo: b.start - lo + len(b.c)] += b.c
        return LaurentSeries(a.tr, lo, out, prec, a.shift)

    __radd__ = __add__

    def __neg__(self) -> LaurentSeries:
        return LaurentSeries(self.tr, self.start, (-self.c) % self.q, self.prec, self.shift)

    def __sub__(self, other) -> LaurentSeries:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> LaurentSeries:
        return (-self) + other

    def scale(self, s: int | PadicInt) -> LaurentSeries:
        if isinstance(s, PadicInt):
            shift = self.shift + s.v
            s = s.residue
        else:
            shift = self.shift
        return LaurentSeries(self.tr, self.start, (self.c.astype(object) * s) % self.q,
                             self.prec, shift)

    def __mul__(self, other) -> LaurentSeries:
        if isinstance(other, (int, PadicInt)):
            return self.scale(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        vf, vg = self.val, other.val
        prec_f, prec_g = self.prec_value, other.prec_value
        bound = min(vf + prec_g, vg + prec_f)
        if vf == INF and vg == INF:
            bound = min(prec_f + min(prec_g, 0), prec_g + min(prec_f, 0)) if (
                prec_f != INF or prec_g != INF) else INF
        prec = None if bound == INF else int(bound)
        if not len(self.c) or not len(other.c):
            return LaurentSeries(self.tr, 0, [], prec, self.shift + other.shift)
        start = self.start + other.start
        length = None if prec is None else max(prec - start + 1, 0)
        out = _mul(self.c, other.c, self.q, length)
        return LaurentSeries(self.tr, start, out, prec, self.shift + other.shift)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> LaurentSeries:
        out = LaurentSeries.constant(self.tr, 1)
        for _ in range(k):
            out = out * self
        return out

    # -- JSON --------------------------------------------------------------
    def to_json(self) -> dict:
        pole = self.pole
        top = self.prec if self.prec is not None else max(self.degree, 0)
        coeffs = [str(self.coeff(k)) for k in range(-pole, top + 1)]
        return {"p": self.p, "n": self.tr.n, "N": top, "exact": self.prec is None,
                "pole": pole, "val_offset": self.shift, "coeffs": coeffs}

    @classmethod
    def from_json(cls, d: dict, tr: Truncation | None = None) -> LaurentSeries:
        try:
            p, n = int(d["p"]), int(d["n"])
            pole = int(d.get("pole", 0))
            coeffs = [int(x) for x in d["coeffs"]]
            top = int(d.get("N", len(coeffs) - 1 - pole))
            exact = bool(d.get("exact", False))
            shift = int(d.get("val_offset", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad LaurentSeries JSON: {exc}") from exc
        if tr is None:
            tr = Truncation(p, n, max(top, 0), max(pole, 40))
        if tr.p != p or tr.n != n:
            raise MalformedInput("series prime/precision does not match configuration")
        return cls(tr, -pole, coeffs, None if exact else top, shift)


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _phi_pi(p: int, q: int) -> np.ndarray:
    """Coefficients of (1+pi)^p - 1."""
    return _arr([0] + [math.comb(p, i) for i in range(1, p + 1)], q)


@lru_cache(maxsize=32)
def _phi_inv_pi(p: int, n: int) -> np.ndarray:
    """phi(pi)^(-1) as a polynomial in t = 1/pi (exact modulo p^n).

    (1+pi)^p - 1 = pi^p (1 + p w) with w a polynomial in 1/pi, hence
    phi(pi)^(-1) = t^p sum_{k<n} (-p w)^k.
    """
    q = p**n
    w = np.zeros(p, dtype=np.int64)
    for i in range(1, p):
        w[p - i] = (math.comb(p, i) // p) % q
    mpw = (-p * w) % q
    total = np.zeros(1, dtype=np.int64)
    total[0] = 1
    term = total.copy()
    for _ in range(1, n):
        term = _mul(term, mpw, q)
        padded = np.zeros(max(len(total), len(term)), dtype=np.int64)
        padded[: len(total)] += total
        padded[: len(term)] += term
        total = padded % q
    out = np.zeros(len(total) + p, dtype=np.int64)
    out[p:] = total
    return out


def frobenius(f: LaurentSeries) -> LaurentSeries:
    """phi(f) = f((1+pi)^p - 1); exact on Laurent polynomials."""
    tr, q = f.tr, f.q
    if f.is_zero():
        return f
    pos = f.dense(0, f.degree) if f.degree >= 0 else np.zeros(0, dtype=np.int64)
    length = None if f.prec is None else f.prec + 1
    result = {}
    if len(pos):
        vals = _horner(pos, _phi_pi(tr.p, q), q, length)
        for k, v in enumerate(vals):
            if v:
                result[k] = int(v)
    m = f.pole
    if m:
        neg = np.zeros(m + 1, dtype=np.int64)
        for j in range(1, m + 1):
            neg[j] = f.coeff(-j)
        vals = _horner(neg, _phi_inv_pi(tr.p, tr.n), q, None)
        for j, v in enumerate(vals):
            if v:
                result[-j] = (result.get(-j, 0) + int(v)) % q
    out = LaurentSeries.from_dict(tr, result, f.prec)
    return LaurentSeries(tr, out.start, out.c, f.prec, f.shift)


def frobenius_power(f: LaurentSeries, k: int) -> LaurentSeries:
    for _ in range(k):
        f = frobenius(f)
    return f


# ---------------------------------------------------------------------------
# sigma_b
# ---------------------------------------------------------------------------


def _exponent(b, tr: Truncation, length: int) -> int:
    """Integer representative of a p-adic exponent, checked for enough digits."""
    if isinstance(b, int):
        return b
    if isinstance(b, PadicInt):
        need = tr.n + vp_factorial(length, tr.p)
        if b.v < 0:
            raise MalformedInput("exponent must be integral")
        if b.abs_prec < need:
            raise PrecisionError(f"exponent known to {b.abs_prec} digits, {need} needed")
        return b.to_int()
    raise MalformedInput(f"unsupported exponent {b!r}")


def _digits_needed(tr: Truncation, length: int) -> int:
    return tr.n + vp_factorial(length, tr.p) + 2


def a_exponent(tr: Truncation, length: int | None = None) -> PadicInt:
    """The generator a = exp(p^c) with enough digits for binomials up to ``length``."""
    length = length if length is not None else tr.N + tr.pole_cap + 8
    W = _digits_needed(tr, length)
    return PadicInt(tr.p, W, 0, a_residue(tr.p, W))


@lru_cache(maxsize=256)
def _gamma_h(p: int, n: int, b: int, length: int) -> np.ndarray:
    """h with (1+pi)^b - 1 = pi h, to ``length`` terms."""
    row = binom_row(b, length, p**n)
    return _arr(row[1: length + 1], p**n)


def gamma_action(b, f: LaurentSeries, N: int | None = None) -> LaurentSeries:
    """sigma_b(f) = f((1+pi)^b - 1) for a unit b (or any integer exponent)."""
    tr, q = f.tr, f.q
    if isinstance(b, int) and b == 1:
        return f
    if f.is_zero():
        return f
    target = tr.N if N is None else N
    prec = min(f.prec_value, target)
    prec = int(prec)
    m = f.pole
    length = prec + m + 1
    if length <= 0:
        return LaurentSeries(tr, 0, [], prec, f.shift)
    bi = _exponent(b, tr, length + 1)
    if bi % tr.p == 0:
        raise MalformedInput("sigma_b needs a unit exponent")
    h = _gamma_h(tr.p, tr.n, bi, length)
    g = np.zeros(length, dtype=np.int64)
    g[1:] = h[: length - 1]
    body = f.dense(-m, min(f.degree, prec))
    F = _horner(body, g, q, length)
    if m:
        hinv = _inv_series(h, length, q)
        F = _mul(F, _pow_series(hinv, m, q, length), q, length)
    return LaurentSeries(tr, -m, F, prec, f.shift)


def _pow_series(h: np.ndarray, k: int, q: int, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    out[0] = 1
    base = h[:length]
    while k:
        if k & 1:
            out = _mul(out, base, q, length)
        base = _mul(base, base, q, length)
        k >>= 1
    return out


def substitute(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """f(g) for g of positive pi-adic valuation (unit leading term if f has poles)."""
    tr, q = f.tr, f.q
    if g.val == INF or g.val < 1:
        raise MalformedInput("substitution needs a series of positive valuation")
    e = int(g.val)
    prec_g = g.prec_value
    target = min(f.prec_value, tr.N if (f.prec is None and g.prec is None) else INF)
    if prec_g != INF:
        target = min(target, prec_g - e + 1 + e - 1)
    target = tr.N if target == INF else int(target)
    m = f.pole
    hlen = target + m * e + 1
    h = g.dense(e, e + hlen - 1) if g.prec is None or e + hlen - 1 <= g.prec else None
    if h is None:
        raise InsufficientPrecision("substituted series known to too few terms")
    G = np.zeros(target + m * e + 1, dtype=np.int64)
    G[e:] = h[: len(G) - e]
    body = f.dense(-m, min(f.degree, target)) if len(f.c) else np.zeros(1, dtype=np.int64)
    F = _horner(body, G, q, len(G))
    if m:
        if h[0] % f.p == 0:
            raise MalformedInput("cannot invert a substituted series with non-unit leading term")
        hinv = _inv_series(h, len(G), q)
        F = _mul(F, _pow_series(hinv, m, q, len(G)), q, len(G))
    return LaurentSeries(tr, -m * e, F, target, f.shift)


# ---------------------------------------------------------------------------
# psi and the phi-decomposition
# ---------------------------------------------------------------------------


def psi_precision(p: int, n: int, prec: int, pole: int) -> int:
    """Degree up to which psi(f) is known when f is known up to ``prec``."""
    j = prec + 1
    for _ in range(n):
        j = max(0, -((p - 1 - j) // p))
    return j - pole - 1


def phi_decompose(f: LaurentSeries) -> list[LaurentSeries]:
    """[f_0, ..., f_{p-1}] with f = sum_i (1+pi)^i phi(f_i).

    Exact for Laurent polynomials: with f = pi^(-m) Q(pi),
    pi^(-m) = phi(pi^(-m)) (phi(pi)/pi)^m, and R = (phi(pi)/pi)^m Q is a
    polynomial in X = 1 + pi whose monomials X^(pk+i) sort themselves into
    X^i phi(X^k).
    """
    tr, p, q = f.tr, f.p, f.q
    m = f.pole
    top = f.degree if f.prec is None else f.prec
    if top < -m:
        comps = [LaurentSeries(tr, 0, [], f.prec, f.shift) for _ in range(p)]
        out_prec = None if f.prec is None else psi_precision(p, tr.n, f.prec, m)
        return [c.with_prec(out_prec) if out_prec is not None else c for c in comps]
    Q = f.dense(-m, top)
    ratio = _phi_pi(p, q)[1:]  # phi(pi)/pi
    R = _mul(Q, _poly_pow(ratio, m, q), q) if m else Q
    rX = _taylor_shift(R, q, -1)  # R(X - 1) in powers of X
    out_prec = None if f.prec is None else psi_precision(p, tr.n, f.prec, m)
    comps = []
    for i in range(p):
        Ri = rX[i::p]
        Rpi = _taylor_shift(Ri, q, 1)  # R_i(1 + pi) in powers of pi
        comps.append(LaurentSeries(tr, -m, Rpi, out_prec, f.shift))
    return comps


def _poly_pow(a: np.ndarray, k: int, q: int) -> np.ndarray:
    out = np.array([1], dtype=np.int64)
    for _ in range(k):
        out = _mul(out, a, q)
    return out


def phi_recompose(comps: list[LaurentSeries]) -> LaurentSeries:
    tr = comps[0].tr
    total = LaurentSeries.zero(tr)
    for i, fi in enumerate(comps):
        total = total + LaurentSeries.one_plus_pi_power(tr, i) * frobenius(fi)
    return total


def psi(f: LaurentSeries) -> LaurentSeries:
    """The left inverse of phi: the i = 0 component of the phi-decomposition."""
    out = phi_decompose(f)[0]
    if out.prec is not None and out.prec < -out.tr.pole_cap:
        raise PrecisionError("psi of a truncated series keeps no digits at this precision")
    return out


# ---------------------------------------------------------------------------
# residue against dpi/(1+pi)
# ---------------------------------------------------------------------------


def residue_log(f: LaurentSeries) -> PadicInt:
    """Coefficient of pi^(-1) in f/(1+pi): sum_{j>=1} (-1)^(j-1) a_{-j}."""
    if f.prec is not None and f.prec < -1:
        raise InsufficientPrecision("pole part not fully known")
    total = 0
    for j in range(1, f.pole + 1):
        total += f.coeff(-j) * (1 if j % 2 else -1)
    return PadicInt(f.p, f.tr.n, f.shift, total)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------


def solve_phi_minus_one(y: LaurentSeries) -> LaurentSeries:
    """x in pi A+ with (phi - 1) x = y, as x = -sum_j phi^j(y)."""
    tr = y.tr
    if y.prec is not None and y.prec < 0:
        raise InsufficientPrecision("cannot certify membership in pi A+")
    if not y.in_pi_A_plus():
        raise NotInPiAplus("solve_phi_minus_one needs an input in pi A+")
    P = int(min(y.prec_value, tr.N))
    term = y.with_prec(P) if y.prec is None or y.prec > P else y
    total = LaurentSeries(tr, 0, [], P, y.shift)
    for _ in range(10 * (tr.n + P + 2)):
        if term.is_zero():
            break
        total = total - term
        term = frobenius(term)
    else:
        raise PrecisionError("phi-iteration did not converge")
    check = frobenius(total) - total - y
    if not check.is_zero():
        raise SingularSystem("re-substitution failed for phi - 1")
    return total


def twisted_gamma(delta: Character, f: LaurentSeries, a: PadicInt | None = None) -> LaurentSeries:
    """gamma_D = delta(a) sigma_a."""
    a = a if a is not None else a_exponent(f.tr)
    return gamma_action(a, f).scale(delta.val_a.residue)


def twisted_phi(delta: Character, f: LaurentSeries) -> LaurentSeries:
    """phi_D = delta(p) phi."""
    return frobenius(f).scale(delta.val_p.residue)


def _component_operator_columns(tr: Truncation, da: int, c_int: int, lo: int, hi: int,
                                a_int: int) -> np.ndarray:
    """Columns w = pi^e (lo <= e <= hi) of w -> da (1+pi)^c sigma_a(w) - w,
    recorded on degrees lo..hi+1."""
    q = tr.q
    rows = hi + 1 - lo + 1
    length = rows + 1
    h = _gamma_h(tr.p, tr.n, a_int, length)
    E = _arr(binom_row(c_int, length, q), q)[:length]
    E = (E * da) % q
    hinv = _inv_series(h, length, q)
    cols = np.zeros((rows, hi - lo + 1), dtype=np.int64)
    for e in range(lo, hi + 1):
        span = hi + 1 - e + 1  # degrees e .. hi+1
        if e >= 0:
            he = _pow_series(h, e, q, span)
        else:
            he = _pow_series(hinv, -e, q, span)
        col = _mul(he, E, q, span)
        col[0] = (col[0] - 1) % q
        cols[e - lo: e - lo + span, e - lo] = col[:span]
    return cols


def solve_twisted_gamma(delta: Character, y: LaurentSeries) -> LaurentSeries:
    """u with psi(u) = 0 and (delta(a) sigma_a - 1) u = y."""
    return solve_twisted_gamma_components(delta, y)[0]


def solve_twisted_gamma_components(delta: Character, y: LaurentSeries
                                   ) -> tuple[LaurentSeries, list[LaurentSeries]]:
    """The solution u together with its phi-components [0, w_1, ..., w_(p-1)].

    u is assembled as sum_i (1+pi)^i phi(w_i), so psi(u) = 0 holds by
    construction and not only up to the (weak) precision of a numeric psi.

    Writing y = sum_{i>=1} (1+pi)^i phi(y_i), the operator acts on the
    i-th component as w -> delta(a) (1+pi)^{i(a-1)/p} sigma_a(w) - w.  Each
    component equation is solved over Z/p^n on a square truncated system
    whose matrix is unitriangular modulo p (the sub-diagonal entries are
    units); the omitted top unknown perturbs only the last n - 1 degrees,
    which are dropped from the reported precision.
    """
    tr, p, n, q = y.tr, y.p, y.tr.n, y.q
    comps = phi_decompose(y)
    y0 = comps[0]
    if not y0.is_zero():
        raise NotPsiZero("psi(y) is not zero")
    length_guess = tr.N + tr.pole_cap + 8
    a = a_exponent(tr, length_guess)
    a_int = a.to_int()
    da = delta.val_a.residue
    ws = [LaurentSeries(tr, 0, [], None, y.shift)]
    out_prec = None
    for i in range(1, p):
        yi = comps[i]
        Nw = int(min(yi.prec_value, tr.N))
        M = yi.pole + n
        c_int = i * ((a_int - 1) // p)
        A = _component_operator_columns(tr, da, c_int, -M, Nw, a_int)
        rhs = yi.dense(-M, min(Nw + 1, int(yi.prec_value))) if yi.prec is not None else yi.dense(-M, Nw + 1)
        if len(rhs) < A.shape[0]:
            rhs = np.concatenate([rhs, np.zeros(A.shape[0] - len(rhs), dtype=np.int64)])
        square = A[1:, :]
        try:
            w = zpn_linalg.solve(square, rhs[1:], p, n)
        except SingularSystem as exc:
            raise SingularSystem(f"component {i}: {exc}", degree=-M) from exc
        w = np.array([int(x) for x in w], dtype=np.int64)
        if int(A[0].astype(object).dot(w.astype(object)) - rhs[0]) % q:
            raise SingularSystem(f"component {i}: pole bound violated", degree=-M)
        wprec = Nw - n + 1
        if yi.prec is not None:
            wprec = min(wprec, yi.prec)
        ws.append(LaurentSeries(tr, -M, w, wprec, y.shift, check_pole=False))
        out_prec = wprec if out_prec is None else min(out_prec, wprec)
    u = phi_recompose(ws)
    if out_prec is not None and u.prec is not None and u.prec > out_prec:
        u = u.with_prec(out_prec)
    check = twisted_gamma(delta, u, a) - u - y
    if u.prec is not None and not check.is_zero():
        raise SingularSystem("re-substitution failed for the twisted gamma solver")
    return u, ws


# ---------------------------------------------------------------------------
# twisted modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwistedModuleElement:
    delta: Character
    coeff: LaurentSeries


def twisted_apply(op: str, x: TwistedModuleElement) -> TwistedModuleElement:
    if op == "phi":
        return TwistedModuleElement(x.delta, twisted_phi(x.delta, x.coeff))
    if op == "gamma":
        return TwistedModuleElement(x.delta, twisted_gamma(x.delta, x.coeff))
    raise MalformedInput(f"unknown operator {op!r}")


def c_exponent(p: int) -> int:
    return c_of(p)
