"""Finite-level model of the perfection of A_Qp.

A :class:`PerfSeries` at level k is a Laurent series in t = pi_k, where
(1 + pi_k)^(p^k) = 1 + pi.  Frobenius sends pi_k to pi_(k-1) = (1+pi_k)^p - 1,
so at a fixed level it is the usual substitution, while phi^(-1) simply
relabels the variable one level up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import LevelCapExceeded, MalformedInput
from .padic_core import PadicInt, binom_row, vp
from .series_rings import (
    LaurentSeries,
    Truncation,
    a_exponent,
    frobenius,
    gamma_action,
    residue_log,
)

DEFAULT_LEVEL_CAP = 3


@dataclass(frozen=True)
class PerfSeries:
    level: int
    body: LaurentSeries
    level_cap: int = DEFAULT_LEVEL_CAP

    def __post_init__(self):
        if self.level < 0:
            raise MalformedInput("level must be nonnegative")
        if self.level > self.level_cap:
            raise LevelCapExceeded(f"level {self.level} exceeds cap {self.level_cap}")

    @property
    def tr(self) -> Truncation:
        return self.body.tr

    @classmethod
    def from_series(cls, f: LaurentSeries, level: int = 0, level_cap: int = DEFAULT_LEVEL_CAP) -> PerfSeries:
        return cls(level, f, level_cap)

    def _new(self, level: int, body: LaurentSeries) -> PerfSeries:
        return PerfSeries(level, body, self.level_cap)

    def at_level(self, k: int) -> PerfSeries:
        z = self
        if k < self.level:
            raise MalformedInput("use normalize() to lower the level")
        while z.level < k:
            z = raise_level(z)
        return z

    def _common(self, other: PerfSeries) -> tuple[PerfSeries, PerfSeries]:
        k = max(self.level, other.level)
        return self.at_level(k), other.at_level(k)

    def __add__(self, other: PerfSeries) -> PerfSeries:
        a, b = self._common(other)
        return a._new(a.level, a.body + b.body)

    def __sub__(self, other: PerfSeries) -> PerfSeries:
        a, b = self._common(other)
        return a._new(a.level, a.body - b.body)

    def __neg__(self) -> PerfSeries:
        return self._new(self.level, -self.body)

    def __mul__(self, other) -> PerfSeries:
        if isinstance(other, PerfSeries):
            a, b = self._common(other)
            return a._new(a.level, a.body * b.body)
        return self._new(self.level, self.body * other)

    def __pow__(self, k: int) -> PerfSeries:
        return self._new(self.level, self.body**k)

    def eq_at(self, other: PerfSeries, N: int | None = None) -> bool:
        a, b = self._common(other)
        return a.body.eq_at(b.body, N)

    def to_json(self) -> dict:
        return {"level": self.level, "body": self.body.to_json()}

    @classmethod
    def from_json(cls, d: dict, tr: Truncation | None = None,
                  level_cap: int = DEFAULT_LEVEL_CAP) -> PerfSeries:
        try:
            return cls(int(d["level"]), LaurentSeries.from_json(d["body"], tr), level_cap)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad PerfSeries JSON: {exc}") from exc


def raise_level(z: PerfSeries) -> PerfSeries:
    """The same element written in pi_(k+1): t -> (1+t)^p - 1."""
    return z._new(z.level + 1, frobenius(z.body))


def normalize(z: PerfSeries) -> PerfSeries:
    """Lower the level while the body is a Frobenius image."""
    from .series_rings import phi_decompose

    while z.level > 0:
        comps = phi_decompose(z.body)
        if any(not c.is_zero() for c in comps[1:]):
            break
        g = comps[0]
        if z.body.prec is not None:
            if g.prec is None or g.prec < z.body.prec:
                break
        z = z._new(z.level - 1, g)
    return z


def frobenius_perf(z: PerfSeries, e: int = 1) -> PerfSeries:
    """phi^e(z): substitution at fixed level for e > 0, relabelling upward for e < 0."""
    if e >= 0:
        body = z.body
        for _ in range(e):
            body = frobenius(body)
        return z._new(z.level, body)
    return z._new(z.level - e, z.body)


def sigma_perf(b, z: PerfSeries) -> PerfSeries:
    """sigma_b acts on every pi_k by (1+pi_k)^b - 1."""
    return z._new(z.level, gamma_action(b, z.body))


def _split_rational(b, p: int) -> tuple[int, Fraction]:
    """b = p^(-k) b' with b' in Z_p and k >= 0 minimal."""
    if isinstance(b, tuple):
        k, bp = b
        return int(k), Fraction(bp)
    b = Fraction(b)
    if b == 0:
        return 0, Fraction(0)
    v = vp(b.numerator, p) - vp(b.denominator, p)
    k = max(0, -v)
    return k, b * p**k


def _zp_representative(x: Fraction, p: int, digits: int) -> int:
    mod = p**digits
    if x.denominator % p == 0:
        raise MalformedInput("expected an element of Z_p")
    return x.numerator * pow(x.denominator, -1, mod) % mod


def eps_power(b, tr: Truncation, level_cap: int = DEFAULT_LEVEL_CAP) -> PerfSeries:
    """[eps^b] = (1 + pi_k)^(b') for b = p^(-k) b'."""
    k, bp = _split_rational(b, tr.p)
    if k > level_cap:
        raise LevelCapExceeded(f"[eps^b] needs level {k} > cap {level_cap}")
    if bp.denominator == 1 and bp >= 0:
        body = LaurentSeries.one_plus_pi_power(tr, int(bp))
    else:
        from .padic_core import vp_factorial

        digits = tr.n + vp_factorial(tr.N + 1, tr.p) + 2
        rep = _zp_representative(bp, tr.p, digits)
        body = LaurentSeries(tr, 0, binom_row(rep, tr.N, tr.q), prec=tr.N)
    return PerfSeries(k, body, level_cap)


def extended_residue(z: PerfSeries) -> PadicInt:
    """res_0 extended by phi-invariance: phi^k(z) is the body read at level 0."""
    return residue_log(z.body)


def mirabolic_act(k: int, a, b, z: PerfSeries) -> PerfSeries:
    """(p^k a, b; 0, 1) acting as z -> [eps^b] phi^k(sigma_a(z))."""
    w = sigma_perf(a, z) if not (isinstance(a, int) and a == 1) else z
    w = frobenius_perf(w, k)
    if b == 0:
        return w
    return eps_power(b, z.tr, z.level_cap) * w


def generator_a(tr: Truncation) -> PadicInt:
    return a_exponent(tr)
