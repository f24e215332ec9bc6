"""Exact arithmetic in Z/p^n with precision bookkeeping, plus the classical
p-adic special functions (Teichmuller lift, Iwasawa logarithm, exponential)
and continuous unitary characters of Q_p^*.

Conventions
-----------
* ``c(p) = 1`` for odd p and ``c(2) = 2``.
* ``a = exp(p^c(p))`` is the fixed topological generator of ``1 + p^c Z_p``.
* ``tau = p^(-c) log`` where ``log`` is the Iwasawa logarithm (``log p = 0``).
* A character is stored as ``(delta(p), i, delta(a))`` and evaluated by
  ``delta(p^k u) = delta(p)^k * omega(u)^i * delta(a)^tau(u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    MalformedInput,
    NotAUnit,
    OutOfConvergence,
    PrecisionError,
)


def vp(x: int, p: int) -> int | float:
    """p-adic valuation of an integer (``inf`` for 0)."""
    if x == 0:
        return math.inf
    x = abs(x)
    # powers[i] = p^(2^i); the last one does not divide x, so v < 2^(len - 1)
    powers = [p]
    while x % powers[-1] == 0:
        powers.append(powers[-1] ** 2)
    v = 0
    for i in range(len(powers) - 2, -1, -1):
        if x % powers[i] == 0:
            x //= powers[i]
            v += 1 << i
    return v


def vp_factorial(m: int, p: int) -> int:
    """Legendre's formula for v_p(m!)."""
    v, q = 0, p
    while q <= m:
        v += m // q
        q *= p
    return v


def c_of(p: int) -> int:
    return 2 if p == 2 else 1


def degree_F(p: int) -> int:
    """[F:Q_p] for F = Q_p(mu_{p^c(p)})."""
    return 2 if p == 2 else p - 1


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


# ---------------------------------------------------------------------------
# PadicInt
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadicInt:
    """The element p^v * residue, with residue known modulo p^n.

    The absolute precision is ``v + n``: the element is known modulo
    p^(v+n).  Arithmetic never claims more digits than its inputs carry.
    """

    p: int
    n: int
    v: int
    residue: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise MalformedInput(f"{self.p} is not a prime")
        if self.n < 0:
            raise PrecisionError("negative precision")
        object.__setattr__(self, "residue", self.residue % self.p**self.n)

    # -- construction -------------------------------------------------------
    @classmethod
    def from_int(cls, p: int, n: int, x: int) -> PadicInt:
        return cls(p, n, 0, x)

    @classmethod
    def from_fraction(cls, p: int, n: int, x: Fraction | int) -> PadicInt:
        """Element of Z_(p)[1/p]; ``n`` digits after the leading offset."""
        x = Fraction(x)
        if x == 0:
            return cls(p, n, 0, 0)
        v = vp(x.numerator, p) - vp(x.denominator, p)
        num = x.numerator // p ** max(v, 0) if v > 0 else x.numerator
        den = x.denominator // p ** max(-v, 0) if v < 0 else x.denominator
        q = p**n
        return cls(p, n, v, num * pow(den, -1, q))

    @property
    def modulus(self) -> int:
        return self.p**self.n

    @property
    def abs_prec(self) -> int:
        return self.v + self.n

    def normalized(self) -> PadicInt:
        """Move factors of p from the residue into the offset."""
        if self.residue == 0:
            return self
        k = vp(self.residue, self.p)
        return PadicInt(self.p, self.n - k, self.v + k, self.residue // self.p**k)

    def valuation(self) -> int | float:
        """Valuation, ``inf`` if zero at the known precision."""
        if self.residue == 0:
            return math.inf
        return self.v + vp(self.residue, self.p)

    def is_zero(self) -> bool:
        return self.residue == 0

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def to_int(self) -> int:
        """Representative in [0, p^(v+n)); requires ``v >= 0``."""
        if self.v < 0:
            raise MalformedInput("element has a denominator")
        return (self.residue * self.p**self.v) % self.p**self.abs_prec

    def to_fraction(self) -> Fraction:
        return Fraction(self.residue) * Fraction(self.p) ** self.v

    def with_precision(self, n: int) -> PadicInt:
        if n > self.n:
            raise PrecisionError(f"cannot raise precision {self.n} -> {n}")
        return PadicInt(self.p, n, self.v, self.residue)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> PadicInt:
        if isinstance(other, PadicInt):
            if other.p != self.p:
                raise MalformedInput("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicInt.from_fraction(self.p, self.abs_prec + 64, other)
        return NotImplemented

    def __add__(self, other) -> PadicInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        v = min(self.v, other.v)
        prec = min(self.abs_prec, other.abs_prec) - v
        q = self.p ** max(prec, 0)
        r = self.residue * self.p ** (self.v - v) + other.residue * self.p ** (other.v - v)
        return PadicInt(self.p, max(prec, 0), v, r % q if q else 0)

    __radd__ = __add__

    def __neg__(self) -> PadicInt:
        return PadicInt(self.p, self.n, self.v, -self.residue)

    def __sub__(self, other) -> PadicInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> PadicInt:
        return (-self) + other

    def __mul__(self, other) -> PadicInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.normalized(), other.normalized()
        n = min(a.n, b.n)
        return PadicInt(self.p, n, a.v + b.v, a.residue * b.residue)

    __rmul__ = __mul__

    def inverse(self) -> PadicInt:
        a = self.normalized()
        if a.residue == 0 or a.residue % self.p == 0:
            raise NotAUnit("element is zero at the known precision")
        return PadicInt(self.p, a.n, -a.v, pow(a.residue, -1, a.modulus))

    def __truediv__(self, other) -> PadicInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, k: int) -> PadicInt:
        if k < 0:
            return self.inverse() ** (-k)
        a = self.normalized()
        return PadicInt(self.p, a.n, a.v * k, pow(a.residue, k, a.modulus))

    def eq_at(self, other, m: int) -> bool:
        """Equality modulo p^m (absolute)."""
        other = self._coerce(other)
        if m > min(self.abs_prec, other.abs_prec):
            raise PrecisionError(f"comparison at p^{m} exceeds known precision")
        d = (self - other).to_fraction()
        return d == 0 or vp(d.numerator, self.p) - vp(d.denominator, self.p) >= m

    def __repr__(self) -> str:
        off = f"p^{self.v}*" if self.v else ""
        return f"PadicInt({off}{self.residue} mod {self.p}^{self.n})"

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "v": self.v, "residue": str(self.residue)}

    @classmethod
    def from_json(cls, d: dict) -> PadicInt:
        try:
            return cls(int(d["p"]), int(d["n"]), int(d.get("v", 0)), int(d["residue"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad PadicInt JSON: {exc}") from exc


def _as_padic(x, p: int, n: int) -> PadicInt:
    if isinstance(x, PadicInt):
        return x
    return PadicInt.from_fraction(p, n, x)


# ---------------------------------------------------------------------------
# binomials
# ---------------------------------------------------------------------------


def binom_int(x: int, m: int) -> int:
    """C(x, m) for an arbitrary integer x (negative allowed)."""
    num = 1
    for j in range(m):
        num *= x - j
    return num // math.factorial(m)


def binom_row(x: int, kmax: int, modulus: int) -> list[int]:
    """[C(x, 0), ..., C(x, kmax)] reduced mod ``modulus``.

    Exact big-integer recursion; correct for p-adic x as long as the integer
    representative agrees with x to v_p(kmax!) extra digits.
    """
    out = [1 % modulus]
    c = 1
    for k in range(1, kmax + 1):
        c = c * (x - k + 1) // k
        out.append(c % modulus)
    return out


def binom(x: PadicInt | int, m: int, p: int | None = None, n: int | None = None) -> PadicInt:
    """C(x, m) with the documented loss of v_p(m!) digits."""
    if m < 0:
        raise MalformedInput("negative binomial index")
    if not isinstance(x, PadicInt):
        x = PadicInt.from_int(p, n, x)
    if x.v < 0:
        raise MalformedInput("binom needs an integral argument")
    loss = vp_factorial(m, x.p)
    out_n = x.abs_prec - loss
    if m == 0:
        return PadicInt(x.p, x.abs_prec, 0, 1)
    if out_n <= 0:
        raise PrecisionError(f"binom loses all {x.abs_prec} digits at m={m}")
    return PadicInt(x.p, out_n, 0, binom_int(x.to_int(), m))


# ---------------------------------------------------------------------------
# Teichmuller, log, exp, tau
# ---------------------------------------------------------------------------


def teichmuller(u: PadicInt | int, p: int | None = None, n: int | None = None) -> PadicInt:
    """omega(u): the root of unity congruent to u (mod 4 when p = 2)."""
    u = _as_padic(u, p, n)
    p = u.p
    if u.v != 0 or u.residue % p == 0:
        raise NotAUnit("teichmuller needs a unit")
    q = u.modulus
    if p == 2:
        return PadicInt(2, u.n, 0, 1 if u.residue % 4 == 1 else -1)
    x = u.residue
    while True:
        y = pow(x, p, q)
        if y == x:
            return PadicInt(p, u.n, 0, x)
        x = y


def _log1p_int(t: int, p: int, prec: int) -> int:
    """log(1 + t) mod p^prec for an integer t with v_p(t) >= 1 (>= 2 if p = 2)."""
    if t % p**prec == 0:
        return 0
    e = vp(t, p)
    q = p**prec
    total, k, tk = 0, 1, t
    while True:
        if k * e - math.log(k, p) >= prec + 1 and k > 1:
            break
        vk = vp(k, p)
        unit = k // p**vk
        term = (tk // p**vk) * pow(unit, -1, q)
        total += term if k % 2 else -term
        k += 1
        tk *= t
    return total % q


@dataclass(frozen=True)
class QpStarElement:
    """p^k * u with u a unit."""

    k: int
    u: PadicInt

    def __post_init__(self):
        if self.u.v != 0 or self.u.residue % self.u.p == 0:
            raise NotAUnit("QpStarElement needs a unit part")

    @property
    def p(self) -> int:
        return self.u.p

    @classmethod
    def from_fraction(cls, p: int, n: int, x: Fraction | int) -> QpStarElement:
        x = Fraction(x)
        if x == 0:
            raise NotAUnit("0 is not in Q_p^*")
        k = vp(x.numerator, p) - vp(x.denominator, p)
        u = x / Fraction(p) ** k
        return cls(k, PadicInt.from_fraction(p, n, u))

    def __mul__(self, other: QpStarElement) -> QpStarElement:
        return QpStarElement(self.k + other.k, self.u * other.u)

    def to_json(self) -> dict:
        return {"k": self.k, "u": self.u.to_json()}


def _qpstar(x, p: int | None, n: int | None) -> QpStarElement:
    if isinstance(x, QpStarElement):
        return x
    return QpStarElement.from_fraction(p, n, x)


def iwasawa_log(x: QpStarElement | int | Fraction, p: int | None = None, n: int | None = None) -> PadicInt:
    """Iwasawa logarithm: log(p) = 0 and log(omega(u)) = 0."""
    x = _qpstar(x, p, n)
    u = x.u
    w = teichmuller(u)
    one_unit = (u * w.inverse()).residue
    t = one_unit - 1
    if x.p == 2 and t % 4 and u.n >= 2:
        raise PrecisionError("unit part not in 1 + 4Z_2")
    return PadicInt(x.p, u.n, 0, _log1p_int(t, x.p, u.n))


def padic_exp(t: PadicInt | int, p: int | None = None, n: int | None = None) -> PadicInt:
    """exp(t) on p^c(p) Z_p."""
    t = _as_padic(t, p, n)
    p = t.p
    c = c_of(p)
    if t.valuation() < c:
        raise OutOfConvergence(f"exp needs v_p(t) >= {c}")
    if t.residue == 0:
        return PadicInt(p, t.abs_prec, 0, 1)
    prec = t.abs_prec
    q = p**prec
    ti = t.to_int()
    e = vp(ti, p)
    total, k, tk = 1, 1, ti
    while k * e - (k - 1) / (p - 1) < prec + 1:
        vf = vp_factorial(k, p)
        unit = math.factorial(k) // p**vf
        total += (tk // p**vf) * pow(unit, -1, q)
        k += 1
        tk *= ti
    return PadicInt(p, prec, 0, total % q)


@lru_cache(maxsize=None)
def a_residue(p: int, prec: int) -> int:
    """exp(p^c(p)) mod p^prec as an integer."""
    return padic_exp(PadicInt(p, prec, 0, p ** c_of(p))).residue


def generator_a(p: int, n: int) -> PadicInt:
    return PadicInt(p, n, 0, a_residue(p, n))


def tau(x: QpStarElement | int | Fraction, p: int | None = None, n: int | None = None) -> PadicInt:
    """tau = p^(-c) log; loses c(p) digits of the input unit."""
    x = _qpstar(x, p, n)
    c = c_of(x.p)
    lg = iwasawa_log(x)
    out_n = lg.n - c
    if out_n <= 0:
        raise PrecisionError("tau needs more than c(p) digits")
    if lg.residue % x.p**c:
        raise PrecisionError("log not divisible by p^c at this precision")
    return PadicInt(x.p, out_n, 0, lg.residue // x.p**c)


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)^* (returns -1 for p = 2, generating mu_2)."""
    if p == 2:
        return -1
    phi = p - 1
    fac = {d for d in range(2, phi + 1) if phi % d == 0 and _is_prime(d)}
    for g in range(2, p):
        if all(pow(g, phi // d, p) != 1 for d in fac):
            return g
    return 1


# ---------------------------------------------------------------------------
# characters of Q_p^*
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """A unitary character delta of Q_p^* known modulo p^n.

    ``teich_i`` is read modulo the order of the Teichmuller group (p - 1,
    or 2 for p = 2, where it is the sign component ``delta(-1) = (-1)^i``).
    """

    p: int
    val_p: PadicInt
    teich_i: int
    val_a: PadicInt

    def __post_init__(self):
        if not self.val_p.is_unit():
            raise NotAUnit("delta(p) must be a unit")
        if self.val_a.v != 0 or (self.val_a.residue - 1) % self.p:
            raise MalformedInput("delta(a) must be congruent to 1 mod p")
        object.__setattr__(self, "teich_i", self.teich_i % self.teich_order)

    @property
    def teich_order(self) -> int:
        return 2 if self.p == 2 else self.p - 1

    @property
    def n(self) -> int:
        return min(self.val_p.n, self.val_a.n)

    @classmethod
    def make(cls, p: int, n: int, val_p: int, teich_i: int, val_a: int) -> Character:
        return cls(p, PadicInt(p, n, 0, val_p), teich_i, PadicInt(p, n, 0, val_a))

    @classmethod
    def trivial(cls, p: int, n: int) -> Character:
        return cls.make(p, n, 1, 0, 1)

    @classmethod
    def chi(cls, p: int, n: int) -> Character:
        """x |x|: value 1 at p and the identity on units."""
        return cls.make(p, n, 1, 1, a_residue(p, n))

    @classmethod
    def unramified(cls, p: int, n: int, value: int) -> Character:
        return cls.make(p, n, value, 0, 1)

    def __mul__(self, other: Character) -> Character:
        return Character(self.p, self.val_p * other.val_p, self.teich_i + other.teich_i,
                         self.val_a * other.val_a)

    def inverse(self) -> Character:
        return Character(self.p, self.val_p.inverse(), -self.teich_i, self.val_a.inverse())

    def __truediv__(self, other: Character) -> Character:
        return self * other.inverse()

    def __pow__(self, k: int) -> Character:
        if k < 0:
            return self.inverse() ** (-k)
        out = Character.trivial(self.p, self.n)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x) -> PadicInt:
        return char_eval(self, x)

    def generators(self) -> list[QpStarElement]:
        """p, a and a generator of the Teichmuller group."""
        n = self.n + 4
        g = teichmuller(PadicInt(self.p, n, 0, primitive_root(self.p)))
        return [QpStarElement(1, PadicInt(self.p, n, 0, 1)),
                QpStarElement(0, generator_a(self.p, n)),
                QpStarElement(0, g)]

    def eq_at(self, other: Character, m: int | None = None) -> bool:
        m = min(self.n, other.n) if m is None else m
        return all(char_eval(self, g).eq_at(char_eval(other, g), m)
                   for g in self.generators())

    def is_trivial(self, m: int | None = None) -> bool:
        return self.eq_at(Character.trivial(self.p, self.n), m)

    def to_json(self) -> dict:
        return {"p": self.p, "val_p": str(self.val_p.residue), "teich_i": self.teich_i,
                "val_a": str(self.val_a.residue), "n": self.n}

    @classmethod
    def from_json(cls, d: dict, n: int | None = None) -> Character:
        try:
            if d.get("name") in ("chi", "1", "trivial"):
                p, nn = int(d["p"]), int(d.get("n", n or 4))
                return cls.chi(p, nn) if d["name"] == "chi" else cls.trivial(p, nn)
            p = int(d["p"])
            nn = int(d.get("n", n or 4))
            return cls.make(p, nn, int(d["val_p"]), int(d["teich_i"]), int(d["val_a"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad Character JSON: {exc}") from exc


def _principal_power(base: PadicInt, t: PadicInt) -> PadicInt:
    """base^t for base = 1 mod p and a p-adic exponent t; tracks lost digits."""
    p = base.p
    z = base - 1
    vz = z.valuation()
    if vz == math.inf:
        return PadicInt(p, base.n, 0, 1)
    gain = vz if (p != 2 or vz >= 2) else 1
    out_n = min(base.n, t.abs_prec + gain)
    if out_n <= 0:
        raise PrecisionError("exponent known to too few digits")
    return PadicInt(p, out_n, 0, pow(base.residue, t.to_int(), p**out_n))


def char_eval(delta: Character, x) -> PadicInt:
    """delta(p^k u) = delta(p)^k omega(u)^i delta(a)^tau(u)."""
    p = delta.p
    x = _qpstar(x, p, delta.n + c_of(p) + 2)
    n = min(delta.n, x.u.n)
    u = x.u
    part_p = delta.val_p**x.k
    part_w = teichmuller(u) ** delta.teich_i
    if delta.val_a.residue == 1 and delta.val_a.n >= n:
        part_a = PadicInt(p, n, 0, 1)
    else:
        part_a = _principal_power(delta.val_a, tau(x))
    out = part_p * part_w * part_a
    return out.with_precision(min(out.n, n))


# ---------------------------------------------------------------------------
# Hom(Q_p^*, Z_p)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomQpStar:
    """c_vp * v_p + c_tau * tau."""

    c_vp: PadicInt
    c_tau: PadicInt

    @classmethod
    def make(cls, p: int, n: int, c_vp: int, c_tau: int) -> HomQpStar:
        return cls(PadicInt(p, n, 0, c_vp), PadicInt(p, n, 0, c_tau))

    @property
    def p(self) -> int:
        return self.c_vp.p

    @property
    def n(self) -> int:
        return min(self.c_vp.n, self.c_tau.n)

    def __call__(self, x) -> PadicInt:
        x = _qpstar(x, self.p, self.n + c_of(self.p) + 2)
        t = tau(x)
        return (self.c_vp * x.k + self.c_tau * t).with_precision(self.n)

    def __add__(self, other: HomQpStar) -> HomQpStar:
        return HomQpStar(self.c_vp + other.c_vp, self.c_tau + other.c_tau)

    def scale(self, s) -> HomQpStar:
        return HomQpStar(self.c_vp * s, self.c_tau * s)

    def as_pair(self) -> tuple[int, int]:
        return (self.c_vp.residue, self.c_tau.residue)

    def signed_pair(self) -> tuple[int, int]:
        """Representatives in (-q/2, q/2] for display."""
        q = self.c_vp.modulus
        return tuple(r - q if r > q // 2 else r for r in self.as_pair())

    def to_json(self) -> dict:
        a, b = self.signed_pair()
        return {"c_vp": a, "c_tau": b}

    @classmethod
    def from_json(cls, d: dict, p: int, n: int) -> HomQpStar:
        try:
            return cls.make(p, n, int(d["c_vp"]), int(d["c_tau"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad HomQpStar JSON: {exc}") from exc
