"""Measures, Mahler expansions, the Amice transform and the residue transform.

A measure on Z_p is stored through its Mahler moments c_j = int C(x, j) mu;
the Amice transform is then sum c_j pi^j.  The residue transform of a
Laurent series f is the function

    phi_f(x) = res_0((1+pi)^(-x) f dpi/(1+pi)) = sum_j C(-x-1, j) a_(-j-1),

which only sees the pole part of f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InsufficientPrecision, LevelCapExceeded, MalformedInput
from .padic_core import PadicInt, binom_int, vp
from .perfectoid_ring import PerfSeries, eps_power, extended_residue, raise_level
from .series_rings import (
    LaurentSeries,
    Truncation,
    frobenius_power,
    gamma_action,
)


# ---------------------------------------------------------------------------
# locally constant functions on Z_p
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LCFunctionZp:
    """A function on Z_p constant modulo p^m, values in Z/p^n."""

    p: int
    n: int
    m: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.p**self.m:
            raise MalformedInput("table length must be p^m")
        q = self.p**self.n
        object.__setattr__(self, "table", tuple(int(v) % q for v in self.table))

    @property
    def q(self) -> int:
        return self.p**self.n

    @classmethod
    def from_callable(cls, p: int, n: int, m: int, fn) -> LCFunctionZp:
        return cls(p, n, m, tuple(fn(x) for x in range(p**m)))

    @classmethod
    def constant(cls, p: int, n: int, value: int = 1) -> LCFunctionZp:
        return cls(p, n, 0, (value,))

    @classmethod
    def indicator_pk(cls, p: int, n: int, k: int) -> LCFunctionZp:
        """1 on p^k Z_p."""
        return cls.from_callable(p, n, k, lambda x: 1 if x == 0 else 0)

    @classmethod
    def indicator_units(cls, p: int, n: int) -> LCFunctionZp:
        return cls.from_callable(p, n, 1, lambda x: 1 if x % p else 0)

    def __call__(self, x) -> int:
        return self.table[_residue(x, self.p, self.m)]

    def refine(self, m: int) -> LCFunctionZp:
        if m < self.m:
            raise MalformedInput("can only refine to a finer modulus")
        M = self.p**self.m
        return LCFunctionZp(self.p, self.n, m, tuple(self.table[x % M] for x in range(self.p**m)))

    def coarsen(self) -> LCFunctionZp:
        """Smallest modulus on which the function is still well defined."""
        f = self
        while f.m > 0:
            M = f.p ** (f.m - 1)
            t = f.table
            if all(t[x] == t[x % M] for x in range(len(t))):
                f = LCFunctionZp(f.p, f.n, f.m - 1, t[:M])
            else:
                break
        return f

    def _binary(self, other: LCFunctionZp, op) -> LCFunctionZp:
        m = max(self.m, other.m)
        a, b = self.refine(m), other.refine(m)
        return LCFunctionZp(self.p, self.n, m, tuple(op(x, y) for x, y in zip(a.table, b.table)))

    def __add__(self, other: LCFunctionZp) -> LCFunctionZp:
        return self._binary(other, lambda x, y: x + y)

    def __sub__(self, other: LCFunctionZp) -> LCFunctionZp:
        return self._binary(other, lambda x, y: x - y)

    def scale(self, s: int) -> LCFunctionZp:
        return LCFunctionZp(self.p, self.n, self.m, tuple(s * v for v in self.table))

    def eq(self, other: LCFunctionZp) -> bool:
        m = max(self.m, other.m)
        return self.refine(m).table == other.refine(m).table

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "m": self.m,
                "table": {str(x): str(v) for x, v in enumerate(self.table)}}

    @classmethod
    def from_json(cls, d: dict) -> LCFunctionZp:
        try:
            p, n, m = int(d["p"]), int(d["n"]), int(d["m"])
            raw = d["table"]
            if isinstance(raw, dict):
                table = [int(raw[str(x)]) for x in range(p**m)]
            else:
                table = [int(v) for v in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad LCFunctionZp JSON: {exc}") from exc
        return cls(p, n, m, tuple(table))


def _residue(x, p: int, m: int) -> int:
    mod = p**m
    if isinstance(x, PadicInt):
        if x.v < 0:
            raise MalformedInput("point outside Z_p")
        if x.abs_prec < m:
            raise InsufficientPrecision("point known to too few digits")
        return x.to_int() % mod
    if isinstance(x, Fraction):
        if x.denominator % p == 0:
            raise MalformedInput("point outside Z_p")
        return x.numerator * pow(x.denominator, -1, mod) % mod if mod > 1 else 0
    return int(x) % mod


def mahler_degree_bound(p: int, n: int, m: int) -> int:
    """Mahler coefficients of a function constant mod p^m vanish mod p^n from this index on."""
    return n * p**m


def mahler_expand(f: LCFunctionZp, length: int | None = None) -> list[int]:
    """a_j = (Delta^j f)(0) for j < length (default: the vanishing bound)."""
    L = mahler_degree_bound(f.p, f.n, f.m) if length is None else length
    q = f.q
    vals = [f(x) for x in range(L)]
    out = []
    row = vals
    for _ in range(L):
        out.append(row[0] % q)
        row = [(row[i + 1] - row[i]) % q for i in range(len(row) - 1)]
    return out


def mahler_evaluate(coeffs: list[int], x: int, q: int) -> int:
    total, c = 0, 1
    for j, a in enumerate(coeffs):
        total += a * c
        c = c * (x - j) // (j + 1)
    return total % q


# ---------------------------------------------------------------------------
# measures and the Amice transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Measure:
    """Mahler moments c_j = int C(x, j) mu for j <= M."""

    p: int
    n: int
    moments: tuple[int, ...]

    def __post_init__(self):
        q = self.p**self.n
        object.__setattr__(self, "moments", tuple(int(c) % q for c in self.moments))

    @property
    def M(self) -> int:
        return len(self.moments) - 1

    @classmethod
    def dirac(cls, p: int, n: int, b: int, M: int) -> Measure:
        return cls(p, n, tuple(binom_int(b, j) for j in range(M + 1)))

    def __add__(self, other: Measure) -> Measure:
        L = min(len(self.moments), len(other.moments))
        return Measure(self.p, self.n, tuple(x + y for x, y in zip(self.moments[:L], other.moments[:L])))

    def integrate_mahler(self, coeffs: list[int]) -> int:
        """int (sum a_j C(x, j)) mu for a Mahler expansion of degree <= M."""
        if len(coeffs) > len(self.moments) and any(coeffs[len(self.moments):]):
            raise InsufficientPrecision("Mahler degree exceeds known moments")
        return sum(a * c for a, c in zip(coeffs, self.moments)) % self.p**self.n

    def act(self, k: int, a: int, b: int) -> Measure:
        """Push forward by x -> p^k a x + b: moments of C(p^k a x + b, j)."""
        alpha = self.p**k * a
        q = self.p**self.n
        out = []
        for j in range(self.M + 1):
            vals = [binom_int(alpha * x + b, j) for x in range(j + 1)]
            coeffs = []
            row = vals
            for _ in range(j + 1):
                coeffs.append(row[0])
                row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
            out.append(sum(e * c for e, c in zip(coeffs, self.moments)) % q)
        return Measure(self.p, self.n, tuple(out))

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "moments": [str(c) for c in self.moments]}

    @classmethod
    def from_json(cls, d: dict) -> Measure:
        try:
            return cls(int(d["p"]), int(d["n"]), tuple(int(c) for c in d["moments"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad Measure JSON: {exc}") from exc


def amice(mu: Measure, tr: Truncation | None = None) -> LaurentSeries:
    """A_mu = sum_j c_j pi^j, known up to degree M."""
    tr = tr or Truncation(mu.p, mu.n, mu.M)
    return LaurentSeries(tr, 0, list(mu.moments), prec=mu.M)


def inverse_amice(f: LaurentSeries) -> Measure:
    if not f.in_A_plus():
        raise MalformedInput("the Amice transform lands in A+")
    M = int(f.prec_value) if f.prec is not None else max(f.degree, 0)
    return Measure(f.p, f.tr.n, tuple(f.coeff(j) for j in range(M + 1)))


def act_series(k: int, a, b: int, f: LaurentSeries) -> LaurentSeries:
    """(p^k a, b; 0, 1) on O_E: f -> (1+pi)^b phi^k(sigma_a(f))."""
    g = gamma_action(a, f) if not (isinstance(a, int) and a == 1) else f
    g = frobenius_power(g, k)
    if b:
        g = LaurentSeries.one_plus_pi_power(f.tr, b) * g
    return g


@dataclass(frozen=True)
class MeasureQp:
    """A measure on p^(-k) Z_p, stored by the moments int C(p^k x, j) mu."""

    level: int
    body: Measure

    def to_json(self) -> dict:
        return {"level": self.level, "body": self.body.to_json()}


def fourier_qp(mu: MeasureQp, tr: Truncation | None = None, level_cap: int = 3) -> PerfSeries:
    """int [eps^x] mu = sum_j c_j pi_k^j at level k."""
    if mu.level > level_cap:
        raise LevelCapExceeded(f"level {mu.level} exceeds cap {level_cap}")
    return PerfSeries(mu.level, amice(mu.body, tr), level_cap)


def dirac_qp(p: int, n: int, x: Fraction, M: int) -> MeasureQp:
    x = Fraction(x)
    v = vp(x.numerator, p) - vp(x.denominator, p) if x else 0
    k = max(0, -v)
    y = x * p**k
    digits = n + M.bit_length() * 2 + 8
    rep = y.numerator * pow(y.denominator, -1, p**digits) % p**digits
    return MeasureQp(k, Measure(p, n, tuple(binom_int(rep, j) for j in range(M + 1))))


# ---------------------------------------------------------------------------
# the residue transform
# ---------------------------------------------------------------------------


def _integral_rep(x, p: int, digits: int) -> int:
    if isinstance(x, PadicInt):
        if x.v < 0:
            raise MalformedInput("phi_f is defined on Z_p")
        if x.abs_prec < digits:
            raise InsufficientPrecision(f"point known to {x.abs_prec} digits, {digits} needed")
        return x.to_int()
    return _residue(x, p, digits)


def _point_digits(p: int, n: int, pole: int) -> int:
    """Digits of x that determine C(-x-1, j) mod p^n for all j < pole."""
    if pole <= 1:
        return 0
    return n + int(math.floor(math.log(pole - 1, p) + 1e-9))


def phi_f(f: LaurentSeries, x) -> PadicInt:
    """phi_f(x) = sum_{j < m} C(-x-1, j) a_(-j-1)."""
    p, n, q = f.p, f.tr.n, f.q
    m = f.pole
    if f.prec is not None and f.prec < -1:
        raise InsufficientPrecision("pole part of f not fully known")
    xi = _integral_rep(x, p, max(_point_digits(p, n, m), 1))
    y = -xi - 1
    total, c = 0, 1
    for j in range(m):
        total += c * f.coeff(-j - 1)
        c = c * (y - j) // (j + 1)
    return PadicInt(p, n, f.shift, total % q)


def phi_f_function(f: LaurentSeries, n: int | None = None) -> LCFunctionZp:
    """phi_f tabulated on the modulus where it is provably locally constant."""
    p = f.p
    n = f.tr.n if n is None else n
    q = p**n
    m = f.pole
    if f.shift:
        raise MalformedInput("phi_f table needs an integral series")
    M = _point_digits(p, n, m)
    size = p**M
    a = np.array([f.coeff(-j - 1) % q for j in range(m)], dtype=object)
    # B_j(x) = C(-x-1, j); B_j(x+1) = B_j(x) - B_(j-1)(x+1)
    B = np.array([binom_int(-1, j) % q for j in range(m)], dtype=object)
    table = []
    for _ in range(size):
        table.append(int(a.dot(B)) % q if m else 0)
        nb = B.copy()
        for j in range(1, m):
            nb[j] = (B[j] - nb[j - 1]) % q
        B = nb
    return LCFunctionZp(p, n, M, tuple(table)).coarsen()


def act_function_zp(k: int, a: int, b: int, fn: LCFunctionZp) -> LCFunctionZp:
    """(p^k a, b; 0, 1) phi (x) = phi((x - b)/(p^k a)) on b + p^k Z_p, 0 elsewhere."""
    p = fn.p
    m = fn.m + k
    mod = p**m
    inv_a = pow(a, -1, p ** max(fn.m, 1))
    table = []
    for x in range(mod):
        d = x - b
        if d % p**k:
            table.append(0)
        else:
            table.append(fn((d // p**k) * inv_a))
    return LCFunctionZp(p, fn.n, m, tuple(table))


def phi_z(z: PerfSeries, x) -> PadicInt:
    """phi_z(x) = res_0([eps^(-x)] z dpi/(1+pi)) for x in Q_p."""
    x = Fraction(x) if not isinstance(x, tuple) else x
    w = eps_power(-x if not isinstance(x, tuple) else (x[0], -Fraction(x[1])), z.tr, z.level_cap)
    return extended_residue(w * z)


def phi_z_via_level(z: PerfSeries, x) -> PadicInt:
    """Second route: lift z to the level of x and evaluate phi_f at p^K x."""
    x = Fraction(x)
    v = vp(x.numerator, z.tr.p) - vp(x.denominator, z.tr.p) if x else 0
    K = max(z.level, -v, 0)
    if K > z.level_cap:
        raise LevelCapExceeded(f"level {K} exceeds cap {z.level_cap}")
    w = z
    while w.level < K:
        w = raise_level(w)
    return phi_f(w.body, x * z.tr.p**K)
