"""Finite models of locally constant functions on Q_p and on its profinite completion.

Points of Q_p outside Z_p are written p^(-s) u with s >= 1 and u a unit.  A
function is stored shell by shell: a table on Z_p modulo p^m, and for each
shell s a table of u modulo p^mu.  A :class:`PeriodicTail` is a function of
(u mod p^mu, j mod r) and stands for a locally constant function on the
profinite completion of Q_p^* (value at p^j u).

Convention for the multiplicative action on tails: (y * phi)(x) = phi(x / y),
so that p * phi(x) = phi(x/p).  A tail phi is delta-invariant modulo constants
when delta(y) phi(x/y) - phi(x) is constant for every y; with this choice the
character delta itself is invariant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import zpn_linalg
from .dictionary import LCFunctionZp
from .errors import (
    LevelTooSmall,
    MalformedInput,
    NotAHomomorphism,
    NotEventuallyPeriodic,
    TruncationTooSmall,
)
from .padic_core import (
    Character,
    HomQpStar,
    PadicInt,
    a_residue,
    c_of,
    char_eval,
    primitive_root,
    tau,
    teichmuller,
    vp,
)


def _units(p: int, m: int) -> list[int]:
    return [u for u in range(p**m) if u % p]


def _split(x: Fraction, p: int) -> tuple[int, Fraction]:
    v = vp(x.numerator, p) - vp(x.denominator, p)
    return v, x / Fraction(p) ** v


def _mod(x: Fraction, p: int, m: int) -> int:
    mod = p**m
    if mod == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, mod) % mod


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicTail:
    """phi(p^j u) = table[u mod p^m][j mod r]; non-unit rows are unused zeros."""

    p: int
    n: int
    m: int
    r: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise MalformedInput("tail needs m >= 1 and r >= 1")
        q = self.p**self.n
        if len(self.table) != self.p**self.m or any(len(row) != self.r for row in self.table):
            raise MalformedInput("tail table has the wrong shape")
        rows = tuple(tuple(int(v) % q if u % self.p else 0 for v in row)
                     for u, row in enumerate(self.table))
        object.__setattr__(self, "table", rows)

    @property
    def q(self) -> int:
        return self.p**self.n

    @classmethod
    def from_callable(cls, p: int, n: int, m: int, r: int, fn) -> PeriodicTail:
        rows = []
        for u in range(p**m):
            rows.append(tuple(fn(u, j) if u % p else 0 for j in range(r)))
        return cls(p, n, m, r, tuple(rows))

    @classmethod
    def constant(cls, p: int, n: int, value: int, m: int = 1) -> PeriodicTail:
        return cls.from_callable(p, n, m, 1, lambda u, j: value)

    @classmethod
    def zero(cls, p: int, n: int, m: int = 1) -> PeriodicTail:
        return cls.constant(p, n, 0, m)

    def value(self, j: int, u: int) -> int:
        return self.table[u % self.p**self.m][j % self.r]

    def __call__(self, x) -> int:
        x = Fraction(x)
        j, u = _split(x, self.p)
        return self.value(j, _mod(u, self.p, self.m))

    def refine(self, m: int | None = None, r: int | None = None) -> PeriodicTail:
        m = self.m if m is None else m
        r = self.r if r is None else r
        if m < self.m or r % self.r:
            raise MalformedInput("refinement must be finer")
        return PeriodicTail.from_callable(self.p, self.n, m, r, lambda u, j: self.value(j, u))

    def _common(self, other: PeriodicTail) -> tuple[PeriodicTail, PeriodicTail]:
        m = max(self.m, other.m)
        r = int(np.lcm(self.r, other.r))
        return self.refine(m, r), other.refine(m, r)

    def __add__(self, other: PeriodicTail) -> PeriodicTail:
        a, b = self._common(other)
        return PeriodicTail.from_callable(a.p, a.n, a.m, a.r, lambda u, j: a.value(j, u) + b.value(j, u))

    def __sub__(self, other: PeriodicTail) -> PeriodicTail:
        return self + other.scale(-1)

    def scale(self, s: int) -> PeriodicTail:
        return PeriodicTail.from_callable(self.p, self.n, self.m, self.r, lambda u, j: s * self.value(j, u))

    def plus_constant(self, c: int) -> PeriodicTail:
        return PeriodicTail.from_callable(self.p, self.n, self.m, self.r, lambda u, j: self.value(j, u) + c)

    def eq(self, other: PeriodicTail) -> bool:
        a, b = self._common(other)
        return a.table == b.table

    def eq_mod_constants(self, other: PeriodicTail) -> bool:
        d = self - other
        return d.eq(PeriodicTail.constant(self.p, self.n, d.value(0, 1)))

    def star(self, k: int, a: int) -> PeriodicTail:
        """(y * phi)(x) = phi(x / y) for y = p^k a."""
        p, m = self.p, self.m
        ainv = pow(a, -1, p**m)
        return PeriodicTail.from_callable(p, self.n, m, self.r,
                                          lambda u, j: self.value(j - k, u * ainv))

    def vector(self) -> list[int]:
        return [self.table[u][j] for u in _units(self.p, self.m) for j in range(self.r)]

    @classmethod
    def from_vector(cls, p: int, n: int, m: int, r: int, vec) -> PeriodicTail:
        units = _units(p, m)
        idx = {u: i for i, u in enumerate(units)}
        return cls.from_callable(p, n, m, r, lambda u, j: int(vec[idx[u] * r + j]))

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "m": self.m, "r": self.r,
                "table": {f"{u},{j}": str(self.table[u][j])
                          for u in _units(self.p, self.m) for j in range(self.r)}}

    @classmethod
    def from_json(cls, d: dict) -> PeriodicTail:
        try:
            p, n, m, r = int(d["p"]), int(d["n"]), int(d["m"]), int(d["r"])
            t = d["table"]
            return cls.from_callable(p, n, m, r, lambda u, j: int(t[f"{u},{j}"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad PeriodicTail JSON: {exc}") from exc


def vp_tail(p: int, n: int, m: int = 1) -> PeriodicTail:
    return PeriodicTail.from_callable(p, n, m, p**n, lambda u, j: j)


def tau_modulus(p: int, n: int) -> int:
    return n + c_of(p)


def tau_tail(p: int, n: int, m: int | None = None) -> PeriodicTail:
    m = tau_modulus(p, n) if m is None else m
    if m < tau_modulus(p, n):
        raise LevelTooSmall(f"tau mod p^{n} needs unit modulus {tau_modulus(p, n)}")
    return PeriodicTail.from_callable(p, n, m, 1, lambda u, j: tau(u, p, m).residue)


def character_level_ok(delta: Character, m: int, r: int) -> bool:
    p, n, q = delta.p, delta.n, delta.p**delta.n
    if pow(delta.val_p.residue, r, q) != 1:
        return False
    if p == 2 and m < 2:
        return delta.val_a.residue % q == 1 and delta.teich_i % 2 == 0
    if m == 1 and p != 2:
        return delta.val_a.residue % q == 1
    return char_eval(delta, 1 + p**m).residue % q == 1


def character_tail(delta: Character, m: int, r: int) -> PeriodicTail:
    """The function x -> delta(x) on (Z/p^m)^* x Z/r."""
    if not character_level_ok(delta, m, r):
        raise LevelTooSmall(f"delta does not factor through level ({m}, {r})")
    p, n = delta.p, delta.n
    unit_vals = {u: char_eval(delta, u).residue for u in _units(p, m)}
    dp = delta.val_p.residue
    q = p**n
    return PeriodicTail.from_callable(p, n, m, r, lambda u, j: unit_vals[u] * pow(dp, j, q))


# ---------------------------------------------------------------------------
# functions on Q_p with an eventually periodic tail
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionQpPP:
    """inner on Z_p (mod p^m), explicit shells s = 1..len(shells) (u mod p^mu), tail beyond.

    The compact part is inner + shells; it vanishes on shells past the
    explicit ones.  The tail is added on every shell (s >= 1).
    """

    p: int
    n: int
    m: int
    mu: int
    inner: tuple[int, ...]
    shells: tuple[tuple[int, ...], ...]
    tail: PeriodicTail

    def __post_init__(self):
        q = self.p**self.n
        if len(self.inner) != self.p**self.m:
            raise MalformedInput("inner table length must be p^m")
        if any(len(s) != self.p**self.mu for s in self.shells):
            raise MalformedInput("shell tables must have length p^mu")
        if self.tail.m > self.mu:
            raise MalformedInput("tail unit modulus exceeds shell modulus")
        object.__setattr__(self, "inner", tuple(int(v) % q for v in self.inner))
        object.__setattr__(self, "shells", tuple(tuple(int(v) % q if u % self.p else 0
                                                       for u, v in enumerate(s)) for s in self.shells))
        if self.tail.m < self.mu:
            object.__setattr__(self, "tail", self.tail.refine(self.mu))

    @property
    def M(self) -> int:
        return len(self.shells)

    @property
    def q(self) -> int:
        return self.p**self.n

    def compact_value(self, x) -> int:
        x = Fraction(x)
        if x == 0:
            return self.inner[0]
        v, u = _split(x, self.p)
        if v >= 0:
            return self.inner[_mod(x, self.p, self.m)]
        s = -v
        if s > self.M:
            return 0
        return self.shells[s - 1][_mod(u, self.p, self.mu)]

    def __call__(self, x) -> int:
        x = Fraction(x)
        val = self.compact_value(x)
        if x != 0:
            v, u = _split(x, self.p)
            if v < 0:
                val += self.tail.value(v, _mod(u, self.p, self.mu))
        return val % self.q

    def trimmed(self) -> FunctionQpPP:
        shells = list(self.shells)
        while shells and not any(shells[-1]):
            shells.pop()
        return FunctionQpPP(self.p, self.n, self.m, self.mu, self.inner, tuple(shells), self.tail)

    def eq(self, other: FunctionQpPP) -> bool:
        """Equality as functions (compared cell by cell on a common grid)."""
        return self.minus(other).is_zero()

    def minus(self, other: FunctionQpPP) -> FunctionQpPP:
        m, mu = max(self.m, other.m), max(self.mu, other.mu)
        M = max(self.M, other.M)
        a, b = self.regrid(m, mu, M), other.regrid(m, mu, M)
        inner = tuple(x - y for x, y in zip(a.inner, b.inner))
        shells = tuple(tuple(x - y for x, y in zip(s, t)) for s, t in zip(a.shells, b.shells))
        return FunctionQpPP(self.p, self.n, m, mu, inner, shells, a.tail - b.tail).trimmed()

    def is_zero(self) -> bool:
        t = self.trimmed()
        return not any(t.inner) and not t.shells and t.tail.eq(PeriodicTail.zero(self.p, self.n, t.tail.m))

    def is_constant_function(self) -> bool:
        c = self.inner[0]
        tail = self.tail.plus_constant(-c)
        if any(v != c for v in self.inner):
            return False
        for s in range(1, self.M + 1):
            for u in _units(self.p, self.mu):
                if (self.shells[s - 1][u] + self.tail.value(-s, u)) % self.q != c:
                    return False
        for s in range(self.M + 1, self.M + 1 + tail.r):
            for u in _units(self.p, tail.m):
                if tail.value(-s, u):
                    return False
        return True

    def regrid(self, m: int, mu: int, M: int) -> FunctionQpPP:
        p = self.p
        if m < self.m or mu < self.mu or M < self.M:
            raise MalformedInput("regrid must be finer")
        inner = tuple(self.inner[x % p**self.m] for x in range(p**m))
        shells = []
        for s in range(1, M + 1):
            if s <= self.M:
                row = self.shells[s - 1]
                shells.append(tuple(row[u % p**self.mu] for u in range(p**mu)))
            else:
                shells.append((0,) * p**mu)
        return FunctionQpPP(p, self.n, m, mu, inner, tuple(shells), self.tail.refine(mu))

    def to_json(self) -> dict:
        p = self.p
        return {"p": p, "n": self.n, "m": self.m, "mu": self.mu,
                "inner": {str(x): str(v) for x, v in enumerate(self.inner)},
                "shells": [{str(u): str(row[u]) for u in _units(p, self.mu)} for row in self.shells],
                "tail": self.tail.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> FunctionQpPP:
        try:
            p, n, m, mu = int(d["p"]), int(d["n"]), int(d["m"]), int(d["mu"])
            inner = tuple(int(d["inner"][str(x)]) for x in range(p**m))
            shells = tuple(tuple(int(row.get(str(u), 0)) for u in range(p**mu)) for row in d["shells"])
            return cls(p, n, m, mu, inner, shells, PeriodicTail.from_json(d["tail"]))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedInput(f"bad FunctionQpPP JSON: {exc}") from exc


@dataclass(frozen=True)
class RawQpTable:
    """Values of a function on p^(-M) Z_p: inner table on Z_p and shells s = 1..M."""

    p: int
    n: int
    m: int
    mu: int
    inner: tuple[int, ...]
    shells: tuple[tuple[int, ...], ...]

    @property
    def M(self) -> int:
        return len(self.shells)


def sample(phi: FunctionQpPP, M: int) -> RawQpTable:
    """Tabulate phi on p^(-M) Z_p."""
    p, q = phi.p, phi.q
    shells = []
    for s in range(1, M + 1):
        row = []
        for u in range(p**phi.mu):
            if u % p == 0:
                row.append(0)
                continue
            c = phi.shells[s - 1][u] if s <= phi.M else 0
            row.append((c + phi.tail.value(-s, u)) % q)
        shells.append(tuple(row))
    return RawQpTable(p, phi.n, phi.m, phi.mu, phi.inner, tuple(shells))


def pp_decompose(raw: RawQpTable, max_period: int | None = None) -> FunctionQpPP:
    """Split a tabulated function as compact part + 1_{Q_p - Z_p} * periodic tail.

    The tail is read on the outermost shells: we look for the smallest
    starting shell s0 and then the smallest period r such that the shells
    s0..M repeat with period r and cover at least two full periods.
    """
    p, n, mu = raw.p, raw.n, raw.mu
    M = raw.M
    rows = [tuple(v % p**n for v in s) for s in raw.shells]
    max_period = max_period or M // 2
    found = None
    for s0 in range(1, M + 1):
        W = M - s0 + 1
        for r in range(1, min(max_period, W // 2) + 1):
            if all(rows[s - 1] == rows[s - 1 + r] for s in range(s0, M - r + 1)):
                found = (s0, r)
                break
        if found:
            break
    if not found:
        raise NotEventuallyPeriodic("no periodic behaviour detected on the sampled shells")
    s0, r = found
    by_class = {}
    for s in range(s0, s0 + r):
        by_class[(-s) % r] = rows[s - 1]
    tail = PeriodicTail.from_callable(p, n, mu, r, lambda u, j: by_class[j % r][u])
    shells = []
    for s in range(1, s0):
        shells.append(tuple((rows[s - 1][u] - tail.value(-s, u)) if u % p else 0
                            for u in range(p**mu)))
    return FunctionQpPP(p, n, raw.m, mu, raw.inner, tuple(shells), tail).trimmed()


def recompose(phi: FunctionQpPP, M: int | None = None) -> RawQpTable:
    M = M if M is not None else phi.M + 2 * phi.tail.r
    return sample(phi, M)


def p_action(k: int, a: int, b, phi: FunctionQpPP) -> FunctionQpPP:
    """(g phi)(x) = phi((x - b) / (p^k a)) for g = (p^k a, b; 0, 1)."""
    p, n = phi.p, phi.n
    b = Fraction(b)
    if a % p == 0:
        raise MalformedInput("a must be a unit")
    B = 0 if b == 0 else max(0, -_split(b, p)[0])
    kk = max(k, 0)
    m_new = kk + max(phi.m, phi.mu - 1)
    mu_new = max(phi.mu, B + kk + max(phi.m, phi.mu - 1)) if B else phi.mu
    M_new = max(phi.M - k, B + phi.mu, -k, 0) + 1
    alpha = Fraction(p) ** k * a
    new_tail = phi.tail.star(k, a)

    def g_phi(x: Fraction) -> int:
        return phi((x - b) / alpha)

    inner = tuple(g_phi(Fraction(x)) for x in range(p**m_new))
    shells = []
    for s in range(1, M_new + 1):
        row = []
        for u in range(p**mu_new):
            if u % p == 0:
                row.append(0)
                continue
            x = Fraction(u, p**s)
            row.append(g_phi(x) - new_tail.value(-s, u % p**new_tail.m))
        shells.append(tuple(row))
    out = FunctionQpPP(p, n, m_new, mu_new, inner, tuple(shells), new_tail.refine(mu_new))
    if out.shells and any(out.shells[-1]):
        raise TruncationTooSmall("translated function not compact at the computed depth")
    return out.trimmed()


def from_tail(tail: PeriodicTail, m: int = 1) -> FunctionQpPP:
    """1_{Q_p - Z_p} * tail."""
    p = tail.p
    return FunctionQpPP(p, tail.n, m, tail.m, (0,) * p**m, (), tail)


# ---------------------------------------------------------------------------
# the dilation equation phi(x/p) - phi(x) = phi_u(x) + C
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DilationSolution:
    C: int
    solution: FunctionQpPP
    shells_used: int


def continuity_constant(phi_u: LCFunctionZp) -> int:
    """The C making phi constant on the two deepest representable shells of Z_p.

    On p^j Z_p with j >= m the equation reads phi(x) - phi(px) = phi_u(0) + C,
    so stability of consecutive shells forces C = -phi_u(0).
    """
    p, m = phi_u.p, phi_u.m
    deep = [phi_u(p ** (m + 1) * 1), phi_u(p ** (m + 2) * 1)]
    if deep[0] != deep[1]:
        raise TruncationTooSmall("phi_u not stable on deep shells")
    return (-deep[0]) % phi_u.q


def _inner_solution(phi_u: LCFunctionZp, C: int) -> tuple[int, ...]:
    """phi on Z_p with phi(0) = 0: phi(x) = sum_{t >= 1} (phi_u(p^t x) + C)."""
    p, m, q = phi_u.p, max(phi_u.m, 1), phi_u.q
    out = []
    for x in range(p**m):
        out.append(sum(phi_u(p**t * x) + C for t in range(1, m + 1)) % q)
    return tuple(out)


def dilation_solve(phi_u: LCFunctionZp, order: str = "outward") -> DilationSolution:
    """Solve phi(x/p) - phi(x) = phi_u(x) + C (phi_u extended by 0 off Z_p).

    C is fixed by continuity at 0, phi is normalised by phi(0) = 0, and the
    tail is read off by pp_decompose after sweeping enough shells.
    """
    p, n, q = phi_u.p, phi_u.n, phi_u.q
    C = continuity_constant(phi_u)
    m = max(phi_u.m, 1)
    inner = _inner_solution(phi_u, C)
    r = q // np.gcd(C, q) if C else 1
    S = 2 * int(r) + 2
    units = _units(p, m)
    shells = []
    if order == "outward":
        prev = {u: inner[u] for u in units}
        first = True
        for s in range(1, S + 1):
            cur = {u: (prev[u] + (phi_u(u) if first else 0) + C) % q for u in units}
            first = False
            shells.append(tuple(cur.get(u, 0) for u in range(p**m)))
            prev = cur
    elif order == "closed":
        for s in range(1, S + 1):
            shells.append(tuple(((s * C + phi_u(u) + inner[u]) % q) if u % p else 0
                                for u in range(p**m)))
    else:
        raise MalformedInput(f"unknown sweep order {order!r}")
    raw = RawQpTable(p, n, m, m, inner, tuple(shells))
    sol = pp_decompose(raw)
    _check_dilation(phi_u, C, sol)
    return DilationSolution(C, sol, S)


def _check_dilation(phi_u: LCFunctionZp, C: int, sol: FunctionQpPP) -> None:
    p, q = sol.p, sol.q
    pts = [Fraction(x) for x in range(p**sol.m)]
    for s in range(1, sol.M + 2 * sol.tail.r + 2):
        pts += [Fraction(u, p**s) for u in _units(p, sol.mu)]
    for x in pts:
        lhs = sol(x / p) - sol(x)
        v = 0 if x == 0 else _split(x, p)[0]
        rhs = (phi_u(x) if v >= 0 else 0) + C
        if (lhs - rhs) % q:
            raise TruncationTooSmall(f"dilation identity fails at x = {x}")


def ide_defect(phi_u: LCFunctionZp, sol: FunctionQpPP, b: Fraction, x: Fraction) -> int:
    """phi_b(x/p) - phi_pb(x) - phi_u(x - pb) + phi_u(x), with phi_b(y) = phi(y - b) - phi(y)."""
    def ext(y: Fraction) -> int:
        return phi_u(y) if (y == 0 or _split(y, sol.p)[0] >= 0) else 0

    def phib(bb: Fraction, y: Fraction) -> int:
        return sol(y - bb) - sol(y)

    return (phib(b, x / sol.p) - phib(sol.p * b, x) - ext(x - sol.p * b) + ext(x)) % sol.q


def delta_average(f: LCFunctionZp) -> LCFunctionZp:
    """Projection onto mu_(p-1)-invariant functions: x -> mean of f(omega x).

    This is the function-side shadow of taking Delta-invariants of a class,
    Delta acting through the chi-twisted sigma_omega.
    """
    p, n = f.p, f.n
    if p == 2:
        return f
    m = max(f.m, 1)
    mod = p**m
    roots = sorted({teichmuller(PadicInt(p, m, 0, g)).residue for g in range(1, p)})
    inv = pow(p - 1, -1, p**n)
    table = tuple(inv * sum(f(w * x % mod) for w in roots) for x in range(mod))
    return LCFunctionZp(p, n, m, table)


# ---------------------------------------------------------------------------
# tails as homomorphisms
# ---------------------------------------------------------------------------


def tail_class_to_hom(tail: PeriodicTail) -> HomQpStar:
    """Read (c_vp, c_tau) off a tail equal to c_vp v_p + c_tau tau + constant."""
    p, n, q = tail.p, tail.n, tail.q
    T = tail.plus_constant(-tail.value(0, 1))
    m = max(T.m, tau_modulus(p, n))
    T = T.refine(m)
    c_vp = T.value(1, 1)
    c_tau = T.value(0, a_residue(p, m) % p**m)
    if (c_vp * T.r) % q:
        raise NotAHomomorphism("period incompatible with a valuation term")
    units = _units(p, m)
    vals = np.array([T.value(0, u) for u in units], dtype=np.int64)
    idx = {u: i for i, u in enumerate(units)}
    mod = p**m
    for u in units:
        prods = np.array([vals[idx[u * w % mod]] for w in units], dtype=np.int64)
        if np.any((prods - vals[idx[u]] - vals) % q):
            raise NotAHomomorphism("unit part is not additive")
    for u in units:
        for j in range(T.r):
            if (T.value(j, u) - j * c_vp - T.value(0, u)) % q:
                raise NotAHomomorphism("valuation part is not additive")
    hom = HomQpStar.make(p, n, c_vp, c_tau)
    tt = tau_tail(p, n, m)
    for u in units:
        if (T.value(0, u) - c_tau * tt.value(0, u)) % q:
            raise NotAHomomorphism("unit part has a torsion component")
    return hom


def hom_to_tail(h: HomQpStar, m: int | None = None) -> PeriodicTail:
    p, n = h.p, h.n
    m = tau_modulus(p, n) if m is None else m
    c_vp, c_tau = h.as_pair()
    tt = tau_tail(p, n, m)
    return PeriodicTail.from_callable(p, n, m, p**n, lambda u, j: c_vp * j + c_tau * tt.value(0, u))


# ---------------------------------------------------------------------------
# twisted invariants on tails
# ---------------------------------------------------------------------------


@dataclass
class InvariantsResult:
    delta: Character
    level: tuple[int, int]
    module_type: list[int]
    free_basis: list[PeriodicTail]
    generators: np.ndarray = field(repr=False)

    @property
    def free_rank(self) -> int:
        return sum(1 for k in self.module_type if k == self.delta.n)

    @property
    def torsion(self) -> list[int]:
        return [k for k in self.module_type if k < self.delta.n]

    def contains(self, tail: PeriodicTail) -> bool:
        """Membership of a tail (modulo constants) in the invariant module."""
        m, r = self.level
        p, n = self.delta.p, self.delta.n
        t = tail.refine(m, r) if (tail.m <= m and r % tail.r == 0) else None
        if t is None:
            raise LevelTooSmall("tail does not live at this level")
        t = t.plus_constant(-t.value(0, 1))
        vec = np.array(t.vector(), dtype=object)
        G = self.generators
        if G.shape[1] == 0:
            return not np.any(vec % p**n)
        try:
            zpn_linalg.solve(G, vec, p, n)
        except Exception:
            return False
        return True


def twisted_invariants(delta: Character, level: tuple[int, int]) -> InvariantsResult:
    """Tails phi at level (m, r) with delta(y) phi(x/y) - phi(x) constant, modulo constants."""
    m, r = level
    p, n = delta.p, delta.n
    q = p**n
    if not character_level_ok(delta, m, r):
        raise LevelTooSmall(f"delta does not factor through level ({m}, {r})")
    mod = p**m
    units = _units(p, m)
    idx = {u: i for i, u in enumerate(units)}
    nvar = len(units) * r
    a_m = a_residue(p, max(m, 2)) % mod
    g = primitive_root(p)
    w = teichmuller(PadicInt(p, m, 0, g % mod)).residue if p != 2 else mod - 1
    gens = [(1, 1), (0, a_m), (0, w)]
    dvals = [delta.val_p.residue, delta.val_a.residue, char_eval(delta, w if p != 2 else -1).residue]
    rows = []
    for gi, ((k, y), dy) in enumerate(zip(gens, dvals)):
        yinv = pow(y, -1, mod)
        for u in units:
            for j in range(r):
                row = [0] * (nvar + 3)
                src = idx[u * yinv % mod] * r + (j - k) % r
                dst = idx[u] * r + j
                row[src] += dy
                row[dst] -= 1
                row[nvar + gi] = -1
                rows.append(row)
    norm = [0] * (nvar + 3)
    norm[idx[1] * r + 0] = 1
    rows.append(norm)
    A = np.array(rows, dtype=object) % q
    K = zpn_linalg.kernel(A, p, n)
    G = K[:nvar, :] % q if K.shape[1] else np.zeros((nvar, 0), dtype=object)
    mt = zpn_linalg.module_type(G, p, n) if G.shape[1] else []
    free = _free_part_basis(G, p, n)
    basis = [PeriodicTail.from_vector(p, n, m, r, col) for col in free]
    return InvariantsResult(delta, (m, r), mt, basis, G)


def _free_part_basis(G: np.ndarray, p: int, n: int) -> list[np.ndarray]:
    if G.shape[1] == 0:
        return []
    S = zpn_linalg.smith(G, p, n)
    # columns of G V with diagonal exponent 0 span a free direct summand
    GV = (G.astype(object).dot(S.V.astype(object))) % p**n
    return [GV[:, i] for i, e in enumerate(S.exps) if e == 0]


# ---------------------------------------------------------------------------
# fixed points of p^k on germs at infinity
# ---------------------------------------------------------------------------


@dataclass
class FixedPointsResult:
    p: int
    n: int
    k: int
    m: int
    cardinality: int
    boundary_image: int
    boundary_kernel: int
    periodic_quotient: int


def _germ_system(p: int, n: int, k: int, m: int, L: int) -> tuple[np.ndarray, int]:
    """Equations phi_{s+k}(u) - phi_s(u) - c = 0 on a window of L far shells."""
    units = _units(p, m)
    nu = len(units)
    nvar = L * nu + 1
    rows = []
    for s in range(L - k):
        for i in range(nu):
            row = [0] * nvar
            row[(s + k) * nu + i] += 1
            row[s * nu + i] -= 1
            row[-1] = -1
            rows.append(row)
    return np.array(rows, dtype=object).reshape(len(rows), nvar), nvar


def fixed_points_pk(k: int, n: int, p: int = 3, m: int = 1, window: int | None = None) -> FixedPointsResult:
    """H^0 of p^(kN) on germs at infinity of functions mod p^n, modulo constants.

    A germ is modelled on a window of L >= k + 1 far shells with unit
    modulus m; p^k shifts shells by k.  The boundary map sends a germ with
    p^k * phi - phi = c to c.
    """
    L = window if window is not None else k + 1
    if L < k + 1:
        raise TruncationTooSmall("the window must contain at least k + 1 shells")
    q = p**n
    A, nvar = _germ_system(p, n, k, m, L)
    K = zpn_linalg.kernel(A, p, n) if A.shape[0] else np.eye(nvar, dtype=object)
    kernel_size = _module_size(K, p, n)
    # quotient by constants (phi = const, c = 0): a free rank-one submodule
    card = kernel_size // q
    cs = K[-1, :] % q if K.shape[1] else np.zeros(0, dtype=object)
    boundary = _module_size(cs.reshape(1, -1), p, n) if cs.size else 1
    nu = len(_units(p, m))
    return FixedPointsResult(p, n, k, m, card, boundary, card // boundary, q ** (nu * k) // q)


def _module_size(G: np.ndarray, p: int, n: int) -> int:
    if G.size == 0:
        return 1
    return p ** sum(zpn_linalg.module_type(G, p, n))


def fixed_points_bruteforce(k: int, n: int, p: int = 3, m: int = 1, window: int | None = None) -> int:
    """Enumerate germs on the window, keep the p^k-invariant ones, count modulo constants."""
    L = window if window is not None else k + 1
    q = p**n
    nu = len(_units(p, m))
    count = 0
    for vals in itertools.product(range(q), repeat=L * nu):
        rows = [vals[s * nu:(s + 1) * nu] for s in range(L)]
        diffs = {(rows[s + k][i] - rows[s][i]) % q for s in range(L - k) for i in range(nu)}
        if len(diffs) <= 1:
            count += 1
    return count // q


def periodic_bruteforce(p: int, n: int, m: int, r: int) -> int:
    """|C((Z/p^m)^* x Z/r, Z/p^n) / constants| by enumeration."""
    q = p**n
    nu = len(_units(p, m))
    seen = set()
    for vals in itertools.product(range(q), repeat=nu * r):
        seen.add(tuple((v - vals[0]) % q for v in vals))
    return len(seen)


def phi_k_germ(p: int, n: int, k: int, m: int, L: int) -> list[list[int]]:
    """1_{Q_p - Z_p} v_p(x / p^k) on far shells s = S..S+L-1 (taking S = 1)."""
    q = p**n
    nu = len(_units(p, m))
    return [[(-(s + 1) - k) % q] * nu for s in range(L)]


def germ_boundary(rows: list[list[int]], k: int, q: int) -> int | None:
    """c with phi_{s+k} - phi_s = c on the window, or None if not invariant."""
    diffs = {(rows[s + k][i] - rows[s][i]) % q for s in range(len(rows) - k) for i in range(len(rows[0]))}
    if len(diffs) > 1:
        return None
    return diffs.pop() if diffs else 0
