"""Linear algebra over Z/p^n.

Z/p^n is a local ring, so a Smith normal form is reached by always pivoting
on an entry of minimal p-adic valuation.  The reduction keeps the right
transform V (for kernels and solutions) and applies the row operations to
any right-hand sides carried along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem


def _dtype(q: int, size: int):
    return np.int64 if q * q * max(size, 1) < 2**62 else object


def as_matrix(rows, q: int) -> np.ndarray:
    a = np.array(rows, dtype=object) % q
    dt = _dtype(q, a.shape[0] + (a.shape[1] if a.ndim > 1 else 1))
    return a.astype(dt)


@dataclass
class Smith:
    """U A V = diag(p^e_0, ..., p^e_{r-1}, 0, ...) with U only applied to rhs."""

    p: int
    n: int
    exps: list[int]  # valuations of the nonzero diagonal entries
    V: np.ndarray
    rhs: np.ndarray | None
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return len(self.exps)


def smith(A: np.ndarray, p: int, n: int, rhs: np.ndarray | None = None) -> Smith:
    q = p**n
    A = np.array(A, dtype=object) % q
    rows, cols = A.shape
    dt = _dtype(q, rows + cols)
    A = A.astype(dt)
    V = np.eye(cols, dtype=dt)
    B = None if rhs is None else (np.array(rhs, dtype=object) % q).astype(dt).reshape(rows, -1)
    exps: list[int] = []
    powers = [p**k for k in range(n + 1)]
    for t in range(min(rows, cols)):
        sub = A[t:, t:]
        found = None
        for k in range(n):
            hit = np.argwhere(sub % powers[k + 1] != 0)
            if len(hit):
                found = (k, hit[0])
                break
        if found is None:
            break
        e, (i, j) = found
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
            if B is not None:
                B[[t, i]] = B[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        unit = int(A[t, t]) // powers[e]
        inv = pow(unit, -1, q)
        A[t] = (A[t] * inv) % q
        if B is not None:
            B[t] = (B[t] * inv) % q
        col = A[t + 1:, t] // powers[e]
        if np.any(col):
            A[t + 1:] = (A[t + 1:] - np.outer(col, A[t])) % q
            if B is not None:
                B[t + 1:] = (B[t + 1:] - np.outer(col, B[t])) % q
        row = A[t, t + 1:] // powers[e]
        if np.any(row):
            V[:, t + 1:] = (V[:, t + 1:] - np.outer(V[:, t], row)) % q
            A[t, t + 1:] = 0
        exps.append(e)
    return Smith(p, n, exps, V, B, (rows, cols))


def solve(A, b, p: int, n: int) -> np.ndarray:
    """One solution of A x = b over Z/p^n; raises SingularSystem if none."""
    q = p**n
    A = np.array(A, dtype=object)
    b = np.array(b, dtype=object).reshape(A.shape[0], -1)
    S = smith(A, p, n, rhs=b)
    B = S.rhs
    y = np.zeros((S.shape[1], B.shape[1]), dtype=object)
    for i, e in enumerate(S.exps):
        bi = B[i].astype(object)
        if any(int(x) % p**e for x in bi):
            raise SingularSystem("inconsistent pivot", degree=i)
        y[i] = bi // p**e
    tail = B[S.rank:]
    if tail.size and np.any(tail % q):
        bad = int(np.argwhere(tail % q)[0][0]) + S.rank
        raise SingularSystem("system has no solution", row=bad)
    x = (S.V.astype(object).dot(y)) % q
    return x.reshape(-1) if x.shape[1] == 1 else x


def kernel(A, p: int, n: int) -> np.ndarray:
    """Generators (as columns) of the kernel of A over Z/p^n."""
    q = p**n
    A = np.array(A, dtype=object)
    S = smith(A, p, n)
    gens = []
    V = S.V.astype(object)
    for i, e in enumerate(S.exps):
        if e > 0:
            gens.append((V[:, i] * p ** (n - e)) % q)
    for i in range(S.rank, S.shape[1]):
        gens.append(V[:, i] % q)
    if not gens:
        return np.zeros((S.shape[1], 0), dtype=object)
    return np.array(gens, dtype=object).T


def module_type(G, p: int, n: int) -> list[int]:
    """Invariant factors of the submodule of (Z/p^n)^d spanned by columns of G.

    Returns the list of orders as exponents: a summand Z/p^k contributes k.
    """
    G = np.array(G, dtype=object)
    if G.size == 0:
        return []
    S = smith(G, p, n)
    return sorted((n - e for e in S.exps if e < n), reverse=True)


def free_rank(G, p: int, n: int) -> int:
    return sum(1 for k in module_type(G, p, n) if k == n)
