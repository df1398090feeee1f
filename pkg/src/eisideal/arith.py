"""Elementary number theory for prime-level Eisenstein computations.

Everything here is exact integer arithmetic: deterministic primality,
discrete logarithms in (Z/N)^x, the p-adic logarithm to Z/p^t, and the
half-sum logarithms (Merel, Stickelberger) that control the Eisenstein
ideal at level N.  Conventions:

  * N is an odd prime, p >= 5 a prime with p | N - 1, t = v_p(N - 1).
  * log: (Z/N)^x -> Z/p^t is dlog_g reduced mod p^t for the smallest
    primitive root g of N.  Any other choice differs by a unit of Z/p^t;
    callers that care (the verifier) are unit-robust.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Deterministic Miller-Rabin witnesses, valid for all n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact for n < 3.3e24)."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes(bound: int) -> list[int]:
    """All primes <= bound, by sieve."""
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, int(bound**0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return [int(q) for q in np.nonzero(sieve)[0]]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def inv_mod(a: int, n: int) -> int:
    g, x, _ = xgcd(a % n, n)
    if g != 1:
        raise ZeroDivisionError(f"{a} not invertible mod {n}")
    return x % n


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    assert n != 0
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def factor(n: int) -> dict[int, int]:
    """Prime factorization by trial division (inputs here are < 10^6)."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def primitive_root(N: int) -> int:
    """Smallest primitive root mod the odd prime N."""
    assert is_prime(N) and N > 2
    cofactors = [(N - 1) // q for q in factor(N - 1)]
    g = 2
    while any(pow(g, c, N) == 1 for c in cofactors):
        g += 1
    return g


@lru_cache(maxsize=None)
def dlog_table(N: int) -> tuple[np.ndarray, int]:
    """(table, g): table[a] = dlog_g(a) for 1 <= a < N, table[0] = -1."""
    g = primitive_root(N)
    table = np.full(N, -1, dtype=np.int64)
    acc = 1
    for k in range(N - 1):
        table[acc] = k
        acc = acc * g % N
    return table, g


class UnitGroup:
    """(Z/N)^x with a fixed generator and O(1) discrete logs.

    The p-part data (t = v_p(N-1), m = p^t) and the quotient
    P = (Z/N)^x / ((Z/N)^x)^{p^t} are what level structures downstream
    consume: the class of a unit u in P is dlog(u) mod m.
    """

    def __init__(self, N: int, p: int):
        assert is_prime(N) and is_prime(p) and p >= 5
        assert (N - 1) % p == 0, f"p={p} does not divide N-1={N - 1}"
        self.N = N
        self.p = p
        self.t = v_p(N - 1, p)
        self.m = p**self.t
        self._table, self.g = dlog_table(N)

    def dlog(self, a: int) -> int:
        a %= self.N
        assert a != 0, "dlog of 0"
        return int(self._table[a])

    def log(self, a: int, s: int | None = None) -> int:
        """p-adic logarithm (Z/N)^x -> Z/p^t, optionally reduced mod p^s."""
        val = self.dlog(a) % self.m
        if s is not None and s < self.t:
            val %= self.p**s
        return val

    def pclass(self, a: int, m: int | None = None) -> int:
        """Class of a in (Z/N)^x / ((Z/N)^x)^m, as dlog mod m."""
        return self.dlog(a) % (self.m if m is None else m)


def admissible_pairs(bound: int) -> list[tuple[int, int]]:
    """All (N, p) with N prime <= bound, p >= 5 prime, p | N - 1.

    These are the levels where the p-Eisenstein theory is nontrivial.
    """
    out = []
    for N in primes(bound):
        if N < 7:
            continue
        for p in sorted(factor(N - 1)):
            if p >= 5:
                out.append((N, p))
    return out


def merel_log(N: int, p: int, s: int) -> int:
    """sum_{k=1}^{(N-1)/2} k * log(k)  in Z/p^min(t,s).

    The p-valuation of this sum is the computable invariant that decides
    how deep the Eisenstein/K2 bridge classes sit (the Merel number
    prod k^k is a p-th power iff this vanishes mod p).
    """
    U = UnitGroup(N, p)
    mod = p ** min(U.t, s)
    total = 0
    for k in range(1, (N - 1) // 2 + 1):
        total += k * U.log(k)
    return total % mod


def stickelberger_log(N: int, p: int, s: int) -> int:
    """sum_{x=1}^{N-1} B2(x/N) * log(x)  in Z/p^min(t,s).

    B2(x) = x^2 - x + 1/6; the value B2(x/N) has denominator 6N^2, a
    p-adic unit, so the sum is p-integral and computed exactly via the
    inverse of 6N^2 mod p^s.
    """
    U = UnitGroup(N, p)
    mod = p ** min(U.t, s)
    inv = inv_mod(6 * N * N, mod)
    total = 0
    for x in range(1, N):
        total += (6 * x * x - 6 * N * x + N * N) * U.log(x)
    return total * inv % mod


def lecouturier_sides(N: int, p: int, s: int) -> tuple[int, int]:
    """Both sides of the half-sum identity

        sum_x B2(x/N) log(x)  =  -(4/3) sum_{k <= (N-1)/2} k log(k)

    in Z/p^min(t,s).  Equality for every admissible (N, p) is one of the
    acceptance identities; the left side is the Stickelberger derivative
    of the zeta element, the right side is -(4/3) * merel_log.
    """
    t = v_p(N - 1, p)
    mod = p ** min(t, s)
    lhs = stickelberger_log(N, p, s)
    rhs = (-4 * inv_mod(3, mod) * merel_log(N, p, s)) % mod
    return lhs, rhs
