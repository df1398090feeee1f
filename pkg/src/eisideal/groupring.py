"""Group rings Lambda = Z/p^M [x] / (x^m - 1) and their Eisenstein elements.

A cyclic group of order m acts on everything at level N through the
diamond operators; with a generator fixed, its group ring is Lambda and
elements are int64 coefficient vectors of length m.  The two elements
that control the Eisenstein theory are

    zeta = sum_x B2(x/N) [x]      (B2(x) = x^2 - x + 1/6),
    nu   = sum over the group of all [x],

where [x] is the class of the unit x, i.e. x^(dlog x mod m).  B2(x/N)
has denominator 6N^2, a p-adic unit, so zeta is p-integral and is stored
exactly via the inverse of 6N^2 mod p^M.

Batched convolution is a matrix product against a circulant expansion,
so it rides the same exact BLAS kernel as everything else.
"""

from __future__ import annotations

import numpy as np

from .arith import UnitGroup, inv_mod
from .zqlin import (matmul_mod, snf_exponents, lattice_length,
                    lattice_quotient_exponents, echelon)


class GroupRing:
    """Z/p^M [x] / (x^m - 1) with exact batched arithmetic."""

    def __init__(self, p: int, M: int, m: int):
        assert p >= 5 and M >= 1 and m >= 1
        self.p = p
        self.M = M
        self.m = m
        self.q = p**M
        w = np.arange(m)
        # sub[s, w] = (w - s) mod m: the circulant index pattern.
        self._sub = (w[None, :] - w[:, None]) % m

    # -- element constructors -------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros(self.m, dtype=np.int64)

    def one(self) -> np.ndarray:
        e = self.zero()
        e[0] = 1
        return e

    def x_power(self, k: int) -> np.ndarray:
        e = self.zero()
        e[k % self.m] = 1
        return e

    def nu(self) -> np.ndarray:
        """The norm element: sum of all group elements."""
        return np.ones(self.m, dtype=np.int64)

    # -- arithmetic ------------------------------------------------------

    def circulant(self, a: np.ndarray) -> np.ndarray:
        """(m, m) matrix of x^s * a, rows indexed by the shift s."""
        a = np.asarray(a, dtype=np.int64) % self.q
        return a[self._sub]

    def conv(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product a * b in Lambda."""
        prod = matmul_mod(np.asarray(a).reshape(1, -1), self.circulant(b), self.p, self.M)
        return prod.ravel()

    def aug(self, a: np.ndarray) -> int:
        """Augmentation Lambda -> Z/p^M, x -> 1."""
        return int(np.sum(np.asarray(a, dtype=np.int64) % self.q) % self.q)

    def outer_conv(self, F: np.ndarray, P: np.ndarray) -> np.ndarray:
        """All pairwise products: F (r, m) x P (c, m) -> (r, c, m)."""
        F = np.asarray(F, dtype=np.int64)
        P = np.asarray(P, dtype=np.int64)
        r = F.shape[0]
        c = P.shape[0]
        expanded = P[:, self._sub]  # (c, s, w): x^s * P[c]
        flat = expanded.transpose(1, 0, 2).reshape(self.m, c * self.m)
        out = matmul_mod(F, flat, self.p, self.M)
        return out.reshape(r, c, self.m)

    def lmatmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Lambda-matrix product: (r, s, m) @ (s, c, m) -> (r, c, m)."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        r, s, m = A.shape
        s2, c, m2 = B.shape
        assert s == s2 and m == self.m and m2 == self.m
        Bexp = B[:, :, self._sub]  # (s, c, shift, w)
        Bflat = Bexp.transpose(0, 2, 1, 3).reshape(s * m, c * m)
        out = matmul_mod(A.reshape(r, s * m), Bflat, self.p, self.M)
        return out.reshape(r, c, m)

    def unfold(self, T: np.ndarray) -> np.ndarray:
        """Lambda-rows (r, c, m) -> Z/q rows (r*m, c*m): row (i, s) is x^s * T[i]."""
        T = np.asarray(T, dtype=np.int64)
        r, c, m = T.shape
        assert m == self.m
        exp = T[:, :, self._sub]  # (r, c, s, w)
        return exp.transpose(0, 2, 1, 3).reshape(r * m, c * m) % self.q

    def fold(self, T: np.ndarray, m2: int) -> np.ndarray:
        """Coefficient pushforward Lambda_m -> Lambda_m2 for m2 | m."""
        assert self.m % m2 == 0
        T = np.asarray(T, dtype=np.int64) % self.q
        shape = T.shape[:-1]
        flat = T.reshape(-1, self.m)
        out = np.zeros((flat.shape[0], m2), dtype=np.int64)
        for c in range(self.m):
            out[:, c % m2] += flat[:, c]
        return (out % self.q).reshape(*shape, m2)

    # -- units -----------------------------------------------------------

    def is_unit(self, a: np.ndarray) -> bool:
        """Unit test: a mod p coprime to x^m - 1 in F_p[x]."""
        return self._unit_poly_inverse(a) is not None

    def inv(self, a: np.ndarray) -> np.ndarray:
        """Inverse in Lambda: F_p[x]-xgcd seed, then Hensel lifting."""
        u = self._unit_poly_inverse(a)
        if u is None:
            raise ZeroDivisionError("not a unit in the group ring")
        a = np.asarray(a, dtype=np.int64) % self.q
        two = self.from_scalar(2)
        # u_{k+1} = u_k (2 - a u_k) doubles p-adic precision each step.
        prec = 1
        while prec < self.M:
            u = self.conv(u, (two - self.conv(a, u)) % self.q)
            prec *= 2
        assert np.array_equal(self.conv(a, u), self.one())
        return u

    def from_scalar(self, c: int) -> np.ndarray:
        e = self.zero()
        e[0] = c % self.q
        return e

    def _unit_poly_inverse(self, a: np.ndarray) -> np.ndarray | None:
        """Inverse of a modulo (p, x^m - 1), or None if not coprime."""
        p, m = self.p, self.m
        a = [int(c) % p for c in np.asarray(a).tolist()]
        mod = [0] * (m + 1)
        mod[0], mod[m] = -1 % p, 1  # x^m - 1

        def polydivmod(f, g):
            f = f[:]
            g = g[:]
            while g and g[-1] == 0:
                g.pop()
            dg = len(g) - 1
            inv_lead = pow(g[-1], -1, p)
            quo = [0] * max(1, len(f) - dg)
            while len(f) - 1 >= dg and any(f):
                while f and f[-1] == 0:
                    f.pop()
                if len(f) - 1 < dg:
                    break
                k = len(f) - 1 - dg
                c = f[-1] * inv_lead % p
                quo[k] = c
                for i, gc in enumerate(g):
                    f[i + k] = (f[i + k] - c * gc) % p
            while f and f[-1] == 0:
                f.pop()
            return quo, f

        # Extended Euclid in F_p[x] for (a, x^m - 1).
        r0, r1 = mod, a
        s0, s1 = [0], [1]
        while any(r1):
            quo, rem = polydivmod(r0, r1)
            r0, r1 = r1, rem
            # s_new = s0 - quo * s1
            prod = [0] * (len(quo) + len(s1))
            for i, qc in enumerate(quo):
                if qc:
                    for jj, sc in enumerate(s1):
                        prod[i + jj] = (prod[i + jj] + qc * sc) % p
            new = [(x - y) % p for x, y in zip(s0 + [0] * len(prod), prod + [0] * len(s0))]
            while len(new) > 1 and new[-1] == 0:
                new.pop()
            s0, s1 = s1, new
        while r0 and r0[-1] == 0:
            r0.pop()
        if len(r0) != 1 or r0[0] == 0:
            return None
        c = pow(r0[0], -1, p)
        inv = np.zeros(m, dtype=np.int64)
        for i, sc in enumerate(s0):
            inv[i % m] = (inv[i % m] + c * sc) % p
        return inv % self.q


def zeta_element(U: UnitGroup, gr: GroupRing) -> np.ndarray:
    """The Eisenstein zeta element sum_x B2(x/N) [x] of Lambda.

    Exact p-integral form: coefficients are sums of 6x^2 - 6Nx + N^2
    over the classes dlog(x) mod m, times the unit inverse of 6N^2.
    Its augmentation is (1-N)/(6N).
    """
    N = U.N
    q = gr.q
    coeffs = np.zeros(gr.m, dtype=np.int64)
    for x in range(1, N):
        coeffs[U.dlog(x) % gr.m] += 6 * x * x - 6 * N * x + N * N
    coeffs = coeffs * inv_mod(6 * N * N, q) % q
    expect = (1 - N) * inv_mod(6 * N, q) % q
    assert gr.aug(coeffs) == expect, "zeta augmentation must be (1-N)/(6N)"
    return coeffs


def ideal_rows(gr: GroupRing, elems: list[np.ndarray]) -> np.ndarray:
    """Generating rows (over Z/q) of the Lambda-ideal the elements span."""
    if not elems:
        return np.zeros((0, gr.m), dtype=np.int64)
    return np.vstack([gr.circulant(e) for e in elems])


def quotient_exponents(gr: GroupRing, elems: list[np.ndarray]) -> list[int]:
    """Elementary-divisor exponents of Lambda / (elems)."""
    return snf_exponents(ideal_rows(gr, elems), gr.p, gr.M, ncols=gr.m)


class LambdaSpan:
    """Lambda-submodule of Lambda^k maintained as a Gauss-Jordan triangle
    of unit-pivot rows plus a small flat tail.

    m is a power of p, so Lambda is local and a coordinate is a pivot
    candidate exactly when its augmentation is prime to p.  Pivot rows are
    normalized to 1 at their pivot coordinate and kept mutually reduced,
    which makes Lambda^k split as (triangle) (+) (rows vanishing on all
    pivot coordinates); membership therefore reduces through the triangle
    and finishes against the flat echelon of the tail's Lambda-orbits.
    Insertion is O(k m^2) instead of a re-echelon of the whole flat span.
    """

    def __init__(self, gr: GroupRing):
        self.gr = gr
        self.pivots: list[tuple[int, np.ndarray]] = []
        self.tail: list[np.ndarray] = []
        self._tail_ech = None

    def reduce(self, row: np.ndarray) -> np.ndarray:
        gr = self.gr
        r = np.asarray(row, dtype=np.int64).copy() % gr.q
        for j, u in self.pivots:
            c = r[j]
            if c.any():
                r = (r - gr.outer_conv(c[None], u.reshape(-1, gr.m)).reshape(r.shape)) % gr.q
        return r

    def _tail_contains(self, rr: np.ndarray) -> bool:
        if self._tail_ech is None:
            return False
        rem, _ = self._tail_ech.reduce(self.gr.unfold(rr[None]))
        return not rem.any()

    def _rebuild_tail(self):
        gr = self.gr
        if not self.tail:
            self._tail_ech = None
            return
        rows = np.vstack([gr.unfold(t[None]) for t in self.tail])
        self._tail_ech = echelon(rows, gr.p, gr.M)

    def add(self, row: np.ndarray) -> bool:
        """Insert a Lambda-row; returns whether the span grew."""
        gr = self.gr
        rr = self.reduce(row)
        if not rr.any():
            return False
        units = (rr.sum(axis=1) % gr.p) != 0
        if units.any():
            j = int(np.argmax(units))
            u = gr.outer_conv(rr, gr.inv(rr[j])[None]).reshape(rr.shape)
            for i, (j2, v) in enumerate(self.pivots):
                c = v[j]
                if c.any():
                    v = (v - gr.outer_conv(c[None], u).reshape(v.shape)) % gr.q
                    self.pivots[i] = (j2, v)
            if self.tail:
                self.tail = [(t - gr.outer_conv(t[j][None], u).reshape(t.shape)) % gr.q
                             for t in self.tail]
                self.tail = [t for t in self.tail if t.any()]
                self._rebuild_tail()
            self.pivots.append((j, u))
            return True
        if self._tail_contains(rr):
            return False
        self.tail.append(rr)
        self._rebuild_tail()
        return True

    def contains(self, row: np.ndarray) -> bool:
        rr = self.reduce(row)
        return not rr.any() or self._tail_contains(rr)

    def generators(self) -> list[np.ndarray]:
        return [u for _, u in self.pivots] + list(self.tail)

    def same(self, other: "LambdaSpan") -> bool:
        return (all(other.contains(u) for u in self.generators())
                and all(self.contains(u) for u in other.generators()))

    def flat_rows(self) -> np.ndarray:
        gens = self.generators()
        if not gens:
            return np.zeros((0, 0), dtype=np.int64)
        return self.gr.unfold(np.stack(gens))


def peel_quotient_exponents(gr: GroupRing, A: np.ndarray, B: np.ndarray) -> list[int]:
    """Elementary-divisor exponents of span_Lambda(A) / span_Lambda(B).

    A (ga, k, m) and B (gb, k, m) are Lambda-generators of two lattices in
    Lambda^k with span(A) >= span(B); the quotient must be finite.

    If some B-row u has a unit j-th coordinate, Lambda^k = Lambda u (+) W
    with W the vanishing locus of that coordinate, and both lattices split
    off the common free summand Lambda u, so the quotient is unchanged by
    reducing every generator against u and dropping coordinate j.  m is a
    power of p here, so Lambda is local and unit <=> augmentation prime
    to p.  Peeling terminates with a residual on few coordinates, which is
    finished flat; the work is k^3 m^2 instead of (km)^3.
    """
    q = gr.q
    A = np.asarray(A, dtype=np.int64).copy() % q
    B = np.asarray(B, dtype=np.int64).copy() % q
    assert A.ndim == 3 and B.ndim == 3 and A.shape[1:] == B.shape[1:]
    while B.shape[0] and B.shape[1]:
        units = (B.sum(axis=2) % gr.p) != 0  # (gb, k'): unit coordinate mask
        if not units.any():
            break
        r, j = map(int, np.argwhere(units)[0])
        u = B[r]
        ubar = gr.outer_conv(u, gr.inv(u[j])[None]).reshape(-1, gr.m)
        out = []
        for V in (A, B):
            V = (V - gr.outer_conv(V[:, j], ubar)) % q
            assert not V[:, j].any()
            V = np.delete(V, j, axis=1)
            out.append(V[V.any(axis=(1, 2))])
        A, B = out
    if A.shape[1] == 0:
        return []
    ga, k2, m = A.shape
    flat_a = gr.unfold(A)
    flat_b = gr.unfold(B) if B.shape[0] else np.zeros((0, k2 * m), dtype=np.int64)
    return lattice_quotient_exponents(flat_a, flat_b, gr.p, gr.M)


def jadic_layer_lengths(gr: GroupRing, elems: list[np.ndarray], nmax: int) -> list[int]:
    """Lengths of J^n M / J^(n+1) M for M = Lambda/(elems), n = 0..nmax.

    J is the augmentation ideal (x - 1).  Computed as differences of
    lattice lengths of J^n M + (elems) in (Z/q)^m.
    """
    xm1 = (gr.x_power(1) - gr.one()) % gr.q
    base = ideal_rows(gr, elems)
    pow_elem = gr.one()
    lengths = []
    prev = None
    for n in range(nmax + 2):
        rows = np.vstack([gr.circulant(pow_elem), base]) if base.size else gr.circulant(pow_elem)
        cur = lattice_length(rows, gr.p, gr.M)
        if prev is not None:
            lengths.append(prev - cur)
        prev = cur
        pow_elem = gr.conv(pow_elem, xm1)
    return lengths[: nmax + 1]
