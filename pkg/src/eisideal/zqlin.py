"""Exact dense linear algebra over Z/p^M.

Everything is numpy int64, residues in [0, q) with q = p^M.  Matrix
products go through float64 BLAS: a product is computed directly when
every inner sum provably stays below 2^53, and otherwise via a base-2^13
digit split of the left factor (two BLAS calls), with inner-dimension
chunking.  Both paths are exact; there is no floating-point rounding
anywhere because every intermediate is an integer below 2^53.

Row reduction is Howell-style echelon: pivots are chosen with minimal
p-adic valuation (so elimination below a pivot clears entries exactly),
and for every pivot p^v with v > 0 the saturation row p^(M-v) * row is
fed back into the pool.  With saturation rows the pivot rows span every
leading-coefficient tail of the row space, which makes membership
testing by reduction sound over Z/p^M (it is not sound without them).
Column processing is done in panels: inside a panel only the panel
columns are updated eagerly, and each panel ends with a single matrix
product applying all accumulated eliminations to the trailing columns.
That keeps the heavy arithmetic in BLAS.
"""

from __future__ import annotations

import numpy as np

_PANEL = 96


def _as2d(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    assert A.ndim == 2
    return A


def _chunked_f8(A: np.ndarray, B: np.ndarray, per_term: int, q: int) -> np.ndarray:
    """Exact (A @ B) mod q as int64, chunking the inner dimension so every
    float64 partial sum stays below 2^53 (per_term bounds |A_ik * B_kj|)."""
    n = A.shape[1]
    step = max(1, (1 << 53) // max(per_term, 1))
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k0 in range(0, n, step):
        k1 = min(n, k0 + step)
        part = A[:, k0:k1].astype(np.float64) @ B[k0:k1].astype(np.float64)
        out += part.astype(np.int64) % q
    return out % q


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int, M: int) -> np.ndarray:
    """Exact (A @ B) mod p^M via float64 BLAS."""
    q = p**M
    assert q < (1 << 26), f"modulus {q} too large for exact float64 products"
    A = _as2d(A) % q
    B = _as2d(B) % q
    n = A.shape[1]
    assert B.shape[0] == n
    if n == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if (q - 1) * (q - 1) < (1 << 53) // max(n, 1):
        return _chunked_f8(A, B, (q - 1) * (q - 1), q)
    # A = A1 * 2^13 + A0 with A1, A0 < 2^13 (q < 2^26).
    A1, A0 = A >> 13, A & 0x1FFF
    B13 = (B << 13) % q
    bound = (1 << 13) * (q - 1)
    return (_chunked_f8(A1, B13, bound, q) + _chunked_f8(A0, B, bound, q)) % q


class PreparedMul:
    """Repeated exact products A @ B against a fixed right factor B.

    matmul_mod splits and converts B on every call; when the same B is hit
    by hundreds of left factors (Hecke images against a substitution map)
    that conversion dominates, so it is done once here.  The branch logic
    mirrors matmul_mod exactly."""

    def __init__(self, B: np.ndarray, p: int, M: int):
        q = p**M
        assert q < (1 << 26), f"modulus {q} too large for exact float64 products"
        B = _as2d(B) % q
        self.p, self.M, self.q = p, M, q
        self.n, self.cols = B.shape
        self.split = not ((q - 1) * (q - 1) < (1 << 53) // max(self.n, 1))
        if self.split:
            self._hi = ((B << 13) % q).astype(np.float64)
            self._lo = B.astype(np.float64)
            self._per_term = (1 << 13) * (q - 1)
        else:
            self._lo = B.astype(np.float64)
            self._per_term = (q - 1) * (q - 1)

    def _acc(self, A: np.ndarray, Bf: np.ndarray) -> np.ndarray:
        step = max(1, (1 << 53) // max(self._per_term, 1))
        out = np.zeros((A.shape[0], self.cols), dtype=np.int64)
        for k0 in range(0, self.n, step):
            k1 = min(self.n, k0 + step)
            part = A[:, k0:k1].astype(np.float64) @ Bf[k0:k1]
            out += part.astype(np.int64) % self.q
        return out % self.q

    def matmul(self, A: np.ndarray) -> np.ndarray:
        A = _as2d(A) % self.q
        assert A.shape[1] == self.n
        if self.n == 0:
            return np.zeros((A.shape[0], self.cols), dtype=np.int64)
        if not self.split:
            return self._acc(A, self._lo)
        return (self._acc(A >> 13, self._hi) + self._acc(A & 0x1FFF, self._lo)) % self.q


def vals_of(x: np.ndarray, p: int, M: int) -> np.ndarray:
    """Elementwise p-adic valuation of residues, with val(0) = M."""
    x = np.asarray(x, dtype=np.int64)
    v = np.full(x.shape, M, dtype=np.int64)
    y = x.copy()
    for k in range(M):
        fresh = (v == M) & (y % p != 0)
        v[fresh] = k
        y //= p
    return v


class Echelon:
    """Result of row reduction: pivot rows plus leftover (zero-part) rows.

    rows:     (npiv, C) pivot rows sorted by pivot column; row k has the
              exact pivot p^{v_k} at column j_k (strictly increasing j_k)
              and zeros left of it.
    pivots:   list of (col, val) in increasing col order.
    leftover: rows whose first `ncols` entries reduced to zero; their
              tails beyond ncols generate kernels when augmented.
    """

    def __init__(self, rows, pivots, leftover, p, M, ncols):
        self.rows = rows
        self.pivots = pivots
        self.leftover = leftover
        self.p = p
        self.M = M
        self.ncols = ncols

    @property
    def length(self) -> int:
        """Length (= log_p of the size) of the lattice the rows span."""
        return sum(self.M - v for _, v in self.pivots)

    def reduce(self, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reduce rows of B against the pivot rows.

        Returns (remainder, coeffs) with B = coeffs @ rows + remainder.
        Because saturation rows are among the pivot rows, remainder == 0
        is equivalent to membership of every row of B in the row span.
        """
        p, M, q = self.p, self.M, self.p**self.M
        B = _as2d(B) % q
        R = B.shape[0]
        npiv = len(self.pivots)
        coeffs = np.zeros((R, npiv), dtype=np.int64)
        if npiv == 0 or R == 0:
            return B.copy(), coeffs
        W = B.copy()
        for k0 in range(0, npiv, _PANEL):
            k1 = min(npiv, k0 + _PANEL)
            j0 = self.pivots[k0][0]
            j1 = self.pivots[k1][0] if k1 < npiv else W.shape[1]
            slab = W[:, j0:j1]
            piv_slab = self.rows[k0:k1, j0:j1]
            F = np.zeros((R, k1 - k0), dtype=np.int64)
            for k in range(k0, k1):
                j, v = self.pivots[k]
                f = (slab[:, j - j0] // (p**v)) % q
                F[:, k - k0] = f
                if f.any():
                    slab -= np.outer(f, piv_slab[k - k0])
                    slab %= q
            coeffs[:, k0:k1] = F
            if j1 < W.shape[1] and F.any():
                W[:, j1:] = (W[:, j1:] - matmul_mod(F, self.rows[k0:k1, j1:], p, M)) % q
            W[:, j0:j1] = slab % q
        return W, coeffs


def echelon(A: np.ndarray, p: int, M: int, ncols: int | None = None) -> Echelon:
    """Howell-style echelon form of the row space of A.

    Only columns [0, ncols) are pivot candidates; trailing columns (e.g.
    an augmented identity) ride along.  Saturation rows are generated and
    processed, so the pivot rows carry the full span property.
    """
    q = p**M
    A = _as2d(A) % q
    R, C = A.shape
    if ncols is None:
        ncols = C
    cap = R + min(R, ncols) + ncols + 1
    W = np.zeros((cap, C), dtype=np.int64)
    W[:R] = A
    used = R
    in_pool = np.zeros(cap, dtype=bool)
    in_pool[:R] = True
    piv_rows: list[int] = []
    pivots: list[tuple[int, int]] = []

    j = 0
    while j < ncols:
        j1 = min(ncols, j + _PANEL)
        # Panel [j, j1): slab columns are updated eagerly; trailing-column
        # eliminations are recorded in F and applied once per panel.
        F: dict[int, np.ndarray] = {}
        panel_pivs: list[int] = []
        while True:
            pool = np.nonzero(in_pool[:used])[0]
            col = None
            if len(pool):
                for jj in range(j, j1):
                    if W[pool, jj].any():
                        col = jj
                        break
            if col is None:
                break
            vv = vals_of(W[pool, col], p, M)
            r = int(pool[np.argmin(vv)])
            v = int(vv.min())
            # Materialize the trailing part of the chosen pivot row.
            fr = F.pop(r, None)
            if fr is not None and fr.any() and j1 < C:
                prev = W[panel_pivs[: len(fr)]][:, j1:]
                W[r, j1:] = (W[r, j1:] - matmul_mod(fr.reshape(1, -1), prev, p, M)[0]) % q
            u = int(W[r, col]) // p**v
            W[r] = W[r] * pow(u, -1, q) % q
            in_pool[r] = False
            # Clear column `col` in the pool (exact: v is minimal there).
            pool = np.nonzero(in_pool[:used])[0]
            if len(pool):
                f = (W[pool, col] // p**v) % q
                nz = f != 0
                if nz.any():
                    rows_nz = pool[nz]
                    block = np.ix_(rows_nz, np.arange(j, j1))
                    W[block] = (W[block] - np.outer(f[nz], W[r, j:j1])) % q
                    for rr, ff in zip(rows_nz, f[nz]):
                        old = F.get(int(rr))
                        new = np.zeros(len(panel_pivs) + 1, dtype=np.int64)
                        if old is not None:
                            new[: len(old)] = old
                        new[len(panel_pivs)] = ff
                        F[int(rr)] = new
            panel_pivs.append(r)
            piv_rows.append(r)
            pivots.append((col, v))
            if v > 0:
                sat = W[r] * p ** (M - v) % q
                if sat.any():
                    if used == cap:
                        W = np.vstack([W, np.zeros((cap, C), dtype=np.int64)])
                        in_pool = np.concatenate([in_pool, np.zeros(cap, dtype=bool)])
                        cap *= 2
                    W[used] = sat
                    in_pool[used] = True
                    used += 1
        if F and j1 < C:
            rows_f = sorted(F)
            K = len(panel_pivs)
            Fm = np.zeros((len(rows_f), K), dtype=np.int64)
            for i, rr in enumerate(rows_f):
                Fm[i, : len(F[rr])] = F[rr]
            if Fm.any():
                block = np.ix_(rows_f, np.arange(j1, C))
                W[block] = (W[block] - matmul_mod(Fm, W[panel_pivs][:, j1:], p, M)) % q
        j = j1

    order = np.argsort([c for c, _ in pivots], kind="stable")
    rows = W[piv_rows][order] if piv_rows else np.zeros((0, C), dtype=np.int64)
    pivots = [pivots[i] for i in order]
    pool = np.nonzero(in_pool[:used])[0]
    leftover = W[pool]
    leftover = leftover[leftover.any(axis=1)]
    assert not leftover[:, :ncols].any(), "pool rows must vanish on pivot columns"
    return Echelon(rows, pivots, leftover, p, M, ncols)


def kernel(A: np.ndarray, p: int, M: int) -> np.ndarray:
    """Rows spanning {x : x @ A = 0 mod p^M}."""
    q = p**M
    A = _as2d(A)
    R, C = A.shape
    aug = np.concatenate([A % q, np.eye(R, dtype=np.int64)], axis=1)
    E = echelon(aug, p, M, ncols=C)
    return E.leftover[:, C:] % q


def solve(A: np.ndarray, B: np.ndarray, p: int, M: int) -> np.ndarray | None:
    """X with X @ A = B mod p^M, or None if no solution exists."""
    q = p**M
    A = _as2d(A)
    B = _as2d(B)
    R, C = A.shape
    assert B.shape[1] == C
    aug = np.concatenate([A % q, np.eye(R, dtype=np.int64)], axis=1)
    E = echelon(aug, p, M, ncols=C)
    Baug = np.concatenate([B % q, np.zeros((B.shape[0], R), dtype=np.int64)], axis=1)
    rem, _ = E.reduce(Baug)
    if rem[:, :C].any():
        return None
    return (-rem[:, C:]) % q


class Solver:
    """Prebuilt solver for X @ A = B with a fixed A and many right sides.

    Equivalent to solve(A, B, p, M) per call, but the augmented echelon of
    A is computed once."""

    def __init__(self, A: np.ndarray, p: int, M: int):
        self.p, self.M, self.q = p, M, p**M
        A = _as2d(A) % self.q
        self.nrows, self.ncols = A.shape
        aug = np.concatenate([A, np.eye(self.nrows, dtype=np.int64)], axis=1)
        self._E = echelon(aug, p, M, ncols=self.ncols)

    def solve(self, B: np.ndarray) -> np.ndarray | None:
        B = _as2d(B) % self.q
        assert B.shape[1] == self.ncols
        Baug = np.concatenate(
            [B, np.zeros((B.shape[0], self.nrows), dtype=np.int64)], axis=1
        )
        rem, _ = self._E.reduce(Baug)
        if rem[:, : self.ncols].any():
            return None
        return (-rem[:, self.ncols :]) % self.q


def span_contains(A: np.ndarray, B: np.ndarray, p: int, M: int) -> bool:
    """Whether every row of B lies in the row span of A over Z/p^M."""
    E = echelon(A, p, M)
    rem, _ = E.reduce(_as2d(B))
    return not rem.any()


def span_equal(A: np.ndarray, B: np.ndarray, p: int, M: int) -> bool:
    EA = echelon(A, p, M)
    EB = echelon(B, p, M)
    if EA.length != EB.length:
        return False
    rem, _ = EA.reduce(EB.rows)
    return not rem.any()


def lattice_length(A: np.ndarray, p: int, M: int) -> int:
    """log_p of the size of the row-span lattice of A in (Z/p^M)^C."""
    return echelon(A, p, M).length


def lattice_quotient_exponents(A: np.ndarray, B: np.ndarray, p: int, M: int) -> list[int]:
    """Elementary-divisor exponents of span(A)/span(B), for span(B) inside
    span(A); asserts the containment.

    span(A) is presented on the pivot rows of its echelon (relations =
    syzygies among them); quotienting by span(B) adds the coefficient rows
    expressing B in the pivot rows."""
    q = p**M
    A = _as2d(A) % q
    B = _as2d(B) % q
    EA = echelon(A, p, M)
    npiv = len(EA.pivots)
    if npiv == 0:
        assert not B.any(), "B is not contained in span(A)"
        return []
    rem, coeffs = EA.reduce(B)
    assert not rem.any(), "B is not contained in span(A)"
    syz = kernel(EA.rows, p, M)
    stacked = np.vstack([syz, coeffs]) if coeffs.size else syz
    return snf_exponents(stacked, p, M, ncols=npiv)


def preimage_kernel(T: np.ndarray, S: np.ndarray, p: int, M: int) -> np.ndarray:
    """Rows spanning {x : x @ T in span(S)} over Z/p^M."""
    T = _as2d(T)
    S = _as2d(S)
    if S.shape[0] == 0:
        return kernel(T, p, M)
    assert S.shape[1] == T.shape[1]
    K = kernel(np.vstack([T, S]), p, M)
    return K[:, : T.shape[0]]


def lattice_intersect(A: np.ndarray, B: np.ndarray, p: int, M: int) -> np.ndarray:
    """Rows spanning span(A) & span(B) over Z/p^M."""
    q = p**M
    A = _as2d(A) % q
    B = _as2d(B) % q
    assert A.shape[1] == B.shape[1]
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    K = kernel(np.vstack([A, (-B) % q]), p, M)
    return matmul_mod(K[:, : A.shape[0]], A, p, M)


def _small_snf_exponents(A: np.ndarray, p: int, M: int) -> list[int]:
    """Cokernel exponents by direct SNF with minimal-valuation pivoting.

    A diagonal entry p^v leaves Z/p^M / (p^v) = Z/p^v, so it contributes
    exponent val(d); a generator left without a relation contributes M.
    Exponent-0 entries are dropped.  Quadratic per pivot, so callers
    keep A small.
    """
    q = p**M
    W = _as2d(A).copy() % q
    R, C = W.shape
    exps: list[int] = []
    live_rows = list(range(R))
    live_cols = list(range(C))
    while live_rows and live_cols:
        sub = W[np.ix_(live_rows, live_cols)]
        if not sub.any():
            break
        vv = vals_of(sub, p, M)
        i, jj = np.unravel_index(np.argmin(vv), vv.shape)
        v = int(vv[i, jj])
        r, c = live_rows[int(i)], live_cols[int(jj)]
        u = int(W[r, c]) // p**v
        W[r, live_cols] = W[r, live_cols] * pow(u, -1, q) % q
        for rr in live_rows:
            if rr != r and W[rr, c]:
                f = int(W[rr, c]) // p**v
                W[rr, live_cols] = (W[rr, live_cols] - f * W[r, live_cols]) % q
        for cc in live_cols:
            if cc != c and W[r, cc]:
                f = int(W[r, cc]) // p**v
                W[live_rows, cc] = (W[live_rows, cc] - f * W[live_rows, c]) % q
        live_rows.remove(r)
        live_cols.remove(c)
        if v > 0:
            exps.append(v)
    exps.extend([M] * len(live_cols))
    return sorted(exps, reverse=True)


def snf_exponents(A: np.ndarray, p: int, M: int, ncols: int | None = None) -> list[int]:
    """Elementary-divisor exponents of coker((Z/p^M)^ncols / rowspan A).

    Sorted descending, zeros dropped; a generator with no relation
    contributes exponent M (free at this precision).  Unit pivots are
    eliminated first by a Schur complement (each removes one generator
    and one relation exactly), leaving a small core for the SNF loop.
    """
    q = p**M
    A = _as2d(A) % q
    if ncols is None:
        ncols = A.shape[1]
    A = A[:, :ncols]
    if A.shape[0] == 0 or ncols == 0 or not A.any():
        return [M] * ncols
    E = echelon(A, p, M)
    unit_idx = [k for k, (_, v) in enumerate(E.pivots) if v == 0]
    rest_idx = [k for k, (_, v) in enumerate(E.pivots) if v > 0]
    if unit_idx:
        u_cols = np.array([E.pivots[k][0] for k in unit_idx], dtype=np.int64)
        v_cols = np.setdiff1d(np.arange(ncols), u_cols)
        A_blk = E.rows[np.ix_(unit_idx, u_cols)]
        B_blk = E.rows[np.ix_(unit_idx, v_cols)]
        if rest_idx:
            C_blk = E.rows[np.ix_(rest_idx, u_cols)]
            D_blk = E.rows[np.ix_(rest_idx, v_cols)]
            Y = solve(A_blk, C_blk, p, M)
            assert Y is not None, "unit-pivot block must be invertible"
            core = (D_blk - matmul_mod(Y, B_blk, p, M)) % q
        else:
            core = np.zeros((0, len(v_cols)), dtype=np.int64)
    else:
        v_cols = np.arange(ncols)
        core = E.rows
    if not core.size:
        return [M] * len(v_cols)
    assert core.shape[0] <= 512, "snf core unexpectedly large; reduce the presentation first"
    return _small_snf_exponents(core, p, M)
