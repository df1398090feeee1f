"""Presented modules over a group ring Lambda = Z/p^M [x]/(x^m - 1).

A presentation is Lambda^C / (row span of a relation tensor of shape
(R, C, m)).  Reduction eliminates generators at unit pivots: a relation
row with a unit entry at column c rewrites e_c in terms of the other
generators, deleting one row and one generator.  The substitution map
phi (C, k, m) expresses the original generators in the surviving ones,
so anything defined on the original generators (Hecke images, boundary,
degeneracy) transports by one Lambda-matrix product.

Relations that never acquire a unit entry stay as the stuck block; all
finite invariants are computed from its unfolded Z/q form, which is
small precisely because the unit phase removed everything removable.
"""

from __future__ import annotations

import numpy as np

from .groupring import GroupRing
from .zqlin import matmul_mod, snf_exponents, span_contains


class Presentation:
    """Lambda^C modulo the row span of rel (R, C, m)."""

    def __init__(self, gr: GroupRing, rel: np.ndarray, ngens: int):
        rel = np.asarray(rel, dtype=np.int64) % gr.q
        assert rel.ndim == 3 and rel.shape[1] == ngens and rel.shape[2] == gr.m
        self.gr = gr
        self.rel = rel
        self.ngens = ngens

    def reduce(self) -> "Reduced":
        gr = self.gr
        q = gr.q
        rel = self.rel.copy()
        R, C, m = rel.shape
        alive_row = np.ones(R, dtype=bool)
        alive_col = np.ones(C, dtype=bool)
        # (col, expression-over-then-alive-cols) in elimination order.
        steps: list[tuple[int, np.ndarray]] = []

        def find_pivot():
            # Prefer sparse rows; a unit needs unit augmentation, and in the
            # local case (m a p-power) that is also sufficient.
            local = _is_p_power(m, gr.p)
            rows = np.nonzero(alive_row)[0]
            if not len(rows):
                return None
            sub = rel[rows][:, alive_col]
            nz = (sub % q).any(axis=2)
            counts = nz.sum(axis=1)
            order = np.argsort(counts, kind="stable")
            augs = sub.sum(axis=2) % q % gr.p
            cols = np.nonzero(alive_col)[0]
            for i in order:
                if counts[i] == 0:
                    continue
                for jj in np.nonzero(nz[i] & (augs[i] != 0))[0]:
                    if local or gr.is_unit(sub[i, jj]):
                        return int(rows[i]), int(cols[jj])
            return None

        while True:
            hit = find_pivot()
            if hit is None:
                break
            r, c = hit
            inv = gr.inv(rel[r, c])
            row = gr.outer_conv(inv.reshape(1, -1), rel[r].reshape(C, m))[0]  # inv * row
            row[c] = 0
            row %= q
            # e_c = -row (over the other generators)
            alive_row[r] = False
            alive_col[c] = False
            steps.append((c, (-row) % q))
            rows = np.nonzero(alive_row)[0]
            if len(rows):
                f = rel[rows, c]  # (n, m)
                nzr = (f % q).any(axis=1)
                if nzr.any():
                    tgt = rows[nzr]
                    upd = gr.outer_conv(f[nzr], row.reshape(C, m))  # (n, C, m)
                    rel[tgt] = (rel[tgt] - upd) % q
            # row had its pivot entry removed, so subtracting upd leaves the
            # factors sitting in column c; the pivot is exactly 1, so they
            # cancel against it identically.
            rel[:, c, :] = 0

        kept = np.nonzero(alive_col)[0]
        k = len(kept)
        # Back-substitute to express every original generator in the kept ones.
        phi = np.zeros((C, k, m), dtype=np.int64)
        for j, c in enumerate(kept):
            phi[c, j, 0] = 1
        for c, expr in reversed(steps):
            # phi[c] = sum_w expr[w] * phi[w]; expr is sparse, so batch only
            # its nonzero blocks through one product instead of dragging the
            # whole phi tensor through the BLAS once per eliminated column.
            nzw = np.nonzero(expr.any(axis=1))[0]
            if not len(nzw):
                continue
            lhs = phi[nzw].transpose(1, 0, 2).reshape(k, len(nzw) * m)
            rhs = gr.unfold(expr[nzw][:, None, :])
            phi[c] = matmul_mod(lhs, rhs, gr.p, gr.M)
        stuck = self.rel[np.nonzero(alive_row)[0]] if alive_row.any() else self.rel[:0]
        # Stuck rows restricted to kept columns, re-expressed through phi
        # (their eliminated-column entries fold in exactly).
        if stuck.shape[0]:
            rel2 = self.gr.lmatmul(stuck, phi)
        else:
            rel2 = np.zeros((0, k, m), dtype=np.int64)
        red = Reduced(self.gr, self.ngens, kept, rel2, phi)
        if not alive_row.all():
            dead = red.to_coords(self.rel[~alive_row])
            assert not (dead % q).any(), "eliminated relations must map to zero"
        return red


def _is_p_power(m: int, p: int) -> bool:
    while m % p == 0:
        m //= p
    return m == 1


class Reduced:
    """Reduced presentation: Lambda^k / (rel), with phi: Lambda^C -> Lambda^k."""

    def __init__(self, gr: GroupRing, ngens_orig: int, kept, rel: np.ndarray, phi: np.ndarray):
        self.gr = gr
        self.ngens_orig = ngens_orig
        self.kept = np.asarray(kept, dtype=np.int64)
        self.rel = rel
        self.phi = phi

    @property
    def k(self) -> int:
        return len(self.kept)

    def to_coords(self, vecs: np.ndarray) -> np.ndarray:
        """Map vectors over the original generators to reduced coordinates."""
        vecs = np.asarray(vecs, dtype=np.int64)
        single = vecs.ndim == 2
        if single:
            vecs = vecs.reshape(1, *vecs.shape)
        out = self.gr.lmatmul(vecs, self.phi)
        return out[0] if single else out

    def unfolded_relations(self) -> np.ndarray:
        """(r2*m, k*m) Z/q rows spanning the relation lattice."""
        if self.rel.shape[0] == 0:
            return np.zeros((0, self.k * self.gr.m), dtype=np.int64)
        return self.gr.unfold(self.rel)

    def invariants(self, extra: np.ndarray | None = None) -> list[int]:
        """Elementary-divisor exponents of the module (or of the quotient
        by additional Lambda-rows `extra` of shape (n, k, m))."""
        rows = [self.unfolded_relations()]
        if extra is not None and np.asarray(extra).size:
            rows.append(self.gr.unfold(np.asarray(extra, dtype=np.int64)))
        stacked = np.vstack(rows)
        return snf_exponents(stacked, self.gr.p, self.gr.M, ncols=self.k * self.gr.m)

    def transport(self, images: np.ndarray, check: bool = True) -> np.ndarray:
        """Operator given by images (C, C, m) on the original generators ->
        reduced (k, k, m) matrix; optionally assert well-definedness."""
        op = self.gr.lmatmul(images[self.kept], self.phi)
        if check and self.rel.shape[0]:
            moved = self.gr.lmatmul(self.rel, op)
            ok = span_contains(
                self.unfolded_relations(), self.gr.unfold(moved), self.gr.p, self.gr.M
            )
            assert ok, "operator does not preserve the relation span"
        return op

    def operator_well_defined(self, op: np.ndarray) -> bool:
        if self.rel.shape[0] == 0:
            return True
        moved = self.gr.lmatmul(self.rel, op)
        return span_contains(
            self.unfolded_relations(), self.gr.unfold(moved), self.gr.p, self.gr.M
        )

    def with_relations(self, extra: np.ndarray) -> tuple["Reduced", np.ndarray]:
        """Quotient by extra Lambda-rows (n, k, m): returns (new reduced
        presentation over a subset of the k generators, phi2 (k, k2, m))."""
        extra = np.asarray(extra, dtype=np.int64)
        stacked = np.vstack([self.rel, extra]) if self.rel.shape[0] else extra
        red2 = Presentation(self.gr, stacked, self.k).reduce()
        return red2, red2.phi
