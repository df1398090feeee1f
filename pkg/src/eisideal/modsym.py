"""Modular symbol spaces at prime level N with diamond action compressed
into a group ring.

Labels are classes [c, d] of nonzero row vectors over Z/N modulo the
scaling subgroup D of index m in (Z/N)^*.  Every label factors as a
power of x (the fiber twist, x = class of a fixed generator g) times a
base label: affine bases (1, w) for w in Z/N and the infinity base
(0, 1).  The homology relative to the cusps lying over infinity is
presented on the bases with c*d nonzero ("relative" model, N-1
generators); the homology relative to all cusps uses every base
("full" model, N+1 generators).  Relation rows come from the two- and
three-term Manin relations, orbit by orbit, plus one row killing the
base (1, -1) in the relative model.

Conventions, fixed once and used everywhere:
  fiber twist of (c, d) with c != 0 is -dlog(c) mod m, and -dlog(d)
  for (0, d); then the diamond operator <j> acts as multiplication by
  x^{dlog j}.  The boundary sends [c, d] with c*d != 0 to
  [c] - [d] in the cusp module over infinity, identified with Lambda
  via [u] = x^{-dlog u}.  The star involution sends [c, d] to [-c, d],
  which on bases is w -> -w with no twist (D contains -1).
"""

from __future__ import annotations

import numpy as np

from .arith import UnitGroup, inv_mod
from .groupring import GroupRing
from .lmod import Presentation, Reduced
from .zqlin import kernel, lattice_length

_CACHE: dict = {}


def get_space(N: int, p: int, m: int | None = None, M: int | None = None,
              model: str = "relative") -> "ManinSpace":
    U = UnitGroup(N, p)
    if m is None:
        m = U.m
    if M is None:
        M = U.t + 2
    key = (N, p, m, M, model)
    if key not in _CACHE:
        _CACHE[key] = ManinSpace(N, p, m=m, M=M, model=model)
    return _CACHE[key]


def clear_cache() -> None:
    """Drop all cached spaces (long surveys evict between levels)."""
    _CACHE.clear()


class ManinSpace:
    def __init__(self, N: int, p: int, m: int | None = None, M: int | None = None,
                 model: str = "relative"):
        assert model in ("relative", "full")
        self.U = UnitGroup(N, p)
        self.N = N
        self.p = p
        self.m = self.U.m if m is None else m
        self.M = (self.U.t + 2) if M is None else M
        assert (N - 1) % (2 * self.m) == 0, "scaling subgroup must contain -1"
        self.model = model
        self.gr = GroupRing(p, self.M, self.m)

        N_ = N
        if model == "relative":
            self.bases = list(range(1, N_))          # affine w, w != 0
        else:
            self.bases = list(range(N_)) + [N_]      # affine w and infinity (id N)
        self.bidx = {b: i for i, b in enumerate(self.bases)}
        self.ngens = len(self.bases)

        rows = self._relation_rows()
        self.rel = np.stack(rows) if rows else np.zeros((0, self.ngens, self.m), dtype=np.int64)
        self.red: Reduced = Presentation(self.gr, self.rel, self.ngens).reduce()

        self.boundary_gens = self._boundary_rows()           # (C, w, m)
        dead = self.gr.lmatmul(self.rel, self.boundary_gens)
        assert not (dead % self.gr.q).any(), "relations must have zero boundary"
        self.boundary_red = self.boundary_gens[self.red.kept]
        # phi must also transport the boundary consistently.
        via_phi = self.gr.lmatmul(self.red.phi, self.boundary_red)
        assert ((via_phi - self.boundary_gens) % self.gr.q == 0).all()

        self.star_red = self.red.transport(self._star_images(), check=True)

    # ---- label bookkeeping -------------------------------------------------

    def _fib(self, c: int) -> int:
        return (-self.U.dlog(c)) % self.m

    def label(self, u: int, v: int) -> tuple[int, int]:
        """(base id, fiber twist) of the class [u, v]."""
        N = self.N
        u %= N
        v %= N
        assert (u, v) != (0, 0)
        if u != 0:
            return (v * inv_mod(u, N)) % N, self._fib(u)
        return N, self._fib(v)

    def label_vector(self, u: int, v: int) -> np.ndarray:
        b, f = self.label(u, v)
        assert b in self.bidx, "label lies outside this model's generators"
        vec = np.zeros((self.ngens, self.m), dtype=np.int64)
        vec[self.bidx[b], f] = 1
        return vec

    def xi(self, u: int, v: int) -> np.ndarray:
        """Reduced coordinates of the symbol class [u, v]."""
        b, f = self.label(u, v)
        assert b in self.bidx
        return self._shift(self.red.phi[self.bidx[b]], f)

    def _shift(self, vec: np.ndarray, s: int) -> np.ndarray:
        return np.roll(vec, s % self.m, axis=-1)

    # ---- relations ---------------------------------------------------------

    def _sigma_step(self, b):
        # image data of the fiber-0 generator at base b under the 2-term move
        N = self.N
        if b == N:                       # (0,1) -> (1,0)
            return 0, 0
        if b == 0:                       # (1,0) -> (0,-1)
            return N, self._fib(N - 1)
        w2 = (-inv_mod(b, N)) % N        # (1,w) -> (w,-1) ~ x^{-dlog w} (1, -1/w)
        return w2, self._fib(b)

    def _tau_step(self, b):
        N = self.N
        if b == N:                       # (0,1) -> (1,-1)
            return N - 1, 0
        if b == 0:                       # (1,0) -> (0,-1)
            return N, self._fib(N - 1)
        if b == N - 1:                   # (1,-1) -> (-1,0) ~ (1,0)
            return 0, self._fib(N - 1)
        w2 = (-(1 + b) * inv_mod(b, N)) % N
        return w2, self._fib(b)

    def _orbit_rows(self, subset, step, order):
        seen = set()
        rows = []
        for b0 in subset:
            if b0 in seen:
                continue
            row = np.zeros((self.ngens, self.m), dtype=np.int64)
            b, t = b0, 0
            for _ in range(order):
                seen.add(b)
                row[self.bidx[b], t % self.m] += 1
                b2, a = step(b)
                b, t = b2, t + a
            assert b == b0 and t % self.m == 0, "orbit walk must close up"
            rows.append(row)
        return rows

    def _relation_rows(self):
        N = self.N
        if self.model == "relative":
            rows = self._orbit_rows(range(1, N), self._sigma_step, 2)
            rows += self._orbit_rows([w for w in range(1, N - 1)], self._tau_step, 3)
            kill = np.zeros((self.ngens, self.m), dtype=np.int64)
            kill[self.bidx[N - 1], 0] = 1
            rows.append(kill)
        else:
            rows = self._orbit_rows(self.bases, self._sigma_step, 2)
            rows += self._orbit_rows(self.bases, self._tau_step, 3)
        return rows

    # ---- boundary, star, plus ----------------------------------------------

    def _boundary_rows(self) -> np.ndarray:
        """Boundary of each generator; width 1 (cusps over infinity) in the
        relative model, width 2 (over infinity, over zero) in the full one."""
        N = self.N
        width = 1 if self.model == "relative" else 2
        out = np.zeros((self.ngens, width, self.m), dtype=np.int64)
        q = self.gr.q
        for i, b in enumerate(self.bases):
            if b == N:                   # [0,1]: [1]_0 - [1]_inf
                out[i, 0, 0] = q - 1
                out[i, 1, 0] = 1
            elif b == 0:                 # [1,0]: [1]_inf - [1]_0
                out[i, 0, 0] = 1
                out[i, 1, 0] = q - 1
            else:                        # [1,w]: [1]_inf - [w]_inf
                out[i, 0, 0] += 1
                out[i, 0, self._fib(b)] += q - 1
        return out % q

    def _star_images(self) -> np.ndarray:
        images = np.zeros((self.ngens, self.ngens, self.m), dtype=np.int64)
        for i, b in enumerate(self.bases):
            b2 = b if b in (0, self.N) else self.N - b
            images[i, self.bidx[b2], 0] = 1
        return images

    def plus(self) -> "PlusSpace":
        # cached: downstream operator registries key on the object identity
        if getattr(self, "_plus", None) is None:
            k, m = self.red.k, self.m
            ident = np.zeros((k, k, m), dtype=np.int64)
            for i in range(k):
                ident[i, i, 0] = 1
            extra = (ident - self.star_red) % self.gr.q
            red2, _ = self.red.with_relations(extra)
            self._plus = PlusSpace(self, red2)
        return self._plus

    # ---- operators ----------------------------------------------------------

    def diamond_poly(self, j: int) -> np.ndarray:
        return self.gr.x_power(self.U.dlog(j) % self.m)

    def scalar_op(self, lam: np.ndarray, k: int | None = None) -> np.ndarray:
        k = self.red.k if k is None else k
        op = np.zeros((k, k, self.m), dtype=np.int64)
        for i in range(k):
            op[i, i] = lam
        return op

    def fold_matrix(self, other: "ManinSpace") -> np.ndarray:
        """Z/q matrix (k*m, k2*m2) of the level-lowering map onto a space
        with m2 | m: same labels, fibers pushed forward along x -> x."""
        assert other.N == self.N and other.p == self.p and other.M == self.M
        assert other.model == self.model and self.m % other.m == 0
        k, m, m2 = self.red.k, self.m, other.m
        k2 = other.red.k
        F = np.zeros((k, m, k2 * m2), dtype=np.int64)
        for j, c in enumerate(self.red.kept):
            base = self.bases[c]
            img = other.red.phi[other.bidx[base]]          # (k2, m2)
            for s in range(m):
                F[j, s] = np.roll(img, s % m2, axis=-1).reshape(k2 * m2)
        return F.reshape(k * m, k2 * m2)

    # ---- lattices and numerics ----------------------------------------------

    def absolute_lattice(self) -> np.ndarray:
        """Rows spanning the kernel of the boundary in unfolded reduced
        coordinates (contains the relation lattice)."""
        D = self.gr.unfold(self.boundary_red)
        return kernel(D, self.p, self.M)

    def relation_lattice(self) -> np.ndarray:
        return self.red.unfolded_relations()

    # ---- curve data -----------------------------------------------------------

    def scaling_subgroup(self):
        g = self.U.g
        size = (self.N - 1) // self.m
        return sorted(pow(g, self.m * i, self.N) for i in range(size))

    def genus(self) -> int:
        N, m = self.N, self.m
        D = self.scaling_subgroup()
        mu = (N + 1) * m
        nu2 = m * sum(1 for lam in D if (lam * lam + 1) % N == 0)
        nu3 = m * sum(1 for lam in D if (lam * lam + lam + 1) % N == 0)
        nuinf = 2 * m
        num = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * nuinf
        assert num % 12 == 0
        return num // 12

    def expected_rank(self) -> int:
        base = 2 * self.genus()
        return base + (self.m - 1 if self.model == "relative" else 2 * self.m - 1)


class PlusSpace:
    """Quotient of the space by (1 - star), with transport helpers."""

    def __init__(self, space: ManinSpace, red: Reduced):
        self.space = space
        self.gr = space.gr
        self.red = red

    @property
    def k(self) -> int:
        return self.red.k

    def from_space_coords(self, vecs: np.ndarray) -> np.ndarray:
        return self.red.to_coords(vecs)

    def xi(self, u: int, v: int) -> np.ndarray:
        one = self.space.xi(u, v).reshape(1, self.space.red.k, self.space.m)
        return self.red.to_coords(one)[0]

    def transport(self, op: np.ndarray, check: bool = True) -> np.ndarray:
        return self.red.transport(op, check=check)

    def invariants(self, extra=None):
        return self.red.invariants(extra=extra)
