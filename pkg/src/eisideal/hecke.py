"""Hecke operators, Hecke algebras, and Eisenstein ideals on plus spaces.

Operators are label-level sums over integral matrix families: the image
of [u, v] is the sum of [(u, v) h] over the family.  Sums are formed in
the full model, where every image label exists, then projected to plus
coordinates; operators on the relative model are pulled back through
its inclusion into the full model, an exact solve because the inclusion
has torsion-free cokernel.  The public heilbronn(ell) family is the
classical determinant-ell set {(a, b; c, d) : a > b >= 0, d > c >= 0};
construction uses a continued-fraction family of the same operator
whose size is linear in ell, which is what keeps Sturm-range generation
cheap.  The two families define identical operators (checked in the
tests), and every constructed operator passes two independent runtime
checks: its cusp eigenvalue factors on both boundary slots, and
well-definedness on the presented quotient.

Raw right multiplication yields the Fricke conjugate of the standard
action, so prime operators away from the level are normalized by the
diamond of the prime: T_ell = <ell> * (raw sum).  After that twist the
infinity-slot boundary factor is ell + <ell> and the zero-slot factor
is 1 + ell <ell>, the Eisenstein coefficient sum_{d | ell} <d> d; T_N
is the raw level sum with vanishing image labels dropped, and its
infinity-slot factor is 1 (the zero-slot factor of T_N is measured, not
asserted).

Algebras and ideal quotients are row lattices over Z/p^M.  At m = 1 the
algebra lives in canonical endomorphism coordinates: operators are
reduced against the relation lattice, so equal flats mean equal maps,
and the span is closed honestly under every generator.  For m > 1 it
lives in probe coordinates w * T for a generator w certified over F_p
to survive at the unique maximal ideal above the Eisenstein ideal;
since the annihilator of w is an ideal of a commutative ring, closing
the probe span under a small multiplier set and then certifying
membership of w * T_ell for every generator up to the bound makes the
span exactly w * T, and every quotient supported at that maximal ideal
computed through w is exact.
"""

from __future__ import annotations

import numpy as np

from .arith import factor, inv_mod, is_prime, primes
from .groupring import GroupRing, LambdaSpan, peel_quotient_exponents
from .modsym import PlusSpace, get_space
from .zqlin import (
    PreparedMul,
    Solver,
    echelon,
    kernel,
    lattice_quotient_exponents,
    matmul_mod,
    snf_exponents,
    solve,
)

_MULTIPLIER_PRIMES = (2, 3, 5, 7)
IDEAL_KINDS = ("I_mazur", "I0_tilde", "I0")


def heilbronn(ell: int) -> np.ndarray:
    """Matrices (a, b; c, d) of determinant ell with a > b >= 0 and
    d > c >= 0, as rows [a, b, c, d].  Defined for primes ell away from
    the level; composite arguments are rejected."""
    assert is_prime(ell), "heilbronn families are indexed by primes"
    return _merel_family(ell)


def _merel_family(n: int) -> np.ndarray:
    # a d - b c = n with a > b >= 0, d > c >= 0 forces a d >= n and
    # (a - b)(d - c) >= 1, hence a + d <= n + 1.
    mats: list[tuple[int, int, int, int]] = []
    for a in range(1, n + 1):
        dmin = -(-n // a)
        for d in range(dmin, n + 2 - a):
            m = a * d - n
            if m == 0:
                mats.extend((a, 0, c, d) for c in range(d))
                mats.extend((a, b, 0, d) for b in range(1, a))
            else:
                for b in range(1, min(a, m + 1)):
                    if m % b == 0 and m // b < d:
                        mats.append((a, b, m // b, d))
    out = np.array(mats, dtype=np.int64)
    assert np.array_equal(out[:, 0] * out[:, 3] - out[:, 1] * out[:, 2], np.full(len(out), n))
    return out


def _cremona_family(ell: int) -> np.ndarray:
    """Continued-fraction family for T_ell, size O(ell)."""
    if ell == 2:
        # nearest-integer rounding is ambiguous at the even prime: the
        # r = -1 branch contributes an orbit that does not cancel, so the
        # determinant-2 family is written out directly
        return np.array([(1, 0, 0, 2), (1, 0, 1, 2), (2, 0, 0, 1), (2, 1, 0, 1)],
                        dtype=np.int64)
    mats = [(1, 0, 0, ell)]
    for r in range(-(ell // 2), ell // 2 + 1):
        x1, x2, y1, y2 = ell, -r, 0, 1
        a, b = -ell, r
        mats.append((x1, x2, y1, y2))
        while b != 0:
            q = (2 * a + b) // (2 * b)
            c = a - b * q
            a, b = -b, c
            x1, x2 = x2, q * x2 - x1
            y1, y2 = y2, q * y2 - y1
            mats.append((x1, x2, y1, y2))
    out = np.array(mats, dtype=np.int64)
    assert np.array_equal(out[:, 0] * out[:, 3] - out[:, 1] * out[:, 2], np.full(len(out), ell))
    return out


def sturm_bound(N: int, m: int) -> int:
    """ceil(index / 6) + 1 for the index-(N+1)m congruence subgroup."""
    return -(-(N + 1) * m // 6) + 1


def absolute_rows(plus: PlusSpace) -> np.ndarray:
    """Rows spanning the kernel of the boundary on a plus space, i.e. the
    homology of the closed curve inside the relative space.  The kernel
    is computed at a precision raised by the depth of the boundary
    cokernel torsion, which is exactly the slack needed to keep modular
    junk out of the reduced rows, then reduced back."""
    sp = plus.space
    gr = sp.gr
    cached = getattr(plus, "_absolute_rows", None)
    if cached is not None:
        return cached
    bd = sp.boundary_red[plus.red.kept] % gr.q
    rel = plus.red.rel
    if rel.size:
        assert not (gr.lmatmul(rel, bd) % gr.q).any(), \
            "boundary must descend to the plus quotient"
    # boundary entries are unit patterns, so they lift exactly
    bd_int = np.where(bd > gr.q // 2, bd - gr.q, bd)
    D = gr.unfold(bd_int % gr.q)
    exps = snf_exponents(D, sp.p, sp.M, D.shape[1])
    slack = max([e for e in exps if e < sp.M], default=0)
    M2 = sp.M + slack
    assert sp.p ** M2 < 2 ** 26, "boundary torsion exceeds the precision budget"
    ints = np.where(D > gr.q // 2, D - gr.q, D)
    K = kernel(ints % sp.p ** M2, sp.p, M2) % gr.q
    rows = [K[(K % gr.q).any(axis=1)]]
    relrows = plus.red.unfolded_relations()
    if relrows.size:
        rows.append(relrows)
    E = echelon(np.vstack(rows) % gr.q, sp.p, sp.M)
    out = E.rows[E.rows.any(axis=1)]
    assert not (matmul_mod(out, D, sp.p, sp.M)).any(), \
        "kernel rows must annihilate the boundary"
    plus._absolute_rows = out
    return out


def _identity_with_rel(plus: PlusSpace) -> np.ndarray:
    # generator tensors of the whole presented module
    k, m = plus.red.k, plus.space.m
    eye = np.zeros((k, k, m), dtype=np.int64)
    eye[np.arange(k), np.arange(k), 0] = 1
    rel = plus.red.rel
    if rel.size:
        return np.concatenate([eye, rel], axis=0)
    return eye


def absolute_generators(plus: PlusSpace) -> np.ndarray | None:
    """Lambda-generator tensors of the boundary kernel, relation rows
    included.  When the boundary lands in a single augmentation-zero
    coordinate it factors through multiplication by x - 1, and the
    kernel has a closed form built from one unit cofactor.  Returns
    None when the presentation does not have that shape; callers fall
    back to the flat kernel."""
    cached = getattr(plus, "_absolute_gens", None)
    if cached is not None:
        return None if cached is False else cached
    out = _absolute_generators_impl(plus)
    plus._absolute_gens = False if out is None else out
    return out


def _absolute_generators_impl(plus: PlusSpace) -> np.ndarray | None:
    sp = plus.space
    gr = sp.gr
    bd = sp.boundary_red[plus.red.kept] % gr.q
    k = plus.red.k
    if sp.m == 1 or bd.shape[1] != 1:
        return None
    # same precision raise as the flat route: torsion depth of the
    # boundary cokernel is the exact slack that keeps junk out mod q
    bd_int = np.where(bd > gr.q // 2, bd - gr.q, bd)
    D = gr.unfold(bd_int % gr.q)
    exps = snf_exponents(D, sp.p, sp.M, D.shape[1])
    slack = max([e for e in exps if e < sp.M], default=0)
    M2 = sp.M + slack
    if sp.p ** M2 >= 2 ** 26:
        return None
    gr2 = GroupRing(sp.p, M2, sp.m)
    d = bd_int.reshape(k, sp.m) % gr2.q
    if any(gr2.aug(d[i]) % gr2.q for i in range(k)):
        return None
    C = gr2.circulant((gr2.x_power(1) - gr2.one()) % gr2.q)
    dprime = solve(C, d, sp.p, M2)
    if dprime is None:
        return None
    augs = np.array([gr2.aug(dprime[i]) % sp.p for i in range(k)])
    units = np.nonzero(augs)[0]
    if not units.size:
        return None
    # ker = {v : sum v_i d'_i in (nu)}; with d'_{i0} a unit this is
    # generated by e_j - d'_j d'_{i0}^{-1} e_{i0} and nu d'_{i0}^{-1} e_{i0}
    i0 = int(units[0])
    dinv = gr2.inv(dprime[i0])
    coef = gr2.outer_conv(dprime, dinv[None]).reshape(k, sp.m)
    gens = np.zeros((k, k, sp.m), dtype=np.int64)
    for i in range(k):
        if i == i0:
            gens[i, i0] = gr2.conv(gr2.nu(), dinv)
        else:
            gens[i, i, 0] = 1
            gens[i, i0] = (-coef[i]) % gr2.q
    gens %= gr.q
    assert not (gr.lmatmul(gens, bd) % gr.q).any(), \
        "kernel generators must annihilate the boundary"
    rel = plus.red.rel
    if rel.size:
        gens = np.concatenate([gens, rel], axis=0)
    return gens


# ---- operator construction ---------------------------------------------------


def _ops(plus: PlusSpace) -> "_Ops":
    ops = getattr(plus, "_hecke_ops", None)
    if ops is None:
        ops = _Ops(plus)
        plus._hecke_ops = ops
    return ops


class _Ops:
    """Per-space operator factory; results are (k, k, m) tensors whose
    row j is the image of the j-th plus generator."""

    def __init__(self, plus: PlusSpace):
        sp = plus.space
        gr = sp.gr
        self.plus = plus
        self.sp = sp
        self.gr = gr
        self.N, self.m, self.q = sp.N, sp.m, gr.q
        self.k = plus.red.k
        self._cache: dict[int, np.ndarray] = {}

        full = sp if sp.model == "full" else get_space(sp.N, sp.p, sp.m, sp.M, "full")
        self.full = full
        fplus = full.plus()
        f2 = fplus.red
        self.kpf = f2.k

        # dlog and inverse tables for vectorized label arithmetic
        self._dlog = sp.U._table
        inv = np.zeros(sp.N, dtype=np.int64)
        inv[1:] = [inv_mod(u, sp.N) for u in range(1, sp.N)]
        self._inv = inv

        # original full-model generators -> full-plus coordinates
        psi = gr.lmatmul(full.red.phi, f2.phi)
        self._proj = PreparedMul(gr.unfold(psi), sp.p, sp.M)

        # boundary on the full plus space, used for the factor checks
        bd = full.boundary_red[f2.kept]
        assert not (gr.lmatmul(f2.rel, bd) % gr.q).any(), \
            "boundary must descend to the plus quotient"
        self._bd_fplus = bd

        kept = [sp.red.kept[c] for c in plus.red.kept]
        bases = np.array([sp.bases[c] for c in kept], dtype=np.int64)
        u = np.where(bases == sp.N, 0, 1)
        v = np.where(bases == sp.N, 1, bases)
        self._reps = np.stack([u, v], axis=1)

        if sp.model == "relative":
            iota = np.zeros((self.k, full.ngens, self.m), dtype=np.int64)
            for j, b in enumerate(bases):
                iota[j, full.bidx[int(b)], 0] = 1
            self._iota = self._to_fplus(iota)
            A = np.vstack([gr.unfold(self._iota), f2.unfolded_relations()])
            self._solver = Solver(A, sp.p, sp.M)
            self._gen_bd = gr.lmatmul(self._iota, bd) % gr.q
        else:
            self._iota = None
            self._solver = None
            self._gen_bd = bd
        self._flats: dict[int, np.ndarray] = {}

    # ---- label-level sums ----------------------------------------------------

    def _label_images(self, fam: np.ndarray, drop_vanishing: bool) -> np.ndarray:
        N, m = self.N, self.m
        u = self._reps[:, :1]
        v = self._reps[:, 1:]
        uu = (u * fam[:, 0] + v * fam[:, 2]) % N
        vv = (u * fam[:, 1] + v * fam[:, 3]) % N
        live = (uu != 0) | (vv != 0)
        if not drop_vanishing:
            assert live.all(), "vanishing labels only occur in the level sum"
        base = np.where(uu != 0, vv * self._inv[uu] % N, N)
        logs = np.where(uu != 0, self._dlog[uu], self._dlog[np.where(vv != 0, vv, 1)])
        fib = (-logs) % m
        out = np.zeros((self.k, N + 1, m), dtype=np.int64)
        rows = np.broadcast_to(np.arange(self.k)[:, None], base.shape)
        np.add.at(out, (rows[live], base[live], fib[live]), 1)
        return out

    def _to_fplus(self, vecs: np.ndarray) -> np.ndarray:
        n = vecs.shape[0]
        return self._proj.matmul(vecs.reshape(n, -1)).reshape(n, self.kpf, self.m)

    # ---- operators -----------------------------------------------------------

    def op(self, n: int) -> np.ndarray:
        n = int(n)
        assert n >= 1
        hit = self._cache.get(n)
        if hit is None:
            if n == 1:
                hit = self.sp.scalar_op(self.gr.one(), k=self.k)
            elif is_prime(n):
                hit = self._prime_op(n)
            else:
                hit = self._composite_op(n)
            self._cache[n] = hit
        return hit

    def _family_op(self, fam: np.ndarray, shift: int, drop_vanishing: bool,
                   fac_inf: np.ndarray | None, fac_zero: np.ndarray | None) -> np.ndarray:
        gr, m = self.gr, self.m
        imgs = self._label_images(fam, drop_vanishing)
        if shift % m:
            imgs = np.roll(imgs, shift % m, axis=-1)
        fimgs = self._to_fplus(imgs)
        got = gr.lmatmul(fimgs, self._bd_fplus) % gr.q
        for slot, fac in ((0, fac_inf), (1, fac_zero)):
            if fac is None:
                continue
            want = matmul_mod(self._gen_bd[:, slot], gr.circulant(fac), self.sp.p, self.sp.M)
            assert np.array_equal(got[:, slot], want), "cusp eigenvalue factor mismatch"
        if self.sp.model == "full":
            out = fimgs
        else:
            X = self._solver.solve(fimgs.reshape(self.k, -1))
            assert X is not None, "operator must preserve the embedded space"
            out = X[:, : self.k * m].reshape(self.k, self.k, m)
        assert self.plus.red.operator_well_defined(out)
        return out

    def _prime_op(self, ell: int) -> np.ndarray:
        gr, q = self.gr, self.q
        if ell == self.N:
            return self._family_op(_merel_family(ell), 0, True, gr.one(), None)
        shift = self.sp.U.dlog(ell) % self.m
        fac_inf = (ell * gr.one() + gr.x_power(shift)) % q
        fac_zero = (gr.one() + ell * gr.x_power(shift)) % q
        return self._family_op(_cremona_family(ell), shift, False, fac_inf, fac_zero)

    def _composite_op(self, n: int) -> np.ndarray:
        gr, q = self.gr, self.q
        fac = factor(n)
        if len(fac) > 1:
            out = None
            for ell, e in sorted(fac.items()):
                piece = self.op(ell ** e)
                out = piece if out is None else gr.lmatmul(out, piece) % q
            return out
        ((ell, e),) = fac.items()
        if ell == self.N:
            return gr.lmatmul(self.op(ell ** (e - 1)), self.op(ell)) % q
        first = gr.lmatmul(self.op(ell), self.op(ell ** (e - 1)))
        lam = (ell * self.sp.diamond_poly(ell)) % q
        return (first - self.scalar_mul(lam, self.op(ell ** (e - 2)))) % q

    def scalar_mul(self, lam: np.ndarray, op: np.ndarray) -> np.ndarray:
        flat = matmul_mod(op.reshape(-1, self.m), self.gr.circulant(lam), self.sp.p, self.sp.M)
        return flat.reshape(op.shape)

    def diamond(self, d: int) -> np.ndarray:
        assert d % self.N != 0, "diamond operators are undefined at the level"
        return self.sp.scalar_op(self.sp.diamond_poly(d), k=self.k)

    def eta(self, ell: int) -> np.ndarray:
        """Eisenstein generator: T_ell - ell <ell> - 1, and T_N - 1."""
        if ell == self.N:
            lam = self.gr.one()
        else:
            lam = (ell * self.sp.diamond_poly(ell) + self.gr.one()) % self.q
        return (self.op(ell) - self.sp.scalar_op(lam, k=self.k)) % self.q

    def flat(self, n: int) -> np.ndarray:
        hit = self._flats.get(n)
        if hit is None:
            hit = self.gr.unfold(self.op(n))
            self._flats[n] = hit
        return hit


def hecke_matrix(plus: PlusSpace, n: int) -> np.ndarray:
    """T_n on a plus space, as a (k, k, m) tensor of generator images.
    Composite indices are assembled by multiplicativity."""
    return _ops(plus).op(n)


def diamond_matrix(plus: PlusSpace, d: int) -> np.ndarray:
    return _ops(plus).diamond(d)


def eisenstein_element(plus: PlusSpace, ell: int) -> np.ndarray:
    return _ops(plus).eta(ell)


# ---- algebras ----------------------------------------------------------------


class HeckeAlgebra:
    """Span of the Hecke action up to a Sturm-type bound, closed under
    multiplication and certified stable when the bound grows."""

    def __init__(self, plus: PlusSpace, bound: int, _cap: int | None = None):
        sp = plus.space
        floor = sturm_bound(sp.N, sp.m)
        assert bound >= floor, f"bound {bound} is below the generation bound {floor}"
        self.plus = plus
        self.bound = bound
        self.ops = _ops(plus)
        self.gr = sp.gr
        self.p, self.M = sp.p, sp.M
        self.gens = [ell for ell in primes(bound) if ell != sp.N] + [sp.N]
        self.mode = "end" if sp.m == 1 else "probe"
        self._cap = _cap if _cap is not None else 4 * plus.red.k * sp.m * sp.M + 64
        for ell in self.gens:
            self.ops.op(ell)
        self._rel_rows = plus.red.unfolded_relations()
        if self.mode == "end":
            self._rel_ech = echelon(self._rel_rows, self.p, self.M)
            self.span = self._close_end(self.gens)
            regen = self._close_end(self._extended_gens())
            assert self._same_span(self.span, regen), "span must be stable past the bound"
        else:
            self.w = self._choose_probe()
            self.multipliers = sorted({ell for ell in _MULTIPLIER_PRIMES if ell in self.gens}
                                      | {sp.N})
            self.span = self._close_probe(self.gens)
            regen = self._close_probe(self._extended_gens())
            assert self._same_span(self.span, regen), "span must be stable past the bound"

    def _extended_gens(self) -> list[int]:
        sp = self.plus.space
        return [ell for ell in primes(self.bound + 5) if ell != sp.N] + [sp.N]

    def _same_span(self, E1, E2) -> bool:
        r1, _ = E1.reduce(E2.rows)
        r2, _ = E2.reduce(E1.rows)
        return not r1.any() and not r2.any()

    # ---- endomorphism coordinates (m == 1) -----------------------------------

    def canon_flat(self, op: np.ndarray) -> np.ndarray:
        """Canonical row of an operator: its unfolded matrix reduced
        against the relation lattice, flattened."""
        rem, _ = self._rel_ech.reduce(self.gr.unfold(op))
        return rem.reshape(1, -1)

    def _close_end(self, gens: list[int]):
        pool = [self.ops.op(1)] + [self.ops.op(ell) for ell in gens]
        gops = [self.ops.op(ell) for ell in gens]
        rows = [self.canon_flat(op) for op in pool]
        E = echelon(np.vstack(rows), self.p, self.M)
        work = list(pool)
        additions = 0
        while work:
            cur = work.pop()
            for g in gops:
                prod = self.gr.lmatmul(cur, g) % self.gr.q
                r = self.canon_flat(prod)
                rem, _ = E.reduce(r)
                if rem.any():
                    additions += 1
                    if additions > self._cap:
                        raise RuntimeError("hecke algebra span failed to close")
                    rows.append(r)
                    E = echelon(np.vstack([E.rows, r]), self.p, self.M)
                    work.append(prod)
        return E

    # ---- probe coordinates (m > 1) --------------------------------------------

    def _collapsed(self, op: np.ndarray) -> np.ndarray:
        # reduction mod (p, augmentation): sum fibers, then mod p
        return op.sum(axis=-1) % self.p

    def _choose_probe(self) -> np.ndarray:
        """Generator surviving at the maximal ideal over the Eisenstein
        ideal, certified by an F_p rank computation."""
        k, m = self.plus.red.k, self.plus.space.m
        blocks = [self._collapsed(self.ops.eta(ell)) for ell in self.gens]
        blocks.append(self.plus.red.rel.sum(axis=-1) % self.p)
        E = echelon(np.vstack(blocks) % self.p, self.p, 1)
        for j in range(k):
            e = np.zeros((1, k), dtype=np.int64)
            e[0, j] = 1
            rem, _ = E.reduce(e)
            if rem.any():
                w = np.zeros((k, m), dtype=np.int64)
                w[j, 0] = 1
                return w
        raise AssertionError("no generator survives at the Eisenstein maximal ideal")

    def _orbit_rows(self, lrow: np.ndarray) -> np.ndarray:
        # Z/q rows of the Lambda-orbit of a (k, m) row
        return self.gr.unfold(lrow[None])

    def probe_row(self, n: int) -> np.ndarray:
        """w * T_n as a flat (1, k*m) row.  Coordinate rows are the
        shift-zero rows of the group-ring presentation, so the product
        happens on (k, m) tensors and never materializes a flat matrix."""
        out = self.gr.lmatmul(self.w[None], self.ops.op(n)) % self.gr.q
        return out.reshape(1, -1)

    def _close_probe(self, gens: list[int]):
        mult_flats = [self.ops.flat(ell) for ell in self.multipliers]
        E = echelon(self._orbit_rows(self.w), self.p, self.M)
        collected = [self.w.copy()]

        def close(seed_flats):
            nonlocal E
            work = list(seed_flats)
            additions = 0
            while work:
                r = work.pop()
                for F in mult_flats:
                    r2 = matmul_mod(r, F, self.p, self.M)
                    rem, _ = E.reduce(r2)
                    if rem.any():
                        additions += 1
                        if additions > self._cap:
                            raise RuntimeError("hecke algebra span failed to close")
                        collected.append(r2.reshape(-1, self.gr.m))
                        orbit = self._orbit_rows(r2.reshape(-1, self.gr.m))
                        E = echelon(np.vstack([E.rows, orbit]), self.p, self.M)
                        work.append(r2)

        close([self.w.reshape(1, -1)])
        # membership certificates for every generator; failures extend the
        # multiplier set, so the closure is exactly w * T
        pending = list(gens)
        while pending:
            ell = pending.pop(0)
            row = self.probe_row(ell)
            rem, _ = E.reduce(row)
            if rem.any():
                self.multipliers = sorted(set(self.multipliers) | {ell})
                mult_flats.append(self.ops.flat(ell))
                collected.append(row.reshape(-1, self.gr.m))
                orbit = self._orbit_rows(row.reshape(-1, self.gr.m))
                E = echelon(np.vstack([E.rows, orbit]), self.p, self.M)
                close([row])
                pending = [x for x in gens if x != ell]
        if not hasattr(self, "_lambda_gens"):
            self._lambda_gens = np.stack(collected)
        return E

    # ---- reported quantities ---------------------------------------------------

    def rank(self) -> int:
        """Z_p-rank of the algebra (endomorphism coordinates only)."""
        assert self.mode == "end"
        return sum(1 for _, v in self.span.pivots if v == 0)

    def is_faithful(self) -> bool:
        """In endomorphism coordinates an element is its action, so the
        annihilator of the space vanishes identically."""
        assert self.mode == "end"
        return True


def hecke_algebra(plus: PlusSpace, bound: int | None = None) -> HeckeAlgebra:
    sp = plus.space
    if bound is None:
        bound = sturm_bound(sp.N, sp.m)
    cache = getattr(plus, "_hecke_algebras", None)
    if cache is None:
        cache = plus._hecke_algebras = {}
    if bound not in cache:
        cache[bound] = HeckeAlgebra(plus, bound)
    return cache[bound]


# ---- Eisenstein ideals --------------------------------------------------------


class EisensteinIdeal:
    """Ideal generated by T_ell - ell <ell> - 1 (ell != N) and T_N - 1
    inside a Hecke algebra, with certified generating subsets."""

    def __init__(self, algebra: HeckeAlgebra, kind: str):
        assert kind in IDEAL_KINDS, f"unknown ideal kind {kind!r}"
        if kind == "I_mazur":
            assert algebra.plus.space.m == 1, "the classical ideal lives at level one"
        self.algebra = algebra
        self.kind = kind
        self.ops = algebra.ops
        self.gens = algebra.gens
        self._eta_flats: dict[int, np.ndarray] = {}
        if algebra.mode == "end":
            self._span, self.S = self._close_end()
            self._cosq = self._cosquare_end()
        else:
            self._span, self.S = self._close_probe()
            self._cosq = self._cosquare_probe()

    def eta_flat(self, ell: int) -> np.ndarray:
        hit = self._eta_flats.get(ell)
        if hit is None:
            hit = self.algebra.gr.unfold(self.ops.eta(ell))
            self._eta_flats[ell] = hit
        return hit

    def _eta_row(self, row: np.ndarray, ell: int) -> np.ndarray:
        # row * eta_ell on (k, m) tensors, avoiding the flat matrix
        gr = self.algebra.gr
        lrow = row.reshape(1, -1, gr.m)
        return (gr.lmatmul(lrow, self.ops.eta(ell)) % gr.q).reshape(1, -1)

    # ---- endomorphism coordinates ---------------------------------------------

    def _close_end(self):
        alg = self.algebra
        p, M, gr = alg.p, alg.M, alg.gr
        etas = [self.ops.eta(ell) for ell in self.gens]
        rows = [alg.canon_flat(op) for op in etas]
        E = echelon(np.vstack(rows), p, M)
        work = list(etas)
        gops = [self.ops.op(ell) for ell in self.gens]
        additions = 0
        while work:
            cur = work.pop()
            for g in gops:
                prod = gr.lmatmul(cur, g) % gr.q
                r = alg.canon_flat(prod)
                rem, _ = E.reduce(r)
                if rem.any():
                    additions += 1
                    if additions > alg._cap:
                        raise RuntimeError("ideal span failed to close")
                    E = echelon(np.vstack([E.rows, r]), p, M)
                    work.append(prod)
        S = self._greedy_module_subset(self.algebra.plus, None)
        return E, S

    def _cosquare_end(self):
        alg = self.algebra
        p, M, gr = alg.p, alg.M, alg.gr
        etas = [self.ops.eta(ell) for ell in self.gens]
        seeds = [gr.lmatmul(a, b) % gr.q for i, a in enumerate(etas) for b in etas[i:]]
        rows = [alg.canon_flat(op) for op in seeds]
        E = echelon(np.vstack(rows), p, M)
        gops = [self.ops.op(ell) for ell in self.gens]
        work = list(seeds)
        additions = 0
        while work:
            cur = work.pop()
            for g in gops:
                prod = gr.lmatmul(cur, g) % gr.q
                r = alg.canon_flat(prod)
                rem, _ = E.reduce(r)
                if rem.any():
                    additions += 1
                    if additions > alg._cap:
                        raise RuntimeError("ideal square span failed to close")
                    E = echelon(np.vstack([E.rows, r]), p, M)
                    work.append(prod)
        return E

    # ---- probe coordinates ------------------------------------------------------

    def _probe_close(self, seeds: list[np.ndarray]):
        alg = self.algebra
        p, M, gr = alg.p, alg.M, alg.gr
        mult_flats = [self.ops.flat(ell) for ell in alg.multipliers]
        span = LambdaSpan(gr)
        gens_rows: list[np.ndarray] = []
        work: list[np.ndarray] = []
        for s in seeds:
            t = s.reshape(-1, gr.m)
            if span.add(t):
                gens_rows.append(t)
                work.append(s.reshape(1, -1))
        additions = 0
        while work:
            r = work.pop()
            for F in mult_flats:
                r2 = matmul_mod(r, F, p, M)
                t = r2.reshape(-1, gr.m)
                if span.add(t):
                    additions += 1
                    if additions > alg._cap:
                        raise RuntimeError("ideal span failed to close")
                    gens_rows.append(t)
                    work.append(r2)
        return span, gens_rows

    def _close_probe(self):
        alg = self.algebra
        gr = alg.gr
        wflat = alg.w.reshape(1, -1)
        seeds: dict[int, np.ndarray] = {}
        span = None
        gens_rows: list[np.ndarray] = []
        pending = list(self.gens)
        while pending:
            ell = pending.pop(0)
            row = self._eta_row(wflat, ell)
            if span is not None and span.contains(row.reshape(-1, gr.m)):
                continue
            seeds[ell] = row
            span, gens_rows = self._probe_close(list(seeds.values()))
            pending = [x for x in self.gens if x not in seeds and x != ell]
        assert seeds, "the Eisenstein ideal cannot probe to zero"
        self._w_seeds = sorted(seeds)
        self._lambda_gens = np.stack(gens_rows)
        # the probe is faithful on every T-stable module (the winding
        # quotient is free of rank one over T), so seeds certified on
        # w-translates generate the ideal action everywhere; downstream
        # order cross-checks would expose a miss
        return span, list(self._w_seeds)

    def _cosquare_probe(self):
        wflat = self.algebra.w.reshape(1, -1)
        seeds = []
        for a in self._w_seeds:
            ra = self._eta_row(wflat, a)
            for b in self._w_seeds:
                seeds.append(self._eta_row(ra, b))
        span, gens_rows = self._probe_close(seeds)
        self._cosq_gens = np.stack(gens_rows)
        return span

    # ---- module-side generating subsets -----------------------------------------

    def _greedy_module_subset(self, module: PlusSpace, lattice: np.ndarray | None) -> list[int]:
        """Primes whose generators span the ideal action on the module.
        Every other prime gets a membership certificate: full reduction
        on small spaces, a seeded random sketch on large ones (misses
        are caught by the cross-checks downstream, which compare orders
        computed along independent routes)."""
        mops = _ops(module)
        sp = module.space
        p, M = sp.p, sp.M
        rel = module.red.unfolded_relations()
        rows = [rel] if rel.size else []
        S: list[int] = []
        E = None
        rng = np.random.default_rng(sp.N * 1000003 + sp.p)
        for ell in self.gens:
            F = module.gr.unfold(mops.eta(ell))
            cand = F if lattice is None else matmul_mod(lattice, F, p, M)
            if E is None:
                rows.append(cand)
                S.append(ell)
                E = echelon(np.vstack(rows), p, M)
                continue
            if sp.m > 1 and len(S) >= 2 and ell > 13:
                probes = rng.integers(0, sp.gr.q, size=(3, cand.shape[0]))
                sk = matmul_mod(probes, cand, p, M)
                rem, _ = E.reduce(sk)
                if not rem.any():
                    continue
            rem, _ = E.reduce(cand)
            if rem.any():
                rows.append(cand)
                S.append(ell)
                E = echelon(np.vstack(rows), p, M)
        return S

    # ---- quantities ---------------------------------------------------------------

    def quotient_exponents(self) -> list[int]:
        """Elementary divisors of T / I.  For the kinds living on the
        homology of the closed curve (I_mazur away from the setting
        where the plus space already is that homology, and I0) the
        algebra is read off through its free rank-one module: T / I is
        H_+ / I H_+ computed on the kernel of the boundary."""
        if self.kind == "I0":
            return self.homology_exponents(1, absolute=True)
        if self.algebra.mode == "probe":
            exps = peel_quotient_exponents(self.algebra.gr, self.algebra._lambda_gens,
                                           self._lambda_gens)
        else:
            exps = lattice_quotient_exponents(self.algebra.span.rows, self._span.rows,
                                              self.algebra.p, self.algebra.M)
        assert all(e < self.algebra.M for e in exps), "quotient exceeds working precision"
        return exps

    def cosquare_exponents(self) -> list[int]:
        """Elementary divisors of I / I^2."""
        if self.kind == "I0":
            return self.homology_exponents(2, absolute=True)
        if self.algebra.mode == "probe":
            exps = peel_quotient_exponents(self.algebra.gr, self._lambda_gens,
                                           self._cosq_gens)
        else:
            exps = lattice_quotient_exponents(self._span.rows, self._cosq.rows,
                                              self.algebra.p, self.algebra.M)
        assert all(e < self.algebra.M for e in exps), "quotient exceeds working precision"
        return exps

    def homology_exponents(self, power: int = 1, absolute: bool = False,
                           flat: bool = False) -> list[int]:
        """Elementary divisors of I^(power-1) H / I^power H on the
        algebra's own space, either the whole presented module or the
        kernel of the boundary (absolute).  Group-ring coordinates keep
        the computation at matrix size k instead of k*m; the flat route
        stays available as a cross-check."""
        plus = self.algebra.plus
        sp = plus.space
        gr = self.algebra.gr
        assert power in (1, 2)
        if not flat and sp.m > 1:
            base = absolute_generators(plus) if absolute else _identity_with_rel(plus)
            if base is not None:
                etas = [self.ops.eta(s) for s in self.S]
                rel = plus.red.rel

                def step(T):
                    pieces = [gr.lmatmul(T, e) % gr.q for e in etas]
                    if rel.size:
                        pieces.append(rel)
                    return np.concatenate(pieces, axis=0)

                upper = base if power == 1 else step(base)
                lower = step(upper)
                exps = peel_quotient_exponents(gr, upper, lower)
                assert all(e < sp.M for e in exps), "quotient exceeds working precision"
                return exps
        H = absolute_rows(plus) if absolute else None
        lower = ideal_action(self, module=plus, lattice=H, power=power)
        if power == 1:
            upper = H if absolute else ideal_action(self, module=plus, power=0)
        else:
            upper = ideal_action(self, module=plus, lattice=H, power=1)
        exps = lattice_quotient_exponents(upper, lower, sp.p, sp.M)
        assert all(e < sp.M for e in exps), "quotient exceeds working precision"
        return exps


def eisenstein_ideal(algebra: HeckeAlgebra, kind: str) -> EisensteinIdeal:
    cache = getattr(algebra, "_ideals", None)
    if cache is None:
        cache = algebra._ideals = {}
    if kind not in cache:
        cache[kind] = EisensteinIdeal(algebra, kind)
    return cache[kind]


# ---- ideal action on modules ---------------------------------------------------


def ideal_action(ideal: EisensteinIdeal, module: PlusSpace | None = None,
                 lattice: np.ndarray | None = None, power: int = 1) -> np.ndarray:
    """Row lattice of I^power * M in unfolded plus coordinates.  The
    module defaults to the algebra's own space, a sub-lattice may be
    passed as rows, and the result always contains the relation rows of
    the presentation."""
    assert power in (0, 1, 2)
    module = module or ideal.algebra.plus
    sp = module.space
    base = ideal.algebra.plus.space
    assert (sp.N, sp.p, sp.m, sp.M) == (base.N, base.p, base.m, base.M), \
        "ideal and module must share level data"
    mops = _ops(module)
    rel = module.red.unfolded_relations()
    whole = lattice is None
    if whole:
        k, m = module.red.k, sp.m
        lattice = np.eye(k * m, dtype=np.int64)
    if power == 0:
        out = [lattice] + ([rel] if rel.size else [])
        return np.vstack(out) % sp.gr.q
    if whole and module is ideal.algebra.plus:
        S = ideal.S
    else:
        S = ideal._greedy_module_subset(module, None if whole else lattice)
    flats = {ell: module.gr.unfold(mops.eta(ell)) for ell in S}
    if power == 1:
        pieces = [F if whole else matmul_mod(lattice, F, sp.p, sp.M)
                  for F in flats.values()]
    else:
        pieces = []
        for a in S:
            first = flats[a] if whole else matmul_mod(lattice, flats[a], sp.p, sp.M)
            pieces.extend(matmul_mod(first, flats[b], sp.p, sp.M) for b in S)
    if rel.size:
        pieces.append(rel)
    return np.vstack(pieces) % sp.gr.q
