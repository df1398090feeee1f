import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eisideal.zqlin import (
    Echelon,
    PreparedMul,
    Solver,
    echelon,
    kernel,
    lattice_intersect,
    lattice_length,
    lattice_quotient_exponents,
    matmul_mod,
    preimage_kernel,
    snf_exponents,
    solve,
    span_contains,
    span_equal,
    vals_of,
)

RNG = np.random.default_rng(20260819)

PARAMS = [(5, 3), (7, 2), (11, 4), (89, 3)]


def _rand(r, c, q, density=1.0):
    A = RNG.integers(0, q, size=(r, c), dtype=np.int64)
    if density < 1.0:
        A[RNG.random((r, c)) > density] = 0
    return A


def _naive_matmul(A, B, q):
    R, n = A.shape
    C = B.shape[1]
    out = [[0] * C for _ in range(R)]
    for i in range(R):
        for j in range(C):
            out[i][j] = sum(int(A[i, k]) * int(B[k, j]) for k in range(n)) % q
    return np.array(out, dtype=np.int64)


@pytest.mark.parametrize("p,M", PARAMS + [(89, 4)])
def test_matmul_mod_exact(p, M):
    q = p**M
    A = _rand(7, 23, q)
    B = _rand(23, 5, q)
    assert np.array_equal(matmul_mod(A, B, p, M), _naive_matmul(A, B, q))


def test_matmul_mod_long_inner_dimension():
    # Force the chunked path: inner dimension too long for one float64 pass.
    p, M = 11, 4
    q = p**M
    A = np.full((2, 70000), q - 1, dtype=np.int64)
    B = np.full((70000, 2), q - 1, dtype=np.int64)
    expect = 70000 * (q - 1) * (q - 1) % q
    assert np.all(matmul_mod(A, B, p, M) == expect)


def test_matmul_mod_largest_modulus():
    # q = 89^4 is the largest modulus the package ever uses.
    p, M = 89, 4
    q = p**M
    A = _rand(4, 300, q)
    B = _rand(300, 4, q)
    assert np.array_equal(matmul_mod(A, B, p, M), _naive_matmul(A, B, q))


def test_vals_of():
    p, M = 5, 4
    x = np.array([0, 1, 5, 50, 125, 624, 375])
    assert vals_of(x, p, M).tolist() == [4, 0, 1, 2, 3, 0, 3]


@pytest.mark.parametrize("p,M", PARAMS)
def test_echelon_reduces_own_rows(p, M):
    q = p**M
    for density in (1.0, 0.3):
        A = _rand(12, 9, q, density) * RNG.integers(1, 3, size=(12, 1))
        A[3] = A[3] * p % q  # guarantee some non-unit pivots
        E = echelon(A, p, M)
        cols = [c for c, _ in E.pivots]
        assert cols == sorted(set(cols)), "pivot columns strictly increasing"
        rem, coeffs = E.reduce(A)
        assert not rem.any()
        assert np.array_equal(matmul_mod(coeffs, E.rows, p, M), A % q)


@pytest.mark.parametrize("p,M", PARAMS)
def test_echelon_membership_needs_saturation(p, M):
    # p^(M-1) * row is in the span of row even when no leading unit exists;
    # reduction must certify it (this fails without saturation rows).
    q = p**M
    A = np.array([[p, 1, 3]], dtype=np.int64) % q
    member = p ** (M - 1) * np.array([[0, 1, 3]], dtype=np.int64) % q
    assert span_contains(A, member, p, M)
    assert not span_contains(A, np.array([[0, 0, 1]]), p, M)


@pytest.mark.parametrize("p,M", PARAMS)
def test_kernel_annihilates_and_is_complete(p, M):
    q = p**M
    A = _rand(10, 6, q, 0.7)
    A[2] *= p
    A[5] = A[1] * 3 % q
    K = kernel(A, p, M)
    assert not matmul_mod(K, A, p, M).any()
    # |ker| * |im| = q^rows  <=>  lengths add up to rows * M.
    assert lattice_length(K, p, M) + lattice_length(A, p, M) == 10 * M


@pytest.mark.parametrize("p,M", PARAMS)
def test_solve_roundtrip(p, M):
    q = p**M
    A = _rand(8, 11, q, 0.8)
    X0 = _rand(3, 8, q)
    B = matmul_mod(X0, A, p, M)
    X = solve(A, B, p, M)
    assert X is not None
    assert np.array_equal(matmul_mod(X, A, p, M), B)
    # An unsolvable target: extend B by a unit vector outside the span.
    bad = np.zeros((1, 11), dtype=np.int64)
    bad[0, 0] = 1
    if solve(A, bad, p, M) is None:
        assert not span_contains(A, bad, p, M)


@pytest.mark.parametrize("p,M", PARAMS)
def test_span_equal_under_row_operations(p, M):
    q = p**M
    A = _rand(6, 9, q, 0.6)
    U = RNG.integers(0, q, size=(6, 6), dtype=np.int64)
    np.fill_diagonal(U, 1)
    U = np.triu(U)  # unimodular: triangular with unit diagonal
    B = matmul_mod(U, A, p, M)
    assert span_equal(A, B, p, M)
    assert span_contains(A, B, p, M) and span_contains(B, A, p, M)
    C = np.vstack([B, p ** (M - 1) * A[0:1] % q])
    assert span_equal(A, C, p, M)


def _sympy_coker_exponents(A, p, M, ncols):
    """Independent oracle: integer SNF over ZZ of [A; q*I]."""
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form

    q = p**M
    stack = Matrix(np.vstack([A, q * np.eye(ncols, dtype=np.int64)]).tolist())
    S = smith_normal_form(stack, domain=ZZ)
    exps = []
    for i in range(ncols):
        d = int(S[i, i])
        assert d != 0
        v = 0
        while d % p == 0:
            d //= p
            v += 1
        exps.append(min(v, M))
    return sorted([e for e in exps if e > 0], reverse=True)


@pytest.mark.parametrize("p,M", [(5, 3), (7, 2), (11, 4)])
def test_snf_exponents_vs_sympy(p, M):
    q = p**M
    for trial in range(8):
        r, c = int(RNG.integers(1, 8)), int(RNG.integers(1, 8))
        A = _rand(r, c, q, 0.8)
        if trial % 2:
            A = A * p % q
        assert snf_exponents(A, p, M) == _sympy_coker_exponents(A, p, M, c)


def test_snf_exponents_edges():
    p, M = 5, 3
    assert snf_exponents(np.zeros((2, 3), dtype=np.int64), p, M) == [3, 3, 3]
    assert snf_exponents(np.eye(3, dtype=np.int64), p, M) == []
    A = np.diag([1, 5, 25]).astype(np.int64)
    assert snf_exponents(A, p, M) == [2, 1]
    # Non-diagonal interaction: [[p, 3]] presents a free rank-1 module.
    assert snf_exponents(np.array([[5, 3]]), p, M) == [3]


@given(st.integers(0, 2**32 - 1))
@settings(deadline=None, max_examples=25)
def test_snf_exponents_property(seed):
    rng = np.random.default_rng(seed)
    p, M = 5, 3
    q = p**M
    r, c = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    A = rng.integers(0, q, size=(r, c), dtype=np.int64)
    A[rng.random((r, c)) > 0.7] = 0
    assert snf_exponents(A, p, M) == _sympy_coker_exponents(A, p, M, c)


@given(st.integers(0, 2**32 - 1))
@settings(deadline=None, max_examples=25)
def test_kernel_property(seed):
    rng = np.random.default_rng(seed)
    p, M = 7, 3
    q = p**M
    r, c = int(rng.integers(1, 9)), int(rng.integers(1, 7))
    A = rng.integers(0, q, size=(r, c), dtype=np.int64)
    A[rng.random((r, c)) > 0.6] = 0
    K = kernel(A, p, M)
    assert not matmul_mod(K, A, p, M).any()
    assert lattice_length(K, p, M) + lattice_length(A, p, M) == r * M


def test_echelon_big_blocked_path():
    # Exercise multiple panels and the deferred trailing updates.
    p, M = 5, 3
    q = p**M
    A = _rand(300, 250, q, 0.5)
    A[::7] = A[::7] * p % q
    E = echelon(A, p, M)
    rem, _ = E.reduce(A)
    assert not rem.any()
    K = kernel(A, p, M)
    assert not matmul_mod(K, A, p, M).any()
    assert lattice_length(K, p, M) + E.length == 300 * M


@pytest.mark.parametrize("p,M", PARAMS + [(89, 4)])
def test_prepared_mul_matches_matmul_mod(p, M):
    q = p**M
    B = _rand(37, 11, q)
    pre = PreparedMul(B, p, M)
    for r in (1, 4, 30):
        A = _rand(r, 37, q)
        assert np.array_equal(pre.matmul(A), matmul_mod(A, B, p, M))


def test_prepared_mul_long_inner_dimension():
    # Same forcing case as the matmul_mod chunking test.
    p, M = 11, 4
    q = p**M
    B = np.full((70000, 2), q - 1, dtype=np.int64)
    pre = PreparedMul(B, p, M)
    A = np.full((2, 70000), q - 1, dtype=np.int64)
    expect = 70000 * (q - 1) * (q - 1) % q
    assert np.all(pre.matmul(A) == expect)


@pytest.mark.parametrize("p,M", [(5, 3), (89, 3)])
def test_solver_matches_solve(p, M):
    q = p**M
    A = _rand(9, 6, q, 0.8)
    sv = Solver(A, p, M)
    X = _rand(4, 9, q)
    B = matmul_mod(X, A, p, M)
    Y = sv.solve(B)
    assert Y is not None
    assert np.array_equal(matmul_mod(Y, A, p, M), B)
    Z = solve(A, B, p, M)
    assert Z is not None and np.array_equal(matmul_mod(Z, A, p, M), B)
    # An unreachable target must be rejected, exactly like solve.
    bad = np.zeros((1, 6), dtype=np.int64)
    bad[0, 0] = 1
    stack = np.vstack([p * A % q])
    sv_bad = Solver(stack, p, M)
    assert sv_bad.solve(bad) is None
    assert solve(stack, bad, p, M) is None


def test_lattice_quotient_exponents_diagonal():
    p, M = 5, 4
    A = np.diag([1, p, p * p]).astype(np.int64)
    assert lattice_quotient_exponents(A, p * A % p**M, p, M) == [1, 1, 1]
    assert lattice_quotient_exponents(A, A, p, M) == []
    with pytest.raises(AssertionError):
        lattice_quotient_exponents(p * A % p**M, A, p, M)


@given(st.integers(0, 2**32 - 1))
@settings(deadline=None, max_examples=25)
def test_lattice_quotient_exponents_order(seed):
    rng = np.random.default_rng(seed)
    p, M = 5, 3
    q = p**M
    r, c = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    A = rng.integers(0, q, size=(r, c), dtype=np.int64)
    Cf = rng.integers(0, q, size=(r, r), dtype=np.int64)
    B = matmul_mod(Cf, A, p, M) * p % q
    exps = lattice_quotient_exponents(A, B, p, M)
    assert sum(exps) == lattice_length(A, p, M) - lattice_length(B, p, M)


def test_preimage_kernel_basic():
    p, M = 7, 3
    q = p**M
    T = _rand(8, 5, q, 0.7)
    S = _rand(3, 5, q, 0.7)
    K = preimage_kernel(T, S, p, M)
    ES = echelon(S, p, M)
    rem, _ = ES.reduce(matmul_mod(K, T, p, M))
    assert not rem.any()
    # The plain kernel of T is always part of the preimage.
    assert span_contains(K, kernel(T, p, M), p, M)
    # With S = 0 the two notions coincide.
    K0 = preimage_kernel(T, np.zeros((0, 5), dtype=np.int64), p, M)
    assert span_equal(K0, kernel(T, p, M), p, M)


def test_lattice_intersect():
    p, M = 5, 3
    q = p**M
    A = np.array([[1, 0]], dtype=np.int64)
    B = np.array([[p, 0], [0, 1]], dtype=np.int64)
    got = lattice_intersect(A, B, p, M)
    assert span_equal(got, np.array([[p, 0]], dtype=np.int64), p, M)
    X = _rand(4, 6, q, 0.8)
    got = lattice_intersect(X, X, p, M)
    assert span_equal(got, X, p, M)
