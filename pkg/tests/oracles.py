"""Independent reference implementations used only by the tests.

Everything here works on plain Python ints and lists (dense matrices as lists
of 0/1 rows) and shares no code with the package.
"""

from __future__ import annotations

import itertools

TOY = [
    [1, 0, 1, 1, 0, 1],
    [1, 1, 0, 1, 1, 0],
    [0, 1, 1, 0, 1, 1],
]


def matvec(H, v):
    return [sum(h * x for h, x in zip(row, v)) % 2 for row in H]


def rank(H):
    """Row rank over GF(2), rows as int bitmasks."""
    rows = [int("".join(map(str, r)), 2) for r in H if any(r)]
    r = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        if pivot == 0:
            continue
        r += 1
        top = pivot.bit_length() - 1
        rows = [x ^ pivot if (x >> top) & 1 else x for x in rows]
        rows = [x for x in rows if x]
    return r


def span(H):
    """Set of all GF(2) combinations of the rows, as tuples."""
    n = len(H[0]) if H else 0
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(H)):
        v = [0] * n
        for c, row in zip(coeffs, H):
            if c:
                v = [a ^ b for a, b in zip(v, row)]
        out.add(tuple(v))
    return out


def coset(H, s):
    """All e with H e = s, by exhaustive enumeration."""
    n = len(H[0])
    return {e for e in itertools.product((0, 1), repeat=n) if matvec(H, e) == list(s)}


def coset_leaders(H, s):
    sols = coset(H, s)
    if not sols:
        return set()
    w = min(sum(e) for e in sols)
    return {e for e in sols if sum(e) == w}


def bb_matrices(l, m, a_terms, b_terms):
    """Dense H_X = [A|B], H_Z = [B^T|A^T] with A, B sums of x^i y^j,
    x the l-cycle shift and y the m-cycle shift (Kronecker construction)."""

    def shift(k, p):
        return [[1 if (r + p) % k == c else 0 for c in range(k)] for r in range(k)]

    def kron(a, b):
        return [[x * y for x in ra for y in rb] for ra in a for rb in b]

    def matmul(a, b):
        return [[sum(a[i][t] * b[t][j] for t in range(len(b))) % 2 for j in range(len(b[0]))]
                for i in range(len(a))]

    def poly(terms):
        n = l * m
        acc = [[0] * n for _ in range(n)]
        for i, j in terms:
            x = kron(shift(l, i), [[int(r == c) for c in range(m)] for r in range(m)])
            y = kron([[int(r == c) for c in range(l)] for r in range(l)], shift(m, j))
            mono = matmul(x, y)
            acc = [[(p + q) % 2 for p, q in zip(ra, rb)] for ra, rb in zip(acc, mono)]
        return acc

    def T(a):
        return [list(col) for col in zip(*a)]

    A, B = poly(a_terms), poly(b_terms)
    hx = [ra + rb for ra, rb in zip(A, B)]
    hz = [ra + rb for ra, rb in zip(T(B), T(A))]
    return hx, hz


def reference_minsum(H, s, *, alpha=0.8, max_iter=10, early_term=True, gamma=None,
                     integer=None, check_order=None):
    """Definitional scaled min-sum on a dense matrix, one syndrome.

    ``integer`` is None for float arithmetic or (satmax, alpha_fix) for
    saturating integer arithmetic where ``gamma`` is already quantized.
    ``check_order`` permutes the order in which checks are visited within an
    iteration; a flooding schedule must not depend on it.
    Returns (e_hat, converged, iterations_used).
    """
    M, N = len(H), len(H[0])
    gamma = [1.0] * N if gamma is None else list(gamma)
    checks = [[n for n in range(N) if H[m][n]] for m in range(M)]
    vars_ = [[m for m in range(M) if H[m][n]] for n in range(N)]
    q = {(m, n): gamma[n] for m in range(M) for n in checks[m]}
    r = {}
    order = list(range(M)) if check_order is None else list(check_order)

    def sat(x):
        return max(-integer[0], min(integer[0], x)) if integer else x

    est = [0] * N
    k = 0
    ok = False
    while k < max_iter:
        k += 1
        new_r = {}
        for m in order:
            sigma = -1 if s[m] else 1
            for n in checks[m]:
                others = [q[(m, j)] for j in checks[m] if j != n]
                sign = sigma
                for x in others:
                    if x < 0:
                        sign = -sign
                if integer:
                    mag = min(abs(x) for x in others) if others else integer[0]
                    val = (mag * integer[1] + 512) >> 10
                else:
                    mag = min(abs(x) for x in others) if others else 64.0
                    val = alpha * mag
                new_r[(m, n)] = sign * val
        r = new_r
        for n in range(N):
            for m in vars_[n]:
                acc = gamma[n]
                for i in vars_[n]:
                    if i != m:
                        acc = acc + r[(i, n)]
                q[(m, n)] = sat(acc)
            post = gamma[n]
            for i in vars_[n]:
                post = post + r[(i, n)]
            est[n] = 1 if post < 0 else 0
        ok = matvec(H, est) == list(s)
        if ok and early_term:
            break
    return tuple(est), ok, k
