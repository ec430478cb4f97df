"""Exact ranks of integer matrices.

Rank modulo a prime never exceeds the rational rank, so two large primes
that agree are accepted; a disagreement falls back to fraction-free
(Bareiss) elimination over Python integers.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

PRIMES = (2_147_483_647, 2_147_483_629)


def _dense(A) -> np.ndarray:
    if sp.issparse(A):
        A = A.toarray()
    return np.asarray(A, dtype=np.int64)


def rank_mod_p(A, p: int) -> int:
    # entries stay below p < 2**31, so products fit in int64
    M = _dense(A) % p
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        below = r + 1 + np.flatnonzero(M[r + 1:, c])
        if below.size:
            M[below] = (M[below] - np.outer(M[below, c], M[r]) % p) % p
        r += 1
    return r


def bareiss_rank(A) -> int:
    """Fraction-free elimination; exact for any integer matrix."""
    M = [[int(v) for v in row] for row in _dense(A)]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    r = 0
    prev = 1
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, rows):
            a = M[i][c]
            M[i] = [(p * M[i][k] - a * M[r][k]) // prev for k in range(cols)]
        prev = p
        r += 1
    return r


def exact_rank(A) -> int:
    shape = A.shape
    if 0 in shape:
        return 0
    if sp.issparse(A) and A.nnz == 0:
        return 0
    ranks = [rank_mod_p(A, p) for p in PRIMES]
    if ranks[0] == ranks[1]:
        return ranks[0]
    return bareiss_rank(A)
