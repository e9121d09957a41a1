"""Vectorized dense linear algebra over prime fields GF(p)."""

from __future__ import annotations

import numpy as np


def inverse_table(p: int) -> np.ndarray:
    """Multiplicative inverses mod p; index 0 maps to 0."""
    inv = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv[x] = pow(x, p - 2, p)
    return inv


def rank_batch(mats, p: int) -> np.ndarray:
    """Ranks of a stack of matrices over GF(p).

    `mats` has shape (N, rows, cols); returns an (N,) int64 array.  Plain
    Gauss elimination run in lockstep over the whole stack, so one call
    handles thousands of small matrices at numpy speed.
    """
    arr = (np.asarray(mats, dtype=np.int64) % p).copy()
    n_mats, n_rows, n_cols = arr.shape
    inv = inverse_table(p)
    rank = np.zeros(n_mats, dtype=np.int64)
    rows = np.arange(n_rows)
    for col in range(n_cols):
        cand = (arr[:, :, col] != 0) & (rows[None, :] >= rank[:, None])
        sel = np.nonzero(cand.any(axis=1))[0]
        if sel.size == 0:
            continue
        piv = cand[sel].argmax(axis=1)
        cur = rank[sel]
        tmp = arr[sel, cur, :].copy()
        arr[sel, cur, :] = arr[sel, piv, :]
        arr[sel, piv, :] = tmp
        arr[sel, cur, :] = arr[sel, cur, :] * inv[arr[sel, cur, col]][:, None] % p
        fac = arr[sel, :, col].copy()
        fac[np.arange(sel.size), cur] = 0
        arr[sel] = (arr[sel] - fac[:, :, None] * arr[sel, cur, :][:, None, :]) % p
        rank[sel] += 1
    return rank


def rank(mat, p: int) -> int:
    return int(rank_batch(np.asarray(mat)[None, :, :], p)[0])


def _det2(m):
    return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]


def det_batch(mats, p: int) -> np.ndarray:
    """Determinants mod p of a stack of n x n matrices, n <= 4.

    Exact integer cofactor expansion; safe in int64 for p < 2**15.
    """
    m = np.asarray(mats, dtype=np.int64) % p
    n = m.shape[-1]
    if n == 1:
        return m[:, 0, 0] % p
    if n == 2:
        return _det2(m) % p
    if n == 3:
        d = (
            m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
        )
        return d % p
    if n == 4:
        # Laplace along the first two rows against the last two
        a, b = m[:, :2, :], m[:, 2:, :]

        def minor(rows, i, j):
            return rows[:, 0, i] * rows[:, 1, j] - rows[:, 0, j] * rows[:, 1, i]

        d = (
            minor(a, 0, 1) * minor(b, 2, 3)
            - minor(a, 0, 2) * minor(b, 1, 3)
            + minor(a, 0, 3) * minor(b, 1, 2)
            + minor(a, 1, 2) * minor(b, 0, 3)
            - minor(a, 1, 3) * minor(b, 0, 2)
            + minor(a, 2, 3) * minor(b, 0, 1)
        )
        return d % p
    raise ValueError("det_batch supports n <= 4 only")


def invertible_batch(mats, p: int) -> np.ndarray:
    """Boolean mask marking the invertible square matrices of a stack."""
    arr = np.asarray(mats)
    n = arr.shape[-1]
    if n <= 4 and p < (1 << 15):
        return det_batch(arr, p) != 0
    return rank_batch(arr, p) == n


def is_invertible(mat, p: int) -> bool:
    mat = np.asarray(mat)
    return rank(mat, p) == mat.shape[-1]


def inv_mod(mat, p: int) -> np.ndarray:
    """Inverse of a square matrix over GF(p); raises ValueError if singular."""
    a = np.asarray(mat, dtype=np.int64) % p
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, n):
            if aug[i, col]:
                piv = i
                break
        if piv is None:
            raise ValueError("matrix is singular mod %d" % p)
        if piv != r:
            aug[[r, piv]] = aug[[piv, r]]
        aug[r] = aug[r] * pow(int(aug[r, col]), p - 2, p) % p
        for i in range(n):
            if i != r and aug[i, col]:
                aug[i] = (aug[i] - aug[i, col] * aug[r]) % p
        r += 1
    return aug[:, n:]
