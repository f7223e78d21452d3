"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Both implementations take C-contiguous float64 arrays and return the same
results up to floating-point summation order (p = 1 and p = 2 only).
"""

import numpy as np

# Bound on elements materialised per chunk, to keep memory flat.
_CHUNK_ELEMS = 2_000_000


def _check_p(p):
    if p not in (1.0, 2.0, np.inf):
        raise ValueError(f"unsupported norm index {p}")


def _norm_rows(diff, p):
    if p == np.inf:
        return np.abs(diff).max(axis=-1)
    if p == 1.0:
        return np.abs(diff).sum(axis=-1)
    return np.sqrt((diff * diff).sum(axis=-1))


def distances(S, q, p):
    """p-norm distance from ``q`` to every row of ``S``."""
    _check_p(p)
    S = np.asarray(S, dtype=float)
    if S.shape[0] == 0:
        return np.empty(0)
    return _norm_rows(S - np.asarray(q, dtype=float).reshape(1, -1), p)


def envelope(S, Y, lip, eps_t, Q, p):
    """Evaluate the Lipschitz envelopes at every row of ``Q``.

    Returns ``(upper, lower)`` of shape ``(len(Q), m)`` where
    ``upper[a, i] = min_j (Y[j, i] + lip[i] * |Q[a] - S[j]|_p) + eps_t[i]`` and
    ``lower`` is the mirrored maximum.
    """
    _check_p(p)
    S = np.asarray(S, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Q = np.asarray(Q, dtype=float)
    lip = np.asarray(lip, dtype=float)
    eps_t = np.asarray(eps_t, dtype=float)
    nq, npairs, m = Q.shape[0], S.shape[0], Y.shape[1]
    upper = np.full((nq, m), np.inf)
    lower = np.full((nq, m), -np.inf)
    if npairs == 0 or nq == 0:
        return upper + eps_t, lower - eps_t
    step = max(1, _CHUNK_ELEMS // max(1, npairs * max(S.shape[1], m)))
    for a in range(0, nq, step):
        block = Q[a:a + step]
        dist = _norm_rows(block[:, None, :] - S[None, :, :], p)
        scaled = dist[:, :, None] * lip[None, None, :]
        upper[a:a + step] = (Y[None, :, :] + scaled).min(axis=1)
        lower[a:a + step] = (Y[None, :, :] - scaled).max(axis=1)
    return upper + eps_t, lower - eps_t


def pairwise_slope_max(S, Y, eps_v, eps_s, p):
    """Largest noise-corrected slope over all unordered pairs, per output.

    For each output ``i`` returns ``max(0, max_{j<k} (|Y[j,i]-Y[k,i]| - 2 eps_v[i])
    / (|S[j]-S[k]|_p + 2 eps_s))`` together with a boolean mask of outputs for
    which some pair has a positive numerator over a zero denominator.
    """
    _check_p(p)
    S = np.asarray(S, dtype=float)
    Y = np.asarray(Y, dtype=float)
    eps_v = np.asarray(eps_v, dtype=float)
    npairs, m = Y.shape
    best = np.zeros(m)
    unbounded = np.zeros(m, dtype=bool)
    step = max(1, _CHUNK_ELEMS // max(1, npairs * max(S.shape[1], m)))
    for a in range(0, npairs, step):
        rows = np.arange(a, min(a + step, npairs))
        den = _norm_rows(S[rows, None, :] - S[None, :, :], p) + 2.0 * eps_s
        num = np.abs(Y[rows, None, :] - Y[None, :, :]) - 2.0 * eps_v
        # only k > j, matching the compiled loop
        upper_tri = np.arange(npairs)[None, :] > rows[:, None]
        num = np.where(upper_tri[:, :, None], num, -1.0)
        positive = num > 0.0
        zero_den = (den <= 0.0)[:, :, None]
        unbounded |= (positive & zero_den).any(axis=(0, 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(positive & ~zero_den, num / np.where(zero_den, 1.0, den[:, :, None]), 0.0)
        if ratio.size:
            best = np.maximum(best, ratio.max(axis=(0, 1)))
    return best, unbounded
