# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay numerically identical to _kernels_py."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def kendall_counts(double[::1] x, double[::1] y):
    """Pair counts (concordant, discordant, ties in x only, ties in y only, joint ties)."""
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef double dx, dy, s
    cdef long long c = 0, d = 0, tx = 0, ty = 0, txy = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0.0 and dy == 0.0:
                txy += 1
            elif dx == 0.0:
                tx += 1
            elif dy == 0.0:
                ty += 1
            else:
                s = dx * dy
                if s > 0.0:
                    c += 1
                else:
                    d += 1
    return c, d, tx, ty, txy


def best_numeric_split(double[::1] xs, double[::1] rs, Py_ssize_t min_leaf):
    """Best threshold on presorted values ``xs`` with residuals ``rs``.

    Returns (gain, threshold); gain is -1 when no admissible split exists.
    """
    cdef Py_ssize_t n = xs.shape[0], i
    cdef double total = 0.0, left = 0.0, right, gain, parent
    cdef double best_gain = -1.0, best_thr = 0.0
    for i in range(n):
        total += rs[i]
    parent = total * total / n
    for i in range(1, n):
        left += rs[i - 1]
        if i < min_leaf or n - i < min_leaf:
            continue
        if xs[i - 1] == xs[i]:
            continue
        right = total - left
        gain = left * left / i + right * right / (n - i) - parent
        if gain > best_gain:
            best_gain = gain
            best_thr = 0.5 * (xs[i - 1] + xs[i])
    return best_gain, best_thr


def best_categorical_split(cnp.int64_t[::1] codes, double[::1] rs,
                           Py_ssize_t n_categories, Py_ssize_t min_leaf):
    """Best one-vs-rest equality split. Returns (gain, category)."""
    cdef Py_ssize_t n = codes.shape[0], i, k, cnt
    cdef double total = 0.0, left, right, gain, parent
    cdef double best_gain = -1.0
    cdef Py_ssize_t best_cat = -1
    cdef double[::1] sums = np.zeros(n_categories)
    cdef cnp.int64_t[::1] counts = np.zeros(n_categories, dtype=np.int64)
    for i in range(n):
        total += rs[i]
        sums[codes[i]] += rs[i]
        counts[codes[i]] += 1
    parent = total * total / n
    for k in range(n_categories):
        cnt = counts[k]
        if cnt < min_leaf or n - cnt < min_leaf:
            continue
        left = sums[k]
        right = total - left
        gain = left * left / cnt + right * right / (n - cnt) - parent
        if gain > best_gain:
            best_gain = gain
            best_cat = k
    return best_gain, best_cat


# ---------------------------------------------------------------------------
# ranking MLP

from libc.math cimport ceil, sqrt
from libc.stdint cimport uint32_t, uint64_t


cdef inline uint64_t _splitmix64(uint64_t x) noexcept nogil:
    x = x + <uint64_t>0x9E3779B97F4A7C15ULL
    x = (x ^ (x >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    x = (x ^ (x >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return x ^ (x >> 31)


cdef uint64_t _drop_threshold(double dropout):
    # a unit is dropped when its 32-bit uniform u satisfies u * 2**-32 < dropout
    if dropout <= 0.0:
        return 0
    if dropout >= 1.0:
        return (<uint64_t>1) << 32
    return <uint64_t>ceil(dropout * 4294967296.0)


def mlp_pair_grads(cnp.int64_t[::1] indptr, cnp.int64_t[::1] cols, double[::1] vals,
                   cnp.int64_t[::1] ridx, double[::1] labels, double margin,
                   double[:, ::1] w1, double[::1] b1, double[::1] w2, double b2,
                   double dropout, uint64_t mask_key,
                   double[:, ::1] h_buf, double[:, ::1] d_buf,
                   double[:, ::1] g_w1, double[::1] g_b1, double[::1] g_w2, double[::1] g_b2):
    """Mean pairwise hinge loss over a batch and its parameter gradients.

    Batch row r reads CSR row ridx[r]; rows 0..n-1 are the first items of each
    pair and rows n..2n-1 the second. h_buf and d_buf are (2n, hidden)
    workspaces. Gradients are written into the g_* buffers.
    """
    cdef Py_ssize_t n_pairs = labels.shape[0], rows = 2 * n_pairs, hidden = w1.shape[1]
    cdef Py_ssize_t r, j, k, q, src, half = (hidden + 1) // 2
    cdef uint64_t bits
    cdef uint32_t[::1] u_buf = np.empty(2 * half, dtype=np.uint32)
    cdef uint32_t *u = &u_buf[0]
    cdef double scale = 1.0 / (1.0 - dropout) if dropout > 0.0 else 1.0
    cdef uint64_t thresh = _drop_threshold(dropout)
    cdef bint drop_all = thresh > 0xFFFFFFFFULL
    cdef uint32_t thresh32 = <uint32_t>thresh if not drop_all else 0
    cdef double acc, v, loss = 0.0, hinge, gsr
    cdef uint64_t base
    cdef double *h
    cdef double *d
    cdef double *w
    cdef double *gw
    cdef double *pb1 = &b1[0]
    cdef double *pw2 = &w2[0]
    cdef double *gb1 = &g_b1[0]
    cdef double *gw2 = &g_w2[0]
    cdef double[::1] s = np.empty(rows)
    cdef double[::1] gs = np.zeros(rows)
    if h_buf.shape[0] < rows or d_buf.shape[0] < rows or h_buf.shape[1] != hidden or d_buf.shape[1] != hidden:
        raise ValueError("workspace too small")
    with nogil:
        for j in range(hidden):
            gb1[j] = 0.0
            gw2[j] = 0.0
        for k in range(g_w1.shape[0]):
            gw = &g_w1[k, 0]
            for j in range(hidden):
                gw[j] = 0.0
        g_b2[0] = 0.0
        for r in range(rows):
            h = &h_buf[r, 0]
            d = &d_buf[r, 0]
            src = ridx[r]
            for j in range(hidden):
                h[j] = pb1[j]
            for k in range(indptr[src], indptr[src + 1]):
                w = &w1[cols[k], 0]
                v = vals[k]
                for j in range(hidden):
                    h[j] += v * w[j]
            for j in range(hidden):
                d[j] = scale if h[j] > 0.0 else 0.0
            if dropout > 0.0:
                # each hash yields two 32-bit uniforms: low half for unit 2q, high half for 2q + 1.
                # uniforms are staged first so the masking loop is a branch-free select
                base = mask_key + <uint64_t>(r * half)
                for q in range(half):
                    bits = _splitmix64(base + <uint64_t>q)
                    u[2 * q] = <uint32_t>(bits & 0xFFFFFFFFULL)
                    u[2 * q + 1] = <uint32_t>(bits >> 32)
                if drop_all:
                    for j in range(hidden):
                        d[j] = 0.0
                else:
                    for j in range(hidden):
                        d[j] = d[j] if u[j] >= thresh32 else 0.0
            acc = 0.0
            for j in range(hidden):
                h[j] = h[j] * d[j]
                acc = acc + h[j] * pw2[j]
            s[r] = acc + b2
        for k in range(n_pairs):
            hinge = -labels[k] * (s[k] - s[n_pairs + k]) + margin
            if hinge > 0.0:
                loss += hinge
                gs[k] = -labels[k] / n_pairs
                gs[n_pairs + k] = labels[k] / n_pairs
        for r in range(rows):
            gsr = gs[r]
            if gsr == 0.0:
                continue
            h = &h_buf[r, 0]
            d = &d_buf[r, 0]
            src = ridx[r]
            g_b2[0] += gsr
            for j in range(hidden):
                gw2[j] += gsr * h[j]
                d[j] = gsr * pw2[j] * d[j]
                gb1[j] += d[j]
            for k in range(indptr[src], indptr[src + 1]):
                gw = &g_w1[cols[k], 0]
                v = vals[k]
                for j in range(hidden):
                    gw[j] += v * d[j]
    return loss / n_pairs


def amsgrad_update(double[::1] p, double[::1] g, double[::1] m, double[::1] v, double[::1] vh,
                   double lr, double weight_decay, double beta1, double beta2, double eps, double corr1):
    """Fused in-place AMSGrad update over flat parameter buffers."""
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double gi
    with nogil:
        for i in range(n):
            gi = g[i] + weight_decay * p[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
            vh[i] = v[i] if v[i] > vh[i] else vh[i]
            p[i] = p[i] - lr * (m[i] / corr1) / (sqrt(vh[i]) + eps)
