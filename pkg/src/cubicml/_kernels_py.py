"""NumPy versions of the compiled kernels, used when the extension is not built.

The split, correlation and optimizer kernels match the compiled loops bit for bit;
the MLP kernel draws identical dropout masks and agrees to rounding.
"""

import numpy as np


def kendall_counts(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    iu = np.triu_indices(len(x), k=1)
    dx = (x[:, None] - x[None, :])[iu]
    dy = (y[:, None] - y[None, :])[iu]
    zx, zy = dx == 0.0, dy == 0.0
    s = dx * dy
    c = int(np.count_nonzero(~zx & ~zy & (s > 0.0)))
    d = int(np.count_nonzero(~zx & ~zy & (s < 0.0)))
    return c, d, int(np.count_nonzero(zx & ~zy)), int(np.count_nonzero(zy & ~zx)), int(np.count_nonzero(zx & zy))


def best_numeric_split(xs, rs, min_leaf):
    n = len(xs)
    if n < 2:
        return -1.0, 0.0
    cs = np.cumsum(rs)
    total = cs[-1]
    parent = total * total / n
    i = np.arange(1, n)
    left = cs[:-1]
    ok = (i >= min_leaf) & (n - i >= min_leaf) & (xs[:-1] != xs[1:])
    if not ok.any():
        return -1.0, 0.0
    right = total - left
    gain = left * left / i + right * right / (n - i) - parent
    gain = np.where(ok, gain, -np.inf)
    k = int(np.argmax(gain))
    if not gain[k] > -1.0:
        return -1.0, 0.0
    return float(gain[k]), float(0.5 * (xs[k] + xs[k + 1]))


def best_categorical_split(codes, rs, n_categories, min_leaf):
    n = len(codes)
    total = np.cumsum(rs)[-1] if n else 0.0
    parent = total * total / n
    sums = np.bincount(codes, weights=rs, minlength=n_categories)
    counts = np.bincount(codes, minlength=n_categories)
    ok = (counts >= min_leaf) & (n - counts >= min_leaf)
    if not ok.any():
        return -1.0, -1
    with np.errstate(divide="ignore", invalid="ignore"):
        right = total - sums
        gain = sums * sums / counts + right * right / (n - counts) - parent
    gain = np.where(ok, gain, -np.inf)
    k = int(np.argmax(gain))
    if not gain[k] > -1.0:
        return -1.0, -1
    return float(gain[k]), k


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(x):
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def drop_threshold(dropout):
    if dropout <= 0.0:
        return 0
    if dropout >= 1.0:
        return 1 << 32
    return int(np.ceil(dropout * 4294967296.0))


def dropout_keep(mask_key, rows, hidden, dropout):
    """Keep-mask from a counter-based hash of (key, row, unit pair).

    Each 64-bit hash gives two 32-bit uniforms: the low half decides unit 2q,
    the high half unit 2q + 1.
    """
    half = (hidden + 1) // 2
    with np.errstate(over="ignore"):
        ctr = np.uint64(mask_key) + np.arange(rows * half, dtype=np.uint64)
    bits = _splitmix64(ctr).reshape(rows, half)
    u = np.empty((rows, 2 * half), dtype=np.uint64)
    u[:, 0::2] = bits & np.uint64(0xFFFFFFFF)
    u[:, 1::2] = bits >> np.uint64(32)
    return u[:, :hidden] >= np.uint64(drop_threshold(dropout))


def mlp_pair_grads(indptr, cols, vals, ridx, labels, margin, w1, b1, w2, b2, dropout, mask_key,
                   h_buf, d_buf, g_w1, g_b1, g_w2, g_b2):
    n_pairs = len(labels)
    rows = 2 * n_pairs
    hidden = w1.shape[1]
    counts = np.diff(indptr)[ridx]
    row_of = np.repeat(np.arange(rows), counts)
    pos = np.concatenate([np.arange(indptr[i], indptr[i + 1]) for i in ridx]) if len(cols) else np.zeros(0, np.int64)
    x = np.zeros((rows, w1.shape[0]))
    np.add.at(x, (row_of, cols[pos]), vals[pos])
    z = x @ w1 + b1
    scale = 1.0 / (1.0 - dropout) if dropout > 0.0 else 1.0
    d = np.where(z > 0.0, scale, 0.0)
    if dropout > 0.0:
        d = np.where(dropout_keep(mask_key, rows, hidden, dropout), d, 0.0)
    h = z * d
    s = h @ w2 + b2
    hinge = -labels * (s[:n_pairs] - s[n_pairs:]) + margin
    active = hinge > 0.0
    gs = np.zeros(rows)
    gs[:n_pairs] = np.where(active, -labels / n_pairs, 0.0)
    gs[n_pairs:] = np.where(active, labels / n_pairs, 0.0)
    gh = np.outer(gs, w2) * d
    g_w1[...] = x.T @ gh
    g_b1[...] = gh.sum(axis=0)
    g_w2[...] = h.T @ gs
    g_b2[0] = gs.sum()
    return float(np.where(active, hinge, 0.0).sum() / n_pairs)


def amsgrad_update(p, g, m, v, vh, lr, weight_decay, beta1, beta2, eps, corr1):
    g = g + weight_decay * p
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    np.maximum(vh, v, out=vh)
    p -= lr * (m / corr1) / (np.sqrt(vh) + eps)
