"""Pure numpy implementations of the compiled kernels (same semantics)."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def median_filter_shrink(a, window):
    a = np.ascontiguousarray(a, dtype=np.float64)
    n = a.shape[0]
    half = window // 2
    out = np.empty_like(a)
    if n == 0:
        return out
    if n > 2 * half:
        out[half:n - half] = np.median(sliding_window_view(a, 2 * half + 1, axis=0), axis=-1)
    for i in list(range(min(half, n))) + list(range(max(n - half, half), n)):
        h = min(half, i, n - 1 - i)
        out[i] = np.median(a[i - h:i + h + 1], axis=0)
    return out


def nearest_centroid(X, C):
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    d2 = np.zeros((X.shape[0], C.shape[0]))
    for t in range(X.shape[1]):
        diff = X[:, t, None] - C[None, :, t]
        d2 += diff * diff
    labels = np.argmin(d2, axis=1).astype(np.int64)
    return labels, d2[np.arange(X.shape[0]), labels]


def smo_solve(K, y, C, tol, max_iter):
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0
    it = 0
    m_up = M_low = 0.0
    while True:
        v = -y * G
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        j = int(np.flatnonzero(low)[np.argmin(v[low])])
        m_up, M_low = v[i], v[j]
        gap = m_up - M_low
        if gap < tol or it >= max_iter:
            break
        it += 1
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 1e-12:
            a = 1e-12
        step = gap / a
        bi = C - alpha[i] if y[i] > 0 else alpha[i]
        bj = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(step, bi, bj)
        G = G + y * step * (K[:, i] - K[:, j])
        if step == bi:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] = alpha[i] + y[i] * step
        if step == bj:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] = alpha[j] - y[j] * step

    free = [float(-y[t] * G[t]) for t in range(n) if 0 < alpha[t] < C]
    if free:
        total = 0.0
        for f in free:
            total += f
        bias = total / len(free)
    else:
        bias = 0.5 * (float(m_up) + float(M_low))
    return alpha, float(bias), it, float(gap)
