"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module (``max_offdiag_dot``,
``kernel_cross`` ...) dispatch to one flavour according to
:data:`sphdki._accel.USE_NUMBA`. The ``nb_*`` and ``np_*`` names stay
importable so tests and the benchmark can call both sides directly.

All functions take C-contiguous float64 arrays of unit vectors, shape (n, d+1).
Reductions run in a fixed loop order so results do not depend on scheduling.
"""
import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

WENDLAND = 0
GAUSSIAN = 1

# rows per block in the numpy kernels; bounds the temporaries at ~16 MB
_CHUNK_ENTRIES = 2_000_000


def _row_chunks(n_rows, n_cols):
    step = max(1, _CHUNK_ENTRIES // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield start, min(start + step, n_rows)


# ----------------------------------------------------------------------------
# numpy flavour
# ----------------------------------------------------------------------------

def np_wendland(u):
    u = np.asarray(u, dtype=np.float64)
    v = np.clip(1.0 - u, 0.0, None)
    v2 = v * v
    v4 = v2 * v2
    return v4 * v4 * (((32.0 * u + 25.0) * u + 8.0) * u + 1.0)


def np_profile(chord_sq, kind, param):
    if kind == WENDLAND:
        return np_wendland(np.sqrt(chord_sq))
    return np.exp(-chord_sq / (2.0 * param * param))


def np_kernel_cross(X, Y, kind, param):
    out = np.empty((X.shape[0], Y.shape[0]))
    for a, b in _row_chunks(X.shape[0], Y.shape[0]):
        chord_sq = np.maximum(2.0 - 2.0 * (X[a:b] @ Y.T), 0.0)
        out[a:b] = np_profile(chord_sq, kind, param)
    return out


def mirror_upper(A, step=512):
    """Copy the strict upper triangle of square ``A`` onto the lower one, in place."""
    n = A.shape[0]
    for a in range(0, n, step):
        b = min(a + step, n)
        A[a:b, :a] = A[:a, a:b].T
        blk = A[a:b, a:b]
        lo = np.tril_indices(b - a, -1)
        blk[lo] = blk.T[lo]
    return A


def np_kernel_gram(X, kind, param):
    K = mirror_upper(np_kernel_cross(X, X, kind, param))
    K[np.diag_indices_from(K)] = np_profile(np.zeros(X.shape[0]), kind, param)
    return K


def np_max_offdiag_dot(X):
    n = X.shape[0]
    best = -np.inf
    for a, b in _row_chunks(n, n):
        G = X[a:b] @ X.T
        G[np.arange(b - a), np.arange(a, b)] = -np.inf
        best = max(best, G.max())
    return best


def np_min_max_dot(C, X):
    """min over rows c of C of max over rows x of X of c.x"""
    worst = np.inf
    for a, b in _row_chunks(C.shape[0], X.shape[0]):
        worst = min(worst, (C[a:b] @ X.T).max(axis=1).min())
    return worst


def np_zonal_sums(X, w, kmax, dim):
    """S_k = sum_ij w_i w_j P_k(x_i.x_j) for k = 0..kmax (normalized Gegenbauer)."""
    n = X.shape[0]
    S = np.zeros(kmax + 1)
    for a, b in _row_chunks(n, n):
        t = np.clip(X[a:b] @ X.T, -1.0, 1.0)
        wa = w[a:b]
        p_prev = np.ones_like(t)
        S[0] += wa @ p_prev @ w
        if kmax == 0:
            continue
        p = t.copy()
        S[1] += wa @ p @ w
        for k in range(1, kmax):
            p_next = ((2 * k + dim - 1) * t * p - k * p_prev) / (k + dim - 1)
            p_prev, p = p, p_next
            S[k + 1] += wa @ p @ w
    return S


def np_saj_stage1(dist, cap, order):
    n = dist.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    block = 0
    while True:
        free = labels < 0
        if not free.any():
            break
        open_ = free.copy()
        while open_.any():
            cand = np.flatnonzero(open_)
            x = cand[np.argmin(pos[cand])]
            labels[x] = block
            open_ &= dist[x] > cap
            open_[x] = False
        block += 1
    return labels


def np_fits(dist, members, x, cap):
    return members.size == 0 or bool(np.all(dist[x, members] > cap))


# ----------------------------------------------------------------------------
# numba flavour
# ----------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_wendland_scalar(u):
        if u >= 1.0:
            return 0.0
        v = 1.0 - u
        v2 = v * v
        v4 = v2 * v2
        return v4 * v4 * (((32.0 * u + 25.0) * u + 8.0) * u + 1.0)

    @njit(cache=True)
    def _nb_profile_scalar(chord_sq, kind, param):
        if kind == 0:
            return _nb_wendland_scalar(np.sqrt(chord_sq))
        return np.exp(-chord_sq / (2.0 * param * param))

    @njit(cache=True)
    def nb_wendland(u):
        out = np.empty(u.shape[0])
        for i in range(u.shape[0]):
            out[i] = _nb_wendland_scalar(u[i])
        return out

    @njit(cache=True)
    def _nb_dot(X, i, Y, j):
        s = 0.0
        for c in range(X.shape[1]):
            s += X[i, c] * Y[j, c]
        return s

    @njit(cache=True)
    def nb_kernel_cross(X, Y, kind, param):
        out = np.empty((X.shape[0], Y.shape[0]))
        for i in range(X.shape[0]):
            for j in range(Y.shape[0]):
                c2 = 2.0 - 2.0 * _nb_dot(X, i, Y, j)
                if c2 < 0.0:
                    c2 = 0.0
                out[i, j] = _nb_profile_scalar(c2, kind, param)
        return out

    @njit(cache=True)
    def nb_kernel_gram(X, kind, param):
        n = X.shape[0]
        out = np.empty((n, n))
        diag = _nb_profile_scalar(0.0, kind, param)
        for i in range(n):
            out[i, i] = diag
            for j in range(i + 1, n):
                c2 = 2.0 - 2.0 * _nb_dot(X, i, X, j)
                if c2 < 0.0:
                    c2 = 0.0
                v = _nb_profile_scalar(c2, kind, param)
                out[i, j] = v
                out[j, i] = v
        return out

    @njit(cache=True)
    def nb_max_offdiag_dot(X):
        best = -np.inf
        for i in range(X.shape[0]):
            for j in range(i + 1, X.shape[0]):
                g = _nb_dot(X, i, X, j)
                if g > best:
                    best = g
        return best

    @njit(cache=True)
    def nb_min_max_dot(C, X):
        worst = np.inf
        for i in range(C.shape[0]):
            best = -np.inf
            for j in range(X.shape[0]):
                g = _nb_dot(C, i, X, j)
                if g > best:
                    best = g
            if best < worst:
                worst = best
        return worst

    @njit(cache=True)
    def nb_zonal_sums(X, w, kmax, dim):
        n = X.shape[0]
        S = np.zeros(kmax + 1)
        row = np.zeros(kmax + 1)
        for i in range(n):
            for k in range(kmax + 1):
                row[k] = 0.0
            for j in range(n):
                t = _nb_dot(X, i, X, j)
                if t > 1.0:
                    t = 1.0
                elif t < -1.0:
                    t = -1.0
                wj = w[j]
                p_prev = 1.0
                row[0] += wj
                if kmax == 0:
                    continue
                p = t
                row[1] += wj * p
                for k in range(1, kmax):
                    p_next = ((2 * k + dim - 1) * t * p - k * p_prev) / (k + dim - 1)
                    p_prev = p
                    p = p_next
                    row[k + 1] += wj * p
            for k in range(kmax + 1):
                S[k] += w[i] * row[k]
        return S

    @njit(cache=True)
    def nb_saj_stage1(dist, cap, order):
        n = dist.shape[0]
        labels = np.full(n, -1, dtype=np.int64)
        open_ = np.zeros(n, dtype=np.bool_)
        block = 0
        assigned = 0
        while assigned < n:
            n_open = 0
            for i in range(n):
                open_[i] = labels[i] < 0
                if open_[i]:
                    n_open += 1
            cursor = 0
            while n_open > 0:
                while not open_[order[cursor]]:
                    cursor += 1
                x = order[cursor]
                labels[x] = block
                assigned += 1
                for i in range(n):
                    if open_[i] and (i == x or dist[x, i] <= cap):
                        open_[i] = False
                        n_open -= 1
            block += 1
        return labels

    @njit(cache=True)
    def nb_fits(dist, members, x, cap):
        for j in range(members.shape[0]):
            if dist[x, members[j]] <= cap:
                return False
        return True


# ----------------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------------

if USE_NUMBA:
    wendland_array = nb_wendland
    kernel_cross = nb_kernel_cross
    kernel_gram = nb_kernel_gram
    max_offdiag_dot = nb_max_offdiag_dot
    min_max_dot = nb_min_max_dot
    zonal_sums = nb_zonal_sums
    saj_stage1_labels = nb_saj_stage1
    fits_block = nb_fits
else:
    wendland_array = np_wendland
    kernel_cross = np_kernel_cross
    kernel_gram = np_kernel_gram
    max_offdiag_dot = np_max_offdiag_dot
    min_max_dot = np_min_max_dot
    zonal_sums = np_zonal_sums
    saj_stage1_labels = np_saj_stage1
    fits_block = np_fits
