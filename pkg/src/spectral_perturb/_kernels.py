"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``SPECTRAL_PERTURB_NUMBA`` is not set to ``0``/``false``/``no``.
Both paths are always importable (``numba_*`` / ``numpy_*``) so tests and the
benchmark can compare them directly; the unprefixed names are the selected
implementation.
"""
import os

import numpy as np

_FLAG = os.environ.get("SPECTRAL_PERTURB_NUMBA", "1").strip().lower()

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# Cauchy-type kernel  A[n, k] = w[k] / (a[k] - z[n]),  A[n, n] = 0
# Real inputs stay real; anything complex promotes everything to complex128.
# ---------------------------------------------------------------------------


def _common(*arrays):
    dtype = np.result_type(np.float64, *[np.asarray(x).dtype for x in arrays])
    dtype = np.complex128 if np.issubdtype(dtype, np.complexfloating) else np.float64
    return [np.ascontiguousarray(x, dtype=dtype) for x in arrays]


def numpy_cauchy_matrix(a, z, w):
    a, z, w = _common(a, z, w)
    diff = a[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    out = w[None, :] / diff
    np.fill_diagonal(out, 0.0)
    return out


@njit(cache=True)
def _cauchy_matrix_jit(a, z, w):
    n = z.shape[0]
    m = a.shape[0]
    out = np.zeros((n, m), dtype=w.dtype)
    for i in range(n):
        zi = z[i]
        for k in range(m):
            if k != i:
                out[i, k] = w[k] / (a[k] - zi)
    return out


def numba_cauchy_matrix(a, z, w):
    return _cauchy_matrix_jit(*_common(a, z, w))


def numpy_cauchy_matvec(a, z, w, x, adjoint=False):
    # row-blocked so memory stays O(block * n)
    a, z, w, x = _common(a, z, w, x)
    n = a.shape[0]
    out = np.zeros(n, dtype=x.dtype)
    block = 512
    idx = np.arange(n)
    for start in range(0, n, block):
        rows = idx[start:start + block]
        diff = a[None, :] - z[rows, None]
        mask = rows[:, None] == idx[None, :]
        diff[mask] = 1.0
        kern = w[None, :] / diff
        kern[mask] = 0.0
        if adjoint:
            out += kern.conj().T @ x[rows]
        else:
            out[rows] = kern @ x
    return out


@njit(cache=True)
def _cauchy_matvec_jit(a, z, w, x, adjoint):
    n = a.shape[0]
    out = np.zeros(n, dtype=x.dtype)
    if adjoint:
        for i in range(n):
            zi = z[i]
            xi = x[i]
            for k in range(n):
                if k != i:
                    out[k] += np.conj(w[k] / (a[k] - zi)) * xi
    else:
        for i in range(n):
            zi = z[i]
            acc = out[i]
            for k in range(n):
                if k != i:
                    acc += w[k] / (a[k] - zi) * x[k]
            out[i] = acc
    return out


def numba_cauchy_matvec(a, z, w, x, adjoint=False):
    a, z, w, x = _common(a, z, w, x)
    return _cauchy_matvec_jit(a, z, w, x, bool(adjoint))


# ---------------------------------------------------------------------------
# Lorentzian lattice sum  sum_{j=0}^{jmax} 1 / (h^2 + (j*delta)^2)
# ---------------------------------------------------------------------------


def numpy_lorentz_sum(h, delta, jmax):
    total = 0.0
    chunk = 1 << 20
    # summed from the small tail terms upward, in fixed chunks
    for stop in range(jmax + 1, 0, -chunk):
        start = max(0, stop - chunk)
        j = np.arange(stop - 1, start - 1, -1, dtype=np.float64)
        terms = 1.0 / (h * h + (j * delta) ** 2)
        total += float(np.sum(terms))
    return total


@njit(cache=True)
def _lorentz_sum_jit(h, delta, jmax):
    h2 = h * h
    total = 0.0
    comp = 0.0
    for jj in range(jmax, -1, -1):
        x = jj * delta
        y = 1.0 / (h2 + x * x) - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def numba_lorentz_sum(h, delta, jmax):
    return float(_lorentz_sum_jit(float(h), float(delta), int(jmax)))


# ---------------------------------------------------------------------------
# Partial sums  S(N) = sum_{n=2}^{N} w^2 / |t_1 - t_n|^2  at requested N
# ---------------------------------------------------------------------------


def numpy_inverse_square_partial_sums(t, weight, stops):
    t = np.asarray(t, dtype=np.float64)
    terms = (weight / (t[0] - t[1:])) ** 2
    csum = np.concatenate(([0.0], np.cumsum(terms)))
    return np.array([csum[s - 1] for s in stops], dtype=np.float64)


@njit(cache=True)
def _inverse_square_partial_sums_jit(t, weight, stops):
    out = np.empty(stops.shape[0], dtype=np.float64)
    total = 0.0
    k = 1
    for i in range(stops.shape[0]):
        while k < stops[i]:
            d = weight / (t[0] - t[k])
            total += d * d
            k += 1
        out[i] = total
    return out


def numba_inverse_square_partial_sums(t, weight, stops):
    stops = np.asarray(stops, dtype=np.int64)
    order = np.argsort(stops, kind="stable")
    res = _inverse_square_partial_sums_jit(
        np.ascontiguousarray(t, dtype=np.float64), float(weight), stops[order]
    )
    out = np.empty_like(res)
    out[order] = res
    return out


# ---------------------------------------------------------------------------
# Weighted resolvent sum over an upper-triangular (Schur) matrix
#   acc = sum_k w[k] (z[k] I - S)^{-1}
# ---------------------------------------------------------------------------


def numpy_triangular_resolvent_sum(S, z, w):
    S = np.asarray(S, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    n = S.shape[0]
    acc = np.zeros((n, n), dtype=np.complex128)
    eye = np.eye(n)
    step = max(1, (1 << 22) // (n * n))
    # fixed chunk order keeps the reduction reproducible
    for s in range(0, z.shape[0], step):
        inv = np.linalg.inv(z[s:s + step, None, None] * eye[None] - S[None])
        acc += np.tensordot(w[s:s + step], inv, axes=(0, 0))
    return acc


@njit(cache=True)
def _triangular_resolvent_sum_jit(S, z, w):
    n = S.shape[0]
    acc = np.zeros((n, n), dtype=np.complex128)
    X = np.zeros((n, n), dtype=np.complex128)
    for k in range(z.shape[0]):
        zk = z[k]
        # back substitution, one column of (z - S)^{-1} at a time
        for j in range(n):
            X[j, j] = 1.0 / (zk - S[j, j])
            for i in range(j - 1, -1, -1):
                a = 0.0 + 0.0j
                for m in range(i + 1, j + 1):
                    a += S[i, m] * X[m, j]
                X[i, j] = a / (zk - S[i, i])
        wk = w[k]
        for i in range(n):
            for j in range(i, n):
                acc[i, j] += wk * X[i, j]
    return acc


def numba_triangular_resolvent_sum(S, z, w):
    return _triangular_resolvent_sum_jit(
        np.ascontiguousarray(S, dtype=np.complex128),
        np.ascontiguousarray(z, dtype=np.complex128),
        np.ascontiguousarray(w, dtype=np.complex128),
    )


if USE_NUMBA:
    cauchy_matrix = numba_cauchy_matrix
    cauchy_matvec = numba_cauchy_matvec
    lorentz_sum = numba_lorentz_sum
    inverse_square_partial_sums = numba_inverse_square_partial_sums
    triangular_resolvent_sum = numba_triangular_resolvent_sum
else:
    cauchy_matrix = numpy_cauchy_matrix
    cauchy_matvec = numpy_cauchy_matvec
    lorentz_sum = numpy_lorentz_sum
    inverse_square_partial_sums = numpy_inverse_square_partial_sums
    triangular_resolvent_sum = numpy_triangular_resolvent_sum


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Cap BLAS and numba thread pools at ``n``."""
    from threadpoolctl import threadpool_limits

    threadpool_limits(limits=int(n))
    if USE_NUMBA:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
