"""Hot kernels: Lieb-kernel sums, Cauchy and double-pole sums and overflow-safe log(1+e^z).

Every kernel exists twice: a numba ``@njit`` loop and a pure-numpy
broadcast.  The numba path is used when numba imports and the environment
variable ``ARTIFACT_DISABLE_NUMBA`` is unset (or ``0``); both paths return
identical results up to rounding.
"""
import os

import numpy as np

_CHUNK = 512


def _numba_wanted():
    flag = os.environ.get("ARTIFACT_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


# -- numpy implementations ---------------------------------------------------

def _lieb_apply_np(x, nodes, vals, c):
    out = np.empty(x.shape[0], dtype=np.complex128)
    c2 = c * c
    for s in range(0, x.shape[0], _CHUNK):
        d = x[s:s + _CHUNK, None] - nodes[None, :]
        out[s:s + _CHUNK] = (2.0 * c / (d * d + c2)) @ vals
    return out


def _lieb_prime_apply_np(x, nodes, vals, c):
    out = np.empty(x.shape[0], dtype=np.complex128)
    c2 = c * c
    for s in range(0, x.shape[0], _CHUNK):
        d = x[s:s + _CHUNK, None] - nodes[None, :]
        q = d * d + c2
        out[s:s + _CHUNK] = (-4.0 * c * d / (q * q)) @ vals
    return out


def _lieb_matrix_np(x, y, c):
    d = x[:, None] - y[None, :]
    return 2.0 * c / (d * d + c * c)


def _cauchy_apply_np(pts, nodes, vals):
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for s in range(0, pts.shape[0], _CHUNK):
        out[s:s + _CHUNK] = (1.0 / (nodes[None, :] - pts[s:s + _CHUNK, None])) @ vals
    return out


def _cauchy2_apply_np(pts, nodes, vals):
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for s in range(0, pts.shape[0], _CHUNK):
        d = nodes[None, :] - pts[s:s + _CHUNK, None]
        out[s:s + _CHUNK] = (1.0 / (d * d)) @ vals
    return out


def _log1pexp_np(z):
    pos = z.real > 0
    out = np.empty_like(z)
    out[pos] = z[pos] + np.log1p(np.exp(-z[pos]))
    out[~pos] = np.log1p(np.exp(z[~pos]))
    return out


# -- numba implementations ---------------------------------------------------

try:
    import numba as _nb

    @_nb.njit(cache=True)
    def _lieb_apply_nb(x, nodes, vals, c):
        m, n = x.shape[0], nodes.shape[0]
        out = np.zeros(m, dtype=np.complex128)
        c2 = c * c
        for i in range(m):
            acc = 0j
            xi = x[i]
            for k in range(n):
                d = xi - nodes[k]
                acc += vals[k] / (d * d + c2)
            out[i] = 2.0 * c * acc
        return out

    @_nb.njit(cache=True)
    def _lieb_prime_apply_nb(x, nodes, vals, c):
        m, n = x.shape[0], nodes.shape[0]
        out = np.zeros(m, dtype=np.complex128)
        c2 = c * c
        for i in range(m):
            acc = 0j
            xi = x[i]
            for k in range(n):
                d = xi - nodes[k]
                q = d * d + c2
                acc += d * vals[k] / (q * q)
            out[i] = -4.0 * c * acc
        return out

    @_nb.njit(cache=True)
    def _lieb_matrix_nb(x, y, c):
        m, n = x.shape[0], y.shape[0]
        out = np.empty((m, n), dtype=np.complex128)
        c2 = c * c
        for i in range(m):
            for k in range(n):
                d = x[i] - y[k]
                out[i, k] = 2.0 * c / (d * d + c2)
        return out

    @_nb.njit(cache=True)
    def _cauchy_apply_nb(pts, nodes, vals):
        m, n = pts.shape[0], nodes.shape[0]
        out = np.zeros(m, dtype=np.complex128)
        for i in range(m):
            acc = 0j
            for k in range(n):
                acc += vals[k] / (nodes[k] - pts[i])
            out[i] = acc
        return out

    @_nb.njit(cache=True)
    def _cauchy2_apply_nb(pts, nodes, vals):
        m, n = pts.shape[0], nodes.shape[0]
        out = np.zeros(m, dtype=np.complex128)
        for i in range(m):
            acc = 0j
            for k in range(n):
                d = nodes[k] - pts[i]
                acc += vals[k] / (d * d)
            out[i] = acc
        return out

    @_nb.njit(cache=True)
    def _log1p_nb(w):
        # Kahan's trick: exact cancellation of the rounding in 1 + w
        u = 1.0 + w
        if u == 1.0:
            return w
        return np.log(u) * (w / (u - 1.0))

    @_nb.njit(cache=True)
    def _log1pexp_nb(z):
        out = np.empty_like(z)
        for i in range(z.shape[0]):
            v = z[i]
            if v.real > 0:
                out[i] = v + _log1p_nb(np.exp(-v))
            else:
                out[i] = _log1p_nb(np.exp(v))
        return out

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def backend():
    """Name of the active backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if (HAVE_NUMBA and _numba_wanted()) else "numpy"


def _c(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.complex128).ravel())


def lieb_apply(x, nodes, vals, c, impl=None):
    """sum_k K(x_i - nodes_k) vals_k with K(l) = 2c/(l^2+c^2)."""
    impl = impl or backend()
    f = _lieb_apply_nb if impl == "numba" else _lieb_apply_np
    return f(_c(x), _c(nodes), _c(vals), float(c))


def lieb_prime_apply(x, nodes, vals, c, impl=None):
    """sum_k K'(x_i - nodes_k) vals_k."""
    impl = impl or backend()
    f = _lieb_prime_apply_nb if impl == "numba" else _lieb_prime_apply_np
    return f(_c(x), _c(nodes), _c(vals), float(c))


def lieb_matrix(x, y, c, impl=None):
    """Matrix K(x_i - y_k)."""
    impl = impl or backend()
    f = _lieb_matrix_nb if impl == "numba" else _lieb_matrix_np
    return f(_c(x), _c(y), float(c))


def cauchy_apply(pts, nodes, vals, impl=None):
    """sum_k vals_k / (nodes_k - pts_i)."""
    impl = impl or backend()
    f = _cauchy_apply_nb if impl == "numba" else _cauchy_apply_np
    return f(_c(pts), _c(nodes), _c(vals))


def cauchy2_apply(pts, nodes, vals, impl=None):
    """sum_k vals_k / (nodes_k - pts_i)^2."""
    impl = impl or backend()
    f = _cauchy2_apply_nb if impl == "numba" else _cauchy2_apply_np
    return f(_c(pts), _c(nodes), _c(vals))


def log1pexp(z, impl=None):
    """Overflow-safe log(1 + e^z), elementwise, principal branch per element."""
    z = np.asarray(z, dtype=np.complex128)
    impl = impl or backend()
    f = _log1pexp_nb if impl == "numba" else _log1pexp_np
    return f(_c(z)).reshape(z.shape)
