"""Quadrature grids, oriented contours, Nystrom algebra and root-finding drivers."""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _accel
from .errors import (
    AmbiguousCount,
    DerivativeVanishes,
    EvaluationTooCloseToContour,
    InvalidInput,
    NoConvergence,
    NonFiniteKernel,
    SingularSystem,
    ZeroOnBoundary,
)

TWO_PI = 2.0 * math.pi


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


# -- reference panel ------------------------------------------------------------

_REF_CACHE = {}


def reference_panel(order):
    """Gauss-Legendre nodes/weights on [-1, 1] plus barycentric weights and
    the spectral differentiation matrix."""
    if order not in _REF_CACHE:
        x, w = leggauss(order)
        v = (-1.0) ** np.arange(order) * np.sqrt((1 - x * x) * w)
        dx = x[:, None] - x[None, :]
        np.fill_diagonal(dx, 1.0)
        D = (v[None, :] / v[:, None]) / dx
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        for a in (x, w, v, D):
            a.setflags(write=False)
        _REF_CACHE[order] = (x, w, v, D)
    return _REF_CACHE[order]


# -- types ------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverReport:
    converged: bool
    iterations: int
    residual: float
    damping: float = 1.0

    def to_dict(self):
        return {"converged": bool(self.converged), "iterations": int(self.iterations),
                "residual": float(self.residual), "damping": float(self.damping)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["converged"], d["iterations"], d["residual"], d["damping"])


@dataclass(frozen=True, eq=False)
class QuadGrid:
    """Composite Gauss-Legendre rule on [-cutoff, cutoff]."""
    nodes: np.ndarray
    weights: np.ndarray
    cutoff: float
    panels: int
    order: int

    def __len__(self):
        return len(self.nodes)

    def spec(self):
        return {"cutoff": self.cutoff, "panels": self.panels, "order": self.order}

    def refined(self, factor=2):
        return make_real_grid(self.cutoff, self.panels * factor, self.order)


def make_real_grid(cutoff, panels, order):
    """Composite Gauss-Legendre grid with `panels` equal panels of `order` nodes."""
    if not (cutoff > 0) or not math.isfinite(cutoff):
        raise InvalidInput(f"cutoff must be positive and finite, got {cutoff}")
    if int(panels) < 1 or int(order) < 2:
        raise InvalidInput(f"need panels >= 1 and order >= 2, got {panels}, {order}")
    panels, order = int(panels), int(order)
    x, w, _, _ = reference_panel(order)
    edges = np.linspace(-cutoff, cutoff, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadGrid(_frozen(nodes, float), _frozen(weights, float), float(cutoff), panels, order)


def default_cutoff(h, T, alpha_im=0.0):
    """Truncation where the Fermi weight is below double precision: sqrt(|h| + 40T)
    rounded up, enlarged when Im(alpha) shifts the effective chemical potential."""
    return float(math.ceil(math.sqrt(abs(h) + 40.0 * T + abs(TWO_PI * T * alpha_im))))


def default_grid(h, T, alpha_im=0.0, panel_width=1.0, order=16):
    """Real grid of equal panels no wider than `panel_width`, narrowed to twice the
    free-fermion distance of the Fermi-weight poles from R (small at low T)."""
    cutoff = default_cutoff(h, T, alpha_im)
    d = cmath.sqrt(abs(h) + 1j * math.pi * T).imag
    width = min(panel_width, max(2.0 * d, 0.1))
    panels = max(4, int(math.ceil(2 * cutoff / width)))
    return make_real_grid(cutoff, panels, order)


@dataclass(frozen=True, eq=False)
class Contour:
    """Oriented polyline with a Gauss-Legendre rule on each panel.

    ``weights`` are complex line elements dmu, so that sum(weights * f(nodes))
    approximates the contour integral of f.
    """
    vertices: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    closed: bool
    order: int
    panel_a: np.ndarray          # panel start points
    panel_b: np.ndarray          # panel end points
    panel_segment: np.ndarray    # index of the polyline segment owning each panel
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.nodes)

    @property
    def n_panels(self):
        return len(self.panel_a)

    @property
    def orientation(self):
        return "closed-ccw" if self.closed else "open"

    @classmethod
    def polyline(cls, vertices, max_panel=1.0, order=16, closed=False, meta=None,
                 near=(), near_ratio=0.5):
        """Polyline through `vertices`; panels are split until no panel is longer
        than `near_ratio` times its distance to any point in `near`."""
        v = np.asarray(vertices, dtype=complex)
        near = np.asarray(near, dtype=complex).ravel()
        if closed and v[0] != v[-1]:
            v = np.append(v, v[0])
        if len(v) < 2:
            raise InvalidInput("a contour needs at least two vertices")
        x, w, _, _ = reference_panel(order)
        pa, pb, seg = [], [], []
        for k in range(len(v) - 1):
            a, b = v[k], v[k + 1]
            length = abs(b - a)
            if length == 0:
                continue
            m = max(1, int(math.ceil(length / max_panel - 1e-12)))
            t = np.linspace(0.0, 1.0, m + 1)
            stack = [(a + (b - a) * t[i], a + (b - a) * t[i + 1]) for i in range(m)][::-1]
            while stack:
                p0, p1 = stack.pop()
                if len(near) and abs(p1 - p0) > near_ratio * _seg_dist(p0, p1, near) \
                        and abs(p1 - p0) > 1e-6:
                    pm = 0.5 * (p0 + p1)
                    stack += [(pm, p1), (p0, pm)]
                    continue
                pa.append(p0)
                pb.append(p1)
                seg.append(k)
        pa, pb = np.array(pa), np.array(pb)
        mid, half = 0.5 * (pa + pb), 0.5 * (pb - pa)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        if closed and _signed_area(v) < 0:
            raise InvalidInput("closed contours must be counterclockwise")
        return cls(_frozen(v, complex), _frozen(nodes, complex), _frozen(weights, complex),
                   bool(closed), int(order), _frozen(pa, complex), _frozen(pb, complex),
                   _frozen(seg, int), dict(meta or {}))

    @classmethod
    def from_grid(cls, grid):
        """The real segment [-cutoff, cutoff] with exactly the nodes of `grid`."""
        x, _, _, _ = reference_panel(grid.order)
        edges = np.linspace(-grid.cutoff, grid.cutoff, grid.panels + 1)
        return cls(_frozen([-grid.cutoff, grid.cutoff], complex),
                   _frozen(grid.nodes.astype(complex), complex),
                   _frozen(grid.weights.astype(complex), complex), False, grid.order,
                   _frozen(edges[:-1], complex), _frozen(edges[1:], complex),
                   _frozen(np.zeros(grid.panels, int), int), {})

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, max_panel=1.0, order=16):
        """Closed counterclockwise rectangle [x0,x1] x [y0,y1]."""
        v = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        return cls.polyline(v, max_panel, order, closed=True)

    def tangents(self):
        """Unit tangent at every node."""
        t = (self.panel_b - self.panel_a) / np.abs(self.panel_b - self.panel_a)
        return np.repeat(t, self.order)

    def panel_view(self, values):
        return np.asarray(values).reshape(self.n_panels, self.order)

    def derivative(self, values):
        """Spectral d/dmu of nodal values (panelwise Legendre differentiation)."""
        _, _, _, D = reference_panel(self.order)
        f = self.panel_view(values)
        scale = 2.0 / (self.panel_b - self.panel_a)
        return ((f @ D.T) * scale[:, None]).ravel()

    def interpolate(self, values, pts, panel):
        """Barycentric Legendre interpolant of panel `panel` evaluated at `pts`."""
        x, _, v, _ = reference_panel(self.order)
        a, b = self.panel_a[panel], self.panel_b[panel]
        t = (2.0 * (np.asarray(pts, dtype=complex) - a) / (b - a) - 1.0).ravel()
        f = self.panel_view(values)[panel]
        d = t[:, None] - x[None, :]
        hit = np.isclose(d, 0.0, atol=1e-15)
        d[hit] = 1.0
        c = v[None, :] / d
        out = (c @ f) / c.sum(axis=1)
        rows, cols = np.nonzero(hit)
        out[rows] = f[cols]
        return out

    def integrate(self, values):
        return complex(np.sum(self.weights * values))

    def length(self):
        return float(np.sum(np.abs(self.panel_b - self.panel_a)))

    def max_abs_imag(self):
        return float(np.max(np.abs(self.vertices.imag)))

    def distance(self, pts):
        """Distance from each point to the polyline."""
        p = np.atleast_1d(np.asarray(pts, dtype=complex))
        a, b = self.vertices[:-1], self.vertices[1:]
        ab = b - a
        L2 = np.abs(ab) ** 2
        L2[L2 == 0] = 1.0
        t = np.clip(((p[:, None] - a[None, :]) * np.conj(ab)[None, :]).real / L2[None, :], 0, 1)
        return np.min(np.abs(p[:, None] - (a[None, :] + t * ab[None, :])), axis=1)


def _seg_dist(a, b, pts):
    ab = b - a
    t = np.clip(((pts - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
    return float(np.min(np.abs(pts - (a + t * ab))))


def _signed_area(v):
    return 0.5 * float(np.sum(v[:-1].real * v[1:].imag - v[1:].real * v[:-1].imag))


def bernstein_rho(a, b, pts):
    """Bernstein-ellipse parameter of `pts` relative to the segments [a, b]."""
    t = (2.0 * (pts[:, None] - a[None, :]) / (b - a)[None, :]) - 1.0
    s = np.sqrt(t - 1.0) * np.sqrt(t + 1.0)
    return np.maximum(np.abs(t + s), np.abs(t - s))


# -- drivers ---------------------------------------------------------------------

def fixed_point(mapping, init, damping=1.0, tol=1e-12, max_iter=500, min_damping=2.0 ** -10):
    """Damped Picard iteration v <- (1-theta) v + theta map(v).

    The damping is halved (and the step rejected) whenever the sup-norm
    residual grows, down to `min_damping`.
    """
    if not (0 < damping <= 1):
        raise InvalidInput("damping must lie in (0, 1]")
    v = np.asarray(init)
    theta = float(damping)
    m = np.asarray(mapping(v))
    res = float(np.max(np.abs(m - v)))
    it = 1
    while not res <= tol:
        if it >= max_iter or not math.isfinite(res):
            rep = SolverReport(False, it, res, theta)
            raise NoConvergence(f"fixed point: residual {res:.3e} after {it} iterations", rep, v)
        v_new = (1.0 - theta) * v + theta * m
        m_new = np.asarray(mapping(v_new))
        res_new = float(np.max(np.abs(m_new - v_new)))
        it += 1
        if (res_new > res or not math.isfinite(res_new)) and theta > min_damping:
            theta *= 0.5
            continue
        v, m, res = v_new, m_new, res_new
    return v, SolverReport(True, it, res, theta)


def ring_derivative(f, z, h):
    """Fourth-order derivative of an analytic f from four points on a circle."""
    return (f(z + h) - f(z - h) - 1j * (f(z + 1j * h) - f(z - 1j * h))) / (4.0 * h)


def newton_complex(f, fprime=None, seed=0j, tol=1e-12, max_iter=60, deriv_floor=1e-14):
    """Damped Newton iteration for an analytic function of one complex variable."""
    z = complex(seed)
    fz = complex(f(z))
    for _ in range(max_iter):
        if not (abs(fz) > tol):
            if not math.isfinite(abs(fz)):
                break
            return z
        d = complex(fprime(z)) if fprime is not None else \
            complex(ring_derivative(f, z, 1e-4 * max(1.0, abs(z))))
        if not abs(d) > deriv_floor:
            raise DerivativeVanishes(f"|f'({z})| = {abs(d):.3e}")
        step = fz / d
        t = 1.0
        while True:
            z_new = z - t * step
            f_new = complex(f(z_new))
            if abs(f_new) < abs(fz) or t < 1e-3:
                break
            t *= 0.5
        z, fz = z_new, f_new
    if abs(fz) <= tol:
        return z
    raise NoConvergence(f"newton: |f| = {abs(fz):.3e} after {max_iter} iterations",
                        SolverReport(False, max_iter, abs(fz)), z)


# -- Nystrom algebra -------------------------------------------------------------

def _nodes_weights(contour):
    if isinstance(contour, QuadGrid):
        return contour.nodes, contour.weights
    return contour.nodes, contour.weights


def nystrom_matrix(kernel, contour):
    """Matrix kernel(x_j, x_k) * w_k (kernel may also be a precomputed matrix)."""
    x, w = _nodes_weights(contour)
    if callable(kernel):
        M = np.asarray(kernel(x[:, None], x[None, :]), dtype=complex)
        M = np.broadcast_to(M, (len(x), len(x)))
    else:
        M = np.asarray(kernel, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise NonFiniteKernel("kernel is not finite at some node pair")
    return M * w[None, :]


def nystrom_det(kernel, contour, factor=1.0):
    """Fredholm determinant det(I + factor*K) by Nystrom discretisation."""
    M = factor * nystrom_matrix(kernel, contour)
    sign, logabs = np.linalg.slogdet(np.eye(len(M)) + M)
    return complex(sign * np.exp(logabs))


def nystrom_solve(kernel, rhs, contour, factor=-1.0 / TWO_PI):
    """Solve (I + factor*K) v = rhs on the nodes; default factor is -1/(2 pi)."""
    M = np.eye(len(rhs)) + factor * nystrom_matrix(kernel, contour)
    rhs = np.asarray(rhs, dtype=complex)
    try:
        v = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    res = float(np.max(np.abs(M @ v - rhs)))
    if not np.all(np.isfinite(v)) or res > 1e-6 * max(1.0, float(np.max(np.abs(rhs)))):
        raise SingularSystem(f"Nystrom solve residual {res:.3e}")
    return v, SolverReport(True, 1, res)


def _refined_panel_integral(contour, values, panel, lam, rho_min, depth=0):
    """Integral of f/(mu - lam) over one panel using its interpolant on sub-panels."""
    x, w, _, _ = reference_panel(contour.order)
    a, b = contour.panel_a[panel], contour.panel_b[panel]
    total = 0j
    stack = [(0.0, 1.0, 0)]
    while stack:
        s0, s1, d = stack.pop()
        pa, pb = a + (b - a) * s0, a + (b - a) * s1
        rho = bernstein_rho(np.array([pa]), np.array([pb]), np.array([lam]))[0, 0]
        if rho < rho_min and d < 40:
            sm = 0.5 * (s0 + s1)
            stack += [(s0, sm, d + 1), (sm, s1, d + 1)]
            continue
        mid, half = 0.5 * (pa + pb), 0.5 * (pb - pa)
        mu = mid + half * x
        fv = contour.interpolate(values, mu, panel)
        total += np.sum(half * w * fv / (mu - lam))
    return total


def cauchy_transform(contour, values, lam, min_distance=1e-9):
    """L[f](lam) = int f(mu)/(mu - lam) dmu over the contour.

    Points close to a panel (inside its accuracy ellipse) are handled by
    integrating the panel interpolant on adaptively split sub-panels; points
    closer than `min_distance` raise EvaluationTooCloseToContour.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    values = np.asarray(values, dtype=complex)
    if np.any(contour.distance(lam_arr) < min_distance):
        raise EvaluationTooCloseToContour("evaluation point lies on the contour")
    out = _accel.cauchy_apply(lam_arr, contour.nodes, contour.weights * values)
    rho_min = 10.0 ** (14.0 / (2 * contour.order))
    rho = bernstein_rho(contour.panel_a, contour.panel_b, lam_arr)
    bad_pts, bad_panels = np.nonzero(rho < rho_min)
    if len(bad_pts):
        x, w, _, _ = reference_panel(contour.order)
        fp = contour.panel_view(values)
        for i, p in zip(bad_pts, bad_panels):
            a, b = contour.panel_a[p], contour.panel_b[p]
            mu = 0.5 * (a + b) + 0.5 * (b - a) * x
            plain = np.sum(0.5 * (b - a) * w * fp[p] / (mu - lam_arr[i]))
            out[i] += _refined_panel_integral(contour, values, p, lam_arr[i], rho_min) - plain
    return out if np.ndim(lam) else complex(out[0])


# -- argument principle ------------------------------------------------------------

def count_zeros(f, corner_a, corner_b, fprime=None, n_init=64, zero_tol=1e-12,
                max_points=200000):
    """Number of zeros of analytic `f` inside the rectangle with opposite corners
    `corner_a`, `corner_b`, by the argument principle."""
    za, zb = complex(corner_a), complex(corner_b)
    x0, x1 = sorted((za.real, zb.real))
    y0, y1 = sorted((za.imag, zb.imag))
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        raise InvalidInput("degenerate rectangle")
    verts = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    return count_zeros_polygon(f, verts, fprime, n_init, zero_tol, max_points)


def count_zeros_polygon(f, vertices, fprime=None, n_init=64, zero_tol=1e-12,
                        max_points=200000):
    """Number of zeros of analytic `f` inside a simple closed polygon (either
    orientation), by the argument principle.

    `f` must accept numpy arrays.  The boundary is sampled adaptively until the
    phase increment between neighbours is below pi/8; the winding number from
    the phase is cross-checked with a Gauss quadrature of f'/f.
    """
    verts = list(np.asarray(vertices, dtype=complex))
    if verts[0] != verts[-1]:
        verts.append(verts[0])
    verts = np.array(verts)
    sign = 1.0 if _signed_area(verts) > 0 else -1.0
    pts = []
    for k in range(len(verts) - 1):
        t = np.linspace(0.0, 1.0, n_init, endpoint=False)
        pts.append(verts[k] + (verts[k + 1] - verts[k]) * t)
    z = np.concatenate(pts + [np.array([verts[0]])])
    fz = np.asarray(f(z), dtype=complex)
    while True:
        if not np.all(np.isfinite(fz)):
            raise AmbiguousCount("f is not finite on the boundary")
        if np.min(np.abs(fz)) < zero_tol:
            raise ZeroOnBoundary(f"|f| = {np.min(np.abs(fz)):.3e} on the boundary")
        step = np.log(fz[1:] / fz[:-1])
        bad = np.nonzero(np.abs(step.imag) > math.pi / 8)[0]
        if len(bad) == 0:
            break
        if len(z) > max_points:
            raise AmbiguousCount("boundary sampling did not resolve the phase of f")
        zm = 0.5 * (z[bad] + z[bad + 1])
        fm = np.asarray(f(zm), dtype=complex)
        z = np.insert(z, bad + 1, zm)
        fz = np.insert(fz, bad + 1, fm)
    winding = sign * float(np.sum(step.imag)) / TWO_PI
    # independent estimate: Gauss quadrature of f'/f on every sub-interval
    xg, wg, _, _ = reference_panel(4)
    a, b = z[:-1], z[1:]
    mu = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * xg[None, :]
    h = 1e-3 * np.abs(b - a)[:, None] + 1e-14
    muf = mu.ravel()
    fm = np.asarray(f(muf), dtype=complex).reshape(mu.shape)
    dfm = (np.asarray(fprime(muf), dtype=complex).reshape(mu.shape) if fprime is not None
           else ring_derivative(lambda q: np.asarray(f(q.ravel()), dtype=complex).reshape(q.shape), mu, h))
    quad = sign * np.sum((0.5 * (b - a))[:, None] * wg[None, :] * dfm / fm) / (2j * math.pi)
    n = int(round(winding))
    if abs(quad.real - n) >= 0.25 or abs(winding - n) >= 0.25:
        raise AmbiguousCount(f"winding {winding:.4f} vs quadrature {quad.real:.4f}")
    return n
