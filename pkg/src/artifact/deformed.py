"""Deformed TBA equations: the gamma-homotopy for u, the roots s^, holes, and the contour."""
import cmath
import json
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel
from .errors import (
    AtBranchPoint,
    CannotSeparate,
    DerivativeVanishes,
    InvalidInput,
    NoConvergence,
    OutsideStrip,
    RootCollision,
    RootLeftStrip,
)
from .numerics import (
    TWO_PI,
    Contour,
    SolverReport,
    count_zeros,
    count_zeros_polygon,
    fixed_point,
    newton_complex,
)
from .poles import locate_poles
from .thermo import (
    STRIP_MARGIN,
    epsilon_at,
    epsilon_prime_at,
    solve_epsilon,
    unwrap_log,
)

ROOT_RESIDUAL = 1e-10
COLLISION = 1e-6

_TOKEN = re.compile(r"^([+-])([RL])(\d+)$")


# -- scattering phase ------------------------------------------------------------

def theta(lam, c):
    """theta(lam) = i [log(ic + lam) - log(ic - lam)], continuous for |Im lam| < c."""
    lam = np.asarray(lam, dtype=complex)
    if math.isinf(c):
        out = np.zeros_like(lam)
    else:
        a, b = 1j * c + lam, 1j * c - lam
        if np.any(a == 0) or np.any(b == 0):
            raise AtBranchPoint("theta evaluated at +-ic")
        out = 1j * (np.log(a) - np.log(b))
    return out if out.ndim else complex(out)


def lieb(lam, c):
    lam = np.asarray(lam, dtype=complex)
    return np.zeros_like(lam) if math.isinf(c) else 2.0 * c / (lam * lam + c * c)


# -- selections --------------------------------------------------------------------

@dataclass(frozen=True)
class RootSelection:
    """Pole keys (half, side, m) picked in the upper (plus) and lower (minus) half-planes."""
    plus: tuple = ()
    minus: tuple = ()

    def __post_init__(self):
        if len(self.plus) != len(self.minus):
            raise InvalidInput("a selection needs as many upper as lower roots")
        keys = list(self.plus) + list(self.minus)
        if len(set(keys)) != len(keys):
            raise InvalidInput("duplicate roots in selection")
        if any(k[0] != "+" for k in self.plus) or any(k[0] != "-" for k in self.minus):
            raise InvalidInput("plus roots must be upper, minus roots lower")

    @property
    def n(self):
        return len(self.plus)

    @classmethod
    def parse(cls, text):
        """Parse "+R1,+R2;-R1,-L1"; level indices are 1-based (R1 is the nearest pole)."""
        text = (text or "").strip()
        if text in ("", "0", ";"):
            return cls()
        if ";" not in text:
            raise InvalidInput(f"selection {text!r} lacks ';'")
        parts = text.split(";")
        if len(parts) != 2:
            raise InvalidInput(f"selection {text!r} has too many ';'")
        groups = []
        for part, want in zip(parts, "+-"):
            keys = []
            for tok in filter(None, (t.strip() for t in part.split(","))):
                mt = _TOKEN.match(tok)
                if not mt or mt.group(1) != want or int(mt.group(3)) < 1:
                    raise InvalidInput(f"bad selection token {tok!r}")
                keys.append((mt.group(1), mt.group(2), int(mt.group(3)) - 1))
            groups.append(tuple(keys))
        return cls(*groups)

    def __str__(self):
        if self.n == 0:
            return "0"
        fmt = lambda ks: ",".join(f"{h}{s}{m + 1}" for h, s, m in ks)
        return f"{fmt(self.plus)};{fmt(self.minus)}"

    def mirror(self):
        """Image under lam -> -lam (R and L swapped)."""
        sw = {"R": "L", "L": "R"}
        return RootSelection(tuple((h, sw[s], m) for h, s, m in self.plus),
                             tuple((h, sw[s], m) for h, s, m in self.minus))

    @property
    def m_max(self):
        return max((k[2] for k in self.plus + self.minus), default=0)


# -- the deformed equation ---------------------------------------------------------

def _log_combo(u, eps, gamma, T):
    """log[1 + gamma e^{-u/T} + (1-gamma) e^{-eps/T}] without overflow (principal branch)."""
    a, b = -np.asarray(u, dtype=complex) / T, -np.asarray(eps, dtype=complex) / T
    M = np.maximum(np.maximum(a.real, b.real), 0.0)
    return M + np.log(np.exp(-M) + gamma * np.exp(a - M) + (1.0 - gamma) * np.exp(b - M))


class _Problem:
    """Data shared by every gamma step: physical eps, grid, kernel matrix."""

    def __init__(self, thermal, phys):
        self.thermal = thermal
        self.phys = phys
        self.params = thermal.params
        self.c = thermal.params.c
        self.T = thermal.params.T
        self.grid = thermal.grid
        self.lam = thermal.grid.nodes
        self.w = thermal.grid.weights
        self.eps = phys.eps
        self.h_alpha = thermal.params.h_alpha
        self.Kw = None if math.isinf(self.c) else \
            _accel.lieb_matrix(self.lam, self.lam, self.c) * self.w[None, :]
        self.cap = math.inf if math.isinf(self.c) else (1 - STRIP_MARGIN) * self.c

    def driving(self, lam, sp, sm):
        """-iT sum [theta(s+ - lam) - theta(s- - lam)]."""
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros_like(lam)
        for s in sp:
            out -= 1j * self.T * theta(s - lam, self.c)
        for s in sm:
            out += 1j * self.T * theta(s - lam, self.c)
        return out

    def driving_prime(self, lam, sp, sm):
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros_like(lam)
        for s in sp:
            out += 1j * self.T * lieb(s - lam, self.c)
        for s in sm:
            out -= 1j * self.T * lieb(s - lam, self.c)
        return out

    def logw(self, u, gamma):
        return unwrap_log(_log_combo(u, self.eps, gamma, self.T))

    def u_map(self, gamma, sp, sm):
        base = (self.lam ** 2 - self.h_alpha) + self.driving(self.lam, sp, sm)
        if self.Kw is None:
            return lambda u: base
        pref = self.T / TWO_PI
        return lambda u: base - pref * (self.Kw @ self.logw(u, gamma))

    def u_at(self, lam, L, sp, sm):
        """Continuation of u off the grid given the grid log-weight L."""
        lam = np.asarray(lam, dtype=complex)
        if np.any(np.abs(lam.imag) >= self.cap):
            raise OutsideStrip("u evaluated outside the strip")
        out = lam ** 2 - self.h_alpha + self.driving(lam, sp, sm)
        if self.Kw is not None:
            conv = _accel.lieb_apply(lam.ravel(), self.lam, self.w * L, self.c).reshape(lam.shape)
            out = out - self.T / TWO_PI * conv
        return out

    def u_prime_at(self, lam, L, sp, sm):
        lam = np.asarray(lam, dtype=complex)
        out = 2.0 * lam + self.driving_prime(lam, sp, sm)
        if self.Kw is not None:
            conv = _accel.lieb_prime_apply(lam.ravel(), self.lam, self.w * L, self.c).reshape(lam.shape)
            out = out - self.T / TWO_PI * conv
        return out

    def root_function(self, gamma, L, sp, sm):
        T = self.T

        def f(z):
            u = self.u_at(z, L, sp, sm)
            e = epsilon_at(self.phys, z)
            return 1.0 + gamma * np.exp(-u / T) + (1.0 - gamma) * np.exp(-e / T)

        def fp(z):
            u = self.u_at(z, L, sp, sm)
            e = epsilon_at(self.phys, z)
            du = self.u_prime_at(z, L, sp, sm)
            de = epsilon_prime_at(self.phys, z)
            return -(gamma * du * np.exp(-u / T) + (1.0 - gamma) * de * np.exp(-e / T)) / T
        return f, fp


@dataclass(frozen=True, eq=False)
class DeformedState:
    thermal: object
    phys: object              # alpha = 0 thermal state (the physical eps)
    selection: RootSelection
    gamma: float
    u: np.ndarray             # values on the real grid
    logw: np.ndarray          # log[1 + e^{-u/T}] on the real grid (gamma = 1)
    s_plus: tuple
    s_minus: tuple
    r_plus: tuple
    r_minus: tuple
    root_residuals: tuple
    reports: tuple
    contour: object = None
    holes: tuple = ()
    z: np.ndarray = None       # z on the contour nodes
    u_contour: np.ndarray = None
    eps_contour: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def params(self):
        return self.thermal.params

    @property
    def roots(self):
        return self.s_plus + self.s_minus

    def _problem(self):
        return _Problem(self.thermal, self.phys)

    def u_at(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        out = self._problem().u_at(lam_arr, self.logw, self.s_plus, self.s_minus)
        return out if np.ndim(lam) else complex(out)

    def u_prime_at(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        out = self._problem().u_prime_at(lam_arr, self.logw, self.s_plus, self.s_minus)
        return out if np.ndim(lam) else complex(out)

    def residual(self):
        """Sup-norm residual of the real-axis equation with theta driving."""
        pb = self._problem()
        return float(np.max(np.abs(pb.u_map(self.gamma, self.s_plus, self.s_minus)(self.u) - self.u)))

    def to_json(self):
        def cx(a):
            a = np.asarray(a, dtype=complex)
            return [a.real.tolist(), a.imag.tolist()]
        d = {
            "schema": 1, "kind": "DeformedState",
            "thermal": json.loads(self.thermal.to_json()),
            "selection": str(self.selection), "gamma": self.gamma,
            "u": cx(self.u), "s_plus": cx(self.s_plus), "s_minus": cx(self.s_minus),
            "r_plus": cx(self.r_plus), "r_minus": cx(self.r_minus),
            "root_residuals": list(self.root_residuals),
            "holes": cx(self.holes),
            "reports": [r.to_dict() for r in self.reports],
        }
        if self.contour is not None:
            d["contour_vertices"] = cx(self.contour.vertices)
            d["z"] = cx(self.z)
        return json.dumps(d)


def _homotopy_step(pb, gamma, u, sp, sm, tol, max_outer=200):
    """Alternate the fixed point in u and Newton updates of the roots at fixed gamma."""
    reports = []
    u0, sp0, sm0 = u, sp, sm
    for _ in range(max_outer):
        u, rep = fixed_point(pb.u_map(gamma, sp, sm), u, tol=tol, max_iter=400)
        reports.append(rep)
        L = pb.logw(u, gamma)
        f, fp = pb.root_function(gamma, L, sp, sm)
        new_p, new_m = [], []
        for s in sp + sm:
            try:
                z = newton_complex(f, fp, s, tol=1e-13, max_iter=60)
            except (NoConvergence, DerivativeVanishes) as exc:
                raise NoConvergence(f"root update failed at gamma={gamma:g}: {exc}") from exc
            if abs(z.imag) >= pb.cap:
                raise RootLeftStrip(f"root {z} left the strip at gamma={gamma:g}")
            (new_p if s in sp else new_m).append(z)
        new_p, new_m = tuple(new_p), tuple(new_m)
        shift = max((abs(a - b) for a, b in zip(new_p + new_m, sp + sm)), default=0.0)
        sp, sm = new_p, new_m
        if shift <= 0.1 * tol:
            u, rep = fixed_point(pb.u_map(gamma, sp, sm), u, tol=tol, max_iter=400)
            reports.append(rep)
            return u, sp, sm, reports
    # strong root/function coupling (e.g. close to a fold): Newton on all roots at once
    return _reduced_newton(pb, gamma, u0, sp0, sm0, tol, reports)


def _reduced_newton(pb, gamma, u, sp, sm, tol, reports, max_iter=30, step=1e-7):
    """Newton on G(S) = [f_{u(S)}(s_k)], u(S) the fixed point for roots S.

    G is analytic in every root, so forward differences along the real
    direction give the complex Jacobian."""
    n_p = len(sp)
    S = np.array(sp + sm, dtype=complex)

    def G(S, u):
        a, b = tuple(S[:n_p]), tuple(S[n_p:])
        u, rep = fixed_point(pb.u_map(gamma, a, b), u, damping=0.5, tol=tol, max_iter=2000)
        f, _ = pb.root_function(gamma, pb.logw(u, gamma), a, b)
        return np.array([f(s) for s in S]), u, rep

    g, u, rep = G(S, u)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= 1e-13:
            reports.append(rep)
            return u, tuple(S[:n_p]), tuple(S[n_p:]), reports
        J = np.empty((len(S), len(S)), dtype=complex)
        for j in range(len(S)):
            Sh = S.copy()
            Sh[j] += step
            J[:, j] = (G(Sh, u)[0] - g) / step
        try:
            S = S - np.linalg.solve(J, g)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular root Jacobian at gamma={gamma:g}") from exc
        if np.any(np.abs(S.imag) >= pb.cap):
            raise RootLeftStrip(f"root left the strip at gamma={gamma:g}")
        g, u, rep = G(S, u)
    raise NoConvergence(f"root/function iteration did not settle at gamma={gamma:g}")


def _check_roots(sp, sm, cap):
    allr = list(sp) + list(sm)
    for i in range(len(allr)):
        if abs(allr[i].imag) >= cap:
            raise RootLeftStrip(f"root {allr[i]} outside the strip")
        for j in range(i):
            if abs(allr[i] - allr[j]) < COLLISION:
                raise RootCollision(f"roots {allr[i]} and {allr[j]} collide")
    if any(s.imag <= 0 for s in sp) or any(s.imag >= 0 for s in sm):
        raise RootLeftStrip("a root crossed the real axis")


def solve_deformed(thermal, selection, gamma_steps=8, tol=1e-11, phys=None, table=None,
                   build=True, max_halvings=6):
    """Solve the deformed TBA equation for `selection` by stepping gamma from 0 to 1."""
    if isinstance(selection, str):
        selection = RootSelection.parse(selection)
    if gamma_steps < 1:
        raise InvalidInput("gamma_steps must be >= 1")
    p = thermal.params
    if phys is None:
        phys = thermal if p.alpha == 0 else solve_epsilon(p.with_alpha(0), thermal.grid)
    pb = _Problem(thermal, phys)
    if selection.n:
        if table is None:
            table = locate_poles(phys, selection.m_max)
        r_plus = tuple(table.get(*k).r for k in selection.plus)
        r_minus = tuple(table.get(*k).r for k in selection.minus)
    else:
        r_plus = r_minus = ()
    # gamma = 0: closed form
    u = pb.eps - 2j * math.pi * p.alpha * p.T + pb.driving(pb.lam, r_plus, r_minus)
    sp, sm = r_plus, r_minus
    reports = []
    g, dg, halvings = 0.0, 1.0 / gamma_steps, 0
    while g < 1.0:
        g_next = min(1.0, g + dg)
        try:
            u_n, sp_n, sm_n, reps = _homotopy_step(pb, g_next, u, sp, sm, tol)
            _check_roots(sp_n, sm_n, pb.cap)
        except (NoConvergence, RootLeftStrip, RootCollision) as exc:
            if halvings >= max_halvings or isinstance(exc, RootCollision):
                if isinstance(exc, NoConvergence):
                    raise NoConvergence(f"{exc} (last good gamma={g:g})", None, g) from exc
                raise
            dg *= 0.5
            halvings += 1
            continue
        u, sp, sm, g = u_n, sp_n, sm_n, g_next
        reports.extend(reps)
    if selection.n == 0:
        u, rep = fixed_point(pb.u_map(1.0, (), ()), u, tol=tol, max_iter=400)
        reports.append(rep)
    L = pb.logw(u, 1.0)
    f, _ = pb.root_function(1.0, L, sp, sm)
    resid = tuple(float(abs(f(s))) for s in sp + sm)
    st = DeformedState(thermal, phys, selection, 1.0, u, L, sp, sm, r_plus, r_minus,
                       resid, tuple(reports), meta={"gamma_step": dg})
    if build:
        st = attach_contour(st, table)
    return st


# -- holes ---------------------------------------------------------------------------

def _root_fns(st):
    T = st.params.T

    # far below the real axis e^{-u/T} may overflow to inf; the counter treats
    # non-finite samples as an error, so the warning itself is noise
    def f(z):
        with np.errstate(over="ignore"):
            return 1.0 + np.exp(-st.u_at(np.asarray(z, dtype=complex)) / T)

    def fp(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            return -st.u_prime_at(z) / T * np.exp(-st.u_at(z) / T)
    return f, fp


def _zeros_in_rect(f, fp, a, b, seeds, depth=0, max_depth=8):
    x0, x1 = sorted((a.real, b.real))
    y0, y1 = sorted((a.imag, b.imag))
    n = count_zeros(f, complex(x0, y0), complex(x1, y1), fprime=fp)
    if n == 0:
        return []
    inside = lambda z: x0 < z.real < x1 and y0 < z.imag < y1
    if n == 1:
        cands = [s for s in seeds if inside(s)] + [complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))]
        for s in cands:
            try:
                z = newton_complex(f, fp, s, tol=1e-13)
            except (NoConvergence, DerivativeVanishes, OutsideStrip):
                continue
            if inside(z):
                return [z]
    if depth >= max_depth:
        raise NoConvergence(f"could not isolate {n} zero(s) in a small rectangle")
    # slightly off-centre split keeps the new edges away from symmetric zeros
    xm = x0 + 0.5123 * (x1 - x0)
    ym = y0 + 0.4871 * (y1 - y0)
    out = []
    for (u0, u1, v0, v1) in ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)):
        out += _zeros_in_rect(f, fp, complex(u0, v0), complex(u1, v1), seeds, depth + 1, max_depth)
    return out


def hole_solutions(deformed, rect, seeds=()):
    """Zeros of 1 + e^{-u/T} inside `rect` = (corner_a, corner_b) other than the selected roots."""
    f, fp = _root_fns(deformed)
    seeds = list(seeds) + list(deformed.roots)
    zs = _zeros_in_rect(f, fp, complex(rect[0]), complex(rect[1]), seeds)
    return [z for z in zs if min((abs(z - s) for s in deformed.roots), default=math.inf) > COLLISION]


# -- contour ---------------------------------------------------------------------------

def _poly_dist(poly, pts):
    v = np.append(poly, poly[0])
    a, b = v[:-1], v[1:]
    out = []
    for p in np.atleast_1d(pts):
        ab = b - a
        t = np.clip(((p - a) * np.conj(ab)).real / np.abs(ab) ** 2, 0, 1)
        out.append(np.min(np.abs(p - (a + t * ab))))
    return np.array(out)


def _inside(poly, p):
    """Even-odd test."""
    v = np.append(poly, poly[0])
    c = False
    for a, b in zip(v[:-1], v[1:]):
        if (a.imag > p.imag) != (b.imag > p.imag):
            x = a.real + (p.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if p.real < x:
                c = not c
    return c


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign(((b - a) * np.conj(c - a)).imag)
    return (orient(p1, p2, q1) != orient(p1, p2, q2)) and (orient(q1, q2, p1) != orient(q1, q2, p2))


def _polys_overlap(P, Q):
    if any(_inside(P, q) for q in Q) or any(_inside(Q, p) for p in P):
        return True
    Pe = list(zip(P, np.roll(P, -1)))
    Qe = list(zip(Q, np.roll(Q, -1)))
    return any(_segments_cross(a, b, c, d) for a, b in Pe for c, d in Qe)


@dataclass(frozen=True)
class Tower:
    """A box of half-size `width` around `root` joined to the real axis by a stem of
    half-width `stem` whose foot is centred at `base`."""
    root: complex
    base: float
    width: float
    stem: float
    polygon: tuple          # traversed left-to-right along the contour

    @property
    def interval(self):
        return (self.base - self.stem, self.base + self.stem)


def _tower(s, xb, xs, d, e):
    sg = 1.0 if s.imag > 0 else -1.0
    y0, y1 = sg * (abs(s.imag) - d), sg * (abs(s.imag) + d)
    xl, xr = s.real - d, s.real + d
    pts = [complex(xb - e, 0), complex(xs - e, y0)]
    if xs - e > xl + 1e-12:
        pts.append(complex(xl, y0))
    pts += [complex(xl, y1), complex(xr, y1)]
    if xs + e < xr - 1e-12:
        pts.append(complex(xr, y0))
    pts += [complex(xs + e, y0), complex(xb + e, 0)]
    return Tower(s, xb, d, e, tuple(pts))


def _tower_options(s, others, cap, cutoff):
    dmin = float(np.min(np.abs(others - s))) if len(others) else 1.0
    d = min(0.5 * dmin, 0.5, 0.5 * (cap - abs(s.imag)), 0.5 * abs(s.imag))
    if d < 1e-6:
        raise CannotSeparate(f"root {s} has clearance {d:.2e}")
    opts = []
    for e in (d, 0.5 * d, 0.25 * d):
        for xs in sorted({s.real, s.real - (d - e), s.real + (d - e)}, key=lambda v: abs(v - s.real)):
            y0 = abs(s.imag) - d
            for k in (0, -1, 1, -2, 2, -3, 3, -4, 4, -6, 6, -8, 8, -12, 12):
                xb = xs + k * e
                if abs(xb - xs) > y0 or abs(xb) + e >= cutoff:
                    continue
                tw = _tower(s, xb, xs, d, e)
                P = np.array(tw.polygon)
                if len(others) and (any(_inside(P, q) for q in others)
                                    or np.min(_poly_dist(P, others)) < 0.35 * e):
                    continue
                cost = abs(xb - s.real) / d + (d / e - 1.0)
                opts.append((cost, len(opts), tw))
    opts.sort(key=lambda t: (t[0], t[1]))
    return [t[2] for t in opts]


def design_towers(roots, excluded, cap, cutoff):
    """Pick one tower per root so that it contains its root and nothing in
    `excluded`, and towers do not touch each other."""
    roots = list(roots)
    excluded = np.asarray(list(excluded), dtype=complex)
    cands = []
    for i, s in enumerate(roots):
        others = np.concatenate([excluded, np.array([r for j, r in enumerate(roots) if j != i], complex)])
        opts = _tower_options(s, others, cap, cutoff)
        if not opts:
            raise CannotSeparate(f"no admissible tower for root {s}")
        cands.append(opts)

    chosen = []

    def ok(tw):
        for o in chosen:
            lo, hi = tw.interval
            lo2, hi2 = o.interval
            gap = 0.25 * min(tw.stem, o.stem)
            if lo < hi2 + gap and lo2 < hi + gap:
                return False
            if (tw.root.imag > 0) == (o.root.imag > 0) and _polys_overlap(np.array(tw.polygon), np.array(o.polygon)):
                return False
        return True

    def search(i):
        if i == len(cands):
            return True
        for tw in cands[i]:
            if ok(tw):
                chosen.append(tw)
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    if not search(0):
        raise CannotSeparate("towers for the selected roots cannot be made disjoint")
    return sorted(chosen, key=lambda t: t.base)


def contour_from_towers(towers, cutoff, near=(), order=16, max_panel=1.0):
    verts = [complex(-cutoff, 0)]
    for tw in towers:
        verts += list(tw.polygon)
    verts.append(complex(cutoff, 0))
    return Contour.polyline(verts, max_panel=max_panel, order=order, near=near,
                            meta={"towers": [(t.root, t.base, t.width, t.stem) for t in towers]})


def _excluded_points(st, table):
    """Poles of the physical Fermi weight and hole-type zeros near the selected roots."""
    p = st.params
    pb = st._problem()
    roots = st.roots
    top = max(abs(s.imag) for s in roots) + 1.5
    m_need = st.selection.m_max + 2
    if table is None or table.m_max < m_need:
        table = locate_poles(st.phys, m_need)
    poles = [e.r for e in table.entries]
    X = max(abs(s.real) for s in roots + tuple(poles[:1])) + 2.0
    Y = min(top, 0.95 * pb.cap)
    seeds = poles
    holes = []
    for sg in (1, -1):
        holes += hole_solutions(st, (complex(-X, 0.0), complex(X, sg * Y)), seeds)
    return poles, holes, table


def tower_audit(st, towers):
    """(zeros of 1+e^{-u/T}, zeros of 1+e^{-eps/T}) inside each tower."""
    T = st.params.T
    fu, fpu = _root_fns(st)
    fe = lambda z: 1.0 + np.exp(-epsilon_at(st.phys, np.asarray(z, dtype=complex)) / T)
    out = []
    for tw in towers:
        P = list(tw.polygon)
        out.append((count_zeros_polygon(fu, P, fpu), count_zeros_polygon(fe, P)))
    return out


def attach_contour(st, table=None):
    """Build the deformed contour for a solved state and populate z on it."""
    p = st.params
    cutoff = st.thermal.grid.cutoff
    if st.selection.n == 0:
        C = Contour.from_grid(st.thermal.grid)
        holes, poles = (), ()
    else:
        poles, holes, table = _excluded_points(st, table)
        # u == eps (c = inf, alpha = 0): each root sits on a physical pole, which
        # then has to live inside the tower; p is taken in split form
        shared = [r for r in poles if min(abs(r - s) for s in st.roots) < COLLISION]
        free = [r for r in poles if r not in shared]
        towers = design_towers(st.roots, free + list(holes), st._problem().cap, cutoff)
        C = contour_from_towers(towers, cutoff, near=list(st.roots) + list(poles) + list(holes))
        audit = tower_audit(st, towers)
        want = (1, 1) if shared else (1, 0)
        if len(shared) not in (0, len(towers)) or any(a != want for a in audit):
            raise CannotSeparate(f"tower audit failed: {audit}")
        C = replace(C, meta={**C.meta, "audit": audit, "split": bool(shared)})
    T = p.T
    u_c = st.u_at(C.nodes)
    e_c = epsilon_at(st.phys, C.nodes)
    Lu = unwrap_log(_accel.log1pexp(-u_c / T))
    Le = unwrap_log(_accel.log1pexp(-e_c / T))
    z = -(Lu - Le) / (2j * math.pi)
    return replace(st, contour=C, holes=tuple(holes), z=z, u_contour=u_c, eps_contour=e_c,
                   meta={**st.meta, "logw_contour": Lu, "logeps_contour": Le,
                         "poles": tuple(poles)})
