"""Amplitudes B[u_i]: the A and C0 functionals, Cauchy transforms, and Fredholm determinants."""
import cmath
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _accel
from .errors import ExtrapolationDisagrees, InvalidInput, SmallDenominator
from .numerics import TWO_PI, Contour, _refined_panel_integral, bernstein_rho, cauchy_transform
from .thermo import fermi_weight_values, unwrap_log

AGREE_TOL = 1e-7
DENOM_FLOOR = 1e-10
RICHARDSON_STEP = 1e-3


# -- double integrals ------------------------------------------------------------------

def pv_cauchy(contour, values, derivative=None):
    """Principal value of int f(mu)/(mu - lam) dmu at every contour node lam."""
    lam, w = contour.nodes, contour.weights
    f = np.asarray(values, dtype=complex)
    df = contour.derivative(f) if derivative is None else np.asarray(derivative, dtype=complex)
    # principal value of int dmu/(mu - lam) over each straight segment
    v = contour.vertices
    seg = np.repeat(contour.panel_segment, contour.order)
    logs = np.zeros(len(lam), dtype=complex)
    for k in range(len(v) - 1):
        a, b = v[k], v[k + 1]
        if a == b:
            continue
        r = (b - lam) / (a - lam)
        own = seg == k
        logs += np.where(own, np.log(np.abs(r)) + 0j, np.log(r))
    out = np.empty(len(lam), dtype=complex)
    for s in range(0, len(lam), 512):
        j = slice(s, s + 512)
        d = lam[None, :] - lam[j, None]                     # mu_k - lam_j
        num = f[None, :] - f[j, None]
        idx = np.arange(s, min(s + 512, len(lam)))
        d[np.arange(len(idx)), idx] = 1.0
        q = num / d
        q[np.arange(len(idx)), idx] = df[idx]
        out[j] = q @ w
    out += f * logs
    # panels of other contour pieces passing close by (e.g. the two legs of a
    # narrow tower) make the subtracted integrand near-singular: redo those exactly
    rho_min = 10.0 ** (14.0 / (2 * contour.order))
    rho = bernstein_rho(contour.panel_a, contour.panel_b, lam)
    own = np.repeat(np.arange(len(contour.panel_a)), contour.order)
    bad_pts, bad_panels = np.nonzero(rho < rho_min)
    for i, q in zip(bad_pts, bad_panels):
        pi = own[i]
        if abs(q - pi) <= 1 and (contour.panel_b[min(q, pi)] == contour.panel_a[max(q, pi)] or q == pi):
            continue
        a, b = contour.panel_a[q], contour.panel_b[q]
        k = slice(q * contour.order, (q + 1) * contour.order)
        plain = np.sum(w[k] * (f[k] - f[i]) / (lam[k] - lam[i]))
        exact = _refined_panel_integral(contour, f, q, lam[i], rho_min) - f[i] * np.log((b - lam[i]) / (a - lam[i]))
        out[i] += exact - plain
    return out


def double_pole_ibp(contour, values, derivative=None):
    """int int nu(lam) nu(mu)/(lam - mu_+)^2 by parts: -int nu'(lam) PV L[nu](lam) dlam.

    nu' is taken by spectral differentiation unless given."""
    dv = contour.derivative(values) if derivative is None else np.asarray(derivative, dtype=complex)
    return complex(-np.sum(contour.weights * dv * pv_cauchy(contour, values, dv)))


def offset_polyline(vertices, delta):
    """Polyline shifted by `delta` to the left of its orientation (mitred corners)."""
    v = np.asarray(vertices, dtype=complex)
    t = np.diff(v)
    t = t / np.abs(t)
    n = 1j * t
    out = [v[0] + delta * n[0]]
    for k in range(1, len(v) - 1):
        n1, n2 = n[k - 1], n[k]
        out.append(v[k] + delta * (n1 + n2) / (1.0 + (n1 * np.conj(n2)).real))
    out.append(v[-1] + delta * n[-1])
    return np.array(out)


def double_pole_offset(contour, values, nu_fn=None, delta=None, near=()):
    """Same double integral with mu moved off the contour by delta and delta/2, then
    Richardson-extrapolated to delta -> 0.

    `nu_fn(points, shifted_contour)` returns nu on a shifted contour (continuation);
    by default the panel interpolants are continued."""
    lengths = np.abs(contour.panel_b - contour.panel_a)
    if delta is None:
        delta = 0.5 * float(np.min(lengths))
    vals = np.asarray(values, dtype=complex)
    res = []
    for dl in (delta, 0.5 * delta):
        verts = offset_polyline(contour.vertices, dl)
        # panels of length 2 dl seen from distance dl: Gauss error ~ (1 + sqrt 2)^(-2 order)
        sh = Contour.polyline(verts, max_panel=2 * dl, order=contour.order,
                              near=near, near_ratio=0.5)
        if nu_fn is not None:
            nu_s = nu_fn(sh.nodes, sh)
        else:
            nu_s = _continue_panels(contour, vals, sh.nodes)
        # inner integral: d/dlam of the Cauchy transform over the shifted copy
        J = _accel.cauchy2_apply(contour.nodes, sh.nodes, sh.weights * nu_s)
        res.append(complex(np.sum(contour.weights * vals * J)))
    return (4.0 * res[1] - res[0]) / 3.0, res


def _continue_panels(contour, values, pts):
    """Evaluate the interpolant of the nearest panel at off-contour points."""
    mids = 0.5 * (contour.panel_a + contour.panel_b)
    out = np.empty(len(pts), dtype=complex)
    owner = np.argmin(np.abs(pts[:, None] - mids[None, :]), axis=1)
    for p in np.unique(owner):
        sel = owner == p
        out[sel] = contour.interpolate(values, pts[sel], p)
    return out


def a_functional(contour, g_values, nu_values, x=0.0, nu_fn=None, delta=None, near=(),
                 check=True):
    """A([g],[nu]) = -int (i x + g') nu + int int nu(lam) nu(mu)/(lam - mu_+)^2.

    The double integral is evaluated by parts and, when `check`, also by the
    offset/extrapolation method; the two must agree to 1e-7."""
    nu = np.asarray(nu_values, dtype=complex)
    gp = contour.derivative(np.asarray(g_values, dtype=complex))
    linear = -np.sum(contour.weights * (1j * x + gp) * nu)
    dbl = double_pole_ibp(contour, nu)
    if check:
        off, _ = double_pole_offset(contour, nu, nu_fn, delta, near)
        if abs(off - dbl) > AGREE_TOL * max(1.0, abs(dbl)):
            raise ExtrapolationDisagrees(f"by parts {dbl} vs offset {off}")
    return complex(linear + dbl)


def c0_functional(contour, z, c):
    """int int z(lam) z(mu)/(lam - mu - ic)^2 (regular kernel)."""
    if math.isinf(c):
        return 0j
    z = np.asarray(z, dtype=complex)
    if 2 * contour.max_abs_imag() >= 0.9 * c:
        raise InvalidInput("contour too far from the real axis for the C0 kernel")
    wz = contour.weights * z
    out = 0j
    for s in range(0, len(z), 512):
        d = contour.nodes[s:s + 512, None] - contour.nodes[None, :] - 1j * c
        out += np.sum(wz[s:s + 512] * ((1.0 / (d * d)) @ wz))
    return complex(out)


# -- kernels ------------------------------------------------------------------------------

def k_alpha(lam, c, alpha):
    """K_alpha(lam) = 1/(lam + ic) - e^{2 pi i alpha}/(lam - ic)."""
    lam = np.asarray(lam, dtype=complex)
    if math.isinf(c):
        return np.zeros_like(lam)
    return 1.0 / (lam + 1j * c) - np.exp(2j * math.pi * alpha) / (lam - 1j * c)


def surrounding_rectangle(contour, c, cutoff, max_panel=0.5, order=16):
    """Closed ccw rectangle around the contour, crossing R beyond its ends."""
    m = contour.max_abs_imag()
    gap = 1.0 if math.isinf(c) else min(1.0, 0.45 * c - m)
    if gap <= 0.05:
        raise SmallDenominator("deformed contour too tall for a surrounding rectangle")
    H = m + gap
    X = cutoff + 1.0
    return Contour.rectangle(-X, X, -H, H, max_panel=max_panel, order=order), H


def default_thetas(H):
    """Midpoints of the upper and lower halves of the rectangle's interior (shifted off R)."""
    return complex(0.137, 0.5 * H), complex(-0.113, -0.5 * H)


@dataclass
class AmplitudeResult:
    B: complex
    a_double: complex
    c0: complex
    det_u1: complex
    det_u2: complex
    det_k_eps: complex
    det_k_u: complex
    denom1: complex
    denom2: complex
    theta1: complex
    theta2: complex
    min_denominator: float
    theta_spread: float = math.nan
    alpha_limit: bool = False
    meta: dict = field(default_factory=dict)

    def pref1(self, alpha):
        return (cmath.exp(2j * math.pi * alpha) - 1) / self.denom1

    def to_json(self):
        d = asdict(self)
        for k, v in list(d.items()):
            if isinstance(v, complex):
                d[k] = [v.real, v.imag]
        d["meta"] = {k: (v if not isinstance(v, complex) else [v.real, v.imag])
                     for k, v in self.meta.items() if isinstance(v, (int, float, str, complex))}
        return json.dumps({"schema": 1, "kind": "AmplitudeResult", **d})


def _amplitude_direct(dst, theta1, theta2, check_methods=True):
    p = dst.params
    c, T, alpha = p.c, p.T, p.alpha
    C = dst.contour
    z = dst.z
    e2 = cmath.exp(2j * math.pi * alpha)
    near = list(dst.roots) + list(dst.holes) + list(dst.meta.get("poles", ()))

    # double integral with the mu_+ prescription
    def z_fn(pts, sh):
        u = dst.u_at(pts)
        from .thermo import epsilon_at
        e = epsilon_at(dst.phys, pts)
        Lu = unwrap_log(_accel.log1pexp(-u / T))
        Le = unwrap_log(_accel.log1pexp(-e / T))
        return -(Lu - Le) / (2j * math.pi)

    dbl = double_pole_ibp(C, z)
    if check_methods:
        dist = [np.min(np.abs(C.nodes - q)) for q in near] or [1.0]
        delta = min(0.05, 0.3 * min(dist))
        off, _ = double_pole_offset(C, z, z_fn, delta, near)
        if abs(off - dbl) > AGREE_TOL * max(1.0, abs(dbl)):
            raise ExtrapolationDisagrees(f"by parts {dbl} vs offset {off}")
    c0 = c0_functional(C, z, c)

    if math.isinf(c):
        d1 = d2 = 1.0 - e2
        det1 = det2 = dke = dku = 1.0 + 0j
        min_den = abs(1.0 - e2)
    else:
        L = lambda pts: cauchy_transform(C, z, np.asarray(pts, dtype=complex))
        Lt1p, Lt1m = L([theta1 + 1j * c])[0], L([theta1 - 1j * c])[0]
        Lt2p, Lt2m = L([theta2 + 1j * c])[0], L([theta2 - 1j * c])[0]
        d1 = cmath.exp(Lt1p) - e2 * cmath.exp(Lt1m)
        d2 = cmath.exp(-Lt2m) - e2 * cmath.exp(-Lt2p)

        R, _H = surrounding_rectangle(C, c, dst.thermal.grid.cutoff)
        w = R.nodes
        Lw, Lwp, Lwm = L(w), L(w + 1j * c), L(w - 1j * c)
        den1 = np.exp(Lwp) - e2 * np.exp(Lwm)
        den2 = np.exp(-Lwm) - e2 * np.exp(-Lwp)
        min_den = float(min(np.min(np.abs(den1)), np.min(np.abs(den2)), abs(d1), abs(d2)))
        if min_den < DENOM_FLOOR:
            raise SmallDenominator(f"denominator modulus {min_den:.2e}")
        diff = w[:, None] - w[None, :]
        U1 = -(np.exp(Lw) / den1)[:, None] * (k_alpha(diff, c, alpha) - k_alpha(theta1 - w, c, alpha)[None, :])
        U2 = (np.exp(-Lw) / den2)[None, :] * (k_alpha(diff, c, alpha) - k_alpha(w - theta2, c, alpha)[:, None])
        I = np.eye(len(w))
        det1 = _det(I + U1 * R.weights[None, :] / (2j * math.pi))
        det2 = _det(I + U2 * R.weights[None, :] / (2j * math.pi))

        g = dst.phys.grid
        th = fermi_weight_values(dst.phys.eps, T)
        Ke = _accel.lieb_matrix(g.nodes, g.nodes, c) * (th * g.weights)[None, :]
        dke = _det(np.eye(len(g.nodes)) - Ke / TWO_PI)
        uc = dst.u_contour
        wu = C.weights * fermi_weight_values(uc, T)
        Ku = _accel.lieb_matrix(C.nodes, C.nodes, c) * wu[None, :]
        dku = _det(np.eye(len(C.nodes)) - Ku / TWO_PI)

    B = (e2 - 1.0) ** 2 * cmath.exp(dbl - c0) / (d1 * d2) * det1 * det2 / (dke * dku)
    return AmplitudeResult(complex(B), dbl, c0, complex(det1), complex(det2), complex(dke),
                           complex(dku), complex(d1), complex(d2), complex(theta1), complex(theta2),
                           float(min_den))


def _det(M):
    sign, logabs = np.linalg.slogdet(M)
    return complex(sign * np.exp(logabs))


def _richardson_alpha(fn, step=RICHARDSON_STEP):
    """Limit alpha -> 0 of an analytic fn from +-step, +-2 step (error O(step^4))."""
    vals = {a: fn(a) for a in (step, -step, 2 * step, -2 * step)}
    return (4.0 * (vals[step] + vals[-step]) - (vals[2 * step] + vals[-2 * step])) / 6.0, vals


def amplitude_B(dst, theta1=None, theta2=None, check_methods=True, step=RICHARDSON_STEP):
    """Assemble B[u_i] for a solved deformed state.

    At alpha = 0 with the undeformed contour every factor is a 0/0 limit; the
    amplitude and its components are then obtained from alpha = +-step, +-2 step."""
    from .deformed import solve_deformed
    if dst.contour is None:
        raise InvalidInput("deformed state has no contour")
    if dst.contour.meta.get("split"):
        raise InvalidInput("roots coincide with physical poles (u == eps); B is a 0/0 limit here")
    p = dst.params
    if theta1 is None or theta2 is None:
        if math.isinf(p.c):
            H = dst.contour.max_abs_imag() + 1.0
        else:
            _, H = surrounding_rectangle(dst.contour, p.c, dst.thermal.grid.cutoff)
        d1, d2 = default_thetas(H)
        theta1 = d1 if theta1 is None else theta1
        theta2 = d2 if theta2 is None else theta2
    if p.alpha != 0 or dst.selection.n > 0:
        return _amplitude_direct(dst, theta1, theta2, check_methods)

    from .thermo import solve_epsilon
    cache = {}

    def at(a):
        if a not in cache:
            st = solve_epsilon(p.with_alpha(a), dst.thermal.grid)
            d = solve_deformed(st, dst.selection, phys=dst.phys)
            cache[a] = _amplitude_direct(d, theta1, theta2, check_methods)
        return cache[a]

    names = ["B", "a_double", "c0", "det_u1", "det_u2", "det_k_eps", "det_k_u"]
    lim = {}
    for nm in names:
        lim[nm], _ = _richardson_alpha(lambda a: getattr(at(a), nm), step)
    # prefactors (e^{2 pi i alpha} - 1)/denominator have finite limits
    pr1, _ = _richardson_alpha(lambda a: (cmath.exp(2j * math.pi * a) - 1) / at(a).denom1, step)
    pr2, _ = _richardson_alpha(lambda a: (cmath.exp(2j * math.pi * a) - 1) / at(a).denom2, step)
    r1, _ = _richardson_alpha(lambda a: at(a).det_u1 / at(a).det_k_eps, step)
    r2, _ = _richardson_alpha(lambda a: at(a).det_u2 / at(a).det_k_u, step)
    spread = abs(at(step).B - at(-step).B)
    return AmplitudeResult(
        complex(lim["B"]), complex(lim["a_double"]), complex(lim["c0"]), complex(lim["det_u1"]),
        complex(lim["det_u2"]), complex(lim["det_k_eps"]), complex(lim["det_k_u"]),
        math.nan, math.nan, complex(theta1), complex(theta2),
        min(at(a).min_denominator for a in cache), alpha_limit=True,
        meta={"pref1": complex(pr1), "pref2": complex(pr2), "ratio1": complex(r1),
              "ratio2": complex(r2), "alpha_step": step, "pm_gap": spread})


def theta_independence(dst, thetas):
    """Relative spread of B over a list of (theta1, theta2) pairs."""
    Bs = [amplitude_B(dst, t1, t2, check_methods=False).B for t1, t2 in thetas]
    ref = max(abs(b) for b in Bs) or 1.0
    return max(abs(b - Bs[0]) for b in Bs) / ref, Bs


def asymptotic_sum(thermal, selections, B_values, p_values, x):
    """sum_i e^{-x p_i} B_i over the given selections, terms ordered by Re p.

    `thermal` is the state the terms were computed for; it only fixes which
    selection list is meaningful and is not used numerically."""
    if not (len(selections) == len(B_values) == len(p_values)):
        raise InvalidInput("selections, amplitudes and lengths must have equal length")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x, dtype=complex)
    for i in sorted(range(len(p_values)), key=lambda k: complex(p_values[k]).real):
        out = out + complex(B_values[i]) * np.exp(-x * complex(p_values[i]))
    return out if out.ndim else complex(out)
