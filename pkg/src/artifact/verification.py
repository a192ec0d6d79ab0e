"""Independent oracles: the free-fermion Fredholm determinant, the continuous
Lagrange-series identity, and the contour-deformation identity for A."""
import cmath
import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from flint import acb, acb_mat, arb, arb_mat, ctx

from .amplitudes import a_functional, amplitude_B, asymptotic_sum
from .errors import (
    CannotSeparate,
    FitIllConditioned,
    GridTooCoarse,
    InvalidInput,
    TruncationNotSettled,
)
from .numerics import Contour, cauchy_transform, fixed_point, make_real_grid
from .thermo import fermi_weight_values, unwrap_log

LEVEL_ONE_PAIRS = ("+L1;-R1", "+R1;-L1", "+R1;-R1", "+L1;-L1")
FF_DIGITS = 32          # target accuracy of the multiprecision oracle (decimal digits)
FF_PREC = 128           # working precision in bits
MIN_NODES_PER_PERIOD = 8


# -- free-fermion Fredholm determinant (multiprecision) -------------------------------------

class _prec:
    def __init__(self, bits):
        self.bits = bits

    def __enter__(self):
        self.old = ctx.prec
        ctx.prec = self.bits

    def __exit__(self, *exc):
        ctx.prec = self.old


@lru_cache(maxsize=16)
def _gauss_arb(order, prec):
    with _prec(prec):
        pairs = [arb.legendre_p_root(order, k, weight=True) for k in range(order)]
        return [p[0] for p in pairs], [p[1] for p in pairs]


def _ff_check(params):
    if not params.infinite:
        raise InvalidInput("the free-fermion oracle needs c = INFINITE")


def ff_cutoff(params, digits=FF_DIGITS):
    """Lambda with theta(Lambda) < 10^-digits."""
    return math.sqrt(max(params.h, 0.0) + digits * math.log(10.0) * params.T)


def ff_panel_width(x, order):
    """Widest panel giving MIN_NODES_PER_PERIOD nodes per period of sin(x lam/2)."""
    if x <= 0:
        return 1.0
    return min(1.0, 4.0 * math.pi * order / (MIN_NODES_PER_PERIOD * x))


def _arb_grid(a, b, width, order, prec):
    xs, ws = _gauss_arb(order, prec)
    n = max(1, math.ceil((b - a) / width - 1e-12))
    nodes, weights = [], []
    with _prec(prec):
        h = (arb(b) - arb(a)) / n
        for p in range(n):
            mid = arb(a) + h * (arb(p) + arb(0.5))
            for x, w in zip(xs, ws):
                nodes.append(mid + h / 2 * x)
                weights.append(h / 2 * w)
    return nodes, weights


def _arb_theta(lam, h, T):
    e = ((lam * lam - arb(h)) / arb(T))
    return 1 / (1 + e.exp())


def ff_log_determinant(params, x, panel_width=None, order=24, prec=FF_PREC, digits=FF_DIGITS):
    """log det(I + V0) as an acb ball (principal branch of each parity factor).

    V0(lam, mu) = (e^{2 pi i alpha} - 1) sin(x(lam-mu)/2)/(pi(lam-mu)) theta(mu) on
    [-Lambda, Lambda]; the kernel commutes with lam -> -lam so the determinant
    factorises into even and odd blocks on [0, Lambda]."""
    _ff_check(params)
    if x < 0:
        raise InvalidInput("x must be nonnegative")
    width = ff_panel_width(x, order) if panel_width is None else float(panel_width)
    if x > 0 and order / width * (4 * math.pi / x) < MIN_NODES_PER_PERIOD:
        raise GridTooCoarse(f"{order / width * 4 * math.pi / x:.1f} nodes per oscillation period")
    a = complex(params.alpha)
    with _prec(prec):
        lam, w = _arb_grid(0.0, ff_cutoff(params, digits), width, order, prec)
        n = len(lam)
        xa = arb(x)
        th = [_arb_theta(l, params.h, params.T) for l in lam]
        s = [(xa * l / 2).sin() for l in lam]
        c = [(xa * l / 2).cos() for l in lam]
        tw = [t * ww for t, ww in zip(th, w)]
        pi = arb.pi()
        diag = xa / (2 * pi)
        g = acb.exp_pi_i(acb(2 * a.real, 2 * a.imag)) - 1 if a != 0 else acb(0)
        total = acb(0)
        for parity in (1, -1):
            R = arb_mat(n, n)
            for i in range(n):
                li, si, ci = lam[i], s[i], c[i]
                for j in range(n):
                    plus = (si * c[j] + ci * s[j]) / (pi * (li + lam[j]))
                    if i == j:
                        minus = diag
                    else:
                        minus = (si * c[j] - ci * s[j]) / (pi * (li - lam[j]))
                    R[i, j] = (minus + parity * plus) * tw[j]
            M = acb_mat(R) * g + acb_mat(arb_mat.eye(n) if hasattr(arb_mat, "eye") else _eye(n))
            total += M.det().log()
        return total


def _eye(n):
    E = arb_mat(n, n)
    for i in range(n):
        E[i, i] = 1
    return E


def ff_determinant(params, x, panel_width=None, order=24, prec=FF_PREC):
    """det(I + V0) rounded to a Python complex."""
    L = ff_log_determinant(params, x, panel_width, order, prec)
    return cmath.exp(_to_complex(L))


def _to_complex(z):
    return complex(float(z.real.mid()), float(z.imag.mid()))


def _acb_str(z):
    return (z.real.mid().str(45, radius=False), z.imag.mid().str(45, radius=False))


def ff_leading_terms(params, order=32, prec=FF_PREC, digits=FF_DIGITS, panel_width=1.0):
    """(p0, log B0) of the n = 0 term in multiprecision.

    nu0 = -(1/2 pi i) log(1 + (e^{2 pi i alpha} - 1) theta), p0 = i int nu0 and
    log B0 = int int nu0 nu0/(lam - mu_+)^2 = -int nu0' PV L[nu0]."""
    _ff_check(params)
    a = complex(params.alpha)
    with _prec(prec):
        L = ff_cutoff(params, digits)
        lam, w = _arb_grid(-L, L, panel_width, order, prec)
        n = len(lam)
        g = acb.exp_pi_i(acb(2 * a.real, 2 * a.imag)) - 1
        two_pi_i = acb(0, 2) * arb.pi()
        th = [_arb_theta(l, params.h, params.T) for l in lam]
        nu = [-(1 + g * t).log() / two_pi_i for t in th]
        dth = [-2 * l / arb(params.T) * t * (1 - t) for l, t in zip(lam, th)]
        dnu = [-(g * d) / (1 + g * t) / two_pi_i for d, t in zip(dth, th)]
        p0 = acb(0, 1) * sum((ww * v for ww, v in zip(w, nu)), acb(0))
        La = arb(L)
        logB = acb(0)
        for j in range(n):
            lj, vj = lam[j], nu[j]
            acc = w[j] * dnu[j] + vj * ((La - lj) / (La + lj)).log()
            for k in range(n):
                if k != j:
                    acc += w[k] * (nu[k] - vj) / (lam[k] - lj)
            logB -= w[j] * dnu[j] * acc
        return p0, logB


def _ff_worker(args):
    params, x, order, prec = args
    return _acb_str(ff_log_determinant(params, x, order=order, prec=prec))


@dataclass
class FFComparison:
    params: object
    xs: np.ndarray
    oracle: np.ndarray            # det(I + V0)
    asymptotic: np.ndarray        # sum of e^{-x p} B over n = 0 and the selections
    residual0: np.ndarray         # log det - log(e^{-x p0} B0)
    residual1: np.ndarray         # log det - log(asymptotic sum)
    p0: complex
    B0: complex
    terms: list                   # (selection, p, B)
    rate: float                   # fitted decay rate of |residual0|
    target: float                 # min Re(p_i - p0) over the selections
    reduction: float              # max|residual0| / max|residual1|
    meta: dict = field(default_factory=dict)

    @property
    def rate_mismatch(self):
        return abs(self.rate - self.target) / self.target

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "re_oracle", "im_oracle", "re_asymptotic", "im_asymptotic",
                     "abs_residual_n0", "abs_residual"])
        for k, x in enumerate(self.xs):
            o, s = self.oracle[k], self.asymptotic[k]
            wr.writerow([f"{x:.17g}", f"{o.real:.17g}", f"{o.imag:.17g}", f"{s.real:.17g}",
                         f"{s.imag:.17g}", f"{abs(self.residual0[k]):.17g}",
                         f"{abs(self.residual1[k]):.17g}"])
        return buf.getvalue()


def log1p_complex(z):
    """log(1 + z) keeping full relative accuracy for tiny complex z."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, z, 0)
    series = sum((-1) ** (k + 1) * zs ** k / k for k in range(1, 7))
    return np.where(small, series, np.log(1 + np.where(small, 0, z)))


def fit_decay_rate(xs, residuals):
    """Least-squares slope of log|residual| against x, returned as a positive rate."""
    xs = np.asarray(xs, dtype=float)
    r = np.abs(np.asarray(residuals))
    ok = np.isfinite(r) & (r > 0)
    if ok.sum() < 3 or np.ptp(xs[ok]) == 0:
        raise FitIllConditioned("fewer than three usable residuals")
    slope, _ = np.polyfit(xs[ok], np.log(r[ok]), 1)
    return float(-slope)


def ff_compare(params, xs, selections=LEVEL_ONE_PAIRS, order=24, prec=FF_PREC, workers=None):
    """Compare the multiprecision determinant with the asymptotic sum.

    The n = 0 data (p0, B0) are computed in the same multiprecision arithmetic so
    that residuals far below double-precision round-off of log det stay visible;
    the sub-leading terms only enter the residual relative to B0 and are taken
    from the double-precision contour solver."""
    from .deformed import solve_deformed
    from .lengths import correlation_length
    from .thermo import solve_epsilon
    _ff_check(params)
    xs = np.asarray(xs, dtype=float)
    thermal = solve_epsilon(params)
    terms = []
    for sel in selections:
        d = solve_deformed(thermal, sel)
        terms.append((str(d.selection), correlation_length(d).p, amplitude_B(d).B))
    p0a, logB0a = ff_leading_terms(params, order, prec)
    p0, logB0 = _to_complex(p0a), _to_complex(logB0a)
    B0 = cmath.exp(logB0)

    jobs = [(params, float(x), order, prec) for x in xs]
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            raw = list(ex.map(_ff_worker, jobs))
    else:
        raw = [_ff_worker(j) for j in jobs]

    res0 = np.empty(len(xs), dtype=complex)
    with _prec(prec):
        two_pi = 2 * arb.pi()
        for k, (re, im) in enumerate(raw):
            logdet = acb(arb(re), arb(im))
            r = logdet + arb(float(xs[k])) * p0a - logB0a
            # choose the branch of the logarithm closest to the n = 0 prediction
            m = round(float(r.imag.mid()) / float(two_pi.mid()))
            res0[k] = _to_complex(r - acb(0, m) * two_pi)
    corr = np.zeros(len(xs), dtype=complex)
    for _, p, B in terms:
        corr += (B / B0) * np.exp(-xs * (p - p0))
    res1 = res0 - log1p_complex(corr)
    oracle = np.array([cmath.exp(complex(float(re), float(im))) for re, im in raw])
    asym = asymptotic_sum(thermal, ["0"] + [t[0] for t in terms], [B0] + [t[2] for t in terms],
                          [p0] + [t[1] for t in terms], xs)
    rate = fit_decay_rate(xs, res0)
    target = min((p - p0).real for _, p, _ in terms)
    reduction = float(np.max(np.abs(res0)) / np.max(np.abs(res1)))
    return FFComparison(params, xs, oracle, asym, res0, res1, p0, B0, terms, rate, target,
                        reduction)


# -- continuous Lagrange series --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ToyLagrangeSpec:
    """Separable toy: xi(lam, mu) = xi_left(lam) xi_right(mu) on [lo, hi].

    `f_derivs(m)` and `F_derivs(m)` return the m-th derivative at 0; f must be entire."""
    lo: float
    hi: float
    f: Callable
    fprime: Callable
    f_derivs: Callable
    xi_left: Callable
    xi_right: Callable
    h1: Callable
    F: Callable
    F_derivs: Callable
    order: int = 32

    def xi(self, lam, mu):
        return self.xi_left(lam) * self.xi_right(mu)

    def grid(self):
        return make_real_grid(0.5 * (self.hi - self.lo), 1, self.order)

    def nodes(self):
        g = self.grid()
        shift = 0.5 * (self.lo + self.hi)
        return g.nodes + shift, g.weights


def exp_toy(beta=0.2, kappa=1.0, xi=0.5, lo=0.0, hi=1.0):
    """f(t) = beta e^{kappa t}, constant xi, h1 = 1, F(s) = e^s."""
    return ToyLagrangeSpec(
        lo, hi,
        f=lambda t: beta * np.exp(kappa * t),
        fprime=lambda t: beta * kappa * np.exp(kappa * t),
        f_derivs=lambda m: beta * kappa ** m,
        xi_left=lambda lam: np.full(np.shape(lam), xi, dtype=float),
        xi_right=lambda mu: np.ones(np.shape(mu)),
        h1=lambda lam: np.ones(np.shape(lam)),
        F=np.exp, F_derivs=lambda m: 1.0)


def contraction_margin(spec, n_phi=256, radii=None):
    """max over R0 of R0 / sup_{phi, mu} |f(R0 e^{i phi} int |xi(lam, mu)| dlam)|.

    The series converges absolutely when this exceeds 1; returns (margin, R0)."""
    lam, w = spec.nodes()
    col = np.abs(spec.xi(lam[:, None], lam[None, :])).T @ w        # int |xi(lam, mu)| dlam per mu
    phases = np.exp(2j * math.pi * np.arange(n_phi) / n_phi)
    if radii is None:
        radii = np.logspace(-3, 2, 501)
    best = (0.0, math.nan)
    for R in radii:
        sup = np.max(np.abs(spec.f(R * phases[:, None] * col[None, :])))
        if R / sup > best[0]:
            best = (float(R / sup), float(R))
    return best


def _poly_pow(p, k, deg):
    out = np.zeros(deg + 1, dtype=complex)
    out[0] = 1.0
    for _ in range(k):
        out = np.convolve(out, p)[: deg + 1]
    return out


def lagrange_terms(spec, n_max):
    """Terms n = 0..n_max of the multiple-integral series for the separable toy.

    With xi = a(lam) b(mu) the mixed epsilon-derivative of prod_j f(b_j s) F(t),
    s = sum eps_a a_a, t = sum eps_a h_a, is a sum over which variables feed s;
    integrating each variable against a b^m or h1 b^m leaves moments, and the
    product of the n Taylor series is a polynomial power."""
    if not 0 <= n_max <= 40:
        raise InvalidInput("n_max must lie in 0..40")
    lam, w = spec.nodes()
    a, b, h = spec.xi_left(lam), spec.xi_right(lam), spec.h1(lam)
    deg = n_max
    fm = np.array([spec.f_derivs(m) for m in range(deg + 1)], dtype=complex)
    fact = np.array([math.factorial(m) for m in range(deg + 1)], dtype=float)
    A = np.array([np.sum(w * a * b ** m) for m in range(deg + 1)])
    H = np.array([np.sum(w * h * b ** m) for m in range(deg + 1)])
    pA, pH = fm * A / fact, fm * H / fact
    terms = []
    for n in range(n_max + 1):
        t = 0j
        for k in range(n + 1):
            Fd = spec.F_derivs(n - k)
            if Fd == 0:
                continue
            coef = np.convolve(_poly_pow(pA, k, deg), _poly_pow(pH, n - k, deg))[k]
            t += math.comb(n, k) * Fd * math.factorial(k) * coef
        terms.append(t / math.factorial(n))
    return terms


def lagrange_direct(spec, n_max=12, settle_tol=1e-10, check=True):
    """Truncated series sum; raises TruncationNotSettled when the last term is
    not negligible (|term| > settle_tol |sum|) and `check` is set."""
    terms = lagrange_terms(spec, n_max)
    total = complex(sum(terms))
    if check and abs(terms[-1]) > settle_tol * abs(total):
        raise TruncationNotSettled(f"|term {n_max}| = {abs(terms[-1]):.2e}")
    return total


def lagrange_closed(spec, tol=1e-15, damping=0.5):
    """F(int h1 z)/det[delta - xi(mu, lam) f'(int xi(nu, lam) z(nu) dnu)]."""
    lam, w = spec.nodes()
    X = spec.xi(lam[:, None], lam[None, :])          # X[j, i] = xi(lam_j, lam_i)
    XT_w = (X * w[:, None]).T                       # (XT_w z)_i = int xi(lam, lam_i) z(lam)

    def mapping(z):
        return spec.f(XT_w @ z).astype(complex)
    z, _ = fixed_point(mapping, spec.f(np.zeros(len(lam))).astype(complex), damping, tol, 2000)
    arg = XT_w @ z
    Q = X.T * spec.fprime(arg)[:, None] * w[None, :]  # Q[i, j] = xi(lam_j, lam_i) f'(arg_i) w_j
    det = np.linalg.det(np.eye(len(lam)) - Q)
    return complex(spec.F(np.sum(w * spec.h1(lam) * z)) / det)


# -- contour-deformation identity -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SyntheticNu:
    """nu = -(1/2 pi i) log(1 + gamma theta F) with the Gaussian-decaying Fermi weight
    theta = 1/(1 + e^{(lam^2 - h)/T}) and F = e^{kappa lam}.

    Poles r (of theta) and zeros s of 1 + gamma theta F are known in closed form,
    so nu = nu_tilde - (1/2 pi i) log prod (lam - s)/(lam - r) with nu_tilde
    holomorphic near both contours. `pairs` lists (half, side, m) labels: the
    upper-half ones are r+/s+, the lower-half ones r-/s-."""
    h: float = 1.0
    T: float = 1.0
    gamma: complex = -0.45
    kappa: float = 0.0
    plus: tuple = (("R", 0),)
    minus: tuple = (("L", 0),)
    cutoff: float = 9.0

    @property
    def n(self):
        return len(self.plus)

    def F(self, lam):
        return np.exp(self.kappa * np.asarray(lam, dtype=complex))

    def weight(self, lam):
        return fermi_weight_values(np.asarray(lam, dtype=complex) ** 2 - self.h, self.T)

    def pole(self, half, side, m):
        s = 1 if (half, side) in (("+", "R"), ("-", "L")) else -1
        r = cmath.sqrt(self.h + s * 1j * math.pi * self.T * (2 * m + 1))
        return r if side == "R" else -r

    def zero(self, half, side, m):
        """Zero of 1 + gamma theta F near the pole (kappa = 0 closed form, Newton otherwise)."""
        s = 1 if (half, side) in (("+", "R"), ("-", "L")) else -1
        lg = cmath.log(1 + self.gamma)
        q = cmath.sqrt(self.h + self.T * lg + s * 1j * math.pi * self.T * (2 * m + 1))
        z = q if side == "R" else -q
        if self.kappa:
            from .numerics import newton_complex
            g = lambda l: cmath.exp((l * l - self.h) / self.T) + 1 + self.gamma * cmath.exp(self.kappa * l)
            gp = lambda l: 2 * l / self.T * cmath.exp((l * l - self.h) / self.T) \
                + self.gamma * self.kappa * cmath.exp(self.kappa * l)
            z = newton_complex(g, gp, z, tol=1e-15, max_iter=60)
        return z

    def residue(self, r):
        """Residue of theta at a pole: -T/(2 r)."""
        return -self.T / (2 * r)

    def points(self):
        rp = [self.pole("+", s, m) for s, m in self.plus]
        rm = [self.pole("-", s, m) for s, m in self.minus]
        sp = [self.zero("+", s, m) for s, m in self.plus]
        sm = [self.zero("-", s, m) for s, m in self.minus]
        return rp, rm, sp, sm

    def singularities(self, m_max=3):
        out = []
        for half in "+-":
            for side in "RL":
                for m in range(m_max + 1):
                    out += [self.pole(half, side, m), self.zero(half, side, m)]
        return out

    def nu(self, lam):
        """nu along an ordered set of points, continued from ~0 at the first one."""
        v = 1 + self.gamma * self.weight(lam) * self.F(lam)
        return -unwrap_log(np.log(v)) / (2j * math.pi)


def _box_tower(center, d, e):
    from .deformed import _tower
    return _tower(center, center.real, center.real, d, e)


def synthetic_contours(spec, order=16):
    """(C, Gamma): C encircles the selected zeros s only; Gamma encircles each s
    together with its pole r. Both run from -cutoff to cutoff."""
    from .deformed import _inside
    rp, rm, sp, sm = spec.points()
    sing = spec.singularities()
    C_towers, G_towers = [], []
    for r, s in list(zip(rp, sp)) + list(zip(rm, sm)):
        others = np.array([q for q in sing if abs(q - r) > 1e-12 and abs(q - s) > 1e-12])
        sep = abs(r - s)
        dist_s = float(np.min(np.abs(others - s)))
        d_c = min(0.45 * sep, 0.45 * dist_s, 0.5 * abs(s.imag))
        C_towers.append(_box_tower(s, d_c, 0.5 * d_c))
        mid = 0.5 * (r + s)
        d_g = 0.5 * sep + min(0.25, 0.3 * float(np.min(np.abs(others - mid))))
        G_towers.append(_box_tower(mid, d_g, 0.5 * d_g))
        for tw, inside, outside in ((C_towers[-1], [s], [r]), (G_towers[-1], [r, s], [])):
            P = np.array(tw.polygon)
            if not all(_inside(P, q) for q in inside) or any(_inside(P, q) for q in list(others) + outside):
                raise CannotSeparate("synthetic configuration too crowded for box towers")

    def build(towers):
        verts = [complex(-spec.cutoff, 0)]
        for tw in sorted(towers, key=lambda t: t.base):
            verts += list(tw.polygon)
        verts.append(complex(spec.cutoff, 0))
        return Contour.polyline(verts, max_panel=0.5, order=order, near=sing)
    return build(C_towers), build(G_towers)


def contour_identity_check(spec, g=None, gprime=None, x=1.0, order=16, pole_sign=1):
    """exp(A_C([g],[nu])) against the Gamma-contour expression U.

    The pole factors enter as exp(pole_sign (ix + g)(r+ - r-)); integrating by
    parts along the two contours fixes pole_sign = +1, which is also the sign
    that makes them decay in x. Returns (lhs, rhs, gap) with gap the relative
    difference."""
    if g is None:
        g, gprime = (lambda l: np.zeros_like(np.asarray(l, dtype=complex))), \
            (lambda l: np.zeros_like(np.asarray(l, dtype=complex)))
    C, G = synthetic_contours(spec, order)
    sing = spec.singularities()

    def nu_fn(pts, sh):
        return spec.nu(pts)

    nuC, nuG = spec.nu(C.nodes), spec.nu(G.nodes)
    lhs_A = a_functional(C, g(C.nodes), nuC, x, nu_fn=nu_fn, near=sing)
    rp, rm, sp, sm = spec.points()
    A_G0 = a_functional(G, np.zeros(len(G.nodes)), nuG, x, nu_fn=nu_fn, near=sing)
    LGp = cauchy_transform(G, nuG, np.array(rp))
    LGm = cauchy_transform(G, nuG, np.array(rm))
    n = spec.n
    cauchy = np.linalg.det(1.0 / (np.array(rp)[:, None] - np.array(rm)[None, :])) if n else 1.0
    log_rhs = -np.sum(G.weights * gprime(G.nodes) * nuG) + A_G0 + 2 * np.log(cauchy + 0j)
    for a in range(n):
        log_rhs += (2 * np.log(spec.gamma + 0j)
                    + pole_sign * (1j * x * (rp[a] - rm[a]) + g(rp[a]) - g(rm[a]))
                    + np.log(spec.F(rp[a]) * spec.F(rm[a]) * spec.residue(rp[a]) * spec.residue(rm[a]))
                    + 2 * LGm[a] - 2 * LGp[a])
    lhs, rhs = cmath.exp(lhs_A), cmath.exp(complex(log_rhs))
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def single_integral_difference(spec, g, gprime, x=1.0, order=16):
    """(-int_C + int_Gamma)(ix + g') nu against sum(ix(r+ - r-) + g(r+) - g(r-))."""
    C, G = synthetic_contours(spec, order)
    num = (-np.sum(C.weights * (1j * x + gprime(C.nodes)) * spec.nu(C.nodes))
           + np.sum(G.weights * (1j * x + gprime(G.nodes)) * spec.nu(G.nodes)))
    rp, rm, _, _ = spec.points()
    exact = sum(1j * x * (a - b) + g(a) - g(b) for a, b in zip(rp, rm))
    return complex(num), complex(exact)
