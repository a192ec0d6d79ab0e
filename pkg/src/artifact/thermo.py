"""Yang-Yang thermodynamics: dressed energy, Fermi weight, densities, pressure."""
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _accel
from .errors import AtPole, InvalidInput, OutsideStrip
from .numerics import (
    TWO_PI,
    QuadGrid,
    SolverReport,
    default_grid,
    fixed_point,
    make_real_grid,
    nystrom_solve,
)

INFINITE = math.inf
SCHEMA_VERSION = 1
STRIP_MARGIN = 0.1   # fraction of c kept away from the kernel poles at +-ic
LARGE_C = 1e8        # finite stand-in for c = infinity in continuity tests


@dataclass(frozen=True)
class ModelParams:
    """Coupling c (or INFINITE), chemical potential h, temperature T, and the
    complex generating-function parameter alpha."""
    c: float
    h: float
    T: float
    alpha: complex = 0j

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidInput(f"T must be positive, got {self.T}")
        if not (self.c > 0):
            raise InvalidInput(f"c must be positive or INFINITE, got {self.c}")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def h_alpha(self):
        return self.h + 2j * math.pi * self.alpha * self.T

    @property
    def infinite(self):
        return math.isinf(self.c)

    def with_alpha(self, alpha):
        return replace(self, alpha=complex(alpha))

    def to_dict(self):
        return {"c": "inf" if self.infinite else self.c, "h": self.h, "T": self.T,
                "alpha": [self.alpha.real, self.alpha.imag]}

    @classmethod
    def from_dict(cls, d):
        c = INFINITE if d["c"] == "inf" else float(d["c"])
        return cls(c, float(d["h"]), float(d["T"]), complex(*d["alpha"]))


def lieb_kernel(lam, c):
    return 2.0 * c / (lam * lam + c * c)


def log_weight(eps, T):
    """log(1 + e^{-eps/T}) on an ordered set of nodes, continuous along them."""
    L = _accel.log1pexp(-np.asarray(eps, dtype=complex) / T)
    return unwrap_log(L)


def unwrap_log(L):
    """Remove 2 pi i jumps between neighbouring samples."""
    return L.real + 1j * np.unwrap(L.imag)


@dataclass(frozen=True, eq=False)
class ThermalState:
    params: ModelParams
    grid: QuadGrid
    eps: np.ndarray
    logweight: np.ndarray
    rho_t: np.ndarray
    rho_p: np.ndarray
    D: complex
    P: complex
    report: SolverReport

    @property
    def theta(self):
        return fermi_weight_values(self.eps, self.params.T)

    def with_alpha(self, alpha, tol=1e-12, max_iter=500):
        return solve_epsilon(self.params.with_alpha(alpha), self.grid, tol, max_iter)

    # -- serialisation -------------------------------------------------------
    def to_json(self):
        def cx(a):
            a = np.asarray(a, dtype=complex)
            return [a.real.tolist(), a.imag.tolist()]
        return json.dumps({
            "schema": SCHEMA_VERSION, "kind": "ThermalState",
            "params": self.params.to_dict(), "grid": self.grid.spec(),
            "eps": cx(self.eps), "logweight": cx(self.logweight),
            "rho_t": cx(self.rho_t), "rho_p": cx(self.rho_p),
            "D": [self.D.real, self.D.imag], "P": [self.P.real, self.P.imag],
            "report": self.report.to_dict(),
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("schema") != SCHEMA_VERSION or d.get("kind") != "ThermalState":
            raise InvalidInput("unsupported ThermalState schema")

        def cx(p):
            return np.array(p[0]) + 1j * np.array(p[1])
        g = d["grid"]
        return cls(ModelParams.from_dict(d["params"]),
                   make_real_grid(g["cutoff"], g["panels"], g["order"]),
                   cx(d["eps"]), cx(d["logweight"]), cx(d["rho_t"]), cx(d["rho_p"]),
                   complex(*d["D"]), complex(*d["P"]), SolverReport.from_dict(d["report"]))


def fermi_weight_values(eps, T):
    """(1 + e^{eps/T})^{-1}, overflow-safe."""
    x = np.asarray(eps, dtype=complex) / T
    out = np.empty_like(x)
    pos = x.real > 0
    e = np.exp(-x[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


def yy_map(params, grid, Kw):
    """The Yang-Yang right-hand side as a map on grid values of eps."""
    drive = grid.nodes ** 2 - params.h_alpha
    pref = params.T / TWO_PI

    def mapping(eps):
        return drive - pref * (Kw @ log_weight(eps, params.T))
    return mapping


def solve_epsilon(params, grid=None, tol=1e-12, max_iter=500, damping=1.0):
    """Solve the Yang-Yang equation on `grid` and populate densities and pressure."""
    if grid is None:
        grid = default_grid(params.h, params.T, params.alpha.imag)
    lam, w = grid.nodes, grid.weights
    drive = (lam ** 2 - params.h_alpha).astype(complex)
    if params.infinite:
        eps, report = drive, SolverReport(True, 0, 0.0, 1.0)
        Kw = None
    else:
        Kw = _accel.lieb_matrix(lam, lam, params.c) * w[None, :]
        eps, report = fixed_point(yy_map(params, grid, Kw), drive, damping, tol, max_iter)
        eps = yy_map(params, grid, Kw)(eps)     # one more sweep: residual only shrinks
        report = replace(report, residual=float(np.max(np.abs(yy_map(params, grid, Kw)(eps) - eps))))
    if not np.any(params.alpha):
        eps = eps.real.astype(complex)
    L = log_weight(eps, params.T)
    theta = fermi_weight_values(eps, params.T)
    if params.infinite:
        rho_t = np.full(len(lam), 1.0 / TWO_PI, dtype=complex)
    else:
        rho_t, _ = nystrom_solve(Kw / w[None, :] * theta[None, :], np.full(len(lam), 1 / TWO_PI), grid)
    rho_p = theta * rho_t
    D = complex(np.sum(w * rho_p))
    P = complex(params.T / TWO_PI * np.sum(w * L))
    return ThermalState(params, grid, eps, L, rho_t, rho_p, D, P, report)


def yy_residual(state):
    """Sup-norm residual of the Yang-Yang equation on the grid."""
    p, g = state.params, state.grid
    if p.infinite:
        return float(np.max(np.abs(state.eps - (g.nodes ** 2 - p.h_alpha))))
    Kw = _accel.lieb_matrix(g.nodes, g.nodes, p.c) * g.weights[None, :]
    return float(np.max(np.abs(yy_map(p, g, Kw)(state.eps) - state.eps)))


def _check_strip(params, lam):
    if params.infinite:
        return
    cap = (1.0 - STRIP_MARGIN) * params.c
    if np.any(np.abs(np.imag(lam)) >= cap):
        raise OutsideStrip(f"|Im lambda| must stay below {cap:g}")


def epsilon_at(state, lam):
    """Continuation of eps off the real axis (|Im lam| < 0.9 c)."""
    p = state.params
    lam_arr = np.asarray(lam, dtype=complex)
    _check_strip(p, lam_arr)
    out = lam_arr ** 2 - p.h_alpha
    if not p.infinite:
        g = state.grid
        conv = _accel.lieb_apply(lam_arr.ravel(), g.nodes, g.weights * state.logweight, p.c)
        out = out - p.T / TWO_PI * conv.reshape(lam_arr.shape)
    return out if np.ndim(lam) else complex(out)


def epsilon_prime_at(state, lam):
    p = state.params
    lam_arr = np.asarray(lam, dtype=complex)
    _check_strip(p, lam_arr)
    out = 2.0 * lam_arr
    if not p.infinite:
        g = state.grid
        conv = _accel.lieb_prime_apply(lam_arr.ravel(), g.nodes, g.weights * state.logweight, p.c)
        out = out - p.T / TWO_PI * conv.reshape(lam_arr.shape)
    return out if np.ndim(lam) else complex(out)


def fermi_weight(state, lam, pole_tol=1e-13):
    """theta(lam) = (1 + e^{eps(lam)/T})^{-1} in the strip."""
    e = np.asarray(epsilon_at(state, lam), dtype=complex)
    x = e / state.params.T
    denom = np.where(x.real > 0, 1.0 + np.exp(-x), 1.0 + np.exp(x))
    if np.any(np.abs(denom) < pole_tol):
        raise AtPole("fermi weight evaluated at a pole")
    out = fermi_weight_values(e, state.params.T)
    return out if np.ndim(lam) else complex(out)


def rho_t_at(state, lam):
    """Continuation of rho_t: 1/2pi + (1/2pi) int K(lam-mu) theta rho_t dmu."""
    p = state.params
    lam_arr = np.asarray(lam, dtype=complex)
    if p.infinite:
        out = np.full(lam_arr.shape, 1.0 / TWO_PI, dtype=complex)
    else:
        _check_strip(p, lam_arr)
        g = state.grid
        conv = _accel.lieb_apply(lam_arr.ravel(), g.nodes, g.weights * state.rho_p, p.c)
        out = (1.0 + conv.reshape(lam_arr.shape)) / TWO_PI
    return out if np.ndim(lam) else complex(out)


def pressure(state):
    return state.P


def density(state):
    return state.D


def nearest_pole_distance(poles):
    """Diagnostic standing in for the unknown strip half-width: min |Im r|."""
    return min(abs(e.r.imag) for e in poles.entries) if poles.entries else math.inf
