"""Poles of the Fermi weight in the complex strip and their residues."""
import cmath
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DerivativeVanishes,
    InvalidInput,
    NewtonFailed,
    NoConvergence,
    SeedOutsideStrip,
)
from .numerics import count_zeros, newton_complex
from .thermo import STRIP_MARGIN, epsilon_at, epsilon_prime_at, solve_epsilon

POLE_RESIDUAL = 1e-10
HALVES = ("+", "-")
SIDES = ("R", "L")


def branch_sign(half, side):
    """Sign s with eps(r) = s*i*pi*T*(2m+1) for the pole in (half, side)."""
    return 1 if (half, side) in (("+", "R"), ("-", "L")) else -1


def free_fermion_pole(h_alpha, T, half, side, m):
    """Closed-form pole of (1 + e^{(lam^2 - h_alpha)/T})^{-1}."""
    s = branch_sign(half, side)
    root = cmath.sqrt(h_alpha + s * 1j * math.pi * T * (2 * m + 1))
    return root if side == "R" else -root


@dataclass(frozen=True)
class PoleEntry:
    half: str
    side: str
    m: int
    r: complex
    residue: complex
    residual: float

    @property
    def key(self):
        return (self.half, self.side, self.m)

    @property
    def label(self):
        return f"{self.half}{self.side}{self.m + 1}"

    @property
    def target(self):
        """Value of eps(r)/(i pi T) on this pole's branch, i.e. +-(2m+1)."""
        return branch_sign(self.half, self.side) * (2 * self.m + 1)


@dataclass(frozen=True, eq=False)
class PoleTable:
    params: object
    entries: tuple
    m_max: int
    im_cap: float
    skipped: tuple = field(default_factory=tuple)   # (key, reason) pairs

    def get(self, half, side, m):
        for e in self.entries:
            if e.key == (half, side, m):
                return e
        raise KeyError(f"pole {half}{side}{m + 1} not in table")

    def __len__(self):
        return len(self.entries)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["half", "side", "m", "re_r", "im_r", "re_residue", "im_residue", "residual"])
        for e in self.entries:
            w.writerow([e.half, e.side, e.m, f"{e.r.real:.17g}", f"{e.r.imag:.17g}",
                        f"{e.residue.real:.17g}", f"{e.residue.imag:.17g}", f"{e.residual:.3e}"])
        return buf.getvalue()


def pole_residual(state, lam):
    """|1 + e^{eps(lam)/T}|, written via the branch-free distance to the nearest odd multiple."""
    e = epsilon_at(state, lam) / state.params.T
    return abs(1.0 + cmath.exp(e)) if e.real < 700 else math.inf


def fermi_residue(state, r):
    """Residue of the Fermi weight at a pole r: -T/eps'(r)."""
    d = epsilon_prime_at(state, r)
    if abs(d) < 1e-14:
        raise DerivativeVanishes(f"eps'({r}) vanishes")
    return -state.params.T / d


def _newton_pole(state, seed, target):
    T = state.params.T
    shift = 1j * math.pi * T * target
    tol = 1e-13 * max(1.0, abs(shift))
    return newton_complex(lambda z: epsilon_at(state, z) - shift,
                          lambda z: epsilon_prime_at(state, z), seed, tol=tol, max_iter=80)


def _continued_pole(state, half, side, m, cap, steps=8):
    """Follow a pole from the free-fermion point along c(s) = c/s, s: 0 -> 1."""
    p = state.params
    T = p.T
    z = free_fermion_pole(p.h_alpha, T, half, side, m)
    target = branch_sign(half, side) * (2 * m + 1)
    for s in np.linspace(0.0, 1.0, steps + 1)[1:]:
        st = state if s == 1.0 else solve_epsilon(
            type(p)(p.c / s, p.h, p.T, p.alpha), state.grid)
        z = _newton_pole(st, z, target)
        if abs(z.imag) >= cap:
            raise NewtonFailed("pole left the strip during continuation")
    return z


def locate_poles(state, m_max=3):
    """Poles r of the Fermi weight for levels m = 0..m_max in all four quadrants."""
    if m_max < 0:
        raise InvalidInput("m_max must be nonnegative")
    p = state.params
    cap = math.inf if p.infinite else (1.0 - STRIP_MARGIN) * p.c
    entries, skipped = [], []
    for half in HALVES:
        for side in SIDES:
            for m in range(m_max + 1):
                seed = free_fermion_pole(p.h_alpha, p.T, half, side, m)
                if abs(seed.imag) >= cap:
                    skipped.append(((half, side, m), "seed outside strip"))
                    continue
                target = branch_sign(half, side) * (2 * m + 1)
                try:
                    try:
                        r = _newton_pole(state, seed, target)
                    except (NoConvergence, DerivativeVanishes):
                        r = _continued_pole(state, half, side, m, cap)
                except (NoConvergence, DerivativeVanishes, NewtonFailed) as exc:
                    skipped.append(((half, side, m), f"newton failed: {exc}"))
                    continue
                if abs(r.imag) >= cap or (r.imag > 0) != (half == "+"):
                    skipped.append(((half, side, m), "root left its quadrant or the strip"))
                    continue
                entries.append(PoleEntry(half, side, m, r, fermi_residue(state, r),
                                         pole_residual(state, r)))
    if not entries and skipped:
        raise SeedOutsideStrip("no pole seed lies inside the strip")
    order = {"+": 0, "-": 1, "R": 0, "L": 1}
    entries.sort(key=lambda e: (order[e.half], order[e.side], e.m))
    for a, b in zip(entries, entries[1:]):
        if abs(a.r - b.r) < 1e-8:
            raise NewtonFailed(f"duplicate poles {a.label} and {b.label}")
    return PoleTable(p, tuple(entries), m_max, cap, tuple(skipped))


def audit_rectangles(table):
    """One rectangle per half-plane that should contain exactly that half's entries."""
    rects = []
    for half in HALVES:
        es = [e for e in table.entries if e.half == half]
        if not es:
            continue
        top = [e for e in es if e.m == table.m_max]
        sgn = 1 if half == "+" else -1
        p = table.params
        # next level (free-fermion estimate shifted by the found offset) sets the outer walls
        xs, ys = [], []
        for e in top:
            nxt = free_fermion_pole(p.h_alpha, p.T, half, e.side, e.m + 1)
            cur = free_fermion_pole(p.h_alpha, p.T, half, e.side, e.m)
            nxt = nxt + (e.r - cur)
            xs.append(0.5 * (abs(e.r.real) + abs(nxt.real)))
            ys.append(0.5 * (abs(e.r.imag) + abs(nxt.imag)))
        if not top:
            xs = [max(abs(e.r.real) for e in es) + 0.5]
            ys = [max(abs(e.r.imag) for e in es) + 0.5]
        x = max(xs)
        y1 = min(min(ys), table.im_cap * 0.999)
        y0 = 0.5 * min(abs(e.r.imag) for e in es)
        rects.append((half, complex(-x, sgn * y0), complex(x, sgn * y1)))
    return rects


def audit_count(state, table):
    """Compare argument-principle counts with the number of entries per rectangle.

    Returns a list of (half, counted, expected) triples."""
    T = state.params.T

    def f(z):
        return 1.0 + np.exp(epsilon_at(state, z) / T)

    def fp(z):
        e = epsilon_at(state, z)
        return epsilon_prime_at(state, z) * np.exp(e / T) / T

    out = []
    for half, a, b in audit_rectangles(table):
        x0, x1 = sorted((a.real, b.real))
        y0, y1 = sorted((a.imag, b.imag))
        inside = sum(1 for e in table.entries
                     if x0 < e.r.real < x1 and y0 < e.r.imag < y1)
        out.append((half, count_zeros(f, a, b, fprime=fp), inside))
    return out
