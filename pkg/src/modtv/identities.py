"""Pentagon and 4-4 move identities for b-6j symbols, checked by spectral quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sixj
from .errors import AccuracyError, DomainError
from .specfun import PI, BParam, edge_weight, edge_weight_log


@dataclass(frozen=True)
class IdentityConfig:
    bp: BParam
    y_max: float | None = None  # cutoff in Im a; None picks it from the observed decay
    spectral_nodes: int = 48
    sixj_contour: sixj.ContourSpec = field(default_factory=sixj.ContourSpec)
    sixj_rel_tol: float = 1e-9
    delta: float = 1e-4

    def __post_init__(self):
        if self.y_max is not None and not self.y_max > 0:
            raise DomainError("y_max must be positive")
        if self.spectral_nodes < 16:
            raise DomainError("spectral_nodes must be at least 16")


def plancherel_weight(l, bp: BParam):
    """|S_b(2a)|^2 at a = Q/2 + i l/(2 pi b)."""
    return edge_weight(l, bp)


class SixJTable:
    """Cache of 6j values keyed by the length 6-tuple."""

    def __init__(self, cfg: IdentityConfig):
        self.cfg = cfg
        self.store = {}

    def __call__(self, *lengths) -> complex:
        key = tuple(float(x) for x in lengths)
        if key not in self.store:
            cs = sixj.ColorSet(key, self.cfg.bp)
            self.store[key] = sixj.sixj_eval(cs, self.cfg.sixj_contour, rel_tol=self.cfg.sixj_rel_tol)
        return self.store[key]

    def value(self, *lengths) -> complex:
        return self(*lengths).value


def _spectral_integral(fn, cfg: IdentityConfig, decay_power: int):
    """Integrate fn(l) |S_b(2a)|^2 dIm a over Im a in (delta, y_max].

    fn returns a list of 6j results; the integrand is assembled in log form.
    Returns (value, tail_estimate).
    """
    bp = cfg.bp
    b = bp.b
    to_l = 2 * PI * b  # l = 2 pi b Im a

    def log_integrand(y):
        l = to_l * y
        res = fn(l)
        lm = float(edge_weight_log(l, bp)) + sum(r.log_mag for r in res)
        ph = sum(r.phase for r in res)
        return lm, ph

    y_max = cfg.y_max
    if y_max is None:
        y_max = _pick_cutoff(log_integrand, cfg)
    x, w = np.polynomial.legendre.leggauss(cfg.spectral_nodes)
    lo = cfg.delta
    # split at a few interior points: the integrand rises steeply then decays
    edges = np.linspace(lo, y_max, 5)
    logs, phases, weights, where = [], [], [], []
    for a, c in zip(edges[:-1], edges[1:]):
        ys = 0.5 * (c - a) * x + 0.5 * (c + a)
        for yy, ww in zip(ys, 0.5 * (c - a) * w):
            lm, ph = log_integrand(yy)
            logs.append(lm)
            phases.append(ph)
            weights.append(ww)
            where.append(yy)
    logs, where = np.array(logs), np.array(where)
    m = logs.max()
    total = np.sum(np.array(weights) * np.exp(logs - m + 1j * np.array(phases)))
    # tail beyond y_max: envelope (1 + y)^p exp(-pi b_min y) anchored at the
    # largest sampled value over the last unit of the range
    env = float(np.max(logs[where >= y_max - 1.0])) - m
    r = PI * min(b, 1.0 / b)
    tail = math.exp(env) / r * (1.0 + decay_power / (r * (1.0 + y_max)))
    scale = math.exp(m)
    return complex(total) * scale, tail * scale


def _pick_cutoff(log_integrand, cfg: IdentityConfig, drop: float = 30.0):
    """Smallest y (on a coarse walk) where the integrand has fallen by e^-drop from its running peak."""
    y = 0.5
    peak = -math.inf
    while True:
        lm, _ = log_integrand(y)
        peak = max(peak, lm)
        if lm < peak - drop:
            return y
        y += 0.5
        if y > 200:
            raise AccuracyError("spectral integrand does not decay within Im a < 200")


def _rel(lhs, rhs):
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def pentagon_residual(l, cfg: IdentityConfig):
    """Pentagon identity with colors l[0..9] = a1..a10 (l[7] is the integrated color and ignored).

    LHS = {a5 a6 a10; a3 a4 a7} {a10 a5 a6; a1 a2 a9}
    RHS = int {a3 a7 a6; a1 a2 a8} {a4 a5 a7; a1 a8 a9} {a4 a9 a8; a2 a3 a10} d rho(a8)
    """
    l = np.asarray(l, dtype=float)
    if l.shape != (10,) or np.any(np.delete(l, 7) <= 0):
        raise DomainError("pentagon needs ten colors with positive lengths")
    a1, a2, a3, a4, a5, a6, a7, _, a9, a10 = l
    tab = SixJTable(cfg)
    lhs = tab.value(a5, a6, a10, a3, a4, a7) * tab.value(a10, a5, a6, a1, a2, a9)

    def integrand(a8):
        return [tab(a3, a7, a6, a1, a2, a8), tab(a4, a5, a7, a1, a8, a9), tab(a4, a9, a8, a2, a3, a10)]

    rhs, tail = _spectral_integral(integrand, cfg, 3)
    return lhs, rhs, _rel(lhs, rhs), tail / max(abs(lhs), abs(rhs))


def move44_residual(l, cfg: IdentityConfig):
    """4-4 move with colors l[0..11] = a1..a12; a13 and a14 are integrated.

    LHS = int {a13 a6 a1; a10 a11 a5}{a13 a12 a8; a4 a5 a11}{a8 a13 a12; a2 a3 a9}{a9 a6 a7; a1 a2 a13} d rho(a13)
    RHS = int {a2 a11 a14; a4 a3 a12}{a7 a10 a14; a11 a2 a1}{a7 a9 a6; a5 a10 a14}{a5 a9 a14; a3 a4 a8} d rho(a14)
    """
    l = np.asarray(l, dtype=float)
    if l.shape != (12,) or np.any(l <= 0):
        raise DomainError("4-4 move needs twelve colors with positive lengths")
    a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12 = l
    tab = SixJTable(cfg)

    def left(a13):
        return [tab(a13, a6, a1, a10, a11, a5), tab(a13, a12, a8, a4, a5, a11),
                tab(a8, a13, a12, a2, a3, a9), tab(a9, a6, a7, a1, a2, a13)]

    def right(a14):
        return [tab(a2, a11, a14, a4, a3, a12), tab(a7, a10, a14, a11, a2, a1),
                tab(a7, a9, a6, a5, a10, a14), tab(a5, a9, a14, a3, a4, a8)]

    lhs, t1 = _spectral_integral(left, cfg, 4)
    rhs, t2 = _spectral_integral(right, cfg, 4)
    return lhs, rhs, _rel(lhs, rhs), (t1 + t2) / max(abs(lhs), abs(rhs))
