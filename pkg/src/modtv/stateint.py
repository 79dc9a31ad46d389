"""Turaev-Viro type state integral over edge lengths and its small-b scan."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import poly, sixj
from .errors import AccuracyError, ValidationError
from .specfun import PI, BParam, edge_weight_log


@dataclass(frozen=True)
class StateIntegralConfig:
    bp: BParam
    window_halfwidth: float = 4.0
    grid_per_edge: int = 32
    inner_contour: sixj.ContourSpec = field(default_factory=sixj.ContourSpec)
    tail_tol: float = 1e-6
    eps: float = 1e-6

    def __post_init__(self):
        if not self.window_halfwidth > 0:
            raise ValidationError("window_halfwidth must be positive")
        if self.grid_per_edge < 8:
            raise ValidationError("grid_per_edge must be at least 8")


@dataclass(frozen=True)
class TVResult:
    log_mag: float
    phase: float
    est_error: float
    b: float


class _SixJCache:
    """Memo of 6j evaluations keyed by the rounded length 6-tuple."""

    def __init__(self, bp, contour):
        self.bp = bp
        self.contour = contour
        self.store = {}

    def __call__(self, lt):
        key = tuple(np.round(np.asarray(lt, dtype=float), 14))
        hit = self.store.get(key)
        if hit is None:
            cs = sixj.ColorSet(key, self.bp)
            hit = self.store[key] = sixj.sixj_eval(cs, self.contour)
        return hit


def tv_integrand_log(tri: poly.Triangulation, l_vec, bp: BParam,
                     contour: sixj.ContourSpec | None = None, _cache=None):
    """(log|integrand|, phase, summed relative 6j error) at one point of the length domain.

    The measure d(Im a_e) = dl_e / (2 pi b) is folded in.
    """
    l = np.asarray(l_vec, dtype=float)
    cache = _cache or _SixJCache(bp, contour)
    log_mag = float(np.sum(edge_weight_log(l, bp))) - tri.edge_count * math.log(2 * PI * bp.b)
    phase = 0.0
    err = 0.0
    for t in tri.tets:
        r = cache(l[list(t)])
        log_mag += r.log_mag
        phase += r.phase
        err += r.quad_error_est
    return log_mag, phase, err


def _lse(logs, phases, weights):
    m = float(np.max(logs))
    s = np.sum(weights * np.exp(logs - m + 1j * phases))
    return m, s


def _cubature(tri, bp, lo, hi, n, cache):
    """Tensor n-point Gauss-Legendre sum over the box [lo, hi] in log form: (max log, scaled sum, inner error)."""
    x, wt = np.polynomial.legendre.leggauss(n)
    nodes = [0.5 * (h - a) * x + 0.5 * (h + a) for a, h in zip(lo, hi)]
    weights = [0.5 * (h - a) * wt for a, h in zip(lo, hi)]
    logs, phases, ws = [], [], []
    inner_err = 0.0
    for idx in itertools.product(range(n), repeat=tri.edge_count):
        pt = np.array([nodes[e][i] for e, i in enumerate(idx)])
        lm, ph, er = tv_integrand_log(tri, pt, bp, _cache=cache)
        logs.append(lm)
        phases.append(ph)
        ws.append(np.prod([weights[e][i] for e, i in enumerate(idx)]))
        inner_err = max(inner_err, er)
    m, s = _lse(np.array(logs), np.array(phases), np.array(ws))
    return m, s, inner_err


def tv_eval(tri: poly.Triangulation, cfg: StateIntegralConfig, l_star=None) -> TVResult:
    """Tensor Gauss-Legendre cubature around the solved metric, accumulated in log form.

    est_error (on the natural-log scale of |TV|) adds the inner 6j error, the
    outer tail bound, and the change against a half-size grid on the same box.
    """
    if l_star is None:
        l_star = poly.solve_metric(tri).l_star
    l_star = np.asarray(l_star, dtype=float)
    bp = cfg.bp
    w = cfg.window_halfwidth * math.sqrt(bp.b) * (1.0 + l_star)
    lo = np.maximum(l_star - w, cfg.eps)
    hi = l_star + w
    cache = _SixJCache(bp, cfg.inner_contour)
    m, s, inner_err = _cubature(tri, bp, lo, hi, cfg.grid_per_edge, cache)
    if abs(s) == 0:
        raise AccuracyError("state integral cubature cancelled to zero")
    mc, sc, _ = _cubature(tri, bp, lo, hi, cfg.grid_per_edge // 2, cache)
    log_mag = m + math.log(abs(s))
    grid_err = abs(mc + math.log(abs(sc)) - log_mag) if abs(sc) > 0 else math.inf
    tail = _tail_estimate(tri, cfg, lo, hi, cache, m) / abs(s)
    if tail > cfg.tail_tol:
        raise AccuracyError(f"outer tail estimate {tail:.2e} exceeds tail_tol; enlarge window_halfwidth")
    return TVResult(log_mag, float(np.angle(s)), inner_err + tail + grid_err, bp.b)


def _tail_estimate(tri, cfg, lo, hi, cache, m):
    """Bound the mass outside the window from the log-concave decay at each face.

    For a log-concave profile g beyond the face at c with slope -k < 0 in the
    outward direction, the remaining mass is at most g(c)/k per unit of the
    transverse measure; the transverse extent is bounded by the window volume.
    """
    bp = cfg.bp
    E = tri.edge_count
    centre = 0.5 * (lo + hi)
    vol = float(np.prod(hi - lo))
    total = 0.0
    for e in range(E):
        for face, sgn in ((hi[e], 1.0), (lo[e], -1.0)):
            if sgn < 0 and face <= cfg.eps * 1.0001:
                continue  # integrand vanishes at l = 0
            d = 1e-3
            p0 = centre.copy()
            p0[e] = face
            p1 = p0.copy()
            p1[e] = face + sgn * d
            g0 = tv_integrand_log(tri, p0, bp, _cache=cache)[0]
            g1 = tv_integrand_log(tri, p1, bp, _cache=cache)[0]
            k = (g0 - g1) / d
            width = vol / (hi[e] - lo[e])
            if k <= 0:
                return math.inf
            total += width * math.exp(g0 - m) / k
    return total


def tv_prediction(tri: poly.Triangulation, sr: poly.SolveResult | None = None):
    """(Vol, chi, |Tor|) and the predicted log|TV| as a function of b."""
    sr = sr or poly.solve_metric(tri)
    return sr.volume, tri.euler_char, sr.torsion_abs


def predicted_log_mag(vol, chi, tor, b):
    return -vol / (PI * b * b) + 0.5 * chi * math.log(2) - 0.5 * math.log(tor)


@dataclass
class ScanFit:
    V_fit: float
    oneloop_fit: float
    c1: float
    residuals: np.ndarray
    rows: list


def _scan_point(args):
    tri, b, window_halfwidth, grid_per_edge, l_star = args
    cfg = StateIntegralConfig(BParam(b), window_halfwidth, grid_per_edge)
    return tv_eval(tri, cfg, l_star)


def tv_scan(tri: poly.Triangulation, b_list, window_halfwidth=4.0, grid_per_edge=32, workers: int = 1) -> ScanFit:
    """Fit log|TV_b| = -V/(pi b^2) + s + c1 b^2 over the scan grid.

    With workers > 1 the values of b are evaluated in separate processes; the
    rows keep the order of b_list so the fit is unchanged.
    """
    b_list = [float(b) for b in b_list]
    if len(b_list) < 3:
        raise ValidationError("tv_scan needs at least three values of b")
    sr = poly.solve_metric(tri)
    vol, chi, tor = tv_prediction(tri, sr)
    jobs = [(tri, b, window_halfwidth, grid_per_edge, sr.l_star) for b in b_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, jobs))
    else:
        results = [_scan_point(j) for j in jobs]
    rows = []
    for b, r in zip(b_list, results):
        rows.append({"b": b, "log_mag": r.log_mag, "phase": r.phase, "est_error": r.est_error,
                     "prediction_log_mag": predicted_log_mag(vol, chi, tor, b)})
    bs = np.array(b_list)
    y = np.array([row["log_mag"] for row in rows])
    X = np.column_stack([-1.0 / (PI * bs ** 2), np.ones_like(bs), bs ** 2])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return ScanFit(float(coef[0]), float(coef[1]), float(coef[2]), y - X @ coef, rows)
