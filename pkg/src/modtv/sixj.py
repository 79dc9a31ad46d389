"""b-6j symbols of the modular double by vertical-line quadrature."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tetra
from .errors import AccuracyError, ContourError, DomainError
from .specfun import DEFAULT_CFG, PI, BParam, QuadratureConfig, log_double_sine


@dataclass(frozen=True)
class ColorSet:
    """Six colors a_k = Q/2 + i l_k / (2 pi b) on the spectrum line."""

    lengths: tuple
    bp: BParam
    a: np.ndarray = field(init=False, repr=False, compare=False)
    alpha: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        l = tetra.edge_lengths(self.lengths)
        if np.any(l <= 0):
            raise DomainError("colors need strictly positive lengths")
        object.__setattr__(self, "lengths", tuple(float(x) for x in l))
        b = self.bp.b
        object.__setattr__(self, "a", self.bp.Q / 2 + 1j * l / (2 * PI * b))
        object.__setattr__(self, "alpha", PI / 2 + 0.5j * l)

    @classmethod
    def from_lengths(cls, l, b):
        return cls(tuple(np.asarray(l, dtype=float)), b if isinstance(b, BParam) else BParam(b))


@dataclass(frozen=True)
class ContourSpec:
    re_u: float | None = None
    im_max: float | None = None
    nodes_per_unit: int | None = None  # None: fully adaptive


@dataclass(frozen=True)
class SixJResult:
    value: complex
    log_mag: float
    phase: float
    quad_error_est: float  # relative to |value|


def reduced_vars(cs: ColorSet):
    """(t, q, tau, eta): triple sums, quadruple sums with q4 = 2Q, and their xi-space images."""
    a, b, Q = cs.a, cs.bp.b, cs.bp.Q
    t = np.array([a[list(tr)].sum() for tr in tetra._TRIPLES])
    q = np.array([a[list(qd)].sum() for qd in tetra._QUADS] + [2 * Q])
    tau = PI * b * t - 1.5 * PI * b * b
    eta = PI * b * q - 2 * PI * b * b
    eta[3] = 2 * PI
    return t, q, tau, eta


def _prefactor_log(t, q, bp, cfg):
    """-1/2 sum log S_b(q_j - t_i); purely imaginary since Re(q_j - t_i) = Q/2."""
    d = (q[None, :] - t[:, None]).reshape(-1)
    return -0.5 * np.sum(log_double_sine(d, bp, cfg))


def _integrand_log(u, t, q, bp, cfg):
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    z1 = (u[:, None] - t[None, :]).reshape(-1)
    z2 = (q[None, :] - u[:, None]).reshape(-1)
    v = log_double_sine(np.concatenate([z1, z2]), bp, cfg)
    n = u.size
    return v[: 4 * n].reshape(n, 4).sum(axis=1) + v[4 * n:].reshape(n, 4).sum(axis=1)


def u_alpha_b(cs: ColorSet, xi, cfg: QuadratureConfig = DEFAULT_CFG):
    """U_{alpha,b}(xi) = 2 pi i b^2 times the log of the full integrand at u = xi/(pi b)."""
    bp = cs.bp
    t, q, _, _ = reduced_vars(cs)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=complex))
    u = xi_arr / (PI * bp.b)
    val = 2j * PI * bp.b_sq * (_prefactor_log(t, q, bp, cfg) + _integrand_log(u, t, q, bp, cfg))
    return complex(val[0]) if np.ndim(xi) == 0 else val


def default_re_u(cs: ColorSet) -> float:
    Q, b = cs.bp.Q, cs.bp.b
    lo, hi = 1.5 * Q, 2 * Q
    cls = tetra.classify(cs.lengths)
    if cls is not tetra.TetClass.HYPERIDEAL:
        return 2 * Q - 0.05 * Q / 2
    if b > 0.3:
        return 1.75 * Q
    # the integrand concentrates near the critical point
    r = tetra.critical_point(cs.lengths).xi_star.real / (PI * b)
    margin = 0.02 * Q
    return min(max(r, lo + margin), hi - margin)


def _default_im_max(cs: ColorSet, re_u: float) -> float:
    t, q, _, _ = reduced_vars(cs)
    Q = cs.bp.Q
    top = max(np.max(np.abs(t.imag)), np.max(np.abs(q.imag)))
    return top + 30.0 / (PI * min(2 * Q - re_u, re_u - 1.5 * Q))


def sixj_eval(cs: ColorSet, contour: ContourSpec | None = None,
              cfg: QuadratureConfig = DEFAULT_CFG, rel_tol: float = 1e-10) -> SixJResult:
    contour = contour or ContourSpec()
    bp = cs.bp
    Q = bp.Q
    re_u = default_re_u(cs) if contour.re_u is None else float(contour.re_u)
    if not (1.5 * Q < re_u < 2 * Q):
        raise ContourError(f"re_u = {re_u} must lie in (3Q/2, 2Q) = ({1.5 * Q}, {2 * Q})")
    if min(re_u - 1.5 * Q, 2 * Q - re_u) < 1e-3:
        raise ContourError("contour passes within 1e-3 of a pole of the integrand")
    Y = _default_im_max(cs, re_u) if contour.im_max is None else float(contour.im_max)
    t, q, _, _ = reduced_vars(cs)
    pre = _prefactor_log(t, q, bp, cfg)

    def logf(y):
        return _integrand_log(re_u + 1j * np.asarray(y, dtype=float), t, q, bp, cfg)

    # locate the peak of |integrand| so the integrand can be rescaled, and drop
    # the stretches of the line where it is negligible
    grid = np.linspace(-Y, Y, 161)
    lg = logf(grid)
    k = int(np.argmax(lg.real))
    y0 = grid[k]
    scale = lg[k].real
    keep = np.flatnonzero(lg.real - scale > math.log(rel_tol) - 14.0)
    i0, i1 = max(keep[0] - 1, 0), min(keep[-1] + 1, grid.size - 1)
    a, b = grid[i0], grid[i1]

    def g(y):
        return np.exp(logf(y) - scale)

    if contour.nodes_per_unit:
        total, err = _fixed_panels(g, -Y, Y, contour.nodes_per_unit)
        a, b = -Y, Y
    else:
        # the log of the integrand carries absolute error ~ rel_tol * |log|
        noise = cfg.rel_tol * (1.0 + float(np.max(np.abs(lg[i0:i1 + 1]))))
        total, err = _adaptive_panels(g, a, b, y0, rel_tol, cfg.max_subdivisions, noise)
    # beyond the integration range |integrand| decays at least like exp(-2 pi Q |y|)
    # far out; near the range use the observed slope of log|integrand|
    tail = 0.0
    for end, nxt in ((a, a - 0.05), (b, b + 0.05)):
        l_end = logf(np.array([end, nxt])).real
        slope = max((l_end[0] - l_end[1]) / 0.05, 0.0)
        rate = min(2 * PI * Q, slope) if slope > 0 else 0.0
        tail += math.inf if rate == 0 else math.exp(l_end[0] - scale) / rate
    mag = abs(total)
    if mag == 0 or not np.isfinite(mag):
        raise AccuracyError("quadrature returned a vanishing or non-finite value")
    if tail > rel_tol * mag * 10:
        raise AccuracyError(f"tail bound {tail / mag:.2e} exceeds tolerance; increase im_max")
    # integrate against d(Im u): with du = i d(Im u) the symbol would be purely
    # imaginary, and only this normalization is compatible with the pentagon identity
    log_mag = scale + pre.real + math.log(mag)
    phase = float(np.angle(total * np.exp(1j * pre.imag)))
    rel_err = (err + tail) / mag
    with np.errstate(over="ignore", under="ignore"):
        value = complex(np.exp(log_mag + 1j * phase))
    return SixJResult(value, float(log_mag), phase, float(rel_err))


_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(10)


def _panel_rules(f, a, b):
    """Vectorized 20- and 10-point Gauss-Legendre sums on panels [a_k, b_k], plus the 20-point sum of |f|."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    out = []
    for x, w in (_GL_HI, _GL_LO):
        yy = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
        vals = f(yy).reshape(a.size, x.size)
        out.append(half * (vals @ w))
        if len(out) == 1:
            out.append(half * (np.abs(vals) @ w))
    return out[0], out[2], out[1]


def _adaptive_panels(f, lo, hi, centre, rel_tol, max_panels, noise=1e-12):
    """Bisect panels until the 20/10-point difference meets rel_tol of the running total.

    A panel is also accepted once its error estimate is at the level of the
    integrand's own evaluation noise (relative size ``noise``).
    """
    width = min(1.0, (hi - lo) / 8)
    edges = np.unique(np.concatenate([np.arange(centre, lo, -width), np.arange(centre, hi, width), [lo, hi]]))
    edges = edges[(edges >= lo) & (edges <= hi)]
    a, b = edges[:-1], edges[1:]
    done_val = 0j
    done_err = 0.0
    while a.size:
        hi_v, lo_v, ab_v = _panel_rules(f, a, b)
        est = np.abs(hi_v - lo_v)
        total = done_val + hi_v.sum()
        tol = rel_tol * max(abs(total), 1e-300)
        ok = (est <= tol * (b - a) / (hi - lo)) | (est <= 100 * noise * ab_v)
        done_val += hi_v[ok].sum()
        done_err += est[ok].sum()
        a, b = a[~ok], b[~ok]
        if a.size == 0:
            break
        if a.size * 2 + 1 > max_panels:
            raise AccuracyError("6j quadrature did not converge within the panel budget")
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    return done_val, done_err


def _fixed_panels(f, lo, hi, nodes_per_unit):
    n = max(int(np.ceil((hi - lo) * nodes_per_unit / 20)), 1)
    edges = np.linspace(lo, hi, n + 1)
    hi_v, lo_v, _ = _panel_rules(f, edges[:-1], edges[1:])
    return hi_v.sum(), float(np.abs(hi_v - lo_v).sum())


def sixj_asymptotic(cs: ColorSet):
    """Leading log-magnitude prediction and the class of the tetrahedron."""
    l = cs.lengths
    b2 = cs.bp.b_sq
    cls = tetra.classify(l)
    if cls is tetra.TetClass.HYPERIDEAL:
        det = tetra.gram(l).det
        return -tetra.covolume(l) / (PI * b2) - 0.25 * math.log(-det), cls
    return -tetra.extended_covolume(l) / (PI * b2), cls
