"""Dilogarithm, the function L, the double sine function and Faddeev's quantum dilogarithm.

All complex routines accept scalars or numpy arrays and return complex values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spence

from .errors import AccuracyError, DomainError, SingularityError

PI = math.pi
CATALAN = 0.915965594177219015054603514932384110774
ZETA2 = PI * PI / 6.0

# Gauss-Legendre panel used by the double sine quadrature
_GL_N = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)


@dataclass(frozen=True)
class BParam:
    """Quantum parameter b in (0, 1) with Q = b + 1/b."""

    b: float
    Q: float = field(init=False)
    b_sq: float = field(init=False)

    def __post_init__(self):
        b = float(self.b)
        if not (0.0 < b < 1.0):
            raise DomainError(f"b must lie in (0, 1), got {b}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "Q", b + 1.0 / b)
        object.__setattr__(self, "b_sq", b * b)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-12
    tail_cutoff: float | None = None  # None: chosen from the decay envelope
    max_subdivisions: int = 4000
    asymptotic_switch_height: float = 40.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.tail_cutoff is not None and not self.tail_cutoff > 0:
            raise ValueError("tail_cutoff must be positive")


DEFAULT_CFG = QuadratureConfig()


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _out(arr, scalar):
    return complex(arr.reshape(-1)[0]) if scalar else arr


# ---------------------------------------------------------------------------
# dilogarithm and L


def li2(z):
    """Principal dilogarithm, analytic off [1, inf)."""
    z = _as_complex(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    bad = (z.imag == 0) & (z.real > 1)
    if np.any(bad):
        raise DomainError("li2 argument on the branch cut (1, inf)")
    # scipy: spence(w) = Li2(1 - w)
    return _out(spence(1.0 - z), scalar)


def _li2_above_cut(y):
    """Li2(y + i0) for real y > 1."""
    y = np.asarray(y, dtype=float)
    ly = np.log(y)
    re = 2.0 * ZETA2 - 0.5 * ly * ly - spence(1.0 - 1.0 / y).real
    return re + 1j * PI * ly


def _reduce_strip(x):
    """Split x = x0 + n*pi with 0 <= Re x0 < pi."""
    n = np.floor(x.real / PI)
    x0 = x - n * PI
    # guard rounding that pushes Re x0 to pi
    over = x0.real >= PI
    n = np.where(over, n + 1, n)
    x0 = np.where(over, x0 - PI, x0)
    return x0, n


def _check_L_domain(x):
    bad = (x.imag == 0) & ((x.real < 0) | (x.real > PI))
    if np.any(bad):
        raise DomainError("L is not defined on the real rays (-inf, 0) and (pi, inf)")


def _L_strip(x0):
    """L on 0 <= Re x0 < pi; the line Re x0 = 0, Im x0 < 0 uses the limit from Re x > 0."""
    e = np.exp(2j * x0)
    cut = (x0.imag < 0) & (x0.real == 0)
    li = np.empty_like(e)
    if np.any(cut):
        li[cut] = _li2_above_cut(e[cut].real)
    ok = ~cut
    li[ok] = spence(1.0 - e[ok])
    return x0 * x0 - PI * x0 + ZETA2 - li


def big_L(x):
    """L(x) = x^2 - pi x + pi^2/6 - Li2(e^{2ix}), continued to C minus the two real rays."""
    x = _as_complex(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    _check_L_domain(x)
    x0, n = _reduce_strip(x)
    val = _L_strip(x0)
    s = np.sign(x.imag)
    # L(x0 + n pi) = L(x0) + s * 2 pi * sum_{k=0}^{n-1} (x0 + k pi), extended to n < 0
    shift = 2 * PI * (n * x0 + PI * n * (n - 1) / 2.0)
    val = val + s * shift
    return _out(val, scalar)


def big_L_prime(x):
    """L'(x) = 2x - pi + 2i log(1 - e^{2ix}) on the branch matching big_L."""
    x = _as_complex(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    _check_L_domain(x)
    x0, n = _reduce_strip(x)
    e = np.exp(2j * x0)
    if np.any(np.abs(1.0 - e) == 0):
        raise SingularityError("L' is singular where e^{2ix} = 1")
    w = 1.0 - e
    lg = np.log(w)
    cut = (x0.imag < 0) & (x0.real == 0)
    # 1 - (y + i0) with y > 1 lies just below the negative axis
    lg = np.where(cut, np.log(np.abs(w)) - 1j * PI, lg)
    val = 2 * x0 - PI + 2j * lg + np.sign(x.imag) * 2 * PI * n
    return _out(val, scalar)


def big_L_second(x):
    """L''(x) = 2 + 4 e^{2ix} / (1 - e^{2ix}) (single valued)."""
    x = _as_complex(x)
    e = np.exp(2j * x)
    return 2.0 + 4.0 * e / (1.0 - e)


def big_L_third(x):
    """L'''(x) = 8i e^{2ix} / (1 - e^{2ix})^2."""
    x = _as_complex(x)
    e = np.exp(2j * x)
    return 8j * e / (1.0 - e) ** 2


# ---------------------------------------------------------------------------
# double sine


def _switch_height(bp: BParam, cfg: QuadratureConfig) -> float:
    # exponential corrections to the strip asymptotic decay like exp(-2 pi b |Im z|)
    need = (math.log(1.0 / cfg.rel_tol) + 4.0) / (2 * PI * bp.b)
    return max(cfg.asymptotic_switch_height, need)


def _asymptotic(z, bp: BParam):
    s = np.sign(z.imag)
    return -s * (0.5j * PI * z * (z - bp.Q) + 1j * PI / 12.0 * (bp.Q ** 2 + 1.0))


def _log_sb_integral(z, bp: BParam, cfg: QuadratureConfig, chunk: int = 256):
    """Chunked driver for _log_sb_integral_block; points are grouped by height so
    each block gets a panel width suited to its own oscillation."""
    out = np.empty_like(z)
    order = np.argsort(np.abs(z.imag), kind="stable")
    for k in range(0, z.size, chunk):
        idx = order[k:k + chunk]
        out[idx] = _log_sb_integral_block(z[idx], bp, cfg)
    return out


def _log_sb_integral_block(z, bp: BParam, cfg: QuadratureConfig):
    """Regularized real-axis integral, valid for 0 < Re z < Q.

    With w = Q/2 - z and f the (even) integrand, the contour prescription gives
    log S_b(z) = 2 * int_0^T (f - w/t^2) dt - 2 w / T + 2 * int_T^inf f dt,
    the last term being below the configured tolerance.
    """
    b = bp.b
    Q = bp.Q
    w = 0.5 * Q - z
    rate = 0.5 * Q - np.max(np.abs(w.real))
    if rate <= 0:
        raise SingularityError("argument outside the open strip 0 < Re z < Q")
    tol = cfg.rel_tol
    if cfg.tail_cutoff is not None:
        T = cfg.tail_cutoff
    else:
        T = (math.log(1.0 / tol) + 6.0) / rate
    ymax = float(np.max(np.abs(w.imag))) if w.size else 0.0
    # GL20 panels: poles of the integrand sit 2 pi b off the real axis, and
    # 14 / ymax keeps at most ~7 radians of oscillation per half panel
    h = min(2 * PI * b, 14.0 / max(ymax, 1e-300), T)
    npan = int(math.ceil(T / h))
    if npan > cfg.max_subdivisions:
        raise AccuracyError(
            f"double sine quadrature needs {npan} panels (max {cfg.max_subdivisions}); "
            "raise max_subdivisions or lower rel_tol")
    h = T / npan
    edges = np.arange(npan) * h
    t = (edges[:, None] + 0.5 * h * (_GL_X[None, :] + 1.0)).ravel()
    wt = np.tile(0.5 * h * _GL_W, npan)

    beta = 0.5 * b
    gamma = 0.5 / b
    tt = t[None, :]
    ww = w[:, None]
    e1 = -np.expm1(-b * tt)
    e2 = -np.expm1(-tt / b)
    f = (np.exp((ww - 0.5 * Q) * tt) - np.exp(-(ww + 0.5 * Q) * tt)) / (2.0 * tt * e1 * e2)
    g = f - ww / (tt * tt)
    # series near the origin where the subtraction cancels
    small = (np.maximum(gamma, np.abs(ww)) * tt) < 2e-3
    if np.any(small):
        w2 = ww * ww
        s2 = beta * beta + gamma * gamma
        c0 = (w2 - s2) / 6.0
        c2 = (w2 * w2 / 120.0 + 7.0 * (beta ** 4 + gamma ** 4) / 360.0
              + (beta * gamma) ** 2 / 36.0 - w2 * s2 / 36.0)
        ser = ww * (c0 + c2 * tt * tt)
        g = np.where(small, ser, g)
    integral = g @ wt
    return 2.0 * integral - 2.0 * w / T


def _log2sin_principal(x):
    return np.log(2.0 * np.sin(x))


def _log2sin_halfplane(theta):
    """Branch of log(2 sin theta) holomorphic in each open half plane, principal at large |Im|."""
    up = theta.imag > 0
    dn = theta.imag < 0
    out = np.log(2.0 * np.sin(theta) + 0j)
    if np.any(up):
        th = theta[up]
        out[up] = 0.5j * PI - 1j * th + np.log(1.0 - np.exp(2j * th))
    if np.any(dn):
        th = theta[dn]
        out[dn] = -0.5j * PI + 1j * th + np.log(1.0 - np.exp(-2j * th))
    return out


def _check_poles(z, bp: BParam):
    """Raise at poles -n b - m/b and zeros Q + n b + m/b."""
    b = bp.b
    real = np.abs(z.imag) < 1e-14
    if not np.any(real):
        return
    for x in z.real[real]:
        for y in (-x, x - bp.Q):
            if y < -1e-12:
                continue
            # y = n b + m / b with n, m >= 0
            mmax = int(y * b + 1e-9)
            for m in range(mmax + 1):
                r = (y - m / b) / b
                if abs(r - round(r)) < 1e-10 and round(r) >= 0:
                    raise SingularityError(f"S_b has a pole or zero at z = {x}")


def log_double_sine(z, bp: BParam, cfg: QuadratureConfig = DEFAULT_CFG):
    """log S_b(z).

    Inside the strip 0 < Re z < Q the value is the logarithm defined by the
    integral. Arguments are first moved by steps of 1/b (branch holomorphic
    in the upper and lower half planes) into the strip, then by steps of b
    (principal logarithms, exact inside the strip) toward Re z = Q/2, where
    either the quadrature or, far from the real axis, the strip asymptotic
    is used.
    """
    z = _as_complex(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    _check_poles(z, bp)
    b, Q = bp.b, bp.Q
    acc = np.zeros_like(z)

    # coarse moves by 1/b
    for _ in range(100000):
        hi = z.real >= Q
        lo = z.real <= 0
        if not (np.any(hi) or np.any(lo)):
            break
        if np.any(hi):
            zz = z[hi] - 1.0 / b
            th = PI * zz / b
            lg = np.where(np.abs(zz.imag) > 0, _log2sin_halfplane(th), np.log(2.0 * np.sin(th) + 0j))
            acc[hi] += lg
            z[hi] = zz
        if np.any(lo):
            zz = z[lo]
            th = PI * zz / b
            lg = np.where(np.abs(zz.imag) > 0, _log2sin_halfplane(th), np.log(2.0 * np.sin(th) + 0j))
            acc[lo] -= lg
            z[lo] = zz + 1.0 / b

    # fine moves by b toward the centre line
    lo_lim = 0.5 * Q - 0.5 * b
    hi_lim = 0.5 * Q + 0.5 * b
    kup = np.where(z.real < lo_lim, np.ceil((lo_lim - z.real) / b), 0).astype(int)
    kdn = np.where(z.real > hi_lim, np.ceil((z.real - hi_lim) / b), 0).astype(int)
    kmax = int(max(kup.max(initial=0), kdn.max(initial=0)))
    for j in range(kmax):
        up = kup > j
        if np.any(up):
            acc[up] -= _log2sin_principal(PI * b * z[up])
            z[up] = z[up] + b
        dn = kdn > j
        if np.any(dn):
            z[dn] = z[dn] - b
            acc[dn] += _log2sin_principal(PI * b * z[dn])

    out = np.empty_like(z)
    H = _switch_height(bp, cfg)
    far = np.abs(z.imag) >= H
    if np.any(far):
        out[far] = _asymptotic(z[far], bp)
    near = ~far
    if np.any(near):
        out[near] = _log_sb_integral(z[near], bp, cfg)
    res = out + acc
    if not np.all(np.isfinite(res)):
        raise SingularityError("log S_b evaluated at or too close to a pole or zero")
    return _out(res, scalar)


def double_sine(z, bp: BParam, cfg: QuadratureConfig = DEFAULT_CFG):
    return np.exp(log_double_sine(z, bp, cfg))


def log_sb_shifted(x, bp: BParam, cfg: QuadratureConfig = DEFAULT_CFG):
    """log S_b(x/(pi b) + b/2) on C minus (-inf, 0] and [pi, inf)."""
    x = _as_complex(x)
    bad = (x.imag == 0) & ((x.real <= 0) | (x.real >= PI))
    if np.any(bad):
        raise DomainError("log_sb_shifted is not defined on the real rays (-inf, 0] and [pi, inf)")
    return log_double_sine(x / (PI * bp.b) + 0.5 * bp.b, bp, cfg)


def faddeev_phi(z, bp: BParam, cfg: QuadratureConfig = DEFAULT_CFG):
    """Phi_b(z) = S_b(iz + Q/2) exp(pi i z^2/2 + pi i (b^2 + b^-2)/24)."""
    return np.exp(log_faddeev_phi(z, bp, cfg))


def log_faddeev_phi(z, bp: BParam, cfg: QuadratureConfig = DEFAULT_CFG):
    z = _as_complex(z)
    c = 1j * PI / 24.0 * (bp.b_sq + 1.0 / bp.b_sq)
    return log_double_sine(1j * z + 0.5 * bp.Q, bp, cfg) + 0.5j * PI * z * z + c


def edge_weight(l, bp: BParam):
    """4 sinh(l) sinh(l/b^2) = |S_b(2a)|^2 for a = Q/2 + i l/(2 pi b)."""
    l = np.asarray(l, dtype=float)
    if np.any(l < 0):
        raise DomainError("edge length must be nonnegative")
    with np.errstate(over="ignore"):
        return 4.0 * np.sinh(l) * np.sinh(l / bp.b_sq)


def edge_weight_log(l, bp: BParam):
    """log of edge_weight, finite for large l / b^2."""
    l = np.asarray(l, dtype=float)
    if np.any(l <= 0):
        raise DomainError("edge length must be positive for the log weight")
    x = l / bp.b_sq
    # log(2 sinh x) = x + log(1 - e^{-2x})
    return (l + np.log(-np.expm1(-2 * l))) + (x + np.log(-np.expm1(-2 * x)))
