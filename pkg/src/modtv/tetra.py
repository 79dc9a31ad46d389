"""Geometry of truncated hyperideal tetrahedra and the saddle-point kernel.

Edge lengths are indexed l1..l6 as (l12, l13, l23, l34, l24, l14), so that
(1,4), (2,5), (3,6) are the opposite pairs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ClassError, DomainError, ModTVError, SingularityError
from .specfun import CATALAN, PI, big_L, big_L_prime, big_L_second, big_L_third

COV_ZERO = 4.0 * CATALAN

# vertex pair (0-based) carrying each edge, and the complementary pair
_EDGE_VERTS = ((0, 1), (0, 2), (1, 2), (2, 3), (1, 3), (0, 3))
_OPP_VERTS = ((2, 3), (1, 3), (0, 3), (0, 1), (0, 2), (1, 2))

# edges meeting at each truncation triangle / bounding each face
_TRIPLES = ((0, 1, 2), (0, 4, 5), (1, 3, 5), (2, 3, 4))
_QUADS = ((0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5))


class TetClass(enum.Enum):
    HYPERIDEAL = "Hyperideal"
    FLAT = "Flat"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class GramData:
    matrix: np.ndarray
    det: float
    cofactors: np.ndarray


@dataclass(frozen=True)
class CriticalData:
    A: complex
    B: complex
    C: complex
    discriminant: complex
    z_star: complex
    z_star2: complex
    xi_star: complex
    xi_star2: complex | None
    cls: TetClass


def edge_lengths(l) -> np.ndarray:
    """Validate and return six nonnegative edge lengths as a float array."""
    arr = np.asarray(l, dtype=float).reshape(-1)
    if arr.shape != (6,):
        raise DomainError(f"expected six edge lengths, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("edge lengths must be finite and nonnegative")
    return arr


def alpha_from_lengths(l) -> np.ndarray:
    """alpha_k = pi/2 + i l_k / 2."""
    return PI / 2 + 0.5j * edge_lengths(l)


# ---------------------------------------------------------------------------
# Gram matrix and classification


def gram(l) -> GramData:
    l = edge_lengths(l)
    ch = np.cosh(l)
    G = np.eye(4)
    for k, (i, j) in enumerate(_EDGE_VERTS):
        G[i, j] = G[j, i] = -ch[k]
    cof = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            minor = np.delete(np.delete(G, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    # cofactor expansion along the first row is steadier than LU here
    det = float(G[0] @ cof[0])
    return GramData(G, det, cof)


def flat_tolerance(l) -> float:
    return 1e-9 * (1.0 + float(np.max(np.cosh(edge_lengths(l)))) ** 4)


def classify(l, eps_flat: float | None = None) -> TetClass:
    eps = flat_tolerance(l) if eps_flat is None else eps_flat
    d = gram(l).det
    if d < -eps:
        return TetClass.HYPERIDEAL
    if d > eps:
        return TetClass.DEGENERATE
    return TetClass.FLAT


def _cofactor_angles(g: GramData) -> np.ndarray:
    cof = g.cofactors
    th = np.empty(6)
    for k, (i, j) in enumerate(_OPP_VERTS):
        denom = math.sqrt(max(cof[i, i] * cof[j, j], 0.0))
        c = cof[i, j] / denom if denom > 0 else 1.0
        th[k] = math.acos(min(1.0, max(-1.0, c)))
    return th


def dihedral_angles(l) -> np.ndarray:
    cls = classify(l)
    if cls is not TetClass.HYPERIDEAL:
        raise ClassError(f"dihedral angles need a hyperideal tetrahedron, got {cls.value}; use extended_angles")
    return _cofactor_angles(gram(l))


def extended_angles(l) -> np.ndarray:
    """Dihedral angles, continued by the clamped cofactor ratio (values 0 or pi) off the hyperideal region."""
    th = _cofactor_angles(gram(l))
    if classify(l) is TetClass.HYPERIDEAL:
        return th
    # opposite edges carry the same extended angle; snap to {0, pi}
    out = np.empty(6)
    for k in range(3):
        v = 0.5 * (th[k] + th[k + 3])
        out[k] = out[k + 3] = PI if v > PI / 2 else 0.0
    return out


# ---------------------------------------------------------------------------
# kernel functions


def _tau_eta(alpha):
    a = np.asarray(alpha, dtype=complex).reshape(-1)
    if a.shape != (6,):
        raise DomainError("expected six alpha values")
    tau = np.array([a[list(t)].sum() for t in _TRIPLES])
    eta = np.array([a[list(q)].sum() for q in _QUADS] + [2 * PI])
    return tau, eta


def _L_checked(x, label):
    try:
        return big_L(x)
    except DomainError as exc:
        raise DomainError(f"{label}: {exc}") from None


def kernel_U(alpha, xi) -> complex:
    tau, eta = _tau_eta(alpha)
    total = 0j
    for i in range(4):
        for j in range(4):
            total -= 0.5 * _L_checked(eta[j] - tau[i], f"L(eta_{j + 1} - tau_{i + 1})")
    for i in range(4):
        total += _L_checked(xi - tau[i], f"L(xi - tau_{i + 1})")
    for j in range(4):
        total += _L_checked(eta[j] - xi, f"L(eta_{j + 1} - xi)")
    return complex(total)


def kernel_U_prime(alpha, xi) -> complex:
    tau, eta = _tau_eta(alpha)
    return complex(np.sum(big_L_prime(xi - tau)) - np.sum(big_L_prime(eta - xi)))


def kernel_U_second(alpha, xi) -> complex:
    tau, eta = _tau_eta(alpha)
    return complex(np.sum(big_L_second(xi - tau)) + np.sum(big_L_second(eta - xi)))


def kernel_U_third(alpha, xi) -> complex:
    tau, eta = _tau_eta(alpha)
    return complex(np.sum(big_L_third(xi - tau)) - np.sum(big_L_third(eta - xi)))


def kernel_U_hessian(alpha, xi) -> np.ndarray:
    """Hessian of U in (alpha_1..alpha_6, xi), assembled from L'' termwise."""
    tau, eta = _tau_eta(alpha)
    P = np.zeros((4, 6))
    R = np.zeros((4, 6))
    for i, tr in enumerate(_TRIPLES):
        P[i, list(tr)] = 1.0
    for j, qd in enumerate(_QUADS):
        R[j, list(qd)] = 1.0
    H = np.zeros((7, 7), dtype=complex)
    for i in range(4):
        for j in range(4):
            d = R[j] - P[i]
            H[:6, :6] -= 0.5 * complex(big_L_second(eta[j] - tau[i])) * np.outer(d, d)
    a = big_L_second(xi - tau)
    c = big_L_second(eta - xi)
    for i in range(4):
        H[:6, :6] += a[i] * np.outer(P[i], P[i])
        H[:6, 6] -= a[i] * P[i]
    for j in range(4):
        H[:6, :6] += c[j] * np.outer(R[j], R[j])
        H[:6, 6] -= c[j] * R[j]
    H[6, :6] = H[:6, 6]
    H[6, 6] = a.sum() + c.sum()
    return H


def kernel_kappa(alpha, xi) -> complex:
    tau, eta = _tau_eta(alpha)
    a = np.asarray(alpha, dtype=complex)
    w1 = 1.0 - np.exp(2j * (xi - tau))
    w2 = 1.0 - np.exp(2j * (eta - xi))
    if np.any(np.abs(w1) == 0) or np.any(np.abs(w2) == 0):
        raise SingularityError("kappa is singular: xi hits some tau_i or eta_j modulo pi")
    val = (8 * PI ** 2 + 14 * PI * a.sum() - 28 * PI * xi
           - 4j * PI * np.log(w1).sum() + 3j * PI * np.log(w2).sum())
    return complex(val)


# ---------------------------------------------------------------------------
# critical point


def critical_quadratic(l):
    """Coefficients (A, B, C) of A z^2 + B z + C = 0 with u_k = -exp(-l_k)."""
    u = -np.exp(-edge_lengths(l))
    u1, u2, u3, u4, u5, u6 = u
    A = (u1 * u4 + u2 * u5 + u3 * u6 - u1 * u2 * u6 - u1 * u3 * u5 - u2 * u3 * u4
         - u4 * u5 * u6 + u1 * u2 * u3 * u4 * u5 * u6)
    s = u - 1.0 / u
    B = -(s[0] * s[3] + s[1] * s[4] + s[2] * s[5])
    v = 1.0 / u
    v1, v2, v3, v4, v5, v6 = v
    C = (v1 * v4 + v2 * v5 + v3 * v6 - v1 * v2 * v6 - v1 * v3 * v5 - v2 * v3 * v4
         - v4 * v5 * v6 + v1 * v2 * v3 * v4 * v5 * v6)
    return float(A), float(B), float(C)


def xi_from_z(z: complex) -> complex:
    """Inverse of z = exp(-2i xi) with Re xi in [3pi/2, 2pi] for Im z >= 0."""
    z = complex(z)
    phi = math.atan2(z.imag, z.real)
    if z.imag == 0 and z.real < 0:
        phi = PI
    return complex(2 * PI - phi / 2, 0.5 * math.log(abs(z)))


def critical_point(l) -> CriticalData:
    l = edge_lengths(l)
    A, B, C = critical_quadratic(l)
    if A == 0:
        raise ModTVError("leading coefficient of the critical quadratic vanished")
    cls = classify(l)
    disc = B * B - 4 * A * C
    if cls is TetClass.HYPERIDEAL:
        r = 1j * math.sqrt(max(-disc, 0.0))
        z1, z2 = (-B + r) / (2 * A), (-B - r) / (2 * A)
        return CriticalData(A, B, C, complex(disc), z1, z2, xi_from_z(z1), None, cls)
    if cls is TetClass.FLAT:
        z1 = z2 = complex(-B / (2 * A))
        xi = xi_from_z(z1)
        return CriticalData(A, B, C, complex(disc), z1, z2, xi, xi, cls)
    r = math.sqrt(max(disc, 0.0))
    z1, z2 = complex((-B + r) / (2 * A)), complex((-B - r) / (2 * A))
    return CriticalData(A, B, C, complex(disc), z1, z2, xi_from_z(z1), xi_from_z(z2), cls)


def discriminant_direct(l) -> float:
    """B^2 - 4AC straight from the coefficients (for cross-checking against Gram)."""
    A, B, C = critical_quadratic(l)
    return B * B - 4 * A * C


# ---------------------------------------------------------------------------
# co-volume and volume


def covolume(l) -> float:
    l = edge_lengths(l)
    cp = critical_point(l)
    if cp.cls is not TetClass.HYPERIDEAL:
        raise ClassError(f"covolume needs a hyperideal tetrahedron, got {cp.cls.value}; use extended_covolume")
    U = kernel_U(alpha_from_lengths(l), cp.xi_star)
    if abs(U.real) > 1e-8 * (1.0 + abs(U.imag)):
        raise ModTVError(f"critical value is not purely imaginary: Re U = {U.real:.3e}")
    return -U.imag / 2


def covolume_at_critical(l) -> float:
    """-Im U(alpha, xi*)/2 at the (possibly boundary) critical point."""
    l = edge_lengths(l)
    cp = critical_point(l)
    return -kernel_U(alpha_from_lengths(l), cp.xi_star).imag / 2


def _mu_rate(p0, p1, s):
    p = p0 + s * (p1 - p0)
    return 0.5 * float(np.dot(extended_angles(p), p1 - p0))


def _segment_breaks(p0, p1):
    """Parameters in (0, 1) where the segment crosses det Gram = 0."""
    f = lambda s: gram(p0 + s * (p1 - p0)).det
    grid = np.linspace(0.0, 1.0, 33)
    vals = [f(s) for s in grid]
    out = []
    for s0, s1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if v0 == 0:
            out.append(s0)
        elif v0 * v1 < 0:
            out.append(optimize.brentq(f, s0, s1, xtol=1e-14))
    return [s for s in out if 0 < s < 1]


def _integrate_segment(p0, p1) -> float:
    if np.allclose(p0, p1):
        return 0.0
    knots = [0.0] + _segment_breaks(p0, p1) + [1.0]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(lambda s: _mu_rate(p0, p1, s), a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    return total


def extended_covolume(l, path=None) -> float:
    """Cov(0) + integral of (1/2) sum theta~_k dl_k from 0 to l.

    ``path`` optionally lists intermediate waypoints of a polyline from 0 to l.
    """
    l = edge_lengths(l)
    pts = [np.zeros(6)] + [edge_lengths(p) for p in (path or [])] + [l]
    total = COV_ZERO
    for p0, p1 in zip(pts[:-1], pts[1:]):
        total += _integrate_segment(p0, p1)
    return total


def volume(l) -> float:
    l = edge_lengths(l)
    th = dihedral_angles(l)
    return covolume(l) - 0.5 * float(np.dot(th, l))


# ---------------------------------------------------------------------------
# Hessian identity


def hessian_identity(l):
    """Return (-U''(xi*) / exp(kappa(xi*)/(pi i)), 16 sqrt(det Gram)) with the principal root.

    For a flat tetrahedron U'' vanishes at the double critical point; then
    (U''(xi*), U'''(xi*)) is returned instead.
    """
    l = edge_lengths(l)
    cp = critical_point(l)
    alpha = alpha_from_lengths(l)
    if cp.cls is TetClass.FLAT:
        return kernel_U_second(alpha, cp.xi_star), kernel_U_third(alpha, cp.xi_star)
    lhs = -kernel_U_second(alpha, cp.xi_star) / np.exp(kernel_kappa(alpha, cp.xi_star) / (PI * 1j))
    rhs = 16.0 * np.sqrt(complex(gram(l).det))
    return complex(lhs), complex(rhs)
