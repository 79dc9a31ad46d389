"""Ideal triangulations with polyhedral metrics: curvature, co-volume, the
metric solve, torsion, and angle-structure feasibility."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from . import tetra
from .errors import ClassError, RankError, SolverError, ValidationError
from .specfun import PI

# local edges meeting at each vertex of a tetrahedron (l12,l13,l23,l34,l24,l14 order)
VERTEX_TRIPLES = ((0, 1, 5), (0, 2, 4), (1, 2, 3), (3, 4, 5))

# cosh overflows the Gram determinant well before this; longer edges mean divergence
_L_MAX = 40.0


@dataclass(frozen=True)
class Triangulation:
    edge_count: int
    tets: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tets", tuple(tuple(int(e) for e in t) for t in self.tets))
        object.__setattr__(self, "edge_count", int(self.edge_count))

    @property
    def euler_char(self) -> int:
        return len(self.tets) - self.edge_count

    @classmethod
    def from_dict(cls, data: dict, allow_unknown: bool = False):
        known = {"name", "edge_count", "tets"}
        extra = set(data) - known
        if extra and not allow_unknown:
            raise ValidationError(f"unknown fields in triangulation: {sorted(extra)}")
        missing = {"edge_count", "tets"} - set(data)
        if missing:
            raise ValidationError(f"missing fields in triangulation: {sorted(missing)}")
        tri = cls(data["edge_count"], data["tets"], data.get("name", ""))
        validate(tri)
        return tri

    @classmethod
    def load(cls, path, allow_unknown: bool = False):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), allow_unknown)

    def to_dict(self) -> dict:
        return {"name": self.name, "edge_count": self.edge_count, "tets": [list(t) for t in self.tets]}


@dataclass(frozen=True)
class SolveResult:
    l_star: np.ndarray
    residual: float
    volume: float
    angle_jacobian: np.ndarray
    torsion_abs: float
    euler_char: int
    iterations: int = 0
    trace: list = field(default_factory=list, repr=False)


def validate(tri: Triangulation) -> np.ndarray:
    """Check the triangulation and return the number of corners on each edge."""
    if tri.edge_count <= 0:
        raise ValidationError("edge_count must be positive")
    if not tri.tets:
        raise ValidationError("triangulation has no tetrahedra")
    valence = np.zeros(tri.edge_count, dtype=int)
    for n, t in enumerate(tri.tets):
        if len(t) != 6:
            raise ValidationError(f"tetrahedron {n} lists {len(t)} edges, expected 6")
        for e in t:
            if not 0 <= e < tri.edge_count:
                raise ValidationError(f"tetrahedron {n} references edge {e} outside 0..{tri.edge_count - 1}")
            valence[e] += 1
    unused = np.flatnonzero(valence == 0)
    if unused.size:
        raise ValidationError(f"edges {unused.tolist()} have no corners")
    return valence


def _metric(tri: Triangulation, l) -> np.ndarray:
    l = np.asarray(l, dtype=float).reshape(-1)
    if l.size == 1:
        l = np.full(tri.edge_count, float(l[0]))
    if l.shape != (tri.edge_count,):
        raise ValidationError(f"metric has {l.size} entries for {tri.edge_count} edges")
    if np.any(l <= 0) or not np.all(np.isfinite(l)):
        raise ValidationError("edge lengths must be positive and finite")
    return l


def tet_lengths(tri: Triangulation, l):
    l = _metric(tri, l)
    return [l[list(t)] for t in tri.tets]


def cone_angles(tri: Triangulation, l) -> np.ndarray:
    theta = np.zeros(tri.edge_count)
    for t, lt in zip(tri.tets, tet_lengths(tri, l)):
        np.add.at(theta, list(t), tetra.extended_angles(lt))
    return theta


def curvature(tri: Triangulation, l) -> np.ndarray:
    return 2 * PI - cone_angles(tri, l)


def manifold_covolume(tri: Triangulation, l) -> float:
    l = _metric(tri, l)
    return sum(tetra.extended_covolume(lt) for lt in tet_lengths(tri, l)) - PI * float(l.sum())


def _tet_angle_jacobian(lt, rel_step=1e-6):
    J = np.empty((6, 6))
    for m in range(6):
        h = rel_step * (1.0 + lt[m])
        e = np.zeros(6)
        e[m] = h
        J[:, m] = (tetra.dihedral_angles(lt + e) - tetra.dihedral_angles(lt - e)) / (2 * h)
    return J


def angle_jacobian(tri: Triangulation, l, rel_step: float = 1e-6) -> np.ndarray:
    """d(cone angle_e)/d(l_e') by central differences of the per-tet dihedral angles."""
    E = tri.edge_count
    J = np.zeros((E, E))
    for t, lt in zip(tri.tets, tet_lengths(tri, l)):
        if tetra.classify(lt) is not tetra.TetClass.HYPERIDEAL:
            raise ClassError("angle Jacobian needs every tetrahedron hyperideal")
        Jt = _tet_angle_jacobian(lt, rel_step)
        idx = np.asarray(t)
        np.add.at(J, (idx[:, None], idx[None, :]), Jt)
    return J


def _all_hyperideal(tri, l):
    return all(tetra.classify(lt) is tetra.TetClass.HYPERIDEAL for lt in tet_lengths(tri, l))


def solve_metric(tri: Triangulation, init=1.0, tol: float = 1e-11, max_iter: int = 100) -> SolveResult:
    """Damped Newton on K(l) = 0, keeping every tetrahedron hyperideal."""
    validate(tri)
    l = _metric(tri, init).copy()
    # flat or degenerate tetrahedra in the initial metric: shrink toward l = 0,
    # which is hyperideal, until every tetrahedron is strictly hyperideal
    for _ in range(60):
        if _all_hyperideal(tri, l):
            break
        l *= 0.8
    else:
        raise SolverError("could not find a hyperideal starting metric")
    trace = []
    K = curvature(tri, l)
    for it in range(max_iter):
        res = float(np.max(np.abs(K)))
        trace.append((it, res))
        if res <= tol:
            break
        J = angle_jacobian(tri, l)
        try:
            step = np.linalg.solve(J, K)  # dK/dl = -J, so the Newton step is J^{-1} K
        except np.linalg.LinAlgError as exc:
            raise RankError(f"singular angle Jacobian at iteration {it}") from exc
        f0 = float(K @ K)
        lam = 1.0
        while True:
            trial = np.maximum(l + lam * step, 0.1 * l)
            if np.max(trial) <= _L_MAX and _all_hyperideal(tri, trial):
                Kt = curvature(tri, trial)
                if float(Kt @ Kt) <= (1 - 1e-4 * lam) * f0 or lam < 1e-12:
                    break
            lam *= 0.5
            if lam < 1e-12:
                raise SolverError(f"line search failed at iteration {it} (no hyperideal descent step "
                                  f"with lengths below {_L_MAX}); trace={trace}")
        l, K = trial, Kt
    else:
        raise SolverError(f"Newton did not converge in {max_iter} iterations; trace={trace}")
    J = angle_jacobian(tri, l)
    res = float(np.max(np.abs(K)))
    sr = SolveResult(l, res, manifold_covolume(tri, l), J, 0.0, tri.euler_char, len(trace), trace)
    return SolveResult(l, res, sr.volume, J, torsion(tri, sr), tri.euler_char, len(trace), trace)


def torsion(tri: Triangulation, sr: SolveResult) -> float:
    """|Tor| of the double from the angle Jacobian and Gram determinants."""
    l = sr.l_star
    E, T = tri.edge_count, len(tri.tets)
    sign, logdet = np.linalg.slogdet(sr.angle_jacobian)
    if sign == 0:
        raise RankError("angle Jacobian is singular")
    log_t = (3 * T - E) * math.log(2) + logdet
    for lt in tet_lengths(tri, l):
        log_t += 0.5 * math.log(abs(tetra.gram(lt).det))
    log_t -= float(np.sum(np.log(4 * np.sinh(l) ** 2)))
    return math.exp(log_t)


def potential_hessian(tri: Triangulation, l):
    """Hessian of the manifold potential in (alpha_e, xi_Delta) at the critical point over l."""
    l = _metric(tri, l)
    E, T = tri.edge_count, len(tri.tets)
    H = np.zeros((E + T, E + T), dtype=complex)
    kappa = 0j
    for n, (t, lt) in enumerate(zip(tri.tets, tet_lengths(tri, l))):
        alpha = tetra.alpha_from_lengths(lt)
        xi = tetra.critical_point(lt).xi_star
        h = tetra.kernel_U_hessian(alpha, xi)
        idx = np.asarray(t)
        np.add.at(H, (idx[:, None], idx[None, :]), h[:6, :6])
        np.add.at(H, (idx, E + n), h[:6, 6])
        np.add.at(H, (E + n, idx), h[6, :6])
        H[E + n, E + n] += h[6, 6]
        kappa += tetra.kernel_kappa(alpha, xi)
    return H, kappa


def torsion_hessian_route(tri: Triangulation, l) -> float:
    """|det(-Hess W)| / |exp(kappa/(pi i)) prod sinh^2 l_e| / 2^{5E+T}."""
    l = _metric(tri, l)
    E, T = tri.edge_count, len(tri.tets)
    H, kappa = potential_hessian(tri, l)
    sign, logdet = np.linalg.slogdet(-H)
    if sign == 0:
        raise RankError("potential Hessian is singular")
    log_t = logdet.real - (kappa / (PI * 1j)).real - float(np.sum(np.log(np.sinh(l) ** 2)))
    log_t -= (5 * E + T) * math.log(2)
    return math.exp(log_t)


def angle_structure_feasible(tri: Triangulation):
    """Maximize the margin s of a strict angle structure; feasible when s > 0.

    Returns (feasible, corner angles shaped (|T|, 6)).
    """
    validate(tri)
    T = len(tri.tets)
    n = 6 * T
    # variables: corners x (n) then margin s
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub, b_ub = [], []
    for d in range(T):
        for v in VERTEX_TRIPLES:
            row = np.zeros(n + 1)
            row[[6 * d + k for k in v]] = 1.0
            row[-1] = 1.0
            A_ub.append(row)
            b_ub.append(PI)
    for i in range(n):
        lo = np.zeros(n + 1)
        lo[i] = -1.0
        lo[-1] = 1.0
        A_ub.append(lo)
        b_ub.append(0.0)
        hi = np.zeros(n + 1)
        hi[i] = 1.0
        hi[-1] = 1.0
        A_ub.append(hi)
        b_ub.append(PI)
    A_eq = np.zeros((tri.edge_count, n + 1))
    for d, t in enumerate(tri.tets):
        for k, e in enumerate(t):
            A_eq[e, 6 * d + k] += 1.0
    b_eq = np.full(tri.edge_count, 2 * PI)
    bounds = [(0, PI)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0 or res.x[-1] <= 1e-9:
        return False, None
    return True, res.x[:n].reshape(T, 6)


def bundled(name: str) -> Triangulation:
    """Load a triangulation shipped with the package (min2tet, single_tet)."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.exists():
        raise ValidationError(f"no bundled triangulation named {name!r}")
    return Triangulation.load(path)
