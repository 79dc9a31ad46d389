"""Command line interface.

Every command prints a JSON report (or CSV for scans) to stdout or --out.
Exit codes: 0 success, 1 usage or internal error, 2 invalid input,
3 accuracy or solver failure. Defaults can be set through MODTV_* environment
variables, e.g. MODTV_B=0.5.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import identities, poly, sixj, stateint, tetra
from .errors import ModTVError, ValidationError
from .specfun import BParam, QuadratureConfig, log_double_sine


@dataclass
class RunConfig:
    b: float = 0.5
    rel_tol: float = 1e-10
    threads: int = 1
    contour_re_frac: float | None = None
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.b < 1:
            raise ValidationError("--b must lie in (0, 1)")
        if not self.rel_tol > 0:
            raise ValidationError("--rel-tol must be positive")
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        if self.contour_re_frac is not None and not 0 < self.contour_re_frac < 1:
            raise ValidationError("--contour-re-frac must lie in (0, 1)")

    def bparam(self) -> BParam:
        return BParam(self.b)

    def contour(self, b: float | None = None) -> sixj.ContourSpec:
        if self.contour_re_frac is None:
            return sixj.ContourSpec()
        Q = BParam(self.b if b is None else b).Q
        return sixj.ContourSpec(re_u=1.5 * Q + self.contour_re_frac * 0.5 * Q)


def _floats(text: str, n: int | None = None, what: str = "values"):
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ValidationError(f"could not parse {what}: {text!r}") from None
    if n is not None and len(vals) != n:
        raise ValidationError(f"expected {n} {what}, got {len(vals)}")
    return vals


def _emit(cfg: RunConfig, payload):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=_jsonable)
    if cfg.out:
        Path(cfg.out).write_text(text + ("" if text.endswith("\n") else "\n"))
    else:
        click.echo(text)


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"cannot serialize {type(x)}")


def _csv(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _load_tri(path):
    p = Path(path)
    if not p.exists():
        # fall back to the bundled complexes by name
        try:
            return poly.bundled(p.stem)
        except ValidationError:
            raise ValidationError(f"no such triangulation file: {path}") from None
    return poly.Triangulation.load(p)


@click.group(context_settings={"auto_envvar_prefix": "MODTV", "help_option_names": ["-h", "--help"]})
@click.option("--b", "b", type=float, default=0.5, show_default=True, help="quantum parameter in (0, 1)")
@click.option("--rel-tol", type=float, default=1e-10, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True,
              help="worker processes for scans over b (results keep input order)")
@click.option("--contour-re-frac", type=float, default=None,
              help="6j contour real part as a fraction of (3Q/2, 2Q); default recentres automatically")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the report here")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def cli(ctx, b, rel_tol, threads, contour_re_frac, out, seed):
    """Numerics for b-6j symbols, hyperideal tetrahedra and state integrals."""
    ctx.obj = RunConfig(b, rel_tol, threads, contour_re_frac, out, seed)


# -- specfun ---------------------------------------------------------------


@cli.group("specfun")
def specfun_grp():
    """Double sine function."""


@specfun_grp.command("eval")
@click.option("--z", "z_text", required=True, help="complex argument, e.g. 1.2+0.5j")
@click.pass_obj
def specfun_eval(cfg: RunConfig, z_text):
    try:
        z = complex(z_text.replace(" ", ""))
    except ValueError:
        raise ValidationError(f"could not parse complex number {z_text!r}") from None
    bp = cfg.bparam()
    lg = complex(log_double_sine(z, bp, QuadratureConfig(rel_tol=min(cfg.rel_tol, 1e-10))))
    _emit(cfg, {"b": bp.b, "Q": bp.Q, "z": z, "log_Sb": lg, "Sb": complex(np.exp(lg))})


# -- tetra -----------------------------------------------------------------


@cli.group("tetra")
def tetra_grp():
    """Single tetrahedron geometry."""


def _tet_report(l):
    g = tetra.gram(l)
    cls = tetra.classify(l)
    rep = {"l": list(map(float, l)), "class": cls.value, "det_gram": g.det,
           "angles": tetra.extended_angles(l), "extended_covolume": tetra.extended_covolume(l)}
    if cls is tetra.TetClass.HYPERIDEAL:
        rep["covolume"] = tetra.covolume(l)
        rep["volume"] = tetra.volume(l)
    cp = tetra.critical_point(l)
    rep["xi_star"] = cp.xi_star
    if cp.xi_star2 is not None:
        rep["xi_star2"] = cp.xi_star2
    return rep


@tetra_grp.command("info")
@click.option("--l", "l_text", required=True, help="six edge lengths l1..l6, comma separated")
@click.pass_obj
def tetra_info(cfg: RunConfig, l_text):
    _emit(cfg, _tet_report(np.array(_floats(l_text, 6, "edge lengths"))))


@tetra_grp.command("regular")
@click.option("--theta", type=float, required=True, help="common dihedral angle in (0, pi/3)")
@click.pass_obj
def tetra_regular(cfg: RunConfig, theta):
    if not 0 < theta < math.pi / 3:
        raise ValidationError("a regular hyperideal tetrahedron needs 0 < theta < pi/3")
    c = math.cos(theta) / (2 * math.cos(theta) - 1)
    l = math.acosh(c)
    rep = _tet_report(np.full(6, l))
    rep["cosh_l"] = c
    _emit(cfg, rep)


# -- sixj ------------------------------------------------------------------


@cli.group("sixj")
def sixj_grp():
    """b-6j symbols."""


def _sixj_report(l, b, cfg):
    cs = sixj.ColorSet.from_lengths(l, b)
    r = sixj.sixj_eval(cs, cfg.contour(b), rel_tol=cfg.rel_tol)
    pred, cls = sixj.sixj_asymptotic(cs)
    return {"b": b, "l": list(map(float, l)), "value": r.value, "log_mag": r.log_mag, "phase": r.phase,
            "quad_error_est": r.quad_error_est, "class": cls.value, "prediction_log_mag": pred}


@sixj_grp.command("eval")
@click.option("--l", "l_text", required=True, help="six edge lengths")
@click.pass_obj
def sixj_eval_cmd(cfg: RunConfig, l_text):
    _emit(cfg, _sixj_report(_floats(l_text, 6, "edge lengths"), cfg.b, cfg))


@sixj_grp.command("asymp")
@click.option("--l", "l_text", required=True, help="six edge lengths")
@click.pass_obj
def sixj_asymp_cmd(cfg: RunConfig, l_text):
    l = _floats(l_text, 6, "edge lengths")
    pred, cls = sixj.sixj_asymptotic(sixj.ColorSet.from_lengths(l, cfg.b))
    _emit(cfg, {"b": cfg.b, "l": l, "class": cls.value, "prediction_log_mag": pred})


@sixj_grp.command("scan")
@click.option("--l", "l_text", required=True, help="six edge lengths")
@click.option("--b", "b_text", required=True, help="comma separated values of b")
@click.pass_obj
def sixj_scan_cmd(cfg: RunConfig, l_text, b_text):
    l = _floats(l_text, 6, "edge lengths")
    rows = [_sixj_report(l, b, cfg) for b in _floats(b_text, None, "b values")]
    cols = ["b", "log_mag", "phase", "quad_error_est", "prediction_log_mag"]
    _emit(cfg, _csv(rows, cols))


# -- manifold --------------------------------------------------------------


@cli.group("manifold")
def manifold_grp():
    """Triangulated manifolds with totally geodesic boundary."""


def _solve(path, init, tol):
    tri = _load_tri(path)
    return tri, poly.solve_metric(tri, init, tol)


@manifold_grp.command("solve")
@click.option("--file", "path", required=True, help="triangulation JSON (or a bundled name: min2tet)")
@click.option("--init", type=float, default=1.0, show_default=True)
@click.option("--tol", type=float, default=1e-11, show_default=True)
@click.pass_obj
def manifold_solve(cfg: RunConfig, path, init, tol):
    tri, sr = _solve(path, init, tol)
    _emit(cfg, {"name": tri.name, "l_star": sr.l_star, "cosh_l_star": np.cosh(sr.l_star),
                "residual": sr.residual, "volume": sr.volume, "chi": sr.euler_char,
                "torsion_abs": sr.torsion_abs, "iterations": sr.iterations})


@manifold_grp.command("torsion")
@click.option("--file", "path", required=True)
@click.pass_obj
def manifold_torsion(cfg: RunConfig, path):
    tri, sr = _solve(path, 1.0, 1e-11)
    hess = poly.torsion_hessian_route(tri, sr.l_star)
    _emit(cfg, {"name": tri.name, "torsion_angle_route": sr.torsion_abs, "torsion_hessian_route": hess,
                "relative_difference": abs(sr.torsion_abs - hess) / sr.torsion_abs})


# -- tv --------------------------------------------------------------------


@cli.group("tv")
def tv_grp():
    """State integrals."""


@tv_grp.command("eval")
@click.option("--file", "path", required=True)
@click.option("--window", type=float, default=4.0, show_default=True)
@click.option("--grid", type=int, default=32, show_default=True)
@click.pass_obj
def tv_eval_cmd(cfg: RunConfig, path, window, grid):
    tri, sr = _solve(path, 1.0, 1e-11)
    sc = stateint.StateIntegralConfig(cfg.bparam(), window, grid, cfg.contour())
    r = stateint.tv_eval(tri, sc, sr.l_star)
    pred = stateint.predicted_log_mag(sr.volume, sr.euler_char, sr.torsion_abs, cfg.b)
    _emit(cfg, {"b": cfg.b, "log_mag": r.log_mag, "phase": r.phase, "est_error": r.est_error,
                "prediction_log_mag": pred})


@tv_grp.command("scan")
@click.option("--file", "path", required=True)
@click.option("--b", "b_text", default="0.30,0.25,0.20,0.15", show_default=True,
              help="comma separated values of b")
@click.option("--window", type=float, default=4.0, show_default=True)
@click.option("--grid", type=int, default=32, show_default=True)
@click.option("--summary", type=click.Path(dir_okay=False), default=None, help="write the fit as JSON here")
@click.pass_obj
def tv_scan_cmd(cfg: RunConfig, path, b_text, window, grid, summary):
    tri = _load_tri(path)
    fit = stateint.tv_scan(tri, _floats(b_text, None, "b values"), window, grid, workers=cfg.threads)
    vol, chi, tor = stateint.tv_prediction(tri)
    info = {"V_fit": fit.V_fit, "oneloop_fit": fit.oneloop_fit, "c1": fit.c1, "residuals": fit.residuals,
            "volume": vol, "chi": chi, "torsion_abs": tor,
            "oneloop_pred": 0.5 * chi * math.log(2) - 0.5 * math.log(tor)}
    _emit(cfg, _csv(fit.rows, ["b", "log_mag", "phase", "est_error", "prediction_log_mag"]))
    text = json.dumps(info, indent=2, default=_jsonable)
    if summary:
        Path(summary).write_text(text + "\n")
    else:
        click.echo(text, err=True)


# -- identities ------------------------------------------------------------


@cli.group("identities")
def identities_grp():
    """Pentagon and 4-4 identities."""


def _random_colors(cfg, n, lo, hi):
    return np.random.default_rng(cfg.seed).uniform(lo, hi, n)


@identities_grp.command("pentagon")
@click.option("--l", "l_text", default=None, help="ten lengths a1..a10 (a8 ignored); random if omitted")
@click.option("--nodes", type=int, default=16, show_default=True)
@click.pass_obj
def identities_pentagon(cfg: RunConfig, l_text, nodes):
    l = _floats(l_text, 10, "colors") if l_text else _random_colors(cfg, 10, 0.3, 1.2)
    ic = identities.IdentityConfig(cfg.bparam(), spectral_nodes=nodes, sixj_contour=cfg.contour())
    lhs, rhs, rel, tail = identities.pentagon_residual(l, ic)
    _emit(cfg, {"b": cfg.b, "colors": l, "lhs": lhs, "rhs": rhs, "rel_residual": rel, "tail_estimate": tail})


@identities_grp.command("move44")
@click.option("--l", "l_text", default=None, help="twelve lengths a1..a12; random if omitted")
@click.option("--nodes", type=int, default=16, show_default=True)
@click.pass_obj
def identities_move44(cfg: RunConfig, l_text, nodes):
    l = _floats(l_text, 12, "colors") if l_text else _random_colors(cfg, 12, 0.3, 1.0)
    ic = identities.IdentityConfig(cfg.bparam(), spectral_nodes=nodes, sixj_contour=cfg.contour())
    lhs, rhs, rel, tail = identities.move44_residual(l, ic)
    _emit(cfg, {"b": cfg.b, "colors": l, "lhs": lhs, "rhs": rhs, "rel_residual": rel, "tail_estimate": tail})


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="modtv", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ModTVError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
