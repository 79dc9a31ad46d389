import itertools
import math

import numpy as np
import pytest

from modtv import sixj, tetra
from modtv.errors import AccuracyError, ContourError, DomainError
from modtv.sixj import ColorSet, ContourSpec
from modtv.specfun import PI, BParam

L_A = (0.8, 0.7, 0.6, 0.9, 0.5, 0.75)


def edge_permutations():
    verts = tetra._EDGE_VERTS
    pos = {frozenset(e): k for k, e in enumerate(verts)}
    for p in itertools.permutations(range(4)):
        yield [pos[frozenset((p[i], p[j]))] for i, j in verts]


def random_hyperideal(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        l = rng.uniform(0.3, 1.2, 6)
        if tetra.classify(l) is tetra.TetClass.HYPERIDEAL:
            out.append(l)
    return out


def test_colorset_rejects_zero_length():
    with pytest.raises(DomainError):
        ColorSet.from_lengths([0.5, 0.5, 0.0, 0.5, 0.5, 0.5], 0.5)


def test_reduced_vars():
    cs = ColorSet.from_lengths([0.5] * 6, 0.5)
    Q, b = cs.bp.Q, cs.bp.b
    t, q, tau, eta = sixj.reduced_vars(cs)
    assert np.allclose(t.real, 1.5 * Q) and np.allclose(q.real, 2 * Q)
    assert eta[3] == 2 * PI
    assert np.allclose(tau, PI * b * t - 1.5 * PI * b * b)
    assert np.allclose(eta[:3], PI * b * q[:3] - 2 * PI * b * b)


def test_reduced_vars_match_alpha_sums():
    cs = ColorSet.from_lengths(L_A, 0.4)
    _, _, tau, eta = sixj.reduced_vars(cs)
    tau0, eta0 = tetra._tau_eta(cs.alpha)
    assert np.allclose(tau, tau0, atol=1e-13) and np.allclose(eta, eta0, atol=1e-13)


def test_prefactor_has_unit_modulus():
    cs = ColorSet.from_lengths(L_A, 0.6)
    t, q, _, _ = sixj.reduced_vars(cs)
    from modtv.specfun import DEFAULT_CFG
    assert abs(sixj._prefactor_log(t, q, cs.bp, DEFAULT_CFG).real) < 1e-10


def test_u_alpha_b_second_order_remainder():
    l = [0.6] * 6
    alpha = tetra.alpha_from_lengths(l)
    xi = tetra.critical_point(l).xi_star + 0.02
    c = []
    for b in (0.3, 0.2, 0.1):
        cs = ColorSet.from_lengths(l, b)
        r = sixj.u_alpha_b(cs, xi) - tetra.kernel_kappa(alpha, xi) * b * b - tetra.kernel_U(alpha, xi)
        c.append(abs(r) / b ** 4)
    assert max(c) / min(c) < 2


def test_u_alpha_b_finite_on_midline():
    for l in random_hyperideal(3, seed=1):
        cs = ColorSet.from_lengths(l, 0.5)
        assert np.isfinite(sixj.u_alpha_b(cs, 7 * cs.bp.Q * PI * cs.bp.b / 4))


def test_contour_independence():
    cs = ColorSet.from_lengths(L_A, 0.6)
    Q = cs.bp.Q
    res = [sixj.sixj_eval(cs, ContourSpec(re_u=f * Q)) for f in (1.6, 1.75, 1.9)]
    for r in res[1:]:
        tol = (r.quad_error_est + res[0].quad_error_est) * abs(r.value) + 1e-12 * abs(r.value)
        assert abs(r.value - res[0].value) <= 10 * tol


def test_symmetries():
    l = np.array(L_A)
    ref = sixj.sixj_eval(ColorSet.from_lengths(l, 0.6)).value
    for p in edge_permutations():
        v = sixj.sixj_eval(ColorSet.from_lengths(l[p], 0.6)).value
        assert abs(v - ref) <= 1e-8 * abs(ref)


def test_trapezoid_oracle():
    # brute-force fixed-step trapezoid on the same line at far higher density
    cs = ColorSet.from_lengths([0.6] * 6, 0.5)
    r = sixj.sixj_eval(cs)
    from modtv.specfun import DEFAULT_CFG
    bp = cs.bp
    t, q, _, _ = sixj.reduced_vars(cs)
    re_u = sixj.default_re_u(cs)
    y = np.arange(-40.0, 40.0, 0.005)
    lg = sixj._integrand_log(re_u + 1j * y, t, q, bp, DEFAULT_CFG) + sixj._prefactor_log(t, q, bp, DEFAULT_CFG)
    val = np.sum(np.exp(lg)) * 0.005
    assert abs(val - r.value) <= 1e-6 * abs(r.value)


def test_realness_random():
    for l in random_hyperideal(5, seed=2):
        r = sixj.sixj_eval(ColorSet.from_lengths(l, 0.55))
        assert abs(r.value.imag) <= 1e-8 * abs(r.value)
        assert abs(r.value - math.exp(r.log_mag) * complex(math.cos(r.phase), math.sin(r.phase))) < 1e-12 * abs(r.value)


def test_positive_and_approaching_covolume_rate():
    for l in random_hyperideal(5, seed=3):
        cov = tetra.covolume(l)
        gaps = []
        for b in (0.3, 0.2, 0.15):
            r = sixj.sixj_eval(ColorSet.from_lengths(l, b))
            assert r.value.real > 0
            gaps.append(abs(PI * b * b * r.log_mag + cov) / (b * b * math.log(1 / b)))
        assert gaps[0] > 0 and max(gaps) < 10


def test_leading_constant_tends_to_one_half():
    # the measured ratio to exp(-Cov/(pi b^2)) (-det)^(-1/4) tends to 1/2 with an O(b^2) gap
    l = [0.6] * 6
    gaps = []
    for b in (0.3, 0.2, 0.15):
        cs = ColorSet.from_lengths(l, b)
        pred, _ = sixj.sixj_asymptotic(cs)
        ratio = math.exp(sixj.sixj_eval(cs).log_mag - pred)
        gaps.append((ratio - 0.5) / b ** 2)
    assert max(gaps) / min(gaps) < 1.5


def test_asymptotic_classes():
    cs = ColorSet.from_lengths([2.5, 0.1, 0.1, 2.5, 0.1, 0.1], 0.3)
    pred, cls = sixj.sixj_asymptotic(cs)
    assert cls is tetra.TetClass.DEGENERATE
    assert abs(pred + tetra.extended_covolume(cs.lengths) / (PI * 0.09)) < 1e-9


def test_contour_errors():
    cs = ColorSet.from_lengths(L_A, 0.6)
    Q = cs.bp.Q
    with pytest.raises(ContourError):
        sixj.sixj_eval(cs, ContourSpec(re_u=1.4 * Q))
    with pytest.raises(ContourError):
        sixj.sixj_eval(cs, ContourSpec(re_u=2 * Q - 1e-4))


def test_short_truncation_reports_tail():
    cs = ColorSet.from_lengths(L_A, 0.6)
    with pytest.raises(AccuracyError):
        sixj.sixj_eval(cs, ContourSpec(im_max=0.5))


def test_fixed_nodes_agree_with_adaptive():
    cs = ColorSet.from_lengths(L_A, 0.6)
    a = sixj.sixj_eval(cs)
    f = sixj.sixj_eval(cs, ContourSpec(nodes_per_unit=60))
    assert abs(a.value - f.value) <= 1e-9 * abs(a.value)
