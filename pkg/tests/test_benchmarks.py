import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from oracles import (BLOCK, LAME, block_residuals, complex_step_fields,
                     constant_stress_residuals, lame_residuals)

from contact_pinn.benchmarks import (build_case, contact_pressure_profile, default_config,
                                     detected_half_width, hertz_contact_metrics,
                                     hertz_half_width, hertz_pressure, lame_analytical,
                                     lame_fields, merge_config, oracle_data, polar_transform,
                                     relative_l2_arc, relative_l2_integral, relative_l2_vector,
                                     resolve_config, sample_model_data)
from contact_pinn.elasticity import MaterialParams, pde_residuals
from contact_pinn.geometry import polar_mesh, rect_mesh
from contact_pinn.network import Architecture, NetworkParams


def test_lame_oracle_values():
    s_rr, s_aa, s_ra, _ = lame_analytical(np.array([1.0, 2.0]), 1, 2, 1, 2000, 0.3)
    assert s_rr[0] == pytest.approx(-1) and s_rr[1] == pytest.approx(0, abs=1e-15)
    assert s_aa[0] == pytest.approx(5 / 3)
    with pytest.raises(ValueError):
        lame_analytical(0.5, 1, 2, 1, 2000, 0.3)


def test_oracles_zero_all_residuals():
    assert lame_residuals() <= 1e-10
    assert block_residuals() <= 1e-10
    assert constant_stress_residuals() <= 1e-10


def test_printed_lame_displacement_fails_the_oracle():
    # the printed radial displacement (1 + r/R_o^2 form) is not a solution
    c = LAME
    k = c["R_i"] ** 2 * c["p"] / (c["R_o"] ** 2 - c["R_i"] ** 2)

    def printed(xy):
        r = np.sqrt(xy[:, 0] ** 2 + xy[:, 1] ** 2)
        F = lame_fields(xy, **c)
        u_r = k * (1 + c["nu"]) * ((1 - 2 * c["nu"]) * r + (1 + r / c["R_o"] ** 2)) / c["E"]
        F[:, 0], F[:, 1] = u_r * xy[:, 0] / r, u_r * xy[:, 1] / r
        return F

    xy = np.array([[1.2, 0.4], [0.3, 1.7]])
    res = pde_residuals(complex_step_fields(printed, xy), MaterialParams(c["E"], c["nu"]))
    assert np.abs(res).max() > 1e-6


def test_block_oracle_hooke_example():
    F = oracle_data("block", {"material": {"E": BLOCK["E"], "nu": BLOCK["nu"]},
                              "load": {"p": BLOCK["p"]}}, np.array([[0.5, 0.0], [0.3, 0.7]]))
    assert F.values[0, 1] == 0 and np.all(F.values[:, 4] == 0)
    eyy = F.values[1, 1] / 0.7
    assert eyy == pytest.approx(-0.0670, abs=1e-5)


def test_hertz_oracle_values():
    b = hertz_half_width(1, 0.5, 200, 0.3)
    assert b == pytest.approx(0.0761, abs=1e-4)
    assert hertz_pressure(0.0, 1, 0.5, 200, 0.3) == pytest.approx(4 * 0.5 / (math.pi * b))
    assert hertz_pressure(0.0, 1, 0.5, 200, 0.3) == pytest.approx(8.364, abs=1e-3)
    assert hertz_pressure([b, -b, 0.2], 1, 0.5, 200, 0.3).tolist() == [0, 0, 0]
    f = lambda x: float(hertz_pressure(x, 1, 0.5, 200, 0.3))
    # the resultant over the full contact is 2 R p; over the modelled half it is R p
    full, _ = quad(f, -b, b, epsabs=1e-12, limit=200)
    half, _ = quad(f, -b, 0, epsabs=1e-12, limit=200)
    assert full == pytest.approx(1.0, abs=1e-6) and half == pytest.approx(0.5, abs=1e-6)


def test_exact_profile_integrates_to_half_load():
    b = hertz_half_width(1, 0.5, 200, 0.3)
    th = np.linspace(-0.5 * math.pi - math.asin(b), -0.5 * math.pi, 400)
    arc = np.stack([np.cos(th), np.sin(th)], axis=1)
    s = th - th[0]
    assert trapezoid(hertz_pressure(arc[:, 0], 1, 0.5, 200, 0.3), s) == pytest.approx(0.5, abs=1e-3)


def test_vector_metric_examples():
    ref = np.random.default_rng(0).standard_normal((20, 3))
    assert relative_l2_vector(ref, ref) == 0
    assert relative_l2_vector(1.01 * ref, ref) == pytest.approx(0.01)
    assert relative_l2_vector([[3.0]], [[4.0]]) == pytest.approx(0.25)
    assert relative_l2_vector(ref + 1, ref) != relative_l2_vector(ref, ref)
    with pytest.raises(ValueError, match="zero reference"):
        relative_l2_vector(ref, np.zeros_like(ref))


def test_integral_metric_examples():
    mesh = polar_mesh(1, 2, 0, math.pi / 2, 48, 148)
    ref = lame_fields(mesh.nodes, **LAME)[:, :2]
    assert relative_l2_integral(ref, ref, mesh) == 0
    assert relative_l2_integral(1.5 * ref, ref, mesh) == pytest.approx(0.5)
    pert = ref * (1 + 0.01 * np.sin(3 * mesh.nodes[:, :1]))
    v, i = relative_l2_vector(pert, ref), relative_l2_integral(pert, ref, mesh)
    assert abs(v - i) / i <= 0.2
    sq = rect_mesh(0, 1, 0, 1, 5, 5)
    degenerate = type(sq)(sq.nodes, sq.cells[:, [0, 0, 0, 0]])
    with pytest.raises(ValueError, match="degenerate"):
        relative_l2_integral(np.ones(25), np.ones(25), degenerate)
    s = np.linspace(0, 1, 11)
    assert relative_l2_arc(2 * s + 0 * s, s, s) == pytest.approx(1.0)


def test_polar_transform_examples():
    _, s_rr, _, _ = polar_transform([1.0, 2.0], [3.0, 4.0, 5.0], 2.0, 0.0)
    assert s_rr == 3.0
    u_r, s_rr, s_aa, s_ra = polar_transform([1.0, 1.0], [0.0, 0.0, 1.0], 1.0, 1.0)
    assert (s_rr, s_aa) == pytest.approx((1, -1)) and s_ra == pytest.approx(0, abs=1e-15)
    assert u_r == pytest.approx(math.sqrt(2))
    th = np.linspace(0, 2 * math.pi, 17)
    _, s_rr, s_aa, s_ra = polar_transform(np.zeros((17, 2)), np.tile([2.5, 2.5, 0.0], (17, 1)),
                                          np.cos(th), np.sin(th))
    assert np.allclose(s_rr, 2.5) and np.allclose(s_aa, 2.5) and np.allclose(s_ra, 0, atol=1e-15)
    with pytest.raises(ValueError, match="origin"):
        polar_transform([0, 0], [0, 0, 0], 0.0, 0.0)


def test_zero_model_profile_is_zero():
    cfg = default_config("hertz")
    setup = build_case(merge_config(cfg, {"points": {"interior": 200, "boundary": 40,
                                                     "contact": 10, "refine": []}}))
    params = NetworkParams(setup.arch)
    # the transform keeps syy = -p at the top, but a zero network has zero stress elsewhere
    # except the offset, which vanishes only at y = 0; along the contact arc syy = -p
    prof = contact_pressure_profile(params, setup.transform, np.array([[-0.1, -0.995],
                                                                      [0.0, -1.0]]))
    assert prof.pc[-1] == pytest.approx(0.5)
    flat = NetworkParams(setup.arch)
    flat.flat[:] = 0
    t = setup.transform
    t0 = type(t)(t.components, 0.0, t.name)
    prof = contact_pressure_profile(flat, t0, np.array([[-0.1, -0.995], [0.0, -1.0]]))
    assert np.all(prof.pc == 0) and prof.integral == 0
    assert detected_half_width(prof) == 0.0


def test_config_defaults_and_validation():
    d = default_config("hertz", "surrogate")
    assert d["network"]["hidden_layers"] == [37] * 8 and d["surrogate"]["chunks"] == 5
    assert default_config("hertz", preset="full")["network"]["hidden_layers"] == [50] * 5
    assert default_config("lame")["schedule"]["lbfgs"]["max_iter"] == 3000
    assert resolve_config({"case": "block", "seed": 3})["seed"] == 3
    with pytest.raises(ValueError):
        default_config("plate")
    with pytest.raises(ValueError):
        default_config("block", "inverse")
    with pytest.raises(ValueError, match="data"):
        build_case(default_config("block", "data_enhanced"))
    bad = merge_config(default_config("hertz", "surrogate"), {"surrogate": {"chunks": 0}})
    with pytest.raises(ValueError, match="chunk"):
        build_case(bad)


def test_surrogate_build_and_model_data():
    cfg = merge_config(default_config("hertz", "surrogate"),
                       {"points": {"interior": 100, "boundary": 40, "contact": 10,
                                   "refine": []}, "surrogate": {"chunks": 2}})
    setup = build_case(cfg)
    assert setup.arch.input_width == 3
    x = setup.problem.x
    assert x.shape[1] == 3 and np.all((x[:, 2] >= 0.2) & (x[:, 2] <= 1.0))
    fwd = build_case(merge_config(default_config("hertz"), {"points": cfg["points"]}))
    params = fwd.init_params()
    data = sample_model_data(params, fwd.transform, fwd.points, 30, 20, seed=1)
    assert data.xy.shape == (50, 2) and data.mask.all()
    again = sample_model_data(params, fwd.transform, fwd.points, 30, 20, seed=1)
    assert np.array_equal(data.values, again.values)
    m = hertz_contact_metrics(params, fwd.transform, fwd.config, 0.5)
    assert m["integral_reference"] == 0.5 and m["half_width_reference"] == pytest.approx(0.0761,
                                                                                          abs=1e-4)


def test_architecture_from_config():
    setup = build_case(default_config("lame"))
    assert setup.arch == Architecture(2, (25, 25, 25))
