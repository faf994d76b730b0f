import numpy as np
import pytest

from fdcheck import worst_relative_error

from contact_pinn.benchmarks import (block_transform, build_case, default_config, merge_config,
                                     oracle_data, sample_model_data)
from contact_pinn.contact import KKTMethod, kkt_loss
from contact_pinn.elasticity import LossWeights, MaterialParams
from contact_pinn.geometry import sample_unit_square
from contact_pinn.network import Architecture, EvaluationError, NetworkParams, init_glorot_uniform
from contact_pinn.problem import ContactProblem, DirichletBC, NeumannBC

SMALL_HERTZ = {"points": {"interior": 120, "boundary": 40, "contact": 12, "refine": []},
               "network": {"hidden_layers": [6, 6]}}
SMALL = {"network": {"hidden_layers": [6, 6]}}


def _perturbed(setup, seed=0):
    p = setup.init_params()
    rng = np.random.default_rng(seed)
    n = p.arch.n_network
    p.flat[:n] += 0.2 * rng.standard_normal(n)
    return p


def _check_gradient(setup, params, n_check=32, tol=1e-5):
    prob = setup.problem
    _, g = prob.loss_and_grad(params)

    def value(flat):
        return prob.loss_and_grad(params.with_flat(flat))[0]

    rng = np.random.default_rng(1)
    idx = rng.choice(params.flat.size, min(n_check, params.flat.size), replace=False)
    idx = sorted(set(idx) | set(range(params.arch.n_network, params.flat.size)))
    return worst_relative_error(value, params.flat, g, idx) < tol


@pytest.mark.parametrize("method", ["sign", "sigmoid", "fb"])
def test_block_gradient_each_method(method):
    kkt = {"method": method, "weights": [1.0] if method == "fb" else [1.0, 1.0, 1.0]}
    cfg = merge_config(default_config("block"), {**SMALL, "kkt": kkt})
    setup = build_case(cfg)
    assert _check_gradient(setup, _perturbed(setup))


def test_lame_gradient_and_breakdown_total():
    setup = build_case(merge_config(default_config("lame"), SMALL))
    params = _perturbed(setup)
    assert _check_gradient(setup, params)
    loss, _ = setup.problem.loss_and_grad(params)
    bd = setup.problem.breakdown(params)
    assert bd.total == pytest.approx(loss, rel=1e-12)
    assert bd.kkt == 0 and bd.fs == 0


def test_hertz_inverse_gradient_includes_pressure():
    fwd = build_case(merge_config(default_config("hertz"), SMALL_HERTZ))
    data = sample_model_data(_perturbed(fwd), fwd.transform, fwd.points, 20, 10)
    cfg = merge_config(default_config("hertz", "inverse"), SMALL_HERTZ)
    setup = build_case(cfg, data)
    params = _perturbed(setup, 3)
    assert params.extras == {"p": 0.1}
    assert _check_gradient(setup, params)


def test_hertz_surrogate_gradient():
    cfg = merge_config(default_config("hertz", "surrogate"),
                       {**SMALL_HERTZ, "surrogate": {"chunks": 2}})
    setup = build_case(cfg)
    assert _check_gradient(setup, _perturbed(setup))


def test_block_data_enhanced_gradient_and_exact_data_term():
    base = merge_config(default_config("block", "data_enhanced"), SMALL)
    ps = sample_unit_square(1.0, seed=0)
    data = oracle_data("block", base, ps.interior[:40])
    setup = build_case(base, data, ps)
    params = _perturbed(setup)
    assert _check_gradient(setup, params)
    assert setup.problem.breakdown(params).exp > 0


def test_soft_dirichlet_condition_gradient():
    ps = sample_unit_square(1.0, {"interior": 60, "boundary": 24}, seed=0)
    mat = MaterialParams(1.33, 0.33)
    prob = ContactProblem(ps, block_transform(0.1, 1.0), mat, LossWeights(),
                          [NeumannBC("NBC_2")], [DirichletBC("CONTACT", (False, True))])
    params = init_glorot_uniform(Architecture(2, (5, 5)), 0)
    params.flat[:] += 0.1

    class S:
        problem = prob

    assert _check_gradient(S, params)
    assert prob.breakdown(params).dbc > 0


def test_analytical_block_state_satisfies_kkt():
    ps = sample_unit_square(1.0, seed=0)
    F = oracle_data("block", default_config("block"), ps.boundary[ps.select("CONTACT")]).values
    g = F[:, 1]       # Y_ref = 0 and |n_y| = 1, so the gap is u_y
    p_n = F[:, 3]     # n = (0, -1): sigma_nn = syy
    assert np.all(g == 0) and np.all(p_n < 0)
    assert kkt_loss(KKTMethod.fischer_burmeister(), g, p_n) == 0


def test_non_finite_parameters_rejected():
    setup = build_case(merge_config(default_config("lame"), SMALL))
    params = NetworkParams(setup.arch)
    params.flat[0] = np.nan
    with pytest.raises(EvaluationError):
        setup.problem.loss_and_grad(params)
