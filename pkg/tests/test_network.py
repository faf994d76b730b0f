import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdcheck import worst_relative_error

from contact_pinn import backend
from contact_pinn.benchmarks import block_transform, hertz_transform, lame_transform
from contact_pinn.network import (SYY, UX, Architecture, EvaluationError, FieldAdjoint,
                                  NetworkParams, OutputTransform, evaluate_fields, forward,
                                  init_glorot_uniform, input_jacobian, load_checkpoint,
                                  loss_gradient, save_checkpoint)


def random_params(arch, seed, extras=None, scale=1.0):
    p = init_glorot_uniform(arch, seed, extras)
    rng = np.random.default_rng(seed + 1000)
    n = arch.n_network
    p.flat[:n] = scale * p.flat[:n] + 0.1 * rng.standard_normal(n)
    return p


def test_glorot_bounds_zero_bias_and_determinism():
    arch = Architecture(2, (50, 50, 50))
    a = init_glorot_uniform(arch, 7)
    b = init_glorot_uniform(arch, 7)
    assert np.array_equal(a.flat, b.flat)
    lim = math.sqrt(6 / 100)
    assert abs(lim - 0.2449) < 1e-4
    assert np.all(np.abs(a.weights[1]) <= lim)
    assert all(np.all(bias == 0) for bias in a.biases)


def test_architecture_rejects_bad_widths():
    with pytest.raises(ValueError):
        Architecture(2, (0,))
    with pytest.raises(ValueError):
        Architecture(1, (5,))


def test_hard_constraints_hold_for_random_params():
    rng = np.random.default_rng(0)
    p = random_params(Architecture(2, (8, 8)), 3)
    t = lame_transform(2000.0)
    pts = np.column_stack([np.zeros(10), rng.uniform(1, 2, 10)])
    assert np.all(forward(p, t, pts)[:, UX] == 0)
    blk = block_transform(0.1, 1.0)
    top = np.column_stack([rng.random(10), np.ones(10)])
    F = forward(p, blk, top)
    assert np.all(F[:, SYY] == -0.1) and np.all(F[:, 4] == 0)
    hz = hertz_transform(0.5, 200.0)
    top = np.column_stack([-rng.random(10), np.zeros(10)])
    assert np.all(forward(p, hz, top)[:, SYY] == -0.5)


def test_forward_single_point_and_rejects_non_finite():
    p = random_params(Architecture(2, (4,)), 0)
    t = OutputTransform()
    assert forward(p, t, np.array([0.1, 0.2])).shape == (5,)
    with pytest.raises(EvaluationError):
        forward(p, t, np.array([[np.nan, 0.0]]))
    bad = p.copy()
    bad.flat[0] = np.inf
    with pytest.raises(EvaluationError):
        forward(bad, t, np.array([[0.0, 0.0]]))
    with pytest.raises(ValueError, match="expects 2 inputs"):
        forward(p, t, np.zeros((1, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_input_jacobian_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    p = random_params(Architecture(2, (10, 10)), seed)
    t = hertz_transform(0.5, 200.0)
    x = rng.uniform(-1, 0, size=(4, 2))
    J = input_jacobian(p, t, x)
    h = 1e-5
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (forward(p, t, x + e) - forward(p, t, x - e)) / (2 * h)
        err = np.abs(fd - J[:, :, j]) / (np.abs(J[:, :, j]) + 1e-3)
        assert err.max() < 1e-6


def test_zero_network_has_zero_jacobian():
    arch = Architecture(2, (6, 6))
    p = NetworkParams(arch)
    J = input_jacobian(p, lame_transform(2000.0), np.array([[1.2, 0.3]]))
    assert np.all(J == 0)


def test_syy_derivative_at_top_equals_minus_raw_output():
    p = random_params(Architecture(2, (6,)), 1)
    t = hertz_transform(0.5, 200.0)
    x = np.array([[-0.4, 0.0]])
    J = input_jacobian(p, t, x)
    raw = forward(p, OutputTransform(), x)
    assert J[0, SYY, 1] == pytest.approx(-raw[0, SYY], rel=1e-12)


def _sum_sq_loss(f):
    return FieldAdjoint(float(np.sum(f.F ** 2) + np.sum(f.dF ** 2)), 2 * f.F, 2 * f.dF)


@pytest.mark.parametrize("backend_name", ["python", "cython"])
def test_loss_gradient_matches_finite_differences(backend_name):
    try:
        k = backend.get_kernels(backend_name)
    except ImportError:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(2)
    p = random_params(Architecture(3, (7, 7)), 2)
    x = np.column_stack([rng.uniform(-1, 0, (6, 2)), rng.uniform(0.2, 1, 6)])
    t = hertz_transform(0.5, 200.0)
    _, g = loss_gradient(_sum_sq_loss, p, t, x, k)

    def value(flat):
        return loss_gradient(_sum_sq_loss, p.with_flat(flat), t, x, k)[0]

    assert worst_relative_error(value, p.flat, g, range(p.flat.size)) < 1e-5


def test_backends_agree():
    try:
        k = backend.get_kernels("cython")
    except ImportError:
        pytest.skip("compiled extension not built")
    p = random_params(Architecture(2, (16, 16, 16)), 4)
    x = np.random.default_rng(4).uniform(-1, 0, (50, 2))
    t = hertz_transform(0.5, 200.0)
    _, g1 = loss_gradient(_sum_sq_loss, p, t, x, k)
    _, g2 = loss_gradient(_sum_sq_loss, p, t, x, backend.get_kernels("python"))
    assert np.max(np.abs(g1 - g2)) <= 1e-12 * max(1.0, np.max(np.abs(g1)))


def test_extra_pressure_gradient_through_neumann_target():
    # loss = mean((syy + p)^2) over points where syy is a free raw output:
    # dL/dp = 2 mean(syy + p)
    arch = Architecture(2, (5,))
    p = random_params(arch, 5, {"p": 0.3})
    t = OutputTransform()
    x = np.random.default_rng(5).random((8, 2))

    def loss(f):
        r = f.F[:, SYY] + f.pressure
        gF = np.zeros_like(f.F)
        gF[:, SYY] = 2 * r / len(r)
        return FieldAdjoint(float(np.mean(r * r)), gF, np.zeros_like(f.dF),
                            {"p": float(np.sum(2 * r / len(r)))})

    _, g = loss_gradient(loss, p, t, x)
    syy = forward(p, t, x)[:, SYY]
    assert g[p.extra_index("p")] == pytest.approx(2 * np.mean(syy + 0.3), rel=1e-12)


def test_zero_weights_give_zero_gradient_past_first_layer():
    arch = Architecture(2, (4, 4))
    p = NetworkParams(arch)
    x = np.array([[0.3, 0.7]])
    _, g = loss_gradient(_sum_sq_loss, p, OutputTransform(), x)
    grads = NetworkParams(arch, g)
    assert np.all(grads.weights[0] == 0) and np.all(grads.weights[1] == 0)


def test_checkpoint_round_trip(tmp_path):
    p = random_params(Architecture(3, (4, 3)), 9, {"p": 0.25})
    path = tmp_path / "ck.json"
    save_checkpoint(p, path, {"note": "x"})
    q, meta = load_checkpoint(path)
    assert np.array_equal(p.flat, q.flat)
    assert q.extras == {"p": 0.25} and meta == {"note": "x"} and q.seed == 9
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(path)


def test_evaluate_fields_pressure_from_input_column():
    p = random_params(Architecture(3, (4,)), 0)
    x = np.array([[-0.5, 0.0, 0.7]])
    f = evaluate_fields(p, hertz_transform(0.5, 200.0), x)
    assert f.pressure[0] == 0.7
    assert f.F[0, SYY] == -0.7
