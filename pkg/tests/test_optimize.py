import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contact_pinn.optimize import (AdamConfig, AdamState, LbfgsConfig, adam, adam_step, lbfgs,
                                   train_two_phase)


def quadratic(x):
    return 0.5 * float(x @ x), x.copy()


def rosenbrock(x):
    a, b = 1.0, 100.0
    f = (a - x[0]) ** 2 + b * (x[1] - x[0] ** 2) ** 2
    g = np.array([-2 * (a - x[0]) - 4 * b * x[0] * (x[1] - x[0] ** 2), 2 * b * (x[1] - x[0] ** 2)])
    return float(f), g


def test_first_adam_step_and_zero_gradient():
    state, x = adam_step(AdamState.zeros(1), np.array([1.0]), np.array([2.0]), AdamConfig())
    assert x[0] == pytest.approx(0.999, abs=1e-10)
    _, y = adam_step(AdamState.zeros(3), np.ones(3), np.zeros(3), AdamConfig())
    assert np.array_equal(y, np.ones(3))
    with pytest.raises(FloatingPointError):
        adam_step(AdamState.zeros(1), np.ones(1), np.array([np.nan]), AdamConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        AdamConfig(lr=0)
    with pytest.raises(ValueError):
        AdamConfig(beta1=1.0)
    with pytest.raises(ValueError):
        LbfgsConfig(history=0)
    with pytest.raises(ValueError):
        LbfgsConfig(c1=0.9, c2=0.1)


def test_adam_invariant_to_constant_shift():
    cfg = AdamConfig(lr=0.01, epochs=50)
    x0 = np.array([1.0, -2.0])
    a, _ = adam(rosenbrock, x0, cfg)
    b, _ = adam(lambda x: (rosenbrock(x)[0] + 123.0, rosenbrock(x)[1]), x0, cfg)
    assert np.array_equal(a, b)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=8))
def test_lbfgs_quadratic_converges_in_three_iterations(x0):
    x, f, it, reason = lbfgs(quadratic, np.array(x0), LbfgsConfig())
    assert np.linalg.norm(x) <= 1e-10 and it <= 3


def test_lbfgs_rosenbrock_and_already_optimal():
    x, f, it, reason = lbfgs(rosenbrock, np.array([-1.2, 1.0]), LbfgsConfig())
    assert f <= 1e-10 and reason in ("grad_tol", "rel_loss_tol")
    _, _, it, reason = lbfgs(rosenbrock, np.array([1.0, 1.0]), LbfgsConfig())
    assert (it, reason) == (0, "grad_tol")


def test_lbfgs_never_increases_loss():
    seen = []

    def log(phase, it, f, g, x, force=False):
        seen.append(f)

    lbfgs(rosenbrock, np.array([-1.2, 1.0]), LbfgsConfig(), log)
    assert all(b <= a for a, b in zip(seen, seen[1:]))


def test_lbfgs_reports_line_search_failure():
    # a non-smooth objective whose "gradient" points uphill defeats the line search
    def bad(x):
        return float(abs(x[0])), np.array([-np.sign(x[0]) or 1.0])

    _, f, _, reason = lbfgs(bad, np.array([1.0]), LbfgsConfig())
    assert reason == "line_search" and f == 1.0


def test_two_phase_records_and_schedule():
    buf = io.StringIO()
    res = train_two_phase(rosenbrock, np.array([-1.2, 1.0]), AdamConfig(epochs=30),
                          LbfgsConfig(), buf, log_every=10)
    phases = [r.phase for r in res.history]
    k = phases.index("lbfgs")
    assert set(phases[:k]) == {"adam"} and set(phases[k:]) == {"lbfgs"}
    for a, b in zip(res.history, res.history[1:]):
        if a.phase == b.phase:
            assert b.iteration > a.iteration
    lines = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(lines) == len(res.history) and lines[0]["phase"] == "adam"
    assert res.loss <= 1e-10 and res.adam_epochs == 30

    again = train_two_phase(rosenbrock, np.array([-1.2, 1.0]), AdamConfig(epochs=30))
    assert np.array_equal(again.flat, res.flat)

    pure = train_two_phase(quadratic, np.ones(3), AdamConfig(epochs=0))
    assert pure.adam_epochs == 0 and {r.phase for r in pure.history} == {"lbfgs"}
