"""Residual checks for the analytical solutions, shared by unit and acceptance tests.

Derivatives of the oracle fields are taken by complex step, which has no
subtractive cancellation, so residuals sit at round-off level.
"""

import numpy as np

from contact_pinn.benchmarks import block_fields, lame_fields
from contact_pinn.elasticity import MaterialParams, pde_residuals
from contact_pinn.network import Fields

H = 1e-30

LAME = dict(R_i=1.0, R_o=2.0, p=1.0, E=2000.0, nu=0.3)
BLOCK = dict(p=0.1, E=1.33, nu=0.33)


def complex_step_fields(fun, xy):
    F = np.real(fun(xy.astype(np.complex128)))
    dF = np.empty((2, *F.shape))
    for j in range(2):
        z = xy.astype(np.complex128)
        z[:, j] += 1j * H
        dF[j] = np.imag(fun(z)) / H
    return Fields(F, dF, np.zeros(len(xy)))


def constant_stress_fields(mat, strain):
    exx, eyy, gxy = strain
    lam, mu = mat.lam, mat.mu
    s = np.array([(lam + 2 * mu) * exx + lam * eyy, lam * exx + (lam + 2 * mu) * eyy, mu * gxy])

    def fun(xy):
        x, y = xy[:, 0], xy[:, 1]
        return np.stack([exx * x + 0.5 * gxy * y, eyy * y + 0.5 * gxy * x,
                         s[0] + 0 * x, s[1] + 0 * x, s[2] + 0 * x], axis=1)
    return fun


def _traction(F, n):
    return np.stack([F[:, 2] * n[:, 0] + F[:, 4] * n[:, 1],
                     F[:, 4] * n[:, 0] + F[:, 3] * n[:, 1]], axis=1)


def lame_residuals(n=100, seed=0):
    """Max |residual| over balance, constitutive and boundary conditions."""
    c = LAME
    rng = np.random.default_rng(seed)
    r = rng.uniform(c["R_i"], c["R_o"], n)
    th = rng.uniform(0, np.pi / 2, n)
    xy = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    fun = lambda z: lame_fields(z, **c)
    mat = MaterialParams(c["E"], c["nu"])
    res = [np.abs(pde_residuals(complex_step_fields(fun, xy), mat)).max()]
    t = rng.uniform(c["R_i"], c["R_o"], n)
    left = fun(np.stack([np.zeros(n), t], axis=1)).real
    bottom = fun(np.stack([t, np.zeros(n)], axis=1)).real
    res += [np.abs(left[:, [0, 4]]).max(), np.abs(bottom[:, [1, 4]]).max()]
    for R, load in ((c["R_i"], c["p"]), (c["R_o"], 0.0)):
        d = np.stack([np.cos(th), np.sin(th)], axis=1)
        F = fun(R * d).real
        normal = -d if R == c["R_i"] else d
        # inner arc: t = -p n; outer arc: t = 0
        res.append(np.abs(_traction(F, normal) + load * normal).max())
    return float(max(res))


def block_residuals(n=100, seed=0, l=1.0):
    c = BLOCK
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, l, (n, 2))
    fun = lambda z: block_fields(z, **c)
    mat = MaterialParams(c["E"], c["nu"])
    res = [np.abs(pde_residuals(complex_step_fields(fun, xy), mat)).max()]
    t = rng.uniform(0, l, n)
    z, o = np.zeros(n), np.full(n, l)
    left = fun(np.stack([z, t], axis=1)).real
    bottom = fun(np.stack([t, z], axis=1)).real
    top = fun(np.stack([t, o], axis=1)).real
    right = fun(np.stack([o, t], axis=1)).real
    res += [np.abs(left[:, [0, 4]]).max(),                 # symmetry
            np.abs(bottom[:, [1, 4]]).max(),               # closed gap, frictionless
            np.abs(top[:, 3] + c["p"]).max(), np.abs(top[:, 4]).max(),
            np.abs(right[:, [2, 4]]).max()]
    return float(max(res))


def constant_stress_residuals(n=100, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for E, nu in ((2000.0, 0.3), (1.33, 0.33), (200.0, 0.3)):
        mat = MaterialParams(E, nu)
        fun = constant_stress_fields(mat, rng.uniform(-1e-3, 1e-3, 3))
        xy = rng.uniform(-1, 1, (n, 2))
        out.append(np.abs(pde_residuals(complex_step_fields(fun, xy), mat)).max())
    return float(max(out))
