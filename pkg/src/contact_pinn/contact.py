"""Frictionless contact against a flat rigid obstacle: gap, traction split, KKT losses.

Sign conventions: a positive gap means separation, a negative contact
pressure ``p_n = (sigma . n) . n`` means compression. The admissible set is
``g >= 0, p <= 0, g * p = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

SHARP_EDGE_TOL = 1e-12


class SharpEdgeError(ValueError):
    """Gap evaluated where the boundary normal has no vertical component."""


def gap(Y_ref, u_y, n_y, surface_y: float = 0.0):
    """Normal gap ``(Y + u_y) / |n_y|`` to a flat surface at ``y = surface_y``.

    ``Y_ref`` is the reference y coordinate in the same frame as the surface.
    """
    n_y = np.asarray(n_y, dtype=np.float64)
    if np.any(np.abs(n_y) <= SHARP_EDGE_TOL):
        raise SharpEdgeError("gap undefined where |n_y| <= 1e-12 (sharp edge)")
    return (np.asarray(Y_ref) - surface_y + np.asarray(u_y)) / np.abs(n_y)


def traction_decompose(sigma, n, tau):
    """Contact pressure and tangential traction of ``t = sigma . n``.

    ``sigma`` rows are (sxx, syy, sxy); returns ``(p_n, t_tau)``.
    """
    s = np.asarray(sigma, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    tx = s[..., 0] * n[..., 0] + s[..., 2] * n[..., 1]
    ty = s[..., 2] * n[..., 0] + s[..., 1] * n[..., 1]
    return tx * n[..., 0] + ty * n[..., 1], tx * tau[..., 0] + ty * tau[..., 1]


def fischer_burmeister(a, b):
    """``a + b - sqrt(a^2 + b^2)``; zero exactly on the complementarity set."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return a + b - np.hypot(a, b)


def _fb_partials(a, b):
    r = np.hypot(a, b)
    safe = np.where(r > 0, r, 1.0)
    # at the origin phi = 0, so phi * dphi vanishes whatever partial we pick
    da = np.where(r > 0, 1.0 - a / safe, 0.0)
    db = np.where(r > 0, 1.0 - b / safe, 0.0)
    return da, db


def sign_gate_gap(g):
    """``(1 - sgn g) / 2`` with sgn(0) = 0."""
    return 0.5 * (1.0 - np.sign(g))


def sign_gate_pressure(p):
    """``(1 + sgn p) / 2`` with sgn(0) = 0."""
    return 0.5 * (1.0 + np.sign(p))


def sigmoid_gate_gap(g, delta):
    """``1 / (1 + exp(delta g))``, overflow-safe."""
    return expit(-delta * np.asarray(g, dtype=np.float64))


def sigmoid_gate_pressure(p, delta):
    """``1 / (1 + exp(-delta p))``, overflow-safe."""
    return expit(delta * np.asarray(p, dtype=np.float64))


METHODS = ("sign", "sigmoid", "fb")


@dataclass(frozen=True)
class KKTMethod:
    """Contact enforcement variant and its weights.

    ``weights`` are (w1, w2, w3) for the gated variants; the Fischer-Burmeister
    variant uses ``weights[0]`` only.
    """

    variant: str = "fb"
    weights: tuple[float, ...] = (1.0, 1.0, 1.0)
    delta_g: float = 10.0
    delta_p: float = 100.0

    def __post_init__(self):
        if self.variant not in METHODS:
            raise ValueError(f"unknown KKT method {self.variant!r}; expected one of {METHODS}")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise ValueError("KKT weights must be non-negative")
        if self.variant == "sigmoid" and not (self.delta_g > 0 and self.delta_p > 0):
            raise ValueError("sigmoid steepness parameters must be positive")

    @classmethod
    def sign(cls, w1=1.0, w2=1.0, w3=1.0):
        return cls("sign", (w1, w2, w3))

    @classmethod
    def sigmoid(cls, delta_g=10.0, delta_p=100.0, w1=1.0, w2=1.0, w3=1.0):
        return cls("sigmoid", (w1, w2, w3), delta_g, delta_p)

    @classmethod
    def fischer_burmeister(cls, w=1.0):
        return cls("fb", (w,))


def kkt_loss_and_grad(method: KKTMethod, g, p):
    """KKT soft-constraint loss (MSE over contact points) and d loss / d(g, p)."""
    g = np.asarray(g, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    n = g.size
    if n == 0:
        return 0.0, np.zeros(0), np.zeros(0), {}
    if method.variant == "fb":
        w = method.weights[0]
        phi = fischer_burmeister(g, -p)
        da, db = _fb_partials(g, -p)
        val = w * float(np.mean(phi * phi))
        c = 2.0 * w * phi / n
        return val, c * da, -c * db, {"kkt_fb": float(np.mean(phi * phi))}

    w1, w2, w3 = (tuple(method.weights) + (1.0, 1.0, 1.0))[:3]
    if method.variant == "sign":
        sg, sp = sign_gate_gap(g), sign_gate_pressure(p)
        dsg = dsp = 0.0       # gates are piecewise constant
    else:
        sg = sigmoid_gate_gap(g, method.delta_g)
        sp = sigmoid_gate_pressure(p, method.delta_p)
        dsg = -method.delta_g * sg * (1.0 - sg)
        dsp = method.delta_p * sp * (1.0 - sp)
    r1, r2, r3 = sg * g, sp * p, p * g
    m1, m2, m3 = (float(np.mean(r * r)) for r in (r1, r2, r3))
    val = w1 * m1 + w2 * m2 + w3 * m3
    dg = 2.0 * (w1 * r1 * (sg + dsg * g) + w3 * r3 * p) / n
    dp = 2.0 * (w2 * r2 * (sp + dsp * p) + w3 * r3 * g) / n
    return val, dg, dp, {"kkt_gap": m1, "kkt_pressure": m2, "kkt_compl": m3}


def kkt_loss(method: KKTMethod, g, p) -> float:
    return kkt_loss_and_grad(method, g, p)[0]


def fs_loss(t_tau, w_fs: float = 1.0) -> float:
    """Frictionless sliding: ``w_fs * mean(t_tau^2)``."""
    t = np.asarray(t_tau, dtype=np.float64)
    return w_fs * float(np.mean(t * t)) if t.size else 0.0
