"""Pure numpy versions of the fused tanh-layer kernels.

Arrays use the stacked layout ``[value; d/dx; d/dy]`` along the first axis:
rows ``0:n`` hold pre-activations (or activations), rows ``k*n:(k+1)*n`` hold
the derivative stream for spatial input ``k-1``.
"""

from __future__ import annotations

import numpy as np


def act_forward(zs: np.ndarray, n: int, hs: np.ndarray, s: np.ndarray) -> None:
    """tanh on the value block, chain rule on the derivative blocks (in place)."""
    a = hs[:n]
    np.tanh(zs[:n], out=a)
    np.multiply(a, a, out=s)
    np.subtract(1.0, s, out=s)
    k = zs.shape[0] // n
    for j in range(1, k):
        np.multiply(zs[j * n:(j + 1) * n], s, out=hs[j * n:(j + 1) * n])


def act_backward(gs: np.ndarray, hs: np.ndarray, s: np.ndarray, zs: np.ndarray,
                 n: int, out: np.ndarray) -> None:
    """Adjoint of :func:`act_forward`; writes d(loss)/d(zs) into ``out``."""
    k = zs.shape[0] // n
    acc = np.zeros_like(s)
    for j in range(1, k):
        blk = slice(j * n, (j + 1) * n)
        acc += gs[blk] * zs[blk]
        np.multiply(gs[blk], s, out=out[blk])
    # d s / d z = -2 a s
    out[:n] = s * (gs[:n] - 2.0 * hs[:n] * acc)
