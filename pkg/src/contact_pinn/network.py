"""Fully connected tanh network with exact input Jacobians.

The network maps ``(x, y[, p])`` to five raw outputs ``N``. Alongside the
activations we propagate the derivatives with respect to the two spatial
inputs (forward accumulation), so PDE residuals only need one extra pass.
Parameter gradients run in reverse over that whole trace, including the
derivative streams.

All parameters live in one flat float64 buffer; per-layer weights and biases
are reshaped views into it, which is what the optimizers operate on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import backend

N_SPATIAL = 2
CHECKPOINT_VERSION = 1

OUTPUT_NAMES = ("ux", "uy", "sxx", "syy", "sxy")
UX, UY, SXX, SYY, SXY = range(5)


class EvaluationError(FloatingPointError):
    """Non-finite parameters, inputs or loss terms."""


@dataclass(frozen=True)
class Architecture:
    input_width: int
    hidden_layers: tuple[int, ...]
    output_width: int = 5

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        widths = (self.input_width, *self.hidden_layers, self.output_width)
        if any(w < 1 for w in widths):
            raise ValueError(f"all layer widths must be >= 1, got {widths}")
        if self.input_width < N_SPATIAL:
            raise ValueError("input_width must include the two spatial coordinates")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_width, *self.hidden_layers, self.output_width)

    def layer_shapes(self) -> list[tuple[int, int]]:
        w = self.widths
        return [(w[i], w[i + 1]) for i in range(len(w) - 1)]

    @property
    def n_network(self) -> int:
        return sum(a * b + b for a, b in self.layer_shapes())


class NetworkParams:
    """Weights, biases and optional named extra scalars in one flat vector.

    ``weights[l]`` has shape ``(fan_in, fan_out)`` so a layer is ``A @ W + b``.
    Extra trainables (inverse mode) sit at the end of ``flat`` in the order of
    ``extra_names``.
    """

    def __init__(self, arch: Architecture, flat: np.ndarray | None = None,
                 extra_names: Sequence[str] = (), seed: int = 0):
        self.arch = arch
        self.extra_names = tuple(extra_names)
        self.seed = int(seed)
        size = arch.n_network + len(self.extra_names)
        if flat is None:
            flat = np.zeros(size)
        flat = np.array(flat, dtype=np.float64, copy=True)
        if flat.shape != (size,):
            raise ValueError(f"flat parameter vector must have shape ({size},), got {flat.shape}")
        self.flat = flat
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        off = 0
        for fan_in, fan_out in arch.layer_shapes():
            self.weights.append(flat[off:off + fan_in * fan_out].reshape(fan_in, fan_out))
            off += fan_in * fan_out
            self.biases.append(flat[off:off + fan_out])
            off += fan_out

    @property
    def extras(self) -> dict[str, float]:
        base = self.arch.n_network
        return {name: float(self.flat[base + i]) for i, name in enumerate(self.extra_names)}

    def extra_index(self, name: str) -> int:
        return self.arch.n_network + self.extra_names.index(name)

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.arch, self.flat, self.extra_names, self.seed)

    def with_flat(self, flat: np.ndarray) -> "NetworkParams":
        return NetworkParams(self.arch, flat, self.extra_names, self.seed)

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.flat)):
            raise EvaluationError("non-finite network parameters")

    # checkpoints ----------------------------------------------------------

    def to_dict(self, metadata: dict | None = None) -> dict:
        layers = [
            {"shape": list(w.shape), "weights": w.ravel().tolist(), "bias": b.tolist()}
            for w, b in zip(self.weights, self.biases)
        ]
        return {
            "version": CHECKPOINT_VERSION,
            "architecture": {
                "input_width": self.arch.input_width,
                "hidden_layers": list(self.arch.hidden_layers),
                "output_width": self.arch.output_width,
            },
            "seed": self.seed,
            "layers": layers,
            "extra_trainables": self.extras,
            "metadata": metadata or {},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkParams":
        if doc.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
        a = doc["architecture"]
        arch = Architecture(a["input_width"], tuple(a["hidden_layers"]), a["output_width"])
        layers = doc["layers"]
        if [tuple(l["shape"]) for l in layers] != arch.layer_shapes():
            raise ValueError("checkpoint layer shapes do not match its architecture")
        chunks = []
        for l in layers:
            chunks.append(np.asarray(l["weights"], dtype=np.float64))
            chunks.append(np.asarray(l["bias"], dtype=np.float64))
        extras = doc.get("extra_trainables", {})
        chunks.append(np.asarray(list(extras.values()), dtype=np.float64))
        return cls(arch, np.concatenate(chunks), tuple(extras), doc.get("seed", 0))


def save_checkpoint(params: NetworkParams, path: str | Path, metadata: dict | None = None) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(params.to_dict(metadata)))


def load_checkpoint(path: str | Path) -> tuple[NetworkParams, dict]:
    doc = json.loads(Path(path).read_text())
    return NetworkParams.from_dict(doc), doc.get("metadata", {})


def init_glorot_uniform(arch: Architecture, seed: int,
                        extras: dict[str, float] | None = None) -> NetworkParams:
    """Glorot-uniform weights, zero biases; extras appended with given values."""
    rng = np.random.default_rng(seed)
    extras = extras or {}
    params = NetworkParams(arch, None, tuple(extras), seed)
    for w in params.weights:
        fan_in, fan_out = w.shape
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        w[...] = rng.uniform(-lim, lim, size=w.shape)
    for i, v in enumerate(extras.values()):
        params.flat[arch.n_network + i] = v
    return params


# raw network -------------------------------------------------------------

@dataclass
class _Trace:
    n: int
    inputs: np.ndarray
    zs: list[np.ndarray]     # stacked pre-activations per hidden layer
    hs: list[np.ndarray]     # stacked activations per hidden layer
    ss: list[np.ndarray]     # tanh' per hidden layer
    ws: "Workspace"


class Workspace:
    """Reusable trace buffers for repeated evaluation on one point batch.

    Fresh multi-megabyte allocations on every call cost as much as the
    matmuls (page faults), so training loops hold one of these.
    """

    def __init__(self):
        self._bufs: dict = {}

    def get(self, key, shape) -> np.ndarray:
        buf = self._bufs.get(key)
        if buf is None or buf.shape != shape:
            buf = np.empty(shape)
            self._bufs[key] = buf
        return buf


def mlp_forward(params: NetworkParams, x: np.ndarray, kernels=None,
                workspace: Workspace | None = None):
    """Raw outputs and their spatial derivatives.

    Returns ``(N, dN, trace)`` with ``N`` of shape ``(n, out)`` and ``dN`` of
    shape ``(2, n, out)`` (d/dx, d/dy). With a ``workspace`` the returned
    arrays are overwritten by the next call using it.
    """
    k = kernels or backend.kernels
    ws = workspace or Workspace()
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    nk = 1 + N_SPATIAL
    w0 = params.weights[0]
    zs_list, hs_list, ss_list = [], [], []
    zs = ws.get(("z", 0), (nk * n, w0.shape[1]))
    np.matmul(x, w0, out=zs[:n])
    zs[:n] += params.biases[0]
    for j in range(N_SPATIAL):
        zs[(j + 1) * n:(j + 2) * n] = w0[j]
    n_hidden = len(params.weights) - 1
    for layer in range(n_hidden):
        hs = ws.get(("h", layer), zs.shape)
        ss = ws.get(("s", layer), (n, zs.shape[1]))
        k.act_forward(zs, n, hs, ss)
        zs_list.append(zs)
        hs_list.append(hs)
        ss_list.append(ss)
        w = params.weights[layer + 1]
        zs = ws.get(("z", layer + 1), (nk * n, w.shape[1]))
        np.matmul(hs, w, out=zs)
        zs[:n] += params.biases[layer + 1]
    N = zs[:n]
    dN = zs[n:].reshape(N_SPATIAL, n, -1)
    return N, dN, _Trace(n, x, zs_list, hs_list, ss_list, ws)


def mlp_backward(params: NetworkParams, trace: _Trace, gN: np.ndarray,
                 gdN: np.ndarray, kernels=None) -> np.ndarray:
    """Gradient of a loss w.r.t. the network part of ``params.flat``.

    ``gN`` and ``gdN`` are the adjoints of the outputs returned by
    :func:`mlp_forward`.
    """
    k = kernels or backend.kernels
    ws = trace.ws
    n = trace.n
    gparams = NetworkParams(params.arch)
    gw, gb = gparams.weights, gparams.biases
    g = ws.get(("g", "out"), (trace.zs[0].shape[0], gN.shape[1]))
    g[:n] = gN
    g[n:] = gdN.reshape(-1, gN.shape[1])
    n_hidden = len(params.weights) - 1
    for layer in range(n_hidden, 0, -1):
        h_prev = trace.hs[layer - 1]
        np.matmul(h_prev.T, g, out=gw[layer])
        gb[layer][...] = g[:n].sum(axis=0)
        gh = ws.get(("gh", layer), h_prev.shape)
        np.matmul(g, params.weights[layer].T, out=gh)
        g = ws.get(("gz", layer), h_prev.shape)
        k.act_backward(gh, h_prev, trace.ss[layer - 1], trace.zs[layer - 1], n, g)
    np.matmul(trace.inputs.T, g[:n], out=gw[0])
    for j in range(N_SPATIAL):
        gw[0][j] += g[(j + 1) * n:(j + 2) * n].sum(axis=0)
    gb[0][...] = g[:n].sum(axis=0)
    return gparams.flat


# output transformation ---------------------------------------------------

def _zeros(x, y, p):
    z = np.zeros_like(x)
    return z, z, z, z


def _ones(x, y):
    return np.ones_like(x), np.zeros_like(x), np.zeros_like(x)


@dataclass
class ComponentTransform:
    """``g(x, y, p) + scale * h(x, y) * N``.

    ``offset`` returns ``(g, g_x, g_y, g_p)``; it must be affine in ``p`` with
    spatial derivatives independent of ``p``. ``distance`` returns
    ``(h, h_x, h_y)``.
    """

    offset: Callable = _zeros
    distance: Callable = _ones
    scale: float = 1.0


def minus_pressure(x, y, p):
    """Offset ``g = -p``."""
    z = np.zeros_like(x)
    return -p * np.ones_like(x), z, z, -np.ones_like(x)


@dataclass
class OutputTransform:
    components: list[ComponentTransform] = field(
        default_factory=lambda: [ComponentTransform() for _ in OUTPUT_NAMES])
    pressure: float = 0.0
    name: str = "identity"


@dataclass
class Fields:
    """Transformed outputs ``F`` (n, 5) and their spatial derivatives ``dF`` (2, n, 5)."""

    F: np.ndarray
    dF: np.ndarray
    pressure: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def take(self, idx) -> "Fields":
        return Fields(self.F[idx], self.dF[:, idx], self.pressure[idx])


@dataclass
class _TransformCache:
    s_h: np.ndarray      # scale * h, (n, 5)
    s_dh: np.ndarray     # scale * dh, (2, n, 5)
    g_p: np.ndarray      # dg/dp, (n, 5)


def resolve_pressure(params: NetworkParams, transform: OutputTransform, x: np.ndarray) -> np.ndarray:
    """Per-point pressure: input column, trainable extra ``p``, or the fixed load."""
    n = x.shape[0]
    if x.shape[1] > N_SPATIAL:
        return np.array(x[:, N_SPATIAL], dtype=np.float64)
    if "p" in params.extra_names:
        return np.full(n, params.flat[params.extra_index("p")])
    return np.full(n, float(transform.pressure))


def _apply_transform(transform: OutputTransform, x, N, dN, p):
    xs, ys = x[:, 0], x[:, 1]
    n, m = N.shape
    F = np.empty_like(N)
    dF = np.empty_like(dN)
    s_h = np.empty((n, m))
    s_dh = np.empty((N_SPATIAL, n, m))
    g_p = np.empty((n, m))
    for i, comp in enumerate(transform.components):
        g, gx, gy, gp = comp.offset(xs, ys, p)
        h, hx, hy = comp.distance(xs, ys)
        s = comp.scale
        s_h[:, i] = s * h
        s_dh[0, :, i] = s * hx
        s_dh[1, :, i] = s * hy
        g_p[:, i] = gp
        F[:, i] = g + s_h[:, i] * N[:, i]
        dF[0, :, i] = gx + s_dh[0, :, i] * N[:, i] + s_h[:, i] * dN[0, :, i]
        dF[1, :, i] = gy + s_dh[1, :, i] * N[:, i] + s_h[:, i] * dN[1, :, i]
    return F, dF, _TransformCache(s_h, s_dh, g_p)


def _check_inputs(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != params.arch.input_width:
        raise ValueError(
            f"network expects {params.arch.input_width} inputs, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise EvaluationError("non-finite network input")
    params.check_finite()
    return x


def evaluate_fields(params: NetworkParams, transform: OutputTransform, x: np.ndarray,
                    kernels=None, workspace: Workspace | None = None, _keep: bool = False):
    x = _check_inputs(params, x)
    N, dN, trace = mlp_forward(params, x, kernels, workspace)
    p = resolve_pressure(params, transform, x)
    F, dF, tc = _apply_transform(transform, x, N, dN, p)
    fields = Fields(F, dF, p)
    if _keep:
        return fields, (trace, tc)
    return fields


def forward(params: NetworkParams, transform: OutputTransform, x) -> np.ndarray:
    """Transformed outputs ``(ux, uy, sxx, syy, sxy)``; one row per input row."""
    single = np.ndim(x) == 1
    F = evaluate_fields(params, transform, x).F
    if not np.all(np.isfinite(F)):
        raise EvaluationError("non-finite network output")
    return F[0] if single else F


def input_jacobian(params: NetworkParams, transform: OutputTransform, x) -> np.ndarray:
    """d(outputs)/d(x, y); shape ``(n, 5, 2)`` (or ``(5, 2)`` for one point)."""
    single = np.ndim(x) == 1
    J = np.moveaxis(evaluate_fields(params, transform, x).dF, 0, -1)
    if not np.all(np.isfinite(J)):
        raise EvaluationError("non-finite input Jacobian")
    return J[0] if single else J


@dataclass
class FieldAdjoint:
    """Output of a field loss: value, adjoints of ``F``/``dF``, direct extra-parameter gradients."""

    value: float
    gF: np.ndarray
    gdF: np.ndarray
    g_extra: dict[str, float] = field(default_factory=dict)


def loss_gradient(field_loss: Callable[[Fields], FieldAdjoint], params: NetworkParams,
                  transform: OutputTransform, x: np.ndarray, kernels=None,
                  workspace: Workspace | None = None):
    """Value and gradient (w.r.t. ``params.flat``) of a loss defined on fields.

    ``field_loss`` receives the transformed :class:`Fields` at ``x`` and
    returns a :class:`FieldAdjoint`.
    """
    fields, (trace, tc) = evaluate_fields(params, transform, x, kernels, workspace, _keep=True)
    adj = field_loss(fields)
    if not math.isfinite(adj.value):
        raise EvaluationError("non-finite loss")
    gN = adj.gF * tc.s_h + adj.gdF[0] * tc.s_dh[0] + adj.gdF[1] * tc.s_dh[1]
    gdN = adj.gdF * tc.s_h
    grad = np.zeros_like(params.flat)
    grad[: params.arch.n_network] = mlp_backward(params, trace, gN, gdN, kernels)
    for name, g in adj.g_extra.items():
        if name in params.extra_names:
            grad[params.extra_index(name)] += g
    if "p" in params.extra_names and x.shape[1] == N_SPATIAL:
        grad[params.extra_index("p")] += float(np.sum(adj.gF * tc.g_p))
    return adj.value, grad
