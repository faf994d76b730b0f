"""Composite PINN loss for elasticity with contact, with its exact gradient.

All point groups (collocation, soft Dirichlet/Neumann, contact, data) are
stacked into one network batch; each term reads its slice of the fields and
writes its adjoint back into the same slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import contact as ct
from .elasticity import (ExperimentalData, LossBreakdown, LossWeights, MaterialParams,
                         dbc_term, exp_term, nbc_term, pde_term)
from .geometry import CONTACT, PointSet
from .network import (SXX, SXY, SYY, UY, EvaluationError, FieldAdjoint, Fields,
                      NetworkParams, OutputTransform, Workspace, evaluate_fields,
                      loss_gradient)


def zero_traction(xy, normals):
    z = np.zeros_like(xy)
    return z, z


def pressure_traction(xy, normals):
    """Traction ``-p n`` from a pressure load ``p``."""
    return np.zeros_like(xy), -np.asarray(normals)


@dataclass
class NeumannBC:
    """Soft traction condition on boundary points tagged ``tag``.

    ``traction(xy, normals)`` returns ``(t0, t1)``; the target is
    ``t0 + p * t1`` with ``p`` the (possibly trainable or input) load.
    """

    tag: str
    traction: Callable = zero_traction


@dataclass
class DirichletBC:
    """Soft displacement condition; ``components`` picks u_x and/or u_y."""

    tag: str
    components: tuple[bool, bool] = (True, True)
    values: Callable = lambda xy: np.zeros_like(xy)


@dataclass
class ContactSpec:
    tag: str = CONTACT
    method: ct.KKTMethod = field(default_factory=ct.KKTMethod)


class ContactProblem:
    """Loss ``L = L_PDE + L_DBC + L_NBC + L_EXP + L_FS + L_KKT`` on fixed point sets.

    ``pressures`` (surrogate mode) replicates every spatial point once per
    chunk with the given per-point load as third network input; it must have
    shape ``(k, n_points)``.
    """

    def __init__(self, points: PointSet, transform: OutputTransform, material: MaterialParams,
                 weights: LossWeights | None = None, neumann=(), dirichlet=(),
                 contact: ContactSpec | None = None, data: ExperimentalData | None = None,
                 pressures: np.ndarray | None = None):
        self.points = points
        self.transform = transform
        self.material = material
        self.weights = weights or LossWeights()
        self.neumann = list(neumann)
        self.dirichlet = list(dirichlet)
        self.contact = contact
        self.data = data
        if len(points.interior) == 0:
            raise ValueError("empty collocation set")
        groups: list[tuple[str, np.ndarray]] = [("pde", points.interior)]
        b = points.boundary
        self._nbc_sel = np.zeros(len(b), dtype=bool)
        for bc in self.neumann:
            self._nbc_sel |= points.select(bc.tag)
        nbc_xy, nbc_n = b[self._nbc_sel], points.normals[self._nbc_sel]
        self._nbc_t0 = np.zeros_like(nbc_xy)
        self._nbc_t1 = np.zeros_like(nbc_xy)
        tags = points.tags[self._nbc_sel]
        for bc in self.neumann:
            m = tags == bc.tag
            t0, t1 = bc.traction(nbc_xy[m], nbc_n[m])
            self._nbc_t0[m], self._nbc_t1[m] = t0, t1
        self._nbc_normals = nbc_n
        groups.append(("nbc", nbc_xy))

        dsel = np.zeros(len(b), dtype=bool)
        for bc in self.dirichlet:
            dsel |= points.select(bc.tag)
        dxy = b[dsel]
        dtags = points.tags[dsel]
        self._dbc_targets = np.zeros_like(dxy)
        self._dbc_mask = np.zeros(dxy.shape, dtype=bool)
        for bc in self.dirichlet:
            m = dtags == bc.tag
            self._dbc_targets[m] = bc.values(dxy[m])
            self._dbc_mask[m] = bc.components
        groups.append(("dbc", dxy))

        if contact is not None:
            csel = points.select(contact.tag)
            if not csel.any():
                raise ValueError(f"no boundary points tagged {contact.tag}")
            self._c_normals = points.normals[csel]
            self._c_tangents = points.tangents[csel]
            self._c_yref = points.yref[csel]
            if np.any(np.abs(self._c_normals[:, 1]) <= ct.SHARP_EDGE_TOL):
                raise ct.SharpEdgeError("contact boundary has points with n_y = 0")
            groups.append(("contact", b[csel]))
        else:
            groups.append(("contact", np.zeros((0, 2))))
        groups.append(("exp", data.xy if data is not None else np.zeros((0, 2))))

        spatial = np.concatenate([g[1] for g in groups])
        sizes = [len(g[1]) for g in groups]
        self.n_spatial = len(spatial)
        if pressures is None:
            self.chunks = 1
            self.x = spatial
        else:
            pressures = np.atleast_2d(np.asarray(pressures, dtype=np.float64))
            if pressures.shape[1] != self.n_spatial:
                raise ValueError("pressures must have shape (k, n_points)")
            self.chunks = pressures.shape[0]
            if self.chunks < 1:
                raise ValueError("need at least one chunk")
            self.x = np.concatenate(
                [np.column_stack([spatial, pressures[c]]) for c in range(self.chunks)])
        # index arrays into the stacked batch for each group, across chunks
        self.idx: dict[str, np.ndarray] = {}
        off = 0
        for (name, _), size in zip(groups, sizes):
            base = np.arange(off, off + size)
            self.idx[name] = np.concatenate(
                [base + c * self.n_spatial for c in range(self.chunks)])
            off += size
        self._rep = lambda a: np.concatenate([a] * self.chunks) if self.chunks > 1 else a
        self.workspace = Workspace()
        self.last: LossBreakdown | None = None

    # -------------------------------------------------------------------

    def field_loss(self, f: Fields) -> FieldAdjoint:
        w = self.weights
        gF = np.zeros_like(f.F)
        gdF = np.zeros_like(f.dF)
        bd = LossBreakdown()
        g_extra: dict[str, float] = {}

        def put(name, g1, g2):
            i = self.idx[name]
            gF[i] += g1
            gdF[:, i] += g2

        i = self.idx["pde"]
        bd.pde, a, b, parts = pde_term(f.take(i), self.material, w.pde)
        put("pde", a, b)
        bd.components.update(parts)

        i = self.idx["nbc"]
        if len(i):
            fi = f.take(i)
            t0, t1 = self._rep(self._nbc_t0), self._rep(self._nbc_t1)
            target = t0 + fi.pressure[:, None] * t1
            bd.nbc, a, b, parts, dp = nbc_term(fi, self._rep(self._nbc_normals), target,
                                               w.nbc, t1)
            put("nbc", a, b)
            bd.components.update(parts)
            g_extra["p"] = g_extra.get("p", 0.0) + dp

        i = self.idx["dbc"]
        if len(i):
            bd.dbc, a, b, parts = dbc_term(f.take(i), self._rep(self._dbc_targets),
                                           self._rep(self._dbc_mask), w.dbc)
            put("dbc", a, b)
            bd.components.update(parts)

        i = self.idx["contact"]
        if len(i):
            fi = f.take(i)
            n, tau = self._rep(self._c_normals), self._rep(self._c_tangents)
            ny_abs = np.abs(n[:, 1])
            g = (self._rep(self._c_yref) + fi.F[:, UY]) / ny_abs
            sig = fi.F[:, [SXX, SYY, SXY]]
            p_n, t_tau = ct.traction_decompose(sig, n, tau)
            a = np.zeros_like(fi.F)
            bd.fs = ct.fs_loss(t_tau, w.fs)
            dt = 2.0 * w.fs * t_tau / len(i)
            val, dg, dp, parts = ct.kkt_loss_and_grad(self.contact.method, g, p_n)
            bd.kkt = val
            bd.components.update(parts)
            bd.components["fs"] = bd.fs / w.fs if w.fs else float(np.mean(t_tau ** 2))
            nx, nyv = n[:, 0], n[:, 1]
            tx, ty = tau[:, 0], tau[:, 1]
            a[:, UY] += dg / ny_abs
            a[:, SXX] += dp * nx * nx + dt * nx * tx
            a[:, SYY] += dp * nyv * nyv + dt * nyv * ty
            a[:, SXY] += dp * 2 * nx * nyv + dt * (nyv * tx + nx * ty)
            put("contact", a, np.zeros_like(fi.dF))

        i = self.idx["exp"]
        if len(i):
            bd.exp, a, b, parts = exp_term(f.take(i), self._rep(self.data.values),
                                           self._rep(self.data.mask), w.exp)
            put("exp", a, b)
            bd.components.update(parts)

        for t in ("pde", "dbc", "nbc", "exp", "fs", "kkt"):
            if not np.isfinite(getattr(bd, t)):
                raise EvaluationError(f"non-finite loss term {t!r}")
        self.last = bd
        return FieldAdjoint(bd.total, gF, gdF, g_extra)

    def loss_and_grad(self, params: NetworkParams, kernels=None) -> tuple[float, np.ndarray]:
        return loss_gradient(self.field_loss, params, self.transform, self.x, kernels,
                             self.workspace)

    def breakdown(self, params: NetworkParams) -> LossBreakdown:
        self.field_loss(evaluate_fields(params, self.transform, self.x,
                                        workspace=self.workspace))
        return self.last
