"""Plane-strain linear elasticity in mixed form: residuals and MSE loss terms.

Each ``*_term`` function works on a :class:`~contact_pinn.network.Fields`
batch and returns the weighted loss value together with its adjoint
(d loss / d fields), so the composite loss can be differentiated exactly
without a general autodiff tape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import SXX, SXY, SYY, UX, UY, Fields, OUTPUT_NAMES


class MaterialError(ValueError):
    pass


def lame_from_engineering(E: float, nu: float) -> tuple[float, float]:
    """(lambda, mu) from Young's modulus and Poisson's ratio."""
    if not (E > 0):
        raise MaterialError(f"invalid material: Young's modulus must be > 0, got {E}")
    if not (0.0 <= nu < 0.5):
        raise MaterialError(f"invalid material: Poisson's ratio must be in [0, 0.5), got {nu}")
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return lam, mu


@dataclass(frozen=True)
class MaterialParams:
    E: float
    nu: float

    def __post_init__(self):
        lame_from_engineering(self.E, self.nu)

    @property
    def lam(self) -> float:
        return lame_from_engineering(self.E, self.nu)[0]

    @property
    def mu(self) -> float:
        return lame_from_engineering(self.E, self.nu)[1]


def strain_from_grad(grad_u) -> np.ndarray:
    """(eps_xx, eps_yy, eps_xy) from ``grad_u[..., i, j] = d u_i / d x_j``."""
    g = np.asarray(grad_u, dtype=np.float64)
    return np.stack([g[..., 0, 0], g[..., 1, 1], 0.5 * (g[..., 0, 1] + g[..., 1, 0])], axis=-1)


def constitutive_residual(sigma, strain, mat: MaterialParams) -> np.ndarray:
    """sigma - C : eps under plane strain, componentwise (xx, yy, xy)."""
    s = np.asarray(sigma, dtype=np.float64)
    e = np.asarray(strain, dtype=np.float64)
    lam, mu = mat.lam, mat.mu
    return np.stack([
        s[..., 0] - (lam + 2 * mu) * e[..., 0] - lam * e[..., 1],
        s[..., 1] - lam * e[..., 0] - (lam + 2 * mu) * e[..., 1],
        s[..., 2] - 2 * mu * e[..., 2],
    ], axis=-1)


def balance_residual(dsxx_dx, dsxy_dy, dsxy_dx, dsyy_dy, body_force=(0.0, 0.0)) -> np.ndarray:
    """div(sigma) + b. Body forces are zero in every benchmark."""
    bx, by = body_force
    return np.stack([np.asarray(dsxx_dx) + dsxy_dy + bx, np.asarray(dsxy_dx) + dsyy_dy + by], axis=-1)


def sigma_zz(sxx, syy, nu: float):
    """Out-of-plane stress for reporting only; never part of the loss."""
    return nu * (np.asarray(sxx) + np.asarray(syy))


def traction(sigma: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """sigma . n for rows of (sxx, syy, sxy) and unit normals."""
    s = np.asarray(sigma)
    n = np.asarray(normals)
    return np.stack([s[..., 0] * n[..., 0] + s[..., 2] * n[..., 1],
                     s[..., 2] * n[..., 0] + s[..., 1] * n[..., 1]], axis=-1)


# loss weights and breakdown ---------------------------------------------

@dataclass
class LossWeights:
    """Per-component weights; BE x/y first, then the three SS rows."""

    pde: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    dbc: tuple[float, ...] = (1.0, 1.0)
    nbc: tuple[float, ...] = (1.0, 1.0)
    exp: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    fs: float = 1.0
    kkt: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        for name in ("pde", "dbc", "nbc", "exp", "kkt"):
            setattr(self, name, tuple(float(v) for v in getattr(self, name)))
        self.fs = float(self.fs)
        lengths = {"pde": 5, "dbc": 2, "nbc": 2, "exp": 5, "kkt": 3}
        for name, n in lengths.items():
            vals = getattr(self, name)
            if len(vals) > n:
                raise ValueError(f"{name} takes at most {n} weights")
        allv = [*self.pde, *self.dbc, *self.nbc, *self.exp, self.fs, *self.kkt]
        if not all(np.isfinite(v) and v >= 0 for v in allv):
            raise ValueError("loss weights must be finite and non-negative")

    @classmethod
    def zeros(cls) -> "LossWeights":
        return cls((0.0,) * 5, (0.0,) * 2, (0.0,) * 2, (0.0,) * 5, 0.0, (0.0,) * 3)

    def to_dict(self) -> dict:
        return {"pde": list(self.pde), "dbc": list(self.dbc), "nbc": list(self.nbc),
                "exp": list(self.exp), "fs": self.fs, "kkt": list(self.kkt)}


TERMS = ("pde", "dbc", "nbc", "exp", "fs", "kkt")


@dataclass
class LossBreakdown:
    pde: float = 0.0
    dbc: float = 0.0
    nbc: float = 0.0
    exp: float = 0.0
    fs: float = 0.0
    kkt: float = 0.0
    components: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.pde + self.dbc + self.nbc + self.exp + self.fs + self.kkt

    def to_dict(self) -> dict:
        d = {t: getattr(self, t) for t in TERMS}
        d["total"] = self.total
        return d


def _mse(r: np.ndarray) -> float:
    return float(np.mean(r * r)) if r.size else 0.0


def _zero_adjoint(f: Fields):
    return np.zeros_like(f.F), np.zeros_like(f.dF)


# term functions (value + adjoint) ---------------------------------------

def pde_residuals(f: Fields, mat: MaterialParams) -> np.ndarray:
    """(n, 5): BE x, BE y, SS xx, SS yy, SS xy."""
    dx, dy = f.dF[0], f.dF[1]
    be = balance_residual(dx[:, SXX], dy[:, SXY], dx[:, SXY], dy[:, SYY])
    grad_u = np.empty((f.n, 2, 2))
    grad_u[:, 0, 0], grad_u[:, 0, 1] = dx[:, UX], dy[:, UX]
    grad_u[:, 1, 0], grad_u[:, 1, 1] = dx[:, UY], dy[:, UY]
    ss = constitutive_residual(f.F[:, [SXX, SYY, SXY]], strain_from_grad(grad_u), mat)
    return np.concatenate([be, ss], axis=1)


def pde_term(f: Fields, mat: MaterialParams, w):
    if f.n == 0:
        raise ValueError("empty collocation set")
    r = pde_residuals(f, mat)
    w = np.asarray(w, dtype=np.float64)
    comps = np.mean(r * r, axis=0)
    value = float(np.dot(w, comps))
    a = 2.0 * w * r / f.n     # d value / d r
    gF, gdF = _zero_adjoint(f)
    lam, mu = mat.lam, mat.mu
    gx, gy = gdF[0], gdF[1]
    # BE
    gx[:, SXX] += a[:, 0]
    gy[:, SXY] += a[:, 0]
    gx[:, SXY] += a[:, 1]
    gy[:, SYY] += a[:, 1]
    # SS
    gF[:, SXX] += a[:, 2]
    gF[:, SYY] += a[:, 3]
    gF[:, SXY] += a[:, 4]
    gx[:, UX] -= (lam + 2 * mu) * a[:, 2] + lam * a[:, 3]
    gy[:, UY] -= lam * a[:, 2] + (lam + 2 * mu) * a[:, 3]
    gy[:, UX] -= mu * a[:, 4]
    gx[:, UY] -= mu * a[:, 4]
    parts = {f"pde_{i + 1}": float(c) for i, c in enumerate(comps)}
    return value, gF, gdF, parts


def dbc_term(f: Fields, targets: np.ndarray, mask: np.ndarray, w):
    """Displacement BCs; ``mask[:, c]`` selects points constraining u_c."""
    gF, gdF = _zero_adjoint(f)
    value, parts = 0.0, {}
    for c, comp in enumerate((UX, UY)):
        sel = mask[:, c]
        m = int(sel.sum())
        if m == 0 or w[c] == 0:
            parts[f"dbc_{c + 1}"] = _mse(f.F[sel, comp] - targets[sel, c])
            continue
        r = f.F[sel, comp] - targets[sel, c]
        mse = _mse(r)
        parts[f"dbc_{c + 1}"] = mse
        value += w[c] * mse
        gF[sel, comp] += 2.0 * w[c] * r / m
    return value, gF, gdF, parts


def nbc_term(f: Fields, normals: np.ndarray, targets: np.ndarray, w,
             target_dp: np.ndarray | None = None):
    """Soft traction BCs ``sigma.n = t_hat``.

    ``target_dp`` (n, 2) is d t_hat / d p for loads that scale with a trainable
    pressure; the returned ``dp`` is the direct derivative through the target.
    """
    gF, gdF = _zero_adjoint(f)
    if f.n == 0:
        return 0.0, gF, gdF, {"nbc_1": 0.0, "nbc_2": 0.0}, 0.0
    sig = f.F[:, [SXX, SYY, SXY]]
    r = traction(sig, normals) - targets
    nx, ny = normals[:, 0], normals[:, 1]
    value, dp, parts = 0.0, 0.0, {}
    for c in range(2):
        mse = _mse(r[:, c])
        parts[f"nbc_{c + 1}"] = mse
        value += w[c] * mse
        a = 2.0 * w[c] * r[:, c] / f.n
        if c == 0:
            gF[:, SXX] += a * nx
            gF[:, SXY] += a * ny
        else:
            gF[:, SXY] += a * nx
            gF[:, SYY] += a * ny
        if target_dp is not None:
            dp -= float(np.sum(a * target_dp[:, c]))
    return value, gF, gdF, parts, dp


def exp_term(f: Fields, data: np.ndarray, mask: np.ndarray, w):
    """Data misfit per output component over the points where it is observed."""
    gF, gdF = _zero_adjoint(f)
    value, parts = 0.0, {}
    for c in range(5):
        sel = mask[:, c]
        m = int(sel.sum())
        if m == 0:
            continue
        r = f.F[sel, c] - data[sel, c]
        mse = _mse(r)
        parts[f"exp_{OUTPUT_NAMES[c]}"] = mse
        value += w[c] * mse
        gF[sel, c] += 2.0 * w[c] * r / m
    return value, gF, gdF, parts


# experimental data ------------------------------------------------------

@dataclass
class ExperimentalData:
    """Observed fields at points; NaN / mask False marks a missing value."""

    xy: np.ndarray
    values: np.ndarray     # (n, 5) ux, uy, sxx, syy, sxy
    mask: np.ndarray       # (n, 5) bool

    def __post_init__(self):
        self.values = np.where(self.mask, self.values, 0.0)

    @property
    def n(self) -> int:
        return self.xy.shape[0]


DATA_COLUMNS = ("x", "y", *OUTPUT_NAMES)


def load_experimental_csv(path: str | Path) -> ExperimentalData:
    """Read ``x,y[,ux,uy,sxx,syy,sxy][,mask_<c>...]``.

    A field column that is absent, empty, or whose ``mask_<c>`` flag is 0
    is excluded from the data loss.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"experimental data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: header must contain x and y")
        xy, vals, mask = [], [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                xy.append((float(row["x"]), float(row["y"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad coordinate") from exc
            v, m = [], []
            for c in OUTPUT_NAMES:
                raw = (row.get(c) or "").strip()
                flag = (row.get(f"mask_{c}") or "1").strip()
                ok = raw != "" and flag not in ("0", "false", "False")
                v.append(float(raw) if ok else 0.0)
                m.append(ok)
            vals.append(v)
            mask.append(m)
    if not xy:
        raise ValueError(f"{path}: no data rows")
    return ExperimentalData(np.array(xy), np.array(vals), np.array(mask, dtype=bool))


def save_experimental_csv(data: ExperimentalData, path: str | Path) -> None:
    from .io import atomic_write_text, fmt

    header = [*DATA_COLUMNS, *(f"mask_{c}" for c in OUTPUT_NAMES)]
    lines = [",".join(header)]
    for xy, v, m in zip(data.xy, data.values, data.mask):
        cells = [fmt(xy[0]), fmt(xy[1])]
        cells += [fmt(val) if ok else "" for val, ok in zip(v, m)]
        cells += ["1" if ok else "0" for ok in m]
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")
