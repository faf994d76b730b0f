"""Analytical oracles, error metrics and runnable benchmark cases.

Cases: ``lame`` (pressurised thick cylinder, no contact), ``block`` (square
block pressed onto a rigid surface) and ``hertz`` (half-cylinder on a rigid
surface, modelled on its symmetric quarter). Modes: ``forward``,
``data_enhanced``, ``inverse`` (the applied pressure is trainable) and
``surrogate`` (pressure as third network input).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
from scipy.integrate import trapezoid

from .contact import KKTMethod, traction_decompose
from .elasticity import ExperimentalData, LossWeights, MaterialParams
from .geometry import (CONTACT, SYMMETRY, PointSet, StructuredMesh, contact_arc_points,
                       sample_half_cylinder, sample_quarter_annulus, sample_unit_square)
from .network import (SXX, SXY, SYY, UX, UY, Architecture, ComponentTransform, NetworkParams,
                      OutputTransform, forward, init_glorot_uniform, minus_pressure)
from .optimize import AdamConfig, LbfgsConfig, TrainRecord, TrainResult, train_two_phase
from .problem import ContactProblem, ContactSpec, NeumannBC, pressure_traction

CASES = ("lame", "block", "hertz")
MODES = ("forward", "data_enhanced", "inverse", "surrogate")


# analytical oracles -------------------------------------------------------

def _real_or_complex(a) -> np.ndarray:
    # complex inputs pass through so oracles can be complex-step differentiated
    a = np.asarray(a)
    return a if np.iscomplexobj(a) else a.astype(np.float64)


def lame_analytical(r, R_i: float, R_o: float, p: float, E: float, nu: float):
    """Thick cylinder under inner pressure, plane strain: ``(s_rr, s_aa, s_ra, u_r)``."""
    r = _real_or_complex(r)
    tol = 1e-12 * R_o
    if np.any(r.real < R_i - tol) or np.any(r.real > R_o + tol):
        raise ValueError("radius outside the annulus")
    c = R_i ** 2 * p / (R_o ** 2 - R_i ** 2)
    s_rr = c * (1.0 - R_o ** 2 / r ** 2)
    s_aa = c * (1.0 + R_o ** 2 / r ** 2)
    u_r = c * (1.0 + nu) * ((1.0 - 2.0 * nu) * r + R_o ** 2 / r) / E
    return s_rr, s_aa, np.zeros_like(r), u_r


def lame_fields(xy, R_i, R_o, p, E, nu) -> np.ndarray:
    """Cartesian oracle fields ``(ux, uy, sxx, syy, sxy)`` at ``xy``."""
    xy = _real_or_complex(xy)
    r = np.sqrt(xy[:, 0] ** 2 + xy[:, 1] ** 2)
    c, s = xy[:, 0] / r, xy[:, 1] / r
    s_rr, s_aa, _, u_r = lame_analytical(r, R_i, R_o, p, E, nu)
    return np.stack([u_r * c, u_r * s, s_rr * c * c + s_aa * s * s,
                     s_rr * s * s + s_aa * c * c, (s_rr - s_aa) * c * s], axis=1)


def block_analytical(x, y, p: float, E: float, nu: float):
    """Uniaxial compression of a block on a frictionless surface: ``(ux, uy, syy, sxy)``."""
    x = _real_or_complex(x)
    y = _real_or_complex(y)
    ux = (p / E) * nu * (1.0 + nu) * x
    uy = -(p / E) * (1.0 - nu ** 2) * y
    return ux, uy, np.full_like(x, -p), np.zeros_like(x)


def block_fields(xy, p, E, nu) -> np.ndarray:
    xy = _real_or_complex(xy)
    ux, uy, syy, sxy = block_analytical(xy[:, 0], xy[:, 1], p, E, nu)
    return np.stack([ux, uy, np.zeros_like(ux), syy, sxy], axis=1)


def hertz_half_width(R: float, p: float, E: float, nu: float) -> float:
    return 2.0 * math.sqrt(2.0 * R * R * p * (1.0 - nu ** 2) / (E * math.pi))


def hertz_pressure(x, R: float, p: float, E: float, nu: float):
    """Hertz contact pressure (compression positive); zero outside ``|x| <= b``."""
    b = hertz_half_width(R, p, E, nu)
    x = np.asarray(x, dtype=np.float64)
    inside = np.abs(x) <= b
    return np.where(inside, 4.0 * R * p / (math.pi * b * b)
                    * np.sqrt(np.clip(b * b - x * x, 0.0, None)), 0.0)


# error metrics --------------------------------------------------------------

U_COLS = (UX, UY)
S_COLS = (SXX, SYY, SXY)


def relative_l2_vector(pred, ref) -> float:
    """``||pred - ref|| / ||ref||`` over all points and the given columns."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    den = math.sqrt(float(np.sum(ref * ref)))
    if den == 0.0:
        raise ValueError("zero reference norm")
    return math.sqrt(float(np.sum((pred - ref) ** 2))) / den


def _cell_integral(values: np.ndarray, mesh: StructuredMesh) -> float:
    """Integral of a nodal field with the bilinear-corner (trapezoid) rule per cell."""
    areas = mesh.cell_areas()
    if np.any(areas <= 0):
        raise ValueError("degenerate cells in test mesh")
    cell_vals = values[mesh.cells]
    if cell_vals.ndim == 3:
        cell_vals = cell_vals.sum(axis=2)
    return float(np.sum(areas * cell_vals.mean(axis=1)))


def relative_l2_integral(pred, ref, mesh: StructuredMesh) -> float:
    """Quadrature form of the relative L2 error on a structured test mesh."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    den = _cell_integral(ref * ref, mesh)
    if den == 0.0:
        raise ValueError("zero reference norm")
    return math.sqrt(_cell_integral((pred - ref) ** 2, mesh) / den)


def relative_l2_arc(pred, ref, s) -> float:
    """Relative L2 error along a curve parametrised by arc length ``s``."""
    den = trapezoid(np.asarray(ref) ** 2, s)
    if den == 0.0:
        raise ValueError("zero reference norm")
    return math.sqrt(trapezoid((np.asarray(pred) - ref) ** 2, s) / den)


def polar_transform(u, sigma, x, y):
    """Rotate displacement ``(ux, uy)`` and stress ``(sxx, syy, sxy)`` to polar components."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r = np.hypot(x, y)
    if np.any(r == 0):
        raise ValueError("polar transform undefined at the origin")
    c, s = x / r, y / r
    u = np.asarray(u, dtype=np.float64)
    sig = np.asarray(sigma, dtype=np.float64)
    sxx, syy, sxy = sig[..., 0], sig[..., 1], sig[..., 2]
    s_rr = sxx * c * c + syy * s * s + 2 * sxy * c * s
    s_aa = sxx * s * s + syy * c * c - 2 * sxy * c * s
    s_ra = (syy - sxx) * c * s + sxy * (c * c - s * s)
    u_r = u[..., 0] * c + u[..., 1] * s
    return u_r, s_rr, s_aa, s_ra


# output transforms ----------------------------------------------------------

def _lin(fx: float, fy: float, c: float = 0.0):
    """Distance function ``fx*x + fy*y + c``."""
    def h(x, y):
        return fx * x + fy * y + c, np.full_like(x, fx), np.full_like(x, fy)
    return h


def _xy(x, y):
    return x * y, y, x


def lame_transform(E: float) -> OutputTransform:
    return OutputTransform([
        ComponentTransform(distance=_lin(1, 0), scale=1 / E),
        ComponentTransform(distance=_lin(0, 1), scale=1 / E),
        ComponentTransform(),
        ComponentTransform(),
        ComponentTransform(distance=_xy),
    ], name="lame")


def block_transform(p: float, l: float) -> OutputTransform:
    def sxy_h(x, y):
        return x * (l - y) * (l - x), (l - y) * (l - 2 * x), -x * (l - x)

    return OutputTransform([
        ComponentTransform(distance=_lin(1, 0)),
        ComponentTransform(),
        ComponentTransform(distance=_lin(-1, 0, l)),
        ComponentTransform(offset=minus_pressure, distance=_lin(0, -1, l)),
        ComponentTransform(distance=sxy_h),
    ], pressure=p, name="block")


def hertz_transform(p: float, E: float, symmetric: bool = True) -> OutputTransform:
    """Quarter model: ``ux`` and ``sxy`` vanish on the symmetry edge ``x = 0``.

    The full half-disk has no symmetry edge, so only the loaded top keeps hard
    constraints (its horizontal rigid motion is then fixed only weakly).
    """
    if symmetric:
        ux = ComponentTransform(distance=_lin(-1, 0), scale=1 / E)
        sxy = ComponentTransform(distance=_xy)
    else:
        ux = ComponentTransform(scale=1 / E)
        sxy = ComponentTransform(distance=_lin(0, -1))
    return OutputTransform([
        ux,
        ComponentTransform(scale=1 / E),
        ComponentTransform(),
        ComponentTransform(offset=minus_pressure, distance=_lin(0, -1)),
        sxy,
    ], pressure=p, name="hertz")


# configuration ---------------------------------------------------------------

_BASE = {
    "lame": {
        "material": {"E": 2000.0, "nu": 0.3},
        "load": {"p": 1.0},
        "geometry": {"R_i": 1.0, "R_o": 2.0},
        "points": {"interior": 262, "boundary": 68},
        "network": {"hidden_layers": [50, 50, 50]},
        "kkt": None,
        "weights": {},
    },
    "block": {
        "material": {"E": 1.33, "nu": 0.33},
        "load": {"p": 0.1},
        "geometry": {"l": 1.0},
        "points": {"interior": 434, "boundary": 80},
        "network": {"hidden_layers": [50] * 5},
        "kkt": {"method": "fb", "weights": [1.0], "delta_g": 10.0, "delta_p": 100.0},
        "weights": {},
    },
    "hertz": {
        "material": {"E": 200.0, "nu": 0.3},
        "load": {"p": 0.5},
        "geometry": {"R": 1.0, "alpha_deg": 15.0, "symmetric": True},
        "points": {"interior": 45000, "boundary": 1435, "contact": 700,
                   "refine": [[0.2, 1500]]},
        "network": {"hidden_layers": [50] * 5},
        "kkt": {"method": "fb", "weights": [1e3], "delta_g": 10.0, "delta_p": 100.0},
        "weights": {},
    },
}

_HERTZ_EXP_WEIGHTS = [1e4, 1e4, 0.1, 0.1, 0.1]

_DESK_HERTZ_POINTS = {"interior": 4200, "boundary": 400, "contact": 200,
                      "refine": [[0.2, 1500]]}
_SURROGATE_POINTS = {"interior": 1200, "boundary": 246, "contact": 120,
                     "refine": [[0.2, 500]]}


def default_config(case: str, mode: str = "forward", preset: str = "desk") -> dict:
    """Complete configuration for ``case``/``mode`` under the ``desk`` or ``full`` preset."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if preset not in ("desk", "full"):
        raise ValueError(f"unknown preset {preset!r}")
    if case != "hertz" and mode in ("inverse", "surrogate"):
        raise ValueError(f"mode {mode!r} is only available for the hertz case")
    cfg = copy.deepcopy(_BASE[case])
    cfg.update({"case": case, "mode": mode, "preset": preset, "seed": 0, "log_every": 10,
                "schedule": {"adam": {"lr": 1e-3, "epochs": 2000},
                             "lbfgs": {"history": 100, "max_iter": 15000, "grad_tol": 1e-8,
                                       "rel_loss_tol": 1e-9}}})
    if mode in ("data_enhanced", "inverse"):
        cfg["data"] = {"path": None}
        if case == "hertz":
            cfg["weights"]["exp"] = list(_HERTZ_EXP_WEIGHTS)
    if mode == "inverse":
        cfg["inverse"] = {"initial_guess": 0.1}
    if mode == "surrogate":
        cfg["network"]["hidden_layers"] = [75] * 8
        cfg["kkt"]["weights"] = [1e4]
        cfg["points"] = dict(_SURROGATE_POINTS)
        cfg["surrogate"] = {"pressure_range": [0.2, 1.0], "chunks": 5,
                            "eval_pressures": [0.45, 0.98], "diagnostic_pressures": [1.5]}
    if preset == "desk":
        cfg["network"]["hidden_layers"] = [max(1, w // 2) for w in cfg["network"]["hidden_layers"]]
        cfg["schedule"]["lbfgs"]["max_iter"] = 3000
        if case == "hertz" and mode != "surrogate":
            cfg["points"] = dict(_DESK_HERTZ_POINTS)
    return cfg


def merge_config(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge_config(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(doc: dict) -> dict:
    """Fill a (possibly partial) config document from the case/mode/preset defaults."""
    base = default_config(doc["case"], doc.get("mode", "forward"), doc.get("preset", "desk"))
    return merge_config(base, doc)


# case assembly ----------------------------------------------------------------

@dataclass
class CaseSetup:
    config: dict
    material: MaterialParams
    points: PointSet
    transform: OutputTransform
    problem: ContactProblem
    arch: Architecture
    extras: dict[str, float] = field(default_factory=dict)

    def init_params(self) -> NetworkParams:
        return init_glorot_uniform(self.arch, int(self.config["seed"]), self.extras or None)


def kkt_from_config(k: dict | None) -> KKTMethod | None:
    if k is None:
        return None
    return KKTMethod(k["method"], tuple(k["weights"]), k.get("delta_g", 10.0),
                     k.get("delta_p", 100.0))


def weights_from_config(w: dict) -> LossWeights:
    return LossWeights(**{k: v for k, v in w.items()})


def sample_points(cfg: dict) -> PointSet:
    case, g, pts, seed = cfg["case"], cfg["geometry"], cfg["points"], int(cfg["seed"])
    if case == "lame":
        return sample_quarter_annulus(g["R_i"], g["R_o"], pts, seed)
    if case == "block":
        return sample_unit_square(g["l"], pts, seed)
    refine = [tuple(level) for level in pts.get("refine", [])]
    counts = {k: pts[k] for k in ("interior", "boundary", "contact") if k in pts}
    return sample_half_cylinder(g["R"], g["alpha_deg"], counts, seed,
                                symmetric=g.get("symmetric", True), refine=refine)


def make_transform(cfg: dict) -> OutputTransform:
    """The case's hard-constraint output transform for a resolved config."""
    case, E, p = cfg["case"], float(cfg["material"]["E"]), float(cfg["load"]["p"])
    if case == "lame":
        t = lame_transform(E)
        t.pressure = p
        return t
    if case == "block":
        return block_transform(p, cfg["geometry"]["l"])
    return hertz_transform(p, E, cfg["geometry"].get("symmetric", True))


def build_case(cfg: dict, data: ExperimentalData | None = None,
               points: PointSet | None = None) -> CaseSetup:
    """Assemble material, points, transform and loss for a resolved config."""
    case, mode = cfg["case"], cfg["mode"]
    mat = MaterialParams(cfg["material"]["E"], cfg["material"]["nu"])
    p = float(cfg["load"]["p"])
    ps = points if points is not None else sample_points(cfg)
    weights = weights_from_config(cfg.get("weights", {}))
    kkt = kkt_from_config(cfg.get("kkt"))
    transform = make_transform(cfg)
    if case == "lame":
        neumann = [NeumannBC("NBC_1", pressure_traction), NeumannBC("NBC_2")]
        contact = None
    elif case == "block":
        neumann = [NeumannBC("NBC_2")]
        contact = ContactSpec(CONTACT, kkt)
    else:
        neumann = [NeumannBC("NBC_2")]
        contact = ContactSpec(CONTACT, kkt)
    if mode in ("data_enhanced", "inverse") and data is None:
        raise ValueError(f"mode {mode!r} needs experimental data")
    extras: dict[str, float] = {}
    pressures = None
    n_inputs = 2
    if mode == "inverse":
        extras["p"] = float(cfg["inverse"]["initial_guess"])
    if mode == "surrogate":
        sc = cfg["surrogate"]
        k = int(sc["chunks"])
        if k < 1:
            raise ValueError("surrogate mode needs at least one chunk")
        lo, hi = sc["pressure_range"]
        n_inputs = 3
        data = None
        # pressure draws use their own stream so chunk k's pressures do not
        # depend on how many chunks are requested
        n_spatial = _count_spatial(ps, neumann, contact)
        rng = np.random.default_rng([int(cfg["seed"]), 4])
        pressures = rng.uniform(lo, hi, size=(k, n_spatial))
    problem = ContactProblem(ps, transform, mat, weights, neumann, (), contact,
                             data if mode in ("data_enhanced", "inverse") else None, pressures)
    arch = Architecture(n_inputs, tuple(cfg["network"]["hidden_layers"]))
    return CaseSetup(cfg, mat, ps, transform, problem, arch, extras)


def _count_spatial(ps: PointSet, neumann, contact) -> int:
    n = len(ps.interior)
    tags = {bc.tag for bc in neumann}
    n += int(sum(np.sum(ps.tags == t) for t in tags))
    if contact is not None:
        n += int(np.sum(ps.tags == contact.tag))
    return n


# evaluation ------------------------------------------------------------------------

@dataclass
class ErrorReport:
    case: str
    mode: str
    seed: int
    preset: str
    metrics: dict = field(default_factory=dict)
    training: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"case": self.case, "mode": self.mode, "seed": self.seed, "preset": self.preset,
                "metrics": self.metrics, "training": self.training}


def field_errors(pred: np.ndarray, ref: np.ndarray, mesh: StructuredMesh | None) -> dict:
    out = {
        "rel_l2_u": relative_l2_vector(pred[:, U_COLS], ref[:, U_COLS]),
        "rel_l2_sigma": relative_l2_vector(pred[:, S_COLS], ref[:, S_COLS]),
        "max_abs": {name: float(np.max(np.abs(pred[:, i] - ref[:, i])))
                    for i, name in enumerate(("ux", "uy", "sxx", "syy", "sxy"))},
    }
    if mesh is not None:
        out["integral_l2_u"] = relative_l2_integral(pred[:, U_COLS], ref[:, U_COLS], mesh)
        out["integral_l2_sigma"] = relative_l2_integral(pred[:, S_COLS], ref[:, S_COLS], mesh)
    return out


@dataclass
class PressureProfile:
    x: np.ndarray
    s: np.ndarray          # arc length from the start of the sampled arc
    pc: np.ndarray         # predicted pressure, compression positive
    integral: float


def contact_pressure_profile(params: NetworkParams, transform: OutputTransform, arc_xy,
                             pressure: float | None = None) -> PressureProfile:
    """Predicted contact pressure ``-p_n`` along ordered arc points and its arc-length integral.

    Arc points lie on a circle centred at the origin, so the outward normal is
    the position direction. ``pressure`` is appended as a third input for
    surrogate networks.
    """
    arc_xy = np.asarray(arc_xy, dtype=np.float64)
    x = arc_xy if pressure is None else np.column_stack(
        [arc_xy, np.full(len(arc_xy), float(pressure))])
    F = forward(params, transform, x)
    n = arc_xy / np.linalg.norm(arc_xy, axis=1, keepdims=True)
    tau = np.stack([-n[:, 1], n[:, 0]], axis=1)
    p_n, _ = traction_decompose(F[:, [SXX, SYY, SXY]], n, tau)
    seg = np.linalg.norm(np.diff(arc_xy, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    pc = -p_n
    return PressureProfile(arc_xy[:, 0], s, pc, float(trapezoid(pc, s)))


def detected_half_width(profile: PressureProfile, fraction: float = 0.05) -> float:
    """Largest ``|x|`` where the pressure is at least ``fraction`` of its maximum."""
    pmax = float(np.max(profile.pc))
    if pmax <= 0:
        return 0.0
    return float(np.max(np.abs(profile.x[profile.pc >= fraction * pmax])))


def hertz_contact_metrics(params, transform, cfg: dict, pressure: float,
                          surrogate: bool = False, n_arc: int = 2000, n_eval: int = 200) -> dict:
    g, mat = cfg["geometry"], cfg["material"]
    R, alpha = g["R"], g["alpha_deg"]
    sym = g.get("symmetric", True)
    extra_p = pressure if surrogate else None
    arc = contact_arc_points(R, alpha, n_arc, sym)
    prof = contact_pressure_profile(params, transform, arc, extra_p)
    b = hertz_half_width(R, pressure, mat["E"], mat["nu"])
    # profile error on uniform samples over the analytical contact width
    xs = np.linspace(-b, 0.0 if sym else b, n_eval)
    ev = np.stack([xs, -np.sqrt(R * R - xs * xs)], axis=1)
    ev_prof = contact_pressure_profile(params, transform, ev, extra_p)
    ref = hertz_pressure(xs, R, pressure, mat["E"], mat["nu"])
    return {
        "pressure": pressure,
        "integral": prof.integral,
        "integral_reference": R * pressure * (1.0 if sym else 2.0),
        "half_width": detected_half_width(prof),
        "half_width_reference": b,
        "profile_rel_l2": relative_l2_arc(ev_prof.pc, ref, ev_prof.s),
        "max_pressure": float(np.max(prof.pc)),
        "max_pressure_reference": 4 * R * pressure / (math.pi * b),
    }


def evaluate_case(setup: CaseSetup, params: NetworkParams) -> dict:
    cfg, case, mode = setup.config, setup.config["case"], setup.config["mode"]
    mat, p = cfg["material"], float(cfg["load"]["p"])
    ps = setup.points
    bd = setup.problem.breakdown(params)
    metrics: dict = {"loss": bd.to_dict(),
                     "pde_mse": float(sum(v for k, v in bd.components.items()
                                          if k.startswith("pde_")))}
    if case == "lame":
        g = cfg["geometry"]
        ref = lame_fields(ps.test, g["R_i"], g["R_o"], p, mat["E"], mat["nu"])
        metrics.update(field_errors(forward(params, setup.transform, ps.test), ref, ps.mesh))
    elif case == "block":
        ref = block_fields(ps.test, p, mat["E"], mat["nu"])
        metrics.update(field_errors(forward(params, setup.transform, ps.test), ref, ps.mesh))
    elif mode == "surrogate":
        sc = cfg["surrogate"]
        metrics["held_out"] = [hertz_contact_metrics(params, setup.transform, cfg, q, True)
                               for q in sc["eval_pressures"]]
        metrics["diagnostic"] = [hertz_contact_metrics(params, setup.transform, cfg, q, True)
                                 for q in sc.get("diagnostic_pressures", [])]
    else:
        metrics["contact"] = hertz_contact_metrics(params, setup.transform, cfg, p)
    if mode == "inverse":
        ident = float(params.extras["p"])
        metrics["identified"] = {"p": ident, "reference": p,
                                 "rel_error": abs(ident - p) / abs(p)}
    return metrics


@dataclass
class CaseResult:
    params: NetworkParams
    report: ErrorReport
    records: list[TrainRecord]
    train: TrainResult
    setup: CaseSetup


def run_case(cfg: dict, data: ExperimentalData | None = None, log_stream: TextIO | None = None,
             points: PointSet | None = None, kernels=None) -> CaseResult:
    """Train one benchmark configuration and evaluate it against its oracle."""
    cfg = resolve_config(cfg)
    setup = build_case(cfg, data, points)
    params = setup.init_params()
    problem = setup.problem

    def fun(flat):
        return problem.loss_and_grad(params.with_flat(flat), kernels)

    def extras_fn(flat):
        return {name: float(flat[params.extra_index(name)]) for name in params.extra_names}

    sch = cfg["schedule"]
    res = train_two_phase(fun, params.flat, AdamConfig(**sch["adam"]), LbfgsConfig(**sch["lbfgs"]),
                          log_stream, int(cfg.get("log_every", 10)),
                          term_fn=lambda: dict(problem.last.to_dict()) if problem.last else {},
                          extras_fn=extras_fn if params.extra_names else None)
    trained = params.with_flat(res.flat)
    trained.check_finite()
    report = ErrorReport(cfg["case"], cfg["mode"], int(cfg["seed"]), cfg["preset"],
                         evaluate_case(setup, trained),
                         {"final_loss": res.loss, "stop_reason": res.stop_reason,
                          "adam_epochs": res.adam_epochs,
                          "lbfgs_iterations": res.lbfgs_iterations})
    return CaseResult(trained, report, res.history, res, setup)


# synthetic measurement data -------------------------------------------------------

def sample_model_data(params: NetworkParams, transform: OutputTransform, points: PointSet,
                      n_interior: int = 100, n_boundary: int = 100, seed: int = 0,
                      components=(True,) * 5) -> ExperimentalData:
    """Pseudo-measurements: a trained model's fields at a random subset of points."""
    rng = np.random.default_rng(seed)
    ii = rng.choice(len(points.interior), min(n_interior, len(points.interior)), replace=False)
    bi = rng.choice(len(points.boundary), min(n_boundary, len(points.boundary)), replace=False)
    xy = np.concatenate([points.interior[np.sort(ii)], points.boundary[np.sort(bi)]])
    vals = forward(params, transform, xy)
    mask = np.tile(np.asarray(components, dtype=bool), (len(xy), 1))
    return ExperimentalData(xy, vals, mask)


def oracle_data(case: str, cfg: dict, xy) -> ExperimentalData:
    """Exact oracle fields at ``xy`` for the cases with closed-form solutions."""
    mat, p = cfg["material"], float(cfg["load"]["p"])
    xy = np.asarray(xy, dtype=np.float64)
    if case == "block":
        vals = block_fields(xy, p, mat["E"], mat["nu"])
    elif case == "lame":
        g = cfg["geometry"]
        vals = lame_fields(xy, g["R_i"], g["R_o"], p, mat["E"], mat["nu"])
    else:
        raise ValueError(f"no closed-form field oracle for {case!r}")
    return ExperimentalData(xy, vals, np.ones(vals.shape, dtype=bool))


__all__ = [n for n in dir() if not n.startswith("_")] + ["SYMMETRY"]
