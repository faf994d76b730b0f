"""Point samplers for the benchmark domains, structured test meshes, point CSV I/O.

Boundary points sit at the midpoints of equal-arc-length segments, so no
point lands on a corner where the normal would be ambiguous. Interior points
come from a jittered Cartesian grid clipped to the domain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .io import atomic_write_text, fmt

SYMMETRY = "SYMMETRY"
CONTACT = "CONTACT"
KINDS = ("interior", "boundary", "test")


def _valid_tag(tag: str) -> bool:
    if tag in (SYMMETRY, CONTACT):
        return True
    head, _, idx = tag.partition("_")
    return head in ("DBC", "NBC") and idx.isdigit()


def rotate_normal(normals: np.ndarray) -> np.ndarray:
    """Unit tangent: the normal rotated by +90 degrees, (-n_y, n_x)."""
    return np.stack([-normals[:, 1], normals[:, 0]], axis=1)


@dataclass
class StructuredMesh:
    """Quadrilateral mesh over the test points (cells index into ``nodes``)."""

    nodes: np.ndarray
    cells: np.ndarray      # (m, 4) counter-clockwise node indices

    def cell_areas(self) -> np.ndarray:
        p = self.nodes[self.cells]              # (m, 4, 2)
        x, y = p[..., 0], p[..., 1]
        return 0.5 * np.abs(np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1))


@dataclass
class PointSet:
    interior: np.ndarray
    boundary: np.ndarray
    tags: np.ndarray
    normals: np.ndarray
    yref: np.ndarray
    test: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    mesh: StructuredMesh | None = None

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=np.float64).reshape(-1, 2)
        self.boundary = np.asarray(self.boundary, dtype=np.float64).reshape(-1, 2)
        self.tags = np.asarray(self.tags, dtype=object)
        self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 2)
        self.yref = np.asarray(self.yref, dtype=np.float64).reshape(-1)
        self.test = np.asarray(self.test, dtype=np.float64).reshape(-1, 2)
        nb = len(self.boundary)
        if not (len(self.tags) == len(self.normals) == len(self.yref) == nb):
            raise ValueError("boundary arrays must have matching lengths")

    @property
    def tangents(self) -> np.ndarray:
        return rotate_normal(self.normals)

    def select(self, tag: str) -> np.ndarray:
        """Boolean mask of boundary points carrying ``tag``."""
        return self.tags == tag

    def tag_names(self) -> list[str]:
        return sorted(set(self.tags.tolist()))

    def counts(self) -> dict[str, int]:
        return {"interior": len(self.interior), "boundary": len(self.boundary),
                "test": len(self.test)}

    def equals(self, other: "PointSet") -> bool:
        return (np.array_equal(self.interior, other.interior)
                and np.array_equal(self.boundary, other.boundary)
                and list(self.tags) == list(other.tags)
                and np.array_equal(self.normals, other.normals)
                and np.array_equal(self.yref, other.yref)
                and np.array_equal(self.test, other.test))


# helpers ----------------------------------------------------------------

def _midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def _segment(a, b, n: int, normal, tag: str, obstacle_y: float):
    t = _midpoints(n)[:, None]
    a, b = np.asarray(a, float), np.asarray(b, float)
    pts = a + t * (b - a)
    nrm = np.tile(np.asarray(normal, float), (n, 1))
    return pts, [tag] * n, nrm, pts[:, 1] - obstacle_y


def _arc(center, radius, th0, th1, n: int, outward: bool, tag: str, obstacle_y: float,
         spacing: np.ndarray | None = None):
    t = _midpoints(n) if spacing is None else spacing
    th = th0 + t * (th1 - th0)
    c = np.asarray(center, float)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    pts = c + radius * dirs
    nrm = dirs if outward else -dirs
    return pts, [tag] * n, nrm, pts[:, 1] - obstacle_y


def _jittered_grid(inside, bbox, target: int, area: float, rng_seed: int,
                   jitter: float = 0.3) -> np.ndarray:
    """Jittered grid points inside the domain, spacing tuned so the count is near ``target``."""
    (x0, x1), (y0, y1) = bbox
    h = math.sqrt(area / max(target, 1))
    best = None
    for _ in range(30):
        nx = max(1, int(math.ceil((x1 - x0) / h)))
        ny = max(1, int(math.ceil((y1 - y0) / h)))
        hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
        gx, gy = np.meshgrid(x0 + hx * (np.arange(nx) + 0.5), y0 + hy * (np.arange(ny) + 0.5))
        rng = np.random.default_rng(rng_seed)
        jit = rng.uniform(-jitter, jitter, size=(gx.size, 2)) * (hx, hy)
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1) + jit
        pts = pts[inside(pts, 0.25 * min(hx, hy))]
        if best is None or abs(len(pts) - target) < abs(len(best) - target):
            best = pts
        if len(pts) == target or len(pts) == 0:
            break
        h *= math.sqrt(len(pts) / target)
    return best


def _split(total: int, lengths: list[float]) -> list[int]:
    """Distribute ``total`` points over edges proportional to length (each >= 1)."""
    lengths = np.asarray(lengths, float)
    raw = total * lengths / lengths.sum()
    out = np.maximum(1, np.floor(raw).astype(int))
    while out.sum() < total:
        out[np.argmax(raw - out)] += 1
    while out.sum() > total:
        out[np.argmax(out)] -= 1
    return out.tolist()


def _assemble(parts, interior, test=None, mesh=None) -> PointSet:
    pts = np.concatenate([p[0] for p in parts])
    tags = sum((p[1] for p in parts), [])
    nrm = np.concatenate([p[2] for p in parts])
    yref = np.concatenate([p[3] for p in parts])
    return PointSet(interior, pts, tags, nrm, yref,
                    test if test is not None else np.zeros((0, 2)), mesh)


def _counts(target_counts, default_interior: int, default_boundary: int):
    if target_counts is None:
        return default_interior, default_boundary, {}
    tc = dict(target_counts)
    edges = {k: int(v) for k, v in tc.items() if k not in ("interior", "boundary")}
    return (int(tc.get("interior", default_interior)),
            int(tc.get("boundary", default_boundary)), edges)


# structured meshes --------------------------------------------------------

def polar_mesh(r0: float, r1: float, th0: float, th1: float, nr: int, nth: int) -> StructuredMesh:
    r = np.linspace(r0, r1, nr)
    th = np.linspace(th0, th1, nth)
    R, TH = np.meshgrid(r, th, indexing="ij")
    nodes = np.stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()], axis=1)
    return StructuredMesh(nodes, _grid_cells(nr, nth))


def rect_mesh(x0: float, x1: float, y0: float, y1: float, nx: int, ny: int) -> StructuredMesh:
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="ij")
    return StructuredMesh(np.stack([X.ravel(), Y.ravel()], axis=1), _grid_cells(nx, ny))


def _grid_cells(n0: int, n1: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(n0 - 1), np.arange(n1 - 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    return np.stack([i * n1 + j, (i + 1) * n1 + j, (i + 1) * n1 + j + 1, i * n1 + j + 1], axis=1)


# samplers -----------------------------------------------------------------

def sample_quarter_annulus(R_i: float, R_o: float, target_counts=None, seed: int = 0,
                           test_shape: tuple[int, int] = (48, 148)) -> PointSet:
    """Quarter annulus in the first quadrant.

    Tags: x=0 and y=0 edges ``SYMMETRY``; inner arc ``NBC_1`` (pressurised);
    outer arc ``NBC_2`` (traction free). Default counts 262 + 68; the default
    48 x 148 polar test mesh has 7104 nodes.
    """
    if not (0 < R_i < R_o):
        raise ValueError(f"degenerate radii: need 0 < R_i < R_o, got {R_i}, {R_o}")
    n_int, n_bnd, edges = _counts(target_counts, 262, 68)
    L = R_o - R_i
    lengths = [L, L, 0.5 * math.pi * R_i, 0.5 * math.pi * R_o]
    split = _split(n_bnd, lengths)
    for i, name in enumerate(("x0", "y0", "inner", "outer")):
        split[i] = edges.get(name, split[i])
    parts = [
        _segment((R_i, 0.0), (R_o, 0.0), split[1], (0.0, -1.0), SYMMETRY, 0.0),
        _arc((0, 0), R_o, 0.0, 0.5 * math.pi, split[3], True, "NBC_2", 0.0),
        _segment((0.0, R_o), (0.0, R_i), split[0], (-1.0, 0.0), SYMMETRY, 0.0),
        _arc((0, 0), R_i, 0.5 * math.pi, 0.0, split[2], False, "NBC_1", 0.0),
    ]

    def inside(p, margin):
        r = np.hypot(p[:, 0], p[:, 1])
        return (r > R_i + margin) & (r < R_o - margin) & (p[:, 0] > margin) & (p[:, 1] > margin)

    area = 0.25 * math.pi * (R_o ** 2 - R_i ** 2)
    interior = _jittered_grid(inside, ((0, R_o), (0, R_o)), n_int, area, seed)
    mesh = polar_mesh(R_i, R_o, 0.0, 0.5 * math.pi, *test_shape)
    return _assemble(parts, interior, mesh.nodes, mesh)


def sample_unit_square(l: float = 1.0, target_counts=None, seed: int = 0,
                       test_shape: tuple[int, int] = (109, 109)) -> PointSet:
    """Square block ``[0, l]^2`` on a rigid surface at y = 0.

    Tags: left ``SYMMETRY``, top ``NBC_1``, right ``NBC_2``, bottom ``CONTACT``.
    Default counts 434 + 80.
    """
    if not l > 0:
        raise ValueError("edge length must be positive")
    n_int, n_bnd, edges = _counts(target_counts, 434, 80)
    split = _split(n_bnd, [l] * 4)
    for i, name in enumerate(("bottom", "right", "top", "left")):
        split[i] = edges.get(name, split[i])
    parts = [
        _segment((0, 0), (l, 0), split[0], (0, -1), CONTACT, 0.0),
        _segment((l, 0), (l, l), split[1], (1, 0), "NBC_2", 0.0),
        _segment((l, l), (0, l), split[2], (0, 1), "NBC_1", 0.0),
        _segment((0, l), (0, 0), split[3], (-1, 0), SYMMETRY, 0.0),
    ]

    def inside(p, margin):
        return np.all((p > margin) & (p < l - margin), axis=1)

    interior = _jittered_grid(inside, ((0, l), (0, l)), n_int, l * l, seed)
    mesh = rect_mesh(0, l, 0, l, *test_shape)
    return _assemble(parts, interior, mesh.nodes, mesh)


def sample_half_cylinder(R: float = 1.0, alpha_deg: float = 15.0, target_counts=None,
                         seed: int = 0, symmetric: bool = True,
                         refine=(0.2, 1500),
                         test_shape: tuple[int, int] = (145, 181)) -> PointSet:
    """Half-cylinder (centre at the origin, flat top at y = 0) on a rigid surface at y = -R.

    With ``symmetric`` only the quarter ``x <= 0`` is sampled and the x = 0
    edge is tagged ``SYMMETRY``; otherwise the full half-disk. The curved
    boundary within ``alpha_deg`` of the lowest point is ``CONTACT``, the rest
    ``NBC_2``; the top is ``NBC_1``. ``yref`` is the height above the rigid
    surface. ``refine=(radius, count)`` adds extra interior points in the
    disk of that radius around the lowest point, where the contact stresses
    concentrate; a list of such pairs refines in nested levels. Target keys: ``interior``, ``boundary``, ``contact``.
    """
    if not R > 0:
        raise ValueError("radius must be positive")
    if not (0 < alpha_deg < 90):
        raise ValueError(f"invalid alpha: need 0 < alpha < 90 degrees, got {alpha_deg}")
    n_int, n_bnd, edges = _counts(target_counts, 5000, 400)
    a = math.radians(alpha_deg)
    obstacle = -R
    bottom = -0.5 * math.pi
    n_contact = edges.get("contact", max(1, n_bnd // 2))
    rest = max(3, n_bnd - n_contact)
    nbc_arc_len = (0.5 * math.pi - a) * R
    if symmetric:
        n_top, n_sym, n_arc = _split(rest, [R, R, nbc_arc_len])
        parts = [
            _segment((0, 0), (-R, 0), n_top, (0, 1), "NBC_1", obstacle),
            _arc((0, 0), R, -math.pi, bottom - a, n_arc, True, "NBC_2", obstacle),
            _arc((0, 0), R, bottom - a, bottom, n_contact, True, CONTACT, obstacle),
            _segment((0, -R), (0, 0), n_sym, (1, 0), SYMMETRY, obstacle),
        ]
        x_lo, x_hi = -R, 0.0
    else:
        n_top, n_arc_l, n_arc_r = _split(rest, [2 * R, nbc_arc_len, nbc_arc_len])
        parts = [
            _segment((R, 0), (-R, 0), n_top, (0, 1), "NBC_1", obstacle),
            _arc((0, 0), R, -math.pi, bottom - a, n_arc_l, True, "NBC_2", obstacle),
            _arc((0, 0), R, bottom - a, bottom + a, n_contact, True, CONTACT, obstacle),
            _arc((0, 0), R, bottom + a, 0.0, n_arc_r, True, "NBC_2", obstacle),
        ]
        x_lo, x_hi = -R, R

    def inside(p, margin):
        r = np.hypot(p[:, 0], p[:, 1])
        ok = (r < R - margin) & (p[:, 1] < -margin)
        if symmetric:
            ok &= p[:, 0] < -margin
        return ok

    area = 0.5 * math.pi * R * R * (0.5 if symmetric else 1.0)
    interior = _jittered_grid(inside, ((x_lo, x_hi), (-R, 0.0)), n_int, area, seed)
    if refine is None or len(refine) == 0:
        levels = []
    else:
        levels = [refine] if np.isscalar(refine[0]) else list(refine)
    for level, (rad, cnt) in enumerate(levels):
        if cnt <= 0:
            continue
        cy = -R

        def inside_ref(p, margin, rad=rad):
            return inside(p, margin) & (np.hypot(p[:, 0], p[:, 1] - cy) < rad)

        ref_area = 0.5 * math.pi * rad * rad * (0.5 if symmetric else 1.0)
        extra = _jittered_grid(inside_ref, ((max(x_lo, -rad), min(x_hi, rad)), (cy, cy + rad)),
                               int(cnt), ref_area, seed + 1 + level)
        interior = np.concatenate([interior, extra])
    th_hi = -0.5 * math.pi if symmetric else 0.0
    # start just off the centre: an r = 0 row would collapse into duplicate nodes
    mesh = polar_mesh(0.5 * R / (test_shape[0] - 1), R, -math.pi, th_hi, *test_shape)
    return _assemble(parts, interior, mesh.nodes, mesh)


def contact_arc_points(R: float, alpha_deg: float, n: int, symmetric: bool = True) -> np.ndarray:
    """Ordered points along the potential contact arc (for pressure profiles)."""
    a = math.radians(alpha_deg)
    bottom = -0.5 * math.pi
    th1 = bottom if symmetric else bottom + a
    th = np.linspace(bottom - a, th1, n)
    return np.stack([R * np.cos(th), R * np.sin(th)], axis=1)


# CSV I/O ------------------------------------------------------------------

POINT_COLUMNS = ("x", "y", "kind", "tag", "nx", "ny", "Yref")


def save_points(ps: PointSet, path: str | Path) -> None:
    lines = [",".join(POINT_COLUMNS)]
    for x, y in ps.interior:
        lines.append(f"{fmt(x)},{fmt(y)},interior,,,,")
    for (x, y), tag, (nx, ny), yr in zip(ps.boundary, ps.tags, ps.normals, ps.yref):
        lines.append(f"{fmt(x)},{fmt(y)},boundary,{tag},{fmt(nx)},{fmt(ny)},{fmt(yr)}")
    for x, y in ps.test:
        lines.append(f"{fmt(x)},{fmt(y)},test,,,,")
    atomic_write_text(path, "\n".join(lines) + "\n")


class PointFileError(ValueError):
    pass


def load_points(path: str | Path) -> PointSet:
    path = Path(path)
    interior, boundary, tags, normals, yref, test = [], [], [], [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PointFileError(f"{path}: no points")
        missing = set(POINT_COLUMNS) - set(reader.fieldnames)
        if missing:
            raise PointFileError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                x, y = float(row["x"]), float(row["y"])
            except (TypeError, ValueError) as exc:
                raise PointFileError(f"{path}:{lineno}: malformed coordinates") from exc
            kind = row["kind"]
            if kind == "interior":
                interior.append((x, y))
            elif kind == "test":
                test.append((x, y))
            elif kind == "boundary":
                tag = row["tag"]
                if not _valid_tag(tag):
                    raise PointFileError(f"{path}:{lineno}: unknown tag {tag!r}")
                try:
                    n = (float(row["nx"]), float(row["ny"]))
                except (TypeError, ValueError) as exc:
                    raise PointFileError(f"{path}:{lineno}: missing normal on {tag} row") from exc
                yr = row["Yref"]
                boundary.append((x, y))
                tags.append(tag)
                normals.append(n)
                yref.append(float(yr) if yr not in (None, "") else y)
            else:
                raise PointFileError(f"{path}:{lineno}: unknown kind {kind!r}")
    if not (interior or boundary or test):
        raise PointFileError(f"{path}: no points")
    return PointSet(np.array(interior).reshape(-1, 2), np.array(boundary).reshape(-1, 2),
                    tags, np.array(normals).reshape(-1, 2), np.array(yref),
                    np.array(test).reshape(-1, 2))
