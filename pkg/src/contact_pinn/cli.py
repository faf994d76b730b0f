"""Command-line entry point: ``contact-pinn {train,evaluate,sweep,config,synth-data}``.

Exit codes: 0 success, 1 invalid input (config, data, checkpoint, points),
2 training failure (non-finite loss or parameters).
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import benchmarks as bm
from .contact import METHODS
from .elasticity import MaterialError, load_experimental_csv, save_experimental_csv
from .io import atomic_write_text, fmt
from .network import OUTPUT_NAMES, EvaluationError, forward, load_checkpoint, save_checkpoint

log = logging.getLogger("contact_pinn")

EXIT_OK, EXIT_INVALID, EXIT_TRAINING = 0, 1, 2


class InputError(Exception):
    """Invalid user input; reported with exit code 1."""


def load_schema() -> dict:
    text = resources.files("contact_pinn").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def load_config(path: str | Path, seed: int | None = None, preset: str | None = None) -> dict:
    """Parse, schema-check and complete a run configuration file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InputError(f"{path}: config file not found") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    if seed is not None:
        doc["seed"] = seed
    if preset is not None:
        doc["preset"] = preset
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise InputError(f"{path}: invalid config\n  " + "\n  ".join(msgs))
    try:
        cfg = bm.resolve_config(doc)
        bm.MaterialParams(cfg["material"]["E"], cfg["material"]["nu"])
    except MaterialError as exc:
        raise InputError(f"{path}: invalid material: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    data = cfg.get("data")
    if data and data.get("path"):
        p = Path(data["path"])
        data["path"] = str(p if p.is_absolute() else path.parent / p)
    return cfg


def _load_data(cfg: dict):
    if cfg["mode"] not in ("data_enhanced", "inverse"):
        return None
    path = (cfg.get("data") or {}).get("path")
    if not path:
        raise InputError(f"mode {cfg['mode']!r} needs data.path (experimental CSV)")
    try:
        return load_experimental_csv(path)
    except (FileNotFoundError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def fields_csv(xy: np.ndarray, F: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(("x", "y", *OUTPUT_NAMES)) + "\n")
    for p, f in zip(xy, F):
        buf.write(",".join(fmt(v) for v in (*p[:2], *f)) + "\n")
    return buf.getvalue()


def _write_artifacts(out: Path, result: bm.CaseResult, log_text: str) -> None:
    cfg = result.setup.config
    save_checkpoint(result.params, out / "checkpoint.json", {"config": cfg})
    atomic_write_text(out / "train_log.jsonl", log_text)
    atomic_write_text(out / "error_report.json",
                      json.dumps(result.report.to_dict(), indent=2, sort_keys=True) + "\n")
    atomic_write_text(out / "config.resolved.json", json.dumps(cfg, indent=2) + "\n")
    ps = result.setup.points
    if cfg["case"] != "hertz" or cfg["mode"] != "surrogate":
        F = forward(result.params, result.setup.transform, ps.test)
        atomic_write_text(out / "fields.csv", fields_csv(ps.test, F))
    if cfg["case"] == "hertz":
        g = cfg["geometry"]
        arc = bm.contact_arc_points(g["R"], g["alpha_deg"], 400, g.get("symmetric", True))
        pressures = (cfg["surrogate"]["eval_pressures"] if cfg["mode"] == "surrogate"
                     else [None])
        lines = ["p,x,pc"] if cfg["mode"] == "surrogate" else ["x,pc"]
        for q in pressures:
            prof = bm.contact_pressure_profile(result.params, result.setup.transform, arc, q)
            for x, pc in zip(prof.x, prof.pc):
                lines.append(",".join(([fmt(q)] if q is not None else []) + [fmt(x), fmt(pc)]))
        atomic_write_text(out / "pressure_profile.csv", "\n".join(lines) + "\n")


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.seed, args.preset)
    data = _load_data(cfg)
    out = Path(args.out)
    buf = io.StringIO()
    log.info("training %s/%s (preset %s, seed %s)", cfg["case"], cfg["mode"], cfg["preset"],
             cfg["seed"])
    result = bm.run_case(cfg, data, log_stream=buf)
    _write_artifacts(out, result, buf.getvalue())
    print(json.dumps(result.report.to_dict()["metrics"], indent=2, sort_keys=True))
    log.info("finished: %s after %d L-BFGS iterations", result.train.stop_reason,
             result.train.lbfgs_iterations)
    return EXIT_OK


def read_points_csv(path: str | Path) -> np.ndarray:
    """Rows of ``x,y`` (plus ``p`` for surrogate models) from a headed CSV."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise InputError(f"{path}: points file not found") from exc
    with fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        if not {"x", "y"} <= set(names):
            raise InputError(f"{path}: header must contain x and y")
        cols = ["x", "y"] + (["p"] if "p" in names else [])
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[c]) for c in cols])
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: malformed row") from exc
    if not rows:
        raise InputError(f"{path}: no points")
    return np.asarray(rows, dtype=np.float64)


def _load_checkpoint(path):
    try:
        params, meta = load_checkpoint(path)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: checkpoint not found") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: invalid checkpoint: {exc}") from exc
    if "config" not in meta:
        raise InputError(f"{path}: checkpoint carries no case configuration")
    return params, meta["config"]


def cmd_evaluate(args) -> int:
    params, cfg = _load_checkpoint(args.checkpoint)
    x = read_points_csv(args.points)
    need = params.arch.input_width
    if x.shape[1] != need:
        raise InputError(f"checkpoint expects {need} inputs, points file has {x.shape[1]}")
    F = forward(params, bm.make_transform(cfg), x)
    text = fields_csv(x, F)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise InputError(f"unknown KKT method(s) {bad}; choose from {list(METHODS)}")
    base = load_config(args.config, None, args.preset)
    if base["case"] != "block":
        raise InputError("sweep runs the block benchmark; config case must be 'block'")
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [base["seed"]]
    rows = sweep(base, methods, seeds)
    out = Path(args.out)
    atomic_write_text(out / "sweep.json", json.dumps(rows, indent=2) + "\n")
    table = format_sweep(rows)
    atomic_write_text(out / "sweep.txt", table)
    sys.stdout.write(table)
    return EXIT_OK


def kkt_for(method: str, base: dict | None = None) -> dict:
    k = dict(base or {})
    k["method"] = method
    k["weights"] = [1.0] if method == "fb" else [1.0, 1.0, 1.0]
    k.setdefault("delta_g", 10.0)
    k.setdefault("delta_p", 100.0)
    return k


def sweep(base: dict, methods, seeds) -> list[dict]:
    """Block benchmark once per (method, seed); median errors per method."""
    rows = []
    for m in methods:
        runs = []
        for s in seeds:
            cfg = copy.deepcopy(base)
            cfg["seed"] = s
            cfg["kkt"] = kkt_for(m, base.get("kkt"))
            r = bm.run_case(cfg)
            mt = r.report.metrics
            runs.append({"seed": s, "rel_l2_u": mt["rel_l2_u"], "rel_l2_sigma": mt["rel_l2_sigma"],
                         "max_abs_uy": mt["max_abs"]["uy"], "max_abs_syy": mt["max_abs"]["syy"],
                         "max_abs_sxy": mt["max_abs"]["sxy"]})
        med = {k: float(np.median([r[k] for r in runs])) for k in runs[0] if k != "seed"}
        rows.append({"method": m, "runs": runs, "median": med})
    return rows


def format_sweep(rows) -> str:
    head = f"{'method':<8} {'E_L2_u(%)':>10} {'E_L2_s(%)':>10} {'max|uy|':>10} {'max|syy|':>10} {'max|sxy|':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        m = r["median"]
        lines.append(f"{r['method']:<8} {100 * m['rel_l2_u']:>10.4f} {100 * m['rel_l2_sigma']:>10.4f} "
                     f"{m['max_abs_uy']:>10.3e} {m['max_abs_syy']:>10.3e} {m['max_abs_sxy']:>10.3e}")
    return "\n".join(lines) + "\n"


def cmd_config(args) -> int:
    try:
        cfg = bm.default_config(args.case, args.mode, args.preset)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    text = json.dumps(cfg, indent=2) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth_data(args) -> int:
    params, cfg = _load_checkpoint(args.checkpoint)
    if params.arch.input_width != 2:
        raise InputError("synthetic data needs a two-input (non-surrogate) checkpoint")
    ps = bm.sample_points(cfg)
    data = bm.sample_model_data(params, bm.make_transform(cfg), ps, args.n_interior,
                                args.n_boundary, args.seed)
    save_experimental_csv(data, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contact-pinn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one benchmark case and write its artifacts")
    t.add_argument("--config", required=True)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--seed", type=int)
    t.add_argument("--preset", choices=("desk", "full"))
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="predict fields of a checkpoint at given points")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--points", required=True, help="CSV with x,y (and p for surrogates)")
    e.add_argument("--out", help="prediction CSV (default: stdout)")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="compare KKT methods on the block benchmark")
    s.add_argument("--config", required=True)
    s.add_argument("--methods", default=",".join(METHODS))
    s.add_argument("--seeds", help="comma-separated seeds (default: config seed)")
    s.add_argument("--out", required=True)
    s.add_argument("--preset", choices=("desk", "full"))
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("config", help="print the default config of a case")
    c.add_argument("--case", required=True, choices=bm.CASES)
    c.add_argument("--mode", default="forward", choices=bm.MODES)
    c.add_argument("--preset", default="desk", choices=("desk", "full"))
    c.add_argument("--out")
    c.set_defaults(func=cmd_config)

    d = sub.add_parser("synth-data", help="sample pseudo-measurements from a trained checkpoint")
    d.add_argument("--checkpoint", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--n-interior", type=int, default=100)
    d.add_argument("--n-boundary", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_synth_data)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CONTACT_PINN_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EvaluationError, FloatingPointError) as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())
