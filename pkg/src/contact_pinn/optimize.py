"""Two-phase training: Adam warm-up followed by L-BFGS with a strong-Wolfe line search.

The objective is any ``fun(flat) -> (value, grad)`` on a flat parameter
vector, so the optimizers stay independent of the network code.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, TextIO

import numpy as np

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class AdamConfig:
    lr: float = 1e-3
    epochs: int = 2000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (self.lr > 0 and self.epochs >= 0 and 0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("invalid Adam configuration")


@dataclass
class LbfgsConfig:
    history: int = 100
    max_iter: int = 15000
    grad_tol: float = 1e-8
    rel_loss_tol: float = 1e-9
    rel_loss_window: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    curvature_eps: float = 1e-10
    max_line_search: int = 50

    def __post_init__(self):
        if self.history < 1 or self.max_iter < 0:
            raise ValueError("invalid L-BFGS configuration")
        if not (0 < self.c1 < self.c2 < 1):
            raise ValueError("line search needs 0 < c1 < c2 < 1")


@dataclass
class TrainRecord:
    phase: str
    iteration: int
    loss: float
    grad_norm: float
    elapsed: float
    terms: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


@dataclass
class TrainResult:
    flat: np.ndarray
    loss: float
    stop_reason: str
    adam_epochs: int
    lbfgs_iterations: int
    history: list[TrainRecord]
    elapsed: float

    def summary(self) -> dict:
        return {"loss": self.loss, "stop_reason": self.stop_reason,
                "adam_epochs": self.adam_epochs, "lbfgs_iterations": self.lbfgs_iterations,
                "elapsed_s": self.elapsed}


class _Logger:
    def __init__(self, stream: TextIO | None, every: int, term_fn, extras_fn):
        self.stream = stream
        self.every = max(1, every)
        self.term_fn = term_fn
        self.extras_fn = extras_fn
        self.records: list[TrainRecord] = []
        self.t0 = time.perf_counter()

    def __call__(self, phase, it, loss, grad, x, force=False):
        if not (force or it % self.every == 0):
            return
        if self.records and (self.records[-1].phase, self.records[-1].iteration) == (phase, it):
            return
        rec = TrainRecord(phase, it, float(loss), float(np.linalg.norm(grad)),
                          time.perf_counter() - self.t0,
                          self.term_fn() if self.term_fn else {},
                          self.extras_fn(x) if self.extras_fn else {})
        self.records.append(rec)
        if self.stream is not None:
            self.stream.write(json.dumps(asdict(rec)) + "\n")
            self.stream.flush()


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(state: AdamState, x: np.ndarray, grad: np.ndarray,
              cfg: AdamConfig) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns new state and parameters."""
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient in Adam step")
    t = state.t + 1
    m = cfg.beta1 * state.m + (1 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1 - cfg.beta2) * grad * grad
    mhat = m / (1 - cfg.beta1 ** t)
    vhat = v / (1 - cfg.beta2 ** t)
    return AdamState(m, v, t), x - cfg.lr * mhat / (np.sqrt(vhat) + cfg.eps)


def adam(fun: Objective, x0: np.ndarray, cfg: AdamConfig, log=None) -> tuple[np.ndarray, float]:
    x = np.array(x0, dtype=np.float64)
    state = AdamState.zeros(x.size)
    f = math.inf
    for epoch in range(cfg.epochs):
        f, g = fun(x)
        if log:
            log("adam", epoch, f, g, x)
        state, x = adam_step(state, x, g, cfg)
    if cfg.epochs:
        f, g = fun(x)
        if log:
            log("adam", cfg.epochs, f, g, x, force=True)
    return x, f


# strong-Wolfe line search (bracketing + cubic zoom) ------------------------

def _cubic_min(a, fa, ga, b, fb, gb):
    d1 = ga + gb - 3 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0:
        return 0.5 * (a + b)
    d2 = math.copysign(math.sqrt(disc), b - a)
    t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2 * d2)
    lo, hi = min(a, b), max(a, b)
    if not (lo + 0.1 * (hi - lo) <= t <= hi - 0.1 * (hi - lo)):
        return 0.5 * (a + b)
    return t


def strong_wolfe(fun: Objective, x, f0, g0, d, c1, c2, max_evals=25, step0=1.0):
    """Step satisfying the strong Wolfe conditions; returns ``(t, f, g, evals)``.

    ``t`` is ``None`` when no acceptable step was found.
    """
    dg0 = float(g0 @ d)
    if dg0 >= 0:
        return None, f0, g0, 0
    t_prev, f_prev, dg_prev = 0.0, f0, dg0
    g_prev = g0
    t = step0
    evals = 0
    while evals < max_evals:
        f, g = fun(x + t * d)
        evals += 1
        dg = float(g @ d)
        if not math.isfinite(f):
            t = 0.5 * (t_prev + t)
            continue
        if f > f0 + c1 * t * dg0 or (evals > 1 and f >= f_prev):
            return _zoom(fun, x, f0, dg0, d, c1, c2, t_prev, f_prev, dg_prev, g_prev,
                         t, f, dg, g, max_evals - evals, evals)
        if abs(dg) <= -c2 * dg0:
            return t, f, g, evals
        if dg >= 0:
            return _zoom(fun, x, f0, dg0, d, c1, c2, t, f, dg, g,
                         t_prev, f_prev, dg_prev, g_prev, max_evals - evals, evals)
        t_prev, f_prev, dg_prev, g_prev = t, f, dg, g
        t *= 2.0
    return None, f0, g0, evals


def _zoom(fun, x, f0, dg0, d, c1, c2, lo, flo, dglo, glo, hi, fhi, dghi, ghi, budget, evals):
    best = (lo, flo, glo) if lo > 0 else None
    for _ in range(max(budget, 0)):
        t = _cubic_min(lo, flo, dglo, hi, fhi, dghi)
        f, g = fun(x + t * d)
        evals += 1
        dg = float(g @ d)
        if not math.isfinite(f) or f > f0 + c1 * t * dg0 or f >= flo:
            hi, fhi, dghi, ghi = t, f if math.isfinite(f) else math.inf, dg, g
        else:
            if abs(dg) <= -c2 * dg0:
                return t, f, g, evals
            if dg * (hi - lo) >= 0:
                hi, fhi, dghi, ghi = lo, flo, dglo, glo
            lo, flo, dglo, glo = t, f, dg, g
            best = (lo, flo, glo)
        if abs(hi - lo) < 1e-16 * max(1.0, abs(lo)):
            break
    if best is not None and best[1] < f0:
        # sufficient decrease holds; accept without the curvature condition
        return best[0], best[1], best[2], evals
    return None, f0, None, evals


def lbfgs(fun: Objective, x0: np.ndarray, cfg: LbfgsConfig, log=None):
    """Returns ``(x, f, iterations, stop_reason)``."""
    x = np.array(x0, dtype=np.float64)
    f, g = fun(x)
    if not math.isfinite(f):
        return x, f, 0, "non_finite"
    S: deque = deque(maxlen=cfg.history)
    Y: deque = deque(maxlen=cfg.history)
    window: deque = deque(maxlen=cfg.rel_loss_window + 1)
    window.append(f)
    if log:
        log("lbfgs", 0, f, g, x, force=True)
    it = 0
    reason = "max_iter"
    while it < cfg.max_iter:
        if np.linalg.norm(g) < cfg.grad_tol:
            reason = "grad_tol"
            break
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            rho = 1.0 / float(y @ s)
            a = rho * float(s @ q)
            q -= a * y
            alphas.append((rho, a))
        if S:
            gamma = float(S[-1] @ Y[-1]) / float(Y[-1] @ Y[-1])
        else:
            gamma = min(1.0, 1.0 / max(float(np.abs(g).sum()), 1e-300))
        r = gamma * q
        for (s, y), (rho, a) in zip(zip(S, Y), reversed(alphas)):
            b = rho * float(y @ r)
            r += s * (a - b)
        d = -r
        if float(g @ d) >= 0:       # lost descent: restart from steepest descent
            S.clear()
            Y.clear()
            d = -g * min(1.0, 1.0 / max(float(np.abs(g).sum()), 1e-300))
        t, f_new, g_new, _ = strong_wolfe(fun, x, f, g, d, cfg.c1, cfg.c2, cfg.max_line_search)
        if t is None:
            if S:
                S.clear()
                Y.clear()
                continue
            reason = "line_search"
            break
        s = t * d
        y = g_new - g
        if float(s @ y) > cfg.curvature_eps:
            S.append(s)
            Y.append(y)
        x = x + s
        f, g = f_new, g_new
        it += 1
        if log:
            log("lbfgs", it, f, g, x)
        window.append(f)
        if len(window) == window.maxlen:
            old = window[0]
            if abs(old - f) <= cfg.rel_loss_tol * max(abs(old), 1e-300):
                reason = "rel_loss_tol"
                break
    if log:
        log("lbfgs", it, f, g, x, force=True)
    return x, f, it, reason


def train_two_phase(fun: Objective, x0: np.ndarray, adam_cfg: AdamConfig | None = None,
                    lbfgs_cfg: LbfgsConfig | None = None, log_stream: TextIO | None = None,
                    log_every: int = 100, term_fn=None, extras_fn=None) -> TrainResult:
    """Adam for ``adam_cfg.epochs`` steps, then L-BFGS until a stopping rule fires."""
    adam_cfg = adam_cfg or AdamConfig()
    lbfgs_cfg = lbfgs_cfg or LbfgsConfig()
    log = _Logger(log_stream, log_every, term_fn, extras_fn)
    x, f = adam(fun, x0, adam_cfg, log)
    x, f, iters, reason = lbfgs(fun, x, lbfgs_cfg, log)
    return TrainResult(x, float(f), reason, adam_cfg.epochs, iters, log.records,
                       time.perf_counter() - log.t0)
