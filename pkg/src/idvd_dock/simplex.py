"""
Nelder-Mead downhill simplex minimization.

Standard coefficients (reflection 1, expansion 2, contraction 0.5, shrink 0.5),
the same step logic as MATLAB's fminsearch. The search is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool
    trace: list[float] = field(default_factory=list)   # best cost after each iteration


def initial_simplex(x0: Sequence[float], steps: Sequence[float]) -> np.ndarray:
    """Vertex 0 is ``x0``; vertex ``i+1`` moves coordinate ``i`` by ``steps[i]``."""
    x0 = np.asarray(x0, dtype=float)
    steps = np.asarray(steps, dtype=float)
    if steps.shape != x0.shape:
        raise ValueError("steps must match x0")
    if np.any(steps == 0):
        raise ValueError("simplex steps must be non-zero")
    return np.vstack([x0, x0 + np.diag(steps)])


def minimize(fun: Callable[[np.ndarray], float], x0: Sequence[float], steps: Sequence[float], *,
             tol: float = 1e-6, xtol: float | None = None, max_evaluations: int = 5000) -> SimplexResult:
    """
    Minimize ``fun`` starting from the simplex spanned by ``x0`` and ``steps``.

    Stops when the spread of vertex costs falls below ``tol * (1 + |best|)``
    (and, if ``xtol`` is given, every vertex lies within ``xtol`` of the best
    in each coordinate), or when ``max_evaluations`` is reached.
    """
    sim = initial_simplex(x0, steps)
    n = sim.shape[1]
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        val = float(fun(x))
        if val != val:  # NaN sorts badly; treat as worst possible
            return np.inf
        return val

    fs = np.array([f(x) for x in sim])
    if not np.any(np.isfinite(fs)):
        raise RuntimeError("objective is non-finite on every initial vertex")
    iterations = 0
    trace: list[float] = []
    converged = False

    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        trace.append(float(fs[0]))
        spread_ok = fs[-1] - fs[0] <= tol * (1.0 + abs(fs[0]))
        if spread_ok and (xtol is None or np.max(np.abs(sim[1:] - sim[0])) <= xtol):
            converged = True
            break
        if evals >= max_evaluations:
            break
        iterations += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = f(xr)
        if fr < fs[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xcc = centroid + CONTRACT * (worst - centroid)
            fcc = f(xcc)
            if fcc < fs[-1]:
                sim[-1], fs[-1] = xcc, fcc
                continue
        for i in range(1, n + 1):
            sim[i] = sim[0] + SHRINK * (sim[i] - sim[0])
            fs[i] = f(sim[i])

    return SimplexResult(sim[0].copy(), float(fs[0]), iterations, evals, converged, trace)
