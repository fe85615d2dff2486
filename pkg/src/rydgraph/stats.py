"""Estimator errors and one-parameter rate fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .noise import p_even, trajectory_fidelity

MODELS = {"p_even": p_even, "trajectory": trajectory_fidelity}

_EPS_LO, _EPS_HI = 1e-9, 0.5 - 1e-9


@dataclass(frozen=True)
class FitResult:
    """One-parameter fit outcome.

    ``std_error`` is the half width of the unit-chi-square interval
    around the optimum; when the optimum sits against a bound the width
    is truncated there.
    """

    model: str
    eps: float
    std_error: float
    sse: float
    n_points: int


def jackknife_se(values):
    """(mean, delete-one standard error) of a sample."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("values must be a nonempty one dimensional sample")
    m = arr.size
    mean = float(arr.mean())
    if m == 1:
        return mean, 0.0
    # delete-one means of the sample mean collapse to a closed form
    loo = (arr.sum() - arr) / (m - 1)
    var = (m - 1) / m * np.sum((loo - loo.mean()) ** 2)
    return mean, float(math.sqrt(var))


def convergence_curve(values, checkpoints=None):
    """Running (m, mean, se) snapshots over growing shot prefixes.

    Default checkpoints double from 100 until the full sample, which is
    always included.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("values must be a nonempty one dimensional sample")
    m = arr.size
    if checkpoints is None:
        checkpoints, c = [], 100
        while c < m:
            checkpoints.append(c)
            c *= 2
        checkpoints.append(m)
    out = []
    for c in checkpoints:
        c = int(c)
        if not 1 <= c <= m:
            raise ValueError(f"checkpoint {c} outside 1..{m}")
        mean, se = jackknife_se(arr[:c])
        out.append((c, mean, se))
    return out


def fit_epsilon(xs, ys, ses=None, model: str = "p_even") -> FitResult:
    """Least-squares rate fit of a decay model to estimates.

    Points with a valid standard error are weighted by 1/se^2; if any
    error is missing or zero the fit falls back to uniform weights and
    scales the interval by the residual variance instead.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {sorted(MODELS)}")
    fn = MODELS[model]
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise ValueError("need matching x and y arrays with at least two points")
    w = None
    if ses is not None:
        s = np.asarray(ses, dtype=float)
        if s.shape != x.shape:
            raise ValueError("ses must match the data shape")
        if np.all(np.isfinite(s)) and np.all(s > 0):
            w = 1.0 / s ** 2

    def chi2(eps):
        r = y - fn(x, eps)
        return float(np.sum(r * r) if w is None else np.sum(w * r * r))

    res = minimize_scalar(chi2, bounds=(_EPS_LO, _EPS_HI), method="bounded",
                          options={"xatol": 1e-9})
    eps_hat = float(res.x)
    c_min = float(res.fun)

    if w is None:
        dof = max(1, x.size - 1)
        sigma2 = max(c_min / dof, 1e-300)
    else:
        sigma2 = 1.0

    def excess(eps):
        return (chi2(eps) - c_min) / sigma2 - 1.0

    if excess(_EPS_HI) > 0:
        above = brentq(excess, eps_hat, _EPS_HI, xtol=1e-12) - eps_hat
    else:
        above = _EPS_HI - eps_hat
    if excess(_EPS_LO) > 0:
        below = eps_hat - brentq(excess, _EPS_LO, eps_hat, xtol=1e-12)
    else:
        below = eps_hat - _EPS_LO
    half_width = 0.5 * (above + below)
    return FitResult(model, eps_hat, float(half_width), c_min, int(x.size))
