"""Error channels and their closed-form signatures.

Bit-level channels act on sampled arrays: a symmetric flip models a
readout-frame spin flip per measured atom, and a one-sided damping
models bright-state loss during imaging. Position jitter acts on the
couplings instead; it can be folded in as a quenched per-shot draw or
as the time-averaged stiffening of every bond.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import C6, AtomLayout

# Flip rate below which parity readout over long wires stays useful.
FAULT_TOLERANCE_EPS = 0.0075

JITTER_MODES = ("averaged", "quenched")


@dataclass(frozen=True)
class NoiseConfig:
    """Per-run error rates; everything defaults to off.

    ``eps_l`` is the symmetric flip rate per measured atom, ``eps_m``
    the one-sided bright-to-dark readout bias, ``eps_damp`` an extra
    damping applied to recorded ones, ``jitter_um`` the rms positional
    scatter per axis, and ``jitter_mode`` how that scatter enters the
    couplings.
    """

    eps_l: float = 0.0
    eps_m: float = 0.0
    eps_damp: float = 0.0
    jitter_um: float = 0.0
    jitter_mode: str = "averaged"

    def __post_init__(self):
        for name in ("eps_l", "eps_m", "eps_damp"):
            val = getattr(self, name)
            if not (math.isfinite(float(val)) and 0.0 <= val <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
        if not (math.isfinite(float(self.jitter_um)) and self.jitter_um >= 0.0):
            raise ValueError("jitter_um must be nonnegative")
        if self.jitter_mode not in JITTER_MODES:
            raise ValueError(f"jitter_mode must be one of {JITTER_MODES}")


def apply_x_flip(bits, eps: float, rng) -> np.ndarray:
    """Flip each recorded bit independently with probability ``eps``."""
    arr = np.asarray(bits, dtype=np.uint8)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if eps == 0.0:
        return arr.copy()
    return arr ^ (rng.random(arr.shape) < eps).astype(np.uint8)


def apply_readout_bias(bits, eps: float, rng) -> np.ndarray:
    """Turn recorded ones into zeros with probability ``eps``."""
    arr = np.asarray(bits, dtype=np.uint8)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    if eps == 0.0:
        return arr.copy()
    drop = (rng.random(arr.shape) < eps) & (arr == 1)
    out = arr.copy()
    out[drop] = 0
    return out


def p_even(n, eps: float):
    """Even-parity probability of ``n`` bits each flipped at rate ``eps``.

    Independent flips leave the parity even with probability
    ``(1 + (1 - 2 eps)**n) / 2``; accepts scalars or arrays in ``n``.
    """
    n_arr = np.asarray(n, dtype=float)
    out = 0.5 * (1.0 + (1.0 - 2.0 * eps) ** n_arr)
    return float(out) if np.isscalar(n) else out


def trajectory_fidelity(n, eps: float):
    """Exponential fidelity decay ``(1 + exp(-eps n)) / 2`` over n sites."""
    n_arr = np.asarray(n, dtype=float)
    out = 0.5 * (1.0 + np.exp(-eps * n_arr))
    return float(out) if np.isscalar(n) else out


def domain_size(model: str, eps: float, threshold: float = 2.0 / 3.0):
    """Largest region a parity signal survives above ``threshold``.

    ``model='ideal'`` inverts the exponential decay and returns
    ``floor(-ln(2 threshold - 1) / eps)``. ``model='p_even'`` walks the
    binomial parity curve instead: with n_O the smallest string size
    whose even fraction dips below the threshold, it reports the odd
    wire length 2 n_O - 1 where teleportation stops being useful. A
    zero rate means the signal never dies; that is reported as inf.
    """
    if model not in ("ideal", "p_even"):
        raise ValueError("model must be 'ideal' or 'p_even'")
    if not 0.5 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0.5, 1.0]")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0.0:
        return math.inf
    if model == "ideal":
        return int(math.floor(-math.log(2.0 * threshold - 1.0) / eps))
    if eps >= 0.5:
        return 1  # even a single site reads out at or below chance
    n_star = math.log(2.0 * threshold - 1.0) / math.log(1.0 - 2.0 * eps)
    n_first_below = int(math.floor(n_star)) + 1
    return 2 * n_first_below - 1


def jitter_shift(spacing: float, jitter: float) -> float:
    """First-order coupling shift 36 C6 jitter / spacing**7 in rad/us."""
    d = float(spacing)
    if d <= 0:
        raise ValueError("spacing must be positive")
    return 36.0 * C6 * float(jitter) / d ** 7


def averaged_coupling_scale(spacing: float, jitter: float) -> float:
    """Mean stiffening of a bond under isotropic positional scatter.

    Expanding C6/r^6 to second order in the relative motion gives a
    factor 1 + 36 (jitter/spacing)^2: the longitudinal part contributes
    2 * 21 and the transverse part subtracts 2 * 3.
    """
    d = float(spacing)
    if d <= 0:
        raise ValueError("spacing must be positive")
    return 1.0 + 36.0 * (float(jitter) / d) ** 2


def sample_jittered_layout(layout: AtomLayout, jitter: float, rng) -> AtomLayout:
    """One quenched draw: every coordinate shifts by N(0, jitter**2)."""
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    pts = layout.coords() + rng.normal(0.0, jitter, size=(layout.n, 2))
    return AtomLayout(tuple((float(x), float(y)) for x, y in pts),
                      layout.roles, layout.spacing, layout.input_displacement)
