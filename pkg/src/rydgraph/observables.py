"""Parity observables on entangled arrays.

Two families matter here. Stabilizers are exact expectation values
taken on a state vector. String estimators act on sampled bit arrays:
a vertex set whose adjacency-parity vanishes mod 2 has a deterministic
x-parity on the ideal state, so the even fraction of its sampled
parities is a direct order parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .engine import n_atoms_of
from .geometry import pair_interaction

_MAX_KERNEL_RANK = 12


@dataclass(frozen=True)
class OrderEstimate:
    """Sampled estimate with jackknife error and selection bookkeeping."""

    value: float
    std_error: float
    n_used: int
    n_total: int


def stabilizer_expectation(state, graph, center: int) -> float:
    """Exact <X_center Z_neighbors> on a state vector."""
    n = n_atoms_of(state)
    if graph.n_vertices != n:
        raise ValueError("graph size does not match the state")
    if not 0 <= center < n:
        raise ValueError(f"center {center} out of range")
    psi = np.asarray(state, dtype=np.complex128)
    idx = np.arange(psi.shape[0])
    par = np.zeros(psi.shape[0], dtype=np.int64)
    for v in graph.neighbors(center):
        par ^= (idx >> (n - 1 - v)) & 1
    flip = idx ^ (1 << (n - 1 - center))
    val = np.sum(np.conj(psi) * (1.0 - 2.0 * par) * psi[flip])
    return float(val.real)


def stabilizer_average(state, graph) -> float:
    """Mean stabilizer over all vertices that have at least one bond."""
    centers = [v for v in range(graph.n_vertices) if graph.degree(v) > 0]
    if not centers:
        raise ValueError("graph has no edges, no stabilizer is defined")
    return float(np.mean([stabilizer_expectation(state, graph, c) for c in centers]))


def bit_parity(bits, atoms) -> np.ndarray:
    """Row-wise XOR of the selected columns of a bit array."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim == 1:
        arr = arr[None, :]
    atoms = sorted(set(int(a) for a in atoms))
    if not atoms:
        raise ValueError("parity needs at least one atom")
    if atoms[0] < 0 or atoms[-1] >= arr.shape[1]:
        raise ValueError("parity atom index out of range")
    par = np.zeros(arr.shape[0], dtype=np.uint8)
    for a in atoms:
        par ^= arr[:, a]
    return par


def string_order(bits, atoms) -> OrderEstimate:
    """Even-parity fraction of a vertex set over sampled shots."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim == 1:
        arr = arr[None, :]
    m = arr.shape[0]
    if m < 1:
        raise ValueError("no shots given")
    even = (bit_parity(arr, atoms) == 0).astype(float)
    from .stats import jackknife_se

    value, se = jackknife_se(even)
    return OrderEstimate(float(value), float(se), m, m)


def _gf2_nullspace(mat) -> list:
    """Basis of the mod-2 nullspace of a 0/1 matrix, as bool arrays."""
    a = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivot_of = {}
    r = 0
    for c in range(cols):
        rr = None
        for i in range(r, rows):
            if a[i, c]:
                rr = i
                break
        if rr is None:
            continue
        a[[r, rr]] = a[[rr, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivot_of[c] = r
        r += 1
        if r == rows:
            break
    basis = []
    free = [c for c in range(cols) if c not in pivot_of]
    for f in free:
        vec = np.zeros(cols, dtype=bool)
        vec[f] = True
        for c, pr in pivot_of.items():
            if a[pr, f]:
                vec[c] = True
        basis.append(vec)
    return basis


def kernel_basis(graph) -> list:
    """Independent deterministic-parity sets of a bond graph."""
    return [frozenset(np.flatnonzero(v).tolist()) for v in _gf2_nullspace(graph.adjacency())]


def symmetry_strings(graph, max_rank: int = _MAX_KERNEL_RANK) -> list:
    """Every nonempty vertex set with deterministic x-parity.

    These are the nonzero combinations of the adjacency nullspace mod 2,
    sorted by size then lexicographically. Graphs whose nullspace rank
    exceeds ``max_rank`` are refused rather than enumerated.
    """
    basis = _gf2_nullspace(graph.adjacency())
    if len(basis) > max_rank:
        raise ValueError(f"nullspace rank {len(basis)} exceeds the enumeration cap {max_rank}")
    strings = []
    for r in range(1, len(basis) + 1):
        for combo in combinations(basis, r):
            vec = np.zeros(graph.n_vertices, dtype=bool)
            for b in combo:
                vec ^= b
            strings.append(frozenset(np.flatnonzero(vec).tolist()))
    strings = sorted(set(strings), key=lambda s: (len(s), tuple(sorted(s))))
    return strings


def gamma_from_displacement(spacing: float, displacement: float) -> float:
    """Residual single-axis angle injected by an out-of-slot input atom.

    Pulling the input ``displacement`` um outward weakens its bond, so
    the entangling phase under-rotates by w = (pi/2)(1 - v'/v). Folded
    through the parity readout this acts as a rotation gamma of the
    teleported bit with tan(gamma/2) = sqrt(2) tan(w). The map is odd in
    the phase deviation w and saturates at pi as the atom is pulled far
    out.
    Inward displacements hit a pole where the bond reaches triple
    strength; those are rejected.
    """
    d = float(spacing)
    dd = float(displacement)
    if dd <= -d:
        raise ValueError("displacement must stay above -spacing")
    ratio = pair_interaction(d + dd) / pair_interaction(d)
    w = 0.5 * math.pi * (1.0 - ratio)
    if w <= -0.5 * math.pi + 1e-12:
        crit = d * (3.0 ** (-1.0 / 6.0) - 1.0)
        raise ValueError(
            f"bond at {ratio:.3f} times nominal strength is past the pole; "
            f"inward displacement must stay above {crit:.6f} um at spacing {d:g} um")
    return 2.0 * math.atan(math.sqrt(2.0) * math.tan(w))


def displacement_for_gamma(spacing: float, gamma: float) -> float:
    """Inverse of ``gamma_from_displacement`` on the principal branch."""
    g = float(gamma)
    if not -math.pi < g < math.pi:
        raise ValueError("gamma must lie strictly inside (-pi, pi)")
    w = math.atan(math.tan(g / 2.0) / math.sqrt(2.0))
    ratio = 1.0 - 2.0 * w / math.pi
    if ratio <= 0.0:
        raise ValueError("gamma too close to pi, no finite displacement reaches it")
    return float(spacing) * (ratio ** (-1.0 / 6.0) - 1.0)


def q_ideal(gamma: float) -> float:
    """Noise-free teleported-parity success rate at injected angle gamma."""
    return (3.0 + math.cos(gamma)) / 4.0


def keep_fraction(gamma: float) -> float:
    """Post-selection acceptance rate at injected angle gamma."""
    return 2.0 / (3.0 + math.cos(gamma))
