"""State-vector backend for globally driven two-level atom arrays.

Conventions used throughout the package:

* amplitudes live in a plain complex ndarray of length ``2**n``,
* atom 1 is the most significant bit of the basis index,
* ``|g>`` is bit value 0 and carries sigma_z eigenvalue +1,
* a controlled phase multiplies the doubly excited component by
  ``exp(-i theta)``,
* global rotations are ``exp(-i theta/2 (cos phi sx + sin phi sy))``.

Times are in microseconds and angular frequencies in rad/us.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

MAX_ATOMS = 24
DEFAULT_STEP = 1e-3  # us, integrator step for pulsed segments

# States are bare arrays; the alias only names the contract.
StateVector = np.ndarray

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


def n_atoms_of(state: StateVector) -> int:
    """Atom count encoded in the state length, with shape validation."""
    arr = np.asarray(state)
    if arr.ndim != 1:
        raise ValueError("state must be a one dimensional amplitude array")
    m = arr.shape[0]
    n = m.bit_length() - 1
    if m < 2 or (1 << n) != m:
        raise ValueError(f"state length {m} is not a power of two")
    if n > MAX_ATOMS:
        raise ValueError(f"state encodes {n} atoms, cap is {MAX_ATOMS}")
    return n


def init_ground(n_atoms: int) -> StateVector:
    """All atoms in |g>."""
    if not 1 <= n_atoms <= MAX_ATOMS:
        raise ValueError(f"n_atoms must be in 1..{MAX_ATOMS}, got {n_atoms}")
    psi = np.zeros(1 << n_atoms, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def _apply_one(state, n, atom, u):
    ps = state.reshape([2] * n)
    ps = np.moveaxis(np.tensordot(u, ps, axes=([1], [atom])), 0, atom)
    return np.ascontiguousarray(ps).reshape(-1)


def _apply_uniform(state, n, u):
    ps = state.reshape([2] * n)
    for a in range(n):
        ps = np.moveaxis(np.tensordot(u, ps, axes=([1], [a])), 0, a)
    return np.ascontiguousarray(ps).reshape(-1)


def _rotation_matrix(phase: float, angle: float) -> np.ndarray:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    off = cmath.exp(-1j * phase)
    return np.array([[c, -1j * s * off], [-1j * s * off.conjugate(), c]])


def apply_global_rotation(state: StateVector, phase: float, angle: float) -> StateVector:
    """Rotate every atom by ``angle`` about the equatorial axis at ``phase``."""
    n = n_atoms_of(state)
    if not (math.isfinite(phase) and math.isfinite(angle)):
        raise ValueError("phase and angle must be finite")
    return _apply_uniform(np.asarray(state, dtype=np.complex128), n, _rotation_matrix(phase, angle))


def apply_cp(state: StateVector, j: int, k: int, theta: float) -> StateVector:
    """Multiply amplitudes with atoms j and k both excited by exp(-i theta)."""
    n = n_atoms_of(state)
    if j == k or not (0 <= j < n and 0 <= k < n):
        raise ValueError(f"need two distinct atoms below {n}, got {j}, {k}")
    idx = np.arange(state.shape[0])
    both = ((idx >> (n - 1 - j)) & (idx >> (n - 1 - k)) & 1).astype(bool)
    out = np.array(state, dtype=np.complex128, copy=True)
    out[both] *= cmath.exp(-1j * theta)
    return out


def _pair_energies(values, n: int) -> np.ndarray:
    """Diagonal of the coupling term over the full basis."""
    m = np.asarray(values, dtype=float)
    if m.shape != (n, n):
        raise ValueError(f"coupling matrix must be {n}x{n}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("coupling matrix must be finite")
    idx = np.arange(1 << n)
    e = np.zeros(1 << n)
    for j in range(n):
        for k in range(j + 1, n):
            if m[j, k] != 0.0:
                both = (idx >> (n - 1 - j)) & (idx >> (n - 1 - k)) & 1
                e += m[j, k] * both
    return e


def evolve(state: StateVector, schedule, interactions, step: float = DEFAULT_STEP,
           order: int = 2) -> StateVector:
    """Integrate the drive plus always-on diagonal couplings.

    ``schedule`` is a sequence of pulse segments (see ``pulses``);
    ``interactions`` an object with a ``values`` matrix or the matrix
    itself. Segments with zero amplitude advance in a single exact
    diagonal step. Driven segments use symmetric splitting with the
    amplitude sampled at step midpoints; the per-segment step count is
    rounded up to an even number so ramped pulses keep their exact net
    area. ``order=1`` selects plain sequential splitting instead.
    """
    n = n_atoms_of(state)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if not (step > 0 and math.isfinite(step)):
        raise ValueError("step must be positive and finite")
    values = getattr(interactions, "values", interactions)
    energies = _pair_energies(values, n)
    psi = np.asarray(state, dtype=np.complex128).copy()
    for seg in schedule.segments:
        dur = seg.duration
        if dur == 0.0:
            continue
        if seg.peak_rabi == 0.0:
            psi = psi * np.exp(-1j * energies * dur)
            continue
        nst = max(1, math.ceil(dur / step))
        nst += nst % 2
        h = dur / nst
        half = np.exp(-1j * energies * h)
        t = 0.0
        for _ in range(nst):
            if order == 2:
                u = _rotation_matrix(seg.phase, seg.amplitude(t + h / 2.0) * h / 2.0)
                psi = _apply_uniform(psi, n, u)
                psi *= half
                psi = _apply_uniform(psi, n, u)
            else:
                u = _rotation_matrix(seg.phase, seg.amplitude(t) * h)
                psi = _apply_uniform(psi, n, u)
                psi *= half
            t += h
    if not np.all(np.isfinite(psi.view(np.float64))):
        raise ArithmeticError("integration produced non-finite amplitudes")
    return psi


def build_ideal_graph_state(graph, minus_inputs=()) -> StateVector:
    """Entangle ``|+...+>`` with one controlled phase per edge.

    Vertices listed in ``minus_inputs`` start in ``|->`` instead, which
    loads a logical one onto that wire before entangling.
    """
    n = graph.n_vertices
    if n > MAX_ATOMS:
        raise ValueError(f"graph has {n} vertices, cap is {MAX_ATOMS}")
    psi = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    idx = np.arange(1 << n)
    for v in minus_inputs:
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} out of range")
        psi[((idx >> (n - 1 - v)) & 1) == 1] *= -1.0
    for (j, k), w in zip(graph.edges, graph.weights):
        psi = apply_cp(psi, j, k, w)
    return psi


def _to_measurement_frame(state, n, basis):
    if isinstance(basis, str) and basis in ("x", "z"):
        basis = basis * n
    if len(basis) != n or any(c not in "xz" for c in basis):
        raise ValueError("basis must be 'x', 'z', or a per-atom string over {x,z}")
    psi = np.asarray(state, dtype=np.complex128)
    for a, c in enumerate(basis):
        if c == "x":
            psi = _apply_one(psi, n, a, _HADAMARD)
    return psi


def _levelwise_marginals(p):
    """Probabilities marginalized to the first a atoms, for every a."""
    tables = [p]
    while tables[-1].size > 2:
        tables.append(tables[-1].reshape(-1, 2).sum(axis=1))
    tables.reverse()
    return tables  # tables[a] has length 2**(a+1)


def sample_bitstrings(state: StateVector, basis, shots: int, rng) -> np.ndarray:
    """Draw measurement outcomes, one uint8 row of bits per shot.

    Up to 20 atoms the flat distribution is sampled by inverse CDF; past
    that the draw walks atom by atom through conditional marginals so no
    index table of width 2**n is materialized per shot.
    """
    n = n_atoms_of(state)
    if shots < 1:
        raise ValueError("shots must be positive")
    psi = _to_measurement_frame(state, n, basis)
    p = np.abs(psi) ** 2
    p = p / p.sum()
    out = np.zeros((shots, n), dtype=np.uint8)
    if n <= 20:
        draws = rng.choice(p.size, size=shots, p=p)
        for a in range(n):
            out[:, a] = (draws >> (n - 1 - a)) & 1
        return out
    tables = _levelwise_marginals(p)
    idx = np.zeros(shots, dtype=np.int64)
    parent = np.ones(shots)
    for a in range(n):
        p_one = tables[a][2 * idx + 1] / parent
        bit = (rng.random(shots) < p_one).astype(np.uint8)
        out[:, a] = bit
        idx = 2 * idx + bit
        parent = tables[a][idx]
    return out


def measure_all(state: StateVector, basis, rng) -> np.ndarray:
    """One destructive readout of every atom; returns a bit per atom."""
    return sample_bitstrings(state, basis, 1, rng)[0]


def project(state: StateVector, atom: int, basis: str, outcome: int):
    """Collapse one atom onto a basis outcome.

    Returns the renormalized post-measurement state (still expressed in
    the z amplitude frame) and the outcome probability.
    """
    n = n_atoms_of(state)
    if not 0 <= atom < n:
        raise ValueError(f"atom {atom} out of range for {n} atoms")
    if basis not in ("x", "z"):
        raise ValueError("basis must be 'x' or 'z'")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    psi = np.asarray(state, dtype=np.complex128)
    if basis == "x":
        psi = _apply_one(psi, n, atom, _HADAMARD)
    keep = (((np.arange(psi.shape[0]) >> (n - 1 - atom)) & 1) == outcome)
    prob = float(np.sum(np.abs(psi[keep]) ** 2))
    if prob <= 1e-300:
        raise ValueError(f"outcome {outcome} on atom {atom} has zero probability")
    psi = np.where(keep, psi, 0.0) / math.sqrt(prob)
    if basis == "x":
        psi = _apply_one(psi, n, atom, _HADAMARD)
    return psi, prob


def overlap(a: StateVector, b: StateVector) -> float:
    """Squared inner product of two states."""
    av, bv = np.asarray(a), np.asarray(b)
    if av.shape != bv.shape:
        raise ValueError("states must have equal length")
    return float(abs(np.vdot(av, bv)) ** 2)


def fidelity(a: StateVector, b: StateVector) -> float:
    """Pure-state fidelity |<a|b>|, insensitive to global phase."""
    av, bv = np.asarray(a), np.asarray(b)
    if av.shape != bv.shape:
        raise ValueError("states must have equal length")
    return float(abs(np.vdot(av, bv)))


def prep_error_norm(n_atoms: int, spacing: float, duration: float,
                    step: float | None = None) -> float:
    """Distance between a finite-duration half turn and its ideal.

    A square pi/2 pulse of the given duration runs with the chain
    couplings on; the reference is the same rotation applied instantly.
    The global phase is minimized out, so the result is
    ``sqrt(2 (1 - |<ideal|actual>|))``, linear in ``duration`` for
    short pulses.
    """
    from .geometry import build_chain, interaction_matrix
    from .pulses import PulseSchedule, PulseSegment

    if duration <= 0:
        raise ValueError("duration must be positive")
    if n_atoms == 1:
        return 0.0
    if step is None:
        step = duration / 512.0
    seg = PulseSegment("prep", "square", duration, (math.pi / 2.0) / duration, math.pi / 2.0)
    layout = build_chain(n_atoms, spacing)
    full = evolve(init_ground(n_atoms), PulseSchedule((seg,)), interaction_matrix(layout), step=step)
    ideal = apply_global_rotation(init_ground(n_atoms), math.pi / 2.0, math.pi / 2.0)
    return math.sqrt(max(0.0, 2.0 * (1.0 - abs(np.vdot(ideal, full)))))
