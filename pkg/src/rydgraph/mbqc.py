"""Measurement-driven wire protocols.

A protocol bundles a layout, its bond graph, and the vertices that
carry logical inputs and outputs. Running one samples the x parity of
every atom, discards shots whose displaced inputs read one, and folds
the leftover measurement randomness into each output through a fixed
parity set. The parity sets are not hard coded: they are solved from
the bond graph as the deterministic-parity sets that touch the right
inputs, so any wiring with a suitable adjacency nullspace works.

Two backends exist. The step-pulse oracle assigns each drawn bond its
target phase directly and can also load logical ones onto inputs. The
pulsed backend integrates the global drive over the real couplings,
long-range tails included.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import (DEFAULT_STEP, build_ideal_graph_state, evolve, init_ground,
                     sample_bitstrings)
from .geometry import (AtomLayout, GraphSpec, build_chain, build_cnot_layout,
                       build_swap_layout, chain_graph, interaction_matrix,
                       pair_interaction)
from .noise import (NoiseConfig, apply_readout_bias, apply_x_flip,
                    averaged_coupling_scale, sample_jittered_layout)
from .observables import OrderEstimate, bit_parity, string_order, symmetry_strings
from .pulses import graph_schedule


@dataclass(frozen=True)
class ShotRecord:
    """One measured shot: logical basis, selection flag, raw bits, and
    the corrected output bits (None when the shot was discarded)."""

    basis: str
    kept: bool
    bits: tuple
    corrected: tuple | None


@dataclass(frozen=True)
class ProtocolSpec:
    """Wiring of one protocol instance.

    ``corrections`` maps each output vertex to the vertex set whose
    sampled parity reproduces that logical output. ``reference_layout``
    is the same geometry without the input displacement; bond detunings
    are measured against it. ``pulsed_ok`` marks whether the geometry is
    faithful under the real drive or only under the step-pulse oracle.
    """

    name: str
    layout: AtomLayout
    graph: GraphSpec
    inputs: tuple
    outputs: tuple
    corrections: tuple
    reference_layout: AtomLayout
    pulsed_ok: bool = True

    def correction_set(self, out_vertex: int) -> frozenset:
        for v, s in self.corrections:
            if v == out_vertex:
                return s
        raise KeyError(f"vertex {out_vertex} is not an output of {self.name}")


def _readout_sets(graph, inputs, outputs, targets):
    """Pick a deterministic parity set for each output.

    ``targets[out]`` lists the inputs whose logical labels should XOR
    into that output. Candidate sets must contain the output and meet
    exactly the wanted inputs; the smallest (then lexicographically
    first) candidate wins so the choice is reproducible.
    """
    strings = symmetry_strings(graph)
    ins = set(inputs)
    chosen = []
    for out in outputs:
        want = set(targets[out])
        cands = [s for s in strings if out in s and (s & ins) == want]
        if not cands:
            raise ValueError(
                f"bond graph admits no deterministic readout for vertex {out}")
        best = min(cands, key=lambda s: (len(s), tuple(sorted(s))))
        chosen.append((out, best))
    return tuple(chosen)


def teleport_protocol(n_atoms: int, spacing: float,
                      displacement: float = 0.0) -> ProtocolSpec:
    """Odd wire that moves one logical bit from end to end."""
    if n_atoms < 3 or n_atoms % 2 == 0:
        raise ValueError("the wire must have an odd number of atoms, at least 3")
    layout = build_chain(n_atoms, spacing, displacement)
    graph = chain_graph(n_atoms)
    corrections = _readout_sets(graph, (0,), (n_atoms - 1,), {n_atoms - 1: {0}})
    return ProtocolSpec("teleport", layout, graph, (0,), (n_atoms - 1,), corrections,
                        build_chain(n_atoms, spacing))


def cnot_protocol(spacing: float, displacement: float = 0.0) -> ProtocolSpec:
    """Bridged double wire acting as controlled-NOT on the wire labels.

    In the x-label convention used here the control rail carries c + t
    after the block while the target rail keeps t, which is the same
    gate read in its conjugate basis.
    """
    layout, graph = build_cnot_layout(spacing, displacement)
    c_in, t_in = layout.inputs
    c_out, t_out = layout.outputs
    corrections = _readout_sets(graph, layout.inputs, layout.outputs,
                                {c_out: {c_in, t_in}, t_out: {t_in}})
    ref, _ = build_cnot_layout(spacing)
    return ProtocolSpec("cnot", layout, graph, layout.inputs, layout.outputs,
                        corrections, ref)


def swap_protocol(spacing: float) -> ProtocolSpec:
    """Double wire with three bridges that exchanges the two labels.

    The bridge bonds are longer than the wire pitch, so the block is
    exact only on the step-pulse oracle; the pulsed backend refuses it.
    """
    layout, graph = build_swap_layout(spacing)
    a_in, b_in = layout.inputs
    a_out, b_out = layout.outputs
    corrections = _readout_sets(graph, layout.inputs, layout.outputs,
                                {a_out: {b_in}, b_out: {a_in}})
    return ProtocolSpec("swap", layout, graph, layout.inputs, layout.outputs,
                        corrections, layout, pulsed_ok=False)


def _bond_phases(protocol: ProtocolSpec, actual: AtomLayout, scale: float) -> GraphSpec:
    """Oracle bond phases: pi per drawn bond, detuned by the sixth power
    of the bond stretch relative to the reference geometry."""
    ref = protocol.reference_layout
    weights = []
    for j, k in protocol.graph.edges:
        stretch = actual.distance(j, k) / ref.distance(j, k)
        weights.append(math.pi * stretch ** -6.0 * scale)
    return protocol.graph.reweighted(weights)


def _protocol_state(protocol, mode, actual, scale, flip_inputs, step):
    if mode == "oracle":
        graph = _bond_phases(protocol, actual, scale)
        return build_ideal_graph_state(graph, minus_inputs=flip_inputs)
    vm = interaction_matrix(actual).values * scale
    schedule = graph_schedule(actual.spacing)
    return evolve(init_ground(actual.n), schedule, vm, step=step)


def run_protocol(protocol: ProtocolSpec, mode: str = "oracle",
                 noise: NoiseConfig | None = None, shots: int = 10000,
                 seed: int = 0, flip_inputs=(), step: float = DEFAULT_STEP):
    """Sample shot records for one protocol.

    ``flip_inputs`` lists input vertices loaded with a logical one;
    only the oracle backend can prepare those. The pulsed backend
    realizes the x readout through its final rotation, so its native z
    samples are already the logical x outcomes recorded here.
    """
    noise = noise or NoiseConfig()
    if mode not in ("oracle", "pulsed"):
        raise ValueError("mode must be 'oracle' or 'pulsed'")
    if mode == "pulsed" and not protocol.pulsed_ok:
        raise ValueError(f"the {protocol.name} block runs on the oracle backend only")
    if mode == "pulsed" and flip_inputs:
        raise ValueError("loading a logical one onto an input needs the oracle backend")
    bad = set(flip_inputs) - set(protocol.inputs)
    if bad:
        raise ValueError(f"cannot flip non-input vertices {sorted(bad)}")
    if shots < 1:
        raise ValueError("shots must be positive")

    master = np.random.SeedSequence(seed)
    rng_sample, rng_flip, rng_damp = (np.random.default_rng(s) for s in master.spawn(3))
    basis = "x" if mode == "oracle" else "z"

    scale = 1.0
    if noise.jitter_um > 0 and noise.jitter_mode == "averaged":
        scale = averaged_coupling_scale(protocol.layout.spacing, noise.jitter_um)

    quenched = noise.jitter_um > 0 and noise.jitter_mode == "quenched"
    if not quenched:
        state = _protocol_state(protocol, mode, protocol.layout, scale, flip_inputs, step)
        bits = sample_bitstrings(state, basis, shots, rng_sample)
    else:
        rows = []
        for i in range(shots):
            rng_i = np.random.default_rng(np.random.SeedSequence([seed, i]))
            actual = sample_jittered_layout(protocol.layout, noise.jitter_um, rng_i)
            state = _protocol_state(protocol, mode, actual, 1.0, flip_inputs, step)
            rows.append(sample_bitstrings(state, basis, 1, rng_i)[0])
        bits = np.asarray(rows, dtype=np.uint8)

    if noise.eps_l > 0:
        bits = apply_x_flip(bits, noise.eps_l, rng_flip)
    if noise.eps_damp > 0:
        bits = apply_readout_bias(bits, noise.eps_damp, rng_damp)

    kept = post_select(bits, protocol)
    corrected = byproduct_correct(bits, protocol)
    records = []
    for i in range(shots):
        records.append(ShotRecord("x", bool(kept[i]), tuple(int(b) for b in bits[i]),
                                  tuple(int(c) for c in corrected[i]) if kept[i] else None))
    return records


def post_select(bits, protocol: ProtocolSpec):
    """Shot mask: displaced inputs must read zero; otherwise keep all."""
    arr = np.asarray(bits, dtype=np.uint8)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if protocol.layout.input_displacement == 0.0 or not protocol.inputs:
        mask = np.ones(arr.shape[0], dtype=bool)
    else:
        mask = np.all(arr[:, list(protocol.inputs)] == 0, axis=1)
    return bool(mask[0]) if single else mask


def byproduct_correct(bits, protocol: ProtocolSpec):
    """Fold the measured parities into each output bit.

    With a displaced input the input atom drops out of its parity set;
    kept shots read zero there, so the value is unchanged and the
    correction stays meaningful on exactly the selected shots.
    """
    arr = np.asarray(bits, dtype=np.uint8)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    displaced = protocol.layout.input_displacement != 0.0
    cols = []
    for _, parity_set in protocol.corrections:
        atoms = set(parity_set)
        if displaced:
            atoms -= set(protocol.inputs)
        cols.append(bit_parity(arr, atoms))
    out = np.stack(cols, axis=1)
    return out[0] if single else out


def _kept_output_bits(records):
    rows = [r.corrected for r in records if r.kept]
    if not rows:
        raise RuntimeError("every shot was discarded by post-selection")
    return np.asarray(rows, dtype=np.uint8)


def string_parity_estimate(n_string: int, spacing: float = 12.3,
                           noise: NoiseConfig | None = None, shots: int = 10000,
                           seed: int = 0, mode: str = "oracle",
                           step: float = DEFAULT_STEP) -> OrderEstimate:
    """Even fraction of the deterministic wire string with ``n_string`` sites.

    A wire of 2 n - 1 atoms has exactly one deterministic parity set,
    the n alternating sites including both ends; its sampled parity is
    the order estimator used across size sweeps.
    """
    if n_string < 2:
        raise ValueError("a string needs at least two sites")
    n_atoms = 2 * n_string - 1
    noise = noise or NoiseConfig()
    if mode not in ("oracle", "pulsed"):
        raise ValueError("mode must be 'oracle' or 'pulsed'")
    layout = build_chain(n_atoms, spacing)
    graph = chain_graph(n_atoms)
    master = np.random.SeedSequence(seed)
    rng_sample, rng_flip, rng_damp = (np.random.default_rng(s) for s in master.spawn(3))
    if mode == "oracle":
        state = build_ideal_graph_state(graph)
        bits = sample_bitstrings(state, "x", shots, rng_sample)
    else:
        vm = interaction_matrix(layout).values
        state = evolve(init_ground(n_atoms), graph_schedule(spacing), vm, step=step)
        bits = sample_bitstrings(state, "z", shots, rng_sample)
    if noise.eps_l > 0:
        bits = apply_x_flip(bits, noise.eps_l, rng_flip)
    if noise.eps_damp > 0:
        bits = apply_readout_bias(bits, noise.eps_damp, rng_damp)
    return string_order(bits, range(0, n_atoms, 2))


def teleport_Q(n_atoms: int, spacing: float = 12.3, displacement: float = 0.0,
               mode: str = "oracle", noise: NoiseConfig | None = None,
               shots: int = 10000, seed: int = 0,
               step: float = DEFAULT_STEP) -> OrderEstimate:
    """Fraction of kept shots whose corrected output reads zero."""
    protocol = teleport_protocol(n_atoms, spacing, displacement)
    records = run_protocol(protocol, mode=mode, noise=noise, shots=shots,
                           seed=seed, step=step)
    outs = _kept_output_bits(records)[:, 0]
    from .stats import jackknife_se

    value, se = jackknife_se((outs == 0).astype(float))
    return OrderEstimate(float(value), float(se), int(outs.shape[0]), len(records))


def _exact_outcome_probs(protocol, flip_inputs=()):
    """Full x-outcome distribution of the oracle state."""
    state = _protocol_state(protocol, "oracle", protocol.layout, 1.0, flip_inputs,
                            DEFAULT_STEP)
    from .engine import _to_measurement_frame, n_atoms_of

    n = n_atoms_of(state)
    psi = _to_measurement_frame(state, n, "x")
    p = np.abs(psi) ** 2
    return p / p.sum(), n


def _index_bits(n):
    idx = np.arange(1 << n)
    return np.stack([((idx >> (n - 1 - a)) & 1).astype(np.uint8) for a in range(n)], axis=1)


def teleport_exact(n_atoms: int, spacing: float = 12.3,
                   displacement: float = 0.0):
    """Enumerated (success rate, keep rate) of the teleport wire."""
    protocol = teleport_protocol(n_atoms, spacing, displacement)
    p, n = _exact_outcome_probs(protocol)
    bits = _index_bits(n)
    kept = post_select(bits, protocol)
    corr = byproduct_correct(bits, protocol)[:, 0]
    keep_rate = float(p[kept].sum())
    if keep_rate <= 0:
        raise RuntimeError("post-selection removed all probability mass")
    q = float(p[kept & (corr == 0)].sum() / keep_rate)
    return q, keep_rate


def _logical_rows(protocol, mapping):
    """(input labels) -> expected output labels under the block's map."""
    rows = {}
    n_in = len(protocol.inputs)
    for labels in np.ndindex(*(2,) * n_in):
        rows[tuple(int(b) for b in labels)] = mapping(*labels)
    return rows


def _table_for(protocol, mapping, shots, seed, noise):
    table = {}
    for row_index, (labels, _) in enumerate(sorted(_logical_rows(protocol, mapping).items())):
        flips = tuple(v for v, b in zip(protocol.inputs, labels) if b)
        records = run_protocol(protocol, mode="oracle", noise=noise, shots=shots,
                               seed=seed * 8 + row_index, flip_inputs=flips)
        outs = _kept_output_bits(records)
        freqs = {}
        for row in outs:
            key = tuple(int(b) for b in row)
            freqs[key] = freqs.get(key, 0) + 1
        total = outs.shape[0]
        table[labels] = {k: v / total for k, v in sorted(freqs.items())}
    return table


def _violation_mass(protocol, mapping):
    """Enumerated probability of any corrected output missing its target."""
    rows = _logical_rows(protocol, mapping)
    worst = 0.0
    for labels, expect in rows.items():
        flips = tuple(v for v, b in zip(protocol.inputs, labels) if b)
        p, n = _exact_outcome_probs(protocol, flip_inputs=flips)
        bits = _index_bits(n)
        kept = post_select(bits, protocol)
        corr = byproduct_correct(bits, protocol)
        bad = np.any(corr != np.asarray(expect, dtype=np.uint8), axis=1)
        keep_rate = float(p[kept].sum())
        worst = max(worst, float(p[kept & bad].sum() / keep_rate))
    return worst


def cnot_truth_table(spacing: float, displacement: float = 0.0,
                     mode: str = "oracle", shots: int = 1000, seed: int = 0,
                     noise: NoiseConfig | None = None):
    """Corrected-output frequencies for the four logical input settings.

    Input settings are loaded as sign flips on the input wires, which
    only the step-pulse oracle can prepare; a nonzero displacement adds
    the geometric detuning and its post-selection on top.
    """
    if mode != "oracle":
        raise ValueError("input settings need the oracle backend")
    protocol = cnot_protocol(spacing, displacement)
    return _table_for(protocol, lambda c, t: (c ^ t, t), shots, seed, noise)


def cnot_violation_mass(spacing: float, displacement: float = 0.0) -> float:
    """Worst-row enumerated failure probability of the bridged block."""
    return _violation_mass(cnot_protocol(spacing, displacement),
                           lambda c, t: (c ^ t, t))


def swap_check(spacing: float, mode: str = "oracle", shots: int = 1000,
               seed: int = 0, noise: NoiseConfig | None = None):
    """Truth-table accuracy of the exchange block.

    Returns per-row accuracies, the overall accuracy, and the sampled
    shot count. Only the oracle backend is accepted; the bridge bonds
    are longer than the wire pitch so the pulsed drive cannot realize
    them faithfully.
    """
    if mode != "oracle":
        raise ValueError("the swap block runs on the oracle backend only")
    protocol = swap_protocol(spacing)
    mapping = lambda a, b: (b, a)
    table = _table_for(protocol, mapping, shots, seed, noise)
    rows = {}
    for labels, freqs in table.items():
        rows[labels] = freqs.get(mapping(*labels), 0.0)
    overall = float(np.mean(list(rows.values())))
    return {"rows": rows, "accuracy": overall, "shots": shots}


def swap_violation_mass(spacing: float) -> float:
    """Worst-row enumerated failure probability of the exchange block."""
    return _violation_mass(swap_protocol(spacing), lambda a, b: (b, a))


def write_shots(records, path, header=None) -> None:
    """Shot log: ``basis kept bits corrected`` per line, '-' if discarded."""
    lines = []
    if header:
        lines.append(header if header.startswith("#") else "# " + header)
    for r in records:
        bits = "".join(str(b) for b in r.bits)
        corr = "".join(str(b) for b in r.corrected) if r.kept else "-"
        lines.append(f"{r.basis} {int(r.kept)} {bits} {corr}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_shots(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{ln}: expected 'basis kept bits corrected'")
            basis, kept_s, bits_s, corr_s = parts
            kept = bool(int(kept_s))
            bits = tuple(int(c) for c in bits_s)
            corr = None if corr_s == "-" else tuple(int(c) for c in corr_s)
            records.append(ShotRecord(basis, kept, bits, corr))
    return records
