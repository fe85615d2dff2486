"""Tweezer layouts, bond graphs, and pairwise couplings.

Distances are micrometers, couplings rad/us. A pair interacts through
the van der Waals tail C6/r^6, so two atoms parked 12.3 um apart pick
up a pi phase on the doubly excited component in about 2 us.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import MAX_ATOMS

C6 = 5_420_503.0  # um^6 rad/us

_ROLES = ("input", "body", "output")


def pair_interaction(distance: float) -> float:
    """Coupling C6/r^6 in rad/us for two atoms ``distance`` um apart."""
    d = float(distance)
    if not (math.isfinite(d) and d > 0):
        raise ValueError(f"distance must be positive and finite, got {distance!r}")
    return C6 / d ** 6


def cz_time(distance: float) -> float:
    """Hold time that accumulates a pi phase on |rr> at this spacing."""
    return math.pi / pair_interaction(distance)


@dataclass(frozen=True)
class AtomLayout:
    """Planar arrangement of atoms with per-atom protocol roles.

    ``positions`` are (x, y) pairs in um. Roles mark wire inputs and
    outputs; everything else is ``body``. ``spacing`` records the
    nominal pitch and ``input_displacement`` the outward shift applied
    to the input atoms, both needed to reconstruct bond detunings.
    """

    positions: tuple
    roles: tuple
    spacing: float
    input_displacement: float = 0.0

    def __post_init__(self):
        if len(self.positions) == 0:
            raise ValueError("layout needs at least one atom")
        if len(self.positions) != len(self.roles):
            raise ValueError("positions and roles must have equal length")
        for r in self.roles:
            if r not in _ROLES:
                raise ValueError(f"unknown role {r!r}, expected one of {_ROLES}")
        pts = np.asarray(self.positions, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or not np.all(np.isfinite(pts)):
            raise ValueError("positions must be finite (x, y) pairs")
        if not (math.isfinite(float(self.spacing)) and self.spacing > 0):
            raise ValueError("spacing must be positive")
        if len(pts) > 1:
            d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
            np.fill_diagonal(d2, np.inf)
            if float(d2.min()) < 1e-12:
                raise ValueError("layout contains coincident atoms")

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def inputs(self) -> tuple:
        return tuple(i for i, r in enumerate(self.roles) if r == "input")

    @property
    def outputs(self) -> tuple:
        return tuple(i for i, r in enumerate(self.roles) if r == "output")

    def coords(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def distance(self, j: int, k: int) -> float:
        pj, pk = self.positions[j], self.positions[k]
        return math.hypot(pj[0] - pk[0], pj[1] - pk[1])


@dataclass(frozen=True)
class GraphSpec:
    """Bond list with one phase weight per edge, vertices counted from 0."""

    n_vertices: int
    edges: tuple
    weights: tuple

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if len(self.weights) != len(self.edges):
            raise ValueError("need exactly one weight per edge")
        seen = set()
        for (j, k), w in zip(self.edges, self.weights):
            if j == k:
                raise ValueError(f"self loop at vertex {j}")
            if not (0 <= j < k < self.n_vertices):
                raise ValueError(f"edge ({j}, {k}) out of range or not ordered j < k")
            if (j, k) in seen:
                raise ValueError(f"duplicate edge ({j}, {k})")
            if not math.isfinite(float(w)):
                raise ValueError(f"weight for edge ({j}, {k}) must be finite")
            seen.add((j, k))

    @classmethod
    def regular(cls, n_vertices: int, edges, weight: float = math.pi) -> "GraphSpec":
        es = tuple(tuple(sorted(e)) for e in edges)
        return cls(n_vertices, es, (float(weight),) * len(es))

    def neighbors(self, v: int) -> tuple:
        out = []
        for j, k in self.edges:
            if j == v:
                out.append(k)
            elif k == v:
                out.append(j)
        return tuple(sorted(out))

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=np.uint8)
        for j, k in self.edges:
            a[j, k] = a[k, j] = 1
        return a

    def reweighted(self, weights) -> "GraphSpec":
        return GraphSpec(self.n_vertices, self.edges, tuple(float(w) for w in weights))


def build_chain(n_atoms: int, spacing: float, displacement: float = 0.0) -> AtomLayout:
    """Linear wire along x with atoms at multiples of ``spacing``.

    The first atom is the input and is pulled ``displacement`` um
    further out (negative values push it inward); the last atom is the
    output.
    """
    if n_atoms < 2:
        raise ValueError("a wire needs at least two atoms")
    if n_atoms > MAX_ATOMS:
        raise ValueError(f"{n_atoms} atoms exceeds the {MAX_ATOMS}-atom cap")
    if displacement <= -spacing:
        raise ValueError("displacement must stay above -spacing to keep atoms apart")
    xs = [i * spacing for i in range(n_atoms)]
    xs[0] -= displacement
    roles = ("input",) + ("body",) * (n_atoms - 2) + ("output",)
    return AtomLayout(tuple((x, 0.0) for x in xs), roles, spacing, displacement)


def chain_graph(n_atoms: int) -> GraphSpec:
    """Nearest-neighbour bonds of a linear wire."""
    if n_atoms < 2:
        raise ValueError("a wire needs at least two atoms")
    return GraphSpec.regular(n_atoms, [(i, i + 1) for i in range(n_atoms - 1)])


def build_rect(rows: int, cols: int, spacing: float):
    """Rectangular grid in reading order (left to right, top to bottom)."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    n = rows * cols
    if n > MAX_ATOMS:
        raise ValueError(f"{rows}x{cols} grid exceeds the {MAX_ATOMS}-atom cap")
    pos = [(c * spacing, -r * spacing) for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    layout = AtomLayout(tuple(pos), ("body",) * n, spacing)
    return layout, GraphSpec.regular(n, edges)


def build_cnot_layout(spacing: float, displacement: float = 0.0):
    """Two seven-atom wires bridged at midwire by a single extra atom.

    Vertices 0..6 form the control wire at y = 0, vertex 7 the bridge,
    and 8..14 the target wire at y = -2 spacing. Inputs are 0 and 8,
    outputs 6 and 14; inputs shift outward along -x by ``displacement``.
    """
    d = spacing
    if displacement <= -d:
        raise ValueError("displacement must stay above -spacing")
    pos = [(i * d, 0.0) for i in range(7)]
    pos.append((3 * d, -d))
    pos += [(i * d, -2 * d) for i in range(7)]
    pos[0] = (0.0 - displacement, 0.0)
    pos[8] = (0.0 - displacement, -2 * d)
    roles = ["body"] * 15
    roles[0] = roles[8] = "input"
    roles[6] = roles[14] = "output"
    edges = [(i, i + 1) for i in range(6)]
    edges += [(8 + i, 9 + i) for i in range(6)]
    edges += [(3, 7), (7, 11)]
    layout = AtomLayout(tuple(pos), tuple(roles), d, displacement)
    return layout, GraphSpec.regular(15, edges)


def build_swap_layout(spacing: float):
    """Two seven-atom wires tied together by three two-atom bridges.

    Vertices 0..6 and 7..13 are the wires; the six central atoms
    (14, 15), (16, 17), (18, 19) sit between wire columns 1, 3 and 5,
    each bonded to both wires. Bridge bonds are geometrically longer
    than the wire pitch, so this block is meaningful only under the
    step-pulse abstraction where every drawn bond realizes a full pi.
    """
    d = spacing
    pos = [(i * d, 0.0) for i in range(7)] + [(i * d, -2 * d) for i in range(7)]
    edges = [(i, i + 1) for i in range(6)] + [(7 + i, 8 + i) for i in range(6)]
    for col in (1, 3, 5):
        for dx in (-0.5, 0.5):
            u = len(pos)
            pos.append((col * d + dx * d, -d))
            edges += [(col, u), (u, 7 + col)]
    roles = ["body"] * 20
    roles[0] = roles[7] = "input"
    roles[6] = roles[13] = "output"
    layout = AtomLayout(tuple(pos), tuple(roles), d)
    return layout, GraphSpec.regular(20, edges)


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Symmetric all-pairs coupling matrix in rad/us, zero diagonal."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def interaction_matrix(layout: AtomLayout, cutoff: float | None = None) -> InteractionMatrix:
    """All-pairs couplings from atom positions.

    ``cutoff``, in um, zeroes every pair farther apart than that; by
    default all long-range tails are kept.
    """
    pts = layout.coords()
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    if float(dist.min()) < 1e-6:
        raise ValueError("coincident atoms give a divergent coupling")
    v = C6 / dist ** 6
    if cutoff is not None:
        if cutoff <= 0:
            raise ValueError("cutoff must be positive")
        v[dist > cutoff] = 0.0
    np.fill_diagonal(v, 0.0)
    return InteractionMatrix(v)


def write_layout(layout: AtomLayout, path) -> None:
    """Plain text layout: one ``x_um y_um role`` line per atom."""
    lines = [f"# spacing_um={layout.spacing!r} input_displacement_um={layout.input_displacement!r}"]
    for (x, y), role in zip(layout.positions, layout.roles):
        lines.append(f"{x:.9g} {y:.9g} {role}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_layout(path) -> AtomLayout:
    spacing = None
    displacement = 0.0
    pos, roles = [], []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("spacing_um="):
                        spacing = float(tok.split("=", 1)[1])
                    elif tok.startswith("input_displacement_um="):
                        displacement = float(tok.split("=", 1)[1])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{ln}: expected 'x y role', got {line!r}")
            pos.append((float(parts[0]), float(parts[1])))
            roles.append(parts[2])
    if not pos:
        raise ValueError(f"{path}: no atoms found")
    if spacing is None:
        # fall back to the closest pair when the header is missing
        pts = np.asarray(pos)
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        spacing = float(np.sqrt(d2.min()))
    return AtomLayout(tuple(pos), tuple(roles), spacing, displacement)


def write_graph(graph: GraphSpec, path) -> None:
    """Plain text bond list, vertices numbered from 1: ``j k theta``."""
    lines = [f"# n_vertices={graph.n_vertices}"]
    for (j, k), w in zip(graph.edges, graph.weights):
        lines.append(f"{j + 1} {k + 1} {w:.9g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path, n_vertices: int | None = None) -> GraphSpec:
    """Read a 1-based bond list; a missing weight column defaults to pi."""
    edges, weights = [], []
    n_header = None
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n_vertices="):
                        n_header = int(tok.split("=", 1)[1])
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{ln}: expected 'j k [theta]', got {line!r}")
            j, k = int(parts[0]) - 1, int(parts[1]) - 1
            if j < 0 or k < 0:
                raise ValueError(f"{path}:{ln}: vertices are numbered from 1")
            edges.append(tuple(sorted((j, k))))
            weights.append(float(parts[2]) if len(parts) == 3 else math.pi)
    if not edges:
        raise ValueError(f"{path}: no edges found")
    n = n_vertices or n_header or (max(max(e) for e in edges) + 1)
    return GraphSpec(n, tuple(edges), tuple(weights))
