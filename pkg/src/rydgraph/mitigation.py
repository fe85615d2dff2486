"""Readout-bias forward model and its inverse on sparse counts.

The bias channel is one-sided: a recorded one decays to zero with
probability eps while zeros are trusted. Per atom that is the 2x2 map
[[1, eps], [0, 1 - eps]] on (p0, p1); its inverse is applied axis by
axis, which can push estimates slightly negative, so the corrected
table is clipped and renormalized and the moved mass is reported.
"""
from __future__ import annotations


def _check_counts(counts):
    if not counts:
        raise ValueError("empty counts table")
    width = None
    for key, val in counts.items():
        if not isinstance(key, str) or any(c not in "01" for c in key):
            raise ValueError(f"count keys must be 0/1 strings, got {key!r}")
        if width is None:
            width = len(key)
        elif len(key) != width:
            raise ValueError("count keys must share one width")
        if val < 0:
            raise ValueError(f"negative count for {key!r}")
    return width


def _check_eps(eps):
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps!r}")


def _flip_bit(key: str, axis: int) -> str:
    flipped = "0" if key[axis] == "1" else "1"
    return key[:axis] + flipped + key[axis + 1:]


def bias_counts(counts: dict, eps: float) -> dict:
    """Push a clean counts table through the damping channel."""
    width = _check_counts(counts)
    _check_eps(eps)
    cur = dict(counts)
    if eps == 0.0:
        return cur
    for axis in range(width):
        nxt = {}
        for key, val in cur.items():
            if key[axis] == "1":
                nxt[key] = nxt.get(key, 0.0) + val * (1.0 - eps)
                low = _flip_bit(key, axis)
                nxt[low] = nxt.get(low, 0.0) + val * eps
            else:
                nxt[key] = nxt.get(key, 0.0) + val
        cur = nxt
    return {k: v for k, v in sorted(cur.items()) if v != 0.0}


def correct_counts(counts: dict, eps: float):
    """Invert the damping channel on a measured counts table.

    Returns the corrected table and the amount of probability-weighted
    count mass that had to move during clipping and renormalization.
    The raw inverse is exact in expectation; on finite samples it can
    produce small negative entries, which are clipped to zero before
    rescaling back to the original total.
    """
    width = _check_counts(counts)
    _check_eps(eps)
    total = float(sum(counts.values()))
    cur = {k: float(v) for k, v in counts.items()}
    if eps == 0.0:
        return dict(sorted(cur.items())), 0.0
    keep = 1.0 - eps
    for axis in range(width):
        nxt = {}
        for key, val in cur.items():
            if key[axis] == "1":
                nxt[key] = nxt.get(key, 0.0) + val / keep
                low = _flip_bit(key, axis)
                nxt[low] = nxt.get(low, 0.0) - val * eps / keep
            else:
                nxt[key] = nxt.get(key, 0.0) + val
        cur = nxt
    clipped = {k: max(0.0, v) for k, v in cur.items()}
    clipped_total = sum(clipped.values())
    if clipped_total <= 0.0:
        raise ValueError("correction removed all count mass")
    scale = total / clipped_total
    out = {k: v * scale for k, v in sorted(clipped.items()) if v > 0.0}
    moved = 0.5 * sum(abs(out.get(k, 0.0) - cur.get(k, 0.0))
                      for k in set(out) | set(cur))
    return out, moved


def write_counts(counts: dict, path, header=None) -> None:
    """One ``bitstring count`` line per entry, sorted by bitstring."""
    lines = []
    if header:
        lines.append(header if header.startswith("#") else "# " + header)
    for key, val in sorted(counts.items()):
        if float(val).is_integer():
            lines.append(f"{key} {int(val)}")
        else:
            lines.append(f"{key} {val:.9g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_counts(path) -> dict:
    counts = {}
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected 'bitstring count'")
            counts[parts[0]] = counts.get(parts[0], 0.0) + float(parts[1])
    if not counts:
        raise ValueError(f"{path}: no counts found")
    return counts
