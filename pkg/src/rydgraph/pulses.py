"""Global drive schedules.

Every atom sees the same drive, so a schedule is just a list of
segments, each with an envelope shape, a duration, a peak Rabi
frequency, and a fixed equatorial phase. Negative net rotation angles
are expressed by advancing the phase by pi, never by a negative
amplitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import cz_time

SHAPES = ("square", "triangle")


@dataclass(frozen=True)
class PulseSegment:
    """One stretch of the global drive.

    ``shape`` is the amplitude envelope, ``duration`` its length in us,
    ``peak_rabi`` the envelope maximum in rad/us and ``phase`` the
    drive phase in rad. A hold is a square segment with zero amplitude.
    """

    label: str
    shape: str
    duration: float
    peak_rabi: float
    phase: float

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not (math.isfinite(float(self.duration)) and self.duration >= 0):
            raise ValueError("duration must be nonnegative and finite")
        if not (math.isfinite(float(self.peak_rabi)) and self.peak_rabi >= 0):
            raise ValueError("peak_rabi must be nonnegative; flip the phase by pi instead")
        if not math.isfinite(float(self.phase)):
            raise ValueError("phase must be finite")

    def amplitude(self, t: float) -> float:
        """Envelope value at time ``t`` measured from segment start."""
        if t < 0 or t > self.duration:
            return 0.0
        if self.shape == "square":
            return self.peak_rabi
        # triangle: linear ramp up to the midpoint, then back down
        return self.peak_rabi * (1.0 - abs(2.0 * t / self.duration - 1.0))


def rotation_angle(segment: PulseSegment) -> float:
    """Net rotation angle, the time integral of the envelope."""
    if segment.shape == "square":
        return segment.peak_rabi * segment.duration
    return segment.peak_rabi * segment.duration / 2.0


def _peak_for(shape: str, duration: float, net_angle: float) -> float:
    if duration <= 0:
        raise ValueError("pulse duration must be positive")
    if shape == "square":
        return net_angle / duration
    return 2.0 * net_angle / duration


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered segments played back to back, starting at t = 0."""

    segments: tuple

    def __post_init__(self):
        if len(self.segments) == 0:
            raise ValueError("schedule needs at least one segment")
        for seg in self.segments:
            if not isinstance(seg, PulseSegment):
                raise ValueError("schedule entries must be PulseSegment instances")

    @property
    def duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def bounds(self):
        """(start, end) of each segment."""
        out, t = [], 0.0
        for seg in self.segments:
            out.append((t, t + seg.duration))
            t += seg.duration
        return tuple(out)

    def evaluate(self, t: float):
        """(amplitude, phase) of the drive at absolute time ``t``.

        Segment boundaries belong to the later segment; outside the
        schedule the drive is off.
        """
        for seg, (t0, t1) in zip(self.segments, self.bounds()):
            if t0 <= t < t1 or (t == t1 == self.duration):
                return seg.amplitude(t - t0), seg.phase
        return 0.0, 0.0


def bell_schedule(spacing: float, prep_width: float = 0.2,
                  measure_width: float = 0.5) -> PulseSchedule:
    """Three-segment sequence that leaves a pair in the even superposition.

    A short triangular half turn tips both atoms, a quiet hold lets the
    pair phase wind up to pi, and a longer triangle at opposite phase
    rotates by 5 pi / 4 into the readout frame. The hold is shortened by
    half of each ramp so the wound phase stays pi including the ramps.
    """
    t_pi = cz_time(spacing)
    hold = t_pi - (prep_width + measure_width) / 2.0
    if hold < 0:
        raise ValueError(
            f"ramp widths exceed the interaction window ({t_pi:.4f} us) at this spacing")
    return PulseSchedule((
        PulseSegment("prep", "triangle", prep_width,
                     _peak_for("triangle", prep_width, math.pi / 2.0), 0.0),
        PulseSegment("hold", "square", hold, 0.0, 0.0),
        PulseSegment("measure", "triangle", measure_width,
                     _peak_for("triangle", measure_width, 5.0 * math.pi / 4.0), math.pi),
    ))


def graph_schedule(spacing: float, pulse_width: float = 0.2) -> PulseSchedule:
    """Entangle-and-read sequence for wire protocols.

    A half turn about +y prepares ``|+...+>``, a hold winds each bond to
    pi, and a half turn about -y maps the x readout onto the native z
    readout (``|+>`` to ``|g>``). Both ramps are triangles of the same
    width, so the hold is shortened by one full width.
    """
    t_pi = cz_time(spacing)
    hold = t_pi - pulse_width
    if hold < 0:
        raise ValueError(
            f"pulse width exceeds the interaction window ({t_pi:.4f} us) at this spacing")
    half = _peak_for("triangle", pulse_width, math.pi / 2.0)
    return PulseSchedule((
        PulseSegment("prep", "triangle", pulse_width, half, math.pi / 2.0),
        PulseSegment("hold", "square", hold, 0.0, 0.0),
        PulseSegment("measure", "triangle", pulse_width, half, 3.0 * math.pi / 2.0),
    ))


def save_schedule(schedule: PulseSchedule, path) -> None:
    """One ``label shape duration_us omega_max_rad_per_us phi_rad`` per line."""
    lines = []
    for seg in schedule.segments:
        lines.append(f"{seg.label} {seg.shape} {seg.duration!r} "
                     f"{seg.peak_rabi!r} {seg.phase!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_schedule(path) -> PulseSchedule:
    segs = []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(
                    f"{path}:{ln}: expected 'label shape duration omega_max phi', got {line!r}")
            segs.append(PulseSegment(parts[0], parts[1], float(parts[2]),
                                     float(parts[3]), float(parts[4])))
    if not segs:
        raise ValueError(f"{path}: no segments found")
    return PulseSchedule(tuple(segs))
