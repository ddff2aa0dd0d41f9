"""Heading-set algebra on the circle and the multi-threat DMC.

A :class:`HeadingSet` is a closed subset of the heading circle stored as a
sorted tuple of disjoint counter-clockwise arcs. The safe set for one threat
is the complement of its (open) unsafe cone centred on the line of sight; the
joint safe set is the intersection over threats and may be noncontiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dmc import DmcMode, DmcResult, Mode, xi_star_boundary, xi_star_stayout
from .geometry import TWO_PI, wrap_angle

MERGE_TOL = 1e-12
TIE_TOL = 1e-12


def bearing(origin, target) -> float:
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("bearing undefined for coincident points")
    return math.atan2(dy, dx)


def _ccw(from_angle: float, to_angle: float) -> float:
    """Counter-clockwise travel from one heading to another, in [0, 2pi)."""
    return (to_angle - from_angle) % TWO_PI


@dataclass(frozen=True)
class AngularInterval:
    """Closed arc starting at ``lo`` and sweeping ``width`` radians counter-clockwise."""

    lo: float
    width: float

    @property
    def hi(self) -> float:
        return wrap_angle(self.lo + self.width)

    @property
    def is_full(self) -> bool:
        return self.width >= TWO_PI

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        if self.is_full:
            return True
        off = _ccw(self.lo, theta)
        return off <= self.width + tol or off >= TWO_PI - tol


def _to_segments(intervals: Iterable[AngularInterval]):
    # linear coordinate u = (theta + pi) mod 2pi in [0, 2pi)
    segs = []
    for iv in intervals:
        if iv.width >= TWO_PI:
            segs.append((0.0, TWO_PI))
            continue
        s = (iv.lo + math.pi) % TWO_PI
        e = s + iv.width
        if e <= TWO_PI:
            segs.append((s, e))
        else:
            segs.append((s, TWO_PI))
            segs.append((0.0, e - TWO_PI))
    return sorted(segs)


def _from_segments(segs) -> tuple[AngularInterval, ...]:
    if not segs:
        return ()
    segs = sorted(segs)
    merged = [list(segs[0])]
    for s, e in segs[1:]:
        if s <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if merged[0][0] <= MERGE_TOL and merged[-1][1] >= TWO_PI - MERGE_TOL:
        if len(merged) == 1:
            return (AngularInterval(-math.pi, TWO_PI),)
        # arc crossing the seam at heading pi
        first = merged.pop(0)
        merged[-1][1] = TWO_PI + first[1]
    out = [AngularInterval(wrap_angle(s - math.pi), e - s) for s, e in merged]
    return tuple(sorted(out, key=lambda iv: iv.lo))


@dataclass(frozen=True)
class HeadingSet:
    intervals: tuple[AngularInterval, ...] = ()

    @classmethod
    def of(cls, intervals: Iterable[AngularInterval]) -> "HeadingSet":
        return cls(_from_segments(_to_segments(intervals)))

    @classmethod
    def full(cls) -> "HeadingSet":
        return cls((AngularInterval(-math.pi, TWO_PI),))

    @classmethod
    def empty(cls) -> "HeadingSet":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return len(self.intervals) == 1 and self.intervals[0].is_full

    @property
    def measure(self) -> float:
        return sum(iv.width for iv in self.intervals)

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        return any(iv.contains(theta, tol) for iv in self.intervals)

    def complement(self) -> "HeadingSet":
        if self.is_empty:
            return HeadingSet.full()
        if self.is_full:
            return HeadingSet.empty()
        ivs = sorted(self.intervals, key=lambda iv: iv.lo)
        gaps = []
        for cur, nxt in zip(ivs, ivs[1:] + ivs[:1]):
            gap = _ccw(cur.hi, nxt.lo)
            if len(ivs) == 1:
                gap = TWO_PI - cur.width
            gaps.append(AngularInterval(cur.hi, gap))
        return HeadingSet.of(gaps)

    def union(self, other: "HeadingSet") -> "HeadingSet":
        return HeadingSet.of(self.intervals + other.intervals)

    def rotated(self, angle: float) -> "HeadingSet":
        return HeadingSet.of(AngularInterval(wrap_angle(iv.lo + angle), iv.width) for iv in self.intervals)

    def bracket(self, theta: float) -> tuple[float, float]:
        """Boundaries around ``theta``: (clockwise boundary, counter-clockwise boundary).

        Inside an arc these are the arc's own ends; in a gap they are the end of
        the preceding arc and the start of the following one.
        """
        if self.is_empty or self.is_full:
            raise ValueError("no boundary on an empty or full heading set")
        for iv in self.intervals:
            if iv.contains(theta):
                return iv.lo, iv.hi
        cw = min(self.intervals, key=lambda iv: _ccw(iv.hi, theta))
        ccw = min(self.intervals, key=lambda iv: _ccw(theta, iv.lo))
        return cw.hi, ccw.lo


def _intersect_pair(a: HeadingSet, b: HeadingSet) -> HeadingSet:
    sa = _to_segments(a.intervals)
    sb = _to_segments(b.intervals)
    out = []
    for s1, e1 in sa:
        for s2, e2 in sb:
            lo, hi = max(s1, s2), min(e1, e2)
            if lo <= hi:
                out.append((lo, hi))
    return HeadingSet(_from_segments(out))


def intersect(sets: Sequence[HeadingSet]) -> HeadingSet:
    result = HeadingSet.full()
    for s in sets:
        if result.is_empty:
            break
        if s.is_full:
            continue
        result = s if result.is_full else _intersect_pair(result, s)
    return result


def unsafe_half_width(params, d: float, dmc_mode: DmcMode | str) -> float | None:
    """Half-width of one threat's unsafe cone; None when every heading is safe, inf when none is."""
    boundary = xi_star_boundary(params, d)
    if boundary.mode is Mode.ALL_SAFE:
        return None
    if boundary.mode is Mode.ALL_UNSAFE:
        return math.inf
    if DmcMode(dmc_mode) is DmcMode.STAYOUT:
        return xi_star_stayout(params, d).angle
    return boundary.angle


def safe_cone_for_threat(agent, threat, dmc_mode: DmcMode | str = DmcMode.PENETRATION) -> HeadingSet:
    """Headings that keep the agent outside one threat's BEZ.

    ``agent`` and ``threat`` need a ``position``; ``threat`` also needs ``params``.
    """
    return safe_cone_at(agent.position, threat, dmc_mode)


def safe_cone_at(agent_pos, threat, dmc_mode: DmcMode | str = DmcMode.PENETRATION) -> HeadingSet:
    lam = bearing(agent_pos, threat.position)
    d = math.dist(agent_pos, threat.position)
    h = unsafe_half_width(threat.params, d, dmc_mode)
    if h is None:
        return HeadingSet.full()
    if math.isinf(h):
        return HeadingSet.empty()
    return HeadingSet.of([AngularInterval(wrap_angle(lam + h), TWO_PI - 2.0 * h)])


def joint_safe_cone(agent, threats, dmc_mode: DmcMode | str = DmcMode.PENETRATION) -> HeadingSet:
    return intersect([safe_cone_at(agent.position, t, dmc_mode) for t in threats])


def dmc_multi(psi: float, safe: HeadingSet) -> DmcResult:
    """Signed turn from ``psi`` to the nearest boundary of ``safe`` (0 if already inside)."""
    psi = wrap_angle(psi)
    if safe.is_empty:
        return DmcResult(math.pi, None, Mode.ALL_UNSAFE, wrap_angle(psi + math.pi))
    if safe.contains(psi):
        return DmcResult(0.0, None, Mode.ALL_SAFE if safe.is_full else Mode.BOUNDARY, psi)
    up = min(_ccw(psi, iv.lo) for iv in safe.intervals)
    dn = min(_ccw(iv.hi, psi) for iv in safe.intervals)
    # equidistant boundaries resolve counter-clockwise
    value = up if up <= dn + TIE_TOL else -dn
    return DmcResult(value, None, Mode.BOUNDARY, wrap_angle(psi + value))


def clearance(psi: float, agent_pos, threats, dmc_mode: DmcMode | str = DmcMode.PENETRATION) -> float:
    """Smallest angular margin between ``psi`` and any unsafe cone (negative inside one)."""
    worst = math.inf
    for t in threats:
        d = math.dist(agent_pos, t.position)
        h = unsafe_half_width(t.params, d, dmc_mode)
        if h is None:
            continue
        h = min(h, math.pi)
        worst = min(worst, abs(wrap_angle(psi - bearing(agent_pos, t.position))) - h)
    return worst


def least_violation_heading(agent_pos, threats, dmc_mode: DmcMode | str = DmcMode.PENETRATION,
                            n_sweep: int = 720) -> float:
    """Fallback heading when no heading is safe: maximize the worst-case cone clearance.

    Candidates are the midpoints of the gaps left by every pair of unsafe cones
    plus a uniform sweep; the first best candidate wins.
    """
    unsafe = [safe_cone_at(agent_pos, t, dmc_mode).complement() for t in threats]
    candidates: list[float] = []
    for i in range(len(unsafe)):
        for j in range(i, len(unsafe)):
            gaps = unsafe[i].union(unsafe[j]).complement()
            candidates.extend(wrap_angle(iv.lo + 0.5 * iv.width) for iv in gaps.intervals)
    candidates.extend(np.linspace(-math.pi, math.pi, n_sweep, endpoint=False).tolist())
    scores = [clearance(c, agent_pos, threats, dmc_mode) for c in candidates]
    return wrap_angle(candidates[int(np.argmax(scores))])
