"""Random waypoint motion inside a rectangular field."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MotionLeg:
    origin: tuple
    destination: tuple
    speed: float
    depart_time: float
    pause_after: float

    @property
    def length(self) -> float:
        return math.hypot(self.destination[0] - self.origin[0],
                          self.destination[1] - self.origin[1])

    @property
    def arrive_time(self) -> float:
        return self.depart_time + self.length / self.speed

    @property
    def end_time(self) -> float:
        return self.arrive_time + self.pause_after

    def position(self, t: float) -> tuple:
        length = self.length
        if length == 0.0 or t <= self.depart_time:
            return self.origin if t <= self.depart_time else self.destination
        frac = min(1.0, (t - self.depart_time) * self.speed / length)
        ox, oy = self.origin
        return (ox + frac * (self.destination[0] - ox), oy + frac * (self.destination[1] - oy))


class RandomWaypoint:
    """Random waypoint model for ``n`` nodes on ``[0, width] x [0, height]``.

    All legs up to ``horizon`` are drawn at construction, node by node, so
    the trajectories depend only on the two streams and never on the order
    in which the simulation later queries positions. ``v_max == 0`` or an
    explicit ``positions`` array with ``static=True`` gives fixed nodes.
    """

    def __init__(self, n, width, height, horizon, topology_rng=None, mobility_rng=None,
                 v_min=0.5, v_max=5.0, pause=0.0, positions=None, static=False):
        if v_max < 0 or v_min < 0 or (v_max > 0 and v_min > v_max):
            raise ValueError("need 0 <= v_min <= v_max")
        self.n = n
        self.width = float(width)
        self.height = float(height)
        self.horizon = float(horizon)
        self.v_min = v_min if v_max > 0 else 0.0
        self.v_max = v_max
        self.pause = pause
        if positions is None:
            xs = topology_rng.uniform(n, 0.0, self.width)
            ys = topology_rng.uniform(n, 0.0, self.height)
            start = np.column_stack([xs, ys])
        else:
            start = np.asarray(positions, dtype=float).reshape(n, 2)
        self.initial = start
        self.static = static or v_max == 0
        self.legs: list[list[MotionLeg]] = [[] for _ in range(n)]
        if not self.static:
            for node in range(n):
                now = 0.0
                here = (float(start[node, 0]), float(start[node, 1]))
                while now <= self.horizon:
                    leg = self.next_leg(node, now, mobility_rng, origin=here)
                    self.legs[node].append(leg)
                    here = leg.destination
                    now = leg.end_time
        self._starts = [[leg.depart_time for leg in legs] for legs in self.legs]
        self._reset_cursor()

    def sample_waypoints(self, rng, n: int) -> np.ndarray:
        """``n`` destinations drawn uniformly over the field, as an ``(n, 2)`` array.

        With ``n == 1`` this consumes the stream exactly like one call to
        :meth:`next_leg` does for its destination.
        """
        xs = rng.uniform(n, 0.0, self.width)
        ys = rng.uniform(n, 0.0, self.height)
        return np.column_stack([xs, ys])

    def next_leg(self, node, now, rng, origin=None) -> MotionLeg:
        if origin is None:
            origin = self.position_at(node, now)
        dest = (rng.uniform(None, 0.0, self.width), rng.uniform(None, 0.0, self.height))
        speed = rng.uniform(None, self.v_min, self.v_max) if self.v_max > self.v_min else self.v_max
        return MotionLeg(origin, dest, speed, now, self.pause)

    def position_at(self, node: int, t: float) -> tuple:
        legs = self.legs[node]
        if not legs:
            return (float(self.initial[node, 0]), float(self.initial[node, 1]))
        i = bisect.bisect_right(self._starts[node], t) - 1
        return legs[max(i, 0)].position(t)

    # vectorised queries -------------------------------------------------

    def _reset_cursor(self):
        n = self.n
        self._idx = np.zeros(n, dtype=int)
        self._origin = self.initial.copy()
        self._delta = np.zeros((n, 2))
        self._depart = np.zeros(n)
        self._travel = np.ones(n)
        self._next = np.full(n, math.inf)
        self._last_t = -math.inf
        for node in range(n):
            if self.legs[node]:
                self._load(node, 0)

    def _load(self, node, i):
        legs = self.legs[node]
        leg = legs[i]
        self._idx[node] = i
        self._origin[node] = leg.origin
        self._delta[node] = (leg.destination[0] - leg.origin[0],
                             leg.destination[1] - leg.origin[1])
        self._depart[node] = leg.depart_time
        length = leg.length
        self._travel[node] = length / leg.speed if length > 0 else 1.0
        if length == 0:
            self._delta[node] = 0.0
        self._next[node] = legs[i + 1].depart_time if i + 1 < len(legs) else math.inf

    def positions(self, t: float) -> np.ndarray:
        """Positions of every node at time ``t`` as an ``(n, 2)`` array."""
        if self.static:
            return self.initial
        if t < self._last_t:
            self._reset_cursor()
        self._last_t = t
        for node in np.nonzero(self._next <= t)[0]:
            i = int(self._idx[node])
            starts = self._starts[node]
            while i + 1 < len(starts) and starts[i + 1] <= t:
                i += 1
            self._load(node, i)
        frac = np.clip((t - self._depart) / self._travel, 0.0, 1.0)
        return self._origin + frac[:, None] * self._delta

    def trace_lines(self):
        """Waypoint trace as ``t node x y`` lines, ordered by time then node."""
        rows = []
        for node in range(self.n):
            x, y = self.initial[node]
            rows.append((0.0, node, float(x), float(y)))
            for leg in self.legs[node]:
                if leg.arrive_time <= self.horizon:
                    rows.append((leg.arrive_time, node) + tuple(leg.destination))
        rows.sort()
        return [f"{t:.6f} {node} {x:.6f} {y:.6f}" for t, node, x, y in rows]
