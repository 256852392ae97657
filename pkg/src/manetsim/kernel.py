"""Discrete-event engine and labeled random streams."""

from __future__ import annotations

import heapq
import math

import numpy as np

MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_M1 = 0xBF58476D1CE4E5B9
SPLITMIX_M2 = 0x94D049BB133111EB


class CausalityError(ValueError):
    """Raised when an event is scheduled before the current clock."""


def fnv1a64(text: str) -> int:
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * SPLITMIX_M1) & MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(label: str, master_seed: int) -> int:
    """Mix a stream label into a master seed (FNV-1a 64 then SplitMix64)."""
    return splitmix64((master_seed & MASK64) ^ fnv1a64(label))


class RngStream:
    """Reproducible random stream keyed by ``(label, seed)``.

    Raw 64-bit words come from PCG64 seeded with ``derive_seed(label, seed)``.
    Every variate is built here from those words so the sequences do not
    depend on numpy's distribution code:

    * uniform on [0, 1): ``(word >> 11) * 2**-53``
    * standard normal: Box-Muller cosine branch, two uniforms per variate
    * exponential: ``-log(1 - u)``
    * gamma: Marsaglia-Tsang squeeze, with the ``U**(1/k)`` boost for k < 1

    Scalar and vector draws consume the same underlying uniform sequence,
    so ``uniform(3)`` equals three successive ``random()`` calls.
    """

    BLOCK = 4096

    def __init__(self, label: str, seed: int):
        self.label = label
        self.seed = seed & MASK64
        self._bitgen = np.random.PCG64(derive_seed(label, self.seed))
        self._buf = np.empty(0)
        self._pos = 0

    def __repr__(self):
        return f"RngStream({self.label!r}, {self.seed})"

    def _refill(self, need: int) -> None:
        rest = self._buf[self._pos:]
        n = max(self.BLOCK, need - rest.size)
        words = self._bitgen.random_raw(n)
        fresh = (words >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
        self._buf = np.concatenate([rest, fresh]) if rest.size else fresh
        self._pos = 0

    def random(self) -> float:
        if self._pos >= self._buf.size:
            self._refill(1)
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)

    def uniform(self, n: int | None = None, low: float = 0.0, high: float = 1.0):
        if n is None:
            return low + (high - low) * self.random()
        if self._buf.size - self._pos < n:
            self._refill(n)
        out = self._buf[self._pos:self._pos + n].copy()
        self._pos += n
        if low != 0.0 or high != 1.0:
            out = low + (high - low) * out
        return out

    def integer(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return min(int(self.random() * n), n - 1)

    def normal(self, n: int | None = None):
        if n is None:
            u1 = self.random()
            u2 = self.random()
            return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        u = self.uniform(2 * n).reshape(n, 2)
        return np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])

    def exponential(self, n: int | None = None):
        if n is None:
            return -math.log(1.0 - self.random())
        return -np.log1p(-self.uniform(n))

    def gamma(self, shape: float, n: int | None = None):
        """Gamma(shape, scale=1) variates."""
        if shape <= 0:
            raise ValueError("gamma shape must be positive")
        scalar = n is None
        count = 1 if scalar else n
        boost = shape < 1.0
        k = shape + 1.0 if boost else shape
        d = k - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        out = np.empty(count)
        todo = np.arange(count)
        while todo.size:
            m = todo.size
            z = self.normal(m)
            u = self.uniform(m)
            v = (1.0 + c * z) ** 3
            ok = v > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                accept = ok & (np.log(np.where(u > 0, u, 1e-300))
                               < 0.5 * z * z + d - d * v + d * np.log(np.where(ok, v, 1.0)))
            out[todo[accept]] = d * v[accept]
            todo = todo[~accept]
        if boost:
            out *= self.uniform(count) ** (1.0 / shape)
        return float(out[0]) if scalar else out


def stream(label: str, master_seed: int) -> RngStream:
    return RngStream(label, master_seed)


class SimEvent:
    """A queued callback; ``payload`` is ``(callable, args)``."""

    __slots__ = ("fire_time", "seq", "target", "payload", "cancelled")

    def __init__(self, fire_time, seq, target, payload):
        self.fire_time = fire_time
        self.seq = seq
        self.target = target
        self.payload = payload
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def __repr__(self):
        return f"SimEvent(t={self.fire_time}, seq={self.seq}, target={self.target})"


class Simulator:
    """Single-threaded event loop with a global clock.

    Ties on ``fire_time`` are broken by insertion order.
    """

    def __init__(self, start: float = 0.0):
        self.now = float(start)
        self._queue: list = []
        self._seq = 0
        self.processed = 0

    def __len__(self):
        return len(self._queue)

    def schedule(self, fire_time: float, fn, *args, target=None) -> SimEvent:
        if fire_time < self.now:
            raise CausalityError(
                f"cannot schedule at t={fire_time!r}, clock is {self.now!r}")
        ev = SimEvent(fire_time, self._seq, target, (fn, args))
        heapq.heappush(self._queue, (fire_time, self._seq, ev))
        self._seq += 1
        return ev

    def after(self, delay: float, fn, *args, target=None) -> SimEvent:
        return self.schedule(self.now + delay, fn, *args, target=target)

    def run_until(self, t_end: float) -> int:
        if t_end < self.now:
            raise CausalityError(f"horizon {t_end!r} is before clock {self.now!r}")
        queue = self._queue
        pop = heapq.heappop
        count = 0
        while queue and queue[0][0] <= t_end:
            t, _, ev = pop(queue)
            if ev.cancelled:
                continue
            self.now = t
            fn, args = ev.payload
            fn(*args)
            count += 1
        self.now = float(t_end)
        self.processed += count
        return count
