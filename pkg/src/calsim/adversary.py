"""Oblivious corruption schedules and the seeded example/label stream.

Rounds are numbered ``1..n``. A schedule is fixed before round 1 and stored as
contiguous segments, each carrying the conditional-label vector used on it.
"""
from dataclasses import dataclass

import numpy as np

from .rng import CounterRNG


@dataclass(frozen=True, eq=False)
class CorruptionSchedule:
    horizon: int
    base_conditional: np.ndarray
    segments: tuple  # ((start, stop, eta), ...) with 1-based inclusive bounds

    def __post_init__(self):
        n = int(self.horizon)
        if n < 1:
            raise ValueError("horizon must be at least 1")
        base = np.asarray(self.base_conditional, dtype=float)
        segs = []
        expected = 1
        for start, stop, eta in self.segments:
            eta = np.array(eta, dtype=float)
            if start != expected or stop < start:
                raise ValueError(f"segments must partition 1..{n}; bad segment [{start}, {stop}]")
            if eta.shape != base.shape or np.any(eta < 0) or np.any(eta > 1):
                raise ValueError("segment conditionals must match the instance and lie in [0, 1]")
            eta.setflags(write=False)
            segs.append((int(start), int(stop), eta))
            expected = stop + 1
        if expected != n + 1:
            raise ValueError(f"segments must partition 1..{n}")
        object.__setattr__(self, "horizon", n)
        object.__setattr__(self, "base_conditional", base)
        object.__setattr__(self, "segments", tuple(segs))
        levels = np.array([np.max(np.abs(base - eta)) for _, _, eta in segs])
        object.__setattr__(self, "_levels", levels)
        object.__setattr__(self, "_starts", np.array([s for s, _, _ in segs]))

    def segment_levels(self):
        """Corruption level ``c_t`` of each segment."""
        return self._levels.copy()

    def _segment_of(self, t):
        if not 1 <= t <= self.horizon:
            raise ValueError(f"round {t} outside 1..{self.horizon}")
        return int(np.searchsorted(self._starts, t, side="right")) - 1

    def eta_at(self, t):
        return self.segments[self._segment_of(t)][2]

    def level_at(self, t):
        return float(self._levels[self._segment_of(t)])

    def levels(self, start, stop):
        """Per-round ``c_t`` for rounds ``start..stop``."""
        out = np.empty(stop - start + 1)
        for (a, b, _), c in zip(self.segments, self._levels):
            lo, hi = max(a, start), min(b, stop)
            if lo <= hi:
                out[lo - start:hi - start + 1] = c
        return out

    def eta_block(self, start, stop):
        """Yield ``(lo, hi, eta)`` pieces covering rounds ``start..stop``."""
        for a, b, eta in self.segments:
            lo, hi = max(a, start), min(b, stop)
            if lo <= hi:
                yield lo, hi, eta

    def eta_values(self, start, stop, xs):
        """``eta_t[x_t]`` for a block of rounds with examples ``xs``."""
        out = np.empty(len(xs))
        for lo, hi, eta in self.eta_block(start, stop):
            out[lo - start:hi - start + 1] = eta[xs[lo - start:hi - start + 1]]
        return out

    @property
    def total(self):
        return corruption_mass(self, 1, self.horizon)


def schedule_segments(inst, n, segments):
    """General piecewise-constant schedule. ``segments`` lists ``(start, stop, eta)``."""
    return CorruptionSchedule(n, inst.base_conditional, tuple(segments))


def schedule_none(inst, n):
    return schedule_segments(inst, n, [(1, n, inst.base_conditional)])


def schedule_misspecification(inst, n, gamma, eta_tilde):
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    eta_tilde = np.asarray(eta_tilde, dtype=float)
    if eta_tilde.shape != inst.base_conditional.shape or np.any(eta_tilde < 0) or np.any(eta_tilde > 1):
        raise ValueError("eta_tilde must be a conditional vector over the instance")
    mixed = (1.0 - gamma) * inst.base_conditional + gamma * eta_tilde
    return schedule_segments(inst, n, [(1, n, mixed)])


def schedule_burst(inst, n, tau, eta_corrupt):
    """Serve ``eta_corrupt`` on rounds ``1..tau`` and the base conditionals afterwards."""
    if not 1 <= tau <= n:
        raise ValueError(f"tau must lie in [1, {n}], got {tau}")
    segs = [(1, tau, eta_corrupt)]
    if tau < n:
        segs.append((tau + 1, n, inst.base_conditional))
    return schedule_segments(inst, n, segs)


def corruption_mass(sched, a, b):
    """``C_[a, b] = sum_{t=a}^{b} c_t``."""
    if not 1 <= a <= b <= sched.horizon:
        raise ValueError(f"bad interval [{a}, {b}] for horizon {sched.horizon}")
    total = 0.0
    for (s, e, _), c in zip(sched.segments, sched._levels):
        lo, hi = max(s, a), min(e, b)
        if lo <= hi:
            total += (hi - lo + 1) * float(c)
    return total


@dataclass(frozen=True)
class StreamEvent:
    t: int
    x: int
    y: int
    corrupted_level: float


def _examples_from_uniforms(inst, u):
    cdf = np.cumsum(inst.base_marginal)
    return np.minimum(np.searchsorted(cdf, u, side="right"), inst.num_examples - 1)


def stream_draw(inst, sched, t, rng):
    """Round ``t`` of the stream: ``x ~ nu``, ``y ~ Bernoulli(eta_t[x])``."""
    if not 1 <= t <= sched.horizon:
        raise ValueError(f"round {t} outside 1..{sched.horizon}")
    x = int(_examples_from_uniforms(inst, rng.uniform_at("x", t - 1)))
    y = int(rng.uniform_at("y", t - 1) < sched.eta_at(t)[x])
    return StreamEvent(t=t, x=x, y=y, corrupted_level=sched.level_at(t))


def draw_block(inst, sched, rng, start, stop):
    """Vectorized ``stream_draw`` over rounds ``start..stop``: returns ``(xs, ys)``."""
    count = stop - start + 1
    xs = _examples_from_uniforms(inst, rng.uniforms("x", start - 1, count))
    ys = (rng.uniforms("y", start - 1, count) < sched.eta_values(start, stop, xs)).astype(np.int8)
    return xs, ys


class LabelStream:
    """The learner's window onto the stream.

    Learners see examples, may request labels, and may draw query coins; the
    schedule and the corruption levels stay inside. Every label handed out is
    counted in ``labels_used``.
    """

    def __init__(self, inst, sched, seed):
        self._inst = inst
        self._sched = sched
        self._rng = CounterRNG(seed)
        self.horizon = sched.horizon
        self.labels_used = 0
        self._cache = None

    def _block(self, start, stop):
        if not 1 <= start <= stop <= self.horizon:
            raise ValueError(f"bad block [{start}, {stop}] for horizon {self.horizon}")
        if self._cache is None or self._cache[0] != (start, stop):
            self._cache = ((start, stop), draw_block(self._inst, self._sched, self._rng, start, stop))
        return self._cache[1]

    def reveal(self, start, stop):
        """Examples ``x_t`` for rounds ``start..stop``."""
        return self._block(start, stop)[0].copy()

    def request(self, start, stop, mask):
        """Labels of the rounds in ``start..stop`` selected by boolean ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        ys = self._block(start, stop)[1][mask]
        self.labels_used += int(mask.sum())
        return ys.copy()

    def coins(self, start, stop):
        """Uniforms reserved for query decisions on rounds ``start..stop``."""
        return self._rng.uniforms("query", start - 1, stop - start + 1)
