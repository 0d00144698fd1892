"""Passive ERM and RobustCAL (vanilla and enlarged elimination thresholds).

Both learners read the stream through :class:`~calsim.adversary.LabelStream`
and never see the corruption schedule. RobustCAL only changes its active set at
checkpoint rounds ``t = 2, 4, 8, ...``, so the rounds between checkpoints are
processed as one vectorized block.
"""
import enum
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .adversary import LabelStream, corruption_mass
from .instance import build_oracle
from .report import RunReport

_CHUNK = 1 << 20


class ThresholdVariant(enum.Enum):
    VANILLA = "vanilla"
    MODIFIED = "modified"


def _label_counts(xs, ys, m):
    """``counts[x, y]`` for queried pairs."""
    return np.bincount(xs * 2 + ys, minlength=2 * m).reshape(m, 2)


def _mistakes(hypotheses, counts):
    """Number of mistakes of every hypothesis on labelled data summarised by ``counts``."""
    hyp = hypotheses.astype(np.int64)
    return hyp @ counts[:, 0] + (1 - hyp) @ counts[:, 1]


def passive_erm(stream, hypotheses, n):
    """Query every label and return ``(argmin mistakes, mistakes)``; ties go to the lowest index."""
    m = hypotheses.shape[1]
    mistakes = np.zeros(hypotheses.shape[0], dtype=np.int64)
    for start in range(1, n + 1, _CHUNK):
        stop = min(n, start + _CHUNK - 1)
        xs = stream.reveal(start, stop)
        ys = stream.request(start, stop, np.ones(len(xs), dtype=bool))
        mistakes += _mistakes(hypotheses, _label_counts(xs, ys, m))
    return int(np.argmin(mistakes)), mistakes


def run_passive_erm(inst, sched, n, seed):
    if n < 1 or n > sched.horizon:
        raise ValueError(f"n must lie in [1, {sched.horizon}]")
    began = time.perf_counter()
    stream = LabelStream(inst, sched, seed)
    out, _ = passive_erm(stream, inst.hypotheses, n)
    oracle = build_oracle(inst)
    return RunReport(
        algorithm="passive_erm", n=n, seed=seed, output_h=out,
        excess_risk=float(oracle.gaps[out]), labels_used=stream.labels_used,
        c_total=corruption_mass(sched, 1, n),
        wall_ms=(time.perf_counter() - began) * 1e3,
    )


@dataclass
class RobustCalState:
    active: np.ndarray                    # boolean mask over H
    cumulative_loss: np.ndarray           # mistakes on queried rounds, per hypothesis
    pair_disagreement_counts: np.ndarray  # over all observed x
    hypotheses: np.ndarray
    labels_used: int = 0
    t: int = 0
    next_update: int = 2
    best: int = 0

    @classmethod
    def initial(cls, hypotheses):
        k = hypotheses.shape[0]
        return cls(
            active=np.ones(k, dtype=bool),
            cumulative_loss=np.zeros(k, dtype=np.int64),
            pair_disagreement_counts=np.zeros((k, k), dtype=np.int64),
            hypotheses=hypotheses,
        )

    def disagreement_mask(self):
        """Boolean mask over X of ``Dis(V_t)``."""
        preds = self.hypotheses[self.active]
        return preds.min(axis=0) != preds.max(axis=0)


def robustcal_should_query(state, inst, x):
    preds = inst.hypotheses[state.active, x]
    return bool(preds.min() != preds.max())


def robustcal_beta(t, num_hypotheses, delta):
    return math.log(3.0 * math.log2(t) * num_hypotheses**2 / delta)


def robustcal_update(state, variant, beta_t):
    """Elimination step at checkpoint ``state.t``; returns a new state."""
    variant = ThresholdVariant(variant)
    t = state.t
    cum = state.cumulative_loss
    active_idx = np.flatnonzero(state.active)
    best = int(active_idx[np.argmin(cum[active_idx])])
    rho_hat = state.pair_disagreement_counts[:, best] / t
    loss_gap = (cum - cum[best]) / t
    width = np.sqrt(2.0 * beta_t * rho_hat / t)
    if variant is ThresholdVariant.MODIFIED:
        threshold = width + 1.5 * beta_t / t + 0.5 * rho_hat
    else:
        threshold = width + beta_t / t
    keep = state.active & (loss_gap <= threshold)
    keep[best] = True
    assert keep.any()
    return replace(state, active=keep, best=best, next_update=2 * t)


def _blocks(n):
    """Round blocks ``[1, 2], [3, 4], [5, 8], ...`` ending at checkpoints (last one may be partial)."""
    start, stop = 1, 2
    while start <= n:
        yield start, min(stop, n)
        start, stop = stop + 1, 2 * stop


@dataclass
class RobustCalResult:
    output: int
    state: RobustCalState
    checkpoints: list
    active_trace: list
    labels_trace: list


def robustcal(stream, hypotheses, n, delta, variant):
    """Run RobustCAL on the first ``n`` rounds of ``stream``."""
    variant = ThresholdVariant(variant)
    k, m = hypotheses.shape
    dis = (hypotheses[:, None, :] != hypotheses[None, :, :]).astype(np.int64)
    state = RobustCalState.initial(hypotheses)
    output = None
    checkpoints, active_trace, labels_trace = [], [], []
    for start, stop in _blocks(n):
        xs = stream.reveal(start, stop)
        query = state.disagreement_mask()[xs]
        ys = stream.request(start, stop, query)
        state.cumulative_loss = state.cumulative_loss + _mistakes(
            hypotheses, _label_counts(xs[query], ys, m))
        state.pair_disagreement_counts = state.pair_disagreement_counts + dis @ np.bincount(xs, minlength=m)
        state.labels_used = stream.labels_used
        state.t = stop
        if stop == state.next_update:
            state = robustcal_update(state, variant, robustcal_beta(stop, k, delta))
            idx = np.flatnonzero(state.active)
            output = int(idx[np.argmin(state.cumulative_loss[idx])])
            checkpoints.append(stop)
            active_trace.append(state.active.copy())
            labels_trace.append(state.labels_used)
    return RobustCalResult(output, state, checkpoints, active_trace, labels_trace)


def run_robustcal(inst, sched, n, delta, variant, seed):
    if n < 2 or n > sched.horizon:
        raise ValueError(f"n must lie in [2, {sched.horizon}]")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    variant = ThresholdVariant(variant)
    began = time.perf_counter()
    stream = LabelStream(inst, sched, seed)
    result = robustcal(stream, inst.hypotheses, n, delta, variant)
    elapsed = (time.perf_counter() - began) * 1e3
    oracle = build_oracle(inst)
    hstar = oracle.best_index
    trace = [[t, bool(active[hstar])] for t, active in zip(result.checkpoints, result.active_trace)]
    eliminated = next((t for t, alive in trace if not alive), None)
    return RunReport(
        algorithm=f"robustcal_{variant.value}", n=n, seed=seed, output_h=result.output,
        excess_risk=float(oracle.gaps[result.output]), labels_used=stream.labels_used,
        c_total=corruption_mass(sched, 1, n), labels_trace=result.labels_trace,
        hstar_trace=trace, invariants={"hstar_eliminated_at": eliminated},
        wall_ms=elapsed,
    )
