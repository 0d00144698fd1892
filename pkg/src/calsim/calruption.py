"""CALruption: epoch-based soft elimination for active learning under label corruption.

No hypothesis is ever discarded. At the end of every prescheduled epoch the
learner re-estimates each hypothesis' gap from importance-weighted losses,
sorts hypotheses into nested layers by estimated gap, and sets per-example
query probabilities for the next epoch from those layers.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .adversary import LabelStream, StreamEvent, corruption_mass
from .errors import ConfigError, SolverError
from .estimators import catoni_pair_gap
from .instance import build_oracle
from .report import RunReport

THEORY_MULTIPLIER = 32 * 640
PRACTICAL_MULTIPLIER = 8


@dataclass(frozen=True)
class CalruptionConfig:
    n: int
    delta: float
    num_hypotheses: int
    beta1_multiplier: float = THEORY_MULTIPLIER
    beta2: float = 5.0 / 32.0
    # the unfinished last epoch is still queried; its rounds never feed estimation.
    query_partial_epoch: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.num_hypotheses < 1:
            raise ConfigError("need at least one hypothesis")
        if not self.beta1_multiplier > 0:
            raise ConfigError("beta1 multiplier must be positive")
        if self.beta2 < 5.0 / 32.0:
            raise ConfigError("beta2 must be at least 5/32")

    @classmethod
    def practical(cls, n, delta, num_hypotheses, multiplier=PRACTICAL_MULTIPLIER, **kwargs):
        return cls(n, delta, num_hypotheses, beta1_multiplier=multiplier, **kwargs)

    @property
    def mode(self):
        if self.beta1_multiplier == THEORY_MULTIPLIER:
            return "theory"
        return f"practical:{self.beta1_multiplier:g}"

    @property
    def beta3(self):
        k = self.num_hypotheses
        return 2.0 * math.log(1.5 * math.floor(math.log2(self.n)) * k * k / self.delta)

    @property
    def beta1(self):
        return self.beta1_multiplier * self.beta3

    @staticmethod
    def epsilon(i):
        return 2.0 ** (-i)

    def epoch_length(self, l):
        return math.ceil(self.beta1 * 4.0**l)

    def epochs(self):
        """Complete epochs ``(l, start, length)`` fitting inside ``1..n``."""
        out = []
        start, l = 1, 1
        while True:
            length = self.epoch_length(l)
            if start + length - 1 > self.n:
                return out
            out.append((l, start, length))
            start += length
            l += 1

    def epoch_start(self, l):
        return 1 + sum(self.epoch_length(s) for s in range(1, l))


@dataclass
class EpochState:
    l: int
    start: int
    length: int
    hypotheses: np.ndarray
    query_prob: np.ndarray
    x_counts: np.ndarray       # occurrences of each x in the epoch
    label_counts: np.ndarray   # [x, y] counts over queried rounds
    labels_used: int
    rho_hat: np.ndarray = None
    q_min: np.ndarray = None
    W: np.ndarray = None
    eta_hat: np.ndarray = None
    fit_objective: float = None
    risk_hat: np.ndarray = None
    best: int = None
    gap_hat: np.ndarray = None
    layers: np.ndarray = None  # layers[i, h] <=> h in V_{l+1}^i
    extra: dict = field(default_factory=dict)

    @property
    def stop(self):
        return self.start + self.length - 1

    @property
    def p_hat(self):
        return self.x_counts / self.length

    def pair_samples(self, h, h2):
        """Distinct importance-weighted loss differences of ``(h, h2)`` and their multiplicities."""
        pred, pred2 = self.hypotheses[h], self.hypotheses[h2]
        dis = np.flatnonzero(pred != pred2)
        inv_q = 1.0 / self.query_prob[dis]
        # h errs exactly when y equals h2's prediction
        plus = self.label_counts[dis, pred2[dis]]
        minus = self.label_counts[dis, pred[dis]]
        zeros = self.length - plus.sum() - minus.sum()
        values = np.concatenate(([0.0], inv_q, -inv_q))
        counts = np.concatenate(([zeros], plus, minus)).astype(float)
        keep = counts > 0
        return values[keep], counts[keep]


def iw_loss(inst, h, x, y, q, queried):
    """Importance-weighted loss ``1{h(x) != y} * Q / q``."""
    if not q > 0:
        raise ValueError(f"query probability must be positive, got {q}")
    if not queried:
        return 0.0
    return float(inst.hypotheses[h, x] != y) / q


def estimate_rho_epoch(events, inst):
    """Empirical disagreement frequencies over the epoch's examples.

    ``events`` is an array of example indices or a sequence of ``StreamEvent``.
    """
    if len(events) and isinstance(events[0], StreamEvent):
        events = [e.x for e in events]
    xs = np.asarray(events, dtype=np.int64)
    counts = np.bincount(xs, minlength=inst.num_examples)
    return inst.disagreement_tensor().astype(float) @ counts / len(xs)


def pair_min_query_prob(inst, q):
    """``min_{x in Dis(h, h')} q^x`` over the true disagreement sets (``inf`` on the diagonal)."""
    dis = inst.disagreement_tensor()
    return np.where(dis, q[None, None, :], np.inf).min(axis=2)


def estimate_pair_gaps(state, cfg, estimator=catoni_pair_gap):
    """Antisymmetric matrix ``W`` of robust pair-gap estimates.

    ``estimator(values, counts, beta3, q_min, rho_hat, N)`` is the plug-in point
    for any estimator meeting the same deviation guarantee.
    """
    k = state.hypotheses.shape[0]
    W = np.zeros((k, k))
    for h in range(k):
        for h2 in range(h + 1, k):
            rho_hat = state.rho_hat[h, h2]
            if rho_hat <= 0:
                continue
            values, counts = state.pair_samples(h, h2)
            W[h, h2] = estimator(values, counts, cfg.beta3, state.q_min[h, h2], rho_hat, state.length)
            W[h2, h] = -W[h, h2]
    return W


def _fit_pairs(state, inst):
    k = inst.num_hypotheses
    return [(h, h2) for h in range(k) for h2 in range(h + 1, k) if state.rho_hat[h, h2] > 0]


def fit_residuals(state, inst, eta):
    """Scaled residuals ``(R_D(h) - R_D(h') - W) * sqrt(q_min / rho_hat)`` for the fitted pairs."""
    hyp = inst.hypotheses
    p_hat = state.p_hat
    risk = (hyp * (1.0 - eta) + (1 - hyp) * eta) @ p_hat
    out = []
    for h, h2 in _fit_pairs(state, inst):
        scale = math.sqrt(state.q_min[h, h2] / state.rho_hat[h, h2])
        out.append((risk[h] - risk[h2] - state.W[h, h2]) * scale)
    return np.array(out)


def fit_distribution(state, inst, tolerance=1e-6):
    """Conditionals of the min-max fitted distribution on the epoch's observed examples.

    The objective is a max of affine functions of ``eta`` over a box, solved as
    the epigraph LP ``min s  s.t.  -s <= scale * (a . eta + b) <= s, 0 <= eta <= 1``.
    Returns ``(eta_hat, objective)``; unobserved examples get a 0.5 placeholder.
    """
    m = inst.num_examples
    hyp = inst.hypotheses.astype(float)
    support = np.flatnonzero(state.x_counts > 0)
    p = state.p_hat[support]
    eta = np.full(m, 0.5)
    pairs = _fit_pairs(state, inst)
    if not pairs:
        seen = state.label_counts[support].sum(axis=1)
        ones = state.label_counts[support, 1]
        eta[support] = np.where(seen > 0, ones / np.maximum(seen, 1), 0.5)
        return eta, 0.0

    d = len(support)
    rows, rhs = [], []
    for h, h2 in pairs:
        scale = math.sqrt(state.q_min[h, h2] / state.rho_hat[h, h2])
        # R_D(h) - R_D(h') = p.(h - h') + 2 p.(h' - h) eta
        a = 2.0 * p * (hyp[h2, support] - hyp[h, support]) * scale
        b = (p @ (hyp[h, support] - hyp[h2, support]) - state.W[h, h2]) * scale
        rows.append(np.append(a, -1.0))
        rhs.append(-b)
        rows.append(np.append(-a, -1.0))
        rhs.append(b)
    cost = np.zeros(d + 1)
    cost[-1] = 1.0
    bounds = [(0.0, 1.0)] * d + [(0.0, None)]
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"epoch {state.l}: LP failed with status {res.status}: {res.message}")
    eta[support] = np.clip(res.x[:d], 0.0, 1.0)
    objective = float(np.max(np.abs(fit_residuals(state, inst, eta))))
    # dual objective b.y + u.z_u (lower bounds are all zero) bounds the optimum from below
    bound = float(np.asarray(rhs) @ res.ineqlin.marginals + res.upper.marginals[:d].sum())
    if objective - bound > tolerance:
        raise SolverError(
            f"epoch {state.l}: fitted objective {objective:.3g} is {objective - bound:.3g} above the "
            f"LP certificate (tolerance {tolerance:g}); pairs={len(pairs)}, support={d}")
    return eta, objective


def fitted_risks(state, inst):
    hyp = inst.hypotheses
    eta = state.eta_hat
    return (hyp * (1.0 - eta) + (1 - hyp) * eta) @ state.p_hat


def update_gaps(state, prev_gaps, cfg):
    """Best hypothesis under the fitted distribution and the new clamped gap estimates."""
    penalised = state.risk_hat + cfg.beta2 * prev_gaps
    best = int(np.argmin(penalised))
    gaps = np.maximum(cfg.epsilon(state.l), state.risk_hat - penalised[best])
    return best, gaps


def build_layers(gap_hat, l):
    """``layers[i, h]`` is true iff ``gap_hat[h] <= 2**-i``, for ``i = 0..l``."""
    thresholds = 2.0 ** -np.arange(l + 1)
    return np.asarray(gap_hat)[None, :] <= thresholds[:, None]


def layer_levels(layers):
    """Deepest layer index containing each hypothesis."""
    depth = layers.shape[0]
    return depth - 1 - np.argmax(layers[::-1], axis=0)


def compute_query_probs(rho_hat, layers, l_next, cfg, inst):
    """Query probability of every example for epoch ``l_next``."""
    n_next = cfg.epoch_length(l_next)
    levels = layer_levels(layers)
    k = np.minimum(levels[:, None], levels[None, :])
    contrib = cfg.beta1 * rho_hat * (4.0**k) / n_next
    dis = inst.disagreement_tensor()
    q = np.where(dis, contrib[:, :, None], 0.0).max(axis=(0, 1))
    floor = min(1.0, cfg.beta1 / n_next)
    q = np.where(q > 0, q, floor)
    return np.minimum(q, 1.0)


@dataclass
class CalruptionResult:
    output: int
    epochs: list
    labels_used: int
    partial_labels: int


def _run_epoch(stream, inst, cfg, l, start, length, q, prev_gaps, estimator):
    stop = start + length - 1
    m = inst.num_examples
    xs = stream.reveal(start, stop)
    queried = stream.coins(start, stop) < q[xs]
    ys = stream.request(start, stop, queried)
    label_counts = np.bincount(xs[queried] * 2 + ys, minlength=2 * m).reshape(m, 2)
    state = EpochState(
        l=l, start=start, length=length, hypotheses=inst.hypotheses, query_prob=q,
        x_counts=np.bincount(xs, minlength=m), label_counts=label_counts,
        labels_used=int(queried.sum()),
    )
    state.rho_hat = estimate_rho_epoch(xs, inst)
    state.q_min = pair_min_query_prob(inst, q)
    state.W = estimate_pair_gaps(state, cfg, estimator)
    state.eta_hat, state.fit_objective = fit_distribution(state, inst)
    state.risk_hat = fitted_risks(state, inst)
    state.best, state.gap_hat = update_gaps(state, prev_gaps, cfg)
    state.layers = build_layers(state.gap_hat, l)
    return state


def calruption(stream, inst, cfg, estimator=catoni_pair_gap):
    """Run CALruption over ``cfg.n`` rounds of ``stream``.

    ``inst`` supplies only the prediction matrix and example count; the
    learner never reads the marginal or the conditionals.
    """
    schedule = cfg.epochs()
    if not schedule:
        raise ConfigError(
            f"n = {cfg.n} is shorter than the first epoch ({cfg.epoch_length(1)} rounds); "
            f"increase n or lower the beta1 multiplier")
    q = np.ones(inst.num_examples)
    prev_gaps = np.zeros(inst.num_hypotheses)
    epochs = []
    for l, start, length in schedule:
        state = _run_epoch(stream, inst, cfg, l, start, length, q, prev_gaps, estimator)
        q = compute_query_probs(state.rho_hat, state.layers, l + 1, cfg, inst)
        prev_gaps = state.gap_hat
        epochs.append(state)
    partial = 0
    tail = epochs[-1].stop + 1
    if cfg.query_partial_epoch and tail <= cfg.n:
        xs = stream.reveal(tail, cfg.n)
        queried = stream.coins(tail, cfg.n) < q[xs]
        stream.request(tail, cfg.n, queried)
        partial = int(queried.sum())
    last = epochs[-1]
    in_top_layer = np.flatnonzero(last.layers[last.l - 1])
    # clamped gaps tie at eps; the fitted risk breaks ties so the output never depends on hypothesis order
    order = np.lexsort((last.risk_hat[in_top_layer], last.gap_hat[in_top_layer]))
    output = int(in_top_layer[order[0]])
    return CalruptionResult(output=output, epochs=epochs, labels_used=stream.labels_used,
                            partial_labels=partial)


def run_calruption(inst, sched, cfg, seed, estimator=catoni_pair_gap):
    from .harness import metrics

    if cfg.n > sched.horizon:
        raise ConfigError(f"n = {cfg.n} exceeds the schedule horizon {sched.horizon}")
    if cfg.num_hypotheses != inst.num_hypotheses:
        raise ConfigError("config and instance disagree on |H|")
    began = time.perf_counter()
    stream = LabelStream(inst, sched, seed)
    result = calruption(stream, inst, cfg, estimator)
    elapsed = (time.perf_counter() - began) * 1e3
    oracle = build_oracle(inst)
    checks = metrics.calruption_oracle_checks(inst, sched, cfg, oracle, result.epochs, seed)
    return RunReport(
        algorithm="calruption", n=cfg.n, seed=seed, output_h=result.output,
        excess_risk=float(oracle.gaps[result.output]), labels_used=result.labels_used,
        c_total=corruption_mass(sched, 1, cfg.n),
        c_bar_total=metrics.c_bar_total(sched, cfg, oracle),
        events_held=checks["events_held"], events=checks["events"],
        labels_trace=[e.labels_used for e in result.epochs] + [result.partial_labels],
        c_epochs=[corruption_mass(sched, e.start, e.stop) for e in result.epochs],
        gap_trajectory=[e.gap_hat.tolist() for e in result.epochs],
        invariants=checks["invariants"],
        wall_ms=elapsed,
    )
