"""Oracle-invariant suite behind ``calsim verify``."""
from dataclasses import dataclass

import numpy as np

from ..adversary import LabelStream, corruption_mass, schedule_none, schedule_segments
from ..baseline_learners import ThresholdVariant, run_robustcal
from ..calruption import CalruptionConfig, run_calruption
from ..instance import build_oracle, counterexample_instance, random_instance, risks
from . import metrics


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _random_schedule(rng, inst, n, pieces):
    cuts = np.sort(rng.choice(np.arange(2, n + 1), size=pieces - 1, replace=False)) if pieces > 1 else []
    bounds = [1, *cuts.tolist(), n + 1] if pieces > 1 else [1, n + 1]
    segs = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        eta = inst.base_conditional.copy()
        if rng.random() < 0.7:
            eta = np.clip(eta + rng.uniform(-0.3, 0.3, size=eta.size), 0, 1)
        segs.append((a, b - 1, eta))
    return schedule_segments(inst, n, segs)


def check_corruption_bounds(rng, trials=200):
    """Averaged risk and risk-difference shifts stay within the corruption budget."""
    bad = 0
    for _ in range(trials):
        inst = random_instance(rng, int(rng.integers(3, 8)), int(rng.integers(2, 6)))
        n = int(rng.integers(5, 200))
        sched = _random_schedule(rng, inst, n, int(rng.integers(1, 5)))
        a = int(rng.integers(1, n + 1))
        b = int(rng.integers(a, n + 1))
        base = risks(inst, inst.base_conditional)
        shift = np.zeros(inst.num_hypotheses)
        for lo, hi, eta in sched.eta_block(a, b):
            shift += (hi - lo + 1) * (risks(inst, eta) - base)
        c = corruption_mass(sched, a, b)
        rho = build_oracle(inst).rho_matrix
        bad += int(np.any(np.abs(shift) > c + 1e-9))
        bad += int(np.any(np.abs(shift[:, None] - shift[None, :]) > 2 * rho * c + 1e-9))
    return CheckResult("corruption bounds", bad == 0, f"{bad} violations over {trials} tuples")


def check_c_bar(rng, trials=100):
    bad = 0
    for _ in range(trials):
        inst = random_instance(rng, int(rng.integers(2, 6)), int(rng.integers(2, 5)))
        cfg = CalruptionConfig.practical(int(rng.integers(2000, 100000)), 0.05, inst.num_hypotheses,
                                         multiplier=float(rng.uniform(0.5, 4)))
        sched = _random_schedule(rng, inst, cfg.n, int(rng.integers(1, 4)))
        oracle = build_oracle(inst)
        cbar = metrics.c_bar_total(sched, cfg, oracle)
        bad += int(cbar > corruption_mass(sched, 1, cfg.n) + 1e-9)
    return CheckResult("c_bar_total <= C_total", bad == 0, f"{bad} violations over {trials} schedules")


def check_calruption_invariants(seeds=20, n=2**16):
    inst = counterexample_instance()
    sched = schedule_none(inst, n)
    cfg = CalruptionConfig.practical(n, 0.05, inst.num_hypotheses)
    broken, held = [], 0
    for seed in range(seeds):
        r = run_calruption(inst, sched, cfg, seed)
        held += int(r.events_held)
        if not r.invariants["invariants_ok"]:
            broken.append(seed)
    return CheckResult("gap sandwich and layer diameter on event-holding runs", not broken,
                       f"events held on {held}/{seeds} seeds; broken seeds: {broken}")


def check_determinism(seed=7, n=2**14):
    inst = counterexample_instance()
    sched = schedule_none(inst, n)
    cfg = CalruptionConfig.practical(n, 0.05, 2)
    a, b = run_calruption(inst, sched, cfg, seed), run_calruption(inst, sched, cfg, seed)
    a.wall_ms = b.wall_ms = 0.0
    r1 = run_robustcal(inst, sched, n, 0.05, ThresholdVariant.MODIFIED, seed)
    r2 = run_robustcal(inst, sched, n, 0.05, ThresholdVariant.MODIFIED, seed)
    r1.wall_ms = r2.wall_ms = 0.0
    ok = a.to_dict() == b.to_dict() and r1.to_dict() == r2.to_dict()
    return CheckResult("determinism", ok, "repeated runs " + ("match" if ok else "differ"))


def check_stream_sharing(seed=3, n=4096):
    """Example draws depend on the seed only, not on the schedule or the learner."""
    inst = counterexample_instance()
    flipped = schedule_segments(inst, n, [(1, n // 2, 1.0 - inst.base_conditional),
                                          (n // 2 + 1, n, inst.base_conditional)])
    xs1 = LabelStream(inst, schedule_none(inst, n), seed).reveal(1, n)
    xs2 = LabelStream(inst, flipped, seed).reveal(1, n)
    ok = bool(np.array_equal(xs1, xs2))
    return CheckResult("shared example stream", ok, "x draws " + ("coincide" if ok else "differ"))


def run_verification(seed=0):
    rng = np.random.default_rng(seed)
    return [
        check_corruption_bounds(rng),
        check_c_bar(rng),
        check_calruption_invariants(),
        check_determinism(),
        check_stream_sharing(),
    ]
