"""Oracle metrics: quantities that need the true marginal or the corrupted conditionals.

Nothing here is visible to a learner. Epoch records and configs are read by
attribute (``l``, ``start``, ``length``, ``rho_hat``, ``W``, ``q_min``,
``gap_hat``, ``layers``; ``beta1``, ``beta3``, ``epoch_length``) so this
module does not import the algorithms.
"""
import math

import numpy as np

from ..adversary import LabelStream, corruption_mass

_TOL = 1e-12


def accounted_epoch_count(cfg, n=None):
    """``floor(log4(n / beta1))``, computed without floating-point log."""
    n = cfg.n if n is None else n
    count = 0
    while cfg.beta1 * 4.0 ** (count + 1) <= n:
        count += 1
    return count


def accounted_epoch_intervals(cfg, n=None):
    """Prescheduled epochs ``(l, start, stop)`` for ``l = 1..floor(log4(n / beta1))``, clipped to ``n``."""
    n = cfg.n if n is None else n
    out = []
    start = 1
    for l in range(1, accounted_epoch_count(cfg, n) + 1):
        length = cfg.epoch_length(l)
        if start > n:
            break
        out.append((l, start, min(start + length - 1, n)))
        start += length
    return out


def c_bar_total(sched, cfg, oracle):
    """Corruption budget with sub-threshold epochs discounted by ``R*``."""
    total = 0.0
    for l, start, stop in accounted_epoch_intervals(cfg):
        c = corruption_mass(sched, start, stop)
        heavy = c / cfg.epoch_length(l) > 1.0 / 32.0
        total += c * (1.0 if heavy else oracle.best_risk)
    return float(total)


def g_values(sched, cfg, oracle, epochs):
    """``g_l`` for each completed epoch (the corruption slack in the gap sandwich)."""
    out = []
    acc = 0.0
    for e in epochs:
        c = corruption_mass(sched, e.start, e.start + e.length - 1)
        heavy = 2.0 * c / e.length > 1.0 / 16.0
        acc += c * (1.0 if heavy else 2.0 * oracle.best_risk)
        out.append(2.0 / cfg.beta1 * 4.0 ** (-e.l) * acc)
    return out


def passive_erm_bound(n, num_hypotheses, delta, best_risk, c_total):
    """Excess-risk bound for passive ERM with total corruption ``c_total``."""
    if not 4.0 * c_total < n:
        return math.inf
    lg = math.log(num_hypotheses / delta)
    return (lg / n + math.sqrt(8.0 * best_risk * lg / n) + 8.0 * c_total * best_risk / n
            + 5.0 * lg / n / (1.0 - 4.0 * c_total / n) ** 2)


def epoch_true_risks(inst, sched, xs, start):
    """Average risk of every hypothesis over the epoch's rounds under the served ``eta_t``."""
    eta = sched.eta_values(start, start + len(xs) - 1, xs)
    m = inst.num_examples
    counts = np.bincount(xs, minlength=m)
    ones = np.bincount(xs, weights=eta, minlength=m)
    hyp = inst.hypotheses
    return (hyp @ (counts - ones) + (1 - hyp) @ ones) / len(xs)


def event_flags(inst, sched, cfg, oracle, epoch, xs):
    """``(gap, dis1, dis2)`` for one epoch; each is True when the event holds on every pair."""
    N = epoch.length
    beta3 = cfg.beta3
    rho_star = oracle.rho_matrix
    rho_hat = epoch.rho_hat
    off = ~np.eye(inst.num_hypotheses, dtype=bool)
    err = np.abs(rho_hat - rho_star)
    dis1 = bool(np.all((err <= np.sqrt(beta3 * rho_hat / N) + beta3 / N + _TOL)[off]))
    dis2 = bool(np.all((err <= np.sqrt(beta3 * rho_star / N) + beta3 / N + _TOL)[off]))
    r_hat = epoch_true_risks(inst, sched, xs, epoch.start)
    diff = r_hat[:, None] - r_hat[None, :]
    live = off & (rho_hat > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = np.sqrt(10.0 * beta3 * rho_hat / (N * epoch.q_min))
    gap = bool(np.all((np.abs(diff - epoch.W) <= radius + _TOL)[live]))
    return gap, dis1, dis2


def sandwich_holds(gaps, gap_hat, eps, g):
    upper = np.all(gap_hat <= 2.0 * (gaps + eps + g) + _TOL)
    lower = np.all(gaps <= 1.5 * gap_hat + 1.5 * eps + 3.0 * g + _TOL)
    return bool(upper and lower)


def layer_diameter_holds(oracle, layers, g_prev):
    """``max_{h in V^j} rho*(h, h*) <= 2R* + 3 eps_j + 3 g`` for every layer ``j``."""
    dist = oracle.rho_matrix[oracle.best_index]
    for j, members in enumerate(layers):
        if members.any() and dist[members].max() > 2.0 * oracle.best_risk + 3.0 * 2.0**-j + 3.0 * g_prev + _TOL:
            return False
    return True


def calruption_oracle_checks(inst, sched, cfg, oracle, epochs, seed):
    """Event flags and the gap/diameter invariants for a finished CALruption run."""
    stream = LabelStream(inst, sched, seed)
    flags = {"gap": [], "dis1": [], "dis2": []}
    for e in epochs:
        xs = stream.reveal(e.start, e.start + e.length - 1)
        for name, ok in zip(("gap", "dis1", "dis2"), event_flags(inst, sched, cfg, oracle, e, xs)):
            flags[name].append(ok)
    g = g_values(sched, cfg, oracle, epochs)
    sandwich = [sandwich_holds(oracle.gaps, e.gap_hat, 2.0**-e.l, gl) for e, gl in zip(epochs, g)]
    # layers built at the end of epoch l serve epoch l+1 and are bounded with g_l
    diameter = [layer_diameter_holds(oracle, e.layers, gl) for e, gl in zip(epochs, g)]
    held = all(all(v) for v in flags.values())
    events = {name: all(v) for name, v in flags.items()}
    events["per_epoch"] = flags
    invariants = {
        "g": g,
        "sandwich": sandwich,
        "layer_diameter": diameter,
        "sandwich_ok": all(sandwich),
        "layer_diameter_ok": all(diameter),
        "invariants_ok": (not held) or (all(sandwich) and all(diameter)),
    }
    return {"events_held": held, "events": events, "invariants": invariants}
