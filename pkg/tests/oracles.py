"""Independent brute-force oracles. Deliberately slow and loop-based; none of them call library code paths they check."""
import math

import numpy as np


def risk_loop(nu, eta, pred):
    total = 0.0
    for x in range(len(nu)):
        p_wrong = (1.0 - eta[x]) if pred[x] == 1 else eta[x]
        total += nu[x] * p_wrong
    return total


def rho_loop(nu, a, b):
    return sum(nu[x] for x in range(len(nu)) if a[x] != b[x])


def dis_loop(hyp, V):
    out = []
    for x in range(hyp.shape[1]):
        if any(hyp[h][x] != hyp[g][x] for h in V for g in V):
            out.append(x)
    return out


def ball_mass(nu, hyp, hstar, r):
    """``nu(Dis(B(h*, r)))`` by enumeration."""
    ball = [h for h in range(hyp.shape[0]) if rho_loop(nu, hyp[h], hyp[hstar]) <= r]
    return sum(nu[x] for x in dis_loop(hyp, ball))


def _jumps(nu, hyp, hstar, lo, hi, m_lo, m_hi):
    """Radii in ``(lo, hi]`` where ``M`` jumps, each located to adjacent floats."""
    if m_lo == m_hi:
        return []
    a, b = lo, hi
    while True:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if ball_mass(nu, hyp, hstar, mid) == m_lo:
            a = mid
        else:
            b = mid
    m_b = ball_mass(nu, hyp, hstar, b)
    return [b] + _jumps(nu, hyp, hstar, b, hi, m_b, m_hi)


def theta_grid(nu, hyp, hstar, r0, grid=4000):
    """Disagreement coefficient from a dense radius grid with jumps located by bisection.

    ``M(r) = nu(Dis(B(h*, r)))`` is a right-continuous step function; ``M(r)/r``
    peaks at ``r0`` or right at a jump. Jumps are bracketed on the grid and then
    pinned down to machine precision so the result is exact up to rounding.
    """
    rs = np.linspace(r0, 1.0, grid)
    masses = [ball_mass(nu, hyp, hstar, r) for r in rs]
    best = masses[0] / r0
    for i in range(1, grid):
        best = max(best, masses[i] / rs[i])
        for r in _jumps(nu, hyp, hstar, rs[i - 1], rs[i], masses[i - 1], masses[i]):
            best = max(best, ball_mass(nu, hyp, hstar, r) / r)
    return best


def psi_ref(y):
    if y >= 0:
        return math.log(1.0 + y + y * y / 2.0)
    return -math.log(1.0 - y + y * y / 2.0)


def catoni_grid(samples, alpha, lo, hi, step=1e-6):
    """Root of ``sum psi(alpha (X - z))`` by a sign-change scan on a fixed grid."""
    zs = np.arange(lo, hi + step, step)
    f = np.zeros_like(zs)
    for x in samples:
        y = alpha * (x - zs)
        f += np.sign(y) * np.log1p(np.abs(y) + 0.5 * y * y)
    idx = np.flatnonzero((f[:-1] > 0) & (f[1:] <= 0))
    assert len(idx) == 1
    i = idx[0]
    return 0.5 * (zs[i] + zs[i + 1])


def minmax_subgradient(A, b, iters=20000):
    """``min_{eta in [0,1]^d} max_i |A_i . eta + b_i|`` by projected subgradient with a diminishing step."""
    d = A.shape[1]
    eta = np.full(d, 0.5)
    best = np.inf
    for k in range(iters):
        vals = A @ eta + b
        i = int(np.argmax(np.abs(vals)))
        best = min(best, abs(vals[i]))
        g = np.sign(vals[i]) * A[i]
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        eta = np.clip(eta - (0.5 / math.sqrt(k + 1)) * g / norm, 0.0, 1.0)
    return best


def robustcal_reference(hyp, xs, ys, n, delta, modified, pseudo_label=False):
    """Per-round RobustCAL. Returns the list of active sets after each checkpoint.

    With ``pseudo_label`` an unqueried round charges every hypothesis against the
    common prediction of the active set instead of charging nothing.
    """
    k, m = hyp.shape
    active = set(range(k))
    loss = [0] * k
    pair = [[0] * k for _ in range(k)]
    trace = []
    nxt = 2
    for t in range(1, n + 1):
        x, y = int(xs[t - 1]), int(ys[t - 1])
        preds = {int(hyp[h][x]) for h in active}
        if len(preds) > 1:
            for h in range(k):
                loss[h] += int(hyp[h][x] != y)
        elif pseudo_label:
            (common,) = preds
            for h in range(k):
                loss[h] += int(hyp[h][x] != common)
        for h in range(k):
            for g in range(k):
                pair[h][g] += int(hyp[h][x] != hyp[g][x])
        if t == nxt:
            beta = math.log(3.0 * math.log2(t) * k * k / delta)
            best = min(sorted(active), key=lambda h: loss[h])
            keep = set()
            for h in active:
                r = pair[h][best] / t
                thr = math.sqrt(2 * beta * r / t)
                thr += (1.5 * beta / t + 0.5 * r) if modified else beta / t
                if (loss[h] - loss[best]) / t <= thr:
                    keep.add(h)
            keep.add(best)
            active = keep
            trace.append(sorted(active))
            nxt *= 2
    return trace


def c_bar_direct(levels, beta1, n, best_risk):
    """Reweighted corruption budget straight from per-round levels ``levels[t-1]``."""
    total = 0.0
    L = 0
    while beta1 * 4 ** (L + 1) <= n:
        L += 1
    start = 1
    for l in range(1, L + 1):
        N = math.ceil(beta1 * 4**l)
        stop = min(start + N - 1, n)
        if start > n:
            break
        c = sum(levels[start - 1:stop])
        total += c if c / N > 1 / 32 else best_risk * c
        start += N
    return total
