"""Finite problem instances and exact ground-truth quantities.

An instance is a finite example space ``X = {0, .., m-1}`` with a base
marginal ``nu``, base conditionals ``eta[x] = P(y = 1 | x)`` and a finite
hypothesis class given as a ``|H| x m`` binary prediction matrix.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstanceError


@dataclass(frozen=True, eq=False)
class Instance:
    base_marginal: np.ndarray
    base_conditional: np.ndarray
    hypotheses: np.ndarray
    name: str = "instance"

    def __post_init__(self):
        nu = np.array(self.base_marginal, dtype=float)
        eta = np.array(self.base_conditional, dtype=float)
        hyp = np.array(self.hypotheses)
        if nu.ndim != 1 or eta.ndim != 1 or nu.shape != eta.shape:
            raise InvalidInstanceError("marginal and conditional must be vectors of equal length")
        if hyp.ndim != 2 or hyp.shape[1] != nu.shape[0] or hyp.shape[0] < 1:
            raise InvalidInstanceError(
                f"prediction matrix must have shape (|H|, {nu.shape[0]}), got {hyp.shape}")
        if np.any(nu < 0) or abs(nu.sum() - 1.0) > 1e-12:
            raise InvalidInstanceError("marginal must be non-negative and sum to 1")
        if np.any(eta < 0) or np.any(eta > 1):
            raise InvalidInstanceError("conditionals must lie in [0, 1]")
        if not np.isin(hyp, (0, 1)).all():
            raise InvalidInstanceError("predictions must be 0/1")
        hyp = hyp.astype(np.int8)
        if len(np.unique(hyp, axis=0)) != hyp.shape[0]:
            raise InvalidInstanceError("duplicate hypotheses in the prediction matrix")
        for arr in (nu, eta, hyp):
            arr.setflags(write=False)
        object.__setattr__(self, "base_marginal", nu)
        object.__setattr__(self, "base_conditional", eta)
        object.__setattr__(self, "hypotheses", hyp)

    @property
    def num_examples(self):
        return self.base_marginal.shape[0]

    @property
    def num_hypotheses(self):
        return self.hypotheses.shape[0]

    def disagreement_tensor(self):
        """Boolean array ``D[h, h', x] = h(x) != h'(x)``."""
        hyp = self.hypotheses
        return hyp[:, None, :] != hyp[None, :, :]

    def to_dict(self):
        return {
            "name": self.name,
            "marginal": self.base_marginal.tolist(),
            "conditional": self.base_conditional.tolist(),
            "hypotheses": self.hypotheses.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["marginal"], doc["conditional"], doc["hypotheses"],
                       name=doc.get("name", "instance"))
        except KeyError as exc:
            raise InvalidInstanceError(f"instance document is missing field {exc}") from None


@dataclass(frozen=True, eq=False)
class OracleCache:
    true_risks: np.ndarray
    best_index: int
    best_risk: float
    gaps: np.ndarray
    rho_matrix: np.ndarray


def _check_eta(inst, eta):
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (inst.num_examples,):
        raise InvalidInstanceError(
            f"conditional vector has shape {eta.shape}, expected ({inst.num_examples},)")
    return eta


def risks(inst, eta, marginal=None):
    """Risk of every hypothesis under conditionals ``eta`` (and the base marginal)."""
    eta = _check_eta(inst, eta)
    nu = inst.base_marginal if marginal is None else np.asarray(marginal, dtype=float)
    hyp = inst.hypotheses
    pointwise = hyp * (1.0 - eta) + (1 - hyp) * eta
    return pointwise @ nu


def risk(inst, h, eta):
    """``R(h) = sum_x nu[x] * P(h(x) != y)`` under conditionals ``eta``."""
    eta = _check_eta(inst, eta)
    pred = inst.hypotheses[h]
    return float(np.dot(inst.base_marginal, pred * (1.0 - eta) + (1 - pred) * eta))


def rho(inst, h, h2):
    """Marginal mass of the examples where ``h`` and ``h2`` disagree."""
    mask = inst.hypotheses[h] != inst.hypotheses[h2]
    return float(inst.base_marginal[mask].sum())


def rho_matrix(inst):
    return inst.disagreement_tensor().astype(float) @ inst.base_marginal


def disagreement_region(inst, V):
    """Indices of examples on which some pair in ``V`` disagrees."""
    V = np.asarray(sorted(set(int(h) for h in V)), dtype=int)
    if V.size == 0:
        raise ValueError("disagreement region of an empty hypothesis set")
    preds = inst.hypotheses[V]
    return np.flatnonzero(preds.min(axis=0) != preds.max(axis=0))


def disagreement_coefficient(inst, r0, oracle=None):
    """``sup_{r >= r0} nu(Dis(B(h*, r))) / r`` evaluated at the breakpoints of the ratio.

    Between consecutive ball radii the numerator is constant, so the ratio only
    decreases; the supremum sits at ``r0`` or at some ``rho(h, h*) >= r0``.
    """
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    oracle = build_oracle(inst) if oracle is None else oracle
    dist = oracle.rho_matrix[oracle.best_index]
    candidates = np.concatenate(([float(r0)], dist[dist >= r0]))
    best = 0.0
    for r in np.unique(candidates):
        ball = np.flatnonzero(dist <= r)
        mass = inst.base_marginal[disagreement_region(inst, ball)].sum()
        best = max(best, mass / r)
    return float(best)


def build_oracle(inst):
    true = risks(inst, inst.base_conditional)
    best = int(np.argmin(true))
    best_risk = float(true[best])
    gaps = true - best_risk
    gaps[best] = 0.0
    rho_mat = rho_matrix(inst)
    return OracleCache(true_risks=true, best_index=best, best_risk=best_risk,
                       gaps=gaps, rho_matrix=rho_mat)


def counterexample_instance(xi1=0.32, xi2=0.005):
    """Three-point instance on which vanilla elimination discards the best hypothesis.

    ``nu = (xi1, xi2, 1 - xi1 - xi2)``, ``eta = (1/2, 1, 1)``,
    ``h1 = (1, 1, 1)`` and ``h2 = (0, 0, 1)``.
    """
    if not (0 < xi2 and xi1 + xi2 < 1):
        raise InvalidInstanceError("need xi1, xi2 > 0 and xi1 + xi2 < 1")
    return Instance(
        base_marginal=[xi1, xi2, 1.0 - xi1 - xi2],
        base_conditional=[0.5, 1.0, 1.0],
        hypotheses=[[1, 1, 1], [0, 0, 1]],
        name="counterexample",
    )


def random_instance(rng, num_examples, num_hypotheses, deterministic_labels=False):
    """Random instance with distinct hypotheses; ``rng`` is a numpy Generator."""
    m = int(num_examples)
    k = int(num_hypotheses)
    if m > 30 or k > 2**m:
        raise ValueError(f"cannot draw {k} distinct hypotheses over {m} examples")
    nu = rng.dirichlet(np.ones(m))
    nu = nu / nu.sum()
    nu[-1] = 1.0 - nu[:-1].sum()
    if nu[-1] < 0:
        nu = np.full(m, 1.0 / m)
    if deterministic_labels:
        eta = rng.integers(0, 2, size=m).astype(float)
    else:
        eta = rng.uniform(size=m)
    codes = rng.choice(2**m, size=k, replace=False)
    hyp = (codes[:, None] >> np.arange(m)[None, :]) & 1
    return Instance(nu, eta, hyp, name="random")
