"""Built-in corruption scenarios, selectable by name and parameters."""
from dataclasses import dataclass

import numpy as np

from ..adversary import schedule_burst, schedule_misspecification, schedule_none
from ..errors import ConfigError
from ..instance import counterexample_instance

CE_XI1 = 0.32
CE_XI2 = 0.005
CE_BURST_ETA_X1 = 15.0 / 32.0


@dataclass(frozen=True)
class Scenario:
    name: str
    defaults: dict
    description: str
    fixes_instance: bool = False


_CATALOG = (
    Scenario("clean", {}, "no corruption; every round is served the base conditionals"),
    Scenario("misspec", {"gamma": 0.0, "eta_tilde": "flip"},
             "constant mixture (1 - gamma) eta* + gamma eta_tilde on every round"),
    Scenario("burst", {"tau": None, "eta": "flip"},
             "eta served on rounds 1..tau (default tau = n // 4), base conditionals afterwards; "
             "eta may be a vector, 'flip' (1 - eta*) or a hypothesis index whose predictions become the labels"),
    Scenario("counterexample", {"xi1": CE_XI1, "xi2": CE_XI2, "tau": None},
             "three-point instance with eta* = (1/2, 1, 1) and H = {(1,1,1), (0,0,1)}; "
             "eta(x1) = 15/32 on rounds 1..tau (default tau = n // 4)",
             fixes_instance=True),
)


def scenario_catalog():
    return list(_CATALOG)


def get_scenario(name):
    for s in _CATALOG:
        if s.name == name:
            return s
    known = ", ".join(s.name for s in _CATALOG)
    raise ConfigError(f"scenario.name: unknown scenario {name!r} (known: {known})")


def _resolve_eta(inst, spec, field):
    base = inst.base_conditional
    if isinstance(spec, str):
        if spec != "flip":
            raise ConfigError(f"{field}: expected 'flip', a hypothesis index or a vector, got {spec!r}")
        return 1.0 - base
    if isinstance(spec, (int, np.integer)) and not isinstance(spec, bool):
        if not 0 <= spec < inst.num_hypotheses:
            raise ConfigError(f"{field}: hypothesis index {spec} out of range")
        return inst.hypotheses[spec].astype(float)
    eta = np.asarray(spec, dtype=float)
    if eta.shape != base.shape or np.any(eta < 0) or np.any(eta > 1):
        raise ConfigError(f"{field}: vector must have {base.size} entries in [0, 1]")
    return eta


def _tau(params, n):
    tau = params.get("tau")
    tau = n // 4 if tau is None else int(tau)
    if not 1 <= tau <= n:
        raise ConfigError(f"scenario.tau: must lie in [1, {n}], got {tau}")
    return tau


def scenario_params(name, params):
    """Defaults merged with ``params``; unknown keys are rejected."""
    spec = get_scenario(name)
    unknown = set(params) - set(spec.defaults)
    if unknown:
        raise ConfigError(f"scenario: unknown parameter(s) {sorted(unknown)} for {name!r}")
    return {**spec.defaults, **params}


def scenario_instance(name, params):
    """The instance a scenario fixes, or ``None`` if it runs on the configured instance."""
    p = scenario_params(name, params)
    if name == "counterexample":
        xi1, xi2 = float(p["xi1"]), float(p["xi2"])
        if not (xi1 > 0 and xi2 > 0 and xi1 + xi2 < 1):
            raise ConfigError("scenario.xi1/xi2: need positive masses summing below 1")
        return counterexample_instance(xi1, xi2)
    return None


def build_schedule(name, params, inst, n):
    p = scenario_params(name, params)
    if name == "clean":
        return schedule_none(inst, n)
    if name == "misspec":
        gamma = float(p["gamma"])
        if not 0 <= gamma <= 1:
            raise ConfigError(f"scenario.gamma: must lie in [0, 1], got {gamma}")
        return schedule_misspecification(inst, n, gamma, _resolve_eta(inst, p["eta_tilde"], "scenario.eta_tilde"))
    if name == "burst":
        return schedule_burst(inst, n, _tau(p, n), _resolve_eta(inst, p["eta"], "scenario.eta"))
    if name == "counterexample":
        eta = inst.base_conditional.copy()
        eta[0] = CE_BURST_ETA_X1
        return schedule_burst(inst, n, _tau(p, n), eta)
    raise AssertionError(name)
