"""Experiment configuration: one JSON document with a versioned ``schema`` field.

Example::

    {"schema": 1,
     "instance": "counterexample",
     "scenario": {"name": "burst", "tau": 4096, "eta": 1},
     "algorithms": ["passive_erm", "robustcal_modified", "calruption"],
     "n": 65536, "delta": 0.05,
     "seeds": {"count": 20, "base": 0},
     "calruption": {"mode": "practical", "multiplier": 8}}
"""
import json
import os
from dataclasses import dataclass, field, replace

from ..calruption import PRACTICAL_MULTIPLIER, THEORY_MULTIPLIER, CalruptionConfig
from ..errors import ConfigError, InvalidInstanceError
from ..instance import Instance, counterexample_instance
from .scenarios import build_schedule, scenario_instance, scenario_params

SCHEMA_VERSION = 1
ALGORITHMS = ("passive_erm", "robustcal_vanilla", "robustcal_modified", "calruption")
_KEYS = {"schema", "instance", "scenario", "algorithms", "algorithm", "n", "delta", "seeds",
         "calruption", "output", "format", "workers", "timing"}


@dataclass(frozen=True)
class ExperimentConfig:
    instance: Instance
    scenario: str
    scenario_params: dict
    algorithms: tuple
    n: int
    delta: float
    seeds: tuple
    beta1_multiplier: float = PRACTICAL_MULTIPLIER
    query_partial_epoch: bool = True
    output: str = None
    format: str = "csv"
    workers: int = 1
    timing: bool = False
    source: dict = field(default=None, compare=False, repr=False)

    def calruption_config(self):
        return CalruptionConfig(self.n, self.delta, self.instance.num_hypotheses,
                                beta1_multiplier=self.beta1_multiplier,
                                query_partial_epoch=self.query_partial_epoch)

    def schedule(self):
        return build_schedule(self.scenario, self.scenario_params, self.instance, self.n)

    def validate(self):
        """Cross-field checks that need the instance and horizon."""
        self.schedule()
        if "calruption" in self.algorithms:
            first = self.calruption_config().epoch_length(1)
            if self.n < first:
                raise ConfigError(f"n: calruption needs n >= {first} (one full epoch), got {self.n}")
        return self

    def with_n(self, n):
        if n < 2:
            raise ConfigError(f"n: must be at least 2, got {n}")
        return replace(self, n=int(n)).validate()


def _fail(field_name, msg):
    raise ConfigError(f"{field_name}: {msg}")


def _load_instance(spec, base_dir):
    if spec is None or spec == "counterexample":
        return counterexample_instance()
    if isinstance(spec, str):
        path = spec if os.path.isabs(spec) else os.path.join(base_dir, spec)
        try:
            with open(path) as fh:
                spec = json.load(fh)
        except OSError as exc:
            _fail("instance", f"cannot read instance file {path}: {exc.strerror}")
        except json.JSONDecodeError as exc:
            _fail("instance", f"instance file {path} is not valid JSON: {exc}")
    if not isinstance(spec, dict):
        _fail("instance", "expected 'counterexample', a file path or an inline object")
    try:
        return Instance.from_dict(spec)
    except InvalidInstanceError as exc:
        _fail("instance", str(exc))


def _seeds(spec):
    if isinstance(spec, int) and not isinstance(spec, bool):
        spec = {"count": spec}
    if isinstance(spec, dict):
        unknown = set(spec) - {"count", "base"}
        if unknown:
            _fail("seeds", f"unknown keys {sorted(unknown)}")
        count, base = spec.get("count"), spec.get("base", 0)
        if not isinstance(count, int) or count < 1:
            _fail("seeds.count", "must be a positive integer")
        if not isinstance(base, int) or base < 0:
            _fail("seeds.base", "must be a non-negative integer")
        spec = list(range(base, base + count))
    if not isinstance(spec, list) or not spec:
        _fail("seeds", "need at least one seed (a list, a count, or {count, base})")
    if not all(isinstance(s, int) and not isinstance(s, bool) and 0 <= s < 2**64 for s in spec):
        _fail("seeds", "seeds must be integers in [0, 2^64)")
    if len(set(spec)) != len(spec):
        _fail("seeds", "duplicate seeds")
    return tuple(spec)


def _multiplier(spec):
    if spec is None:
        return PRACTICAL_MULTIPLIER, True
    if spec == "theory":
        return THEORY_MULTIPLIER, True
    if spec == "practical":
        return PRACTICAL_MULTIPLIER, True
    if not isinstance(spec, dict):
        _fail("calruption", "expected 'theory', 'practical' or an object")
    unknown = set(spec) - {"mode", "multiplier", "query_partial_epoch"}
    if unknown:
        _fail("calruption", f"unknown keys {sorted(unknown)}")
    mode = spec.get("mode", "practical")
    if mode not in ("theory", "practical"):
        _fail("calruption.mode", f"must be 'theory' or 'practical', got {mode!r}")
    mult = THEORY_MULTIPLIER if mode == "theory" else spec.get("multiplier", PRACTICAL_MULTIPLIER)
    if mode == "theory" and "multiplier" in spec:
        _fail("calruption.multiplier", "theory mode fixes the multiplier")
    if not isinstance(mult, (int, float)) or isinstance(mult, bool) or not mult > 0:
        _fail("calruption.multiplier", "must be a positive number")
    partial = spec.get("query_partial_epoch", True)
    if not isinstance(partial, bool):
        _fail("calruption.query_partial_epoch", "must be true or false")
    return float(mult), partial


def parse_config(doc, base_dir="."):
    """Validate a config document and build an :class:`ExperimentConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(doc) - _KEYS
    if unknown:
        _fail("config", f"unknown fields {sorted(unknown)}")
    if doc.get("schema") != SCHEMA_VERSION:
        _fail("schema", f"must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")

    scen = doc.get("scenario", "clean")
    if isinstance(scen, str):
        scen = {"name": scen}
    if not isinstance(scen, dict) or "name" not in scen:
        _fail("scenario", "expected a name or an object with a 'name'")
    name = scen["name"]
    params = {k: v for k, v in scen.items() if k != "name"}
    params = scenario_params(name, params)
    fixed = scenario_instance(name, params)
    if fixed is not None and "instance" in doc:
        _fail("instance", f"scenario {name!r} fixes its own instance; remove this field")
    inst = fixed if fixed is not None else _load_instance(doc.get("instance"), base_dir)

    algos = doc.get("algorithms", doc.get("algorithm"))
    if "algorithms" in doc and "algorithm" in doc:
        _fail("algorithms", "give either 'algorithm' or 'algorithms', not both")
    if isinstance(algos, str):
        algos = [algos]
    if not isinstance(algos, list) or not algos:
        _fail("algorithms", f"need at least one of {list(ALGORITHMS)}")
    for a in algos:
        if a not in ALGORITHMS:
            _fail("algorithms", f"unknown algorithm {a!r} (known: {list(ALGORITHMS)})")
    if len(set(algos)) != len(algos):
        _fail("algorithms", "duplicate algorithms")

    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        _fail("n", "must be an integer >= 2")
    delta = doc.get("delta", 0.05)
    if not isinstance(delta, (int, float)) or isinstance(delta, bool) or not 0 < delta < 1:
        _fail("delta", "must lie in (0, 1)")
    seeds = _seeds(doc.get("seeds", 1))
    mult, partial = _multiplier(doc.get("calruption"))
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        _fail("format", "must be 'csv' or 'json'")
    workers = doc.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        _fail("workers", "must be a positive integer")
    timing = doc.get("timing", False)
    if not isinstance(timing, bool):
        _fail("timing", "must be true or false")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        _fail("output", "must be a path string")
    if output is not None and not os.path.isabs(output):
        output = os.path.join(base_dir, output)
    return ExperimentConfig(
        instance=inst, scenario=name, scenario_params=params, algorithms=tuple(algos),
        n=n, delta=float(delta), seeds=seeds, beta1_multiplier=mult, query_partial_epoch=partial,
        output=output, format=fmt, workers=workers, timing=timing, source=doc,
    ).validate()


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from None
    return parse_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))
