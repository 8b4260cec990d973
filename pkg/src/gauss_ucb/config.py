"""JSON experiment configuration.

A config looks like::

    {
      "instance": {"means": [0, -1], "stds": [1, 1], "sigma": 1, "horizon": 1000},
      "policies": [
        {"kind": "constant_ucb", "level": {"method": "fixed", "b": 3.7}},
        {"kind": "constant_ucb", "level": {"method": "sqrt_two_log"}},
        {"kind": "lai_ucb"},
        {"kind": "ucb1", "alpha": 2}
      ],
      "replications": 10000,
      "master_seed": 0,
      "output_dir": "out",
      "crossing": {"replications": 20000, "max_walk": [{"b": 3, "horizon_after_init": 1000}]}
    }

``stds`` defaults to ``sigma`` for every arm; ``replications``,
``master_seed``, ``output_dir`` and ``crossing`` are optional.  Every
violation is reported as a :class:`ConfigError` naming the field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .exploration import LevelMethod, fixed_level, optimal_level, sqrt_two_log_level
from .policies import PolicyKind, PolicySpec
from .simulator import BanditInstance

DEFAULTS = {"replications": 1000, "master_seed": 0, "output_dir": "out"}

DEFAULT_CROSSING = {
    "replications": 20000,
    "seed": 0,
    "max_walk": [{"b": b, "horizon_after_init": t} for b in (2.5, 3.0, 3.5) for t in (100, 1000)],
    "drifted": [{"b": b, "gamma": g, "horizon_after_init": 1000} for b in (1.0, 2.0) for g in (0.2, 0.5, 1.0)],
    "lai_boundary": [{"n": n, "gamma": 1.0, "points_per_decade": 200} for n in (10.0, 100.0, 1000.0)],
    "stopping": [{"b": 3.0, "theta": 1.0, "dt": 1e-3}],
}

_CROSSING_FIELDS = {
    "max_walk": {"b": "nonnegative", "horizon_after_init": "int"},
    "drifted": {"b": "positive", "gamma": "positive", "horizon_after_init": "int"},
    "lai_boundary": {"n": "positive", "gamma": "positive", "points_per_decade": "ppd"},
    "stopping": {"b": "positive", "theta": "positive", "dt": "dt"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted field path at fault."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policies: tuple[PolicySpec, ...]
    replications: int
    master_seed: int
    output_dir: Path
    crossing: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return config_hash(self.document)

    def with_overrides(self, *, seed=None, replications=None, output_dir=None) -> ExperimentConfig:
        doc = json.loads(json.dumps(self.document))
        if seed is not None:
            doc["master_seed"] = seed
        if replications is not None:
            doc["replications"] = replications
        if output_dir is not None:
            doc["output_dir"] = str(output_dir)
        return build_config(doc)


def canonical_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(document: dict) -> str:
    """SHA-256 of the canonical JSON form."""
    return hashlib.sha256(canonical_json(document).encode("ascii")).hexdigest()


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _instance(doc: dict) -> BanditInstance:
    inst = _require(doc, "instance", "")
    means = _require(inst, "means", "instance")
    if not isinstance(means, list) or len(means) < 2:
        raise ConfigError("instance.means", "expected a list of at least 2 numbers")
    means = [_number(m, f"instance.means[{i}]") for i, m in enumerate(means)]
    sigma = _number(_require(inst, "sigma", "instance"), "instance.sigma")
    if not sigma > 0.0:
        raise ConfigError("instance.sigma", f"must be positive, got {sigma}")
    horizon = _integer(_require(inst, "horizon", "instance"), "instance.horizon")
    if horizon < len(means) + 1:
        raise ConfigError("instance.horizon", f"must be at least n_arms + 1 = {len(means) + 1}, got {horizon}")
    stds = inst.get("stds", [sigma] * len(means))
    if not isinstance(stds, list) or len(stds) != len(means):
        raise ConfigError("instance.stds", f"expected a list of {len(means)} numbers")
    for i, s in enumerate(stds):
        s = _number(s, f"instance.stds[{i}]")
        if not 0.0 < s <= sigma:
            raise ConfigError(f"instance.stds[{i}]", f"must lie in (0, sigma={sigma}], got {s}")
    return BanditInstance(tuple(means), tuple(float(s) for s in stds), sigma, horizon)


def _policy(entry, path: str, instance: BanditInstance) -> PolicySpec:
    kind_name = _require(entry, "kind", path)
    try:
        kind = PolicyKind(kind_name)
    except ValueError:
        choices = ", ".join(k.value for k in PolicyKind)
        raise ConfigError(f"{path}.kind", f"unknown policy {kind_name!r}; expected one of {choices}") from None
    t_after = instance.horizon_after_init
    level = None
    if kind is PolicyKind.CONSTANT_UCB:
        spec = _require(entry, "level", path)
        method_name = _require(spec, "method", f"{path}.level")
        try:
            method = LevelMethod(method_name)
        except ValueError:
            raise ConfigError(f"{path}.level.method", f"unknown level method {method_name!r}") from None
        if method is LevelMethod.FIXED:
            b = _number(_require(spec, "b", f"{path}.level"), f"{path}.level.b")
            if not b > 0.0:
                raise ConfigError(f"{path}.level.b", f"must be positive, got {b}")
            level = fixed_level(b, t_after)
        elif method is LevelMethod.SQRT_TWO_LOG:
            if t_after < 2:
                raise ConfigError("instance.horizon", "sqrt_two_log level needs horizon >= n_arms + 2")
            level = sqrt_two_log_level(t_after)
        else:
            level = optimal_level(t_after)
    alpha = 2.0
    if kind is PolicyKind.UCB1:
        alpha = _number(entry.get("alpha", 2.0), f"{path}.alpha")
        if not alpha > 0.0:
            raise ConfigError(f"{path}.alpha", f"must be positive, got {alpha}")
    if kind is PolicyKind.KL_UCB_GAUSS and instance.horizon < 4:
        raise ConfigError("instance.horizon", "kl_ucb_gauss needs horizon >= 4")
    return PolicySpec(kind, instance.horizon, instance.sigma, level=level, alpha=alpha)


def _crossing(section) -> dict:
    if section is None:
        return json.loads(json.dumps(DEFAULT_CROSSING))
    if not isinstance(section, dict):
        raise ConfigError("crossing", "expected an object")
    out = {"replications": DEFAULT_CROSSING["replications"], "seed": DEFAULT_CROSSING["seed"]}
    reps = _integer(section.get("replications", out["replications"]), "crossing.replications")
    if reps < 2:
        raise ConfigError("crossing.replications", f"must be >= 2, got {reps}")
    seed = _integer(section.get("seed", out["seed"]), "crossing.seed")
    if seed < 0:
        raise ConfigError("crossing.seed", "must be non-negative")
    out.update(replications=reps, seed=seed)
    for quantity, fields in _CROSSING_FIELDS.items():
        rows = section.get(quantity, [])
        if not isinstance(rows, list):
            raise ConfigError(f"crossing.{quantity}", "expected a list")
        checked = []
        for i, row in enumerate(rows):
            base = f"crossing.{quantity}[{i}]"
            item = {}
            for name, rule in fields.items():
                if rule == "ppd" and name not in row:
                    item[name] = 200
                    continue
                value = _require(row, name, base)
                where = f"{base}.{name}"
                if rule in ("int", "ppd"):
                    value = _integer(value, where)
                    floor = 1 if rule == "int" else 10
                    if value < floor:
                        raise ConfigError(where, f"must be >= {floor}, got {value}")
                else:
                    value = _number(value, where)
                    if rule == "positive" and not value > 0.0:
                        raise ConfigError(where, f"must be positive, got {value}")
                    if rule == "nonnegative" and value < 0.0:
                        raise ConfigError(where, f"must be non-negative, got {value}")
                    if rule == "dt" and not 0.0 < value < 0.01:
                        raise ConfigError(where, f"must lie in (0, 0.01), got {value}")
                item[name] = value
            if quantity == "max_walk" and item["b"] == 0.0:
                # The size bound needs a positive level; b = 0 has probability ~1 anyway.
                raise ConfigError(f"{base}.b", "must be positive for a bound comparison")
            checked.append(item)
        out[quantity] = checked
    return out


def build_config(doc: dict) -> ExperimentConfig:
    """Validate a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be an object")
    instance = _instance(doc)
    raw_policies = _require(doc, "policies", "")
    if not isinstance(raw_policies, list) or not raw_policies:
        raise ConfigError("policies", "expected a non-empty list")
    policies = tuple(_policy(p, f"policies[{i}]", instance) for i, p in enumerate(raw_policies))
    replications = _integer(doc.get("replications", DEFAULTS["replications"]), "replications")
    if replications < 1:
        raise ConfigError("replications", f"must be >= 1, got {replications}")
    seed = _integer(doc.get("master_seed", DEFAULTS["master_seed"]), "master_seed")
    if seed < 0:
        raise ConfigError("master_seed", "must be non-negative")
    output_dir = doc.get("output_dir", DEFAULTS["output_dir"])
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir", "expected a non-empty string")
    crossing = _crossing(doc.get("crossing"))
    document = dict(doc, replications=replications, master_seed=seed, output_dir=output_dir)
    return ExperimentConfig(instance, policies, replications, seed, Path(output_dir), crossing, document)


def parse_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file.

    Raises ``FileNotFoundError`` for a missing file and :class:`ConfigError`
    for malformed JSON or any violated constraint.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON in {path}: {exc}") from None
    return build_config(doc)
