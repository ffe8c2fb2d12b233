"""
Scenario files: JSON descriptions of a simulated cloud.

Example:
    {
      "seed": 7,
      "startup_window_s": [60, 180],
      "runtime_jitter": 0.1,
      "duplication_probability": 0.0,
      "spot_prices": "prices.csv",
      "failure_plan": {"fraction": 0.1, "restart": true}
    }

Relative paths are resolved against the scenario file's directory.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from seisflow.core.cloudsim.catalog import (
    InstanceType,
    SpotMarket,
    catalog_from_dict,
    default_catalog,
)
from seisflow.core.cloudsim.world import FailurePlan, Seed, SimConfig, SimWorld
from seisflow.core.errors import ConfigError

# Configure logging
logger = logging.getLogger(__name__)

# scenario key -> SimConfig field
_CONFIG_KEYS = {
    "runtime_jitter": "runtime_jitter",
    "restart_penalty_s": "restart_penalty",
    "spot_warning_s": "spot_warning",
    "visibility_timeout_s": "visibility_timeout",
    "duplication_probability": "duplication_probability",
    "receive_single_bias": "receive_single_bias",
    "return_delay_s": "return_delay",
    "max_events": "max_events",
}
_FUNCTION_KEYS = {
    "memory_cap_gb": "function_memory_cap_gb",
    "duration_cap_s": "function_duration_cap_s",
    "request_fee": "request_fee",
    "gb_second_fee": "gb_second_fee",
}
_STORE_KEYS = {
    "bandwidth_mb_s": "store_bandwidth_mb_s",
    "latency_s": "store_latency_s",
}


@dataclass
class Scenario:
    """Everything needed to build identical worlds."""

    seed: Seed = 0
    config: SimConfig = field(default_factory=SimConfig)
    catalog: Dict[str, InstanceType] = field(default_factory=default_catalog)
    market: SpotMarket = field(default_factory=SpotMarket)
    failure_plan: FailurePlan = field(default_factory=FailurePlan)

    def build_world(self, seed: Optional[Seed] = None) -> SimWorld:
        """Fresh world for this scenario (optionally with another seed)."""
        return SimWorld(
            self.seed if seed is None else seed,
            self.config,
            dict(self.catalog),
            self.market,
            self.failure_plan,
        )


def _section(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"scenario field {key!r} must be an object")
    return value


def _failure_plan(data: Mapping[str, Any]) -> FailurePlan:
    interruptions = {}
    for i, entry in enumerate(data.get("interruptions", [])):
        try:
            interruptions[(str(entry["job"]), int(entry["task"]))] = float(entry["at"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"failure_plan.interruptions[{i}] needs job, task and at") from e
    return FailurePlan(
        interruptions,
        float(data.get("fraction", 0.0)),
        bool(data.get("restart", True)),
    )


def scenario_from_dict(
    data: Mapping[str, Any], base_dir: Optional[Union[str, Path]] = None
) -> Scenario:
    """
    Build a scenario from parsed JSON.

    Raises:
        ConfigError: On unknown or invalid fields
    """
    known = (
        {"seed", "startup_window_s", "function", "store", "instance_catalog", "spot_prices",
         "failure_plan", "comment"}
        | set(_CONFIG_KEYS)
    )
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown scenario fields: {', '.join(unknown)}")

    kwargs: Dict[str, Any] = {}
    if "startup_window_s" in data:
        window = data["startup_window_s"]
        if not isinstance(window, (list, tuple)) or len(window) != 2:
            raise ConfigError("startup_window_s must be a [min, max] pair")
        kwargs["startup_window"] = (float(window[0]), float(window[1]))
    for key, name in _CONFIG_KEYS.items():
        if key in data:
            kwargs[name] = data[key]
    for key, name in _FUNCTION_KEYS.items():
        if key in _section(data, "function"):
            kwargs[name] = data["function"][key]
    for key, name in _STORE_KEYS.items():
        if key in _section(data, "store"):
            kwargs[name] = data["store"][key]
    try:
        config = SimConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(f"invalid scenario: {e}") from e

    catalog = default_catalog()
    if "instance_catalog" in data:
        catalog.update(catalog_from_dict(_section(data, "instance_catalog")))

    market = SpotMarket()
    if data.get("spot_prices"):
        path = Path(data["spot_prices"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        market = SpotMarket.from_csv(path)

    seed = data.get("seed", 0)
    if not isinstance(seed, (int, list)):
        raise ConfigError("seed must be an integer or a list of integers")

    return Scenario(seed, config, catalog, market, _failure_plan(_section(data, "failure_plan")))


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read a scenario JSON file.

    Raises:
        ConfigError: If the file is missing, malformed or invalid
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"scenario {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"scenario {path} must hold a JSON object")
    scenario = scenario_from_dict(data, path.parent)
    logger.info("Loaded scenario %s (seed %s)", path, scenario.seed)
    return scenario
