"""
Spot-market strategies for long iterative runs.

A fixed strategy keeps one zone (or instance type) for the whole run. The
dynamic strategy, which an event-driven workflow gets for free because
every iteration submits a new batch job, picks the cheapest option at the
start of each iteration and pays that option's actual prices until the
iteration ends.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from seisflow.core.cloudsim.catalog import SpotMarket, SpotPriceSeries
from seisflow.core.constants import DEFAULT_INSTANCE_TYPE
from seisflow.core.errors import ArgumentError, DataError

# Configure logging
logger = logging.getLogger(__name__)

DIMENSIONS = ("zone", "type")


@dataclass
class StrategyReport:
    """
    Costs of every fixed strategy and of the dynamic one.

    Attributes:
        dimension: ``zone`` (one type, many zones) or ``type`` (one zone, many types)
        fixed: Total $ per fixed option
        dynamic: Total $ of the dynamic strategy
        choices: Option chosen at the start of each iteration
        start_prices: Price ($/h) of the chosen option at each iteration start
        iteration_hours: Length of one iteration
    """

    dimension: str
    fixed: Dict[str, float]
    dynamic: float
    choices: List[str] = field(default_factory=list)
    start_prices: List[float] = field(default_factory=list)
    iteration_hours: float = 0.0

    @property
    def n_iterations(self) -> int:
        return len(self.choices)

    def relative(self) -> Dict[str, float]:
        """Every strategy's cost relative to the most expensive fixed one."""
        top = max(self.fixed.values())
        out = {option: cost / top for option, cost in self.fixed.items()}
        out["dynamic"] = self.dynamic / top
        return out

    def savings(self, option: str) -> float:
        """Share saved by the dynamic strategy against one fixed option."""
        return 1.0 - self.dynamic / self.fixed[option]

    def to_frame(self) -> pd.DataFrame:
        relative = self.relative()
        rows = [
            {"strategy": "fixed", "option": option, "cost": cost, "relative_cost": relative[option]}
            for option, cost in sorted(self.fixed.items())
        ]
        rows.append(
            {"strategy": "dynamic", "option": "", "cost": self.dynamic, "relative_cost": relative["dynamic"]}
        )
        return pd.DataFrame(rows, columns=["strategy", "option", "cost", "relative_cost"])

    def choices_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "iteration": np.arange(self.n_iterations),
                "start_hours": np.arange(self.n_iterations) * self.iteration_hours,
                "choice": self.choices,
                "price_per_hour": self.start_prices,
            }
        )


def _options(
    market: SpotMarket, dimension: str, instance_type: Optional[str], zone: Optional[str]
) -> Dict[str, SpotPriceSeries]:
    if dimension == "zone":
        itype = instance_type or DEFAULT_INSTANCE_TYPE
        return {z: market.get(z, itype) for z in market.zones(itype)}
    if dimension == "type":
        if zone is None:
            zones = market.zones()
            if len(zones) != 1:
                raise ArgumentError("choosing an instance type needs a zone when the market has several")
            zone = zones[0]
        return {t: market.get(zone, t) for t in market.instance_types(zone)}
    raise ArgumentError(f"dimension must be one of {DIMENSIONS}, got {dimension!r}")


def _cheapest(options: Dict[str, SpotPriceSeries], t: float) -> str:
    if not options:
        raise DataError("no spot series to choose from")
    # sorted names break ties
    return min(sorted(options), key=lambda name: options[name].price_at(t))


def choose_zone(market: SpotMarket, t: float, instance_type: Optional[str] = None) -> str:
    """Zone with the lowest spot price of ``instance_type`` at time t (s)."""
    return _cheapest(_options(market, "zone", instance_type, None), t)


def choose_type(market: SpotMarket, t: float, zone: Optional[str] = None) -> str:
    """Instance type with the lowest spot price in ``zone`` at time t (s)."""
    return _cheapest(_options(market, "type", None, zone), t)


def check_coverage(series: SpotPriceSeries, t0: float, t1: float) -> None:
    """
    Raises:
        DataError: If the series starts after t0 or has no finite price on [t0, t1]
    """
    if series.start > t0:
        raise DataError(
            f"{series.zone}/{series.instance_type}: prices start at {series.start:.0f} s, after {t0:.0f} s"
        )
    first = max(int(np.searchsorted(series.times, t0, side="right")) - 1, 0)
    last = int(np.searchsorted(series.times, t1, side="left"))
    if not np.all(np.isfinite(series.prices[first:last])):
        raise DataError(f"{series.zone}/{series.instance_type}: missing prices between {t0:.0f} and {t1:.0f} s")


def strategy_costs(
    market: SpotMarket,
    n_iterations: int,
    iteration_hours: float,
    dimension: str = "zone",
    instance_type: Optional[str] = None,
    zone: Optional[str] = None,
    n_instances: int = 1,
) -> StrategyReport:
    """
    Cost of fixed and dynamic spot strategies over ``n_iterations`` iterations.

    Args:
        market: Spot series
        n_iterations: Number of iterations
        iteration_hours: Duration of one iteration in hours
        dimension: Choose among zones (``zone``) or instance types (``type``)
        instance_type: Instance type when choosing zones
        zone: Zone when choosing instance types
        n_instances: Instances running throughout each iteration

    Returns:
        StrategyReport

    Raises:
        ArgumentError: On invalid sizes
        DataError: If a series does not cover the run
    """
    if n_iterations < 1 or iteration_hours <= 0 or n_instances < 1:
        raise ArgumentError("need at least one iteration, one instance and a positive iteration length")
    options = _options(market, dimension, instance_type, zone)
    if not options:
        raise DataError(f"no spot series to choose a {dimension} from")
    length = iteration_hours * 3600.0
    horizon = n_iterations * length
    for series in options.values():
        check_coverage(series, 0.0, horizon)

    fixed = {name: n_instances * s.integrate(0.0, horizon) for name, s in options.items()}
    choices, start_prices = [], []
    dynamic = 0.0
    for k in range(n_iterations):
        t0 = k * length
        name = _cheapest(options, t0)
        choices.append(name)
        start_prices.append(options[name].price_at(t0))
        dynamic += n_instances * options[name].integrate(t0, t0 + length)

    report = StrategyReport(dimension, fixed, dynamic, choices, start_prices, iteration_hours)
    cheapest_fixed = min(fixed, key=fixed.get)
    logger.info(
        "Dynamic %s strategy: $%.2f; cheapest fixed %s: $%.2f; %d switches",
        dimension,
        dynamic,
        cheapest_fixed,
        fixed[cheapest_fixed],
        sum(1 for a, b in zip(choices, choices[1:]) if a != b),
    )
    return report
