"""
Instance catalog and spot-price series.

Spot prices are right-continuous step functions of simulation time: the
price set at a breakpoint applies from that breakpoint on, and lookups
before the first breakpoint return the first price.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from seisflow.core.constants import INSTANCE_CATALOG
from seisflow.core.errors import ArgumentError, ConfigError, DataError

# Configure logging
logger = logging.getLogger(__name__)

SPOT_CSV_COLUMNS = ["t_seconds", "zone", "instance_type", "price_per_hour"]


@dataclass(frozen=True)
class InstanceType:
    """A rentable machine type with its reference prices ($/h)."""

    name: str
    vcpus: int
    memory_gb: float
    on_demand_price: float
    spot_price: float

    def __post_init__(self):
        if self.vcpus < 1 or self.memory_gb <= 0:
            raise ConfigError(f"instance type {self.name}: vcpus and memory must be positive")
        if self.on_demand_price <= 0 or self.spot_price <= 0:
            raise ConfigError(f"instance type {self.name}: prices must be positive")


def default_catalog() -> Dict[str, InstanceType]:
    """Catalog built from the configured instance table."""
    return {
        name: InstanceType(name, vcpus, memory, on_demand, spot)
        for name, (vcpus, memory, on_demand, spot) in INSTANCE_CATALOG.items()
    }


def catalog_from_dict(entries: Mapping[str, Mapping[str, float]]) -> Dict[str, InstanceType]:
    """
    Build a catalog from ``{name: {vcpus, memory_gb, on_demand_price, spot_price}}``.

    Raises:
        ConfigError: If an entry misses a field
    """
    catalog = {}
    for name, entry in entries.items():
        try:
            catalog[name] = InstanceType(
                name,
                int(entry["vcpus"]),
                float(entry["memory_gb"]),
                float(entry["on_demand_price"]),
                float(entry["spot_price"]),
            )
        except KeyError as e:
            raise ConfigError(f"instance type {name} is missing field {e.args[0]!r}") from e
    return catalog


class SpotPriceSeries:
    """
    Step function of spot price ($/h) over simulation time (s) for one zone and type.

    Args:
        zone: Availability zone id
        instance_type: Instance type name
        times: Strictly increasing breakpoints in seconds
        prices: Price in $/h from each breakpoint on
    """

    def __init__(
        self,
        zone: str,
        instance_type: str,
        times: Sequence[float],
        prices: Sequence[float],
    ):
        self.zone = zone
        self.instance_type = instance_type
        self.times = np.asarray(times, dtype=np.float64)
        self.prices = np.asarray(prices, dtype=np.float64)
        if self.times.ndim != 1 or self.times.shape != self.prices.shape or self.times.size == 0:
            raise DataError(f"{zone}/{instance_type}: times and prices must be non-empty and aligned")
        if np.any(np.diff(self.times) <= 0):
            raise DataError(f"{zone}/{instance_type}: breakpoints must be strictly increasing")
        if np.any(self.prices <= 0):
            raise DataError(f"{zone}/{instance_type}: prices must be positive")

    def __repr__(self) -> str:
        return (
            f"SpotPriceSeries({self.zone!r}, {self.instance_type!r}, "
            f"{self.times.size} breakpoints)"
        )

    @classmethod
    def constant(cls, zone: str, instance_type: str, price: float) -> "SpotPriceSeries":
        return cls(zone, instance_type, [0.0], [price])

    @property
    def start(self) -> float:
        return float(self.times[0])

    def price_at(self, t: float) -> float:
        """Price in effect at time t."""
        if t < 0:
            raise ArgumentError(f"time must be non-negative, got {t}")
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.prices[max(idx, 0)])

    def integrate(self, t0: float, t1: float) -> float:
        """
        Cost in $ of running one instance from t0 to t1 (seconds).

        Args:
            t0: Start time
            t1: End time, at least t0

        Returns:
            Integral of the price over [t0, t1] in $
        """
        if t1 < t0:
            raise ArgumentError(f"interval end {t1} precedes start {t0}")
        if t1 == t0:
            return 0.0
        edges = [t0] + [float(t) for t in self.times if t0 < t < t1] + [t1]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += self.price_at(a) * (b - a)
        return total / 3600.0


def spot_price_at(series: SpotPriceSeries, t: float) -> float:
    """Step-function lookup of a spot series at time t."""
    return series.price_at(t)


class SpotMarket:
    """Collection of spot series keyed by (zone, instance type)."""

    def __init__(self, series: Optional[Iterable[SpotPriceSeries]] = None):
        self._series: Dict[Tuple[str, str], SpotPriceSeries] = {}
        for s in series or []:
            self.add(s)

    def __len__(self) -> int:
        return len(self._series)

    def __contains__(self, key: Tuple[str, str]) -> bool:
        return key in self._series

    def add(self, series: SpotPriceSeries) -> None:
        self._series[(series.zone, series.instance_type)] = series

    def get(self, zone: str, instance_type: str) -> SpotPriceSeries:
        try:
            return self._series[(zone, instance_type)]
        except KeyError as e:
            raise DataError(f"no spot series for {instance_type} in {zone}") from e

    def zones(self, instance_type: Optional[str] = None) -> List[str]:
        """Zones with a series (for one type when given), sorted."""
        return sorted({z for z, t in self._series if instance_type is None or t == instance_type})

    def instance_types(self, zone: Optional[str] = None) -> List[str]:
        """Instance types with a series (in one zone when given), sorted."""
        return sorted({t for z, t in self._series if zone is None or z == zone})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "SpotMarket":
        """
        Build a market from rows of ``t_seconds, zone, instance_type, price_per_hour``.

        Raises:
            DataError: On missing columns or invalid series
        """
        missing = [c for c in SPOT_CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"spot price table is missing columns {missing}")
        market = cls()
        for (zone, itype), group in frame.groupby(["zone", "instance_type"], sort=True):
            group = group.sort_values("t_seconds", kind="mergesort")
            market.add(
                SpotPriceSeries(
                    str(zone),
                    str(itype),
                    group["t_seconds"].to_numpy(dtype=float),
                    group["price_per_hour"].to_numpy(dtype=float),
                )
            )
        logger.info("Loaded %d spot series", len(market))
        return market

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "SpotMarket":
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"cannot read spot prices from {path}: {e}") from e
        return cls.from_frame(frame)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for (zone, itype), s in sorted(self._series.items()):
            for t, p in zip(s.times, s.prices):
                rows.append({"t_seconds": t, "zone": zone, "instance_type": itype, "price_per_hour": p})
        return pd.DataFrame(rows, columns=SPOT_CSV_COLUMNS)
