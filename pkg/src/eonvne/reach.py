"""Transmission configurations, reach tables and the compared grid/transponder variants."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ParseError, ValidationError

FIXED_RATES = (100, 200, 400)
FLEX_RATES = (100, 150, 200, 250, 300, 400, 500, 600, 800)


@dataclass(frozen=True)
class TransmissionConfig:
    rate: int  # Gbps
    baud: float  # GBaud
    modulation: str
    fec_overhead: float  # percent
    reach_km: float
    slice_count: int
    row_id: int  # position in the source document, stable across variant filtering

    def __post_init__(self) -> None:
        if self.rate <= 0 or self.reach_km <= 0 or self.slice_count < 1:
            raise ValidationError(f"invalid transmission config row {self.row_id}")

    @property
    def tuple_key(self) -> tuple:
        return (self.rate, self.baud, self.modulation, self.fec_overhead)


@dataclass(frozen=True)
class VariantSpec:
    """Which rows of a reach table a variant may use.

    ``slice_width_ghz`` is the channel granularity: a row is usable only when its
    spectrum width is a whole multiple of it. With ``single_config`` only the
    first usable row of each rate (document order) is kept.
    """

    name: str
    rates: tuple[int, ...]
    single_config: bool
    slice_width_ghz: float


VARIANTS: dict[str, VariantSpec] = {
    "Fix-RT": VariantSpec("Fix-RT", FIXED_RATES, True, 50.0),
    "Fix-AT": VariantSpec("Fix-AT", FIXED_RATES, False, 50.0),
    "Flex-AT": VariantSpec("Flex-AT", FLEX_RATES, False, 12.5),
}


def get_variant(name: str | VariantSpec) -> VariantSpec:
    if isinstance(name, VariantSpec):
        return name
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValidationError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}") from None


class ReachTable:
    def __init__(self, configs: Sequence[TransmissionConfig], slice_width_ghz: float, variant: str = "custom"):
        self.configs = tuple(configs)
        self.slice_width_ghz = slice_width_ghz
        self.variant = variant
        if not self.configs:
            raise ValidationError("reach table is empty")
        keys = [c.tuple_key for c in self.configs]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate config rows (same rate, baud, modulation, fec)")
        self.rates = tuple(sorted({c.rate for c in self.configs}))
        self._by_rate: dict[int, tuple[TransmissionConfig, ...]] = {
            r: tuple(c for c in self.configs if c.rate == r) for r in self.rates
        }
        self._by_row = {c.row_id: c for c in self.configs}

    def __len__(self) -> int:
        return len(self.configs)

    def __repr__(self) -> str:
        return f"ReachTable({self.variant!r}, {len(self.configs)} configs, rates={list(self.rates)})"

    @property
    def max_rate(self) -> int:
        return self.rates[-1]

    @property
    def min_rate(self) -> int:
        return self.rates[0]

    def by_row(self, row_id: int) -> TransmissionConfig:
        try:
            return self._by_row[row_id]
        except KeyError:
            raise ValidationError(f"config row {row_id} not in table") from None

    def configs_for_rate(self, rate: int) -> tuple[TransmissionConfig, ...]:
        if rate not in self._by_rate:
            raise ValidationError(f"rate {rate} not in table")
        return self._by_rate[rate]

    def admissible(self, length_km: float) -> tuple[TransmissionConfig, ...]:
        return tuple(c for c in self.configs if c.reach_km >= length_km)

    def best_config(self, rate: int, max_len: float) -> TransmissionConfig | None:
        return best_config(self, rate, max_len)

    def round_up_rate(self, x) -> int | None:
        return round_up_rate(self, x)


def best_config(table: ReachTable, rate: int, max_len: float) -> TransmissionConfig | None:
    """Fewest-slice config of ``rate`` reaching ``max_len``; ties go to longer reach, then file order."""
    best = None
    for cfg in table.configs_for_rate(rate):
        if cfg.reach_km < max_len:
            continue
        if best is None or (cfg.slice_count, -cfg.reach_km) < (best.slice_count, -best.reach_km):
            best = cfg
    return best


def round_up_rate(table: ReachTable, x) -> int | None:
    """Smallest table rate >= x, or None when x exceeds the largest rate."""
    x = Fraction(x)
    if x <= 0:
        raise ValidationError("rate to round must be positive")
    i = bisect.bisect_left(table.rates, x)
    return table.rates[i] if i < len(table.rates) else None


def _configs_from_document(doc: Mapping) -> tuple[list[TransmissionConfig], float]:
    try:
        width = float(doc["slice_width_ghz"])
        rows = [
            TransmissionConfig(
                rate=int(r["rate_gbps"]),
                baud=float(r["baud_gbaud"]),
                modulation=str(r["modulation"]),
                fec_overhead=float(r["fec_pct"]),
                reach_km=float(r["reach_km"]),
                slice_count=int(r["n_slices"]),
                row_id=i,
            )
            for i, r in enumerate(doc["rows"])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed reach-table document: {exc}") from exc
    return rows, width


def filter_variant(configs: Sequence[TransmissionConfig], table_width: float, variant: VariantSpec) -> list[TransmissionConfig]:
    kept: list[TransmissionConfig] = []
    seen_rates: set[int] = set()
    for cfg in configs:
        if cfg.rate not in variant.rates:
            continue
        width = cfg.slice_count * table_width
        ratio = width / variant.slice_width_ghz
        if abs(ratio - round(ratio)) > 1e-9:
            continue
        if variant.single_config:
            if cfg.rate in seen_rates:
                continue
            seen_rates.add(cfg.rate)
        kept.append(cfg)
    return kept


def load_reach_table(source: str | Path | Mapping | None = None, variant: str | VariantSpec = "Flex-AT") -> ReachTable:
    """Load a reach-table document and restrict it to ``variant``.

    ``source=None`` loads the bundled synthetic table.
    """
    spec = get_variant(variant)
    if source is None:
        doc = json.loads(resources.files("eonvne.data").joinpath("reach_table.json").read_text())
    elif isinstance(source, Mapping):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"reach-table document is not valid JSON: {exc}") from exc
    rows, width = _configs_from_document(doc)
    keys = [c.tuple_key for c in rows]
    if len(set(keys)) != len(keys):
        raise ValidationError("duplicate config rows in reach-table document")
    kept = filter_variant(rows, width, spec)
    if not kept:
        raise ValidationError(f"reach table is empty after filtering for {spec.name}")
    return ReachTable(kept, width, spec.name)


@lru_cache(maxsize=None)
def shipped_table(variant: str = "Flex-AT") -> ReachTable:
    return load_reach_table(None, variant)
