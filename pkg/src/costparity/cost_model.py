"""Cost schedules: unit prices for every resource a task consumes.

The canonical schedule is the "what one dollar buys" table; the other
schedules are derived from it (Beowulf networking, time projection) or
from a hardware price list.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

from costparity.quantities import HOURS_PER_YEAR, Kind, QuantityError, coerce_quantity

SECONDS_PER_HOUR = 3600.0
SECONDS_PER_MONTH = 30 * 24 * SECONDS_PER_HOUR
HOURS_PER_MONTH = SECONDS_PER_MONTH / SECONDS_PER_HOUR

# LAN bytes cost this much less than WAN bytes.
LAN_DISCOUNT = 10_000.0

# Premium over break-even before outsourcing is worth the trouble.
ATTRACTIVE_RATIO = 3.0


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class CostSchedule:
    """Dollar price per unit of each resource category."""

    usd_per_wan_byte: float
    usd_per_lan_byte: float
    usd_per_instruction: float
    usd_per_cpu_hour: float
    usd_per_disk_byte: float
    usd_per_db_access: float
    usd_per_disk_bw_byte: float
    usd_per_watt_hour: float
    effective_instructions_per_cpu_hour: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScheduleError(f"{f.name} must be a number, got {value!r}")
            if not math.isfinite(value) or value < 0:
                raise ScheduleError(f"{f.name} must be finite and >= 0, got {value!r}")
        if self.usd_per_lan_byte > self.usd_per_wan_byte:
            raise ScheduleError("usd_per_lan_byte must not exceed usd_per_wan_byte")

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def scaled(self, factor: float) -> CostSchedule:
        """Multiply every price (not the effective rate) by ``factor``."""
        return replace(
            self,
            **{name: getattr(self, name) * factor for name in PRICE_FIELDS.values()},
        )


# trend category -> schedule field
PRICE_FIELDS: dict[str, str] = {
    "wan": "usd_per_wan_byte",
    "lan": "usd_per_lan_byte",
    "instruction": "usd_per_instruction",
    "cpu_hour": "usd_per_cpu_hour",
    "disk": "usd_per_disk_byte",
    "db_access": "usd_per_db_access",
    "disk_bw": "usd_per_disk_bw_byte",
    "energy": "usd_per_watt_hour",
}

# Units the schedule document accepts for suffixed strings (price per unit is money).
_FIELD_KINDS: dict[str, Kind] = {name: Kind.MONEY for name in PRICE_FIELDS.values()}
_FIELD_KINDS["effective_instructions_per_cpu_hour"] = Kind.INSTRUCTIONS


def canonical_schedule() -> CostSchedule:
    """One dollar buys 1 GB of WAN traffic, 10 T instructions, 8 cpu-hours,
    1 GB of disk, 10 M database accesses and 10 TB of disk bandwidth."""
    return CostSchedule(
        usd_per_wan_byte=1e-9,
        usd_per_lan_byte=1e-9 / LAN_DISCOUNT,
        usd_per_instruction=1e-13,
        usd_per_cpu_hour=0.125,
        usd_per_disk_byte=1e-9,
        usd_per_db_access=1e-7,
        usd_per_disk_bw_byte=1e-13,
        # 1e12 Wh for about $100M
        usd_per_watt_hour=1e-4,
        effective_instructions_per_cpu_hour=1.25e12,
    )


@dataclass(frozen=True)
class HardwareBaseline:
    cpu_price: float
    cpu_clock_hz: float
    disk_price: float
    disk_capacity: float
    disk_accesses_per_sec: float
    disk_transfer_bytes_per_sec: float
    wan_price_per_month: float
    wan_bits_per_sec: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ScheduleError(f"{f.name} must be a positive number, got {value!r}")


def paper_baseline() -> HardwareBaseline:
    """$2,000 2 GHz server, $200 200 GB disk (100 IO/s, 50 MB/s), $100/month 1 Mbps link."""
    return HardwareBaseline(
        cpu_price=2000.0,
        cpu_clock_hz=2e9,
        disk_price=200.0,
        disk_capacity=200e9,
        disk_accesses_per_sec=100.0,
        disk_transfer_bytes_per_sec=50e6,
        wan_price_per_month=100.0,
        wan_bits_per_sec=1e6,
    )


@dataclass(frozen=True)
class DerivationParams:
    amortization_months: float = 36.0
    link_utilization: float = 1 / 3
    disk_duty_cycle: float = 0.2
    # 10 T instr/$ / 8 cpu-h/$ = 1.25e12 instr/h; the clock rate is not used
    effective_instructions_per_second: float = 3.47e8

    def __post_init__(self) -> None:
        if not self.amortization_months > 0:
            raise ScheduleError("amortization_months must be > 0")
        for name in ("link_utilization", "disk_duty_cycle"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ScheduleError(f"{name} must be in (0, 1], got {value!r}")
        if not self.effective_instructions_per_second > 0:
            raise ScheduleError("effective_instructions_per_second must be > 0")


def derive_schedule(hw: HardwareBaseline, params: DerivationParams | None = None) -> CostSchedule:
    """Price each resource from a hardware price list.

    Capital is amortized over ``params.amortization_months``; the link and
    the disk arm are only billed for the fraction of time they are busy.
    Disk capacity is a one-time capital price. Energy is not derivable from
    the hardware list and is taken from the canonical schedule.
    """
    p = params or DerivationParams()
    amortized_seconds = p.amortization_months * SECONDS_PER_MONTH
    amortized_hours = p.amortization_months * HOURS_PER_MONTH

    wan_bytes_per_month = hw.wan_bits_per_sec / 8 * SECONDS_PER_MONTH * p.link_utilization
    wan = hw.wan_price_per_month / wan_bytes_per_month
    cpu_hour = hw.cpu_price / amortized_hours
    instructions_per_hour = p.effective_instructions_per_second * SECONDS_PER_HOUR
    busy_disk_seconds = amortized_seconds * p.disk_duty_cycle

    return CostSchedule(
        usd_per_wan_byte=wan,
        usd_per_lan_byte=wan / LAN_DISCOUNT,
        usd_per_instruction=cpu_hour / instructions_per_hour,
        usd_per_cpu_hour=cpu_hour,
        usd_per_disk_byte=hw.disk_price / hw.disk_capacity,
        usd_per_db_access=hw.disk_price / (hw.disk_accesses_per_sec * busy_disk_seconds),
        usd_per_disk_bw_byte=hw.disk_price / (hw.disk_transfer_bytes_per_sec * busy_disk_seconds),
        usd_per_watt_hour=canonical_schedule().usd_per_watt_hour,
        effective_instructions_per_cpu_hour=instructions_per_hour,
    )


def beowulf_schedule(base: CostSchedule) -> CostSchedule:
    """Price all networking at cluster (LAN) rates."""
    return replace(base, usd_per_wan_byte=base.usd_per_lan_byte)


def port_price_per_byte(port_price: float = 200.0, bytes_per_sec: float = 50e6, years: float = 3.0) -> float:
    """Per-byte price of a cluster switch port kept busy for ``years``.

    The defaults are a $200 gigabit Ethernet port delivering 50 MB/s.
    """
    seconds = years * HOURS_PER_YEAR * SECONDS_PER_HOUR
    return port_price / (bytes_per_sec * seconds)


@dataclass(frozen=True)
class TrendParams:
    """Price halving time in months per category; ``None`` means constant."""

    halving_months: Mapping[str, float | None] = field(
        default_factory=lambda: {"instruction": 18.0, "cpu_hour": 18.0}
    )

    def __post_init__(self) -> None:
        for category, months in self.halving_months.items():
            if category not in PRICE_FIELDS:
                raise ScheduleError(f"unknown trend category {category!r}")
            if months is not None and not (
                isinstance(months, (int, float)) and not isinstance(months, bool) and months > 0
            ):
                raise ScheduleError(f"halving time for {category} must be > 0 or 'constant', got {months!r}")
        object.__setattr__(
            self, "halving_months", {c: self.halving_months.get(c) for c in PRICE_FIELDS}
        )

    def rate(self, category: str) -> float:
        """Halvings per month (0 for a constant price)."""
        months = self.halving_months[category]
        return 0.0 if months is None else 1.0 / months


def project_schedule(s: CostSchedule, t_months: float, trends: TrendParams) -> CostSchedule:
    """Prices after ``t_months`` of exponential decline.

    The LAN price is capped at the WAN price.
    """
    if t_months < 0:
        raise ScheduleError("t_months must be >= 0")
    prices = {
        name: getattr(s, name) * 2.0 ** (-t_months * trends.rate(category))
        for category, name in PRICE_FIELDS.items()
    }
    # LAN traffic could always be routed over the WAN instead
    prices["usd_per_lan_byte"] = min(prices["usd_per_lan_byte"], prices["usd_per_wan_byte"])
    return replace(s, **prices)


def breakeven_intensity(s: CostSchedule) -> float:
    """Instructions per WAN byte at which compute and network cost the same."""
    if s.usd_per_instruction <= 0:
        raise ScheduleError("break-even intensity undefined for free instructions")
    return s.usd_per_wan_byte / s.usd_per_instruction


def attractive_intensity(s: CostSchedule) -> float:
    return ATTRACTIVE_RATIO * breakeven_intensity(s)


def breakeven_crossover(s: CostSchedule, trends: TrendParams, intensity: float) -> float:
    """Months until a task of ``intensity`` instr/byte reaches break-even.

    The threshold evolves as ``T0 * 2**(t * (r_instr - r_wan))`` so the
    answer is closed-form. Returns ``math.inf`` when it is never reached.
    """
    if not intensity > 0:
        raise ScheduleError("intensity must be > 0")
    threshold = breakeven_intensity(s)
    if threshold <= intensity:
        return 0.0
    drift = trends.rate("instruction") - trends.rate("wan")
    if drift >= 0:
        return math.inf
    return math.log2(intensity / threshold) / drift


def schedule_from_dict(doc: Mapping[str, Any]) -> CostSchedule:
    """Build a schedule from a JSON document; missing keys take canonical values."""
    if not isinstance(doc, Mapping):
        raise ScheduleError("schedule document must be a JSON object")
    known = {f.name for f in fields(CostSchedule)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ScheduleError(f"unknown schedule keys: {', '.join(unknown)}")
    values = canonical_schedule().to_dict()
    for key, raw in doc.items():
        try:
            values[key] = coerce_quantity(raw, _FIELD_KINDS[key])
        except QuantityError as exc:
            raise ScheduleError(f"{key}: {exc}") from None
    return CostSchedule(**values)


def baseline_from_dict(doc: Mapping[str, Any]) -> HardwareBaseline:
    if not isinstance(doc, Mapping):
        raise ScheduleError("baseline document must be a JSON object")
    kinds = {
        "cpu_price": Kind.MONEY,
        "disk_price": Kind.MONEY,
        "wan_price_per_month": Kind.MONEY,
        "disk_capacity": Kind.BYTES,
        "disk_transfer_bytes_per_sec": Kind.BYTES,
    }
    names = [f.name for f in fields(HardwareBaseline)]
    unknown = sorted(set(doc) - set(names))
    missing = [n for n in names if n not in doc]
    if unknown or missing:
        raise ScheduleError(f"baseline keys: unknown {unknown}, missing {missing}")
    try:
        values = {
            n: coerce_quantity(doc[n], kinds.get(n, Kind.INSTRUCTIONS)) for n in names
        }
    except QuantityError as exc:
        raise ScheduleError(str(exc)) from None
    return HardwareBaseline(**values)


def trends_from_dict(doc: Mapping[str, Any]) -> TrendParams:
    """``{"wan": 12, "instruction": 18, "lan": "constant"}``; absent categories
    keep the defaults (18 months for compute, constant otherwise)."""
    if not isinstance(doc, Mapping):
        raise ScheduleError("trends document must be a JSON object")
    halving = dict(TrendParams().halving_months)
    for category, months in doc.items():
        if category not in PRICE_FIELDS:
            raise ScheduleError(f"unknown trend category {category!r}")
        halving[category] = None if months == "constant" else months
    return TrendParams(halving)
