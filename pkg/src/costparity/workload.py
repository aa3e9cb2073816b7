"""Task profiles, their dollar cost, and whether they are worth moving.

A task is described by its four demands: network traffic, computation,
database accesses and storage (plus disk bandwidth and energy, which the
larger worked examples need). ``evaluate`` prices a profile against a
schedule, ``classify`` compares its instructions-per-byte against the
break-even threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from costparity.cost_model import (
    ATTRACTIVE_RATIO,
    CostSchedule,
    breakeven_intensity,
)
from costparity.quantities import HOURS_PER_YEAR, Kind, QuantityError, check_quantity, coerce_quantity

CATEGORIES = ("network", "compute", "db_access", "storage", "disk_bw", "energy")

DEFAULT_REVENUE_PER_IMPRESSION = 1e-3  # $1 CPM


class TaskError(ValueError):
    pass


class IntensityUndefined(TaskError):
    """The task moves no network bytes; callers treat it as infinitely mobile."""


@dataclass(frozen=True)
class Instructions:
    count: float

    def __post_init__(self) -> None:
        check_quantity(self.count, Kind.INSTRUCTIONS)


@dataclass(frozen=True)
class CpuHours:
    hours: float

    def __post_init__(self) -> None:
        check_quantity(self.hours, Kind.CPU_TIME)


ComputeDemand = Union[Instructions, CpuHours]


class NetworkClass(str, enum.Enum):
    WAN = "WAN"
    LAN = "LAN"


@dataclass(frozen=True)
class TaskProfile:
    name: str
    bytes_in: float = 0.0
    bytes_out: float = 0.0
    compute: ComputeDemand = field(default_factory=lambda: Instructions(0.0))
    db_accesses: float = 0.0
    storage_bytes: float = 0.0
    disk_bw_bytes: float = 0.0
    energy_wh: float = 0.0
    multiplicity: float = 1
    network_class: NetworkClass = NetworkClass.WAN
    cluster_bound: bool = False

    def __post_init__(self) -> None:
        try:
            for name in ("bytes_in", "bytes_out", "storage_bytes", "disk_bw_bytes"):
                check_quantity(getattr(self, name), Kind.BYTES)
            check_quantity(self.db_accesses, Kind.INSTRUCTIONS)
            check_quantity(self.energy_wh, Kind.INSTRUCTIONS)
        except QuantityError as exc:
            raise TaskError(f"{self.name}: {exc}") from None
        if not isinstance(self.compute, (Instructions, CpuHours)):
            raise TaskError(f"{self.name}: compute must be Instructions or CpuHours")
        if not (math.isfinite(self.multiplicity) and self.multiplicity >= 1):
            raise TaskError(f"{self.name}: multiplicity must be >= 1")
        object.__setattr__(self, "network_class", NetworkClass(self.network_class))

    @property
    def network_bytes(self) -> float:
        return self.bytes_in + self.bytes_out

    def instructions(self, s: CostSchedule) -> float:
        """Per-job instruction count, converting cpu-hours at the schedule's rate."""
        if isinstance(self.compute, Instructions):
            return self.compute.count
        return self.compute.hours * s.effective_instructions_per_cpu_hour

    def cpu_hours(self, s: CostSchedule) -> float:
        if isinstance(self.compute, CpuHours):
            return self.compute.hours
        return self.compute.count / s.effective_instructions_per_cpu_hour


@dataclass(frozen=True)
class CostBreakdown:
    network: float
    compute: float
    db_access: float
    storage: float
    disk_bw: float
    energy: float
    total: float
    fractions: dict[str, float]

    def category(self, name: str) -> float:
        return getattr(self, name)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {c: self.category(c) for c in CATEGORIES}
        out["total"] = self.total
        out["fractions"] = dict(self.fractions)
        return out


def evaluate(task: TaskProfile, s: CostSchedule) -> CostBreakdown:
    """Dollar cost of running ``task`` (all copies) under schedule ``s``."""
    per_byte = s.usd_per_wan_byte if task.network_class is NetworkClass.WAN else s.usd_per_lan_byte
    if isinstance(task.compute, Instructions):
        compute = task.compute.count * s.usd_per_instruction
    else:
        compute = task.compute.hours * s.usd_per_cpu_hour
    k = task.multiplicity
    costs = {
        "network": task.network_bytes * per_byte * k,
        "compute": compute * k,
        "db_access": task.db_accesses * s.usd_per_db_access * k,
        "storage": task.storage_bytes * s.usd_per_disk_byte * k,
        "disk_bw": task.disk_bw_bytes * s.usd_per_disk_bw_byte * k,
        "energy": task.energy_wh * s.usd_per_watt_hour * k,
    }
    total = math.fsum(costs.values())
    if total > 0:
        fractions = {c: v / total for c, v in costs.items()}
    else:
        fractions = {c: 0.0 for c in costs}
    return CostBreakdown(total=total, fractions=fractions, **costs)


def intensity(task: TaskProfile, s: CostSchedule) -> float:
    """Instructions per network byte for a single job."""
    if task.network_bytes <= 0:
        raise IntensityUndefined(f"{task.name}: intensity undefined (no network bytes)")
    return task.instructions(s) / task.network_bytes


class Mobility(str, enum.Enum):
    STAY_HOME = "StayHome"
    BREAK_EVEN = "BreakEven"
    MOBILE = "Mobile"


@dataclass(frozen=True)
class MobilityReport:
    intensity: float
    breakeven_threshold: float
    attractive_threshold: float
    mobility: Mobility
    cluster_advisory: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "intensity": self.intensity,
            "breakeven_threshold": self.breakeven_threshold,
            "attractive_threshold": self.attractive_threshold,
            "class": self.mobility.value,
            "cluster_advisory": self.cluster_advisory,
        }


def classify(task: TaskProfile, s: CostSchedule) -> MobilityReport:
    """Place the task in the StayHome / BreakEven / Mobile bands.

    BreakEven is the half-open band [threshold, 3 * threshold).
    """
    value = intensity(task, s)
    threshold = breakeven_intensity(s)
    attractive = ATTRACTIVE_RATIO * threshold
    if value < threshold:
        mobility = Mobility.STAY_HOME
    elif value < attractive:
        mobility = Mobility.BREAK_EVEN
    else:
        mobility = Mobility.MOBILE
    return MobilityReport(
        intensity=value,
        breakeven_threshold=threshold,
        attractive_threshold=attractive,
        mobility=mobility,
        cluster_advisory=task.cluster_bound,
    )


def ad_fundable(cost_per_interaction: float, revenue_per_impression: float = DEFAULT_REVENUE_PER_IMPRESSION) -> bool:
    """Can one ad impression pay for one interaction?"""
    if cost_per_interaction < 0 or revenue_per_impression < 0:
        raise ValueError("costs and revenues must be non-negative")
    return cost_per_interaction <= revenue_per_impression


class StaffingVariant(str, enum.Enum):
    TRADITIONAL = "Traditional"
    MEGASERVICE = "Megaservice"


@dataclass(frozen=True)
class StaffingModel:
    variant: StaffingVariant = StaffingVariant.TRADITIONAL
    admins_per_tb: float = 1.0
    admins_per_100_servers: float = 1.0
    admins_per_gbps: float = 1.0
    # 10,000 servers run by a staff of 25
    servers_per_admin: float = 400.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", StaffingVariant(self.variant))
        for name in ("admins_per_tb", "admins_per_100_servers", "admins_per_gbps", "servers_per_admin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


def staffing_estimate(storage_tb: float, servers: float, network_gbps: float, model: StaffingModel) -> float:
    """Operations headcount; the three traditional ratios add up."""
    if min(storage_tb, servers, network_gbps) < 0:
        raise ValueError("staffing inputs must be non-negative")
    if model.variant is StaffingVariant.MEGASERVICE:
        return servers / model.servers_per_admin
    return (
        storage_tb * model.admins_per_tb
        + servers / 100 * model.admins_per_100_servers
        + network_gbps * model.admins_per_gbps
    )


def cpu_years(task: TaskProfile, s: CostSchedule) -> float:
    """Total cpu-years across every copy of the task."""
    return task.cpu_hours(s) * task.multiplicity / HOURS_PER_YEAR


_TASK_BYTE_FIELDS = ("bytes_in", "bytes_out", "storage_bytes", "disk_bw_bytes")


def task_from_dict(doc: Mapping[str, Any]) -> TaskProfile:
    """Build a profile from a task document.

    Quantity fields take raw numbers or suffixed strings. Compute is at most
    one of ``instructions`` / ``cpu_hours``; neither means no computation.
    """
    if not isinstance(doc, Mapping):
        raise TaskError("task document must be a JSON object")
    allowed = {
        "name", "instructions", "cpu_hours", "db_accesses", "energy_wh",
        "multiplicity", "network_class", "cluster_bound", *_TASK_BYTE_FIELDS,
    }
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise TaskError(f"unknown task fields: {', '.join(unknown)}")
    if "instructions" in doc and "cpu_hours" in doc:
        raise TaskError("give exactly one of 'instructions' or 'cpu_hours', not both")
    name = doc.get("name", "task")
    if not isinstance(name, str):
        raise TaskError("name must be a string")

    kwargs: dict[str, Any] = {"name": name}
    try:
        for key in _TASK_BYTE_FIELDS:
            if key in doc:
                kwargs[key] = coerce_quantity(doc[key], Kind.BYTES)
        if "cpu_hours" in doc:
            kwargs["compute"] = CpuHours(coerce_quantity(doc["cpu_hours"], Kind.CPU_TIME))
        elif "instructions" in doc:
            kwargs["compute"] = Instructions(coerce_quantity(doc["instructions"], Kind.INSTRUCTIONS))
        for key in ("db_accesses", "energy_wh", "multiplicity"):
            if key in doc:
                kwargs[key] = coerce_quantity(doc[key], Kind.INSTRUCTIONS)
    except QuantityError as exc:
        raise TaskError(str(exc)) from None
    if "network_class" in doc:
        try:
            kwargs["network_class"] = NetworkClass(doc["network_class"])
        except ValueError:
            raise TaskError(f"network_class must be WAN or LAN, got {doc['network_class']!r}") from None
    if "cluster_bound" in doc:
        if not isinstance(doc["cluster_bound"], bool):
            raise TaskError("cluster_bound must be true or false")
        kwargs["cluster_bound"] = doc["cluster_bound"]
    return TaskProfile(**kwargs)


def task_to_dict(task: TaskProfile) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": task.name}
    for key in _TASK_BYTE_FIELDS:
        doc[key] = getattr(task, key)
    if isinstance(task.compute, CpuHours):
        doc["cpu_hours"] = task.compute.hours
    else:
        doc["instructions"] = task.compute.count
    doc.update(
        db_accesses=task.db_accesses,
        energy_wh=task.energy_wh,
        multiplicity=task.multiplicity,
        network_class=task.network_class.value,
        cluster_bound=task.cluster_bound,
    )
    return doc
