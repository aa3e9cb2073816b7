"""Cost-parity economics for distributed computing: resource prices, task
cost breakdowns, break-even mobility analysis and cost-based placement."""

from costparity.cost_model import (
    CostSchedule,
    DerivationParams,
    HardwareBaseline,
    TrendParams,
    beowulf_schedule,
    breakeven_crossover,
    breakeven_intensity,
    canonical_schedule,
    derive_schedule,
    paper_baseline,
    project_schedule,
)
from costparity.placement import LinkPrices, Operator, Plan, Site, Source, optimize
from costparity.quantities import Kind, format_quantity, parse_quantity
from costparity.workload import (
    CpuHours,
    Instructions,
    Mobility,
    TaskProfile,
    ad_fundable,
    classify,
    evaluate,
    intensity,
    staffing_estimate,
)

__all__ = [
    "CostSchedule",
    "CpuHours",
    "DerivationParams",
    "HardwareBaseline",
    "Instructions",
    "Kind",
    "LinkPrices",
    "Mobility",
    "Operator",
    "Plan",
    "Site",
    "Source",
    "TaskProfile",
    "TrendParams",
    "ad_fundable",
    "beowulf_schedule",
    "breakeven_crossover",
    "breakeven_intensity",
    "canonical_schedule",
    "classify",
    "derive_schedule",
    "evaluate",
    "format_quantity",
    "intensity",
    "optimize",
    "paper_baseline",
    "parse_quantity",
    "project_schedule",
    "staffing_estimate",
]
