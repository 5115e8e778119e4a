"""Coverage and rate analysis of inclined LEO mega-constellations.

Analytic results come from the uniform-shell model with a (possibly
effective, non-integer) satellite count; the Monte Carlo simulator checks
them against explicitly generated constellations.
"""

from .analytic import (
    MetricResult,
    QuadratureSpec,
    Scenario,
    SweepSpec,
    average_rate,
    coverage_probability,
    coverage_upper_bound,
    sweep,
)
from .channel import LinkBudget
from .distributions import (
    DistanceDistribution,
    EffectiveCount,
    InclinationLimitError,
    effective_satellite_count,
    matching_latitudes,
)
from .geometry import (
    ConstellationConfig,
    DomainError,
    EarthModel,
    SatelliteState,
    UserLocation,
    max_slant_range,
    visibility_probability,
)
from .simulator import MonteCarloSpec, RandomInclined, UniformShell, WalkerDelta, estimate, simulate

__version__ = "0.1.0"
