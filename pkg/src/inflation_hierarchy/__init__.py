"""Causal compatibility testing and causal optimization via the inflation hierarchy."""

from .errors import BudgetExceeded, InputError
from .model import (CausalStructure, CorrelationScenario, Distribution, Event, EventTable,
                    LatentModel, Node, Polynomial, ghz_noisy, lift, point_mass, uniform,
                    validate)
from .preprocess import districts, exogenize, map_distribution, unpack
from .inflate import build_inflation, diagonal_constraints, event_constraints, orbits
from .lpcore import Witness, export_lp, parse_lp, solve
from .engine import (CompatibilityVerdict, OptimizationResult, check_compatibility,
                     check_structure, distance_lower_bound, optimize, verify_witness)

__version__ = "0.1.0"
