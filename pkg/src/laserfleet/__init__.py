"""Design toolkit for asteroid deflection by formations of solar-pumped lasers."""

__version__ = "0.1.0"

from .orbits import (  # noqa: F401
    BodyEphemeris,
    FrameBasis,
    OrbitalElements,
    StateVector,
    elements_to_state,
    find_moid,
    gauss_rates,
    impact_parameter,
    integrate_gauss,
    kepler_propagate,
    linear_proximal_position,
    state_to_elements,
)
from .sublimation import (  # noqa: F401
    AsteroidModel,
    PowerBalance,
    ThrustState,
    apophis_model,
    exhaust_velocity,
    mass_flow_rate,
    spot_power_balance,
    thrust_state,
)
from .plume import PlumeState, SpotGeometry, degradation_factor, plume_density  # noqa: F401
from .sizing import MassBudget, SpacecraftDesign, design_from_option, mass_budget  # noqa: F401
from .formation import NaturalOrbit, ShapedOrbit  # noqa: F401
from .deflection import DeflectionOutcome, DeflectionScenario, simulate_deflection  # noqa: F401
from .moo import ParetoArchive, ProblemSpec, dominates, optimize  # noqa: F401
from .scenario import Scenario, ScenarioError, load_scenario  # noqa: F401
