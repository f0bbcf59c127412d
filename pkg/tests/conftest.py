import math
from pathlib import Path

import numpy as np
import pytest

from laserfleet.constants import AU, MU_SUN
from laserfleet.orbits import BodyEphemeris, OrbitalElements
from laserfleet.sizing import design_from_option
from laserfleet.sublimation import apophis_model

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"

# Shipped-scenario value: enthalpy of complete sublimation of a
# forsterite-like silicate.
SUBLIMATION_ENTHALPY = 1.97e6


@pytest.fixture(scope="session")
def ast():
    return apophis_model(sublimation_enthalpy=SUBLIMATION_ENTHALPY)


@pytest.fixture(scope="session")
def earth():
    # Virtual impactor: Earth phased to sit at the orbit intersection when
    # the asteroid crosses the MOID near t = 13.02 yr.
    return BodyEphemeris(
        elements=OrbitalElements(
            a=1.00000011 * AU, e=0.01671022, i=math.radians(5e-5),
            raan=math.radians(348.73936), argp=math.radians(114.20783),
            anomaly=math.radians(90.813551)),
        mu_central=MU_SUN)


@pytest.fixture(scope="session")
def design_20m():
    return design_from_option(20.0, 2500.0, option="66/45")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
