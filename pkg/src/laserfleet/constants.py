"""Physical constants and fixed model parameters.

SI units throughout: meters, seconds, kilograms, radians, Watts, Kelvin.
"""

import math

# Universal constants
GRAVITATIONAL_CONSTANT = 6.674e-11      # m^3/(kg s^2)
BOLTZMANN = 1.380649e-23                # J/K
STEFAN_BOLTZMANN = 5.670374419e-8       # W/(m^2 K^4)
SPEED_OF_LIGHT = 2.99792458e8           # m/s
G0 = 9.80665                            # m/s^2, standard gravity (propellant accounting)

# Heliocentric environment
AU = 1.495978707e11                     # m
MU_SUN = 1.32712440018e20               # m^3/s^2
SOLAR_FLUX_1AU = 1367.0                 # W/m^2, solar constant S0

# Time
DAY = 86400.0                           # s
YEAR = 365.25 * DAY                     # s (Julian year)

# Debris-plume expansion model (cometary-jet analogy, diatomic gas)
JET_CONSTANT = 0.345                    # dimensionless
MAX_EXPANSION_ANGLE = math.radians(130.45)  # rad
ADIABATIC_INDEX = 1.4                   # dimensionless

# Optics contamination (dense forsterite deposit, opaque over the full spectrum)
LAYER_DENSITY = 1000.0                  # kg/m^3, condensed-layer density (1 g/cm^3)
ABSORPTION_COEFFICIENT = 1.0e6          # 1/m   (1e4 per cm)

# Ejecta scattering: thrust direction spread uniformly over a half circle.
# The effective fraction of exhaust momentum along the mean direction.
SCATTERING_FACTOR = 2.0 / math.pi

TWO_PI = 2.0 * math.pi
