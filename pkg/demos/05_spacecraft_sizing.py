"""
Sizing the spacecraft: radiators, laser power and the mass budget
=================================================================

Each spacecraft concentrates sunlight onto cells that pump a fibre laser;
whatever the chain does not convert must be radiated. Radiator areas come
from steady-state thermal balance, and the wet mass stacks specific masses
and margins on every subsystem. The fixed bus cost means one big
spacecraft always undercuts two half-area ones in this model; the case for
a formation is redundancy and scalability, not raw mass.
"""

import numpy as np

from laserfleet.constants import AU
from laserfleet.sizing import design_from_option, laser_power, mass_budget, radiator_areas

print("efficiency chains: 66/45 ->",
      f"{design_from_option(20.0, 2500.0, option='66/45').eta_sys:.4f}",
      " 60/40 ->",
      f"{design_from_option(20.0, 2500.0, option='60/40').eta_sys:.4f}")

design = design_from_option(20.0, 2500.0, option="66/45")
print(f"\n20 m collector at 1 AU: {design.collector_area * 1367 / 1e3:.1f} kW collected")
print(f"laser input power: {laser_power(design, AU) / 1e3:.1f} kW")
a_rs, a_rl, a_rm2 = radiator_areas(design, AU)
print(f"radiators: array {a_rs:.0f} m^2, laser {a_rl:.0f} m^2, "
      f"secondary mirror {a_rm2:.0f} m^2")

print("\n d_M [m]   m_dry [kg]   m_wet [kg]   laser [kg]   radiators [kg]")
for d in (2.0, 5.0, 10.0, 15.0, 20.0):
    mb = mass_budget(design_from_option(d, 2500.0, option="66/45"), AU)
    print(f" {d:6.1f}   {mb.m_dry:9.0f}   {mb.m_total:9.0f}   "
          f"{mb.m_laser:9.0f}   {mb.m_radiators:11.0f}")

# the affine structure: doubling collecting area via two spacecraft costs
# exactly one extra bus allowance
m10 = mass_budget(design_from_option(10.0, 2500.0), AU).m_total
m14 = mass_budget(design_from_option(10.0 * np.sqrt(2.0), 2500.0), AU).m_total
m_bus = mass_budget(design_from_option(1e-4, 2500.0), AU).m_total
print(f"\n2 x 10 m = {2 * m10:.0f} kg vs 1 x 14.1 m = {m14:.0f} kg "
      f"(difference = one bus allowance, {2 * m10 - m14:.0f} ~ {m_bus:.0f} kg)")
