"""The five design studies, each producing a plot-ready result table.

    * formation-design: bi-objective natural-orbit fronts per stand-off.
    * shaped-design: tri-objective shaped-orbit front with control budget.
    * fleet-design: miss distance vs. launched mass over aperture, count
      and concentration, per formation mode and efficiency option.
    * deflection-map: miss distance over spacecraft count and warning time.
    * eccentricity-sweep: miss distance over perihelion/aphelion radius for
      a virtual planar deep-crosser family.

All runners are deterministic functions of (scenario, seed); grid studies
can fan out over processes with assembly ordered by cell index.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import AU, MU_SUN, YEAR
from .deflection import DeflectionScenario, MdotTable, bplane_miss, simulate_deflection
from .formation import (
    NATURAL_BOUNDS_LOWER,
    NATURAL_BOUNDS_UPPER,
    SHAPED_BOUNDS_LOWER,
    SHAPED_BOUNDS_UPPER,
    ShapedControlContext,
    ShapedOrbit,
    natural_family_label,
    natural_orbit_objectives,
    shaped_objectives,
)
from .moo import ProblemSpec, optimize
from .orbits import (
    OrbitalElements,
    StateVector,
    elements_to_state,
    kepler_propagate,
    true_to_mean,
)
from .results import ResultTable
from .scenario import Scenario
from .sizing import design_from_option, mass_budget
from .sublimation import mass_flow_rate


def _optimizer_settings(scenario: Scenario, defaults: dict) -> dict:
    cfg = dict(defaults)
    cfg.update(scenario.optimizer)
    return cfg


def resolve_encounter_epoch(scenario: Scenario) -> float:
    """Virtual impact epoch: configured, optionally refined to the nearest
    asteroid-Earth close approach (well-conditioned b-plane geometry)."""
    t_guess = scenario.moid_epoch
    if not scenario.refine_encounter:
        return t_guess
    ast_el = scenario.asteroid.elements0
    period = ast_el.period(MU_SUN)

    def separation(t: float) -> float:
        s_a = elements_to_state(kepler_propagate(ast_el, t - ast_el.epoch, MU_SUN), MU_SUN)
        s_e = scenario.earth.state_at(t)
        return float(np.linalg.norm(s_a.position - s_e.position))

    times = np.linspace(t_guess - period / 2.0, t_guess + period / 2.0, 600)
    seps = np.array([separation(float(t)) for t in times])
    idx = int(np.argmin(seps))
    lo = times[max(idx - 1, 0)]
    hi = times[min(idx + 1, len(times) - 1)]
    res = minimize_scalar(separation, bounds=(float(lo), float(hi)),
                          method="bounded", options={"xatol": 1.0})
    return float(res.x)


# ---------------------------------------------------------------------------
# Formation design (natural orbits)
# ---------------------------------------------------------------------------

def run_formation_design(scenario: Scenario, seed: int | None = None) -> ResultTable:
    seed = scenario.seed if seed is None else seed
    k_a = scenario.asteroid.elements0
    cfg = _optimizer_settings(scenario, {"population": 48, "budget": 4000,
                                         "archive": 96})

    table = ResultTable(
        name="formation_design",
        columns=[("y_lim", "m"), ("family", ""), ("de", ""), ("di", "rad"),
                 ("draan", "rad"), ("dargp", "rad"), ("dm", "rad"),
                 ("J1_max_distance", "m"), ("J2_neg_min_plume_angle", "rad"),
                 ("C_clearance", "m")],
        metadata=scenario.metadata() | {"bounds_lower": list(NATURAL_BOUNDS_LOWER),
                                        "bounds_upper": list(NATURAL_BOUNDS_UPPER)})

    for j, y_lim in enumerate(scenario.y_limits):
        def evaluate(x, y_lim=y_lim):
            res = natural_orbit_objectives(x, k_a, y_lim)
            return (np.array([res["J1"], res["J2"]]),
                    np.array([max(0.0, -res["C"])]))

        problem = ProblemSpec(lower=NATURAL_BOUNDS_LOWER, upper=NATURAL_BOUNDS_UPPER,
                              n_objectives=2, n_constraints=1, evaluate=evaluate)
        result = optimize(problem, budget=int(cfg["budget"]), seed=seed + j,
                          population=int(cfg["population"]),
                          archive_size=int(cfg["archive"]))
        if not result.archive.feasible_found:
            table.metadata[f"y_lim_{y_lim:g}_infeasible"] = True
            continue
        for m in result.archive.members:
            res = natural_orbit_objectives(m.x, k_a, y_lim)
            family = natural_family_label(m.x, k_a, y_lim)
            table.add_row(float(y_lim), family, *[float(v) for v in m.x],
                          res["J1"], res["J2"], res["C"])
    return table


# ---------------------------------------------------------------------------
# Shaped-formation design
# ---------------------------------------------------------------------------

def run_shaped_design(scenario: Scenario, seed: int | None = None) -> ResultTable:
    seed = scenario.seed if seed is None else seed
    exp = dict(scenario.experiments.get("shaped_design", {}))
    aperture = float(exp.get("aperture_m", 20.0))
    n_sc = int(exp.get("n_spacecraft", 10))
    duration = float(exp.get("duration_yr", 1.0)) * YEAR
    n_samples = int(exp.get("control_samples", 512))
    option = exp.get("efficiency_option", "66/45")
    cfg = _optimizer_settings(scenario, {"population": 32, "budget": 5000,
                                         "archive": 96})

    ast = scenario.asteroid
    design = design_from_option(aperture, scenario.design.concentration_ratio,
                                n_spacecraft=n_sc, option=option)
    r_peri = ast.elements0.a * (1.0 - ast.elements0.e)
    m_sc = mass_budget(design, r_peri).m_total
    mdot_ref = mass_flow_rate(design, ast, r_peri, 1.0, n_sc)
    ctx = ShapedControlContext(ast=ast, k_a=ast.elements0, design=design,
                               m_sc=m_sc, isp=scenario.isp, mdot=mdot_ref)

    def evaluate(x):
        s = ShapedOrbit(coeffs=x)
        res = shaped_objectives(s, ctx, duration, n_samples)
        return (np.array([res["J1"], res["J2"], res["J3"]]),
                np.array([max(0.0, res["C1"]), max(0.0, res["C2"])]))

    problem = ProblemSpec(lower=SHAPED_BOUNDS_LOWER, upper=SHAPED_BOUNDS_UPPER,
                          n_objectives=3, n_constraints=2, evaluate=evaluate)
    result = optimize(problem, budget=int(cfg["budget"]), seed=seed,
                      population=int(cfg["population"]),
                      archive_size=int(cfg["archive"]))

    table = ResultTable(
        name="shaped_design",
        columns=[("x1", "m"), ("x2", "m"), ("x3", "m"), ("y1", "m"), ("y2", "m"),
                 ("y3", "m"), ("z1", "m"), ("z2", "m"),
                 ("J1_propellant_fraction", ""), ("J2_max_distance", "m"),
                 ("J3_max_accel", "m/s^2"), ("max_thrust", "N"),
                 ("C1_max_x", "m"), ("C2_max_y", "m")],
        metadata=scenario.metadata() | {"aperture_m": aperture, "n_spacecraft": n_sc,
                                        "duration_yr": duration / YEAR,
                                        "spacecraft_mass_kg": m_sc,
                                        "efficiency_option": option,
                                        "feasible_found": result.archive.feasible_found})
    for m in result.archive.members:
        res = shaped_objectives(ShapedOrbit(coeffs=m.x), ctx, duration, n_samples)
        table.add_row(*[float(v) for v in m.x], res["J1"], res["J2"], res["J3"],
                      res["J3"] * m_sc, res["C1"], res["C2"])
    return table


# ---------------------------------------------------------------------------
# Fleet design
# ---------------------------------------------------------------------------

def _fleet_formation(scenario: Scenario, mode: str):
    if mode == "natural":
        if scenario.natural is None:
            raise ValueError("fleet design in natural mode needs a natural block")
        return scenario.natural
    if scenario.shaped is None:
        raise ValueError("fleet design in shaped mode needs a shaped block")
    return scenario.shaped


def run_fleet_design(scenario: Scenario, seed: int | None = None) -> ResultTable:
    seed = scenario.seed if seed is None else seed
    exp = dict(scenario.experiments.get("fleet_design", {}))
    warning = float(exp.get("warning_yr", 8.0)) * YEAR
    modes = list(exp.get("modes", ["natural", "shaped"]))
    options = list(exp.get("efficiency_options", ["60/40", "66/45"]))
    cfg = _optimizer_settings(scenario, {"population": 24, "budget": 240,
                                         "archive": 64})

    ast = scenario.asteroid
    t_moid = resolve_encounter_epoch(scenario)
    t0 = t_moid - warning
    r_peri = ast.elements0.a * (1.0 - ast.elements0.e)
    space = scenario.design_space

    table = ResultTable(
        name="fleet_design",
        columns=[("mode", ""), ("efficiency_option", ""), ("aperture", "m"),
                 ("n_spacecraft", ""), ("concentration_ratio", ""),
                 ("miss_distance", "m"), ("fleet_mass", "kg"),
                 ("spacecraft_mass", "kg")],
        metadata=scenario.metadata() | {"warning_yr": warning / YEAR,
                                        "moid_epoch_s": t_moid})

    for mi, mode in enumerate(modes):
        formation = _fleet_formation(scenario, mode)
        for oi, option in enumerate(options):
            def evaluate(x, option=option, formation=formation):
                d_m, n_sc, c_r = float(x[0]), int(round(x[1])), float(x[2])
                design = design_from_option(d_m, c_r, n_spacecraft=n_sc, option=option)
                m_sc = mass_budget(design, r_peri).m_total
                dscn = DeflectionScenario(ast=ast, design=design, earth=scenario.earth,
                                          m_sc=m_sc, t_start=t0, t_moid=t_moid,
                                          formation=formation,
                                          scattering_factor=scenario.scattering_factor)
                table_m = MdotTable.build(design, ast,
                                          p_max=_peak_power(design, ast),
                                          n_points=48, n_phases=6)
                out = simulate_deflection(dscn, mdot_table=table_m)
                return (np.array([-out.miss_distance, n_sc * m_sc]), np.zeros(0))

            problem = ProblemSpec(
                lower=np.array([space.aperture[0], space.n_spacecraft[0],
                                space.concentration[0]]),
                upper=np.array([space.aperture[1], space.n_spacecraft[1],
                                space.concentration[1]]),
                integer_mask=np.array([False, True, False]),
                n_objectives=2, evaluate=evaluate)
            result = optimize(problem, budget=int(cfg["budget"]),
                              seed=seed + 10 * mi + oi,
                              population=int(cfg["population"]),
                              archive_size=int(cfg["archive"]))
            for m in result.archive.members:
                d_m, n_sc, c_r = float(m.x[0]), int(round(m.x[1])), float(m.x[2])
                design = design_from_option(d_m, c_r, n_spacecraft=n_sc, option=option)
                m_sc = mass_budget(design, r_peri).m_total
                table.add_row(mode, option, d_m, n_sc, c_r,
                              -float(m.objectives[0]), float(m.objectives[1]), m_sc)
    return table


def _peak_power(design, ast) -> float:
    from .constants import SOLAR_FLUX_1AU
    r_peri = ast.elements0.a * (1.0 - ast.elements0.e)
    return (design.eta_sys * design.concentration_ratio * (1.0 - ast.albedo)
            * SOLAR_FLUX_1AU * (AU / r_peri) ** 2)


# ---------------------------------------------------------------------------
# Deflection map
# ---------------------------------------------------------------------------

def _map_cell(args) -> tuple:
    (mode, aperture, n_sc, warning, scenario_ast, earth, formation, c_r, option,
     t_moid, m_sc, mdot_table, scattering) = args
    design = design_from_option(aperture, c_r, n_spacecraft=n_sc, option=option)
    dscn = DeflectionScenario(ast=scenario_ast, design=design, earth=earth,
                              m_sc=m_sc, t_start=t_moid - warning, t_moid=t_moid,
                              formation=formation, scattering_factor=scattering)
    out = simulate_deflection(dscn, mdot_table=mdot_table)
    mdot_peak = float(np.max(out.mdot))
    return (mode, aperture, n_sc, warning / YEAR, out.miss_distance,
            float(out.tau[-1]), float(out.mdot[-1]), mdot_peak,
            float(out.asteroid_mass[-1]))


def run_deflection_map(scenario: Scenario, seed: int | None = None,
                       threads: int = 1) -> ResultTable:
    exp = dict(scenario.experiments.get("deflection_map", {}))
    apertures = [float(a) for a in exp.get("apertures_m", [5.0, 10.0])]
    c_r = float(exp.get("concentration_ratio", 5000.0))
    option = exp.get("efficiency_option", "60/40")
    n_list = [int(n) for n in exp.get("n_spacecraft", range(1, 11))]
    if scenario.warning_times:
        warnings = list(scenario.warning_times)
    else:
        warnings = [w * YEAR for w in exp.get("warning_times_yr", [1, 3, 5, 8, 12])]
    modes = list(exp.get("modes", ["natural", "shaped"]))

    ast = scenario.asteroid
    t_moid = resolve_encounter_epoch(scenario)
    r_peri = ast.elements0.a * (1.0 - ast.elements0.e)

    tables = {}
    masses = {}
    for aperture in apertures:
        design1 = design_from_option(aperture, c_r, n_spacecraft=1, option=option)
        tables[aperture] = MdotTable.build(design1, ast, p_max=_peak_power(design1, ast))
        masses[aperture] = mass_budget(design1, r_peri).m_total

    cells = []
    for mode in modes:
        formation = _fleet_formation(scenario, mode)
        for aperture in apertures:
            for n_sc in n_list:
                for warning in warnings:
                    cells.append((mode, aperture, n_sc, warning, ast, scenario.earth,
                                  formation, c_r, option, t_moid, masses[aperture],
                                  tables[aperture], scenario.scattering_factor))

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_map_cell, cells, chunksize=4))
    else:
        rows = [_map_cell(c) for c in cells]

    table = ResultTable(
        name="deflection_map",
        columns=[("mode", ""), ("aperture", "m"), ("n_spacecraft", ""),
                 ("warning_time", "yr"), ("miss_distance", "m"),
                 ("tau_end", ""), ("mdot_end", "kg/s"), ("mdot_peak", "kg/s"),
                 ("asteroid_mass_end", "kg")],
        metadata=scenario.metadata() | {"concentration_ratio": c_r,
                                        "efficiency_option": option,
                                        "moid_epoch_s": t_moid,
                                        "spacecraft_mass_kg": {f"{a:g}m": m for a, m
                                                               in masses.items()}})
    for row in rows:
        table.add_row(*row)
    return table


# ---------------------------------------------------------------------------
# Eccentricity sweep
# ---------------------------------------------------------------------------

def _sweep_cell(args) -> tuple:
    (r_p, r_a, template, earth, design, formation, m_sc, warning, scattering) = args
    a = 0.5 * (r_p + r_a)
    e = (r_a - r_p) / (r_a + r_p)
    if e <= 0.0:
        return (r_p / AU, r_a / AU, 0.0, False, None)
    p = a * (1.0 - e * e)
    cos_nu = (p / AU - 1.0) / e
    if abs(cos_nu) > 1.0 + 1e-9:
        return (r_p / AU, r_a / AU, e, False, None)
    # |cos| ~ 1 is a tangency at perihelion/aphelion exactly on the Earth
    # radius: a valid (grazing) intersection, kept with a clamp
    nu_star = math.acos(max(-1.0, min(1.0, cos_nu)))

    elements = OrbitalElements(a=a, e=e, i=0.0, raan=0.0, argp=0.0,
                               anomaly=0.0, anomaly_kind="mean", epoch=0.0)
    ast = replace(template, elements0=elements)
    dscn = DeflectionScenario(ast=ast, design=design, earth=earth, m_sc=m_sc,
                              t_start=0.0, t_moid=warning, formation=formation,
                              scattering_factor=scattering)
    out = simulate_deflection(dscn)

    # Miss distance at the Earth-orbit intersection: freeze the element
    # variation at the end of the window and evaluate the separation with
    # the undeflected asteroid placed exactly at the crossing, the virtual
    # Earth co-located on its circular orbit.
    m_star = true_to_mean(nu_star, e)
    k0 = elements
    kd = out.elements_final
    k0_star = OrbitalElements(a=k0.a, e=k0.e, i=k0.i, raan=k0.raan, argp=k0.argp,
                              anomaly=m_star, anomaly_kind="mean")
    kd_star = OrbitalElements(a=kd.a, e=kd.e, i=kd.i, raan=kd.raan, argp=kd.argp,
                              anomaly=(m_star + out.delta_mean_anomaly),
                              anomaly_kind="mean")
    s0 = elements_to_state(k0_star, MU_SUN)
    sd = elements_to_state(kd_star, MU_SUN)

    r_hat = s0.position / np.linalg.norm(s0.position)
    v_circ = math.sqrt(MU_SUN / AU)
    earth_state = StateVector(position=r_hat * AU,
                              velocity=v_circ * np.array([-r_hat[1], r_hat[0], 0.0]))
    b = bplane_miss(sd, s0, earth_state)
    return (r_p / AU, r_a / AU, e, True, b)


def run_eccentricity_sweep(scenario: Scenario, seed: int | None = None,
                           threads: int = 1) -> ResultTable:
    exp = dict(scenario.experiments.get("eccentricity_sweep", {}))
    n_rp = int(exp.get("n_perihelion", 11))
    n_ra = int(exp.get("n_aphelion", 11))
    r_p_grid = np.linspace(0.5, 1.0, n_rp) * AU
    r_a_grid = np.linspace(1.0, 2.0, n_ra) * AU
    warning = float(exp.get("warning_yr", 9.0)) * YEAR
    aperture = float(exp.get("aperture_m", 20.0))
    c_r = float(exp.get("concentration_ratio", 5000.0))
    n_sc = int(exp.get("n_spacecraft", 1))
    option = exp.get("efficiency_option", "60/40")

    design = design_from_option(aperture, c_r, n_spacecraft=n_sc, option=option)
    template = scenario.asteroid
    formation = scenario.shaped if scenario.shaped is not None else ShapedOrbit(
        np.array([0.0, 0.0, -1000.0, 0.0, 0.0, -1000.0, 0.0, 0.0]))
    m_sc = mass_budget(design, float(r_p_grid[0])).m_total

    cells = [(float(r_p), float(r_a), template, scenario.earth, design, formation,
              m_sc, warning, scenario.scattering_factor)
             for r_p in r_p_grid for r_a in r_a_grid]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_cell, cells, chunksize=4))
    else:
        rows = [_sweep_cell(c) for c in cells]

    table = ResultTable(
        name="eccentricity_sweep",
        columns=[("r_perihelion", "AU"), ("r_aphelion", "AU"), ("eccentricity", ""),
                 ("intersects", ""), ("miss_distance", "m")],
        metadata=scenario.metadata() | {"warning_yr": warning / YEAR,
                                        "aperture_m": aperture,
                                        "concentration_ratio": c_r,
                                        "n_spacecraft": n_sc,
                                        "efficiency_option": option,
                                        "spacecraft_mass_kg": m_sc})
    for row in rows:
        table.add_row(*row)
    return table
