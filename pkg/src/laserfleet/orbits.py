"""Two-body orbital mechanics for heliocentric deflection studies.

Provides:

    1. Keplerian element set and Cartesian state conversions (elliptic only).
    2. Kepler propagation (Newton solver for the transcendental anomaly
       equation, bisection-safe).
    3. Gauss variational equations for the element rates under a perturbing
       acceleration given in the tangential/normal/out-of-plane frame, plus
       a fixed-step RK4 integrator for them.
    4. Rotating frames: Hill (radial/transverse/normal) and tangential
       (velocity/normal/angular-momentum) bases.
    5. Linearised proximal motion of a neighbouring orbit (element
       differences, periodic when the semi-major axes match).
    6. MOID search between two ellipses and the b-plane impact parameter
       of a deflected vs. undeflected orbit at a virtual encounter epoch.

All quantities are SI (m, s, rad) and heliocentric-inertial unless noted.
Hyperbolic and parabolic orbits are out of scope and rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .constants import TWO_PI

# Gauss equations are singular at e=0 and i=0; the study scenarios stay
# well away, so guard with a hard error instead of an equinoctial fallback.
SINGULARITY_GUARD = 1e-8

KEPLER_TOL = 1e-13
KEPLER_MAX_ITER = 60


@dataclass(frozen=True)
class OrbitalElements:
    """Keplerian element set, elliptic, anomaly tagged mean or true.

    Angles in radians, semi-major axis in meters, epoch in scenario
    seconds. ``anomaly_kind`` is ``"mean"`` or ``"true"``.
    """

    a: float
    e: float
    i: float
    raan: float
    argp: float
    anomaly: float
    anomaly_kind: str = "mean"
    epoch: float = 0.0

    def __post_init__(self):
        if not (self.a > 0.0):
            raise ValueError(f"semi-major axis must be positive, got {self.a}")
        if not (0.0 <= self.e < 1.0):
            raise ValueError(f"eccentricity must be in [0, 1), got {self.e}")
        if not (0.0 <= self.i <= math.pi):
            raise ValueError(f"inclination must be in [0, pi], got {self.i}")
        if self.anomaly_kind not in ("mean", "true"):
            raise ValueError(f"anomaly_kind must be 'mean' or 'true', got {self.anomaly_kind!r}")
        object.__setattr__(self, "anomaly", self.anomaly % TWO_PI)

    def mean_motion(self, mu: float) -> float:
        return math.sqrt(mu / self.a**3)

    def period(self, mu: float) -> float:
        return TWO_PI / self.mean_motion(mu)

    def semilatus_rectum(self) -> float:
        return self.a * (1.0 - self.e**2)

    def mean_anomaly(self) -> float:
        if self.anomaly_kind == "mean":
            return self.anomaly
        return true_to_mean(self.anomaly, self.e)

    def true_anomaly(self) -> float:
        if self.anomaly_kind == "true":
            return self.anomaly
        return mean_to_true(self.anomaly, self.e)

    def as_array(self) -> np.ndarray:
        """[a, e, i, raan, argp, M] with the anomaly expressed as mean."""
        return np.array([self.a, self.e, self.i, self.raan, self.argp, self.mean_anomaly()])

    @classmethod
    def from_array(cls, k: np.ndarray, epoch: float = 0.0) -> "OrbitalElements":
        return cls(a=float(k[0]), e=float(k[1]), i=float(k[2]), raan=float(k[3]),
                   argp=float(k[4]), anomaly=float(k[5]), anomaly_kind="mean", epoch=epoch)


@dataclass(frozen=True)
class StateVector:
    """Heliocentric-inertial Cartesian state (m, m/s)."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        if pos.shape != (3,) or vel.shape != (3,):
            raise ValueError("position and velocity must be 3-vectors")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("state components must be finite")
        if np.linalg.norm(pos) == 0.0:
            raise ValueError("position magnitude must be nonzero")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)


@dataclass(frozen=True)
class FrameBasis:
    """Right-handed orthonormal triad; rows of ``axes`` are the basis vectors."""

    axes: np.ndarray
    kind: str

    def to_frame(self, v: np.ndarray) -> np.ndarray:
        return self.axes @ np.asarray(v, dtype=float)

    def from_frame(self, v: np.ndarray) -> np.ndarray:
        return self.axes.T @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class BodyEphemeris:
    """Fixed Keplerian ephemeris of a body around the Sun (or a circular variant)."""

    elements: OrbitalElements
    mu_central: float

    def state_at(self, t: float) -> StateVector:
        k = kepler_propagate(self.elements, t - self.elements.epoch, self.mu_central)
        return elements_to_state(k, self.mu_central)


# ---------------------------------------------------------------------------
# Anomaly conversions
# ---------------------------------------------------------------------------

def solve_kepler(mean_anomaly: float, e: float) -> float:
    """Solve E - e sin E = M for the eccentric anomaly.

    Newton iteration from a third-order starter, with a bisection fallback
    if Newton leaves the bracket. Converges to |E - e sinE - M| < 1e-13.
    """
    m = math.remainder(mean_anomaly, TWO_PI)  # [-pi, pi], best conditioning
    if e == 0.0:
        return m % TWO_PI
    ecc = e
    # Starter: Danby's initial guess
    E = m + 0.85 * math.copysign(ecc, math.sin(m))
    for _ in range(KEPLER_MAX_ITER):
        f = E - ecc * math.sin(E) - m
        if abs(f) < KEPLER_TOL:
            return E % TWO_PI
        fp = 1.0 - ecc * math.cos(E)
        E -= f / fp
    # Newton failed (should not happen for e < 1); bisect on [m-e, m+e]
    lo, hi = m - ecc, m + ecc
    for _ in range(200):
        E = 0.5 * (lo + hi)
        f = E - ecc * math.sin(E) - m
        if abs(f) < KEPLER_TOL:
            break
        if f > 0.0:
            hi = E
        else:
            lo = E
    return E % TWO_PI


def eccentric_to_true(E: float, e: float) -> float:
    return (2.0 * math.atan2(math.sqrt(1.0 + e) * math.sin(E / 2.0),
                             math.sqrt(1.0 - e) * math.cos(E / 2.0))) % TWO_PI


def true_to_eccentric(nu: float, e: float) -> float:
    return (2.0 * math.atan2(math.sqrt(1.0 - e) * math.sin(nu / 2.0),
                             math.sqrt(1.0 + e) * math.cos(nu / 2.0))) % TWO_PI


def mean_to_true(M: float, e: float) -> float:
    return eccentric_to_true(solve_kepler(M, e), e)


def true_to_mean(nu: float, e: float) -> float:
    E = true_to_eccentric(nu, e)
    return (E - e * math.sin(E)) % TWO_PI


# ---------------------------------------------------------------------------
# Element <-> state conversions
# ---------------------------------------------------------------------------

def elements_to_state(k: OrbitalElements, mu: float) -> StateVector:
    """Cartesian heliocentric state from Keplerian elements (elliptic)."""
    nu = k.true_anomaly()
    p = k.semilatus_rectum()
    r = p / (1.0 + k.e * math.cos(nu))

    cos_nu, sin_nu = math.cos(nu), math.sin(nu)
    r_pf = np.array([r * cos_nu, r * sin_nu, 0.0])
    vf = math.sqrt(mu / p)
    v_pf = np.array([-vf * sin_nu, vf * (k.e + cos_nu), 0.0])

    rot = _perifocal_to_inertial(k.i, k.raan, k.argp)
    return StateVector(position=rot @ r_pf, velocity=rot @ v_pf)


def state_to_elements(s: StateVector, mu: float, epoch: float = 0.0) -> OrbitalElements:
    """Keplerian elements from a Cartesian state. Bound orbits only.

    Angles are extracted with atan2 forms that stay well conditioned near
    periapsis, zero inclination and zero eccentricity (the acos variants
    lose half the significant digits there).
    """
    r_vec, v_vec = s.position, s.velocity
    r = float(np.linalg.norm(r_vec))
    v2 = float(v_vec @ v_vec)

    energy = 0.5 * v2 - mu / r
    if energy >= 0.0:
        raise ValueError("state is not on a bound (elliptic) orbit")
    a = -mu / (2.0 * energy)

    h_vec = np.cross(r_vec, v_vec)
    h = float(np.linalg.norm(h_vec))
    if h < 1e-6 * math.sqrt(mu * r):
        raise ValueError("degenerate (rectilinear) state: |h| ~ 0")
    h_hat = h_vec / h

    e_vec = np.cross(v_vec, h_vec) / mu - r_vec / r
    e = min(float(np.linalg.norm(e_vec)), 1.0 - 1e-15)
    p = h * h / mu

    i = math.atan2(math.hypot(h_vec[0], h_vec[1]), h_vec[2])

    n_vec = np.array([-h_vec[1], h_vec[0], 0.0])  # node line = z x h
    n = float(np.linalg.norm(n_vec))
    equatorial = n <= 1e-12 * h

    if equatorial:
        raan = 0.0
        # latitude argument measured from the x-axis in the orbit plane
        sign = 1.0 if h_vec[2] >= 0.0 else -1.0
        theta = math.atan2(sign * r_vec[1], r_vec[0]) % TWO_PI
    else:
        n_hat = n_vec / n
        raan = math.atan2(n_vec[1], n_vec[0]) % TWO_PI
        theta = math.atan2(float(r_vec @ np.cross(h_hat, n_hat)),
                           float(r_vec @ n_hat)) % TWO_PI

    if e > 1e-12:
        # e r sin(nu) = (r.v) sqrt(p/mu); e r cos(nu) = p - r
        nu = math.atan2(float(r_vec @ v_vec) * math.sqrt(p / mu), p - r) % TWO_PI
        argp = (theta - nu) % TWO_PI
    else:
        argp = 0.0
        nu = theta

    return OrbitalElements(a=a, e=e, i=i, raan=raan, argp=argp,
                           anomaly=nu, anomaly_kind="true", epoch=epoch)


def _perifocal_to_inertial(i: float, raan: float, argp: float) -> np.ndarray:
    co, so = math.cos(raan), math.sin(raan)
    ci, si = math.cos(i), math.sin(i)
    cw, sw = math.cos(argp), math.sin(argp)
    return np.array([
        [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
        [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
        [sw * si, cw * si, ci],
    ])


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def kepler_propagate(k: OrbitalElements, dt: float, mu: float) -> OrbitalElements:
    """Advance the orbit by ``dt`` of unperturbed two-body motion.

    Only the anomaly changes: M advances by n*dt.
    """
    m0 = k.mean_anomaly()
    m1 = m0 + k.mean_motion(mu) * dt
    return replace(k, anomaly=m1 % TWO_PI, anomaly_kind="mean", epoch=k.epoch + dt)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def hill_frame(s: StateVector) -> FrameBasis:
    """Rotating Hill triad: x radial, y transverse (in-plane), z along h."""
    r_hat = s.position / np.linalg.norm(s.position)
    h_vec = np.cross(s.position, s.velocity)
    z_hat = h_vec / np.linalg.norm(h_vec)
    y_hat = np.cross(z_hat, r_hat)
    return FrameBasis(axes=np.array([r_hat, y_hat, z_hat]), kind="hill_rtn")


def tangential_frame(s: StateVector) -> FrameBasis:
    """Velocity-aligned triad: t along v, h along angular momentum, n = h x t."""
    t_hat = s.velocity / np.linalg.norm(s.velocity)
    h_vec = np.cross(s.position, s.velocity)
    h_hat = h_vec / np.linalg.norm(h_vec)
    n_hat = np.cross(h_hat, t_hat)
    return FrameBasis(axes=np.array([t_hat, n_hat, h_hat]), kind="tangential_tnh")


def bplane_frame(v_rel: np.ndarray) -> FrameBasis:
    """Triad with the third axis along the incoming relative velocity."""
    v = np.asarray(v_rel, dtype=float)
    vn = np.linalg.norm(v)
    if vn == 0.0:
        raise ValueError("b-plane undefined: relative velocity is zero")
    e3 = v / vn
    seed = np.array([0.0, 0.0, 1.0]) if abs(e3[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(seed, e3)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    return FrameBasis(axes=np.array([e1, e2, e3]), kind="bplane")


def flight_path_angle(e: float, nu: float) -> float:
    """Angle of the velocity above the transverse direction: tan g = e sin nu / (1 + e cos nu)."""
    return math.atan2(e * math.sin(nu), 1.0 + e * math.cos(nu))


# ---------------------------------------------------------------------------
# Gauss variational equations (tangential / normal / out-of-plane input)
# ---------------------------------------------------------------------------

def gauss_rates(k: OrbitalElements, u_tnh: np.ndarray, mu: float) -> np.ndarray:
    """Element rates [da, de, di, dO, dw, dM]/dt under acceleration u.

    ``u_tnh`` is given in the tangential frame (t along velocity, n = h x t
    in-plane, h out-of-plane). Internally the input is rotated to the
    radial/transverse split through the flight-path angle and the classic
    radial-transverse-normal form of the variational equations is applied.
    With u = 0 every rate is zero except dM/dt = n.
    """
    if k.e < SINGULARITY_GUARD:
        raise ValueError(f"Gauss rates singular: e={k.e} below guard {SINGULARITY_GUARD}")
    if k.i < SINGULARITY_GUARD:
        raise ValueError(f"Gauss rates singular: i={k.i} below guard {SINGULARITY_GUARD}")

    a, e, inc = k.a, k.e, k.i
    nu = k.true_anomaly()
    p = a * (1.0 - e * e)
    h = math.sqrt(mu * p)
    cos_nu, sin_nu = math.cos(nu), math.sin(nu)
    r = p / (1.0 + e * cos_nu)
    n_mm = math.sqrt(mu / a**3)
    eta = math.sqrt(1.0 - e * e)

    u_t, u_n, u_h = float(u_tnh[0]), float(u_tnh[1]), float(u_tnh[2])
    # Rotate (t, n) -> (radial, transverse): t = sin(g) r + cos(g) s,
    # n = h x t = sin(g) s - cos(g) r, with g the flight-path angle.
    w = math.hypot(e * sin_nu, 1.0 + e * cos_nu)
    sin_g = e * sin_nu / w
    cos_g = (1.0 + e * cos_nu) / w
    u_r = u_t * sin_g - u_n * cos_g
    u_s = u_t * cos_g + u_n * sin_g

    theta = nu + k.argp
    cos_th, sin_th = math.cos(theta), math.sin(theta)
    sin_i = math.sin(inc)

    da = 2.0 * a * a / h * (e * sin_nu * u_r + (p / r) * u_s)
    de = (p * sin_nu * u_r + ((p + r) * cos_nu + r * e) * u_s) / h
    di = r * cos_th / h * u_h
    draan = r * sin_th / (h * sin_i) * u_h
    dargp = (-p * cos_nu * u_r + (p + r) * sin_nu * u_s) / (h * e) \
        - r * sin_th * math.cos(inc) / (h * sin_i) * u_h
    dm = n_mm + eta / (h * e) * ((p * cos_nu - 2.0 * r * e) * u_r - (p + r) * sin_nu * u_s)

    return np.array([da, de, di, draan, dargp, dm])


@dataclass(frozen=True)
class GaussHistory:
    """Element history from a Gauss-equation integration.

    ``elements`` rows are [a, e, i, raan, argp, M] with M left unwrapped so
    the accumulated mean anomaly (including the n*t secular part) survives
    cancellation-sensitive differencing.
    """

    times: np.ndarray
    elements: np.ndarray
    mu: float

    def final(self) -> OrbitalElements:
        return OrbitalElements.from_array(self.elements[-1], epoch=float(self.times[-1]))

    def mean_anomaly_integral(self) -> float:
        """Integral of dM/dt over the whole window (unwrapped)."""
        return float(self.elements[-1, 5] - self.elements[0, 5])


def integrate_gauss(k0: OrbitalElements, accel_fn, t0: float, t1: float, mu: float,
                    step_fraction: float = 1e-3, record_every: int = 1) -> GaussHistory:
    """Fixed-step RK4 integration of the Gauss equations.

    ``accel_fn(t, k_array) -> u_tnh`` supplies the perturbing acceleration
    in the tangential frame. The step is at most ``step_fraction`` of the
    initial period (reproducibility over adaptivity).
    """
    period = k0.period(mu)
    span = t1 - t0
    n_steps = max(1, int(math.ceil(span / (step_fraction * period))))
    dt = span / n_steps

    k = k0.as_array()
    times = [t0]
    rows = [k.copy()]

    def rhs(t, karr):
        kel = OrbitalElements.from_array(np.concatenate([karr[:5], [karr[5] % TWO_PI]]))
        return gauss_rates(kel, accel_fn(t, karr), mu)

    t = t0
    for step in range(n_steps):
        k1 = rhs(t, k)
        k2 = rhs(t + 0.5 * dt, k + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, k + 0.5 * dt * k2)
        k4 = rhs(t + dt, k + dt * k3)
        k = k + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (step + 1) * dt
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            times.append(t)
            rows.append(k.copy())

    return GaussHistory(times=np.array(times), elements=np.array(rows), mu=mu)


def delta_m_at_moid(history: GaussHistory, t0: float, ti: float, t_moid: float,
                    n_a0: float, n_ai: float) -> float:
    """Accumulated change in mean anomaly at the virtual encounter epoch.

    dM = integral(dM/dt, t0..ti) + n_A0 (t0 - t_MOID) + n_Ai (t_MOID - ti),
    i.e. the anomaly offset between the deflected orbit (thrusting until ti,
    coasting after) and the undeflected orbit, both evaluated at t_MOID.
    """
    if not (t0 <= ti <= t_moid):
        raise ValueError("expected t0 <= ti <= t_moid")
    return history.mean_anomaly_integral() + n_a0 * (t0 - t_moid) + n_ai * (t_moid - ti)


# ---------------------------------------------------------------------------
# Linearised proximal motion
# ---------------------------------------------------------------------------

def linear_proximal_position(k_a: OrbitalElements, dk: np.ndarray, nu: float) -> np.ndarray:
    """Hill-frame position of a neighbouring orbit, first order in the deltas.

    ``dk`` = [de, di, draan, dargp, dM]; the semi-major-axis delta is zero by
    construction so the relative motion is periodic in nu. Supports scalar
    or array ``nu``.
    """
    dk = np.asarray(dk, dtype=float)
    if dk.shape != (5,):
        raise ValueError("dk must be [de, di, draan, dargp, dM]")
    de, di, draan, dargp, dm = dk

    a, e, i = k_a.a, k_a.e, k_a.i
    eta = math.sqrt(1.0 - e * e)
    nu = np.asarray(nu, dtype=float)
    cos_nu, sin_nu = np.cos(nu), np.sin(nu)
    r = a * eta**2 / (1.0 + e * cos_nu)
    theta = nu + k_a.argp

    x = (a * e * sin_nu / eta) * dm - a * cos_nu * de
    y = (r / eta**3) * (1.0 + e * cos_nu) ** 2 * dm + r * dargp \
        + (r * sin_nu / eta**2) * (2.0 + e * cos_nu) * de \
        + r * math.cos(i) * draan
    z = r * (np.sin(theta) * di - np.cos(theta) * math.sin(i) * draan)

    return np.stack(np.broadcast_arrays(x, y, z), axis=-1) if nu.ndim else np.array([x, y, z])


# ---------------------------------------------------------------------------
# MOID and b-plane impact parameter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoidResult:
    nu_1: float
    nu_2: float
    distance: float


def _orbit_points(k: OrbitalElements, nus: np.ndarray) -> np.ndarray:
    """Positions (N x 3) on an orbit at an array of true anomalies."""
    p = k.semilatus_rectum()
    r = p / (1.0 + k.e * np.cos(nus))
    r_pf = np.stack([r * np.cos(nus), r * np.sin(nus), np.zeros_like(nus)], axis=-1)
    return r_pf @ _perifocal_to_inertial(k.i, k.raan, k.argp).T


def find_moid(k1: OrbitalElements, k2: OrbitalElements,
              grid_deg: float = 2.0) -> MoidResult:
    """Minimum orbital intersection distance between two ellipses.

    Coarse grid over both anomalies (default 2 degrees) followed by a local
    Nelder-Mead refinement of the geometric distance. Orbit timing plays no
    role: the MOID is a property of the two curves.
    """
    n = int(round(360.0 / grid_deg))
    nus = np.linspace(0.0, TWO_PI, n, endpoint=False)
    pts1 = _orbit_points(k1, nus)
    pts2 = _orbit_points(k2, nus)

    d2 = (np.sum(pts1**2, axis=1)[:, None] + np.sum(pts2**2, axis=1)[None, :]
          - 2.0 * pts1 @ pts2.T)
    i1, i2 = np.unravel_index(int(np.argmin(d2)), d2.shape)

    def dist(x):
        p1 = _orbit_points(k1, np.array([x[0]]))[0]
        p2 = _orbit_points(k2, np.array([x[1]]))[0]
        return float(np.linalg.norm(p1 - p2))

    res = minimize(dist, x0=np.array([nus[i1], nus[i2]]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-4, "maxiter": 2000})
    grid_best = math.sqrt(max(float(d2[i1, i2]), 0.0))
    if res.fun <= grid_best:
        nu1, nu2, best = float(res.x[0]) % TWO_PI, float(res.x[1]) % TWO_PI, float(res.fun)
    else:
        nu1, nu2, best = float(nus[i1]), float(nus[i2]), grid_best
    return MoidResult(nu_1=nu1, nu_2=nu2, distance=best)


def impact_parameter(k_dev: OrbitalElements, k_0: OrbitalElements,
                     earth: BodyEphemeris, t_moid: float, mu: float) -> float:
    """Miss distance on the Earth b-plane at the virtual encounter epoch.

    The deflected and undeflected orbits are both propagated to t_MOID; the
    separation is projected onto the plane normal to the asteroid-Earth
    relative velocity and the in-plane magnitude is returned.
    """
    s_dev = elements_to_state(kepler_propagate(k_dev, t_moid - k_dev.epoch, mu), mu)
    s_0 = elements_to_state(kepler_propagate(k_0, t_moid - k_0.epoch, mu), mu)
    s_e = earth.state_at(t_moid)

    v_rel = s_0.velocity - s_e.velocity
    v_norm = float(np.linalg.norm(v_rel))
    if v_norm < 1e-9 * float(np.linalg.norm(s_0.velocity)):
        raise ValueError("b-plane undefined: asteroid-Earth relative velocity ~ 0")

    dr = s_dev.position - s_0.position
    v_hat = v_rel / v_norm
    in_plane = dr - (dr @ v_hat) * v_hat
    return float(np.linalg.norm(in_plane))
