"""Orbital element sets, Kepler propagation and b-plane geometry.

Everything here is two-body mechanics in non-singular equinoctial elements
(a, P1, P2, Q1, Q2, L) plus the variational rates driven by a thrust
acceleration expressed in the radial-transversal-normal frame. Units are
km, s, rad; gravitational parameters in km^3/s^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi

# Relative velocity below which the b-plane is considered degenerate, km/s
V_INF_MIN = 1e-8


class KeplerConvergenceError(RuntimeError):
    """The iterative solve of the generalized Kepler equation did not converge."""


class DegenerateBPlaneError(ValueError):
    """Incoming relative velocity too small to define a b-plane."""


def wrap_two_pi(angle: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    a = math.fmod(angle, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


def wrap_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(angle, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


@dataclass(frozen=True)
class KeplerianElements:
    """Classical elements of an elliptic orbit.

    Attributes:
        a: semi-major axis [km], > 0.
        e: eccentricity, 0 <= e < 1.
        i: inclination [rad].
        raan: right ascension of the ascending node [rad].
        argp: argument of periapsis [rad].
        theta: true anomaly [rad].
    """

    a: float
    e: float
    i: float
    raan: float
    argp: float
    theta: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError(f"semi-major axis must be positive, got {self.a}")
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"only elliptic orbits supported, got e={self.e}")


@dataclass(frozen=True)
class EquinoctialState:
    """Non-singular equinoctial state with epoch.

    Elements: a, P1 = e*sin(raan+argp), P2 = e*cos(raan+argp),
    Q1 = tan(i/2)*sin(raan), Q2 = tan(i/2)*cos(raan), true longitude
    ell = raan + argp + theta. ``t`` is the epoch in seconds past the
    scenario reference.
    """

    a: float
    p1: float
    p2: float
    q1: float
    q2: float
    ell: float
    t: float = 0.0

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError(f"semi-major axis must be positive, got {self.a}")
        if self.p1 * self.p1 + self.p2 * self.p2 >= 1.0:
            raise ValueError("P1^2 + P2^2 must be < 1 for an elliptic orbit")

    @property
    def ecc(self) -> float:
        return math.hypot(self.p1, self.p2)

    def semi_latus(self) -> float:
        return self.a * (1.0 - self.p1 * self.p1 - self.p2 * self.p2)

    def radius(self) -> float:
        p = self.semi_latus()
        return p / (1.0 + self.p1 * math.sin(self.ell) + self.p2 * math.cos(self.ell))


@dataclass(frozen=True)
class ThrustRTN:
    """Thrust acceleration in the radial-transversal-normal frame.

    ``eps`` is the modulus [km/s^2]; ``alpha`` the in-plane azimuth measured
    from the radial axis (alpha = pi/2 is purely transversal) and ``beta``
    the out-of-plane elevation. The Cartesian RTN vector is
    eps * [cos(alpha)cos(beta), sin(alpha)cos(beta), sin(beta)].
    """

    eps: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.eps < 0.0:
            raise ValueError("thrust modulus must be non-negative")

    def rtn_vector(self) -> np.ndarray:
        cb = math.cos(self.beta)
        return self.eps * np.array(
            [math.cos(self.alpha) * cb, math.sin(self.alpha) * cb, math.sin(self.beta)]
        )


ZERO_THRUST = ThrustRTN(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BPlaneResult:
    """Projected miss geometry on the plane normal to the incoming velocity.

    Attributes:
        b: impact parameter magnitude [km].
        v_inf: incoming relative velocity vector [km/s].
        b_vec: miss vector projected onto the b-plane [km].
    """

    b: float
    v_inf: np.ndarray
    b_vec: np.ndarray


# ---------------------------------------------------------------------------
# Element conversions
# ---------------------------------------------------------------------------

def keplerian_to_equinoctial(kep: KeplerianElements, t: float = 0.0) -> EquinoctialState:
    """Convert classical elements to the non-singular equinoctial set.

    Raises ValueError for e >= 1 (enforced by KeplerianElements) and for
    i = pi, where tan(i/2) is singular.
    """
    if abs(wrap_pi(kep.i - math.pi)) < 1e-12:
        raise ValueError("equinoctial elements are singular at i = pi")
    pomega = kep.raan + kep.argp
    ti2 = math.tan(0.5 * kep.i)
    return EquinoctialState(
        a=kep.a,
        p1=kep.e * math.sin(pomega),
        p2=kep.e * math.cos(pomega),
        q1=ti2 * math.sin(kep.raan),
        q2=ti2 * math.cos(kep.raan),
        ell=wrap_two_pi(pomega + kep.theta),
        t=t,
    )


def equinoctial_to_keplerian(eq: EquinoctialState) -> KeplerianElements:
    """Invert the equinoctial mapping back to classical elements.

    For circular and/or equatorial orbits the ambiguous angles collapse to
    the atan2(0, 0) = 0 convention.
    """
    e = math.hypot(eq.p1, eq.p2)
    tan_half_i = math.hypot(eq.q1, eq.q2)
    i = 2.0 * math.atan(tan_half_i)
    raan = math.atan2(eq.q1, eq.q2) if tan_half_i > 0.0 else 0.0
    pomega = math.atan2(eq.p1, eq.p2) if e > 0.0 else 0.0
    argp = pomega - raan
    theta = eq.ell - pomega
    return KeplerianElements(
        a=eq.a,
        e=e,
        i=i,
        raan=wrap_two_pi(raan),
        argp=wrap_two_pi(argp),
        theta=wrap_two_pi(theta),
    )


# ---------------------------------------------------------------------------
# Kepler's equation in equinoctial form
# ---------------------------------------------------------------------------

def eccentric_longitude(eq: EquinoctialState, ell: float | None = None) -> float:
    """Eccentric longitude K for a given true longitude, unwrapped near it.

    The principal value is corrected to the branch within pi of the true
    longitude so that differences of longitudes stay continuous.
    """
    if ell is None:
        ell = eq.ell
    e = math.hypot(eq.p1, eq.p2)
    if e < 1e-15:
        return ell
    pomega = math.atan2(eq.p1, eq.p2)
    theta = ell - pomega
    denom = 1.0 + e * math.cos(theta)
    sin_ecc = math.sqrt(1.0 - e * e) * math.sin(theta) / denom
    cos_ecc = (e + math.cos(theta)) / denom
    ecc_anom = math.atan2(sin_ecc, cos_ecc)
    ecc_anom += TWO_PI * round((theta - ecc_anom) / TWO_PI)
    return ecc_anom + pomega


def true_longitude_from_eccentric(eq: EquinoctialState, k_long: float) -> float:
    """True longitude for a given eccentric longitude, unwrapped near it."""
    e = math.hypot(eq.p1, eq.p2)
    if e < 1e-15:
        return k_long
    pomega = math.atan2(eq.p1, eq.p2)
    ecc_anom = k_long - pomega
    denom = 1.0 - e * math.cos(ecc_anom)
    sin_th = math.sqrt(1.0 - e * e) * math.sin(ecc_anom) / denom
    cos_th = (math.cos(ecc_anom) - e) / denom
    theta = math.atan2(sin_th, cos_th)
    theta += TWO_PI * round((ecc_anom - theta) / TWO_PI)
    return theta + pomega


def mean_longitude(eq: EquinoctialState, ell: float | None = None) -> float:
    """Mean longitude lambda = K + P1*cos(K) - P2*sin(K), unwrapped."""
    k_long = eccentric_longitude(eq, ell)
    return k_long + eq.p1 * math.cos(k_long) - eq.p2 * math.sin(k_long)


def solve_eccentric_longitude(
    eq: EquinoctialState, lam: float, tol: float = 1e-13, max_iter: int = 60
) -> float:
    """Solve lambda = K + P1*cos(K) - P2*sin(K) for K by Newton iteration.

    The derivative 1 - P1*sin(K) - P2*cos(K) = r/a is strictly positive on
    elliptic orbits, so the iteration is well conditioned. Raises
    KeplerConvergenceError when the residual does not fall below ``tol``
    within ``max_iter`` iterations.
    """
    k_long = lam
    for _ in range(max_iter):
        g = k_long + eq.p1 * math.cos(k_long) - eq.p2 * math.sin(k_long) - lam
        if abs(g) < tol:
            return k_long
        dg = 1.0 - eq.p1 * math.sin(k_long) - eq.p2 * math.cos(k_long)
        k_long -= g / dg
    raise KeplerConvergenceError(
        f"Kepler solve did not reach |residual| < {tol} in {max_iter} iterations"
    )


def kepler_time_of_flight(eq: EquinoctialState, dl: float, mu: float) -> float:
    """Exact two-body time of flight from eq.ell to eq.ell + dl [s]."""
    n = math.sqrt(mu / eq.a**3)
    lam0 = mean_longitude(eq, eq.ell)
    lam1 = mean_longitude(eq, eq.ell + dl)
    return (lam1 - lam0) / n


def propagate_keplerian(eq: EquinoctialState, t_target: float, mu: float) -> EquinoctialState:
    """Two-body propagation of an equinoctial state to an epoch."""
    n = math.sqrt(mu / eq.a**3)
    lam_target = mean_longitude(eq) + n * (t_target - eq.t)
    k_long = solve_eccentric_longitude(eq, lam_target)
    ell = true_longitude_from_eccentric(eq, k_long)
    return replace(eq, ell=ell, t=t_target)


# ---------------------------------------------------------------------------
# Cartesian state
# ---------------------------------------------------------------------------

def equinoctial_to_cartesian(eq: EquinoctialState, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Heliocentric position [km] and velocity [km/s] of an equinoctial state.

    Uses the equinoctial basis vectors built from Q1, Q2; valid for any
    elliptic orbit including circular and equatorial ones.
    """
    q1, q2 = eq.q1, eq.q2
    s2 = 1.0 + q1 * q1 + q2 * q2
    f_hat = np.array([1.0 - q1 * q1 + q2 * q2, 2.0 * q1 * q2, -2.0 * q1]) / s2
    g_hat = np.array([2.0 * q1 * q2, 1.0 + q1 * q1 - q2 * q2, 2.0 * q2]) / s2

    p = eq.semi_latus()
    sl, cl = math.sin(eq.ell), math.cos(eq.ell)
    r = p / (1.0 + eq.p1 * sl + eq.p2 * cl)
    sqrt_mu_p = math.sqrt(mu / p)

    pos = r * (cl * f_hat + sl * g_hat)
    vel = sqrt_mu_p * (-(eq.p1 + sl) * f_hat + (eq.p2 + cl) * g_hat)
    return pos, vel


def velocity_rtn(eq: EquinoctialState, mu: float) -> tuple[float, float]:
    """Radial and transversal velocity components [km/s]."""
    p = eq.semi_latus()
    h = math.sqrt(mu * p)
    sl, cl = math.sin(eq.ell), math.cos(eq.ell)
    v_r = (h / p) * (eq.p2 * sl - eq.p1 * cl)
    v_t = (h / p) * (1.0 + eq.p1 * sl + eq.p2 * cl)
    return v_r, v_t


# ---------------------------------------------------------------------------
# Variational rates (Gauss form, non-singular elements)
# ---------------------------------------------------------------------------

def gauss_rhs(eq: EquinoctialState, f: ThrustRTN, mu: float) -> np.ndarray:
    """Rates (da, dP1, dP2, dQ1, dQ2, dL)/dt under an RTN thrust acceleration.

    Standard non-singular Gauss variational form; with eps = 0 the element
    rates vanish and dL/dt reduces to the exact Keplerian rate h/r^2.
    """
    p = eq.semi_latus()
    h = math.sqrt(mu * p)
    sl, cl = math.sin(eq.ell), math.cos(eq.ell)
    phi = 1.0 + eq.p1 * sl + eq.p2 * cl
    r = p / phi

    cb = math.cos(f.beta)
    f_r = f.eps * cb * math.cos(f.alpha)
    f_t = f.eps * cb * math.sin(f.alpha)
    f_n = f.eps * math.sin(f.beta)

    s2 = 1.0 + eq.q1 * eq.q1 + eq.q2 * eq.q2
    qterm = eq.q1 * cl - eq.q2 * sl

    da = (2.0 * eq.a**2 / h) * ((eq.p2 * sl - eq.p1 * cl) * f_r + phi * f_t)
    dp1 = (r / h) * (-phi * cl * f_r + (eq.p1 + (1.0 + phi) * sl) * f_t - eq.p2 * qterm * f_n)
    dp2 = (r / h) * (phi * sl * f_r + (eq.p2 + (1.0 + phi) * cl) * f_t + eq.p1 * qterm * f_n)
    dq1 = (r / (2.0 * h)) * s2 * sl * f_n
    dq2 = (r / (2.0 * h)) * s2 * cl * f_n
    dl = h / r**2 - (r / h) * qterm * f_n
    return np.array([da, dp1, dp2, dq1, dq2, dl])


# ---------------------------------------------------------------------------
# b-plane impact parameter
# ---------------------------------------------------------------------------

def bplane_projection(d_vec: np.ndarray, v_inf: np.ndarray) -> BPlaneResult:
    """Project a miss vector onto the plane normal to the incoming velocity."""
    v_norm = float(np.linalg.norm(v_inf))
    if v_norm < V_INF_MIN:
        raise DegenerateBPlaneError(
            f"|v_inf| = {v_norm:.3e} km/s is below {V_INF_MIN}; b-plane undefined"
        )
    v_hat = v_inf / v_norm
    b_vec = d_vec - np.dot(d_vec, v_hat) * v_hat
    return BPlaneResult(b=float(np.linalg.norm(b_vec)), v_inf=v_inf, b_vec=b_vec)


def impact_parameter(
    deviated: EquinoctialState,
    nominal: EquinoctialState,
    earth: EquinoctialState,
    t_impact: float,
    mu_sun: float,
) -> BPlaneResult:
    """Impact parameter of the deviated orbit on the Earth b-plane.

    The plane is built from the unperturbed encounter geometry,
    v_inf = v_nominal - v_earth, and the Cartesian position difference
    deviated - nominal is projected onto it. All three states must already
    be at the impact epoch.
    """
    for state, name in ((deviated, "deviated"), (nominal, "nominal"), (earth, "earth")):
        if abs(state.t - t_impact) > 1.0:
            raise ValueError(f"{name} state epoch {state.t} is not at t_impact {t_impact}")
    r_dev, _ = equinoctial_to_cartesian(deviated, mu_sun)
    r_nom, v_nom = equinoctial_to_cartesian(nominal, mu_sun)
    _, v_earth = equinoctial_to_cartesian(earth, mu_sun)
    return bplane_projection(r_dev - r_nom, v_nom - v_earth)


def earth_miss_distance(
    asteroid: EquinoctialState, earth: EquinoctialState, mu_sun: float
) -> float:
    """b-plane miss distance of an asteroid state relative to the Earth [km].

    Used by scenario calibration: the unperturbed reference orbit must give
    zero miss at the impact epoch.
    """
    r_ast, v_ast = equinoctial_to_cartesian(asteroid, mu_sun)
    r_earth, v_earth = equinoctial_to_cartesian(earth, mu_sun)
    return bplane_projection(r_ast - r_earth, v_ast - v_earth).b
