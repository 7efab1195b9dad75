"""Laser-ablation thrust, plume expansion and optics contamination.

The sublimation yield comes from an energy balance over the laser spot:
input flux minus black-body re-radiation minus transient heat conduction
into the surface. Surface material streams through the spot as the
asteroid rotates; each strip of the spot sees a dwell time set by its
chord length, with the conduction transient integrated analytically in
time and the strip contributions integrated by fixed quadrature.

The ejecta plume expands like a rocket exhaust into the half space above
the spot; whatever condenses on the collector mirror attenuates the
delivered power through an exponential degradation factor. All inputs in
SI units; the contamination layer thickness is tracked in cm to match the
per-cm absorption coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_CONSTANTS, MOL_MASS_FORSTERITE_KG, PhysicalConstants
from .orbits import EquinoctialState, ThrustRTN
from .sizing import DesignVector, TechnologyParams, system_efficiency

# Gauss-Legendre rule for the cross-spot strip integral (>= 16 nodes);
# plain tuples, the integral is evaluated in scalar code on the hot path
_Y_NODES, _Y_WEIGHTS = (
    tuple(arr) for arr in np.polynomial.legendre.leggauss(16)
)


@dataclass(frozen=True)
class AsteroidProperties:
    """Physical properties of the target asteroid.

    Attributes:
        c_a: specific heat [J/(kg K)].
        k_a: thermal conductivity [W/(m K)].
        rho_a: bulk density [kg/m^3].
        t_subl: sublimation temperature [K].
        e_sub: sublimation enthalpy [J/kg].
        t_0: pre-ablation surface temperature [K].
        albedo: fraction of incident laser power reflected.
        emiss_bb: black-body emissivity of the hot spot.
        a1, b1: semi-axes of the rotation ellipsoid [m].
        omega_a: spin rate [rad/s].
        m_a: asteroid mass [kg]; derived from the ellipsoid volume and
            density when not supplied.
        mol_mass: molecular mass of the ablated species [kg].
    """

    c_a: float = 750.0
    k_a: float = 2.0
    rho_a: float = 2600.0
    t_subl: float = 1800.0
    e_sub: float = 5.0e6
    t_0: float = 278.0
    albedo: float = 0.1
    emiss_bb: float = 0.9
    a1: float = 135.0
    b1: float = 135.0
    omega_a: float = 2.0 * math.pi / (30.4 * 3600.0)
    m_a: float | None = None
    mol_mass: float = MOL_MASS_FORSTERITE_KG

    def __post_init__(self):
        for name in ("c_a", "k_a", "rho_a", "t_subl", "e_sub", "a1", "b1",
                     "omega_a", "mol_mass"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.albedo < 1.0:
            raise ValueError("albedo must lie in [0, 1)")
        if not 0.0 < self.emiss_bb <= 1.0:
            raise ValueError("emiss_bb must lie in (0, 1]")
        if self.t_subl <= self.t_0:
            raise ValueError("sublimation temperature must exceed the deep temperature")

    @property
    def mass(self) -> float:
        if self.m_a is not None:
            return self.m_a
        return self.rho_a * (4.0 / 3.0) * math.pi * self.a1 * self.b1**2


@dataclass(frozen=True)
class StationGeometry:
    """Spacecraft station and spot pointing in the asteroid Hill frame.

    x points along the Sun-asteroid line (away from the Sun), y along
    track, z out of plane; all in meters. ``theta_va`` is the elevation of
    the laser spot over the y axis (pi/2 puts the spot on the x axis,
    facing a sun-side station) and ``psi_vf`` the angle between the mirror
    normal and the incident plume flow.
    """

    x: float = 2000.0
    y: float = 0.0
    z: float = 0.0
    theta_va: float = math.pi / 2.0
    psi_vf: float = 0.0


@dataclass
class PlumeState:
    """Per-trajectory accumulator of mirror contamination.

    ``h_cond`` is the condensed layer thickness in cm (non-decreasing);
    ``tau`` the optical degradation factor exp(-2 * eta * h_cond).
    """

    h_cond: float = 0.0
    tau: float = 1.0


def spot_area(a_m1: float, c_r: float) -> tuple[float, float]:
    """Area [m^2] and diameter [m] of the laser spot for a given collector.

    The concentration ratio is the power-density ratio between collector
    and spot, so the spot area is the primary area divided by it.
    """
    a_spot = a_m1 / c_r
    return a_spot, math.sqrt(4.0 * a_spot / math.pi)


def input_power_density(
    sys_eff: float,
    c_r: float,
    r_a: float,
    ast: AsteroidProperties,
    tau: float = 1.0,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Absorbed laser flux on the spot [W/m^2] at heliocentric range r_a [km]."""
    if r_a <= 0.0:
        raise ValueError("heliocentric distance must be positive")
    return tau * sys_eff * c_r * (1.0 - ast.albedo) * consts.s0 * (consts.au / r_a) ** 2


def radiation_loss(t_surface: float, emiss_bb: float, sigma: float) -> float:
    """Black-body re-radiation flux [W/m^2] of the spot surface."""
    if t_surface < 0.0:
        raise ValueError("surface temperature must be non-negative")
    return sigma * emiss_bb * t_surface**4


def conduction_loss(ast: AsteroidProperties, t_exposure: float) -> float:
    """Transient conduction flux [W/m^2] a time t after exposure starts.

    The 1/sqrt(t) pole at t = 0 is integrable; callers integrating across
    it must use the analytic 2*sqrt(t) antiderivative.
    """
    if t_exposure <= 0.0:
        raise ValueError("exposure time must be positive (t=0 is a pole)")
    return (ast.t_subl - ast.t_0) * math.sqrt(
        ast.c_a * ast.k_a * ast.rho_a / (math.pi * t_exposure)
    )


def ellipsoid_radius(ast: AsteroidProperties, theta_va: float, t: float) -> float:
    """Radius of the spinning rotation ellipsoid under the spot [m]."""
    angle = ast.omega_a * t + theta_va
    return ast.a1 * ast.b1 / math.sqrt(
        (ast.b1 * math.cos(angle)) ** 2 + (ast.a1 * math.sin(angle)) ** 2
    )


def spot_vector(geom: StationGeometry, ast: AsteroidProperties, t: float) -> np.ndarray:
    """Hill-frame vector [m] from the laser spot to the spacecraft."""
    r_ell = ellipsoid_radius(ast, geom.theta_va, t)
    return np.array(
        [
            geom.x - r_ell * math.sin(geom.theta_va),
            geom.y - r_ell * math.cos(geom.theta_va),
            geom.z,
        ]
    )


def mass_flow_rate(
    p_in: float,
    ast: AsteroidProperties,
    geom: StationGeometry,
    n_sc: int,
    c_r: float,
    a_m1: float,
    t: float = 0.0,
) -> float:
    """Sublimated mass flow [kg/s] from the energy balance over the spot.

    Strips of surface at transverse offset y cross the spot with dwell
    time tau(y) = chord / v_rot. Net flux is clamped at zero wherever the
    conduction transient exceeds the available input, which makes the
    time integral per strip closed-form:

        integral max(0, P_net - C/sqrt(t)) dt over (0, tau]
            = P_net * (sqrt(tau) - sqrt(t*))^2   for tau > t* = (C/P_net)^2

    with P_net the input flux net of re-radiation at the sublimation
    temperature and C the conduction constant.
    """
    if p_in <= 0.0:
        return 0.0
    p_net = p_in - radiation_loss(ast.t_subl, ast.emiss_bb, DEFAULT_CONSTANTS.sigma)
    if p_net <= 0.0:
        return 0.0

    _, d_spot = spot_area(a_m1, c_r)
    v_rot = ast.omega_a * ellipsoid_radius(ast, geom.theta_va, t)
    c_cond = (ast.t_subl - ast.t_0) * math.sqrt(
        ast.c_a * ast.k_a * ast.rho_a / math.pi
    )
    sqrt_t_star = c_cond / p_net

    # only strips whose dwell exceeds the conduction threshold contribute;
    # restricting the quadrature to that support keeps the integrand smooth
    half = 0.5 * d_spot
    chord_min = 0.5 * v_rot * sqrt_t_star * sqrt_t_star
    if chord_min >= half:
        return 0.0
    y_star = math.sqrt(half * half - chord_min * chord_min)
    scale = 0.5 * y_star
    strip_integral = 0.0
    for node, weight in zip(_Y_NODES, _Y_WEIGHTS):
        y = scale * (node + 1.0)
        dwell = 2.0 * math.sqrt(half * half - y * y) / v_rot
        gain = math.sqrt(dwell) - sqrt_t_star
        if gain > 0.0:
            strip_integral += weight * gain * gain
    strip_integral *= scale * p_net
    return 2.0 * n_sc * v_rot * strip_integral / ast.e_sub


def ejecta_velocity(ast: AsteroidProperties, k_b: float = DEFAULT_CONSTANTS.k_b) -> float:
    """Mean thermal speed of the ablated gas [m/s]."""
    return math.sqrt(8.0 * k_b * ast.t_subl / (math.pi * ast.mol_mass))


def ablation_acceleration(
    mdot: float,
    vbar: float,
    ast: AsteroidProperties,
    eq: EquinoctialState,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> ThrustRTN:
    """Deflection acceleration from the ejecta momentum, tangent to the orbit.

    The modulus is Lambda * vbar * mdot / m_A (converted to km/s^2); the
    direction is the heliocentric velocity unit vector, i.e. beta = 0 and
    azimuth atan2(v_transversal, v_radial) in the RTN frame.
    """
    if mdot < 0.0:
        raise ValueError("mass flow must be non-negative")
    eps_si = consts.lambda_scatter * vbar * mdot / ast.mass
    sl, cl = math.sin(eq.ell), math.cos(eq.ell)
    v_r = eq.p2 * sl - eq.p1 * cl
    v_t = 1.0 + eq.p1 * sl + eq.p2 * cl
    return ThrustRTN(eps=eps_si / 1000.0, alpha=math.atan2(v_t, v_r), beta=0.0)


def plume_density(
    mdot: float,
    vbar: float,
    a_spot: float,
    d_spot: float,
    geom: StationGeometry,
    ast: AsteroidProperties,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
    t: float = 0.0,
    phi_max: float = math.pi / 2.0,
) -> float:
    """Ejecta gas density [kg/m^3] at the spacecraft station.

    The plume fills the half space over the spot like a rocket exhaust
    whose axis is the outward Sun-asteroid direction (the comet-tail
    analogy of the contamination model); phi is the angular separation of
    the station from that axis and the density falls to zero at the
    hemisphere edge phi_max.
    """
    if mdot <= 0.0:
        return 0.0
    r_vec = spot_vector(geom, ast, t)
    r_s_sc = float(np.linalg.norm(r_vec))
    cos_phi = r_vec[0] / r_s_sc if r_s_sc > 0.0 else 1.0
    phi = math.acos(max(-1.0, min(1.0, cos_phi)))
    if phi >= phi_max:
        return 0.0
    theta = math.pi * phi / (2.0 * phi_max)
    spread = (d_spot / (2.0 * r_s_sc + d_spot)) ** 2
    directivity = math.cos(theta) ** (2.0 / (consts.kappa - 1.0))
    return consts.j_c * (mdot / (vbar * a_spot)) * spread * directivity


def contamination_step(
    plume: PlumeState,
    rho_exp: float,
    vbar: float,
    psi_vf: float,
    dt: float,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
    exposed: bool = True,
) -> PlumeState:
    """Grow the contamination layer over a time step and update tau.

    The layer grows at twice the ejecta speed times the density ratio
    (vacuum expansion doubles the incident speed), projected by the view
    factor, and only while the station is on the exposed (x > 0) side.
    """
    if dt <= 0.0:
        raise ValueError("time step must be positive")
    if exposed and rho_exp > 0.0:
        growth_m_per_s = (2.0 * vbar * rho_exp / consts.rho_layer) * math.cos(psi_vf)
        plume.h_cond += growth_m_per_s * dt * 100.0  # m -> cm
        plume.tau = math.exp(-2.0 * consts.eta_abs * plume.h_cond)
    return plume


class ThrustModel:
    """Thrust callback for the trajectory propagator.

    Composes absorbed flux, sublimation mass flow and ejecta momentum into
    an RTN acceleration, and, when contamination is on, advances the
    mirror-degradation state across the arc just completed using the plume
    density of the previous evaluation (piecewise-constant, like the
    thrust itself). One instance owns one trajectory's PlumeState; build a
    fresh instance per propagation.
    """

    def __init__(
        self,
        design: DesignVector,
        tech: TechnologyParams,
        ast: AsteroidProperties,
        geom: StationGeometry,
        contamination_on: bool = False,
        consts: PhysicalConstants = DEFAULT_CONSTANTS,
        t_reference: float = 0.0,
    ):
        self.design = design
        self.ast = ast
        self.geom = geom
        self.consts = consts
        self.contamination_on = contamination_on
        self.plume = PlumeState()
        self.eta_sys = system_efficiency(tech)
        self.a_m1 = math.pi * design.d_m**2 / 4.0
        self.a_spot, self.d_spot = spot_area(self.a_m1, design.c_r)
        self.vbar = ejecta_velocity(ast, consts.k_b)
        self.t_reference = t_reference
        self._last_t: float | None = None
        self._last_rho: float = 0.0
        self._exposed = geom.x > 0.0

    def thrust_given_tau(
        self, eq: EquinoctialState, tau: float, elapsed: float
    ) -> tuple[ThrustRTN, float]:
        """Instantaneous thrust and mass flow for a given degradation factor."""
        p_in = input_power_density(
            self.eta_sys, self.design.c_r, eq.radius(), self.ast, tau, self.consts
        )
        mdot = mass_flow_rate(
            p_in, self.ast, self.geom, self.design.n_sc, self.design.c_r,
            self.a_m1, t=elapsed,
        )
        return ablation_acceleration(mdot, self.vbar, self.ast, eq, self.consts), mdot

    def layer_growth_rate(self, mdot: float, elapsed: float) -> float:
        """Contamination layer growth [cm/s] for an instantaneous mass flow."""
        if not self._exposed or mdot <= 0.0:
            return 0.0
        rho = plume_density(
            mdot, self.vbar, self.a_spot, self.d_spot, self.geom, self.ast,
            self.consts, t=elapsed,
        )
        return (2.0 * self.vbar * rho / self.consts.rho_layer) \
            * math.cos(self.geom.psi_vf) * 100.0

    def __call__(self, eq: EquinoctialState, t: float) -> ThrustRTN:
        elapsed = t - self.t_reference
        if self.contamination_on and self._last_t is not None and t > self._last_t:
            contamination_step(
                self.plume, self._last_rho, self.vbar, self.geom.psi_vf,
                t - self._last_t, self.consts, exposed=self._exposed,
            )
        tau = self.plume.tau if self.contamination_on else 1.0
        thrust, mdot = self.thrust_given_tau(eq, tau, elapsed)
        if self.contamination_on:
            self._last_rho = plume_density(
                mdot, self.vbar, self.a_spot, self.d_spot, self.geom, self.ast,
                self.consts, t=elapsed,
            )
            self._last_t = t
        return thrust
