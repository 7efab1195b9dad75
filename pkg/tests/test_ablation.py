"""Sublimation energy balance, plume and contamination models."""
import math

import numpy as np
import pytest

from neodeflect.constants import AU_KM, DEFAULT_CONSTANTS, MU_SUN
from neodeflect.ablation import (
    AsteroidProperties,
    PlumeState,
    StationGeometry,
    ThrustModel,
    ablation_acceleration,
    conduction_loss,
    contamination_step,
    ejecta_velocity,
    ellipsoid_radius,
    input_power_density,
    mass_flow_rate,
    plume_density,
    radiation_loss,
    spot_area,
    spot_vector,
)
from neodeflect.orbits import (
    KeplerianElements,
    equinoctial_to_cartesian,
    keplerian_to_equinoctial,
)
from neodeflect.sizing import DesignVector, TechnologyParams

import oracles

TABLE_AST = AsteroidProperties()  # reference physical values
GEOM = StationGeometry()


# ---------------------------------------------------------------------------
# Flux terms
# ---------------------------------------------------------------------------

def test_input_power_density_solar_constant():
    ast = AsteroidProperties(albedo=0.0)
    p = input_power_density(1.0, 1.0, AU_KM, ast, tau=1.0)
    assert p == pytest.approx(1367.0)


def test_input_power_density_total_reflection():
    ast = AsteroidProperties(albedo=0.999999)
    p = input_power_density(1.0, 1.0, AU_KM, ast)
    assert p == pytest.approx(0.0, abs=1e-2)


def test_input_power_density_inverse_square():
    ast = AsteroidProperties(albedo=0.0)
    p1 = input_power_density(0.25, 2000.0, AU_KM, ast)
    p2 = input_power_density(0.25, 2000.0, 2 * AU_KM, ast)
    assert p2 == pytest.approx(p1 / 4)


def test_input_power_density_tau_multiplies():
    p1 = input_power_density(0.25, 2000.0, AU_KM, TABLE_AST, tau=1.0)
    p2 = input_power_density(0.25, 2000.0, AU_KM, TABLE_AST, tau=0.37)
    assert p2 == pytest.approx(0.37 * p1)


def test_radiation_loss():
    sigma = DEFAULT_CONSTANTS.sigma
    assert radiation_loss(0.0, 1.0, sigma) == 0.0
    assert radiation_loss(1800.0, 1.0, sigma) == pytest.approx(5.952e5, rel=1e-3)
    assert radiation_loss(3600.0, 1.0, sigma) == pytest.approx(
        16 * radiation_loss(1800.0, 1.0, sigma)
    )


def test_conduction_loss_table_values():
    ast = AsteroidProperties(c_a=750.0, k_a=2.0, rho_a=2600.0, t_subl=1800.0, t_0=278.0)
    assert conduction_loss(ast, 1.0) == pytest.approx(1.696e6, rel=1e-3)
    assert conduction_loss(ast, 4.0) == pytest.approx(conduction_loss(ast, 1.0) / 2)
    near_zero = AsteroidProperties(t_subl=278.0 + 1e-9)
    assert conduction_loss(near_zero, 1.0) == pytest.approx(0.0, abs=1e-3)
    with pytest.raises(ValueError):
        conduction_loss(ast, 0.0)


# ---------------------------------------------------------------------------
# Mass flow
# ---------------------------------------------------------------------------

def mass_flow_oracle(p_in, ast, geom, n_sc, c_r, a_m1, n_y=1500, n_t=3000):
    """Fine-grid 2-D trapezoid evaluation of the clamped energy balance."""
    p_net = p_in - DEFAULT_CONSTANTS.sigma * ast.emiss_bb * ast.t_subl**4
    if p_net <= 0:
        return 0.0
    _, d_spot = spot_area(a_m1, c_r)
    v_rot = ast.omega_a * ellipsoid_radius(ast, geom.theta_va, 0.0)
    c_cond = (ast.t_subl - ast.t_0) * math.sqrt(ast.c_a * ast.k_a * ast.rho_a / math.pi)
    half = d_spot / 2
    ys = np.linspace(0.0, half, n_y)
    strip = np.zeros(n_y)
    for i, y in enumerate(ys):
        dwell = 2 * math.sqrt(max(half**2 - y**2, 0.0)) / v_rot
        if dwell <= 0:
            continue
        ts = np.linspace(dwell * 1e-9, dwell, n_t)
        integrand = np.maximum(p_net - c_cond / np.sqrt(ts), 0.0)
        strip[i] = np.trapezoid(integrand, ts)
    return 2 * n_sc * v_rot * np.trapezoid(strip, ys) / ast.e_sub


def reference_flux(tau=1.0):
    eta_sys = 0.6 * 0.41 * 0.95 * 0.95
    return input_power_density(eta_sys, 3000.0, AU_KM, TABLE_AST, tau=tau)


def test_mass_flow_matches_trapezoid_oracle():
    a_m1 = math.pi * 20.0**2 / 4
    p_in = reference_flux()
    got = mass_flow_rate(p_in, TABLE_AST, GEOM, 10, 3000.0, a_m1)
    want = mass_flow_oracle(p_in, TABLE_AST, GEOM, 10, 3000.0, a_m1)
    assert got > 0.0
    assert got == pytest.approx(want, rel=5e-3)


def test_mass_flow_oracle_various_regimes():
    a_m1 = math.pi * 12.0**2 / 4
    for scale in (0.8, 1.5, 3.0):
        p_in = reference_flux() * scale
        got = mass_flow_rate(p_in, TABLE_AST, GEOM, 3, 2000.0, a_m1)
        want = mass_flow_oracle(p_in, TABLE_AST, GEOM, 3, 2000.0, a_m1)
        assert got == pytest.approx(want, rel=5e-3)


def test_mass_flow_zero_below_radiation_threshold():
    q_rad = radiation_loss(TABLE_AST.t_subl, TABLE_AST.emiss_bb, DEFAULT_CONSTANTS.sigma)
    assert mass_flow_rate(0.99 * q_rad, TABLE_AST, GEOM, 10, 3000.0, 300.0) == 0.0
    assert mass_flow_rate(0.0, TABLE_AST, GEOM, 10, 3000.0, 300.0) == 0.0


def test_mass_flow_inverse_in_enthalpy():
    a_m1 = math.pi * 100.0
    p_in = reference_flux()
    base = mass_flow_rate(p_in, TABLE_AST, GEOM, 5, 3000.0, a_m1)
    doubled = AsteroidProperties(e_sub=2 * TABLE_AST.e_sub)
    assert mass_flow_rate(p_in, doubled, GEOM, 5, 3000.0, a_m1) == pytest.approx(
        base / 2, rel=1e-12
    )


def test_mass_flow_monotone_in_input_and_enthalpy():
    a_m1 = math.pi * 100.0
    flux = reference_flux()
    flows_p = [
        mass_flow_rate(f, TABLE_AST, GEOM, 5, 3000.0, a_m1)
        for f in np.linspace(0.5 * flux, 2 * flux, 10)
    ]
    assert all(b >= a for a, b in zip(flows_p, flows_p[1:]))
    flows_e = [
        mass_flow_rate(flux, AsteroidProperties(e_sub=e), GEOM, 5, 3000.0, a_m1)
        for e in np.linspace(1e6, 2e7, 10)
    ]
    assert all(b <= a for a, b in zip(flows_e, flows_e[1:]))


# ---------------------------------------------------------------------------
# Ejecta velocity and acceleration
# ---------------------------------------------------------------------------

def test_ejecta_velocity_forsterite():
    assert ejecta_velocity(AsteroidProperties(t_subl=1800.0)) == pytest.approx(520.0, rel=2e-3)


def test_ejecta_velocity_scalings():
    v0 = ejecta_velocity(TABLE_AST)
    assert ejecta_velocity(AsteroidProperties(t_subl=4 * 1800.0)) == pytest.approx(2 * v0)
    half_mol = AsteroidProperties(mol_mass=TABLE_AST.mol_mass / 2)
    assert ejecta_velocity(half_mol) == pytest.approx(math.sqrt(2) * v0)


def _state():
    return keplerian_to_equinoctial(
        KeplerianElements(0.9224 * AU_KM, 0.19, 0.058, 3.57, 2.21, 1.3)
    )


def test_ablation_acceleration_hand_value():
    ast = AsteroidProperties(m_a=2.7e10)
    thr = ablation_acceleration(1e-3, 520.0, ast, _state())
    assert thr.eps * 1000.0 == pytest.approx(1.23e-11, rel=5e-3)  # m/s^2
    assert thr.beta == 0.0


def test_ablation_acceleration_zero_flow():
    assert ablation_acceleration(0.0, 520.0, TABLE_AST, _state()).eps == 0.0


def test_ablation_acceleration_linearities():
    eq = _state()
    base = ablation_acceleration(1e-3, 520.0, AsteroidProperties(m_a=2.7e10), eq).eps
    tenx = ablation_acceleration(1e-3, 520.0, AsteroidProperties(m_a=2.7e11), eq).eps
    assert tenx == pytest.approx(base / 10, rel=1e-12)
    twice = ablation_acceleration(2e-3, 520.0, AsteroidProperties(m_a=2.7e10), eq).eps
    assert twice == pytest.approx(2 * base, rel=1e-12)


def test_ablation_acceleration_tangent_to_orbit():
    eq = _state()
    thr = ablation_acceleration(1e-3, 520.0, TABLE_AST, eq)
    r_vec, v_vec = equinoctial_to_cartesian(eq, MU_SUN)
    r_hat, t_hat, n_hat = oracles.rtn_basis(r_vec, v_vec)
    f = thr.rtn_vector()
    inertial = f[0] * r_hat + f[1] * t_hat + f[2] * n_hat
    cosang = np.dot(inertial, v_vec) / (np.linalg.norm(inertial) * np.linalg.norm(v_vec))
    assert cosang == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Spot geometry and plume
# ---------------------------------------------------------------------------

def test_ellipsoid_radius_sphere_and_phase():
    sphere = AsteroidProperties(a1=100.0, b1=100.0)
    for t in np.linspace(0, 1e5, 7):
        assert ellipsoid_radius(sphere, 0.3, t) == pytest.approx(100.0)
    ell = AsteroidProperties(a1=200.0, b1=100.0)
    assert ellipsoid_radius(ell, 0.0, 0.0) == pytest.approx(200.0)  # angle 0 -> a1


def test_spot_vector_example():
    ast = AsteroidProperties(a1=135.0, b1=135.0)
    geom = StationGeometry(x=2000.0, y=0.0, z=0.0, theta_va=0.0)
    vec = spot_vector(geom, ast, 0.0)
    np.testing.assert_allclose(vec, [2000.0, -135.0, 0.0], atol=1e-9)


def test_plume_density_edge_and_axis():
    ast = AsteroidProperties()
    a_spot, d_spot = spot_area(math.pi * 100.0, 3000.0)
    # station at the hemisphere edge (y axis, phi = pi/2): zero density
    edge = StationGeometry(x=0.0, y=2000.0, z=0.0, theta_va=0.0)
    assert plume_density(1e-3, 520.0, a_spot, d_spot, edge, ast) == 0.0
    # on axis at range d_spot/2 from the spot: quarter of the throat density
    r_ell = 135.0
    onaxis = StationGeometry(x=r_ell + d_spot / 2, y=0.0, z=0.0, theta_va=math.pi / 2)
    rho = plume_density(1e-3, 520.0, a_spot, d_spot, onaxis, ast)
    assert rho == pytest.approx(DEFAULT_CONSTANTS.j_c * 1e-3 / (4 * 520.0 * a_spot), rel=1e-9)


def test_plume_density_far_field_quadratic():
    ast = AsteroidProperties()
    a_spot, d_spot = spot_area(math.pi * 100.0, 3000.0)
    rhos = []
    for x in (1e5, 2e5):
        geom = StationGeometry(x=x, theta_va=math.pi / 2)
        rhos.append(plume_density(1e-3, 520.0, a_spot, d_spot, geom, ast))
    assert rhos[0] / rhos[1] == pytest.approx(4.0, rel=1e-2)


def test_plume_density_even_in_offset():
    ast = AsteroidProperties()
    a_spot, d_spot = spot_area(math.pi * 100.0, 3000.0)
    up = StationGeometry(x=2000.0, z=700.0, theta_va=math.pi / 2)
    down = StationGeometry(x=2000.0, z=-700.0, theta_va=math.pi / 2)
    assert plume_density(1e-3, 520.0, a_spot, d_spot, up, ast) == pytest.approx(
        plume_density(1e-3, 520.0, a_spot, d_spot, down, ast)
    )


# ---------------------------------------------------------------------------
# Contamination
# ---------------------------------------------------------------------------

def test_contamination_step_zero_density_no_change():
    plume = PlumeState()
    contamination_step(plume, 0.0, 520.0, 0.0, 1000.0)
    assert plume.h_cond == 0.0
    assert plume.tau == 1.0


def test_contamination_tau_analytic():
    plume = PlumeState()
    # choose density and dt so that 2*eta*h == 1
    eta = DEFAULT_CONSTANTS.eta_abs
    target_h_cm = 1.0 / (2 * eta)
    rho = 1e-12
    vbar = 500.0
    dt = (target_h_cm / 100.0) / (2 * vbar * rho / DEFAULT_CONSTANTS.rho_layer)
    contamination_step(plume, rho, vbar, 0.0, dt)
    assert plume.tau == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_contamination_not_exposed():
    plume = PlumeState()
    contamination_step(plume, 1e-10, 520.0, 0.0, 1e6, exposed=False)
    assert plume.tau == 1.0


def test_contamination_monotone():
    plume = PlumeState()
    taus = []
    for _ in range(50):
        contamination_step(plume, 2e-13, 520.0, 0.0, 5e4)
        taus.append(plume.tau)
    assert all(b <= a for a, b in zip(taus, taus[1:]))
    assert all(0 < t <= 1 for t in taus)


# ---------------------------------------------------------------------------
# Composed thrust model
# ---------------------------------------------------------------------------

DESIGN = DesignVector(d_m=20.0, n_sc=10, t_warn=8.0, c_r=3000.0)
TECH = TechnologyParams()


def test_thrust_model_mass_scaling_exact():
    eq = _state()
    big = AsteroidProperties(m_a=2.7e10)
    bigger = AsteroidProperties(m_a=2.7e11)
    f1 = ThrustModel(DESIGN, TECH, big, GEOM)(eq, 0.0)
    f2 = ThrustModel(DESIGN, TECH, bigger, GEOM)(eq, 0.0)
    assert f2.eps == pytest.approx(f1.eps / 10, rel=1e-12)


def test_thrust_model_reference_magnitude():
    """Full composition at 1 AU lands inside the expected amplitude band."""
    eq = keplerian_to_equinoctial(KeplerianElements(AU_KM, 0.0, 0.0, 0.0, 0.0, 0.0))
    f = ThrustModel(DESIGN, TECH, TABLE_AST, GEOM)(eq, 0.0)
    eps_m_s2 = f.eps * 1000.0
    assert 1e-12 <= eps_m_s2 <= 1e-7


def test_thrust_model_contamination_off_keeps_tau_one():
    eq = _state()
    model = ThrustModel(DESIGN, TECH, TABLE_AST, GEOM, contamination_on=False)
    for t in np.linspace(0, 1e7, 5):
        model(eq, t)
    assert model.plume.tau == 1.0


def test_thrust_model_contamination_decays_thrust():
    eq = keplerian_to_equinoctial(KeplerianElements(AU_KM, 0.0, 0.0, 0.0, 0.0, 0.0))
    model = ThrustModel(DESIGN, TECH, TABLE_AST, GEOM, contamination_on=True)
    eps0 = model(eq, 0.0).eps
    eps_series = [model(eq, t).eps for t in np.linspace(1e5, 3e7, 40)]
    assert eps0 > 0.0
    assert model.plume.tau < 1.0
    assert eps_series[-1] < eps0
