"""Scenario ingestion, end-to-end deflection model and reference cross-checks.

A scenario bundles the reference orbits, the asteroid and technology
baselines, the evidence document, margins, bounds and solver settings. The
deflection model composes the trajectory, ablation and sizing chains into
the two mission objectives (formation mass, impact parameter) for a design
point and a value of the uncertain parameters, either fixed or supplied by
the evidence-space searches.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from .ablation import AsteroidProperties, StationGeometry, ThrustModel
from .constants import AU_KM, MU_SUN, YEAR_S, DEFAULT_CONSTANTS
from .evidence import FocalStructure, fuse_all, load_expert_opinions
from .fpet import ArcControl, propagate_trajectory
from .orbits import (
    EquinoctialState,
    KeplerianElements,
    ThrustRTN,
    equinoctial_to_keplerian,
    earth_miss_distance,
    gauss_rhs,
    impact_parameter,
    keplerian_to_equinoctial,
    propagate_keplerian,
)
from .search import (
    Individual,
    Objectives,
    SolverConfig,
    inner_bound_search,
    quantize_design,
)
from .sizing import (
    DesignVector,
    Margins,
    TABLE_MARGINS,
    TechnologyParams,
    UNIT_MARGINS,
    size_spacecraft,
)

# Dimension order of the uncertain space: five asteroid physical
# parameters, then five spacecraft technology parameters.
UNCERTAIN_NAMES = (
    "c_a", "k_a", "rho_a", "t_sub", "e_sub",
    "eta_l", "eta_sa", "rho_m", "rho_l", "rho_r",
)
PHYSICAL_NAMES = UNCERTAIN_NAMES[:5]
TECH_NAMES = UNCERTAIN_NAMES[5:]

_AST_FIELD = {"c_a": "c_a", "k_a": "k_a", "rho_a": "rho_a",
              "t_sub": "t_subl", "e_sub": "e_sub"}

MODES = ("deterministic", "minmin", "minmin-margins", "minmax",
         "bpcurve", "sensitivity", "propagate")


class ScenarioError(ValueError):
    """Scenario document failed validation."""


class CalibrationError(RuntimeError):
    """No intercept phasing found within the scan window."""


_ELEMENTS_SCHEMA = {
    "type": "object",
    "required": ["a_km", "e", "i_rad", "raan_rad", "argp_rad", "theta_rad"],
    "properties": {name: {"type": "number"} for name in
                   ("a_km", "e", "i_rad", "raan_rad", "argp_rad", "theta_rad")},
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "mu_sun_km3s2", "t_impact_s", "asteroid", "earth",
        "asteroid_properties", "technology", "margins", "design_bounds",
        "arc_control", "station", "contamination", "fixed_uncertain",
        "expert_opinions_file", "solver", "seed",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "mu_sun_km3s2": {"type": "number", "exclusiveMinimum": 0},
        "t_impact_s": {"type": "number", "exclusiveMinimum": 0},
        "asteroid": _ELEMENTS_SCHEMA,
        "earth": _ELEMENTS_SCHEMA,
        "asteroid_properties": {"type": "object"},
        "technology": {"type": "object"},
        "margins": {
            "type": "object",
            "required": ["k_dry", "k_s", "k_m", "k_l"],
        },
        "design_bounds": {
            "type": "object",
            "required": ["d_m", "n_sc", "t_warn", "c_r"],
        },
        "arc_control": {
            "type": "object",
            "required": ["a_const", "k_const", "dl_max"],
        },
        "station": {"type": "object"},
        "contamination": {"type": "boolean"},
        "fixed_uncertain": {
            "type": "object",
            "required": list(UNCERTAIN_NAMES),
        },
        "expert_opinions_file": {"type": "string"},
        "solver": {"type": "object"},
        "seed": {"type": "integer"},
    },
}


@dataclass(frozen=True)
class Scenario:
    """Complete description of one deflection campaign study."""

    mu: float
    t_impact: float
    asteroid: KeplerianElements
    earth: KeplerianElements
    asteroid_properties: AsteroidProperties
    technology: TechnologyParams
    margins: Margins
    design_bounds: dict
    arc_control: ArcControl
    station: StationGeometry
    contamination: bool
    fixed_uncertain: dict
    expert_opinions_file: str
    solver: SolverConfig
    seed: int
    source_path: Path | None = None

    def expert_opinions_path(self) -> Path:
        p = Path(self.expert_opinions_file)
        if not p.is_absolute() and self.source_path is not None:
            p = self.source_path.parent / p
        return p


def _elements_from_dict(d: dict) -> KeplerianElements:
    return KeplerianElements(
        a=d["a_km"], e=d["e"], i=d["i_rad"],
        raan=d["raan_rad"], argp=d["argp_rad"], theta=d["theta_rad"],
    )


def _elements_to_dict(k: KeplerianElements) -> dict:
    return {
        "a_km": k.a, "e": k.e, "i_rad": k.i,
        "raan_rad": k.raan, "argp_rad": k.argp, "theta_rad": k.theta,
    }


def scenario_from_dict(doc: dict, source_path: Path | None = None) -> Scenario:
    """Build a validated scenario from a parsed JSON document."""
    if jsonschema is not None:
        try:
            jsonschema.validate(doc, SCENARIO_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ScenarioError(f"scenario failed schema validation: {exc.message}") from exc
    try:
        ast_props = AsteroidProperties(**doc["asteroid_properties"])
        tech = TechnologyParams(**doc["technology"])
        margins = Margins(**doc["margins"])
        arc = ArcControl(**doc["arc_control"])
        station = StationGeometry(**doc["station"])
        solver = SolverConfig(seed=doc["seed"], **doc["solver"])
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario block: {exc}") from exc
    missing = set(UNCERTAIN_NAMES) - set(doc["fixed_uncertain"])
    if missing:
        raise ScenarioError(f"fixed_uncertain misses parameters: {sorted(missing)}")
    return Scenario(
        mu=doc["mu_sun_km3s2"],
        t_impact=doc["t_impact_s"],
        asteroid=_elements_from_dict(doc["asteroid"]),
        earth=_elements_from_dict(doc["earth"]),
        asteroid_properties=ast_props,
        technology=tech,
        margins=margins,
        design_bounds={k: tuple(v) for k, v in doc["design_bounds"].items()},
        arc_control=arc,
        station=station,
        contamination=doc["contamination"],
        fixed_uncertain=dict(doc["fixed_uncertain"]),
        expert_opinions_file=doc["expert_opinions_file"],
        solver=solver,
        seed=doc["seed"],
        source_path=source_path,
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "schema_version": 1,
        "mu_sun_km3s2": s.mu,
        "t_impact_s": s.t_impact,
        "asteroid": _elements_to_dict(s.asteroid),
        "earth": _elements_to_dict(s.earth),
        "asteroid_properties": {
            "c_a": s.asteroid_properties.c_a,
            "k_a": s.asteroid_properties.k_a,
            "rho_a": s.asteroid_properties.rho_a,
            "t_subl": s.asteroid_properties.t_subl,
            "e_sub": s.asteroid_properties.e_sub,
            "t_0": s.asteroid_properties.t_0,
            "albedo": s.asteroid_properties.albedo,
            "emiss_bb": s.asteroid_properties.emiss_bb,
            "a1": s.asteroid_properties.a1,
            "b1": s.asteroid_properties.b1,
            "omega_a": s.asteroid_properties.omega_a,
            "m_a": s.asteroid_properties.m_a,
            "mol_mass": s.asteroid_properties.mol_mass,
        },
        "technology": {
            name: getattr(s.technology, name)
            for name in ("eta_l", "eta_sa", "eta_p", "emiss_m", "rho_r", "rho_l",
                         "rho_m", "rho_s", "mf_c", "mf_p", "m_bus", "c_geo",
                         "t_rad", "emiss_rad")
        },
        "margins": {name: getattr(s.margins, name)
                    for name in ("k_dry", "k_s", "k_m", "k_l")},
        "design_bounds": {k: list(v) for k, v in s.design_bounds.items()},
        "arc_control": {
            "a_const": s.arc_control.a_const,
            "k_const": s.arc_control.k_const,
            "dl_max": s.arc_control.dl_max,
        },
        "station": {
            "x": s.station.x, "y": s.station.y, "z": s.station.z,
            "theta_va": s.station.theta_va, "psi_vf": s.station.psi_vf,
        },
        "contamination": s.contamination,
        "fixed_uncertain": dict(s.fixed_uncertain),
        "expert_opinions_file": s.expert_opinions_file,
        "solver": {
            name: getattr(s.solver, name)
            for name in ("outer_budget", "outer_pop", "explorers",
                         "inner_budget", "inner_pop", "archive_capacity")
        },
        "seed": s.seed,
    }


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc, source_path=path)


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def reference_scenario_path() -> Path:
    return Path(__file__).parent / "data" / "reference_scenario.json"


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

def nominal_miss(scenario: Scenario, theta0: float | None = None) -> float:
    """b-plane miss [km] of the unperturbed asteroid at the impact epoch."""
    kep = scenario.asteroid if theta0 is None else replace(scenario.asteroid, theta=theta0)
    ast = propagate_keplerian(keplerian_to_equinoctial(kep), scenario.t_impact, scenario.mu)
    earth = propagate_keplerian(
        keplerian_to_equinoctial(scenario.earth), scenario.t_impact, scenario.mu
    )
    return earth_miss_distance(ast, earth, scenario.mu)


def _golden_min(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Golden-section minimization with absolute width control.

    The miss distance is V-shaped (|linear|) at an exact intercept, which
    defeats parabolic steps and relative-tolerance stops; plain golden
    section converges regardless.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def calibrate_scenario(scenario: Scenario, tol_km: float = 1.0) -> Scenario:
    """Phase the asteroid so its unperturbed orbit hits the Earth b-plane.

    One-dimensional search on the true anomaly at epoch: a coarse scan over
    a full revolution brackets the encounter, then a golden-section
    refinement drives the miss below ``tol_km``. Raises CalibrationError
    when no phasing achieves it (the orbit geometry simply never meets the
    Earth).
    """
    thetas = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    misses = [nominal_miss(scenario, th) for th in thetas]
    k = int(np.argmin(misses))
    span = 2.0 * math.pi / 720
    theta_star, best = _golden_min(
        lambda th: nominal_miss(scenario, th),
        thetas[k] - 2 * span, thetas[k] + 2 * span, xtol=1e-13,
    )
    if best > tol_km:
        raise CalibrationError(
            f"no intercept phasing found: best miss {best:.3e} km over a full scan"
        )
    return replace(
        scenario, asteroid=replace(scenario.asteroid, theta=theta_star % (2.0 * math.pi))
    )


# ---------------------------------------------------------------------------
# End-to-end model
# ---------------------------------------------------------------------------

def apply_uncertain(
    scenario: Scenario, u: dict
) -> tuple[AsteroidProperties, TechnologyParams]:
    """Override the ten uncertain fields of the scenario baselines."""
    ast_over = {_AST_FIELD[k]: u[k] for k in PHYSICAL_NAMES if k in u}
    tech_over = {k: u[k] for k in TECH_NAMES if k in u}
    ast = replace(scenario.asteroid_properties, **ast_over)
    tech = replace(scenario.technology, **tech_over)
    return ast, tech


@dataclass
class ModelEvaluation:
    """One full evaluation of the mission objectives."""

    m_sys: float
    b: float
    budget: object
    n_arcs: int


class DeflectionModel:
    """Objectives (m_sys, b) as functions of the design and uncertain vectors.

    The asteroid is released from its calibrated orbit a warning time
    before impact, pushed by the ablation thrust until the impact epoch,
    and the resulting b-plane deviation is measured against the
    unperturbed orbit. The formation is sized at the deflection-start
    heliocentric distance.
    """

    def __init__(self, scenario: Scenario, contamination: bool, margins: Margins):
        self.scenario = scenario
        self.contamination = contamination
        self.margins = margins
        self.mu = scenario.mu
        self.asteroid_eq = keplerian_to_equinoctial(scenario.asteroid)
        self.earth_eq = keplerian_to_equinoctial(scenario.earth)
        self.nominal_at_impact = propagate_keplerian(
            self.asteroid_eq, scenario.t_impact, self.mu
        )
        self.earth_at_impact = propagate_keplerian(
            self.earth_eq, scenario.t_impact, self.mu
        )

    def start_state(self, t_warn_years: float) -> EquinoctialState:
        t_start = self.scenario.t_impact - t_warn_years * YEAR_S
        return propagate_keplerian(self.asteroid_eq, t_start, self.mu)

    def solar_flux_at_start(self, t_warn_years: float) -> float:
        r_a = self.start_state(t_warn_years).radius()
        return DEFAULT_CONSTANTS.s0 * (AU_KM / r_a) ** 2

    def mass_only(self, design: DesignVector, u: dict) -> float:
        """Formation mass [kg]; no propagation involved."""
        _, tech = apply_uncertain(self.scenario, u)
        flux = self.solar_flux_at_start(design.t_warn)
        return size_spacecraft(design, tech, self.margins, flux).m_sys

    def evaluate(self, design: DesignVector, u: dict) -> ModelEvaluation:
        """Both objectives for one design and uncertain point."""
        ast, tech = apply_uncertain(self.scenario, u)
        t_start = self.scenario.t_impact - design.t_warn * YEAR_S
        eq_start = propagate_keplerian(self.asteroid_eq, t_start, self.mu)
        thrust = ThrustModel(
            design, tech, ast, self.scenario.station,
            contamination_on=self.contamination, t_reference=t_start,
        )
        ctrl = replace(self.scenario.arc_control, eps_max_seen=0.0)
        traj = propagate_trajectory(
            eq_start, thrust, self.scenario.t_impact, ctrl, self.mu, record=False
        )
        # exact two-body coast closes the <= 1 s landing gap so the b-plane
        # difference is not polluted by along-track epoch error
        deviated = propagate_keplerian(traj.final, self.scenario.t_impact, self.mu)
        res = impact_parameter(
            deviated, self.nominal_at_impact, self.earth_at_impact,
            self.scenario.t_impact, self.mu,
        )
        flux = self.solar_flux_at_start(design.t_warn)
        budget = size_spacecraft(design, tech, self.margins, flux)
        return ModelEvaluation(
            m_sys=budget.m_sys, b=res.b, budget=budget, n_arcs=traj.n_arcs
        )

    def negb(self, design: DesignVector, u: dict) -> float:
        return -self.evaluate(design, u).b


def evidence_structure(scenario: Scenario) -> FocalStructure:
    """Fused ten-parameter evidence structure of the scenario."""
    opinions = load_expert_opinions(scenario.expert_opinions_path())
    return FocalStructure(fuse_all(opinions, list(UNCERTAIN_NAMES)))


def uncertain_dict(structure: FocalStructure, u_vec: np.ndarray) -> dict:
    values = structure.unit_to_physical(u_vec)
    return dict(zip(structure.names, values))


def nominal_unit_image(structure: FocalStructure, fixed: dict) -> np.ndarray:
    """Unit-cube image of the reference uncertain values (for seeding)."""
    return structure.physical_to_unit([fixed[name] for name in structure.names])


# ---------------------------------------------------------------------------
# Mode evaluators for the outer search
# ---------------------------------------------------------------------------

def deterministic_evaluator(model: DeflectionModel):
    """J(x) at the fixed reference uncertain values."""
    fixed = model.scenario.fixed_uncertain

    def evaluate(design: DesignVector) -> Individual:
        ev = model.evaluate(design, fixed)
        return Individual(design, Objectives(ev.m_sys, -ev.b))

    return evaluate


def _inner_rng(seed: int, design: DesignVector, tag: int) -> np.random.Generator:
    """Order-independent generator keyed on the design and objective."""
    key = [seed, tag, *(abs(q) for q in quantize_design(design))]
    return np.random.default_rng(np.random.SeedSequence(key))


def evidence_evaluator(
    model: DeflectionModel,
    structure: FocalStructure,
    config: SolverConfig,
    sense: str,
):
    """J(x) from two independent inner bound searches over the unit cube.

    The nominal point's unit image is injected into both inner populations,
    which pins the found bounds on the correct side of the deterministic
    values by construction.
    """
    seed_point = nominal_unit_image(structure, model.scenario.fixed_uncertain)

    def evaluate(design: DesignVector) -> Individual:
        mass_res = inner_bound_search(
            lambda u: model.mass_only(design, uncertain_dict(structure, u)),
            structure.dim, sense, config.inner_budget, config.inner_pop,
            _inner_rng(config.seed, design, 1), seeds=(seed_point,),
        )
        negb_res = inner_bound_search(
            lambda u: -model.evaluate(design, uncertain_dict(structure, u)).b,
            structure.dim, sense, config.inner_budget, config.inner_pop,
            _inner_rng(config.seed, design, 2), seeds=(seed_point,),
        )
        return Individual(
            design,
            Objectives(mass_res.value, negb_res.value),
            witness_mass=mass_res.point,
            witness_negb=negb_res.point,
        )

    return evaluate


def evaluate_minmax(
    design: DesignVector,
    model: DeflectionModel,
    structure: FocalStructure,
    config: SolverConfig,
) -> Individual:
    """Worst-case objectives of one design (two independent maximizations)."""
    return evidence_evaluator(model, structure, config, "max")(design)


def evaluate_minmin(
    design: DesignVector,
    model: DeflectionModel,
    structure: FocalStructure,
    config: SolverConfig,
) -> Individual:
    """Best-case objectives of one design (two independent minimizations)."""
    return evidence_evaluator(model, structure, config, "min")(design)


def make_model(scenario: Scenario, mode: str, contamination: bool) -> DeflectionModel:
    """Model with the margins policy the mode prescribes."""
    if mode in ("deterministic", "minmin-margins"):
        margins = scenario.margins
    elif mode in ("minmin", "minmax"):
        margins = UNIT_MARGINS
    else:
        raise ValueError(f"unknown optimization mode {mode!r}")
    return DeflectionModel(scenario, contamination, margins)


# ---------------------------------------------------------------------------
# Runge-Kutta reference propagation (cross-check route)
# ---------------------------------------------------------------------------

def rk_propagate(
    scenario: Scenario,
    design: DesignVector,
    u: dict,
    contamination: bool,
    rtol: float = 1e-10,
) -> EquinoctialState:
    """Numerically integrate the variational equations with the ablation
    model evaluated continuously (the expensive reference the arc-wise
    analytic propagation is benchmarked against).

    The contamination layer rides along as an extra state so adaptive
    stepping sees a smooth right-hand side.
    """
    ast, tech = apply_uncertain(scenario, u)
    t_start = scenario.t_impact - design.t_warn * YEAR_S
    eq0 = propagate_keplerian(
        keplerian_to_equinoctial(scenario.asteroid), t_start, scenario.mu
    )
    thrust_model = ThrustModel(
        design, tech, ast, scenario.station,
        contamination_on=contamination, t_reference=t_start,
    )
    mu = scenario.mu

    def rhs(t, y):
        state = EquinoctialState(
            a=y[0], p1=y[1], p2=y[2], q1=y[3], q2=y[4], ell=y[5], t=t
        )
        tau = math.exp(-2.0 * DEFAULT_CONSTANTS.eta_abs * y[6]) if contamination else 1.0
        thrust, mdot = thrust_model.thrust_given_tau(state, tau, t - t_start)
        rates = gauss_rhs(state, thrust, mu)
        dh = thrust_model.layer_growth_rate(mdot, t - t_start) if contamination else 0.0
        return [*rates, dh]

    y0 = [eq0.a, eq0.p1, eq0.p2, eq0.q1, eq0.q2, eq0.ell, 0.0]
    sol = solve_ivp(
        rhs, (t_start, scenario.t_impact), y0, method="DOP853",
        rtol=rtol, atol=[1e-3, 1e-12, 1e-12, 1e-12, 1e-12, 1e-10, 1e-12],
    )
    if not sol.success:
        raise RuntimeError(f"reference integration failed: {sol.message}")
    yf = sol.y[:, -1]
    return EquinoctialState(
        a=yf[0], p1=yf[1], p2=yf[2], q1=yf[3], q2=yf[4], ell=yf[5],
        t=scenario.t_impact,
    )


def rk_impact_parameter(
    scenario: Scenario, design: DesignVector, u: dict, contamination: bool,
    rtol: float = 1e-10,
) -> float:
    """b [km] of the deviated orbit from the reference integration route."""
    deviated = rk_propagate(scenario, design, u, contamination, rtol)
    nominal = propagate_keplerian(
        keplerian_to_equinoctial(scenario.asteroid), scenario.t_impact, scenario.mu
    )
    earth = propagate_keplerian(
        keplerian_to_equinoctial(scenario.earth), scenario.t_impact, scenario.mu
    )
    return impact_parameter(
        deviated, nominal, earth, scenario.t_impact, scenario.mu
    ).b
