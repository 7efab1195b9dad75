"""Analytic low-thrust propagation over finite arcs of true longitude.

Each arc assumes the thrust acceleration is constant in the RTN frame and
expands the five slow elements and the elapsed time to first order in the
thrust modulus about the Keplerian motion. The zero-order terms are the
unperturbed Keplerian arc (time of flight from the generalized Kepler
equation); the first-order terms are quadratures of the variational rates
along that Keplerian arc, evaluated spectrally on a small fixed set of
Chebyshev nodes (the cumulative integrals needed by the first-order time
term come from the Chebyshev antiderivative at the same nodes, so one
rates evaluation per arc serves everything).

Truncation error per arc is O(eps^2) in the thrust modulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _chebyshev_cumulative(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [-1, 1] (ascending) and the matrix mapping sampled values to
    the values of their antiderivative (zero at -1) at the same nodes."""
    j = np.arange(n + 1)
    nodes = -np.cos(math.pi * j / n)
    # coefficient fit: values -> Chebyshev coefficients
    vander = np.polynomial.chebyshev.chebvander(nodes, n)
    coeff_of_values = np.linalg.inv(vander)
    # antiderivative in coefficient space, constant fixed by F(-1) = 0
    anti = np.zeros((n + 2, n + 1))
    for k in range(n + 1):
        basis = np.zeros(n + 1)
        basis[k] = 1.0
        anti[:, k] = np.polynomial.chebyshev.chebint(basis, lbnd=-1.0)
    eval_nodes = np.polynomial.chebyshev.chebvander(nodes, n + 1)
    cumulative = eval_nodes @ anti @ coeff_of_values
    return nodes, cumulative


# order 6 resolves the smooth trig integrands to ~1e-10 of the first-order
# terms at the largest admissible arcs; the per-arc cost stays small
_CHEB_X, _CHEB_CUM = _chebyshev_cumulative(6)
_CHEB_W = _CHEB_CUM[-1]  # full-interval integral weights
_CHEB_MAP = 0.5 * (_CHEB_X + 1.0)
_CHEB_CUM_T = np.ascontiguousarray(_CHEB_CUM.T)

from .orbits import EquinoctialState, ThrustRTN, kepler_time_of_flight  # noqa: E402


class ArcOverflowError(RuntimeError):
    """Propagation exceeded the configured arc-count safety cap."""


@dataclass
class ArcControl:
    """Adaptive arc-length law state.

    dL = min(a_const * exp((-log10(eps) + log10(eps_max) + 1) / k_const),
    dl_max), where eps_max is the running maximum of the thrust modulus
    seen so far. Short arcs while the thrust is near its historical peak,
    capped arcs when it has decayed.
    """

    a_const: float = 0.05
    k_const: float = 2.0
    dl_max: float = 0.1
    eps_max_seen: float = field(default=0.0)

    def __post_init__(self):
        if self.a_const <= 0.0 or self.k_const <= 0.0:
            raise ValueError("a_const and k_const must be positive")
        if not 0.0 < self.dl_max <= 2.0 * math.pi:
            raise ValueError("dl_max must lie in (0, 2*pi]")


def arc_length_law(
    eps_now: float, eps_max: float, a_const: float, k_const: float, dl_max: float
) -> float:
    """The raw adaptive law: min(A*exp((-log10 e + log10 e_max + 1)/k), dL_max)."""
    if eps_now <= 0.0 or eps_max <= 0.0:
        return dl_max
    exponent = (-math.log10(eps_now) + math.log10(eps_max) + 1.0) / k_const
    return min(a_const * math.exp(exponent), dl_max)


def adaptive_arc_length(eps_now: float, ctrl: ArcControl) -> float:
    """Arc length [rad] for the current thrust level; updates the running max."""
    if eps_now < 0.0:
        raise ValueError("thrust modulus must be non-negative")
    ctrl.eps_max_seen = max(ctrl.eps_max_seen, eps_now)
    return arc_length_law(eps_now, ctrl.eps_max_seen, ctrl.a_const, ctrl.k_const, ctrl.dl_max)


def fpet_step(eq0: EquinoctialState, dl: float, f: ThrustRTN, mu: float) -> EquinoctialState:
    """Propagate one arc of true longitude with constant RTN thrust.

    Returns the state at eq0.ell + dl. The slow elements pick up eps times
    the first-order quadrature of the variational rates; the epoch advances
    by the exact Keplerian time of flight plus eps times the first-order
    time correction (which folds in both the normal-thrust perturbation of
    dL/dt and the drift of dt/dL through the perturbed elements).
    """
    if dl <= 0.0:
        raise ValueError("arc length must be positive")
    t00 = kepler_time_of_flight(eq0, dl, mu)
    if f.eps == 0.0:
        return EquinoctialState(
            a=eq0.a, p1=eq0.p1, p2=eq0.p2, q1=eq0.q1, q2=eq0.q2,
            ell=eq0.ell + dl, t=eq0.t + t00,
        )

    a, p1, p2, q1, q2 = eq0.a, eq0.p1, eq0.p2, eq0.q1, eq0.q2
    p = a * (1.0 - p1 * p1 - p2 * p2)
    h = math.sqrt(mu * p)
    half = 0.5 * dl

    ell = eq0.ell + dl * _CHEB_MAP
    sl = np.sin(ell)
    cl = np.cos(ell)
    phi = 1.0 + p1 * sl + p2 * cl
    r_h = (p / h) / phi  # r / h
    w = (p / phi) * r_h  # r^2/h = dt/dL on the Keplerian orbit

    cb = math.cos(f.beta)
    f_r = cb * math.cos(f.alpha)
    f_t = cb * math.sin(f.alpha)
    f_n = math.sin(f.beta)
    s2 = 1.0 + q1 * q1 + q2 * q2
    qterm = (q1 * cl - q2 * sl) * f_n

    # element rates per unit eps, divided by the longitude rate (times w)
    g = np.empty((5, ell.size))
    g[0] = (2.0 * a * a / h) * ((p2 * sl - p1 * cl) * f_r + phi * f_t)
    g[1] = r_h * (-phi * cl * f_r + (p1 + (1.0 + phi) * sl) * f_t - p2 * qterm)
    g[2] = r_h * (phi * sl * f_r + (p2 + (1.0 + phi) * cl) * f_t + p1 * qterm)
    half_rh_s2 = (0.5 * s2) * r_h * f_n
    g[3] = half_rh_s2 * sl
    g[4] = half_rh_s2 * cl
    g *= w

    # running first-order element integrals y1 at every node via the
    # spectral antiderivative; the last node is the end of the arc
    y1_nodes = half * (g @ _CHEB_CUM_T)
    y1 = y1_nodes[:, -1]

    t11_integrand = (
        (1.5 / a) * w * y1_nodes[0]
        + w * ((-3.0 * a * p1 / p) - 2.0 * sl / phi) * y1_nodes[1]
        + w * ((-3.0 * a * p2 / p) - 2.0 * cl / phi) * y1_nodes[2]
        - r_h * qterm * w * w
    )
    t11 = half * float(t11_integrand @ _CHEB_W)

    eps = f.eps
    return EquinoctialState(
        a=a + eps * y1[0],
        p1=p1 + eps * y1[1],
        p2=p2 + eps * y1[2],
        q1=q1 + eps * y1[3],
        q2=q2 + eps * y1[4],
        ell=eq0.ell + dl,
        t=eq0.t + t00 + eps * t11,
    )


@dataclass
class Trajectory:
    """Sequence of arc-boundary states plus the thrust modulus of each arc."""

    states: list[EquinoctialState]
    eps_history: list[float]

    @property
    def final(self) -> EquinoctialState:
        return self.states[-1]

    @property
    def n_arcs(self) -> int:
        return len(self.eps_history)


def _land_on_epoch(
    eq: EquinoctialState, f: ThrustRTN, mu: float, dl_hi: float, t_end: float,
    tol_s: float = 1.0, max_iter: int = 80,
) -> EquinoctialState:
    """Shorten the final arc by bisection on dL to land on t_end within tol_s."""
    lo, hi = 0.0, dl_hi
    best = fpet_step(eq, dl_hi, f, mu)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        trial = fpet_step(eq, mid, f, mu)
        if abs(trial.t - t_end) <= tol_s:
            return trial
        if trial.t > t_end:
            hi = mid
            best = trial
        else:
            lo = mid
    return best


def _midpoint_state(eq: EquinoctialState, dl: float, mu: float) -> EquinoctialState:
    """Zero-order Keplerian prediction of the state half an arc ahead."""
    half = 0.5 * dl
    return EquinoctialState(
        a=eq.a, p1=eq.p1, p2=eq.p2, q1=eq.q1, q2=eq.q2,
        ell=eq.ell + half, t=eq.t + kepler_time_of_flight(eq, half, mu),
    )


def propagate_trajectory(
    eq0: EquinoctialState,
    thrust_callback,
    t_end: float,
    ctrl: ArcControl,
    mu: float,
    record: bool = True,
    max_arcs: int = 200000,
    thrust_sample: str = "midpoint",
) -> Trajectory:
    """Propagate under a thrust law until the epoch reaches t_end.

    ``thrust_callback(state, t)`` is evaluated once at the start of every
    arc and the returned RTN acceleration is held constant across it. With
    ``thrust_sample="midpoint"`` (the default) the callback receives the
    Keplerian prediction of the mid-arc state, which represents the arc
    far better than the left endpoint and keeps the thrust-profile
    sampling error second order in the arc length; "start" evaluates at
    the current state. Arc lengths follow the adaptive law in ``ctrl``;
    the final arc is shortened by bisection to land on t_end within one
    second.
    """
    if t_end <= eq0.t:
        raise ValueError("t_end must be later than the initial epoch")
    if thrust_sample not in ("midpoint", "start"):
        raise ValueError("thrust_sample must be 'midpoint' or 'start'")
    midpoint = thrust_sample == "midpoint"
    states = [eq0]
    eps_history: list[float] = []
    eq = eq0
    arcs = 0
    dl_guess = ctrl.dl_max
    while t_end - eq.t > 1.0:
        if arcs >= max_arcs:
            raise ArcOverflowError(f"exceeded {max_arcs} arcs before reaching t_end")
        if midpoint:
            probe = _midpoint_state(eq, dl_guess, mu)
            f = thrust_callback(probe, probe.t)
            dl = adaptive_arc_length(f.eps, ctrl)
            if not 0.5 <= dl / dl_guess <= 2.0:
                # arc length moved a lot: re-sample at the corrected midpoint
                probe = _midpoint_state(eq, dl, mu)
                f = thrust_callback(probe, probe.t)
                dl = adaptive_arc_length(f.eps, ctrl)
        else:
            f = thrust_callback(eq, eq.t)
            dl = adaptive_arc_length(f.eps, ctrl)
        dl_guess = dl
        nxt = fpet_step(eq, dl, f, mu)
        if nxt.t > t_end:
            nxt = _land_on_epoch(eq, f, mu, dl, t_end)
        eq = nxt
        arcs += 1
        eps_history.append(f.eps)
        if record:
            states.append(eq)
    if not record:
        states.append(eq)
    return Trajectory(states=states, eps_history=eps_history)
