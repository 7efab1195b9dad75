"""Multi-objective design search and single-objective bound search.

The outer problem minimizes (formation mass, -impact parameter) over the
four-parameter design box with a memetic scheme: differential-evolution
social moves for most agents, coordinate pattern search for a few explorer
agents, and a nondominated archive collecting every evaluation. The inner
problem bounds an objective over the uncertain unit hypercube with a
restart differential evolution: when the population collapses it is
re-inflated around fresh random points while the incumbent best survives.

Determinism: every random draw flows from seeds derived with SeedSequence
from the run seed plus stable integer keys (quantized design coordinates,
objective index), so results do not depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .sizing import DesignVector


@dataclass(frozen=True)
class Objectives:
    """The two minimized figures: system mass [kg] and -b [km]."""

    m_sys: float
    neg_b: float

    def __post_init__(self):
        if not (math.isfinite(self.m_sys) and math.isfinite(self.neg_b)):
            raise ValueError("objectives must be finite")

    def as_tuple(self) -> tuple[float, float]:
        return (self.m_sys, self.neg_b)


def dominates(a: Objectives, b: Objectives) -> bool:
    """Strict Pareto dominance: no worse in both, strictly better in one."""
    return (
        a.m_sys <= b.m_sys
        and a.neg_b <= b.neg_b
        and (a.m_sys < b.m_sys or a.neg_b < b.neg_b)
    )


@dataclass(frozen=True)
class Individual:
    """A design with its objective values and, in evidence modes, the
    uncertain-space witnesses of the inner optimizations."""

    design: DesignVector
    objectives: Objectives
    witness_mass: np.ndarray | None = None
    witness_negb: np.ndarray | None = None


class ParetoArchive:
    """Nondominated set of individuals with crowding-based truncation."""

    def __init__(self, capacity: int = 200):
        self.capacity = capacity
        self.members: list[Individual] = []

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def add(self, candidate: Individual) -> bool:
        """Insert if nondominated; evict members the candidate dominates."""
        obj = candidate.objectives
        for m in self.members:
            if dominates(m.objectives, obj) or m.objectives.as_tuple() == obj.as_tuple():
                return False
        self.members = [m for m in self.members if not dominates(obj, m.objectives)]
        self.members.append(candidate)
        if len(self.members) > self.capacity:
            self._truncate()
        return True

    def _truncate(self) -> None:
        """Drop the most crowded member (extremes are always kept)."""
        pts = np.array([m.objectives.as_tuple() for m in self.members])
        order = np.argsort(pts[:, 0])
        span = np.maximum(pts.max(axis=0) - pts.min(axis=0), 1e-300)
        crowd = np.full(len(self.members), np.inf)
        for k in range(1, len(order) - 1):
            prev_pt, next_pt = pts[order[k - 1]], pts[order[k + 1]]
            crowd[order[k]] = np.sum(np.abs(next_pt - prev_pt) / span)
        drop = int(np.argmin(crowd))
        self.members.pop(drop)

    def objective_array(self) -> np.ndarray:
        return np.array([m.objectives.as_tuple() for m in self.members])

    def sorted_by_mass(self) -> list[Individual]:
        return sorted(self.members, key=lambda m: m.objectives.m_sys)


@dataclass(frozen=True)
class SolverConfig:
    """Budgets and population sizes of the outer and inner searches."""

    outer_budget: int = 30000
    outer_pop: int = 10
    explorers: int = 2
    inner_budget: int = 250
    inner_pop: int = 5
    seed: int = 0
    archive_capacity: int = 200

    def __post_init__(self):
        if self.outer_budget <= 0 or self.inner_budget <= 0:
            raise ValueError("budgets must be positive")
        if self.outer_pop < 4:
            raise ValueError("outer population must allow DE moves (>= 4)")
        if self.inner_pop < 4:
            raise ValueError("inner population must allow DE moves (>= 4)")
        if self.explorers >= self.outer_pop:
            raise ValueError("explorer count must be below the population size")


# ---------------------------------------------------------------------------
# Inner bound search: restart differential evolution on [0, 1]^d
# ---------------------------------------------------------------------------

@dataclass
class BoundResult:
    value: float
    point: np.ndarray
    evaluations: int


def inner_bound_search(
    f,
    dim: int,
    sense: str,
    budget: int,
    pop_size: int,
    rng: np.random.Generator,
    seeds: tuple[np.ndarray, ...] = (),
    f_weight: float = 0.8,
    cr: float = 0.9,
    collapse_tol: float = 1e-9,
) -> BoundResult:
    """Bound f over the unit hypercube by restart DE (rand/1/bin).

    ``sense`` is "min" or "max". Optional ``seeds`` are injected into the
    initial population (the paper's nominal point, cached witnesses). On
    population collapse the population re-inflates from fresh uniform
    draws with the incumbent best preserved. Deterministic for a fixed
    generator state.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    if budget < pop_size:
        raise ValueError("budget must cover at least one population evaluation")
    sign = 1.0 if sense == "min" else -1.0

    def h(u):
        return sign * f(u)

    pop = rng.random((pop_size, dim))
    for k, s in enumerate(seeds[: pop_size - 1]):
        pop[k] = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    fitness = np.array([h(u) for u in pop])
    evals = pop_size
    best_idx = int(np.argmin(fitness))
    best_u = pop[best_idx].copy()
    best_f = float(fitness[best_idx])

    while evals < budget:
        for i in range(pop_size):
            if evals >= budget:
                break
            choices = [k for k in range(pop_size) if k != i]
            a, b, c = rng.choice(choices, size=3, replace=False)
            mutant = pop[a] + f_weight * (pop[b] - pop[c])
            cross = rng.random(dim) < cr
            cross[rng.integers(dim)] = True
            trial = np.clip(np.where(cross, mutant, pop[i]), 0.0, 1.0)
            ft = h(trial)
            evals += 1
            if ft <= fitness[i]:
                pop[i] = trial
                fitness[i] = ft
                if ft < best_f:
                    best_f = float(ft)
                    best_u = trial.copy()
        # restart on collapse, keeping the incumbent best
        spread = float(np.max(np.ptp(pop, axis=0))) if pop_size > 1 else 0.0
        if spread < collapse_tol and evals < budget:
            pop = rng.random((pop_size, dim))
            pop[0] = best_u
            n_new = min(pop_size, budget - evals)
            for i in range(n_new):
                fitness[i] = h(pop[i])
            evals += n_new

    return BoundResult(value=sign * best_f, point=best_u, evaluations=evals)


# ---------------------------------------------------------------------------
# Outer memetic multi-objective search
# ---------------------------------------------------------------------------

GENE_NAMES = ("d_m", "n_sc", "t_warn", "c_r")


def decode_design(genes: np.ndarray, bounds: dict) -> DesignVector:
    """Map unit genes to a design; the spacecraft count rounds half-up."""
    lows = np.array([bounds[n][0] for n in GENE_NAMES], dtype=float)
    highs = np.array([bounds[n][1] for n in GENE_NAMES], dtype=float)
    x = lows + np.clip(genes, 0.0, 1.0) * (highs - lows)
    n_sc = int(min(max(math.floor(x[1] + 0.5), int(lows[1])), int(highs[1])))
    return DesignVector(d_m=float(x[0]), n_sc=n_sc, t_warn=float(x[2]), c_r=float(x[3]))


def quantize_design(design: DesignVector, grid: float = 1e-9) -> tuple[int, ...]:
    """Stable integer key of a design for caching and seed derivation."""
    return (
        int(round(design.d_m / grid)),
        design.n_sc,
        int(round(design.t_warn / grid)),
        int(round(design.c_r / grid)),
    )


def solve_moo(evaluate, bounds: dict, config: SolverConfig) -> ParetoArchive:
    """Memetic bi-objective minimization over the design box.

    ``evaluate(design) -> Individual`` supplies the objective values (and
    witnesses in evidence modes); evaluations are cached on the quantized
    design so revisits are free. DE social moves drive most agents;
    ``config.explorers`` agents poll coordinates with a shrinking step.
    """
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xD0]))
    archive = ParetoArchive(capacity=config.archive_capacity)
    cache: dict[tuple[int, ...], Individual] = {}
    state = {"evals": 0}

    def run(genes: np.ndarray) -> Individual:
        design = decode_design(genes, bounds)
        key = quantize_design(design)
        hit = cache.get(key)
        if hit is None:
            hit = evaluate(design)
            cache[key] = hit
            state["evals"] += 1
            archive.add(hit)
        return hit

    pop = rng.random((config.outer_pop, 4))
    inds = [run(g) for g in pop]
    steps = np.full(config.outer_pop, 0.25)

    while state["evals"] < config.outer_budget:
        progressed = False
        for i in range(config.outer_pop):
            if state["evals"] >= config.outer_budget:
                break
            if i < config.explorers:
                improved = False
                for d in rng.permutation(4):
                    for direction in (+1.0, -1.0):
                        if state["evals"] >= config.outer_budget:
                            break
                        trial = pop[i].copy()
                        trial[d] = min(max(trial[d] + direction * steps[i], 0.0), 1.0)
                        cand = run(trial)
                        if dominates(cand.objectives, inds[i].objectives):
                            pop[i], inds[i] = trial, cand
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    progressed = True
                else:
                    steps[i] *= 0.5
                    if steps[i] < 1e-4:
                        steps[i] = 0.25
                        pop[i] = rng.random(4)
                        inds[i] = run(pop[i])
            else:
                choices = [k for k in range(config.outer_pop) if k != i]
                a, b, c = rng.choice(choices, size=3, replace=False)
                f_w = rng.uniform(0.4, 1.0)
                mutant = pop[a] + f_w * (pop[b] - pop[c])
                cross = rng.random(4) < 0.9
                cross[rng.integers(4)] = True
                trial = np.clip(np.where(cross, mutant, pop[i]), 0.0, 1.0)
                cand = run(trial)
                if dominates(cand.objectives, inds[i].objectives):
                    pop[i], inds[i] = trial, cand
                    progressed = True
                elif not dominates(inds[i].objectives, cand.objectives):
                    if rng.random() < 0.5:
                        pop[i], inds[i] = trial, cand
        if not progressed and state["evals"] >= config.outer_budget:
            break
    return archive


@dataclass(frozen=True)
class LabeledPoint:
    """Archive member tagged with its cumulative-evidence meaning."""

    individual: Individual
    label: str
    value: float


def extract_extremes(archive: ParetoArchive, mode: str) -> list[LabeledPoint]:
    """Tag archive members with the evidence value their mode certifies.

    The worst-case front carries Belief 1 (thresholds at or above these
    objective values are certain); the best-case front carries
    Plausibility 0 (below these the mission is infeasible on the current
    body of knowledge).
    """
    if len(archive) == 0:
        raise ValueError("archive is empty")
    if mode == "minmax":
        label, value = "belief", 1.0
    elif mode in ("minmin", "minmin-margins"):
        label, value = "plausibility", 0.0
    else:
        raise ValueError(f"no evidence labeling for mode {mode!r}")
    return [LabeledPoint(m, label, value) for m in archive.sorted_by_mass()]
