"""Dempster-Shafer structures over interval-valued uncertain parameters.

Each uncertain parameter carries a set of (possibly overlapping or
disconnected) intervals with basic probability assignments summing to one.
Multi-expert interval opinions are fused by averaging their lower
triangular bound matrices. The joint structure is the Cartesian product
of the per-parameter intervals; every focal element is an axis-aligned box
whose BPA is the product of its constituents.

For optimization the focal elements are collected through a per-dimension
affine map into the unit hypercube, where they tile [0, 1]^d without
overlap: dimension i is split into contiguous cells whose widths equal the
interval BPAs. Belief and Plausibility of threshold propositions follow
from per-box objective bounds, either by full enumeration or by the
recursive binary partitioning of the hypercube.
"""
from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BPA_SUM_TOL = 1e-9


class FusionError(ValueError):
    """Raised when expert opinions cannot be fused into a valid structure."""


class PartitionBudgetError(RuntimeError):
    """The binary-tree refinement ran out of its partition budget."""


@dataclass(frozen=True)
class UncertainInterval:
    """One interval of evidence with its basic probability assignment."""

    lo: float
    hi: float
    bpa: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")
        if not 0.0 < self.bpa <= 1.0:
            raise ValueError(f"BPA must lie in (0, 1], got {self.bpa}")


@dataclass(frozen=True)
class ParameterBPA:
    """All evidence intervals of a single uncertain parameter."""

    name: str
    intervals: tuple[UncertainInterval, ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError(f"parameter {self.name} has no intervals")
        total = math.fsum(iv.bpa for iv in self.intervals)
        if abs(total - 1.0) > BPA_SUM_TOL:
            raise ValueError(
                f"BPAs of parameter {self.name} sum to {total}, expected 1"
            )

    @property
    def hull(self) -> tuple[float, float]:
        return (min(iv.lo for iv in self.intervals), max(iv.hi for iv in self.intervals))


@dataclass(frozen=True)
class ExpertOpinion:
    """One expert's interval estimates; parameters not addressed are absent."""

    expert_id: str
    weight: float = 1.0
    parameters: dict[str, tuple[UncertainInterval, ...]] = field(default_factory=dict)

    def addresses(self, parameter: str) -> bool:
        return parameter in self.parameters and len(self.parameters[parameter]) > 0


def fuse_experts(opinions: list[ExpertOpinion], parameter: str) -> ParameterBPA:
    """Fuse multi-expert interval opinions for one parameter.

    Builds each expert's lower-triangular matrix over the union of all
    proposed lower and upper bounds, then averages the matrices weighted
    by the expert weights. Experts who do not address the parameter are
    excluded from the averaging count, and the result is renormalized so
    the BPAs sum to one (exact already when all weights are equal).
    """
    active = [op for op in opinions if op.addresses(parameter)]
    if not active:
        raise FusionError(f"no expert addresses parameter {parameter!r}")

    lowers = sorted({iv.lo for op in active for iv in op.parameters[parameter]})
    uppers = sorted({iv.hi for op in active for iv in op.parameters[parameter]})
    li = {v: j for j, v in enumerate(lowers)}
    ui = {v: j for j, v in enumerate(uppers)}

    fused = np.zeros((len(uppers), len(lowers)))
    for op in active:
        for iv in op.parameters[parameter]:
            fused[ui[iv.hi], li[iv.lo]] += op.weight * iv.bpa
    fused /= len(active)

    total = fused.sum()
    if total <= 0.0:
        raise FusionError(f"fused evidence for {parameter!r} has zero mass")
    fused /= total

    intervals = [
        UncertainInterval(lo=lowers[j], hi=uppers[i], bpa=float(fused[i, j]))
        for i in range(len(uppers))
        for j in range(len(lowers))
        if fused[i, j] > 0.0
    ]
    intervals.sort(key=lambda iv: (iv.lo, iv.hi))
    return ParameterBPA(name=parameter, intervals=tuple(intervals))


def load_expert_opinions(path: str | Path) -> list[ExpertOpinion]:
    """Read expert opinions from JSON.

    Format: {"experts": [{"id": ..., "weight": ..., "parameters":
    {name: [{"lo": ..., "hi": ..., "bpa": ...}, ...], ...}}, ...]}.
    A parameter an expert has no opinion on is simply absent.
    """
    doc = json.loads(Path(path).read_text())
    opinions = []
    for entry in doc["experts"]:
        params = {
            name: tuple(
                UncertainInterval(lo=iv["lo"], hi=iv["hi"], bpa=iv["bpa"])
                for iv in intervals
            )
            for name, intervals in entry.get("parameters", {}).items()
        }
        opinions.append(
            ExpertOpinion(
                expert_id=entry["id"],
                weight=entry.get("weight", 1.0),
                parameters=params,
            )
        )
    return opinions


def fuse_all(opinions: list[ExpertOpinion], names: list[str]) -> list[ParameterBPA]:
    """Fuse every named parameter, preserving the given dimension order."""
    return [fuse_experts(opinions, name) for name in names]


# ---------------------------------------------------------------------------
# Joint structure and the unit-hypercube map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FocalElement:
    """One box of the joint structure with its product BPA.

    ``box`` holds the physical (lo, hi) per dimension, ``unit_box`` the
    image cell in the unit hypercube, ``index`` the per-dimension interval
    indices.
    """

    box: tuple[tuple[float, float], ...]
    bpa: float
    unit_box: tuple[tuple[float, float], ...]
    index: tuple[int, ...]


class FocalStructure:
    """Joint evidence structure over several uncertain parameters.

    Holds the per-dimension interval lists and the cumulative BPA
    boundaries that define the affine collection of all focal elements
    into the unit hypercube (cells laid out in interval order, widths
    equal to BPAs, exactly tiling [0, 1] per dimension).
    """

    def __init__(self, params: list[ParameterBPA], max_elements: int = 10**7):
        if not params:
            raise ValueError("need at least one parameter")
        self.params = list(params)
        self.names = [p.name for p in params]
        count = 1
        for p in params:
            count *= len(p.intervals)
            if count > max_elements:
                raise ValueError(
                    f"focal element count exceeds the cap of {max_elements}"
                )
        self._n_elements = count
        self.cum: list[np.ndarray] = []
        for p in params:
            edges = np.concatenate([[0.0], np.cumsum([iv.bpa for iv in p.intervals])])
            edges[-1] = 1.0  # absorb roundoff so the cells tile exactly
            self.cum.append(edges)

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def n_elements(self) -> int:
        return self._n_elements

    def counts(self) -> tuple[int, ...]:
        return tuple(len(p.intervals) for p in self.params)

    def element(self, index: tuple[int, ...]) -> FocalElement:
        box = []
        unit = []
        bpa = 1.0
        for d, j in enumerate(index):
            iv = self.params[d].intervals[j]
            box.append((iv.lo, iv.hi))
            unit.append((float(self.cum[d][j]), float(self.cum[d][j + 1])))
            bpa *= iv.bpa
        return FocalElement(box=tuple(box), bpa=bpa, unit_box=tuple(unit), index=index)

    def elements(self):
        """Iterate every focal element of the Cartesian product."""
        ranges = [range(len(p.intervals)) for p in self.params]
        for index in itertools.product(*ranges):
            yield self.element(index)

    def cell_of(self, d: int, u: float) -> int:
        """Cell index along dimension d; boundaries resolve to the lower cell."""
        edges = self.cum[d]
        j = bisect.bisect_left(edges, u, lo=1) - 1
        return min(max(j, 0), len(edges) - 2)

    def unit_to_physical(self, point) -> np.ndarray:
        """Map a unit-hypercube point to physical parameter values.

        Piecewise affine and total: each coordinate selects its containing
        cell (upper boundaries belong to the lower-indexed cell) and is
        stretched onto the corresponding physical interval.
        """
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}")
        out = np.empty(self.dim)
        for d, u in enumerate(point):
            u = min(max(float(u), 0.0), 1.0)
            j = self.cell_of(d, u)
            lo_edge, hi_edge = self.cum[d][j], self.cum[d][j + 1]
            frac = (u - lo_edge) / (hi_edge - lo_edge)
            iv = self.params[d].intervals[j]
            out[d] = iv.lo + frac * (iv.hi - iv.lo)
        return out

    def physical_to_unit(self, values, prefer_cells: tuple[int, ...] | None = None) -> np.ndarray:
        """A unit-cube preimage of physical values (used to seed searches).

        Overlapping intervals make the map one-to-many; the first interval
        containing each value is used unless ``prefer_cells`` pins one.
        """
        values = np.asarray(values, dtype=float)
        out = np.empty(self.dim)
        for d, x in enumerate(values):
            cells = range(len(self.params[d].intervals))
            if prefer_cells is not None:
                cells = [prefer_cells[d]]
            for j in cells:
                iv = self.params[d].intervals[j]
                if iv.lo <= x <= iv.hi:
                    width = iv.hi - iv.lo
                    frac = 0.5 if width == 0.0 else (x - iv.lo) / width
                    u = self.cum[d][j] + frac * (self.cum[d][j + 1] - self.cum[d][j])
                    # lower cell edges belong to the previous cell under the
                    # boundary tie-break; nudge inside so the round trip
                    # stays in interval j
                    while u < 1.0 and self.cell_of(d, u) != j:
                        u = math.nextafter(u, 1.0)
                    out[d] = u
                    break
            else:
                raise ValueError(
                    f"value {x} outside every interval of {self.names[d]}"
                )
        return out


def build_focal_elements(
    params: list[ParameterBPA], max_elements: int = 10**7
) -> list[FocalElement]:
    """Materialize the full Cartesian product of focal elements."""
    return list(FocalStructure(params, max_elements).elements())


# ---------------------------------------------------------------------------
# Belief / Plausibility of threshold propositions
# ---------------------------------------------------------------------------

def classify_box(vmin: float, vmax: float, v: float) -> tuple[bool, bool]:
    """(counts toward Belief, counts toward Plausibility) for y < v.

    A box lies fully inside the proposition set when its maximum does not
    exceed the threshold, and intersects it when its minimum falls below.
    """
    below = vmax <= v
    intersects = below or vmin < v
    return below, intersects


def bel_pl_of_threshold(bounds_by_element, v: float) -> tuple[float, float]:
    """Accumulate Belief and Plausibility from per-element objective bounds.

    ``bounds_by_element`` yields (bpa, vmin, vmax) triples covering every
    focal element exactly once.
    """
    bel_terms = []
    pl_terms = []
    for bpa, vmin, vmax in bounds_by_element:
        below, intersects = classify_box(vmin, vmax, v)
        if below:
            bel_terms.append(bpa)
        if intersects:
            pl_terms.append(bpa)
    return math.fsum(bel_terms), math.fsum(pl_terms)


def enumerate_bel_pl(f_bounds, structure: FocalStructure, v: float) -> tuple[float, float]:
    """Brute-force Bel/Pl by enumerating every focal element.

    ``f_bounds(unit_box)`` must return (min, max) of the objective over a
    unit-space box.
    """
    triples = (
        (el.bpa, *f_bounds(el.unit_box)) for el in structure.elements()
    )
    return bel_pl_of_threshold(triples, v)


@dataclass
class DualityReport:
    """Checks of the complementarity relations between Bel and Pl."""

    bel_sum: float
    pl_sum: float
    bel_pl_sum: float
    bel_subadditive: bool
    pl_superadditive: bool
    bel_pl_complementary: bool

    @property
    def all_hold(self) -> bool:
        return self.bel_subadditive and self.pl_superadditive and self.bel_pl_complementary

    def failures(self) -> list[str]:
        out = []
        if not self.bel_subadditive:
            out.append(f"Bel(A) + Bel(not A) = {self.bel_sum} > 1")
        if not self.pl_superadditive:
            out.append(f"Pl(A) + Pl(not A) = {self.pl_sum} < 1")
        if not self.bel_pl_complementary:
            out.append(f"Bel(A) + Pl(not A) = {self.bel_pl_sum} != 1")
        return out


def duality_check(
    bel_a: float, pl_a: float, bel_not_a: float, pl_not_a: float, tol: float = 1e-9
) -> DualityReport:
    """Verify Bel/Pl complementarity for a proposition and its negation."""
    bel_sum = bel_a + bel_not_a
    pl_sum = pl_a + pl_not_a
    bel_pl_sum = bel_a + pl_not_a
    return DualityReport(
        bel_sum=bel_sum,
        pl_sum=pl_sum,
        bel_pl_sum=bel_pl_sum,
        bel_subadditive=bel_sum <= 1.0 + tol,
        pl_superadditive=pl_sum >= 1.0 - tol,
        bel_pl_complementary=abs(bel_pl_sum - 1.0) <= tol,
    )


def complement_bel_pl(f_bounds, structure: FocalStructure, v: float) -> tuple[float, float]:
    """Bel/Pl of the complementary proposition y >= v by enumeration."""
    bel_terms = []
    pl_terms = []
    for el in structure.elements():
        vmin, vmax = f_bounds(el.unit_box)
        if vmin >= v:
            bel_terms.append(el.bpa)
        if vmax >= v:
            pl_terms.append(el.bpa)
    return math.fsum(bel_terms), math.fsum(pl_terms)


# ---------------------------------------------------------------------------
# Bel/Pl curve reconstruction by recursive hypercube partitioning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubBox:
    """Contiguous block of focal-element cells: [lo, hi) index ranges per dim."""

    ranges: tuple[tuple[int, int], ...]

    def n_cells(self) -> int:
        n = 1
        for lo, hi in self.ranges:
            n *= hi - lo
        return n

    def unit_box(self, structure: FocalStructure) -> tuple[tuple[float, float], ...]:
        return tuple(
            (float(structure.cum[d][lo]), float(structure.cum[d][hi]))
            for d, (lo, hi) in enumerate(self.ranges)
        )

    def bpa(self, structure: FocalStructure) -> float:
        total = 1.0
        for d, (lo, hi) in enumerate(self.ranges):
            total *= math.fsum(
                iv.bpa for iv in structure.params[d].intervals[lo:hi]
            )
        return total

    def split(self) -> tuple["SubBox", "SubBox"]:
        """Cut along a focal boundary of the dimension with the most cells."""
        widths = [hi - lo for lo, hi in self.ranges]
        d = max(range(len(widths)), key=lambda k: widths[k])
        lo, hi = self.ranges[d]
        mid = (lo + hi) // 2
        left = list(self.ranges)
        right = list(self.ranges)
        left[d] = (lo, mid)
        right[d] = (mid, hi)
        return SubBox(tuple(left)), SubBox(tuple(right))


@dataclass
class BeliefCurve:
    """Bel/Pl sampled on equally spaced thresholds between the objective bounds."""

    thresholds: np.ndarray
    bel: np.ndarray
    pl: np.ndarray
    v_min: float
    v_max: float
    n_partitions: int
    partial: bool = False


def bel_pl_curve(
    f_bounds,
    structure: FocalStructure,
    n_v: int,
    bpa_floor: float = 1e-4,
    max_partitions: int = 10**5,
    on_budget_exhausted: str = "flag",
) -> BeliefCurve:
    """Reconstruct full Bel/Pl curves by optimizer-driven binary partitioning.

    Steps: (1) bound the objective over the whole unit hypercube to get
    [V_min, V_max]; (2) lay n_v equally spaced thresholds across it;
    (3) cut the hypercube once along a focal boundary; (4) for each
    threshold, accumulate Belief over sub-boxes fully below it and
    Plausibility over those intersecting, recursively splitting any
    straddling sub-box along focal boundaries. Solved boxes are cached, a
    box is never split below a single focal element, below ``bpa_floor``
    (negligible contribution) or past ``max_partitions``.

    ``f_bounds(unit_box)`` returns (min, max) of the objective over a box.
    """
    if n_v < 2:
        raise ValueError("need at least two thresholds")

    cache: dict[SubBox, tuple[float, float]] = {}

    def bounds(box: SubBox) -> tuple[float, float]:
        got = cache.get(box)
        if got is None:
            got = f_bounds(box.unit_box(structure))
            cache[box] = got
        return got

    root = SubBox(tuple((0, n) for n in structure.counts()))
    v_min, v_max = bounds(root)
    thresholds = np.linspace(v_min, v_max, n_v)

    # insertion-ordered set: deterministic iteration, O(1) replacement
    partition: dict[SubBox, None] = {}
    if root.n_cells() > 1:
        for child in root.split():
            partition[child] = None
    else:
        partition[root] = None
    n_partitions = len(partition) - 1
    partial = False

    bel = np.zeros(n_v)
    pl = np.zeros(n_v)
    for j, v in enumerate(thresholds):
        # refine: split whatever straddles this threshold and still may be cut
        queue = list(partition)
        while queue:
            box = queue.pop()
            vmin, vmax = bounds(box)
            below, intersects = classify_box(vmin, vmax, v)
            if below or not intersects:
                continue
            if box.n_cells() <= 1 or box.bpa(structure) < bpa_floor:
                continue
            if n_partitions >= max_partitions:
                if on_budget_exhausted == "raise":
                    raise PartitionBudgetError(
                        f"partition budget of {max_partitions} exhausted"
                    )
                partial = True
                break
            a, b = box.split()
            del partition[box]
            partition[a] = None
            partition[b] = None
            queue.extend((a, b))
            n_partitions += 1
        # accumulate over the now-stable partition
        bel_terms = []
        pl_terms = []
        for box in partition:
            vmin, vmax = bounds(box)
            below, intersects = classify_box(vmin, vmax, v)
            if below or intersects:
                bpa = box.bpa(structure)
                if below:
                    bel_terms.append(bpa)
                if intersects:
                    pl_terms.append(bpa)
        bel[j] = math.fsum(bel_terms)
        pl[j] = math.fsum(pl_terms)

    return BeliefCurve(
        thresholds=thresholds, bel=bel, pl=pl,
        v_min=v_min, v_max=v_max, n_partitions=n_partitions, partial=partial,
    )
