"""Command-line orchestration: optimization runs, Bel/Pl curves, propagation.

Every run reads a scenario JSON, dispatches on the mode and writes CSV
payloads plus a manifest with full provenance (seed, configuration hash,
package version) under the output directory. Identical scenario and seed
reproduce byte-identical payloads.

Exit codes: 0 success, 2 scenario/schema errors, 3 solver budget errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .constants import YEAR_S
from .evidence import PartitionBudgetError, bel_pl_curve
from .fpet import propagate_trajectory
from .mission import (
    MODES,
    PHYSICAL_NAMES,
    UNCERTAIN_NAMES,
    DeflectionModel,
    ScenarioError,
    Scenario,
    apply_uncertain,
    deterministic_evaluator,
    evidence_evaluator,
    evidence_structure,
    load_scenario,
    make_model,
    nominal_unit_image,
    reference_scenario_path,
    rk_impact_parameter,
    scenario_to_dict,
    uncertain_dict,
)
from .ablation import ThrustModel
from .orbits import keplerian_to_equinoctial, propagate_keplerian
from .search import extract_extremes, inner_bound_search, solve_moo
from .sizing import DesignVector, UNIT_MARGINS


def fmt(x: float) -> str:
    """Full-precision, locale-free float formatting for reproducible CSV."""
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def config_hash(scenario: Scenario, args_record: dict) -> str:
    payload = json.dumps(
        {"scenario": scenario_to_dict(scenario), "args": args_record},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def parse_design(text: str) -> DesignVector:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("design must be 'd_m,n_sc,t_warn,c_r'")
    return DesignVector(
        d_m=float(parts[0]), n_sc=int(parts[1]),
        t_warn=float(parts[2]), c_r=float(parts[3]),
    )


def archive_rows(archive, mode: str, structure=None) -> tuple[list[str], list[list]]:
    header = ["d_m", "n_sc", "t_warn", "c_r", "m_sys_kg", "b_km", "mode"]
    evidence_mode = mode in ("minmin", "minmin-margins", "minmax")
    if evidence_mode:
        header += [f"witness_b_{n}" for n in UNCERTAIN_NAMES]
        header += [f"witness_m_{n}" for n in UNCERTAIN_NAMES]
    rows = []
    for member in archive.sorted_by_mass():
        d = member.design
        row = [d.d_m, float(d.n_sc), d.t_warn, d.c_r,
               member.objectives.m_sys, -member.objectives.neg_b, mode]
        if evidence_mode:
            for witness in (member.witness_negb, member.witness_mass):
                physical = structure.unit_to_physical(witness)
                row.extend(physical)
        rows.append(row)
    return header, rows


def de_box_bounder(f, dim: int, budget: int, pop: int, seed: int):
    """Box-bound estimator for the curve builder: restart DE per box,
    deterministically keyed on the box geometry."""

    def bounds(unit_box):
        lo = np.array([b[0] for b in unit_box])
        hi = np.array([b[1] for b in unit_box])
        span = hi - lo

        def g(u):
            return f(lo + u * span)

        key = hashlib.sha256(repr(unit_box).encode()).digest()[:8]
        box_tag = int.from_bytes(key, "big")
        vmin = inner_bound_search(
            g, dim, "min", budget, pop,
            np.random.default_rng(np.random.SeedSequence([seed, box_tag, 0])),
        ).value
        vmax = inner_bound_search(
            g, dim, "max", budget, pop,
            np.random.default_rng(np.random.SeedSequence([seed, box_tag, 1])),
        ).value
        return vmin, vmax

    return bounds


def run_optimization(scenario: Scenario, mode: str, contamination: bool, out: Path):
    model = make_model(scenario, mode, contamination)
    config = scenario.solver
    if mode == "deterministic":
        evaluate = deterministic_evaluator(model)
        structure = None
    else:
        structure = evidence_structure(scenario)
        sense = "max" if mode == "minmax" else "min"
        evaluate = evidence_evaluator(model, structure, config, sense)
    archive = solve_moo(evaluate, scenario.design_bounds, config)
    header, rows = archive_rows(archive, mode, structure)
    write_csv(out / f"archive_{mode}.csv", header, rows)
    files = [f"archive_{mode}.csv"]
    if mode != "deterministic":
        labeled = extract_extremes(archive, mode)
        lab_rows = [
            [p.individual.design.d_m, float(p.individual.design.n_sc),
             p.individual.design.t_warn, p.individual.design.c_r,
             p.individual.objectives.m_sys, -p.individual.objectives.neg_b,
             p.label, p.value]
            for p in labeled
        ]
        write_csv(
            out / f"extremes_{mode}.csv",
            ["d_m", "n_sc", "t_warn", "c_r", "m_sys_kg", "b_km", "label", "value"],
            lab_rows,
        )
        files.append(f"extremes_{mode}.csv")
    return files


def write_structure_csv(structure, path: Path) -> None:
    rows = []
    for param in structure.params:
        for iv in param.intervals:
            rows.append([param.name, iv.lo, iv.hi, iv.bpa])
    write_csv(path, ["parameter", "lo", "hi", "bpa"], rows)


def run_bpcurve(scenario: Scenario, design: DesignVector, contamination: bool,
                out: Path, n_v: int = 21, max_partitions: int = 10**5):
    model = DeflectionModel(scenario, contamination, UNIT_MARGINS)
    structure = evidence_structure(scenario)
    write_structure_csv(structure, out / "fused_structure.csv")
    config = scenario.solver
    files = ["fused_structure.csv"]
    meta = {}
    for tag, objective in (
        ("b", lambda u: model.evaluate(design, uncertain_dict(structure, u)).b),
        ("m_sys", lambda u: model.mass_only(design, uncertain_dict(structure, u))),
    ):
        bounds = de_box_bounder(
            objective, structure.dim, config.inner_budget, config.inner_pop,
            scenario.seed,
        )
        curve = bel_pl_curve(bounds, structure, n_v=n_v,
                             max_partitions=max_partitions)
        rows = [[v, bel, pl] for v, bel, pl in
                zip(curve.thresholds, curve.bel, curve.pl)]
        name = f"belpl_{tag}.csv"
        write_csv(out / name, ["v", "bel", "pl"], rows)
        files.append(name)
        meta[tag] = {
            "v_min": curve.v_min, "v_max": curve.v_max,
            "n_partitions": curve.n_partitions, "partial": curve.partial,
        }
    (out / "belpl_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )
    files.append("belpl_meta.json")
    return files


def run_sensitivity(scenario: Scenario, design: DesignVector, contamination: bool,
                    out: Path, n_v: int = 21, max_partitions: int = 10**5):
    """Per-parameter Bel/Pl curves of b, the other nine held at the
    reference values."""
    from .evidence import FocalStructure, fuse_all, load_expert_opinions

    model = DeflectionModel(scenario, contamination, UNIT_MARGINS)
    opinions = load_expert_opinions(scenario.expert_opinions_path())
    config = scenario.solver
    rows = []
    for name in PHYSICAL_NAMES:
        structure = FocalStructure(fuse_all(opinions, [name]))

        def objective(u_vec, pname=name, struct=structure):
            u = dict(scenario.fixed_uncertain)
            u[pname] = float(struct.unit_to_physical(u_vec)[0])
            return model.evaluate(design, u).b

        bounds = de_box_bounder(
            objective, 1, config.inner_budget, config.inner_pop, scenario.seed
        )
        curve = bel_pl_curve(bounds, structure, n_v=n_v,
                             max_partitions=max_partitions)
        for v, bel, pl in zip(curve.thresholds, curve.bel, curve.pl):
            rows.append([name, v, bel, pl])
    write_csv(out / "sensitivity_b.csv", ["parameter", "v", "bel", "pl"], rows)
    return ["sensitivity_b.csv"]


def run_propagate(scenario: Scenario, design: DesignVector, contamination: bool,
                  out: Path, oracle: bool):
    model = DeflectionModel(scenario, contamination, scenario.margins)
    ast, tech = apply_uncertain(scenario, scenario.fixed_uncertain)
    t_start = scenario.t_impact - design.t_warn * YEAR_S
    eq0 = propagate_keplerian(
        keplerian_to_equinoctial(scenario.asteroid), t_start, scenario.mu
    )
    thrust = ThrustModel(
        design, tech, ast, scenario.station,
        contamination_on=contamination, t_reference=t_start,
    )
    ctrl = replace(scenario.arc_control, eps_max_seen=0.0)
    traj = propagate_trajectory(eq0, thrust, scenario.t_impact, ctrl, scenario.mu)
    rows = []
    for k, state in enumerate(traj.states):
        eps = traj.eps_history[k - 1] if k > 0 else 0.0
        rows.append([state.t, state.a, state.p1, state.p2,
                     state.q1, state.q2, state.ell, eps])
    write_csv(out / "trajectory.csv",
              ["t_s", "a_km", "p1", "p2", "q1", "q2", "ell_rad", "eps_km_s2"],
              rows)
    ev = model.evaluate(design, scenario.fixed_uncertain)
    budget = ev.budget
    budget_fields = ["m_c", "m_s", "m_m", "m_l", "m_r", "m_bus", "m_dry",
                     "m_p", "m_sc", "m_sys", "p_l", "a_s", "a_r", "a_m1",
                     "a_m2", "a_d", "eta_sys"]
    write_csv(out / "mass_budget.csv", budget_fields,
              [[getattr(budget, f) for f in budget_fields]])
    summary = {"b_km": ev.b, "m_sys_kg": ev.m_sys, "n_arcs": ev.n_arcs}
    if oracle:
        b_rk = rk_impact_parameter(
            scenario, design, scenario.fixed_uncertain, contamination
        )
        summary["b_km_rk_oracle"] = b_rk
        summary["b_rel_diff_vs_oracle"] = abs(ev.b - b_rk) / max(b_rk, 1e-300)
    (out / "propagate_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return ["trajectory.csv", "mass_budget.csv", "propagate_summary.json"]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="neodeflect",
        description="Design of laser-ablation asteroid deflection campaigns "
                    "under epistemic uncertainty.",
    )
    parser.add_argument("--scenario", type=Path, default=None,
                        help="scenario JSON (defaults to the shipped reference)")
    parser.add_argument("--mode", choices=MODES, required=True)
    parser.add_argument("--contamination", choices=["on", "off"], default=None,
                        help="override the scenario's contamination flag")
    parser.add_argument("--design", type=str, default="20,10,8,3000",
                        help="'d_m,n_sc,t_warn,c_r' for bpcurve/sensitivity/propagate")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--out", type=Path, default=Path("runs"))
    parser.add_argument("--oracle", action="store_true",
                        help="add a reference-integration cross-check (propagate mode)")
    parser.add_argument("--nv", type=int, default=21,
                        help="thresholds per Bel/Pl curve")
    parser.add_argument("--max-partitions", type=int, default=10**5,
                        help="sub-hypercube budget of the curve refinement")
    args = parser.parse_args(argv)

    try:
        scenario_path = args.scenario or reference_scenario_path()
        scenario = load_scenario(scenario_path)
        if args.seed is not None:
            scenario = replace(
                scenario, seed=args.seed,
                solver=replace(scenario.solver, seed=args.seed),
            )
        else:
            scenario = replace(
                scenario, solver=replace(scenario.solver, seed=scenario.seed)
            )
        contamination = scenario.contamination
        if args.contamination is not None:
            contamination = args.contamination == "on"
        design = parse_design(args.design)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    args_record = {
        "mode": args.mode, "contamination": contamination,
        "design": args.design, "seed": scenario.seed, "nv": args.nv,
        "max_partitions": args.max_partitions,
    }

    try:
        if args.mode in ("deterministic", "minmin", "minmin-margins", "minmax"):
            files = run_optimization(scenario, args.mode, contamination, out)
        elif args.mode == "bpcurve":
            files = run_bpcurve(scenario, design, contamination, out, args.nv,
                                args.max_partitions)
        elif args.mode == "sensitivity":
            files = run_sensitivity(scenario, design, contamination, out, args.nv,
                                    args.max_partitions)
        else:
            files = run_propagate(scenario, design, contamination, out, args.oracle)
    except (PartitionBudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    manifest = {
        "package_version": __version__,
        "mode": args.mode,
        "seed": scenario.seed,
        "config_hash": config_hash(scenario, args_record),
        "scenario_file": str(scenario_path),
        "outputs": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {', '.join(files)} and manifest.json to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
