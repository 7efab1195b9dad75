"""CLI orchestration: exit codes, outputs, provenance reproducibility."""
import json
from dataclasses import replace
from pathlib import Path

import pytest

from neodeflect.cli import main, parse_design
from neodeflect.mission import (
    load_scenario,
    reference_scenario_path,
    scenario_to_dict,
)


@pytest.fixture()
def fast_scenario(tmp_path):
    """Reference scenario with budgets small enough for CLI smoke runs."""
    doc = scenario_to_dict(load_scenario(reference_scenario_path()))
    doc["solver"] = {
        "outer_budget": 24, "outer_pop": 6, "explorers": 1,
        "inner_budget": 8, "inner_pop": 4, "archive_capacity": 50,
    }
    doc["expert_opinions_file"] = str(
        reference_scenario_path().parent / "expert_opinions.json"
    )
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_parse_design():
    d = parse_design("12.5, 7, 3.5, 2200")
    assert (d.d_m, d.n_sc, d.t_warn, d.c_r) == (12.5, 7, 3.5, 2200.0)
    with pytest.raises(ValueError):
        parse_design("1,2,3")


def test_unknown_mode_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["--mode", "nonsense"])


def test_schema_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code = main(["--mode", "propagate", "--scenario", str(bad),
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_propagate_mode_outputs(fast_scenario, tmp_path):
    out = tmp_path / "run"
    code = main([
        "--mode", "propagate", "--scenario", str(fast_scenario),
        "--design", "20,10,2,3000", "--out", str(out),
    ])
    assert code == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "manifest.json").exists()
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t_s,a_km,p1,p2,q1,q2,ell_rad,eps_km_s2"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mode"] == "propagate"
    assert "config_hash" in manifest


def test_propagate_with_oracle(fast_scenario, tmp_path):
    out = tmp_path / "run"
    code = main([
        "--mode", "propagate", "--scenario", str(fast_scenario),
        "--design", "20,10,1,3000", "--out", str(out), "--oracle",
    ])
    assert code == 0
    summary = json.loads((out / "propagate_summary.json").read_text())
    assert summary["b_rel_diff_vs_oracle"] < 1e-2


def test_deterministic_mode_and_reproducibility(fast_scenario, tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        code = main([
            "--mode", "deterministic", "--scenario", str(fast_scenario),
            "--out", str(out), "--seed", "77",
        ])
        assert code == 0
    payload1 = (out1 / "archive_deterministic.csv").read_bytes()
    payload2 = (out2 / "archive_deterministic.csv").read_bytes()
    assert payload1 == payload2
    rows = payload1.decode().splitlines()
    assert rows[0].startswith("d_m,n_sc,t_warn,c_r,m_sys_kg,b_km,mode")
    assert len(rows) > 1


def test_minmax_mode_outputs_witnesses(fast_scenario, tmp_path):
    out = tmp_path / "run"
    code = main([
        "--mode", "minmax", "--scenario", str(fast_scenario),
        "--out", str(out), "--seed", "3",
    ])
    assert code == 0
    lines = (out / "archive_minmax.csv").read_text().splitlines()
    assert "witness_b_e_sub" in lines[0]
    assert (out / "extremes_minmax.csv").exists()
    extremes = (out / "extremes_minmax.csv").read_text().splitlines()
    assert all(",belief,1" in row for row in extremes[1:])


def test_bpcurve_mode(fast_scenario, tmp_path):
    out = tmp_path / "run"
    code = main([
        "--mode", "bpcurve", "--scenario", str(fast_scenario),
        "--design", "10,5,1,2000", "--out", str(out), "--nv", "5",
        "--max-partitions", "24",
    ])
    assert code == 0
    for tag in ("b", "m_sys"):
        lines = (out / f"belpl_{tag}.csv").read_text().splitlines()
        assert lines[0] == "v,bel,pl"
        rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
        assert len(rows) == 5
        bel = [r[1] for r in rows]
        pl = [r[2] for r in rows]
        assert all(b <= p + 1e-12 for b, p in zip(bel, pl))
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(bel, bel[1:]))
        assert all(p2 >= p1 - 1e-12 for p1, p2 in zip(pl, pl[1:]))


def test_sensitivity_mode(fast_scenario, tmp_path):
    out = tmp_path / "run"
    code = main([
        "--mode", "sensitivity", "--scenario", str(fast_scenario),
        "--design", "10,5,1,2000", "--out", str(out), "--nv", "5",
    ])
    assert code == 0
    lines = (out / "sensitivity_b.csv").read_text().splitlines()
    assert lines[0] == "parameter,v,bel,pl"
    params = {ln.split(",")[0] for ln in lines[1:]}
    assert params == {"c_a", "k_a", "rho_a", "t_sub", "e_sub"}
