import json
import os
from pathlib import Path

import pytest
import yaml

from rifields.cli import main
from rifields.scenario import deterministic_view, run_data, validate_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, data, name="s.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data, sort_keys=False))
    return str(p)


def report(out, command):
    return json.loads((Path(out) / f"{command}-report.json").read_text())


POWER = {"command": "certify", "psi": {"family": "power", "m": 2},
         "certify": {"theorem": "series", "model": {"kind": "power-law", "kappa": 1, "s": 1}}}


def test_certify_power_law(tmp_path):
    out = tmp_path / "out"
    code = main(["certify", write(tmp_path, POWER), "--out-dir", str(out)])
    assert code == 0
    r = report(out, "certify")
    assert r["status"] == "certified"
    assert r["result"]["optimal_q"] == pytest.approx(0.5, abs=1e-6)
    assert r["result"]["value"] == pytest.approx(4.0, abs=1e-6)
    assert "power-law-optimum-closed-form" in r["flags"]
    assert r["toolkit"]["version"] and "wall_time" in r["run"]
    assert r["scenario"]["certify"]["model"]["kappa"] == 1
    table = (out / "certify-tail.dat").read_text().splitlines()
    assert table[0] == "# x tail_bound" and len(table[1].split()) == 2


def test_validate_reports_constraint_violations(tmp_path):
    bad = dict(POWER, certify={"theorem": "series", "model": {"kind": "power-law", "kappa": 2, "s": 1}})
    diags = validate_scenario(write(tmp_path, bad))
    assert len(diags) == 1 and "κ in (0, 1 + s)" in diags[0] and diags[0].startswith("line ")
    bad = dict(POWER, certify={"theorem": "series", "model": {"kind": "log-corrected", "s": 1, "beta": 1}})
    assert any("β > 1" in d for d in validate_scenario(write(tmp_path, bad)))
    assert validate_scenario(write(tmp_path, POWER)) == []
    assert main(["validate", write(tmp_path, POWER)]) == 0


def test_schema_errors_name_field_and_line(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("command: certify\npsi:\n  family: power\n  m: -1\n")
    diags = validate_scenario(str(p))
    assert diags and diags[0].startswith("line 4: field psi.m")
    assert main(["validate", str(p)]) == 1


def test_missing_seed_on_stochastic_command(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("RIFIELDS_SEED", raising=False)
    mc = {"command": "mc-estimate", "mc": {"problem": "cos-tx", "n": 100}}
    code = main(["mc-estimate", write(tmp_path, mc), "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "missing seed" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_seed_precedence(tmp_path, monkeypatch):
    mc = {"command": "mc-estimate", "seed": 1, "mc": {"problem": "cos-tx", "n": 200, "limit_replicas": 1000}}
    path = write(tmp_path, mc)
    monkeypatch.setenv("RIFIELDS_SEED", "5")
    assert main(["mc-estimate", path, "--out-dir", str(tmp_path / "a")]) == 0
    assert report(tmp_path / "a", "mc-estimate")["seed"] == 5
    assert main(["mc-estimate", path, "--seed", "9", "--out-dir", str(tmp_path / "b")]) == 0
    assert report(tmp_path / "b", "mc-estimate")["seed"] == 9


def test_overrides_are_embedded(tmp_path):
    out = tmp_path / "o"
    code = main(["certify", write(tmp_path, POWER), "--out-dir", str(out),
                 "--set", "certify.model.kappa=0.5", "--set", "certify.model.s=2"])
    assert code == 0
    r = report(out, "certify")
    assert r["scenario"]["certify"]["model"] == {"kind": "power-law", "kappa": 0.5, "s": 2}


def test_exit_codes_for_diverged_and_resolution_limited(tmp_path):
    div = {"command": "certify", "psi": {"family": "constant", "c": 1, "support": [1, 2]},
           "certify": {"theorem": "integral", "diameter": 1.0,
                       "model": {"kind": "power-law", "kappa": 3, "s": 3}}}
    assert main(["certify", write(tmp_path, div), "--out-dir", str(tmp_path / "d")]) == 2
    emp = {"command": "certify", "space": {"grid": {"n": 8}}, "psi": {"family": "power", "m": 2},
           "certify": {"theorem": "series", "model": {"kind": "empirical", "distance": "space"}}}
    assert main(["certify", write(tmp_path, emp), "--out-dir", str(tmp_path / "e")]) == 3


def test_runtime_error_exits_one(tmp_path, capsys):
    tb = {"command": "tailbound", "psi": {"family": "power", "m": 2}, "tailbound": {"norm": 1.0, "x": [1.0]}}
    assert main(["tailbound", write(tmp_path, tb), "--out-dir", str(tmp_path / "t")]) == 1
    assert "DomainError" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["mc_cos.yaml", "bounded_clt.yaml", "brownian_mixed_norm.yaml",
                                  "lacunary_demo.yaml"])
def test_repeated_runs_are_byte_identical(tmp_path, name):
    data = yaml.safe_load((SCENARIOS / name).read_text())
    data.get("mc", {}).update({"n": 2000, "limit_replicas": 1000})
    data.get("clt_check", {}).update({"replicas": 300, "n": [4, 16]})
    data.get("mixed_norm", {}).update({"replicas": 500})
    data.get("lacunary", {}).update({"replicas": 200})
    path = write(tmp_path, data)
    cmd = data["command"]
    for d in ("a", "b"):
        assert main([cmd, path, "--out-dir", str(tmp_path / d)]) == 0
    ra, rb = report(tmp_path / "a", cmd), report(tmp_path / "b", cmd)
    assert json.dumps(deterministic_view(ra), sort_keys=True) == json.dumps(deterministic_view(rb), sort_keys=True)
    for f in (tmp_path / "a").glob("*.dat"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_all_shipped_scenarios_validate():
    for f in sorted(SCENARIOS.glob("*.yaml")):
        assert validate_scenario(str(f)) == [], f.name


def test_writes_stay_in_out_dir(tmp_path):
    out = tmp_path / "only"
    path = write(tmp_path, POWER)
    before = set(os.listdir(tmp_path))
    main(["certify", path, "--out-dir", str(out)])
    assert set(os.listdir(tmp_path)) - before == {"only"}
    assert not any(n.startswith(".tmp-") for n in os.listdir(out))


def test_entropy_command_and_dump(tmp_path):
    ent = {"command": "entropy", "space": {"grid": {"n": 10}}, "entropy": {"q": 0.5, "exact": True}}
    code, rep, written = run_data(yaml.safe_load(yaml.safe_dump(ent)), "entropy", str(tmp_path))
    assert code == 0
    for row in rep["result"]["rows"]:
        assert row["lower"] <= row["exact"] <= row["upper"]
    assert rep["result"]["hierarchy"]["cardinalities"][0] == 1
