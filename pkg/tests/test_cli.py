import json

import numpy as np
import pytest

from talpha import cli


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def body(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def test_kernel_table(tmp_path, capsys):
    assert run(tmp_path, "kernel", "--n", "3", "--alpha", "0") == 0
    raw = (tmp_path / "kernel.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].startswith("# talpha ") and lines[1].startswith("# config: ")
    rows = body(tmp_path / "kernel.csv")
    assert rows[0] == "r,P_alpha_center_ray,G_alpha,RG_alpha,h_alpha,k_alpha"
    assert len(rows) == 101
    first = rows[1].split(",")
    assert float(first[0]) == 0.0 and first[2] in ("inf", "-inf")
    # 17 significant digits round-trip the stored doubles
    assert all(float(v) == float(repr(float(v))) for v in rows[50].split(","))
    meta = json.loads((tmp_path / "kernel.json").read_text())
    assert meta["constants"]["c_alpha_paper"] == pytest.approx(-2.0)


def test_bad_alpha_exits_2(tmp_path, capsys):
    assert run(tmp_path, "kernel", "--alpha", "-1.5") == 2
    assert "alpha > -1" in capsys.readouterr().err


def test_config_file_merges_with_flags_winning(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 4, "alpha": 1.0, "ray": "0:0.5:5"}))
    assert run(tmp_path, "kernel", "--config", str(cfg), "--alpha", "0.25") == 0
    header = (tmp_path / "kernel.csv").read_text().splitlines()[1]
    conf = json.loads(header.split(": ", 1)[1])
    assert conf["n"] == 4 and conf["alpha"] == 0.25 and conf["options"]["ray"] == "0:0.5:5"
    assert len(body(tmp_path / "kernel.csv")) == 6


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nn": 4}))
    assert run(tmp_path, "kernel", "--config", str(cfg)) == 2


def test_mobius_self_test(tmp_path, capsys):
    assert run(tmp_path, "mobius", "--self-test") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] is True


def test_asymptotics_i_alpha(tmp_path, capsys):
    assert run(tmp_path, "asymptotics", "--experiment", "i_alpha", "--alpha", "0.5") == 0
    res = json.loads((tmp_path / "i_alpha.json").read_text())
    assert abs(res["fitted_exponent"] + 0.5) < 0.05
    assert len(body(tmp_path / "i_alpha.csv")) == 11


def test_solve_manufactured_case(tmp_path, capsys):
    code = run(tmp_path, "solve", "--case", "x1", "--orders", "4,8", "--radii", "0,0.5")
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["sup_error"] < 1e-3
    assert body(tmp_path / "convergence.csv")[0] == "order,sup_error,runtime_seconds"


def test_solve_rejects_bad_phi_csv(tmp_path, capsys):
    bad = tmp_path / "phi.csv"
    bad.write_text("x1,x2,x3,phi\n1,0,0,1\n")
    assert run(tmp_path, "solve", "--phi-csv", str(bad)) == 2
    assert "node" in capsys.readouterr().err


def test_solve_phi_csv_constant(tmp_path, capsys):
    from talpha.quadrature import sphere_rule
    nodes = sphere_rule(3, 16).nodes
    path = tmp_path / "phi.csv"
    np.savetxt(path, np.column_stack([nodes, np.ones(len(nodes))]), delimiter=",",
               header="x1,x2,x3,phi", comments="")
    assert run(tmp_path, "solve", "--phi-csv", str(path), "--alpha", "0", "--radii", "0,0.4") == 0
    rows = body(tmp_path / "solution.csv")
    vals = [float(r.split(",")[-1]) for r in rows[1:]]
    assert np.allclose(vals, 1.0, atol=1e-6)


def test_hyperbolic_requires_alpha(tmp_path, capsys):
    assert run(tmp_path, "solve", "--case", "x1", "--hyperbolic", "--alpha", "0.5") == 2


def test_verify_subset_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["verify", "--criteria", "1,2,8", "--out", str(a)]) == 0
    assert cli.main(["verify", "--criteria", "1,2,8", "--out", str(b)]) == 0
    assert body(a / "verify.csv") == body(b / "verify.csv")
    assert body(a / "verify.csv")[0] == "criterion,metric,value,tolerance,kind,status"
