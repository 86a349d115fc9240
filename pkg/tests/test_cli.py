import json

import pytest

from burgers_rigidity.cli import DEFAULTS, UsageError, main, resolve

SMALL = ["--grid", "41,41", "--domain=-2,2,-2,2"]


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def manifests(tmp_path):
    return sorted(tmp_path.glob("*.json"))


def test_verify_constant_passes(tmp_path, capsys):
    assert run(tmp_path, "verify", "--field", "constant:c=3", *SMALL) == 0
    (p,) = manifests(tmp_path)
    m = json.loads(p.read_text())
    assert {"command", "config", "reports", "classification", "singular_estimate", "passed"} <= m.keys()
    assert m["passed"] and m["classification"]["kind"] == "Affine"
    assert m["singular_estimate"]["n_points"] == 0
    for r in m["reports"]:
        assert {"check", "max_abs", "tolerance", "passed"} <= r.keys()
    assert "PASS" in capsys.readouterr().out
    assert not p.with_suffix(".singular.csv").exists()
    assert list(tmp_path.glob("*.delta*.csv"))


def test_verify_cone_fails(tmp_path, capsys):
    assert run(tmp_path, "verify", "--field", "cone:x0=0,t0=0", *SMALL) == 1
    m = json.loads(manifests(tmp_path)[0].read_text())
    assert not m["passed"] and m["singular_estimate"]["n_points"] > 0
    assert "FAIL" in capsys.readouterr().err
    assert manifests(tmp_path)[0].with_suffix(".singular.csv").exists()


def test_usage_errors(tmp_path):
    assert run(tmp_path, "verify", "--field", "bogus") == 2
    assert run(tmp_path, "verify", "--field", "constant:c=1", "--domain", "1,0,0,1") == 2
    assert run(tmp_path, "nonsense") == 2
    assert run(tmp_path, "entropy", "--ivp", "sine", "--t", "-1") == 2
    assert main(["report", "--out", str(tmp_path / "missing")]) == 2


def test_entropy_riemann(tmp_path):
    assert run(tmp_path, "entropy", "--ivp", "riemann:ul=1,ur=0", "--t", "1") == 0
    m = json.loads(manifests(tmp_path)[0].read_text())
    checks = {r["check"] for r in m["reports"]}
    assert {"max_principle", "conservation", "oleinik", "shock_position"} <= checks
    assert manifests(tmp_path)[0].with_suffix(".snapshot.csv").exists()


def test_config_file_sits_under_flags(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("# comment\ngrid = 21,21\nseed = 7\nfield = constant:c=1\n")
    cfg = resolve(["verify", "--config", str(conf), "--seed", "3"])
    assert cfg["grid"] == (21, 21) and cfg["seed"] == 3 and cfg["field"] == "constant:c=1"
    assert resolve(["verify", "--field", "constant:c=1"])["tol_fd"] == DEFAULTS["tol_fd"]
    conf.write_text("domain = -1,1,-1,1\n")
    assert resolve(["verify", "--config", str(conf)])["domain"] == (-1.0, 1.0, -1.0, 1.0)
    conf.write_text("no_such_key = 1\n")
    with pytest.raises(UsageError):
        resolve(["verify", "--config", str(conf)])


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["verify", "--field", "cone:x0=0,t0=0", *SMALL, "--out", str(d)]) == 1
    (pa,), (pb,) = manifests(a), manifests(b)
    assert pa.name == pb.name and pa.read_bytes() == pb.read_bytes()


def test_report(tmp_path):
    for n in ("100", "200", "400"):
        assert run(tmp_path, "entropy", "--ivp", "riemann:ul=0,ur=1", "--cells", n) == 0
    assert run(tmp_path, "report") == 0
    rows = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(rows) == 4 and rows[0].startswith("manifest,")
    (conv,) = (tmp_path / "plots").glob("convergence_*.csv")
    first = conv.read_text().splitlines()[0]
    assert first.startswith("#") and "slope" in first
    assert (tmp_path / "plots" / "plot_all.py").exists()
