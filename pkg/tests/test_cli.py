import json
import math

import numpy as np
import pytest

from lorentzwire import cli


def _run(argv, capsys=None):
    code = cli.run(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_equilibrium(tmp_path, capsys):
    code, out = _run(["equilibrium", "--out", str(tmp_path)], capsys)
    assert code == 0
    vals = dict(line.split(" = ") for line in out.out.strip().splitlines())
    assert float(vals["r_bar"]) == 1.0
    assert float(vals["H0"]) == pytest.approx(1.7320508, abs=1e-7)
    assert float(vals["T0_lin"]) == pytest.approx(6.2831853, abs=1e-7)
    assert float(vals["T0_lemma3"]) == pytest.approx(4.4428829, abs=1e-7)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "equilibrium" and man["params"]["I0"] == 1


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        cli.run(["equilibrium", "--frobnicate"])
    assert exc.value.code == 2


@pytest.mark.parametrize("body", ['{"params": {"I0": -1}}', '{"nope": 1}', "{", '{"tolerances": {"integration": 1e-2}}',
                                  '{"run": {"points": 1.5}}', '{"field": {"kind": "magic"}}'])
def test_bad_config(tmp_path, capsys, body):
    cfg = tmp_path / "c.json"
    cfg.write_text(body)
    code, out = _run(["period-map", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 3
    assert len(out.err.strip().splitlines()) == 1


def test_missing_files(tmp_path, capsys):
    code, _ = _run(["equilibrium", "--config", str(tmp_path / "absent.json")], capsys)
    assert code == 4
    cfg = tmp_path / "c.json"
    cfg.write_text('{"field": {"kind": "tabulated", "waveform_csv": "nowhere.csv"}}')
    code, out = _run(["potential", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 4 and "nowhere.csv" in out.err


def test_numerical_failure(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"params": {"T1": 6.0}}')
    code, out = _run(["melnikov", "--n", "1", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 5 and "T0_lin" in out.err


def test_period_map_roundtrip(tmp_path, capsys):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert _run(["period-map", "--points", "12", "--hmax", "4.0", "--out", str(a)], capsys)[0] == 0
    assert _run(["period-map", "--config", str(a / "manifest.json"), "--out", str(b)], capsys)[0] == 0
    assert (a / "period_map.csv").read_bytes() == (b / "period_map.csv").read_bytes()
    rows = (a / "period_map.csv").read_text().splitlines()
    assert rows[0] == "H,T,r_a,r_b" and len(rows) == 13
    assert float(rows[-1].split(",")[0]) == 4.0
    cfg = json.loads((a / "manifest.json").read_text())
    cfg["output"]["format"] = "json"
    (tmp_path / "j.json").write_text(json.dumps(cfg))
    assert _run(["period-map", "--config", str(tmp_path / "j.json"), "--out", str(c)], capsys)[0] == 0
    d = json.loads((c / "period_map.json").read_text())
    assert [float(v) for v in rows[1].split(",")] == [d[0][k] for k in ("H", "T", "r_a", "r_b")]


def test_melnikov_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        assert _run(["melnikov", "--n", "2", "--out", str(tmp_path / d)], capsys)[0] == 0
    ra = (tmp_path / "a" / "melnikov_n2.json").read_bytes()
    assert ra == (tmp_path / "b" / "melnikov_n2.json").read_bytes()
    rec = json.loads(ra)
    assert rec["n"] == 2 and len(rec["zeros"]) == 4 and rec["simple"] is True


def test_potential_tabulated(tmp_path, capsys):
    t = np.arange(64) * 7.0 / 64
    (tmp_path / "w.csv").write_text("t,I1\n" + "".join(f"{float(a)!r},{math.sin(2 * math.pi * a / 7.0)!r}\n" for a in t))
    cfg = tmp_path / "c.json"
    cfg.write_text('{"field": {"kind": "tabulated", "waveform_csv": "w.csv"}, "run": {"t": [0.0, 1.0], "r": [1.0, 3.0]}}')
    code, _ = _run(["potential", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    rows = (tmp_path / "o" / "potential.csv").read_text().splitlines()
    assert rows[0] == "t,r,a,da_dr,a_closed,da_dr_closed" and len(rows) == 5
    for row in rows[1:]:
        v = [float(x) for x in row.split(",")]
        assert v[2] == pytest.approx(v[4], abs=1e-9) and v[3] == pytest.approx(v[5], abs=1e-9)


def test_simulate_reconstruct(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"run": {"reconstruct": true, "samples": 51, "t_end": 14.0}}')
    code, _ = _run(["simulate", "--k", "0.01", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert len((tmp_path / "o" / "trajectory.csv").read_text().splitlines()) == 52
    head = (tmp_path / "o" / "trajectory_3d.csv").read_text().splitlines()[0]
    assert head == "t,r,theta,z,r_dot,theta_dot,z_dot"
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["params"]["k"] == 0.01 and man["outputs"] == ["trajectory.csv", "trajectory_3d.csv"]


def test_find_orbits(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"params": {"T1": 4.0}}')
    code, out = _run(["find-orbits", "--nmax", "2", "--k", "1e-3", "--config", str(cfg), "--out", str(tmp_path / "o")],
                     capsys)
    assert code == 0
    assert "n = 1: 0 orbits, 0 Melnikov zeros" in out.out
    d = json.loads((tmp_path / "o" / "orbits.json").read_text())
    assert all(o["minimal_n"] == o["n"] for o in d["orbits"])
    assert (tmp_path / "o" / "orbits.csv").exists()


def test_find_orbits_needs_k(tmp_path, capsys):
    code, _ = _run(["find-orbits", "--nmax", "1", "--k", "0", "--out", str(tmp_path)], capsys)
    assert code == 3


def test_verify(tmp_path, capsys):
    code, out = _run(["verify", "--out", str(tmp_path)], capsys)
    assert code == 0
    reps = json.loads((tmp_path / "verify.json").read_text())
    assert all(r["pass"] for r in reps)
    assert "FAIL" not in out.out


def test_verify_failure_exit(tmp_path, capsys, monkeypatch):
    from lorentzwire import verify as V

    bad = V.SignReport("forced", "none", -1.0, False, (0.0,), 1e-9)
    monkeypatch.setattr(V, "verify_appendix", lambda tol: [bad])
    code, _ = _run(["verify", "--out", str(tmp_path)], capsys)
    assert code == 1
