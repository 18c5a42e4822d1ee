import json
import os

import pytest

from projeikonal.cli import main, run, write_outputs

ANNULUS = {"curve": {"kind": "circle", "radius": 1.5}, "delta": 0.5}


def config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_exact_on_the_annulus(tmp_path, capsys):
    cfg = config(tmp_path, {"domain": ANNULUS, "h": 1 / 64})
    assert run(["exact", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = summary(capsys)
    assert out["status"] == "ok" and out["l2"] <= 0.05
    report = json.loads((tmp_path / "o" / "residual.json").read_text())
    assert report["l2"] == out["l2"]
    assert "q" in json.loads((tmp_path / "o" / "field.json").read_text())


def test_flags_override_the_config(tmp_path, capsys):
    cfg = config(tmp_path, {"domain": ANNULUS, "h": 1 / 16, "out": str(tmp_path / "a")})
    assert run(["domain", "--config", cfg, "--h", "0.03125", "--out", str(tmp_path / "b")]) == 0
    assert json.loads((tmp_path / "b" / "grid.json").read_text())["h"] == 0.03125
    assert not (tmp_path / "a").exists()


def test_unknown_command_is_a_usage_error(capsys):
    assert run(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_main_exits_with_the_status(monkeypatch):
    monkeypatch.setattr("sys.argv", ["projeikonal"])
    with pytest.raises(SystemExit) as exc:
        main()
    assert exc.value.code == 2


@pytest.mark.parametrize("data", [
    {"domian": 1},
    {"domain": ANNULUS},
    {"domain": ANNULUS, "h": -1},
    {"domain": ANNULUS, "h": 0.05, "seed": -3},
    {"domain": ANNULUS, "h": 0.05, "minimize": {"max_iter": 3}},
])
def test_config_errors_exit_2_and_write_nothing(tmp_path, data):
    out = tmp_path / "o"
    assert run(["minimize", "--config", config(tmp_path, data), "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_input_file_is_a_config_error(tmp_path):
    cfg = config(tmp_path, {"input": str(tmp_path / "nope.json")})
    assert run(["render", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_computation_error_exits_1(tmp_path, capsys):
    # one band in a pattern whose interfaces leave the tube
    cfg = config(tmp_path, {"pattern": {"tube": ANNULUS, "interfaces": [-0.7, 0.1]}})
    out = tmp_path / "o"
    assert run(["stripes", "--config", cfg, "--out", str(out)]) == 1
    assert not out.exists() or not any(out.iterdir())


def test_no_partial_outputs_on_write_failure(tmp_path):
    out = tmp_path / "o"
    with pytest.raises(TypeError):
        write_outputs(out, {"a.json": "{}\n", "b.json": None})
    assert sorted(os.listdir(out)) == []


def test_minimize_outputs_and_determinism(tmp_path, capsys):
    cfg = config(tmp_path, {"domain": ANNULUS, "h": 1 / 16, "minimize": {"max_iters": 40}})
    texts = []
    for name in ("o1", "o2"):
        assert run(["minimize", "--config", cfg, "--seed", "3", "--out", str(tmp_path / name)]) == 0
        texts.append({f: (tmp_path / name / f).read_bytes()
                      for f in ("field.json", "report.json", "trace.csv")})
    assert texts[0] == texts[1]
    rows = texts[0]["trace.csv"].decode().splitlines()
    assert rows[0] == "iteration,objective"
    values = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert json.loads(texts[0]["report.json"])["params"]["seed"] == 3


def test_stripes_energy_and_render(tmp_path, capsys):
    pattern = {"tube": ANNULUS, "bands": 2}
    assert run(["stripes", "--config", config(tmp_path, {"pattern": pattern}),
                "--out", str(tmp_path / "s")]) == 0
    assert summary(capsys)["bands"] == 2
    energy = {"pattern": {"tube": ANNULUS}, "recovery": "optimal", "eps": [0.125, 0.0625],
              "transport": {"method": "radial-oracle"}}
    assert run(["energy", "--config", config(tmp_path, energy), "--out", str(tmp_path / "e")]) == 0
    rows = (tmp_path / "e" / "energy.csv").read_text().splitlines()
    assert rows[0] == "eps,F,G,H,perimeter,transport" and len(rows) == 3
    render_cfg = {"input": str(tmp_path / "s" / "pattern.json")}
    assert run(["render", "--config", config(tmp_path, render_cfg), "--out", str(tmp_path / "r")]) == 0
    svg = (tmp_path / "r" / "figure.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<path") == 3


def test_render_a_field_file(tmp_path, capsys):
    cfg = config(tmp_path, {"domain": ANNULUS, "h": 1 / 16})
    assert run(["exact", "--config", cfg, "--out", str(tmp_path / "x")]) == 0
    rc = config(tmp_path, {"input": str(tmp_path / "x" / "field.json"), "render": {"stride": 2}}, "r.json")
    assert run(["render", "--config", rc, "--out", str(tmp_path / "r")]) == 0
    assert "<line" in (tmp_path / "r" / "figure.svg").read_text()


@pytest.mark.slow
def test_tubularity_on_the_disc_is_obstructed(tmp_path, capsys):
    cfg = config(tmp_path, {"domain": {"kind": "disc"}, "h_ladder": [1 / 16, 1 / 32, 1 / 64],
                            "minimize": {"max_iters": 300}})
    assert run(["tubularity", "--config", cfg, "--threads", "2", "--out", str(tmp_path)]) == 0
    assert summary(capsys)["verdict"] == "obstructed"
    assert json.loads((tmp_path / "tubularity.json").read_text())["verdict"] == "obstructed"
