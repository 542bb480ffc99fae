import json

import pytest

from hypdla.cli import main
from hypdla.growth import RunRecord


def test_grow_single(tmp_path):
    out = tmp_path / "one.jsonl"
    assert main(["grow", "--particles", "1", "--seed", "7", "--out", str(out)]) == 0
    rec = RunRecord.read(out)
    assert len(rec.rows) == 1 and rec.header["config"]["seed"] == 7


def test_grow_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--threads", "1", "grow", "--particles", "80", "--seed", "2", "--out", str(a)]) == 0
    assert main(["--threads", "8", "grow", "--particles", "80", "--seed", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("HYPDLA_THREADS", "4")
    out = tmp_path / "r"
    assert main(["grow", "--particles", "3", "--out", str(out)]) == 0
    assert "threads" not in RunRecord.read(out).header["config"]


def test_stats_missing_input(capsys):
    assert main(["stats", "--in", "missing.file"]) == 2
    assert "missing.file" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["grow", "--bogus"]) == 2
    assert main(["grow", "--particles", "0"]) == 2
    assert "usage" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nparticles = 4\nseed = 3\nfar_cutoff = 20\n")
    out = tmp_path / "r"
    assert main(["--config", str(cfg), "grow", "--seed", "5", "--out", str(out)]) == 0
    h = RunRecord.read(out).header
    assert h["n_particles"] == 4 and h["seed"] == 5 and h["far_cutoff"] == 20
    assert h["config"] == {"particles": 4, "seed": 5, "far_cutoff": 20.0, "command": "grow"}


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("particles = 4\ncolour = red\n")
    assert main(["--config", str(cfg), "grow"]) == 2
    assert "colour" in capsys.readouterr().err


def test_stats_and_render_are_pure(tmp_path):
    run_file = tmp_path / "r.jsonl"
    assert main(["grow", "--particles", "50", "--seed", "1", "--out", str(run_file)]) == 0
    outs = []
    for k in range(2):
        s, img = tmp_path / f"s{k}.csv", tmp_path / f"i{k}.svg"
        assert main(["stats", "--in", str(run_file), "--out", str(s), "--density-radii", "2,4"]) == 0
        assert main(["render", "--in", str(run_file), "--chart", "disc", "--out", str(img)]) == 0
        outs.append((s.read_bytes(), (tmp_path / f"s{k}.csv.density.csv").read_bytes(), img.read_bytes()))
    assert outs[0][1:] == outs[1][1:]
    # the comment line carries the config and input, not the output path
    assert outs[0][0] == outs[1][0]
    first = outs[0][0].decode().splitlines()
    assert first[0].startswith("# config ") and json.loads(first[0][9:])["command"] == "stats"
    assert first[1] == "step,t,n,X,Y,tildeY,R" and len(first) == 52


def test_malformed_input(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    assert main(["stats", "--in", str(bad)]) == 2


def test_spiral_round_trip(tmp_path):
    sp = tmp_path / "sp.jsonl"
    assert main(["spiral", "--turns", "0.5", "--out", str(sp)]) == 0
    assert main(["render", "--in", str(sp), "--out", str(tmp_path / "sp.svg")]) == 0
    assert main(["spiral", "--turns", "0", "--out", str(sp)]) == 2


def test_verify_geometry_exit_zero(capsys):
    assert main(["verify", "--suite", "geometry"]) == 0
    assert "suite geometry: PASS" in capsys.readouterr().out


def test_verify_failure_exit_one(tmp_path, capsys, monkeypatch):
    from hypdla import suites
    from hypdla.report import SuiteReport

    def failing(seed=0):
        rep = SuiteReport("geometry")
        rep.add("ball_sandwich.inner", False, 3, 0)
        return rep

    monkeypatch.setattr(suites, "geometry_suite", failing)
    assert main(["verify", "--suite", "geometry", "--json", str(tmp_path / "r.json")]) == 1
    err = capsys.readouterr().err
    assert "ball_sandwich.inner" in err and "value=3" in err
    assert json.loads((tmp_path / "r.json").read_text())["passed"] is False
