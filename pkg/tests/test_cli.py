import json

import numpy as np
import pytest

from gpj import cli


def tiny_config(out_dir, **overrides):
    cfg = {
        "domain": {"L": 8.0, "n_cells": 12},
        "model": {"omega": 0.0, "kappa": 10.0, "potential": {"kind": "harmonic"}},
        "method": "J",
        "strategy": {
            "damping": "optimal",
            "shift_damped": "auto",
            "shift_accel": "rayleigh",
            "switch_tol": 1e-3,
            "tol": 1e-8,
            "max_iter": 200,
        },
        "output": {"dir": str(out_dir), "dump_fields": True},
    }
    for key, val in overrides.items():
        section, _, name = key.partition(".")
        if name:
            cfg[section][name] = val
        else:
            cfg[section] = val
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_run_converges_and_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    path = write_config(tmp_path, tiny_config(out))
    rc = cli.main(["run", str(path)])
    assert rc == 0
    assert (out / "history.csv").exists()
    assert (out / "field.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {"lambda", "energy", "residual", "iterations", "wall_time"}
    assert summary["residual"] <= 1e-8
    assert "converged" in capsys.readouterr().out


def test_run_exit_code_on_max_iter(tmp_path):
    cfg = tiny_config(tmp_path / "out", **{"strategy.max_iter": 2})
    rc = cli.main(["run", str(write_config(tmp_path, cfg))])
    assert rc == 2


def test_run_invalid_config_names_key(tmp_path, capsys):
    cfg = tiny_config(tmp_path / "out")
    del cfg["domain"]["n_cells"]
    rc = cli.main(["run", str(write_config(tmp_path, cfg))])
    assert rc == 1
    assert "domain.n_cells" in capsys.readouterr().err


def test_run_unknown_strategy_key(tmp_path, capsys):
    cfg = tiny_config(tmp_path / "out", **{"strategy.bogus": 1})
    rc = cli.main(["run", str(write_config(tmp_path, cfg))])
    assert rc == 1
    assert "strategy.bogus" in capsys.readouterr().err


def test_output_dir_env_override(tmp_path, monkeypatch):
    other = tmp_path / "elsewhere"
    monkeypatch.setenv("GPJ_OUTPUT_DIR", str(other))
    cfg = tiny_config(tmp_path / "ignored")
    rc = cli.main(["run", str(write_config(tmp_path, cfg))])
    assert rc == 0
    assert (other / "summary.json").exists()
    assert not (tmp_path / "ignored").exists()


def test_run_outputs_bit_identical(tmp_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    p1 = write_config(tmp_path, tiny_config(out1), "c1.json")
    p2 = write_config(tmp_path, tiny_config(out2), "c2.json")
    assert cli.main(["run", str(p1)]) == 0
    assert cli.main(["run", str(p2)]) == 0
    assert (out1 / "history.csv").read_bytes() == (out2 / "history.csv").read_bytes()
    assert (out1 / "field.csv").read_bytes() == (out2 / "field.csv").read_bytes()


def test_spectrum_command(tmp_path, capsys):
    cfg = tiny_config(tmp_path / "out")
    path = write_config(tmp_path, cfg)
    rc = cli.main(["spectrum", str(path), "--k", "5"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    vals = payload["eigenvalues"]
    assert len(vals) == 5
    assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
    # the converged eigenvalue appears in the frozen-density pencil spectrum
    assert min(abs(v - payload["lambda"]) for v in vals) <= 1e-8


def test_spectrum_size_cap(tmp_path, capsys):
    cfg = tiny_config(tmp_path / "out", **{"domain.n_cells": 128})
    rc = cli.main(["spectrum", str(write_config(tmp_path, cfg))])
    assert rc == 1
    assert "small mesh" in capsys.readouterr().err


def test_presets_listing(capsys):
    assert cli.main(["presets"]) == 0
    names = capsys.readouterr().out.split()
    assert {"harmonic", "disorder", "vortex_text", "vortex_figure"} <= set(names)
    assert cli.main(["presets", "harmonic"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["model"]["kappa"] == 1000.0
    assert cfg["model"]["potential"]["kind"] == "harmonic"
    assert cli.main(["presets", "nope"]) == 1


def test_preset_values_match_reported_parameters():
    from gpj.presets import preset_config

    harm = preset_config("harmonic")
    assert harm["domain"]["L"] == 8.0 and harm["model"]["omega"] == 0.0
    dis = preset_config("disorder")
    assert dis["model"]["kappa"] == 1.0
    assert dis["model"]["potential"]["epsilon"] == 2 ** -6
    vt, vf = preset_config("vortex_text"), preset_config("vortex_figure")
    assert vt["domain"]["L"] == 10.0 and vf["domain"]["L"] == 10.0
    assert vt["model"]["omega"] == 0.99 and vf["model"]["omega"] == 0.85


def test_validate_all_pass(capsys):
    rc = cli.main(["validate"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    assert out.count("PASS") >= 7  # six checks plus the overall line


def test_validate_detects_rotation_sign_flip(monkeypatch):
    import gpj.assembly as assembly
    from gpj.validate import check_energy_identity

    original = assembly.assemble_rotation
    monkeypatch.setattr(assembly, "assemble_rotation", lambda mesh: -original(mesh))
    passed, detail = check_energy_identity()
    assert not passed


def test_disorder_preset_runs_small(tmp_path):
    cfg = {
        "domain": {"L": 8.0, "n_cells": 16},
        "model": {
            "omega": 0.0,
            "kappa": 1.0,
            "potential": {"kind": "disorder", "epsilon": 0.125, "seed": 7},
        },
        "method": "J",
        "strategy": {"switch_tol": 1e-3, "tol": 1e-8, "max_iter": 500},
        "output": {"dir": str(tmp_path / "dis"), "dump_fields": True},
    }
    rc = cli.main(["run", str(write_config(tmp_path, cfg))])
    assert rc == 0
