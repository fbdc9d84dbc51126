import csv
import json
import subprocess
import sys

import pytest

from fluxladder.cli import DEFAULTS, EXIT_CONFIG, EXIT_IO, EXIT_OK, main

FAST = {
    "bands": ["n_k=21"],
    "gs-scan": ["N=6", "boundary=\"open\"", "phi_points=4"],
    "current-map": ["N=6", "boundary=\"open\""],
    "dynamics": ["times=[0.0, 0.5]"],
    "short-time": [],
    "rwa-check": ["u_over_g=[10.0]", "T=0.5", "samples=3"],
    "prepare": ["N=1", "rung=1", "kinds=[\"1AS\"]", "T=10.0", "alpha_points=5"],
}


def run_cli(experiment, out, *extra):
    args = [experiment, "--out", str(out)]
    for item in FAST[experiment]:
        args += ["--set", item]
    return main(args + list(extra))


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_every_experiment_has_fast_settings():
    assert set(FAST) == set(DEFAULTS)


@pytest.mark.parametrize("experiment", sorted(FAST))
def test_runs_and_is_deterministic(experiment, tmp_path):
    assert run_cli(experiment, tmp_path / "a") == EXIT_OK
    assert run_cli(experiment, tmp_path / "b", "--threads", "2") == EXIT_OK
    first, second = snapshot(tmp_path / "a"), snapshot(tmp_path / "b")
    assert first == second
    manifest = json.loads(first["manifest.json"])
    assert manifest["experiment"] == experiment
    assert set(manifest["config"]) == set(DEFAULTS[experiment])
    for name in manifest["outputs"]:
        rows = list(csv.reader((tmp_path / "a" / name).open()))
        assert rows and all(len(r) == len(rows[0]) for r in rows)


def test_manifest_round_trip(tmp_path):
    assert run_cli("dynamics", tmp_path / "a", "--set", "kind=\"2AS\"") == EXIT_OK
    assert main(["dynamics", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == EXIT_OK
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_angle_strings_and_numbers_agree(tmp_path):
    assert main(["bands", "--out", str(tmp_path / "a"), "--set", "phi=\"0.25pi\""]) == EXIT_OK
    assert main(["bands", "--out", str(tmp_path / "b"), "--set", "phi=0.7853981633974483"]) == EXIT_OK
    assert (tmp_path / "a" / "bands.csv").read_bytes() == (tmp_path / "b" / "bands.csv").read_bytes()


@pytest.mark.parametrize(
    "override,needle",
    [("N=0", "N"), ("bogus=1", "bogus"), ("boundary=\"twisted\"", "boundary"), ("phi=\"half\"", "phi")],
)
def test_config_errors_exit_2(override, needle, tmp_path, capsys):
    assert main(["current-map", "--out", str(tmp_path), "--set", override]) == EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_bad_json_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["bands", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_manifest_for_other_experiment(tmp_path):
    assert run_cli("bands", tmp_path / "a") == EXIT_OK
    code = main(["dynamics", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")])
    assert code == EXIT_CONFIG


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_cli("bands", blocker / "sub") == EXIT_IO


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fluxladder", "bands", "--out", str(tmp_path), "--set", "n_k=5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "bands.csv" in proc.stdout
