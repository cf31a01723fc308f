import io
import json
import subprocess
import sys

import numpy as np
import pytest

from kwmspec import (
    AutocovarianceMap,
    ClassicalCovarianceKernel,
    SpectralMeasure,
    integer_group,
    read_paths_csv,
    read_periodogram_csv,
    validate_spectrum,
)
from kwmspec.cli import ENVELOPE_KEYS, parse_window, run

Z = integer_group(16)


def vacuum_kernel_dict():
    return AutocovarianceMap(Z, 1, {0: 0.5 * np.eye(2)}).to_dict()


def correlated_kernel_dict():
    return AutocovarianceMap(Z, 1,
                             {a: 0.5 * np.eye(2) for a in range(3)}).to_dict()


def flat_spectrum_dict():
    vals = np.broadcast_to(0.5 * np.eye(2), (16, 2, 2)).astype(complex)
    return SpectralMeasure.from_grid(Z, 1, vals).to_dict()


def gapped_spectrum_dict():
    vals = np.zeros((16, 2, 2), dtype=complex)
    for j, theta in enumerate(Z.grid_thetas()):
        if not np.pi / 2 <= theta <= 3 * np.pi / 2:
            vals[j] = 0.5 * np.eye(2)
    return SpectralMeasure.from_grid(Z, 1, vals).to_dict()


def write_json(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def invoke(argv, capsys, monkeypatch=None, stdin_text=None, env=None):
    if stdin_text is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin_text))
    if env:
        for key, value in env.items():
            monkeypatch.setenv(key, value)
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_envelope(out):
    envelope = json.loads(out)
    assert set(envelope) == ENVELOPE_KEYS
    return envelope


# -- verdicts and envelope shape ------------------------------------------------


def test_validate_kernel_vacuum_exits_zero(tmp_path, capsys):
    path = write_json(tmp_path, "vacuum.json", vacuum_kernel_dict())
    code, out, err = invoke(["validate-kernel", "--input", path], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["verdict"] == "valid"
    assert set(envelope["margins"]) == {f"window_{n}" for n in range(1, 9)}
    assert all(m >= -1e-12 for m in envelope["margins"].values())
    assert len(envelope["data"]["windows"]) == 8
    assert "validate-kernel: valid" in err


def test_validate_kernel_invalid_exits_one_with_certificate(tmp_path, capsys):
    path = write_json(tmp_path, "corr.json", correlated_kernel_dict())
    code, out, _ = invoke(["validate-kernel", "--input", path], capsys)
    assert code == 1
    envelope = parse_envelope(out)
    assert envelope["verdict"] == "invalid"
    # threshold offset: margin = min eig + tol * scale
    assert envelope["margins"]["window_2"] == pytest.approx(-0.5, abs=1e-8)
    bad = next(w["report"] for w in envelope["data"]["windows"]
               if w["report"]["verdict"] == "invalid")
    assert bad["certificate"] is not None
    assert bad["min_eigenvalue"] == pytest.approx(-0.5, abs=1e-12)


def test_validate_kernel_single_window_flag(tmp_path, capsys):
    path = write_json(tmp_path, "vacuum.json", vacuum_kernel_dict())
    code, out, _ = invoke(["validate-kernel", "--input", path,
                           "--window", "0,3,5"], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert list(envelope["margins"]) == ["window_3"]
    assert envelope["data"]["windows"][0]["sites"] == [0, 3, 5]


def test_validate_spectrum_flat_and_gapped(tmp_path, capsys):
    flat = write_json(tmp_path, "flat.json", flat_spectrum_dict())
    code, out, _ = invoke(["validate-spectrum", "--input", flat], capsys)
    assert code == 0
    assert parse_envelope(out)["verdict"] == "valid"

    gapped = write_json(tmp_path, "gap.json", gapped_spectrum_dict())
    code, out, err = invoke(["validate-spectrum", "--input", gapped], capsys)
    assert code == 1
    envelope = parse_envelope(out)
    assert envelope["margins"]["density_uncertainty"] == pytest.approx(-0.5,
                                                                       abs=1e-8)
    failing = envelope["data"]["failing_points"]
    assert len(failing) == 9
    assert all(np.pi / 2 <= t <= 3 * np.pi / 2 for t in failing)
    assert "9 failing dual point(s)" in err


# -- exit code 2 ------------------------------------------------------------------


def test_usage_and_parse_failures_exit_two(tmp_path, capsys, monkeypatch):
    code, _, _ = invoke(["validate-kernel"], capsys, monkeypatch,
                        stdin_text="this is not json")
    assert code == 2

    code, _, _ = invoke(["validate-kernel", "--input",
                         str(tmp_path / "missing.json")], capsys)
    assert code == 2

    code, _, err = invoke(["no-such-command"], capsys)
    assert code == 2

    path = write_json(tmp_path, "vacuum.json", vacuum_kernel_dict())
    code, _, _ = invoke(["validate-kernel", "--input", path, "--tol", "-1"],
                        capsys)
    assert code == 2
    code, _, _ = invoke(["validate-kernel", "--input", path,
                         "--window", "5..1"], capsys)
    assert code == 2


def test_periodogram_usage_guard_exits_two(tmp_path, capsys):
    csv_path = tmp_path / "paths.csv"
    csv_path.write_text("site,mode,component,value\n0,1,q,1.0\n1,1,q,-1.0\n")
    code, _, err = invoke(["periodogram", "--input", str(csv_path),
                           "--segments", "3", "--output",
                           str(tmp_path / "out.csv")], capsys)
    assert code == 2
    assert "at least 4 segments" in err


# -- tolerance plumbing ---------------------------------------------------------


def test_kwm_tol_env_and_explicit_flag(tmp_path, capsys, monkeypatch):
    path = write_json(tmp_path, "corr.json", correlated_kernel_dict())
    code, _, _ = invoke(["validate-kernel", "--input", path], capsys,
                        monkeypatch, env={"KWM_TOL": "1.0"})
    assert code == 0  # a huge tolerance waves the bad kernel through

    code, _, _ = invoke(["validate-kernel", "--input", path, "--tol", "1e-9"],
                        capsys, monkeypatch, env={"KWM_TOL": "1.0"})
    assert code == 1  # explicit flag beats the environment

    code, _, _ = invoke(["validate-kernel", "--input", path], capsys,
                        monkeypatch, env={"KWM_TOL": "junk"})
    assert code == 2


# -- transforms and pipes ---------------------------------------------------------


def test_envelope_output_pipes_back_in(tmp_path, capsys, monkeypatch):
    spec_path = write_json(tmp_path, "flat.json", flat_spectrum_dict())
    code, out, _ = invoke(["to-kernel", "--input", spec_path, "--lags=-7..7"],
                          capsys)
    assert code == 0
    kernel_envelope = out

    code, out, _ = invoke(["to-spectrum"], capsys, monkeypatch,
                          stdin_text=kernel_envelope)
    assert code == 0
    envelope = parse_envelope(out)
    back = SpectralMeasure.from_dict(envelope["data"])
    assert back.form == "fourier"
    vals = back.density_values()
    assert np.max(np.abs(vals - 0.5 * np.eye(2))) <= 1e-10


def test_negative_lag_range_without_equals(tmp_path, capsys):
    spec_path = write_json(tmp_path, "flat.json", flat_spectrum_dict())
    code, out, _ = invoke(["to-kernel", "--input", spec_path,
                           "--lags", "-7..7"], capsys)
    assert code == 0
    lags = [item["a"] for item in parse_envelope(out)["data"]["lags"]]
    assert lags == list(range(-7, 8))


def test_shell_pipe_roundtrip(tmp_path):
    # band-limited fixture so lags -7..7 carry the whole density
    thetas = Z.grid_thetas()
    vals = ((1.0 + 0.5 * np.cos(thetas))[:, None, None]
            * np.eye(2)).astype(complex)
    measure = SpectralMeasure.from_grid(Z, 1, vals)
    spec_path = write_json(tmp_path, "band.json", measure.to_dict())
    pipe = (f"{sys.executable} -m kwmspec.cli to-kernel --input {spec_path} "
            f"--lags=-7..7 | {sys.executable} -m kwmspec.cli to-spectrum")
    proc = subprocess.run(pipe, shell=True, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    back = SpectralMeasure.from_dict(json.loads(proc.stdout)["data"])
    assert np.max(np.abs(back.density_values() - measure.values)) <= 1e-10


def test_repeat_invocations_are_byte_identical(tmp_path):
    spec_path = write_json(tmp_path, "gap.json", gapped_spectrum_dict())
    cmd = [sys.executable, "-m", "kwmspec.cli", "validate-spectrum",
           "--input", spec_path]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    assert first.returncode == second.returncode == 1
    assert first.stdout == second.stdout


# -- design, photons, diagnose ------------------------------------------------------


def test_design_builds_valid_measure(tmp_path, capsys):
    payload = {"k": 1, "group": Z.to_dict(),
               "field": np.broadcast_to(0.5 * np.eye(2), (16, 2, 2)).tolist()}
    path = write_json(tmp_path, "design.json", payload)
    code, out, _ = invoke(["design", "--input", path], capsys)
    assert code == 0
    measure = SpectralMeasure.from_dict(parse_envelope(out)["data"])
    assert validate_spectrum(measure).valid


def test_design_rejects_bad_field_with_points(tmp_path, capsys):
    field = np.broadcast_to(0.5 * np.eye(2), (16, 2, 2)).copy()
    field[5] = 0.1 * np.eye(2)
    field[11] = 0.1 * np.eye(2)
    payload = {"k": 1, "group": Z.to_dict(), "field": field.tolist()}
    path = write_json(tmp_path, "design.json", payload)
    code, out, _ = invoke(["design", "--input", path], capsys)
    assert code == 1
    envelope = parse_envelope(out)
    assert envelope["verdict"] == "invalid"
    assert len(envelope["data"]["offending_points"]) == 2


def test_photon_numbers_report(tmp_path, capsys):
    path = write_json(tmp_path, "flat.json", flat_spectrum_dict())
    code, out, _ = invoke(["photon-numbers", "--input", path], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["data"]["per_mode"] == [pytest.approx(0.0, abs=1e-12)]
    assert envelope["margins"]["min_per_mode"] == pytest.approx(0.0, abs=1e-12)


def test_diagnose_reports_purity_and_gaps(tmp_path, capsys):
    flat = write_json(tmp_path, "flat.json", flat_spectrum_dict())
    code, out, _ = invoke(["diagnose", "--input", flat], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["margins"]["purity"] == pytest.approx(0.0, abs=1e-12)
    assert envelope["data"]["decomposition"]["gap_cells"] == []

    gapped = write_json(tmp_path, "gap.json", gapped_spectrum_dict())
    code, out, _ = invoke(["diagnose", "--input", gapped], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["margins"]["purity"] < 0
    assert len(envelope["data"]["decomposition"]["gap_cells"]) == 9


# -- simulation front ends ------------------------------------------------------------


def test_simulate_displacement_cli(tmp_path, capsys):
    kernel = write_json(tmp_path, "vacuum.json", vacuum_kernel_dict())
    noise = write_json(tmp_path, "noise.json",
                       ClassicalCovarianceKernel(Z, 1, {0: np.eye(2)}).to_dict())
    code, out, _ = invoke(["simulate-displacement", "--kernel", kernel,
                           "--noise", noise, "--window", "0..1",
                           "--samples", "2000", "--seed", "0"], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["margins"]["max_se_ratio"] <= 5.0
    assert envelope["data"]["mc"]["n_samples"] == 2000


def test_sample_and_periodogram_file_flow(tmp_path, capsys):
    # fourier form has no grid Nyquist bound, so long paths are fair game
    flat = SpectralMeasure.from_fourier(Z, 1, {0: 0.5 * np.eye(2)})
    spec_path = write_json(tmp_path, "flat.json", flat.to_dict())
    paths_csv = str(tmp_path / "paths.csv")
    code, out, _ = invoke(["sample-quadrature", "--input", spec_path,
                           "--component", "q", "--length", "256",
                           "--output", paths_csv, "--seed", "3"], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["data"]["csv_path"] == paths_csv
    with open(paths_csv) as fh:
        paths, component = read_paths_csv(fh)
    assert component == "q"
    assert paths.shape == (1, 256)

    per_csv = str(tmp_path / "per.csv")
    code, out, _ = invoke(["periodogram", "--input", paths_csv,
                           "--segments", "4", "--output", per_csv], capsys)
    assert code == 0
    envelope = parse_envelope(out)
    assert envelope["data"]["grid_size"] == 64
    assert abs(envelope["data"]["trace_mass"] - 0.5) <= 0.2
    with open(per_csv) as fh:
        estimate = read_periodogram_csv(fh)
    assert estimate.values.shape == (64, 1, 1)


# -- window grammar unit checks ---------------------------------------------------


def test_parse_window_grammar():
    assert parse_window("0..3", Z) == [0, 1, 2, 3]
    assert parse_window("-2..2", Z) == [-2, -1, 0, 1, 2]
    assert parse_window("0,5,9", Z) == [0, 5, 9]
    from kwmspec import cyclic_group
    g = cyclic_group(2, 3)
    assert parse_window("0:1,1:2", g) == [(0, 1), (1, 2)]
    with pytest.raises(Exception):
        parse_window("3..1", Z)
