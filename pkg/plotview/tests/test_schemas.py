import json
from pathlib import Path

import numpy as np
import pytest

from plotview import (
    SchemaError,
    load_json,
    parse_margin_report,
    parse_periodogram_csv,
    parse_photons,
    parse_spectrum,
    unwrap,
)

FIXTURES = Path(__file__).parent / "fixtures"


def test_unwrap_peels_report_envelopes():
    envelope = {"verdict": "ok", "margins": {}, "data": {"k": 1}}
    assert unwrap(envelope) == {"k": 1}
    assert unwrap({"k": 1}) == {"k": 1}
    with pytest.raises(SchemaError, match="data"):
        unwrap([1, 2, 3])


def test_parse_design_spectrum_fixture():
    spectrum = parse_spectrum(load_json(FIXTURES / "design_flat.json"))
    assert spectrum["dim"] == 2
    assert spectrum["values"].shape == (16, 2, 2)
    assert np.allclose(spectrum["values"], 0.5 * np.eye(2))
    assert spectrum["thetas"][0] == 0.0
    assert spectrum["atoms"] == []


def test_parse_spectrum_names_bad_fields(tmp_path):
    good = load_json(FIXTURES / "gapped_spectrum.json")

    fourier = json.loads(json.dumps(good))
    fourier["density"]["form"] = "fourier"
    with pytest.raises(SchemaError, match="density.form"):
        parse_spectrum(fourier)

    finite = json.loads(json.dumps(good))
    finite["group"]["kind"] = "finite"
    with pytest.raises(SchemaError, match="group.kind"):
        parse_spectrum(finite)

    short = json.loads(json.dumps(good))
    short["density"]["values"] = short["density"]["values"][:3]
    with pytest.raises(SchemaError, match="density.values"):
        parse_spectrum(short)

    with pytest.raises(SchemaError, match="density"):
        parse_spectrum({"group": good["group"]})


def test_parse_margin_report_fixture():
    report = parse_margin_report(load_json(FIXTURES / "gapped_report.json"))
    assert report["verdict"] == "invalid"
    assert report["points"].shape == report["margins"].shape == (16,)
    assert (report["margins"] < 0).sum() == 9


def test_parse_margin_report_rejects_non_reports():
    with pytest.raises(SchemaError, match="conditions"):
        parse_margin_report(load_json(FIXTURES / "design_flat.json"))
    with pytest.raises(SchemaError, match="conditions"):
        parse_margin_report({"conditions": [{"name": "other", "detail": {}}]})


def test_parse_periodogram_fixture():
    table = parse_periodogram_csv(FIXTURES / "periodogram.csv")
    assert table["dim"] == 1
    assert table["values"].shape == (128, 1, 1)
    assert abs(float(np.mean(table["values"][:, 0, 0].real)) - 0.5) < 0.1


def test_parse_periodogram_names_bad_rows(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("theta,entry_11_re,entry_11_im\n0.0,oops,0.0\n")
    with pytest.raises(SchemaError, match="row 2"):
        parse_periodogram_csv(bad)
    nonsquare = tmp_path / "nonsquare.csv"
    nonsquare.write_text("theta,entry_11_re,entry_11_im,entry_12_re,entry_12_im\n")
    with pytest.raises(SchemaError, match="header"):
        parse_periodogram_csv(nonsquare)


def test_parse_photons_fixture():
    photons = parse_photons(load_json(FIXTURES / "photons.json"))
    assert photons["per_mode"] == [0.0]
    assert photons["total"] == 0.0
    with pytest.raises(SchemaError, match="per_mode"):
        parse_photons({"total": 0.0})


def test_load_json_errors_name_the_path(tmp_path):
    with pytest.raises(SchemaError, match="missing.json"):
        load_json(tmp_path / "missing.json")
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{nope")
    with pytest.raises(SchemaError, match="garbled.json"):
        load_json(garbled)
