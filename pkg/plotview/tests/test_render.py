import hashlib
import math
from pathlib import Path

import numpy as np
import pytest

from plotview import FigureSpec, SchemaError, render, render_to_file

FIXTURES = Path(__file__).parent / "fixtures"

ALL_KINDS = [
    ("density", [FIXTURES / "design_flat.json"]),
    ("margin", [FIXTURES / "gapped_report.json"]),
    ("periodogram-overlay", [FIXTURES / "periodogram.csv",
                             FIXTURES / "design_flat.json"]),
    ("photon-bar", [FIXTURES / "photons.json"]),
]


def make_spec(kind, inputs, output=None):
    return FigureSpec(kind=kind, inputs=[str(p) for p in inputs],
                      output=str(output) if output else None)


def close(fig):
    import matplotlib.pyplot as plt
    plt.close(fig)


@pytest.mark.parametrize("kind,inputs", ALL_KINDS)
def test_all_four_kinds_render_from_pinned_fixtures(kind, inputs, tmp_path):
    out = tmp_path / f"{kind}.png"
    path = render_to_file(make_spec(kind, inputs, out))
    data = Path(path).read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 1000


def test_gapped_margin_plot_dips_below_zero_over_the_gap():
    fig = render(make_spec("margin", [FIXTURES / "gapped_report.json"]))
    ax = fig.axes[0]
    line = ax.lines[0]
    x, y = line.get_xdata(), line.get_ydata()
    in_gap = (x >= math.pi / 2) & (x <= 3 * math.pi / 2)
    assert in_gap.sum() == 9
    assert np.all(y[in_gap] < 0.0)
    assert float(np.min(y)) == pytest.approx(-0.5, abs=1e-8)
    # the zero line must be drawn so dips are visible against it
    assert any(np.allclose(other.get_ydata(), 0.0) for other in ax.lines[1:])
    close(fig)


def test_density_plot_layout_and_atom_stems(tmp_path):
    fig = render(make_spec("density", [FIXTURES / "design_flat.json"]))
    assert len(fig.axes) == 4  # one panel per matrix entry
    flat_line = fig.axes[0].lines[0]
    assert np.allclose(flat_line.get_ydata(), 0.5)
    close(fig)

    # add an atom pair by hand to see the stems appear
    import json
    payload = json.loads((FIXTURES / "design_flat.json").read_text())
    spectrum = payload["data"]
    w = [[[0.25, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.25, 0.0]]]
    spectrum["atoms"] = [{"theta": math.pi / 2, "weight": w},
                         {"theta": 3 * math.pi / 2, "weight": w}]
    atomic = tmp_path / "atomic.json"
    atomic.write_text(json.dumps(spectrum))
    fig = render(make_spec("density", [atomic]))
    assert len(fig.axes[0].collections) == 2  # one vline group per atom
    close(fig)


def test_overlay_has_both_curves_in_legend():
    fig = render(make_spec("periodogram-overlay",
                           [FIXTURES / "periodogram.csv",
                            FIXTURES / "design_flat.json"]))
    labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    assert "estimate entry 11" in labels
    assert "design entry 11" in labels
    close(fig)


def test_photon_bar_has_one_bar_per_mode():
    fig = render(make_spec("photon-bar", [FIXTURES / "photons.json"]))
    assert len(fig.axes[0].patches) == 1
    close(fig)


def test_same_inputs_same_dimensions_and_axes():
    spec = make_spec("margin", [FIXTURES / "gapped_report.json"])
    first = render(spec)
    second = render(spec)
    assert tuple(first.get_size_inches()) == tuple(second.get_size_inches())
    assert first.axes[0].get_xlim() == second.axes[0].get_xlim()
    assert first.axes[0].get_ylim() == second.axes[0].get_ylim()
    close(first)
    close(second)


def test_render_never_mutates_inputs(tmp_path):
    digests = {p: hashlib.sha256(p.read_bytes()).hexdigest()
               for _, inputs in ALL_KINDS for p in inputs}
    for kind, inputs in ALL_KINDS:
        render_to_file(make_spec(kind, inputs, tmp_path / f"{kind}.png"))
    for p, digest in digests.items():
        assert hashlib.sha256(p.read_bytes()).hexdigest() == digest


def test_kind_input_arity_is_checked():
    with pytest.raises(SchemaError, match="--in"):
        render(make_spec("margin", [FIXTURES / "gapped_report.json",
                                    FIXTURES / "photons.json"]))
    with pytest.raises(SchemaError, match="--in"):
        render(make_spec("periodogram-overlay", [FIXTURES / "periodogram.csv"]))


def test_schema_mismatch_raises_with_field_name():
    with pytest.raises(SchemaError, match="per_mode"):
        render(make_spec("photon-bar", [FIXTURES / "design_flat.json"]))
    with pytest.raises(SchemaError, match="conditions"):
        render(make_spec("margin", [FIXTURES / "design_flat.json"]))
    with pytest.raises(SchemaError, match="group"):
        render(make_spec("density", [FIXTURES / "photons.json"]))
