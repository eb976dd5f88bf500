import json

import pytest

from carlfel.errors import ValidationError
from carlfel.presets import PRESETS, run_preset


def test_unknown_preset():
    with pytest.raises(ValidationError):
        run_preset("fig1-row4")


def test_preset_names():
    assert set(PRESETS) == {"fig1-row1", "fig1-row2", "fig1-row3", "classical-growth", "two-level-pulses", "limit-comparison"}


def test_preset_files_report_and_determinism(preset, tmp_path):
    first = preset("fig1-row2")
    again = run_preset("fig1-row2", tmp_path, figures=True)
    for name in first.files:
        if name.endswith(".png") or name == "report.json":
            continue
        assert (first.out_dir / name).read_bytes() == (again.out_dir / name).read_bytes(), name
    assert (again.out_dir / "fig1-row2.png").exists()
    report = json.loads((again.out_dir / "report.json").read_text())
    base = json.loads((first.out_dir / "report.json").read_text())
    assert {k: v for k, v in report.items() if k != "files"} == {k: v for k, v in base.items() if k != "files"}
    assert report["schema"] == "carlfel.report" and report["version"] == 1
    assert {"timeseries_quantum-c.csv", "populations_first_peak.csv", "psi_density_first_peak.csv", "wigner_first_peak.csv", "wigner_first_peak.json"} <= set(report["files"])
    header = (again.out_dir / "timeseries_quantum-c.csv").read_text().splitlines()[0]
    assert header == "tau,re_A,im_A,abs_A2,photons_per_particle,mean_pbar,norm,invariant_value"
