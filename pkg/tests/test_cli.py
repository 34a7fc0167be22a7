import json

import pytest

from pyroledger.cli import main

from .conftest import (grid_doc, minimal_scenario_config,
                       minimal_scenario_grids, write_scenario)


class TestRun:
    def test_run_writes_report(self, g1_scenario_path, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["run", str(g1_scenario_path), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["totals"]["co2_kg"] == 2750.0
        assert report["risk"]["s_adjusted_tCO2e"] == 9900.0

    def test_run_stdout(self, g1_scenario_path, capsys):
        assert main(["run", str(g1_scenario_path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["insurance"]["premium_total"] == 1200.0

    def test_run_stage_subset(self, g1_scenario_path, tmp_path):
        out = tmp_path / "partial.json"
        code = main(["run", str(g1_scenario_path), "--out", str(out),
                     "--stages", "raster,fire,emissions"])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["stages"]["risk"] == "skipped"
        assert report["risk"] is None

    def test_validation_error_exit_1(self, tmp_path, capsys):
        config = minimal_scenario_config()
        config["risk"]["p_wildfire"] = 3.0
        path = write_scenario(tmp_path, config, minimal_scenario_grids())
        assert main(["run", str(path)]) == 1
        assert "/risk/p_wildfire" in capsys.readouterr().err

    def test_execution_error_exit_2(self, tmp_path, capsys):
        grids = minimal_scenario_grids()
        grids["classes.asc"] = grid_doc([[1, 1], [42, 1]])  # id 42 undefined
        path = write_scenario(tmp_path, minimal_scenario_config(), grids)
        assert main(["run", str(path)]) == 2
        assert "emissions" in capsys.readouterr().err

    def test_missing_file_exit_1(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "ghost.json")]) == 1

    def test_seed_flag(self, g1_scenario_path, tmp_path):
        out = tmp_path / "seeded.json"
        assert main(["run", str(g1_scenario_path), "--seed", "99",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["seed"] == 99


class TestValidate:
    def test_clean_scenario(self, g1_scenario_path, capsys):
        assert main(["validate", str(g1_scenario_path)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_findings_printed(self, tmp_path, capsys):
        config = minimal_scenario_config()
        del config["rasters"]["pre"]["red"]
        path = write_scenario(tmp_path, config, minimal_scenario_grids())
        assert main(["validate", str(path)]) == 1
        out = capsys.readouterr().out
        assert "error" in out and "/rasters/pre" in out


class TestIndex:
    def test_compute_ndvi(self, tmp_path, capsys):
        (tmp_path / "nir.asc").write_text(grid_doc([[0.5, 0.75]]), encoding="ascii")
        (tmp_path / "red.asc").write_text(grid_doc([[0.1, 0.25]]), encoding="ascii")
        out = tmp_path / "ndvi.asc"
        code = main(["index", "--kind", "ndvi",
                     "--bands", f"nir={tmp_path / 'nir.asc'}",
                     f"red={tmp_path / 'red.asc'}", "--out", str(out)])
        assert code == 0
        from pyroledger.raster import read_grid
        grid = read_grid(out)
        assert grid.values[0, 0] == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert grid.values[0, 1] == 0.5

    def test_bai(self, tmp_path):
        (tmp_path / "nir.asc").write_text(grid_doc([[0.2]]), encoding="ascii")
        (tmp_path / "red.asc").write_text(grid_doc([[0.3]]), encoding="ascii")
        out = tmp_path / "bai.asc"
        assert main(["index", "--kind", "bai",
                     "--bands", f"red={tmp_path / 'red.asc'}",
                     f"nir={tmp_path / 'nir.asc'}", "--out", str(out)]) == 0

    def test_bad_band_spec(self, tmp_path, capsys):
        assert main(["index", "--kind", "ndvi", "--bands", "nir", "--out",
                     str(tmp_path / "x.asc")]) == 1

    def test_missing_band_file(self, tmp_path, capsys):
        assert main(["index", "--kind", "ndvi",
                     "--bands", f"nir={tmp_path / 'missing.asc'}",
                     f"red={tmp_path / 'also.asc'}",
                     "--out", str(tmp_path / "x.asc")]) == 1

    def test_malformed_grid_exit_2(self, tmp_path, capsys):
        (tmp_path / "bad.asc").write_text("ncols 1\njunk\n", encoding="ascii")
        (tmp_path / "red.asc").write_text(grid_doc([[0.1]]), encoding="ascii")
        assert main(["index", "--kind", "ndvi",
                     "--bands", f"nir={tmp_path / 'bad.asc'}",
                     f"red={tmp_path / 'red.asc'}",
                     "--out", str(tmp_path / "x.asc")]) == 2
