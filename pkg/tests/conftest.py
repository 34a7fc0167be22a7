import json
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_ROOT = REPO_ROOT / "scenarios"


def grid_doc(rows, cellsize=10, xll=0, yll=0, nodata=-9999):
    """Build an ASCII grid document from a list of row lists."""
    nrows = len(rows)
    ncols = len(rows[0])
    lines = [
        f"ncols {ncols}",
        f"nrows {nrows}",
        f"xllcorner {xll}",
        f"yllcorner {yll}",
        f"cellsize {cellsize}",
        f"NODATA_value {nodata}",
    ]
    lines += [" ".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@pytest.fixture
def g1_scenario_path():
    return SCENARIO_ROOT / "G1.json"


@pytest.fixture
def scenario_root():
    return SCENARIO_ROOT


def write_scenario(tmp_path, config, grids=None):
    """Materialize a scenario dir: config JSON plus referenced grid docs."""
    for rel, doc in (grids or {}).items():
        target = tmp_path / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(doc, encoding="ascii")
    path = tmp_path / f"{config.get('name', 'scenario')}.json"
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


def minimal_scenario_config(**overrides):
    """A small self-consistent scenario; tests override pieces as needed."""
    config = {
        "name": "tiny",
        "rasters": {
            "pre": {"nir": "pre_nir.asc", "red": "pre_red.asc", "swir": "pre_swir.asc"},
            "post": {"nir": "post_nir.asc", "swir": "post_swir.asc"},
        },
        "burn": {"source": "threshold", "threshold": 0.1},
        "class_map": "classes.asc",
        "vegetation_classes": [
            {"class_id": 1, "name": "conifer", "agb_a": 100.0, "agb_b": 0.0,
             "agb_c": 2.0, "carbon_fraction": 0.5},
        ],
        "severity_table": [
            {"lower_dnbr": 0.1, "label": "low", "combustion_fraction": 0.2},
            {"lower_dnbr": 0.27, "label": "moderate_low", "combustion_fraction": 0.4},
            {"lower_dnbr": 0.44, "label": "moderate_high", "combustion_fraction": 0.6},
            {"lower_dnbr": 0.66, "label": "high", "combustion_fraction": 0.8},
        ],
        "emissions": {"non_co2_share": 0.05},
        "risk": {
            "p_wildfire": 0.02,
            "e_wildfire_tCO2e": 5000.0,
            "s_estimated_tCO2e": 10000.0,
            "horizon_years": 1,
        },
    }
    config.update(overrides)
    return config


def minimal_scenario_grids():
    return {
        "pre_nir.asc": grid_doc([[0.75, 0.75], [0.75, 0.75]]),
        "pre_red.asc": grid_doc([[0.25, 0.25], [0.25, 0.25]]),
        "pre_swir.asc": grid_doc([[0.25, 0.25], [0.25, 0.25]]),
        "post_nir.asc": grid_doc([[0.5, 0.75], [0.75, 0.75]]),
        "post_swir.asc": grid_doc([[0.5, 0.25], [0.25, 0.25]]),
        "classes.asc": grid_doc([[1, 1], [1, 1]]),
    }
