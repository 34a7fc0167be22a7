"""Scenario configuration: loading, pointer overrides, and validation.

A scenario is a single JSON document; raster grids, the burn mask, and
the class map are referenced by path relative to the document. JSON keeps
the config losslessly round-trippable through the HTTP service and the
UI, and what-if overrides are JSON-pointer-style ``{path, value}`` pairs
applied to a copy of the document, so the CLI and the service share one
override grammar.

``validate_scenario`` returns findings (severity + config path + message)
rather than raising, and reports everything it can find in one pass.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .carbon import ADDITIVE, SHARE_OF_TOTAL, SeverityTable, VegetationClass
from .insurance import Policy, ReportingPattern
from .risk import BufferPool, FireHistory
from .uncertainty import DistributionSpec

STAGES = ("raster", "fire", "emissions", "risk", "buffer", "insurance",
          "uncertainty", "sensitivity")

#: Report section each stage owns, for output-path dependency checks.
_SECTION_STAGE = {
    "fires": "emissions",
    "totals": "emissions",
    "risk": "risk",
    "buffer": "buffer",
    "insurance": "insurance",
}

_TOP_LEVEL_KEYS = {
    "name", "description", "rasters", "burn", "connectivity", "class_map",
    "vegetation_classes", "severity_table", "emissions", "risk", "buffer",
    "insurance", "distributions", "mc", "sensitivity", "stages", "report",
}


class ScenarioError(ValueError):
    """Scenario config is structurally unusable (bad JSON, bad pointer, ...)."""


class ScenarioValidationError(ScenarioError):
    """Validation produced error findings; carries the full list."""

    def __init__(self, findings):
        errors = [f for f in findings if f.severity == "error"]
        super().__init__("; ".join(f"{f.path}: {f.message}" for f in errors))
        self.findings = findings


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def as_dict(self) -> dict:
        return {"severity": self.severity, "path": self.path, "message": self.message}


@dataclass(frozen=True)
class Scenario:
    """Raw config plus the directory its file references resolve against."""

    name: str
    base_dir: Path
    config: dict

    @classmethod
    def from_config(cls, config: Mapping, base_dir, name: str | None = None) -> "Scenario":
        if not isinstance(config, Mapping):
            raise ScenarioError(f"scenario config must be a JSON object, got {type(config).__name__}")
        config = copy.deepcopy(dict(config))
        return cls(name=name or str(config.get("name", "scenario")),
                   base_dir=Path(base_dir), config=config)

    def resolve(self, relative: str) -> Path:
        return self.base_dir / relative

    def with_overrides(self, overrides) -> "Scenario":
        """New scenario with pointer overrides applied to a config copy."""
        config = copy.deepcopy(self.config)
        for item in overrides:
            set_pointer(config, item["path"], item["value"])
        return Scenario(name=self.name, base_dir=self.base_dir, config=config)

    def enabled_stages(self, override=None) -> tuple[str, ...]:
        requested = override if override is not None else self.config.get("stages")
        if requested is None:
            return STAGES
        requested = set(requested)
        unknown = requested - set(STAGES)
        if unknown:
            raise ScenarioError(f"unknown stage name(s): {sorted(unknown)}")
        return tuple(s for s in STAGES if s in requested)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc
    return Scenario.from_config(config, base_dir=path.parent,
                                name=str(config.get("name", path.stem)))


# ---------------------------------------------------------------------------
# JSON-pointer-style access ("/risk/p_wildfire", "/vegetation_classes/0/agb_a")
# ---------------------------------------------------------------------------

def _pointer_tokens(path: str) -> list[str]:
    if not path.startswith("/"):
        raise ScenarioError(f"override path must start with '/', got {path!r}")
    return path[1:].split("/") if len(path) > 1 else []

def get_pointer(doc, path: str):
    node = doc
    for token in _pointer_tokens(path):
        if isinstance(node, Mapping):
            if token not in node:
                raise ScenarioError(f"path {path!r}: no key {token!r}")
            node = node[token]
        elif isinstance(node, list):
            try:
                node = node[int(token)]
            except (ValueError, IndexError):
                raise ScenarioError(f"path {path!r}: bad list index {token!r}") from None
        else:
            raise ScenarioError(f"path {path!r}: {token!r} indexes a scalar")
    return node

def set_pointer(doc, path: str, value) -> None:
    tokens = _pointer_tokens(path)
    if not tokens:
        raise ScenarioError("cannot replace the whole document")
    parent = doc if len(tokens) == 1 else get_pointer(doc, "/" + "/".join(tokens[:-1]))
    leaf = tokens[-1]
    if isinstance(parent, Mapping):
        # Overrides replace existing values; silently growing the config
        # would hide typos in what-if paths.
        if leaf not in parent:
            raise ScenarioError(f"path {path!r}: no key {leaf!r}")
        parent[leaf] = value
    elif isinstance(parent, list):
        try:
            parent[int(leaf)] = value
        except (ValueError, IndexError):
            raise ScenarioError(f"path {path!r}: bad list index {leaf!r}") from None
    else:
        raise ScenarioError(f"path {path!r}: parent is a scalar")


# ---------------------------------------------------------------------------
# Domain table builders
# ---------------------------------------------------------------------------

def build_vegetation_classes(config: Mapping) -> dict[int, VegetationClass]:
    classes = {}
    for row in config.get("vegetation_classes", []):
        veg = VegetationClass(
            class_id=int(row["class_id"]),
            name=str(row.get("name", f"class-{row['class_id']}")),
            agb_a=float(row["agb_a"]),
            agb_b=float(row["agb_b"]),
            agb_c=float(row["agb_c"]),
            carbon_fraction=float(row["carbon_fraction"]),
        )
        if veg.class_id in classes:
            raise ScenarioError(f"duplicate vegetation class_id {veg.class_id}")
        classes[veg.class_id] = veg
    return classes


def build_severity_table(config: Mapping) -> SeverityTable:
    rows = config.get("severity_table")
    if not rows:
        raise ScenarioError("severity_table is missing or empty")
    return SeverityTable.from_rows(rows)


def load_fire_history_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"year", "emissions_tCO2e"} - set(reader.fieldnames or ())
        if missing:
            raise ScenarioError(f"{path}: fire history CSV missing column(s) {sorted(missing)}")
        return [{"year": int(r["year"]), "emissions_tCO2e": float(r["emissions_tCO2e"])}
                for r in reader]


def build_fire_history(scenario: Scenario) -> FireHistory | None:
    cfg = (scenario.config.get("risk") or {}).get("fire_history")
    if cfg is None:
        return None
    rows = cfg.get("events", [])
    if "csv" in cfg:
        rows = load_fire_history_csv(scenario.resolve(cfg["csv"]))
    return FireHistory.from_rows(
        observation_years=int(cfg["observation_years"]),
        rows=rows,
        start_year=int(cfg["start_year"]) if "start_year" in cfg else None,
    )


def build_policies(config: Mapping) -> list[Policy]:
    return [
        Policy(
            insured_credits_tCO2e=float(row["insured_credits_tCO2e"]),
            credit_price=float(row["credit_price"]),
            p_wildfire=float(row["p_wildfire"]),
            expected_loss_fraction=float(row["expected_loss_fraction"]),
            loading=float(row["loading"]),
            risk_tier=str(row.get("risk_tier", "medium")),
        )
        for row in (config.get("insurance") or {}).get("policies", [])
    ]


def build_reporting_pattern(config: Mapping) -> ReportingPattern | None:
    ibnr = (config.get("insurance") or {}).get("ibnr")
    if not ibnr:
        return None
    return ReportingPattern(tuple(float(f) for f in ibnr["pattern"]))


def build_buffer_pool(config: Mapping) -> BufferPool | None:
    cfg = config.get("buffer")
    if not cfg:
        return None
    return BufferPool(balance_tCO2e=float(cfg["initial_balance_tCO2e"]),
                      contribution_rate=float(cfg["contribution_rate"]))


def build_distributions(config: Mapping) -> dict[str, DistributionSpec]:
    specs = {}
    for row in config.get("distributions", []):
        path = row["path"]
        if path in specs:
            raise ScenarioError(f"duplicate distribution for path {path!r}")
        fields = {k: v for k, v in row.items() if k != "path"}
        specs[path] = DistributionSpec.from_config(fields)
    return specs


def mc_settings(config: Mapping) -> dict:
    cfg = dict(config.get("mc") or {})
    return {
        "n": int(cfg.get("n", 1000)),
        "seed": int(cfg.get("seed", 0)),
        "ci_level": float(cfg.get("ci_level", 0.95)),
        "ci_method": str(cfg.get("ci_method", "normal")),
        "outputs": list(cfg.get("outputs", [])),
    }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check(findings, condition, path, message, severity="error"):
    if not condition:
        findings.append(Finding(severity, path, message))
    return bool(condition)


def _file_finding(findings, scenario, relative, path):
    if not isinstance(relative, str) or not relative:
        findings.append(Finding("error", path, "expected a file path string"))
        return
    target = scenario.resolve(relative)
    if not target.is_file():
        findings.append(Finding("error", path, f"file not found: {target}"))


def validate_scenario(scenario: Scenario) -> list[Finding]:
    """All-at-once validation; errors block run_pipeline, warnings do not."""
    findings: list[Finding] = []
    config = scenario.config

    for key in config:
        if key not in _TOP_LEVEL_KEYS:
            findings.append(Finding("warning", f"/{key}", "unknown config key (ignored)"))

    try:
        stages = scenario.enabled_stages()
    except ScenarioError as exc:
        findings.append(Finding("error", "/stages", str(exc)))
        stages = STAGES

    _validate_stage_deps(findings, config, stages)
    _validate_rasters(findings, scenario, stages)
    _validate_burn(findings, scenario, stages)
    _validate_tables(findings, scenario, stages)
    _validate_emissions(findings, config)
    _validate_risk(findings, scenario, stages)
    _validate_buffer(findings, config, stages)
    _validate_insurance(findings, config, stages)
    _validate_uncertainty(findings, config, stages)
    _validate_sensitivity(findings, config, stages)
    return findings


def _validate_stage_deps(findings, config, stages):
    enabled = set(stages)
    deps = {"fire": ("raster",), "emissions": ("fire", "raster")}
    for stage, needed in deps.items():
        if stage in enabled:
            for dep in needed:
                _check(findings, dep in enabled, "/stages",
                       f"stage '{stage}' requires stage '{dep}'")


def _validate_rasters(findings, scenario, stages):
    if "raster" not in stages:
        return
    cfg = scenario.config.get("rasters")
    if not _check(findings, isinstance(cfg, Mapping), "/rasters",
                  "rasters section is required"):
        return
    mode_ok = ("ndvi" in cfg and "dnbr" in cfg) or ("pre" in cfg)
    _check(findings, mode_ok, "/rasters",
           "provide either precomputed 'ndvi'+'dnbr' or 'pre'/'post' band files")
    check_mode = cfg.get("reflectance_check", "error")
    _check(findings, check_mode in ("error", "warn", "off"), "/rasters/reflectance_check",
           f"must be 'error', 'warn', or 'off', got {check_mode!r}")
    for key in ("ndvi", "dnbr"):
        if key in cfg:
            _file_finding(findings, scenario, cfg[key], f"/rasters/{key}")
    for scene in ("pre", "post"):
        bands = cfg.get(scene)
        if bands is None:
            continue
        if not _check(findings, isinstance(bands, Mapping), f"/rasters/{scene}",
                      "expected a band-name to file mapping"):
            continue
        for band, rel in bands.items():
            _file_finding(findings, scenario, rel, f"/rasters/{scene}/{band}")
    if "pre" in cfg and "ndvi" not in cfg:
        pre = cfg.get("pre") or {}
        for band in ("nir", "red"):
            _check(findings, band in pre, "/rasters/pre",
                   f"NDVI from bands requires pre-scene '{band}'")
    if "pre" in cfg and "dnbr" not in cfg:
        pre, post = cfg.get("pre") or {}, cfg.get("post") or {}
        for band in ("nir", "swir"):
            _check(findings, band in pre, "/rasters/pre",
                   f"dNBR from bands requires pre-scene '{band}'")
            _check(findings, band in post, "/rasters/post",
                   f"dNBR from bands requires post-scene '{band}'")


def _validate_burn(findings, scenario, stages):
    if "fire" not in stages:
        return
    cfg = scenario.config.get("burn")
    if not _check(findings, isinstance(cfg, Mapping), "/burn",
                  "burn section is required for the fire stage"):
        return
    source = cfg.get("source")
    if source == "threshold":
        _check(findings, isinstance(cfg.get("threshold"), (int, float)),
               "/burn/threshold", "threshold must be a number")
    elif source == "mask":
        if _check(findings, "mask_file" in cfg, "/burn/mask_file",
                  "mask source requires 'mask_file'"):
            _file_finding(findings, scenario, cfg["mask_file"], "/burn/mask_file")
    else:
        findings.append(Finding("error", "/burn/source",
                                f"source must be 'threshold' or 'mask', got {source!r}"))
    connectivity = scenario.config.get("connectivity", 4)
    _check(findings, connectivity in (4, 8), "/connectivity",
           f"connectivity must be 4 or 8, got {connectivity!r}")


def _validate_tables(findings, scenario, stages):
    if "emissions" not in stages:
        return
    if _check(findings, "class_map" in scenario.config, "/class_map",
              "class_map raster is required for the emissions stage"):
        _file_finding(findings, scenario, scenario.config["class_map"], "/class_map")
    try:
        classes = build_vegetation_classes(scenario.config)
        _check(findings, bool(classes), "/vegetation_classes",
               "at least one vegetation class is required")
    except (ScenarioError, ValueError, KeyError, TypeError) as exc:
        findings.append(Finding("error", "/vegetation_classes", str(exc)))
    try:
        build_severity_table(scenario.config)
    except (ScenarioError, ValueError, KeyError, TypeError) as exc:
        findings.append(Finding("error", "/severity_table", str(exc)))


def _validate_emissions(findings, config):
    cfg = config.get("emissions") or {}
    share = cfg.get("non_co2_share", 0.0)
    _check(findings, isinstance(share, (int, float)) and 0.0 <= share < 0.5,
           "/emissions/non_co2_share", f"must be in [0, 0.5), got {share!r}")
    convention = cfg.get("co2e_convention", SHARE_OF_TOTAL)
    _check(findings, convention in (SHARE_OF_TOTAL, ADDITIVE),
           "/emissions/co2e_convention",
           f"must be '{SHARE_OF_TOTAL}' or '{ADDITIVE}', got {convention!r}")
    pathway = cfg.get("pathway", "severity")
    _check(findings, pathway in ("severity", "ndvi_delta"), "/emissions/pathway",
           f"must be 'severity' or 'ndvi_delta', got {pathway!r}")


def _validate_risk(findings, scenario, stages):
    if "risk" not in stages:
        return
    cfg = scenario.config.get("risk")
    if not _check(findings, isinstance(cfg, Mapping), "/risk",
                  "risk section is required for the risk stage"):
        return
    horizon = cfg.get("horizon_years", 1)
    _check(findings, isinstance(horizon, int) and horizon >= 1, "/risk/horizon_years",
           f"must be an integer >= 1, got {horizon!r}")
    smoothing = cfg.get("smoothing", "mle")
    _check(findings, smoothing in ("mle", "laplace"), "/risk/smoothing",
           f"must be 'mle' or 'laplace', got {smoothing!r}")
    p = cfg.get("p_wildfire")
    if p is not None:
        _check(findings, isinstance(p, (int, float)) and 0.0 <= p <= 1.0,
               "/risk/p_wildfire", f"must be in [0, 1], got {p!r}")
    history = None
    try:
        history = build_fire_history(scenario)
    except (ScenarioError, ValueError, KeyError, TypeError, OSError) as exc:
        findings.append(Finding("error", "/risk/fire_history", str(exc)))
    if p is None and history is None:
        findings.append(Finding(
            "warning", "/risk",
            "no p_wildfire and no fire_history; wildfire probability defaults to 0"))
    s_estimated = cfg.get("s_estimated_tCO2e")
    _check(findings, isinstance(s_estimated, (int, float)) and s_estimated >= 0,
           "/risk/s_estimated_tCO2e", f"must be a number >= 0, got {s_estimated!r}")
    e_cfg = cfg.get("e_wildfire_tCO2e", {"source": "emissions"})
    source = None
    if isinstance(e_cfg, Mapping):
        source = e_cfg.get("source")
        _check(findings, source in ("history", "emissions"), "/risk/e_wildfire_tCO2e",
               f"source must be 'history' or 'emissions', got {source!r}")
        if source == "history" and history is None:
            findings.append(Finding("error", "/risk/e_wildfire_tCO2e",
                                    "source 'history' requires risk.fire_history"))
        if source == "emissions":
            _check(findings, "emissions" in scenario.enabled_stages(), "/risk/e_wildfire_tCO2e",
                   "source 'emissions' requires the emissions stage to be enabled")
    else:
        _check(findings, isinstance(e_cfg, (int, float)) and e_cfg >= 0,
               "/risk/e_wildfire_tCO2e", f"must be a number >= 0, got {e_cfg!r}")

    # Cheap base-point preview: a negative adjusted sequestration is legal
    # but worth flagging before anyone runs the full pipeline.
    if (isinstance(s_estimated, (int, float)) and isinstance(e_cfg, (int, float))):
        base_p = p
        if base_p is None and history is not None:
            from .risk import estimate_p_wildfire
            try:
                base_p = estimate_p_wildfire(history, int(horizon), str(smoothing))
            except (ValueError, TypeError):
                base_p = None
        if base_p is None:
            base_p = 0.0
        if isinstance(base_p, (int, float)) and 0.0 <= base_p <= 1.0:
            if s_estimated - base_p * e_cfg < 0:
                findings.append(Finding(
                    "warning", "/risk/s_estimated_tCO2e",
                    "adjusted sequestration is negative at base values "
                    f"({s_estimated} - {base_p} * {e_cfg})"))


def _validate_buffer(findings, config, stages):
    if "buffer" not in stages:
        return
    cfg = config.get("buffer")
    if cfg is None:
        return  # buffer stage silently skips without a config section
    for key in ("initial_balance_tCO2e", "contribution_rate", "annual_issuance_tCO2e",
                "loss_given_fire_tCO2e", "years"):
        _check(findings, key in cfg, f"/buffer/{key}", "required buffer field")
    try:
        build_buffer_pool(config)
    except (ValueError, KeyError, TypeError) as exc:
        findings.append(Finding("error", "/buffer", str(exc)))
    years = cfg.get("years", 1)
    _check(findings, isinstance(years, int) and years >= 1, "/buffer/years",
           f"must be an integer >= 1, got {years!r}")
    rate = cfg.get("fire_rate")
    if rate is not None:
        _check(findings, isinstance(rate, (int, float)) and 0.0 <= rate <= 1.0,
               "/buffer/fire_rate", f"must be in [0, 1], got {rate!r}")
    loss = cfg.get("loss_given_fire_tCO2e")
    if isinstance(loss, Mapping):
        try:
            DistributionSpec.from_config(loss)
        except ValueError as exc:
            findings.append(Finding("error", "/buffer/loss_given_fire_tCO2e", str(exc)))
    elif loss is not None:
        _check(findings, isinstance(loss, (int, float)) and loss >= 0,
               "/buffer/loss_given_fire_tCO2e", f"must be >= 0, got {loss!r}")


def _validate_insurance(findings, config, stages):
    if "insurance" not in stages:
        return
    cfg = config.get("insurance")
    if cfg is None:
        return
    try:
        build_policies(config)
    except (ValueError, KeyError, TypeError) as exc:
        findings.append(Finding("error", "/insurance/policies", str(exc)))
    threshold = cfg.get("p_threshold", 1.0)
    _check(findings, isinstance(threshold, (int, float)) and 0.0 <= threshold <= 1.0,
           "/insurance/p_threshold", f"must be in [0, 1], got {threshold!r}")
    ibnr = cfg.get("ibnr")
    if ibnr is not None:
        try:
            pattern = build_reporting_pattern(config)
        except (ValueError, KeyError, TypeError) as exc:
            findings.append(Finding("error", "/insurance/ibnr/pattern", str(exc)))
            pattern = None
        reported = ibnr.get("reported_to_date")
        _check(findings, isinstance(reported, (int, float)) and reported >= 0,
               "/insurance/ibnr/reported_to_date", f"must be >= 0, got {reported!r}")
        elapsed = ibnr.get("elapsed_periods")
        if pattern is not None:
            _check(findings,
                   isinstance(elapsed, int) and 0 <= elapsed < len(pattern),
                   "/insurance/ibnr/elapsed_periods",
                   f"must be an integer in [0, {len(pattern) - 1}], got {elapsed!r}")
            if (isinstance(elapsed, int) and 0 <= elapsed < len(pattern)
                    and pattern.cumulative_reported_fraction[elapsed] == 0.0):
                findings.append(Finding(
                    "error", "/insurance/ibnr/elapsed_periods",
                    "reported fraction is 0 at the elapsed period; IBNR undefined"))


def _validate_uncertainty(findings, config, stages):
    mc = mc_settings(config)
    if "uncertainty" in stages and config.get("distributions"):
        _check(findings, mc["n"] >= 2, "/mc/n", f"must be >= 2, got {mc['n']}")
        _check(findings, 0.0 < mc["ci_level"] < 1.0, "/mc/ci_level",
               f"must be in (0, 1), got {mc['ci_level']}")
        _check(findings, bool(mc["outputs"]), "/mc/outputs",
               "uncertainty stage needs at least one named report output")
        _validate_output_paths(findings, mc["outputs"], stages, "/mc/outputs")
    try:
        specs = build_distributions(config)
    except (ScenarioError, ValueError, KeyError, TypeError) as exc:
        findings.append(Finding("error", "/distributions", str(exc)))
        return
    for path in specs:
        try:
            current = get_pointer(config, path)
        except ScenarioError as exc:
            findings.append(Finding("error", "/distributions", str(exc)))
            continue
        _check(findings, isinstance(current, (int, float)), "/distributions",
               f"distribution target {path!r} is not numeric in the config")


def _validate_sensitivity(findings, config, stages):
    if "sensitivity" not in stages:
        return
    cfg = config.get("sensitivity")
    if not cfg:
        return
    output = cfg.get("output")
    if _check(findings, isinstance(output, str) and output, "/sensitivity/output",
              "sensitivity needs a report output name"):
        _validate_output_paths(findings, [output], stages, "/sensitivity/output")
    for i, row in enumerate(cfg.get("parameters", [])):
        path = row.get("path")
        where = f"/sensitivity/parameters/{i}"
        if not _check(findings, isinstance(path, str) and path, where,
                      "parameter needs a config 'path'"):
            continue
        try:
            current = get_pointer(config, path)
            _check(findings, isinstance(current, (int, float)), where,
                   f"sensitivity target {path!r} is not numeric in the config")
        except ScenarioError as exc:
            findings.append(Finding("error", where, str(exc)))
        for bound in ("low", "high"):
            _check(findings, isinstance(row.get(bound), (int, float)), where,
                   f"parameter needs numeric '{bound}'")


def _validate_output_paths(findings, outputs, stages, where):
    enabled = set(stages)
    for name in outputs:
        section = str(name).split(".", 1)[0]
        stage = _SECTION_STAGE.get(section)
        if stage is None:
            findings.append(Finding("error", where,
                                    f"unknown report output {name!r}"))
        elif stage not in enabled:
            findings.append(Finding("error", where,
                                    f"output {name!r} needs disabled stage '{stage}'"))
