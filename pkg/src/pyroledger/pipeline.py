"""End-to-end scenario pipeline and report assembly.

Stage order follows the data dependencies: index computation, burn
classification or mask ingest, perimeter extraction, carbon and
emissions, risk adjustment, buffer simulation, insurance, then
uncertainty and sensitivity on top of everything else. Stages disabled in
config (or per run) are marked "skipped" in the report and their
sections are null.

Reports are deterministic for a fixed (scenario, seed): the only
non-reproducible field is the wall-clock ``generated_at``. Every report
carries the engine version and a content digest of the config plus all
referenced files, so any credited or priced number can be audited back
to its exact inputs.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from datetime import datetime, timezone
from typing import Mapping

from . import __version__, _kernels
from . import carbon as carbon_mod
from . import fire as fire_mod
from . import insurance as insurance_mod
from . import raster as raster_mod
from . import risk as risk_mod
from .scenario import (STAGES, Scenario, ScenarioValidationError,
                       build_buffer_pool, build_distributions,
                       build_fire_history, build_policies,
                       build_reporting_pattern, build_severity_table,
                       build_vegetation_classes, get_pointer, mc_settings,
                       set_pointer, validate_scenario)
from .seeding import replicate_rng
from .uncertainty import summarize


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def referenced_files(scenario: Scenario) -> list[str]:
    """Relative paths of every file the scenario references, sorted."""
    config = scenario.config
    paths = []
    rasters = config.get("rasters") or {}
    for key in ("ndvi", "dnbr"):
        if isinstance(rasters.get(key), str):
            paths.append(rasters[key])
    for scene in ("pre", "post"):
        bands = rasters.get(scene) or {}
        if isinstance(bands, Mapping):
            paths.extend(v for v in bands.values() if isinstance(v, str))
    burn = config.get("burn") or {}
    if isinstance(burn.get("mask_file"), str):
        paths.append(burn["mask_file"])
    if isinstance(config.get("class_map"), str):
        paths.append(config["class_map"])
    history = (config.get("risk") or {}).get("fire_history") or {}
    if isinstance(history.get("csv"), str):
        paths.append(history["csv"])
    return sorted(set(paths))


def compute_digest(scenario: Scenario) -> str:
    """SHA-256 over the canonical config and every referenced file's bytes."""
    h = hashlib.sha256()
    h.update(json.dumps(scenario.config, sort_keys=True,
                        separators=(",", ":")).encode("utf-8"))
    for rel in referenced_files(scenario):
        h.update(b"\x00")
        h.update(rel.encode("utf-8"))
        h.update(b"\x00")
        h.update(scenario.resolve(rel).read_bytes())
    return "sha256:" + h.hexdigest()


def report_value(report: Mapping, dotted: str, allow_null: bool = False):
    """Extract a scalar from a report by dotted path, e.g. 'risk.s_adjusted_tCO2e'.

    ``allow_null`` passes report nulls through (some summary fields, like a
    first-insolvency year that never happened, are legitimately null).
    """
    node = report
    for token in dotted.split("."):
        if isinstance(node, Mapping):
            if token not in node:
                raise ValueError(f"report has no field {token!r} in path {dotted!r} "
                                 f"(available: {sorted(node)})")
            node = node[token]
        elif isinstance(node, list):
            try:
                node = node[int(token)]
            except (ValueError, IndexError):
                raise ValueError(f"bad list index {token!r} in path {dotted!r}") from None
        else:
            raise ValueError(f"path {dotted!r} descends into a scalar at {token!r}")
    if node is None and allow_null:
        return None
    if node is None or isinstance(node, (bool, str, list, Mapping)):
        raise ValueError(f"report path {dotted!r} is not a scalar number")
    return float(node)


class _GridLoader:
    """Per-run raster cache; paths resolve against the scenario directory."""

    def __init__(self, scenario: Scenario, cache: dict | None = None):
        self.scenario = scenario
        self.cache = cache if cache is not None else {}

    def load(self, relative: str) -> raster_mod.RasterGrid:
        key = str(self.scenario.resolve(relative))
        if key not in self.cache:
            self.cache[key] = raster_mod.read_grid(key)
        return self.cache[key]


def _run_raster(scenario: Scenario, loader: _GridLoader) -> dict:
    cfg = scenario.config["rasters"]
    mode = cfg.get("reflectance_check", "error")
    pre = {band: loader.load(rel) for band, rel in (cfg.get("pre") or {}).items()}
    post = {band: loader.load(rel) for band, rel in (cfg.get("post") or {}).items()}
    for bands in (pre, post):
        for grid in bands.values():
            raster_mod.check_reflectance(grid, mode)

    ctx: dict = {}
    if "ndvi" in cfg:
        ctx["ndvi"] = loader.load(cfg["ndvi"])
    else:
        ctx["ndvi"] = raster_mod.compute_index("ndvi", pre)
    raster_mod.validate_range(ctx["ndvi"], -1.0, 1.0, "NDVI", mode)

    if "dnbr" in cfg:
        ctx["dnbr"] = loader.load(cfg["dnbr"])
    else:
        nbr_pre = raster_mod.compute_index("nbr", pre)
        nbr_post = raster_mod.compute_index("nbr", post)
        ctx["dnbr"] = raster_mod.compute_dnbr(raster_mod.GridPair(nbr_pre, nbr_post))
    raster_mod.validate_range(ctx["dnbr"], -2.0, 2.0, "dNBR", mode)

    if "nir" in post and "red" in post:
        ctx["post_ndvi"] = raster_mod.compute_index("ndvi", post)
    return ctx


def _run_fire(scenario: Scenario, loader: _GridLoader, ctx: dict) -> dict:
    config = scenario.config
    burn = config["burn"]
    if burn["source"] == "threshold":
        mask = fire_mod.classify_burn(ctx["dnbr"], float(burn["threshold"]))
    else:
        mask_grid = loader.load(burn["mask_file"])
        dnbr = ctx.get("dnbr")
        if dnbr is not None and (mask_grid.ncols, mask_grid.nrows) != (dnbr.ncols, dnbr.nrows):
            raise raster_mod.GridCongruenceError(
                "burn mask grid shape differs from the dNBR grid")
        mask = fire_mod.ingest_mask(mask_grid)
    connectivity = int(config.get("connectivity", 4))
    perimeters = fire_mod.extract_perimeters(mask, connectivity)
    ctx["mask"] = mask
    ctx["perimeters"] = perimeters
    section = {
        "source": burn["source"],
        "connectivity": connectivity,
        "burned_pixels": mask.burned_count,
        "burned_area_m2": mask.burned_area_m2,
        "unknown_pixels": mask.unknown_count,
        "unknown_area_m2": mask.unknown_area_m2,
        "component_count": len(perimeters),
    }
    rasters = scenario.config.get("rasters") or {}
    for key in ("pre_date", "post_date"):
        if key in rasters:
            section[key] = rasters[key]
    return section


def _run_emissions(scenario: Scenario, loader: _GridLoader, ctx: dict) -> tuple[list, dict]:
    config = scenario.config
    cfg = config.get("emissions") or {}
    non_co2_share = float(cfg.get("non_co2_share", 0.0))
    convention = cfg.get("co2e_convention", carbon_mod.SHARE_OF_TOTAL)
    pathway = cfg.get("pathway", "severity")
    include_pixels = bool((config.get("report") or {}).get("include_pixels", False))

    classes = build_vegetation_classes(config)
    table = build_severity_table(config)
    class_map = loader.load(config["class_map"])
    pre_carbon = carbon_mod.carbon_stock_map(ctx["ndvi"], class_map, classes)
    ctx["pre_carbon"] = pre_carbon

    delta = None
    if pathway == "ndvi_delta":
        if "post_ndvi" not in ctx:
            raise ValueError("ndvi_delta pathway needs post-scene nir and red bands")
        post_carbon = carbon_mod.carbon_stock_map(ctx["post_ndvi"], class_map, classes)
        delta = carbon_mod.carbon_delta(pre_carbon, post_carbon)

    fires = []
    for perimeter in ctx["perimeters"]:
        if pathway == "severity":
            est = carbon_mod.fire_emissions(perimeter, pre_carbon, ctx["dnbr"],
                                            table, non_co2_share, convention)
        else:
            est = carbon_mod.fire_emissions_from_delta(perimeter, delta,
                                                       non_co2_share, convention)
        entry = {
            "component_id": perimeter.component_id,
            "pixel_count": perimeter.pixel_count,
            "area_m2": perimeter.area_m2,
            "bounding_box": list(perimeter.bounding_box),
            "severity": carbon_mod.severity_histogram(perimeter, ctx["dnbr"], table),
            "carbon_loss_kgC": est.carbon_loss_kgC,
            "co2_kg": est.co2_kg,
            "co2e_total_kg": est.co2e_total_kg,
            "skipped_pixels": est.skipped_pixels,
        }
        if include_pixels:
            entry["pixels"] = [list(p) for p in perimeter.pixel_set]
        fires.append(entry)

    mask = ctx["mask"]
    totals = {
        "burned_area_m2": mask.burned_area_m2,
        "unknown_area_m2": mask.unknown_area_m2,
        "carbon_loss_kgC": math.fsum(f["carbon_loss_kgC"] for f in fires),
        "co2_kg": math.fsum(f["co2_kg"] for f in fires),
        "co2e_total_kg": math.fsum(f["co2e_total_kg"] for f in fires),
        "non_co2_share": non_co2_share,
        "co2e_convention": convention,
        "pathway": pathway,
    }
    totals["co2e_total_tCO2e"] = totals["co2e_total_kg"] / 1000.0
    return fires, totals


def _run_risk(scenario: Scenario, report: dict) -> dict:
    cfg = scenario.config.get("risk") or {}
    history = build_fire_history(scenario)
    horizon = int(cfg.get("horizon_years", 1))
    smoothing = str(cfg.get("smoothing", "mle"))

    p = cfg.get("p_wildfire")
    p_source = "config"
    if p is None:
        if history is not None:
            p = risk_mod.estimate_p_wildfire(history, horizon, smoothing)
            p_source = "history"
        else:
            p, p_source = 0.0, "default"

    e_cfg = cfg.get("e_wildfire_tCO2e", {"source": "emissions"})
    if isinstance(e_cfg, Mapping):
        source = e_cfg["source"]
        if source == "history":
            e_wildfire = history.mean_emissions_per_fire_year()
        else:
            totals = report.get("totals")
            if totals is None:
                raise ValueError("e_wildfire source 'emissions' needs the emissions stage")
            e_wildfire = totals["co2e_total_tCO2e"]
        e_source = source
    else:
        e_wildfire, e_source = float(e_cfg), "config"

    assessment = risk_mod.assess(float(p), e_wildfire, float(cfg["s_estimated_tCO2e"]))
    return {
        "p_wildfire": assessment.p_wildfire,
        "p_source": p_source,
        "horizon_years": horizon,
        "smoothing": smoothing,
        "e_wildfire_tCO2e": assessment.e_wildfire_tCO2e,
        "e_source": e_source,
        "e_expected_tCO2e": assessment.e_expected_tCO2e,
        "s_estimated_tCO2e": assessment.s_estimated_tCO2e,
        "s_adjusted_tCO2e": assessment.s_adjusted_tCO2e,
        "negative_adjusted": assessment.is_net_negative,
    }


def _annual_fire_rate(scenario: Scenario, smoothing: str) -> float:
    history = build_fire_history(scenario)
    if history is None:
        return 0.0
    k, n = len(history.fire_years), history.observation_years
    return k / n if smoothing == "mle" else (k + 1) / (n + 2)


def _run_buffer(scenario: Scenario, master_seed: int) -> dict | None:
    cfg = scenario.config.get("buffer")
    if not cfg:
        return None
    pool = build_buffer_pool(scenario.config)
    smoothing = str((scenario.config.get("risk") or {}).get("smoothing", "mle"))
    fire_rate = float(cfg.get("fire_rate", _annual_fire_rate(scenario, smoothing)))
    loss = cfg["loss_given_fire_tCO2e"]
    if isinstance(loss, Mapping):
        from .uncertainty import DistributionSpec
        loss = DistributionSpec.from_config(loss)
    years = int(cfg["years"])
    replicates = int(cfg.get("replicates", 1))
    seed = int(cfg.get("seed", master_seed))
    issuance = float(cfg["annual_issuance_tCO2e"])

    summary = risk_mod.simulate_buffer_replicates(
        pool, issuance, fire_rate, loss, years, replicates, seed)
    section = {
        "initial_balance_tCO2e": pool.balance_tCO2e,
        "contribution_rate": pool.contribution_rate,
        "annual_issuance_tCO2e": issuance,
        "fire_rate": fire_rate,
        "years": years,
        "replicates": replicates,
        "seed": seed,
        "terminal_balance_mean": summary.terminal_balance_mean,
        "insolvency_probability": summary.insolvency_probability,
        "mean_first_insolvency_year": summary.mean_first_insolvency_year,
    }
    if replicates == 1 or (scenario.config.get("report") or {}).get("include_trajectory"):
        from .seeding import derive_seed
        trajectory = risk_mod.simulate_buffer(pool, issuance, fire_rate, loss,
                                              years, derive_seed(seed, 0))
        section["trajectory"] = [
            {"year": y.year, "balance": y.balance, "drew": y.drew, "insolvent": y.insolvent}
            for y in trajectory
        ]
    return section


def _run_insurance(scenario: Scenario) -> dict | None:
    cfg = scenario.config.get("insurance")
    if not cfg:
        return None
    policies = build_policies(scenario.config)
    threshold = float(cfg.get("p_threshold", 1.0))
    screening = insurance_mod.screen_exposure(policies, threshold)
    accepted = set(id(p) for p in screening["accept"])
    rows = []
    for policy in policies:
        priced = insurance_mod.price_premium(policy)
        rows.append({
            "insured_credits_tCO2e": policy.insured_credits_tCO2e,
            "credit_price": policy.credit_price,
            "p_wildfire": policy.p_wildfire,
            "expected_loss_fraction": policy.expected_loss_fraction,
            "loading": policy.loading,
            "risk_tier": policy.risk_tier,
            "expected_loss": priced["expected_loss"],
            "premium": priced["premium"],
            "accepted": id(policy) in accepted,
        })
    section = {
        "p_threshold": threshold,
        "policies": rows,
        "accepted_count": len(screening["accept"]),
        "declined_count": len(screening["decline"]),
        "expected_loss_total": math.fsum(r["expected_loss"] for r in rows if r["accepted"]),
        "premium_total": math.fsum(r["premium"] for r in rows if r["accepted"]),
        "ibnr": None,
    }
    ibnr_cfg = cfg.get("ibnr")
    if ibnr_cfg:
        pattern = build_reporting_pattern(scenario.config)
        result = insurance_mod.estimate_ibnr(float(ibnr_cfg["reported_to_date"]),
                                             int(ibnr_cfg["elapsed_periods"]), pattern)
        section["ibnr"] = {
            "reported_to_date": float(ibnr_cfg["reported_to_date"]),
            "elapsed_periods": int(ibnr_cfg["elapsed_periods"]),
            "reported_fraction": pattern.cumulative_reported_fraction[
                int(ibnr_cfg["elapsed_periods"])],
            "ultimate": result["ultimate"],
            "ibnr": result["ibnr"],
        }
    return section


def _inner_model(scenario: Scenario, stages: tuple[str, ...], loader: _GridLoader):
    """Closure evaluating the pipeline with config-pointer parameter overrides."""
    inner_stages = tuple(s for s in stages if s not in ("uncertainty", "sensitivity"))

    def evaluate(params: Mapping[str, float]) -> dict:
        config = copy.deepcopy(scenario.config)
        for path, value in params.items():
            set_pointer(config, path, value)
        inner = Scenario(name=scenario.name, base_dir=scenario.base_dir, config=config)
        return run_pipeline(inner, stages=inner_stages, _loader_cache=loader.cache,
                            _skip_validation=True, _inner=True)

    return evaluate


def _run_uncertainty(scenario: Scenario, stages, loader, master_seed: int) -> dict | None:
    specs = build_distributions(scenario.config)
    mc = mc_settings(scenario.config)
    if not specs or not mc["outputs"]:
        return None
    evaluate = _inner_model(scenario, stages, loader)
    names = sorted(specs)
    samples: dict[str, list[float]] = {out: [] for out in mc["outputs"]}
    for i in range(mc["n"]):
        rng = replicate_rng(master_seed, i)
        params = {name: specs[name].sample(rng) for name in names}
        rep = evaluate(params)
        for out in mc["outputs"]:
            samples[out].append(report_value(rep, out))
    return {
        "n": mc["n"],
        "seed": master_seed,
        "ci_level": mc["ci_level"],
        "ci_method": mc["ci_method"],
        "parameters": names,
        "outputs": {
            out: summarize(vals, seed=master_seed, ci_level=mc["ci_level"],
                           ci_method=mc["ci_method"]).as_dict()
            for out, vals in samples.items()
        },
    }


def _run_sensitivity(scenario: Scenario, stages, loader) -> list | None:
    cfg = scenario.config.get("sensitivity")
    if not cfg or not cfg.get("parameters"):
        return None
    output = cfg["output"]
    evaluate = _inner_model(scenario, stages, loader)

    def model(params):
        return report_value(evaluate(params), output)

    base = {row["path"]: float(get_pointer(scenario.config, row["path"]))
            for row in cfg["parameters"]}
    swings = {row["path"]: (float(row["low"]), float(row["high"]))
              for row in cfg["parameters"]}
    from .uncertainty import sensitivity as run_oat
    entries = run_oat(model, base, swings)
    return [{"parameter": e.parameter, "output": output, "output_low": e.output_low,
             "output_high": e.output_high, "range": e.range} for e in entries]


def run_pipeline(scenario: Scenario, *, seed: int | None = None,
                 stages=None, _loader_cache: dict | None = None,
                 _skip_validation: bool = False, _inner: bool = False) -> dict:
    """Execute the scenario and return the report as a JSON-ready dict.

    ``seed`` overrides the config Monte Carlo seed. ``stages`` restricts
    which stages run (names from scenario.STAGES); everything else is
    marked "skipped".
    """
    if not _skip_validation:
        findings = validate_scenario(scenario)
        if any(f.severity == "error" for f in findings):
            raise ScenarioValidationError(findings)

    enabled = scenario.enabled_stages(stages)
    master_seed = int(seed) if seed is not None else mc_settings(scenario.config)["seed"]
    loader = _GridLoader(scenario, _loader_cache)

    report: dict = {
        "engine_version": __version__,
        "kernel_backend": _kernels.IMPLEMENTATION,
        "scenario_name": scenario.name,
        "seed": master_seed,
        "stages": {stage: ("ok" if stage in enabled else "skipped") for stage in STAGES},
        "fire": None, "fires": None, "totals": None, "risk": None,
        "buffer": None, "insurance": None, "uncertainty": None, "sensitivity": None,
    }
    if not _inner:
        report["input_digest"] = compute_digest(scenario)
        report["generated_at"] = datetime.now(timezone.utc).isoformat()

    ctx: dict = {}
    if "raster" in enabled:
        ctx = _stage("raster", _run_raster, scenario, loader)
    if "fire" in enabled:
        report["fire"] = _stage("fire", _run_fire, scenario, loader, ctx)
    if "emissions" in enabled:
        report["fires"], report["totals"] = _stage(
            "emissions", _run_emissions, scenario, loader, ctx)
    if "risk" in enabled:
        report["risk"] = _stage("risk", _run_risk, scenario, report)
    if "buffer" in enabled:
        report["buffer"] = _stage("buffer", _run_buffer, scenario, master_seed)
    if "insurance" in enabled:
        report["insurance"] = _stage("insurance", _run_insurance, scenario)
    if "uncertainty" in enabled:
        report["uncertainty"] = _stage("uncertainty", _run_uncertainty,
                                       scenario, enabled, loader, master_seed)
    if "sensitivity" in enabled:
        report["sensitivity"] = _stage("sensitivity", _run_sensitivity,
                                       scenario, enabled, loader)
    return report


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def render_report(report: Mapping) -> str:
    """Canonical JSON rendering (sorted keys, 2-space indent)."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
