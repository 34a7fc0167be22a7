"""HTTP scenario-evaluation service.

Serves a directory of scenario JSON files ("<root>/<id>.json", raster
files referenced relative to the root). Every response carries the
engine version and an input digest: the scenario digest for scenario
endpoints, a request-body digest for the stateless calculators.

What-if requests never mutate the base scenario; overrides apply to a
deep copy per request, so concurrent requests are isolated. Base-report
bodies are cached by digest and replayed byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import __version__
from .insurance import Policy, price_premium
from .pipeline import (StageError, compute_digest, render_report,
                       report_value, run_pipeline)
from .risk import BufferPool, assess, simulate_buffer, simulate_buffer_replicates
from .scenario import (Scenario, ScenarioError, ScenarioValidationError,
                       load_scenario)
from .uncertainty import DistributionSpec


def _body_digest(payload) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _bad_request(findings) -> JSONResponse:
    if isinstance(findings, str):
        findings = [findings]
    return JSONResponse(status_code=400, content={
        "engine_version": __version__,
        "findings": [f if isinstance(f, Mapping) else {"severity": "error", "message": f}
                     for f in findings],
    })


def _unprocessable(stage: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=422, content={
        "engine_version": __version__,
        "stage": stage,
        "error": message,
    })


def _number(payload, key, lo=None, hi=None, findings=None):
    value = payload.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        findings.append(f"{key} must be a number")
        return None
    if lo is not None and value < lo:
        findings.append(f"{key} out of [{lo}, {hi if hi is not None else 'inf'}]: {value}")
        return None
    if hi is not None and value > hi:
        findings.append(f"{key} out of [{lo}, {hi}]: {value}")
        return None
    return float(value)


class ScenarioStore:
    """Scenario files under one root directory, with cached base reports."""

    def __init__(self, root):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._report_cache: dict[tuple[str, str, int], str] = {}

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def load(self, scenario_id: str) -> Scenario:
        if "/" in scenario_id or "\\" in scenario_id or scenario_id.startswith("."):
            raise FileNotFoundError(scenario_id)
        path = self.root / f"{scenario_id}.json"
        if not path.is_file():
            raise FileNotFoundError(scenario_id)
        return load_scenario(path)

    def base_report_body(self, scenario_id: str) -> str:
        """Serialized base report; byte-identical replay via digest cache."""
        scenario = self.load(scenario_id)
        digest = compute_digest(scenario)
        seed = int((scenario.config.get("mc") or {}).get("seed", 0))
        key = (scenario_id, digest, seed)
        with self._lock:
            cached = self._report_cache.get(key)
        if cached is not None:
            return cached
        body = render_report(run_pipeline(scenario))
        with self._lock:
            self._report_cache.setdefault(key, body)
            return self._report_cache[key]


def create_app(root) -> FastAPI:
    store = ScenarioStore(root)
    app = FastAPI(title="pyroledger", version=__version__)

    def envelope(payload: dict, digest: str | None) -> dict:
        return {"engine_version": __version__, "input_digest": digest, **payload}

    @app.get("/v1/health")
    def health():
        return envelope({"status": "ok", "scenario_root": str(store.root)}, None)

    @app.get("/v1/scenarios")
    def scenarios():
        return envelope({"scenarios": store.ids()}, None)

    @app.get("/v1/scenario/{scenario_id}")
    def get_scenario(scenario_id: str):
        try:
            scenario = store.load(scenario_id)
        except FileNotFoundError:
            return JSONResponse(status_code=404, content={
                "engine_version": __version__,
                "error": f"scenario {scenario_id!r} not found"})
        except ScenarioError as exc:
            return _bad_request(str(exc))
        return envelope({"id": scenario_id, "config": scenario.config},
                        compute_digest(scenario))

    @app.get("/v1/scenario/{scenario_id}/report")
    def get_report(scenario_id: str):
        try:
            body = store.base_report_body(scenario_id)
        except FileNotFoundError:
            return JSONResponse(status_code=404, content={
                "engine_version": __version__,
                "error": f"scenario {scenario_id!r} not found"})
        except ScenarioError as exc:
            return _bad_request(str(exc))
        except StageError as exc:
            return _unprocessable(exc.stage, str(exc.cause))
        return Response(content=body, media_type="application/json")

    @app.post("/v1/scenario/{scenario_id}/whatif")
    async def whatif(scenario_id: str, request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _bad_request("request body must be a JSON object")
        if not isinstance(payload, Mapping):
            return _bad_request("request body must be a JSON object")
        try:
            base = store.load(scenario_id)
        except FileNotFoundError:
            return JSONResponse(status_code=404, content={
                "engine_version": __version__,
                "error": f"scenario {scenario_id!r} not found"})

        overrides = payload.get("overrides", [])
        outputs = payload.get("outputs")
        sweep = payload.get("sweep")
        findings = _check_whatif_shape(overrides, outputs, sweep)
        if findings:
            return _bad_request(findings)

        digest = compute_digest(base)
        try:
            working = base.with_overrides(overrides)
        except ScenarioError as exc:
            return _bad_request(str(exc))

        try:
            result: dict = {"overrides": overrides}
            result.update(_evaluate_outputs(working, outputs))
            if sweep:
                rows = []
                for value in sweep["values"]:
                    point = working.with_overrides(
                        [{"path": sweep["path"], "value": value}])
                    row = {"value": value}
                    row.update(_evaluate_outputs(point, outputs))
                    rows.append(row)
                result["sweep"] = {"path": sweep["path"], "points": rows}
            return envelope(result, digest)
        except ScenarioValidationError as exc:
            return _bad_request([f.as_dict() for f in exc.findings
                                 if f.severity == "error"])
        except (ScenarioError, ValueError) as exc:
            return _bad_request(str(exc))
        except StageError as exc:
            return _unprocessable(exc.stage, str(exc.cause))

    @app.post("/v1/assess")
    async def assess_endpoint(request: Request):
        payload = await _json_or_none(request)
        if payload is None:
            return _bad_request("request body must be a JSON object")
        findings: list[str] = []
        p = _number(payload, "p", 0.0, 1.0, findings)
        e = _number(payload, "e", 0.0, None, findings)
        s = _number(payload, "s", 0.0, None, findings)
        if findings:
            return _bad_request(findings)
        result = assess(p, e, s)
        return envelope({
            "p": result.p_wildfire,
            "e": result.e_wildfire_tCO2e,
            "s": result.s_estimated_tCO2e,
            "e_expected": result.e_expected_tCO2e,
            "s_adjusted": result.s_adjusted_tCO2e,
            "negative_adjusted": result.is_net_negative,
        }, _body_digest(payload))

    @app.post("/v1/premium")
    async def premium_endpoint(request: Request):
        payload = await _json_or_none(request)
        if payload is None:
            return _bad_request("request body must be a JSON object")
        findings: list[str] = []
        credits = _number(payload, "insured_credits_tCO2e", 0.0, None, findings)
        price = _number(payload, "credit_price", 0.0, None, findings)
        p = _number(payload, "p_wildfire", 0.0, 1.0, findings)
        loss_fraction = _number(payload, "expected_loss_fraction", 0.0, 1.0, findings)
        loading = _number(payload, "loading", 0.0, None, findings)
        tier = payload.get("risk_tier", "medium")
        if findings:
            return _bad_request(findings)
        try:
            policy = Policy(credits, price, p, loss_fraction, loading, tier)
        except ValueError as exc:
            return _bad_request(str(exc))
        priced = price_premium(policy)
        return envelope(priced, _body_digest(payload))

    @app.post("/v1/buffer/simulate")
    async def buffer_endpoint(request: Request):
        payload = await _json_or_none(request)
        if payload is None:
            return _bad_request("request body must be a JSON object")
        findings: list[str] = []
        balance = _number(payload, "initial_balance_tCO2e", 0.0, None, findings)
        contribution = _number(payload, "contribution_rate", 0.0, 1.0, findings)
        issuance = _number(payload, "annual_issuance_tCO2e", 0.0, None, findings)
        fire_rate = _number(payload, "fire_rate", 0.0, 1.0, findings)
        years = payload.get("years")
        if not isinstance(years, int) or years < 1:
            findings.append("years must be an integer >= 1")
        seed = payload.get("seed", 0)
        if not isinstance(seed, int):
            findings.append("seed must be an integer")
        replicates = payload.get("replicates", 1)
        if not isinstance(replicates, int) or replicates < 1:
            findings.append("replicates must be an integer >= 1")
        loss_cfg = payload.get("loss_given_fire_tCO2e")
        loss = None
        if isinstance(loss_cfg, Mapping):
            try:
                loss = DistributionSpec.from_config(loss_cfg)
            except ValueError as exc:
                findings.append(f"loss_given_fire_tCO2e: {exc}")
        elif isinstance(loss_cfg, (int, float)) and not isinstance(loss_cfg, bool) \
                and loss_cfg >= 0:
            loss = float(loss_cfg)
        else:
            findings.append("loss_given_fire_tCO2e must be a number >= 0 "
                            "or a distribution object")
        if findings:
            return _bad_request(findings)
        pool = BufferPool(balance, contribution)
        summary = simulate_buffer_replicates(pool, issuance, fire_rate, loss,
                                             years, replicates, seed)
        payload_out = {
            "replicates": summary.replicates,
            "years": summary.years,
            "terminal_balance_mean": summary.terminal_balance_mean,
            "insolvency_probability": summary.insolvency_probability,
            "mean_first_insolvency_year": summary.mean_first_insolvency_year,
        }
        if replicates == 1:
            from .seeding import derive_seed
            trajectory = simulate_buffer(pool, issuance, fire_rate, loss, years,
                                         derive_seed(seed, 0))
            payload_out["trajectory"] = [
                {"year": y.year, "balance": y.balance, "drew": y.drew,
                 "insolvent": y.insolvent} for y in trajectory]
        return envelope(payload_out, _body_digest(payload))

    return app


async def _json_or_none(request: Request):
    try:
        payload = await request.json()
    except Exception:
        return None
    return payload if isinstance(payload, Mapping) else None


def _check_whatif_shape(overrides, outputs, sweep) -> list[str]:
    findings = []
    if not isinstance(overrides, list):
        findings.append("overrides must be a list of {path, value} objects")
    else:
        for i, item in enumerate(overrides):
            if not isinstance(item, Mapping) or "path" not in item or "value" not in item:
                findings.append(f"overrides[{i}] must be a {{path, value}} object")
    if outputs is not None and (
            not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs)):
        findings.append("outputs must be a list of report paths")
    if sweep is not None:
        if (not isinstance(sweep, Mapping) or not isinstance(sweep.get("path"), str)
                or not isinstance(sweep.get("values"), list)):
            findings.append("sweep must be {path, values}")
    return findings


def _evaluate_outputs(scenario: Scenario, outputs) -> dict:
    report = run_pipeline(scenario)
    if outputs:
        return {"outputs": {name: report_value(report, name, allow_null=True)
                            for name in outputs}}
    return {"report": report}


def serve(port: int, root, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(root), host=host, port=port, log_level="info")
