import pytest
from fastapi.testclient import TestClient

from pyroledger.service import create_app

from .conftest import SCENARIO_ROOT


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(SCENARIO_ROOT))


class TestHealthAndListing:
    def test_health(self, client):
        body = client.get("/v1/health").json()
        assert body["status"] == "ok"
        assert body["engine_version"]

    def test_scenario_listing(self, client):
        body = client.get("/v1/scenarios").json()
        assert "G1" in body["scenarios"]

    def test_empty_root_listing(self, tmp_path):
        empty = TestClient(create_app(tmp_path))
        assert empty.get("/v1/scenarios").json()["scenarios"] == []


class TestScenarioEndpoints:
    def test_get_scenario(self, client):
        resp = client.get("/v1/scenario/G1")
        assert resp.status_code == 200
        body = resp.json()
        assert body["id"] == "G1"
        assert body["config"]["risk"]["p_wildfire"] == 0.02
        assert body["input_digest"].startswith("sha256:")

    def test_unknown_id_404(self, client):
        assert client.get("/v1/scenario/NOPE").status_code == 404

    def test_report_identical_bodies_on_repeat(self, client):
        a = client.get("/v1/scenario/G1/report")
        b = client.get("/v1/scenario/G1/report")
        assert a.status_code == 200
        assert a.content == b.content
        report = a.json()
        assert report["risk"]["s_adjusted_tCO2e"] == 9900.0
        assert report["insurance"]["premium_total"] == 1200.0

    def test_path_traversal_rejected(self, client):
        assert client.get("/v1/scenario/..%2FG1").status_code == 404


class TestWhatIf:
    def test_override_p(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={
            "overrides": [{"path": "/risk/p_wildfire", "value": 0.05}],
            "outputs": ["risk.s_adjusted_tCO2e", "risk.e_expected_tCO2e"],
        })
        assert resp.status_code == 200
        outputs = resp.json()["outputs"]
        assert outputs["risk.s_adjusted_tCO2e"] == 9750.0
        assert outputs["risk.e_expected_tCO2e"] == 250.0

    def test_no_overrides_equals_base_report(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={"overrides": []})
        base = client.get("/v1/scenario/G1/report").json()
        whatif_report = resp.json()["report"]
        for key in ("risk", "totals", "insurance"):
            assert whatif_report[key] == base[key]

    def test_out_of_range_override_is_400_with_findings(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={
            "overrides": [{"path": "/risk/p_wildfire", "value": 1.5}],
            "outputs": ["risk.s_adjusted_tCO2e"],
        })
        assert resp.status_code == 400
        findings = resp.json()["findings"]
        assert any("/risk/p_wildfire" in f.get("path", "") for f in findings)

    def test_malformed_body_400(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={"overrides": [{"nope": 1}]})
        assert resp.status_code == 400

    def test_unknown_pointer_400(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={
            "overrides": [{"path": "/risk/unknown_knob", "value": 1}]})
        assert resp.status_code == 400

    def test_sweep(self, client):
        resp = client.post("/v1/scenario/G1/whatif", json={
            "overrides": [],
            "outputs": ["risk.s_adjusted_tCO2e"],
            "sweep": {"path": "/risk/p_wildfire", "values": [0.0, 0.02, 0.05]},
        })
        assert resp.status_code == 200
        points = resp.json()["sweep"]["points"]
        assert [p["outputs"]["risk.s_adjusted_tCO2e"] for p in points] == \
            [10000.0, 9900.0, 9750.0]

    def test_whatif_does_not_mutate_base(self, client):
        before = client.get("/v1/scenario/G1/report").content
        client.post("/v1/scenario/G1/whatif", json={
            "overrides": [{"path": "/risk/p_wildfire", "value": 0.2}],
            "outputs": ["risk.s_adjusted_tCO2e"]})
        after = client.get("/v1/scenario/G1/report").content
        assert before == after


class TestAssessEndpoint:
    def test_hand_values(self, client):
        resp = client.post("/v1/assess", json={"p": 0.02, "e": 5000, "s": 10000})
        assert resp.status_code == 200
        body = resp.json()
        assert body["e_expected"] == 100.0
        assert body["s_adjusted"] == 9900.0
        assert body["engine_version"]
        assert body["input_digest"].startswith("sha256:")

    def test_p_out_of_range_400(self, client):
        resp = client.post("/v1/assess", json={"p": 1.5, "e": 5000, "s": 10000})
        assert resp.status_code == 400
        findings = resp.json()["findings"]
        assert any("p out of [0.0, 1.0]" in f["message"] for f in findings)

    def test_missing_field_400(self, client):
        assert client.post("/v1/assess", json={"p": 0.5}).status_code == 400

    def test_non_object_body_400(self, client):
        resp = client.post("/v1/assess", content=b"[1,2]",
                           headers={"content-type": "application/json"})
        assert resp.status_code == 400


class TestPremiumEndpoint:
    def test_hand_values(self, client):
        resp = client.post("/v1/premium", json={
            "insured_credits_tCO2e": 10000, "credit_price": 10, "p_wildfire": 0.02,
            "expected_loss_fraction": 0.5, "loading": 0.2})
        assert resp.status_code == 200
        body = resp.json()
        assert body["expected_loss"] == 1000.0
        assert body["premium"] == 1200.0

    def test_bad_tier_400(self, client):
        resp = client.post("/v1/premium", json={
            "insured_credits_tCO2e": 1, "credit_price": 1, "p_wildfire": 0.5,
            "expected_loss_fraction": 0.5, "loading": 0.0, "risk_tier": "wild"})
        assert resp.status_code == 400


class TestBufferEndpoint:
    PAYLOAD = {
        "initial_balance_tCO2e": 100.0, "contribution_rate": 0.0,
        "annual_issuance_tCO2e": 0.0, "fire_rate": 1.0,
        "loss_given_fire_tCO2e": 30.0, "years": 5, "seed": 3,
    }

    def test_trajectory_and_determinism(self, client):
        a = client.post("/v1/buffer/simulate", json=self.PAYLOAD)
        b = client.post("/v1/buffer/simulate", json=self.PAYLOAD)
        assert a.status_code == 200
        assert a.json() == b.json()
        balances = [y["balance"] for y in a.json()["trajectory"]]
        assert balances[:4] == [70.0, 40.0, 10.0, 0.0]
        assert a.json()["trajectory"][3]["insolvent"] is True

    def test_replicated_summary(self, client):
        payload = dict(self.PAYLOAD, replicates=50, fire_rate=0.2)
        body = client.post("/v1/buffer/simulate", json=payload).json()
        assert body["replicates"] == 50
        assert "trajectory" not in body

    def test_validation_400(self, client):
        payload = dict(self.PAYLOAD, fire_rate=2.0)
        assert client.post("/v1/buffer/simulate", json=payload).status_code == 400


class TestParity:
    def test_assess_endpoint_matches_pipeline_run(self, client, g1_scenario_path):
        from pyroledger.pipeline import run_pipeline
        from pyroledger.scenario import load_scenario

        report = run_pipeline(load_scenario(g1_scenario_path))
        risk = report["risk"]
        resp = client.post("/v1/assess", json={
            "p": risk["p_wildfire"], "e": risk["e_wildfire_tCO2e"],
            "s": risk["s_estimated_tCO2e"]}).json()
        assert resp["e_expected"] == risk["e_expected_tCO2e"]
        assert resp["s_adjusted"] == risk["s_adjusted_tCO2e"]
