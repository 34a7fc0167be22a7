import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/client.js";

function fixture(name: string): unknown {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8"));
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function clientWith(handler: (url: string, init?: RequestInit) => Response | Promise<Response>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const client = new ApiClient("http://svc", async (url, init) => {
    calls.push({ url, init });
    return handler(url, init);
  });
  return { client, calls };
}

describe("ApiClient", () => {
  it("fetches a report from the scenario endpoint", async () => {
    const report = fixture("g1_report.json");
    const { client, calls } = clientWith(() => jsonResponse(report));
    const got = await client.getReport("G1");
    expect(calls[0]?.url).toBe("http://svc/v1/scenario/G1/report");
    expect(got.risk?.s_adjusted_tCO2e).toBe(9900.0);
    expect(got.input_digest).toMatch(/^sha256:/);
  });

  it("posts what-if overrides as JSON", async () => {
    const whatif = fixture("g1_whatif_p005.json");
    const { client, calls } = clientWith(() => jsonResponse(whatif));
    const got = await client.whatIf("G1", {
      overrides: [{ path: "/risk/p_wildfire", value: 0.05 }],
      outputs: ["risk.s_adjusted_tCO2e"],
    });
    expect(calls[0]?.url).toBe("http://svc/v1/scenario/G1/whatif");
    expect(calls[0]?.init?.method).toBe("POST");
    const sent = JSON.parse(String(calls[0]?.init?.body));
    expect(sent.overrides).toEqual([{ path: "/risk/p_wildfire", value: 0.05 }]);
    expect(got.outputs?.["risk.s_adjusted_tCO2e"]).toBe(9750.0);
  });

  it("surfaces 400 findings as ApiError", async () => {
    const invalid = fixture("g1_whatif_invalid.json") as { status: number; body: unknown };
    const { client } = clientWith(() => jsonResponse(invalid.body, invalid.status));
    const err = await client
      .whatIf("G1", { overrides: [{ path: "/risk/p_wildfire", value: 1.5 }] })
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(400);
    expect(apiErr.findings[0]?.path).toBe("/risk/p_wildfire");
    expect(apiErr.message).toContain("must be in [0, 1]");
  });

  it("maps 404 to an ApiError with the status", async () => {
    const { client } = clientWith(() =>
      jsonResponse({ engine_version: "x", error: "scenario 'NOPE' not found" }, 404));
    const err = await client.getScenario("NOPE").then(() => null, (e: unknown) => e);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).message).toContain("not found");
  });

  it("maps network failure to status 0", async () => {
    const client = new ApiClient("http://svc", async () => {
      throw new TypeError("fetch failed");
    });
    const err = await client.health().then(() => null, (e: unknown) => e);
    expect((err as ApiError).status).toBe(0);
    expect((err as ApiError).message).toContain("unreachable");
  });

  it("lists scenarios", async () => {
    const { client } = clientWith(() =>
      jsonResponse({ engine_version: "x", input_digest: null, scenarios: ["A", "G1"] }));
    expect(await client.listScenarios()).toEqual(["A", "G1"]);
  });
});
