import type {
  Finding,
  Report,
  ScenarioResponse,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

/** Service error with status code and the per-field findings, when sent. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly findings: Finding[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with a generic message
    }
    if (!response.ok) {
      const findings = extractFindings(body);
      const message =
        findings.map((f) => f.message).join("; ") ||
        (body as { error?: string } | null)?.error ||
        `HTTP ${response.status}`;
      throw new ApiError(response.status, message, findings);
    }
    return body as T;
  }

  health(): Promise<{ status: string; engine_version: string }> {
    return this.request("/v1/health");
  }

  async listScenarios(): Promise<string[]> {
    const body = await this.request<{ scenarios: string[] }>("/v1/scenarios");
    return body.scenarios;
  }

  getScenario(id: string): Promise<ScenarioResponse> {
    return this.request(`/v1/scenario/${encodeURIComponent(id)}`);
  }

  getReport(id: string): Promise<Report> {
    return this.request(`/v1/scenario/${encodeURIComponent(id)}/report`);
  }

  whatIf(id: string, request: WhatIfRequest): Promise<WhatIfResponse> {
    return this.request(`/v1/scenario/${encodeURIComponent(id)}/whatif`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
  }
}

function extractFindings(body: unknown): Finding[] {
  if (body && typeof body === "object" && Array.isArray((body as { findings?: unknown }).findings)) {
    return (body as { findings: unknown[] }).findings.map((f) => {
      if (f && typeof f === "object" && "message" in f) {
        return f as Finding;
      }
      return { severity: "error", message: String(f) };
    });
  }
  return [];
}
