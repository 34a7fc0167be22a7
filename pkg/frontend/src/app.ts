import { ApiClient, ApiError } from "./client.js";
import { WhatIfSession } from "./session.js";
import type { WhatIfResponse } from "./types.js";
import {
  renderErrorBanner,
  renderFindings,
  renderNotFound,
  renderResultsPanel,
  renderScenarioList,
  renderSummary,
} from "./views.js";

/** Browser wiring; all state lives in the session, all math on the server. */

const OUTPUTS = [
  "risk.s_adjusted_tCO2e",
  "risk.e_expected_tCO2e",
  "insurance.premium_total",
  "buffer.mean_first_insolvency_year",
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function serviceBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "http://127.0.0.1:8800";
}

async function init(): Promise<void> {
  const client = new ApiClient(serviceBase());
  const banner = el<HTMLDivElement>("banner");
  const picker = el<HTMLSelectElement>("scenario-picker");
  const summary = el<HTMLDivElement>("summary");
  const results = el<HTMLDivElement>("results");
  const findingsBox = el<HTMLDivElement>("findings");
  const slider = el<HTMLInputElement>("p-slider");
  const sliderValue = el<HTMLSpanElement>("p-value");
  const applyButton = el<HTMLButtonElement>("apply");
  const sweepButton = el<HTMLButtonElement>("sweep");

  let session: WhatIfSession<WhatIfResponse> | null = null;

  async function loadList(): Promise<void> {
    try {
      const ids = await client.listScenarios();
      picker.innerHTML = renderScenarioList(ids);
      if (ids.length > 0 && ids[0]) {
        await loadScenario(ids[0]);
      } else {
        summary.innerHTML = "";
        banner.innerHTML = "";
      }
    } catch (err) {
      banner.innerHTML = renderErrorBanner(
        err instanceof ApiError ? err.message : String(err));
    }
  }

  async function loadScenario(id: string): Promise<void> {
    banner.innerHTML = "";
    findingsBox.innerHTML = "";
    results.innerHTML = "";
    try {
      const [scenario, report] = await Promise.all([
        client.getScenario(id),
        client.getReport(id),
      ]);
      session = new WhatIfSession(id);
      summary.innerHTML = renderSummary(scenario, report);
      const p = report.risk?.p_wildfire ?? 0;
      slider.value = String(p);
      sliderValue.textContent = String(p);
    } catch (err) {
      summary.innerHTML = "";
      if (err instanceof ApiError && err.status === 404) {
        summary.innerHTML = renderNotFound(id);
      } else {
        banner.innerHTML = renderErrorBanner(
          err instanceof ApiError ? err.message : String(err));
      }
    }
  }

  async function applyWhatIf(sweep: boolean): Promise<void> {
    if (!session) {
      return;
    }
    const active = session;
    const p = Number(slider.value);
    if (!(p >= 0 && p <= 1)) {
      findingsBox.innerHTML = renderFindings([
        { severity: "error", path: "/risk/p_wildfire", message: "P(W) must be in [0, 1]" },
      ]);
      return;
    }
    active.setOverride("/risk/p_wildfire", p);
    const seq = active.nextSeq();
    const request = {
      overrides: active.pendingOverrides,
      outputs: OUTPUTS,
      ...(sweep
        ? { sweep: { path: "/risk/p_wildfire",
                     values: [0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5] } }
        : {}),
    };
    try {
      const response = await client.whatIf(active.baseId, request);
      if (active.accept(seq, response)) {
        results.innerHTML = renderResultsPanel(response, OUTPUTS[0]);
        findingsBox.innerHTML = "";
      }
    } catch (err) {
      if (err instanceof ApiError && err.findings.length > 0) {
        findingsBox.innerHTML = renderFindings(err.findings);
      } else {
        banner.innerHTML = renderErrorBanner(
          err instanceof ApiError ? err.message : String(err));
      }
    }
  }

  picker.addEventListener("change", () => void loadScenario(picker.value));
  slider.addEventListener("input", () => {
    sliderValue.textContent = slider.value;
  });
  applyButton.addEventListener("click", () => void applyWhatIf(false));
  sweepButton.addEventListener("click", () => void applyWhatIf(true));

  await loadList();
}

document.addEventListener("DOMContentLoaded", () => void init());
