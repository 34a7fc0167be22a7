import { escapeHtml, fmt, fmtProbability } from "./format.js";
import type {
  Finding,
  McSummary,
  Report,
  ScenarioResponse,
  SweepPoint,
  WhatIfResponse,
} from "./types.js";

/**
 * Pure HTML renderers. Every displayed number is stamped with
 * data-field (the service response path) and data-value (the verbatim
 * response value), so each figure on screen traces to a response field;
 * the client performs no domain arithmetic of its own.
 */

function card(label: string, field: string, raw: number | null | undefined,
              display: string, extraClass = ""): string {
  const value = raw === null || raw === undefined ? "null" : String(raw);
  return (
    `<div class="card ${extraClass}" data-field="${escapeHtml(field)}" ` +
    `data-value="${escapeHtml(value)}">` +
    `<span class="card-label">${escapeHtml(label)}</span>` +
    `<span class="card-value">${escapeHtml(display)}</span></div>`
  );
}

export function renderEmptyState(): string {
  return (
    `<div class="empty-state">No scenarios found under the service root. ` +
    `Add a &lt;id&gt;.json scenario file and reload.</div>`
  );
}

export function renderNotFound(id: string): string {
  return `<div class="not-found">Scenario “${escapeHtml(id)}” was not found.</div>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner" role="alert">${escapeHtml(message)}</div>`;
}

export function renderScenarioList(ids: string[]): string {
  if (ids.length === 0) {
    return renderEmptyState();
  }
  const items = ids
    .map((id) => `<option value="${escapeHtml(id)}">${escapeHtml(id)}</option>`)
    .join("");
  return items;
}

export function renderSummary(scenario: ScenarioResponse, report: Report): string {
  const risk = report.risk;
  const totals = report.totals;
  const insurance = report.insurance;
  const buffer = report.buffer;
  const cards: string[] = [];
  if (risk) {
    cards.push(
      card("Estimated sequestration (tCO2e)", "risk.s_estimated_tCO2e",
           risk.s_estimated_tCO2e, fmt(risk.s_estimated_tCO2e)),
      card("P(wildfire)", "risk.p_wildfire", risk.p_wildfire,
           fmtProbability(risk.p_wildfire)),
      card("E(wildfire) (tCO2e)", "risk.e_wildfire_tCO2e",
           risk.e_wildfire_tCO2e, fmt(risk.e_wildfire_tCO2e)),
      card("Expected reversal (tCO2e)", "risk.e_expected_tCO2e",
           risk.e_expected_tCO2e, fmt(risk.e_expected_tCO2e)),
      card("Adjusted sequestration (tCO2e)", "risk.s_adjusted_tCO2e",
           risk.s_adjusted_tCO2e, fmt(risk.s_adjusted_tCO2e),
           risk.negative_adjusted ? "negative" : "primary"),
    );
  }
  if (totals) {
    cards.push(
      card("Burned area (m²)", "totals.burned_area_m2",
           totals.burned_area_m2, fmt(totals.burned_area_m2)),
      card("CO2 (kg)", "totals.co2_kg", totals.co2_kg, fmt(totals.co2_kg)),
      card("CO2e total (kg)", "totals.co2e_total_kg",
           totals.co2e_total_kg, fmt(totals.co2e_total_kg)),
    );
  }
  if (insurance) {
    cards.push(card("Premium total", "insurance.premium_total",
                    insurance.premium_total, fmt(insurance.premium_total)));
  }

  const sections = [
    `<header><h1>${escapeHtml(scenario.id)}</h1>` +
    `<p class="digest">engine ${escapeHtml(report.engine_version)} · ` +
    `digest <code>${escapeHtml(report.input_digest)}</code></p></header>`,
    `<section class="cards">${cards.join("")}</section>`,
  ];
  if (buffer) {
    sections.push(renderBufferTable(buffer));
  }
  if (insurance && insurance.policies.length > 0) {
    sections.push(renderPolicyTable(insurance));
  }
  if (report.uncertainty) {
    sections.push(renderUncertainty(report.uncertainty.outputs));
  }
  return sections.join("\n");
}

function renderBufferTable(buffer: NonNullable<Report["buffer"]>): string {
  const rows = [
    ["Initial balance (tCO2e)", "buffer.initial_balance_tCO2e", buffer.initial_balance_tCO2e],
    ["Contribution rate", "buffer.contribution_rate", buffer.contribution_rate],
    ["Fire rate", "buffer.fire_rate", buffer.fire_rate],
    ["Mean terminal balance", "buffer.terminal_balance_mean", buffer.terminal_balance_mean],
    ["Insolvency probability", "buffer.insolvency_probability", buffer.insolvency_probability],
    ["Mean first insolvency year", "buffer.mean_first_insolvency_year",
     buffer.mean_first_insolvency_year],
  ] as const;
  const body = rows
    .map(([label, field, value]) =>
      `<tr><th>${escapeHtml(label)}</th>` +
      `<td data-field="${field}" data-value="${value === null ? "null" : String(value)}">` +
      `${fmt(value)}</td></tr>`)
    .join("");
  return `<section class="buffer"><h2>Buffer pool</h2><table>${body}</table></section>`;
}

function renderPolicyTable(insurance: NonNullable<Report["insurance"]>): string {
  const header =
    "<tr><th>credits</th><th>price</th><th>p</th><th>loss frac</th>" +
    "<th>loading</th><th>tier</th><th>expected loss</th><th>premium</th><th>status</th></tr>";
  const rows = insurance.policies
    .map((p, i) =>
      `<tr data-policy="${i}">` +
      `<td data-field="insurance.policies.${i}.insured_credits_tCO2e" data-value="${p.insured_credits_tCO2e}">${fmt(p.insured_credits_tCO2e)}</td>` +
      `<td data-field="insurance.policies.${i}.credit_price" data-value="${p.credit_price}">${fmt(p.credit_price)}</td>` +
      `<td data-field="insurance.policies.${i}.p_wildfire" data-value="${p.p_wildfire}">${fmtProbability(p.p_wildfire)}</td>` +
      `<td data-field="insurance.policies.${i}.expected_loss_fraction" data-value="${p.expected_loss_fraction}">${fmtProbability(p.expected_loss_fraction)}</td>` +
      `<td data-field="insurance.policies.${i}.loading" data-value="${p.loading}">${fmtProbability(p.loading)}</td>` +
      `<td>${escapeHtml(p.risk_tier)}</td>` +
      `<td data-field="insurance.policies.${i}.expected_loss" data-value="${p.expected_loss}">${fmt(p.expected_loss)}</td>` +
      `<td data-field="insurance.policies.${i}.premium" data-value="${p.premium}">${fmt(p.premium)}</td>` +
      `<td>${p.accepted ? "accepted" : "declined"}</td></tr>`)
    .join("");
  return `<section class="policies"><h2>Policies</h2><table>${header}${rows}</table></section>`;
}

function renderUncertainty(outputs: Record<string, McSummary>): string {
  // Slash-separated field paths here: MC output names contain dots.
  const rows = Object.entries(outputs)
    .map(([name, s]) =>
      `<tr><th>${escapeHtml(name)}</th>` +
      `<td data-field="uncertainty/outputs/${escapeHtml(name)}/mean" data-value="${s.mean}">${fmt(s.mean)}</td>` +
      `<td data-field="uncertainty/outputs/${escapeHtml(name)}/ci_low" data-value="${s.ci_low}">${fmt(s.ci_low)}</td>` +
      `<td data-field="uncertainty/outputs/${escapeHtml(name)}/ci_high" data-value="${s.ci_high}">${fmt(s.ci_high)}</td></tr>`)
    .join("");
  return (
    `<section class="uncertainty"><h2>Uncertainty</h2>` +
    `<table><tr><th>output</th><th>mean</th><th>CI low</th><th>CI high</th></tr>${rows}</table></section>`
  );
}

export function renderResultsPanel(response: WhatIfResponse,
                                   sweepOutput?: string): string {
  const outputs = response.outputs ?? {};
  const entries = Object.entries(outputs);
  const cards = entries
    .map(([name, value]) => card(name, name, value, fmt(value)))
    .join("");
  const overrides = response.overrides
    .map((o) => `<li><code>${escapeHtml(o.path)}</code> → ${escapeHtml(String(o.value))}</li>`)
    .join("");
  const sweep = response.sweep
    ? renderSweepChart(response.sweep.path, response.sweep.points, sweepOutput)
    : "";
  return (
    `<section class="whatif-results">` +
    `<h2>What-if results</h2>` +
    (overrides ? `<ul class="overrides">${overrides}</ul>` : "") +
    `<div class="cards">${cards}</div>` +
    sweep +
    `</section>`
  );
}

/** Inline SVG line chart of one output over a swept parameter. */
export function renderSweepChart(path: string, points: SweepPoint[],
                                 outputName?: string): string {
  if (points.length === 0) {
    return "";
  }
  const firstOutputs = points[0]?.outputs ?? {};
  const name = outputName ??
    Object.keys(firstOutputs).find((key) =>
      points.every((p) => typeof p.outputs[key] === "number"));
  if (!name) {
    return "";
  }
  const xs = points.map((p) => p.value);
  const ys = points.map((p) => p.outputs[name] ?? 0);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...(ys as number[]));
  const yMax = Math.max(...(ys as number[]));
  const width = 420;
  const height = 180;
  const pad = 28;
  const sx = (x: number) =>
    xMax === xMin ? width / 2 : pad + ((x - xMin) / (xMax - xMin)) * (width - 2 * pad);
  const sy = (y: number) =>
    yMax === yMin ? height / 2 : height - pad - ((y - yMin) / (yMax - yMin)) * (height - 2 * pad);
  const polyline = points
    .map((p) => `${sx(p.value).toFixed(1)},${sy((p.outputs[name] ?? 0) as number).toFixed(1)}`)
    .join(" ");
  const dots = points
    .map((p) =>
      `<circle cx="${sx(p.value).toFixed(1)}" cy="${sy((p.outputs[name] ?? 0) as number).toFixed(1)}" r="3" ` +
      `data-sweep-x="${p.value}" data-sweep-y="${p.outputs[name]}" />`)
    .join("");
  return (
    `<figure class="sweep-chart">` +
    `<figcaption>${escapeHtml(name)} vs ${escapeHtml(path)}</figcaption>` +
    `<svg viewBox="0 0 ${width} ${height}" role="img">` +
    `<polyline fill="none" stroke="currentColor" stroke-width="2" points="${polyline}" />` +
    dots +
    `</svg></figure>`
  );
}

export function renderFindings(findings: Finding[]): string {
  if (findings.length === 0) {
    return "";
  }
  const items = findings
    .map((f) =>
      `<li class="finding ${escapeHtml(f.severity)}" data-path="${escapeHtml(f.path ?? "")}">` +
      `${f.path ? `<code>${escapeHtml(f.path)}</code> ` : ""}${escapeHtml(f.message)}</li>`)
    .join("");
  return `<ul class="findings">${items}</ul>`;
}
