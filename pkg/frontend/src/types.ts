/** Shapes of the scenario service's JSON responses. */

export interface Finding {
  severity: string;
  path?: string;
  message: string;
}

export interface RiskSection {
  p_wildfire: number;
  p_source: string;
  horizon_years: number;
  e_wildfire_tCO2e: number;
  e_expected_tCO2e: number;
  s_estimated_tCO2e: number;
  s_adjusted_tCO2e: number;
  negative_adjusted: boolean;
}

export interface TotalsSection {
  burned_area_m2: number;
  unknown_area_m2: number;
  carbon_loss_kgC: number;
  co2_kg: number;
  co2e_total_kg: number;
  co2e_total_tCO2e: number;
}

export interface PolicyRow {
  insured_credits_tCO2e: number;
  credit_price: number;
  p_wildfire: number;
  expected_loss_fraction: number;
  loading: number;
  risk_tier: string;
  expected_loss: number;
  premium: number;
  accepted: boolean;
}

export interface InsuranceSection {
  p_threshold: number;
  policies: PolicyRow[];
  accepted_count: number;
  declined_count: number;
  expected_loss_total: number;
  premium_total: number;
  ibnr: {
    reported_to_date: number;
    elapsed_periods: number;
    reported_fraction: number;
    ultimate: number;
    ibnr: number;
  } | null;
}

export interface BufferSection {
  initial_balance_tCO2e: number;
  contribution_rate: number;
  annual_issuance_tCO2e: number;
  fire_rate: number;
  years: number;
  replicates: number;
  terminal_balance_mean: number;
  insolvency_probability: number;
  mean_first_insolvency_year: number | null;
}

export interface McSummary {
  n: number;
  mean: number;
  sd: number;
  ci_low: number;
  ci_high: number;
  seed: number;
  ci_level: number;
  ci_method: string;
}

export interface UncertaintySection {
  n: number;
  seed: number;
  ci_level: number;
  outputs: Record<string, McSummary>;
}

export interface Report {
  engine_version: string;
  input_digest: string;
  scenario_name: string;
  seed: number;
  stages: Record<string, string>;
  risk: RiskSection | null;
  totals: TotalsSection | null;
  insurance: InsuranceSection | null;
  buffer: BufferSection | null;
  uncertainty: UncertaintySection | null;
  sensitivity:
    | { parameter: string; output: string; output_low: number; output_high: number; range: number }[]
    | null;
}

export interface ScenarioResponse {
  engine_version: string;
  input_digest: string;
  id: string;
  config: Record<string, unknown>;
}

export interface Override {
  path: string;
  value: number;
}

export interface WhatIfRequest {
  overrides: Override[];
  outputs?: string[];
  sweep?: { path: string; values: number[] };
}

export interface SweepPoint {
  value: number;
  outputs: Record<string, number | null>;
}

export interface WhatIfResponse {
  engine_version: string;
  input_digest: string;
  overrides: Override[];
  outputs?: Record<string, number | null>;
  report?: Report;
  sweep?: { path: string; points: SweepPoint[] };
}
