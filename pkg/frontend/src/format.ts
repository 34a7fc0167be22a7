/** Display formatting only; no domain arithmetic happens client-side. */

export function fmt(value: number | null | undefined, digits = 2): string {
  if (value === null || value === undefined) {
    return "–";
  }
  if (Number.isInteger(value) && Math.abs(value) < 1e15) {
    return value.toLocaleString("en-US");
  }
  return value.toLocaleString("en-US", {
    minimumFractionDigits: 0,
    maximumFractionDigits: digits,
  });
}

export function fmtProbability(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "–";
  }
  return value.toString();
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
