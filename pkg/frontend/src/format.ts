/** Display formatting: 4 significant digits, no client-side math beyond that. */

export const DISPLAY_DIGITS = 4;

export function formatSig(value: number, digits: number = DISPLAY_DIGITS): string {
  if (!Number.isFinite(value)) return String(value);
  if (value === 0) return "0";
  const formatted = value.toPrecision(digits);
  // keep plain notation for the magnitudes the console shows
  return Number(formatted).toString();
}

export function formatRange(low: number, high: number): string {
  return `[${formatSig(low)}, ${formatSig(high)}]`;
}
