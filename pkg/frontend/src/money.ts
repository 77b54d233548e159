/**
 * Exact decimal-string arithmetic for form feedback.
 *
 * Money arrives from the service as decimal strings and is rendered
 * verbatim; the only client-side arithmetic (budget meters, the range
 * helper) runs on scaled BigInts so no float ever touches a displayed
 * amount.
 */

const DECIMAL_RE = /^-?\d+(\.\d+)?$/;

export function isDecimalString(value: string): boolean {
  return DECIMAL_RE.test(value.trim());
}

interface Scaled {
  units: bigint; // value * 10^scale
  scale: number;
}

function parseScaled(value: string): Scaled {
  const text = value.trim();
  if (!DECIMAL_RE.test(text)) {
    throw new Error(`not a decimal amount: ${value}`);
  }
  const negative = text.startsWith("-");
  const body = negative ? text.slice(1) : text;
  const [whole, frac = ""] = body.split(".");
  const units = BigInt(whole + frac) * (negative ? -1n : 1n);
  return { units, scale: frac.length };
}

function rescale(v: Scaled, scale: number): bigint {
  return v.units * 10n ** BigInt(scale - v.scale);
}

function render(units: bigint, scale: number): string {
  const negative = units < 0n;
  let digits = (negative ? -units : units).toString();
  if (scale > 0) {
    digits = digits.padStart(scale + 1, "0");
    const cut = digits.length - scale;
    let frac = digits.slice(cut).replace(/0+$/, "");
    digits = digits.slice(0, cut) + (frac ? "." + frac : "");
  }
  return (negative ? "-" : "") + digits;
}

/** Exact sum of decimal strings, returned as a decimal string. */
export function addDecimalStrings(values: string[]): string {
  if (values.length === 0) return "0";
  const parsed = values.map(parseScaled);
  const scale = Math.max(...parsed.map((p) => p.scale));
  const total = parsed.reduce((acc, p) => acc + rescale(p, scale), 0n);
  return render(total, scale);
}

/** Exact value * (percent / 100), e.g. scaleByPercent("120", 70) === "84". */
export function scaleByPercent(value: string, percent: number): string {
  if (!Number.isInteger(percent) || percent < 0) {
    throw new Error("percent must be a non-negative integer");
  }
  const parsed = parseScaled(value);
  return render(parsed.units * BigInt(percent), parsed.scale + 2);
}

/** -1, 0 or 1 comparing two decimal strings exactly. */
export function compareDecimal(a: string, b: string): number {
  const pa = parseScaled(a);
  const pb = parseScaled(b);
  const scale = Math.max(pa.scale, pb.scale);
  const ua = rescale(pa, scale);
  const ub = rescale(pb, scale);
  return ua < ub ? -1 : ua > ub ? 1 : 0;
}

/** Verbatim pass-through for server amounts; the wire string is the truth. */
export function formatMoney(value: string, unit = ""): string {
  return unit ? `${value} ${unit}` : value;
}

/**
 * The 30% helper: reasonable-offer bounds and the implied budget from
 * tentative values, all exact.
 */
export function suggestRanges(
  values: string[],
  spreadPercent: number,
): { lower: string; upper: string }[] {
  return values.map((v) => ({
    lower: scaleByPercent(v, 100 - spreadPercent),
    upper: scaleByPercent(v, 100 + spreadPercent),
  }));
}
