/** Star-rating widget markup and the rating wording shown to agents. */

import { escapeHtml } from "./html.js";

export const STAR_MEANINGS: Record<number, string> = {
  1: "strongly prefers to leave the good",
  2: "mildly prefers to leave the good",
  3: "neutral about the good",
  4: "mildly prefers to take the good",
  5: "strongly prefers to take the good",
};

/** Selectable rating levels; half stars appear only when the session allows fractions. */
export function starOptions(fractional: boolean): number[] {
  const levels: number[] = [];
  for (let r = 1; r <= 5; r += fractional ? 0.5 : 1) {
    levels.push(r);
  }
  return levels;
}

export function starGlyphs(rating: number): string {
  const full = Math.floor(rating);
  const half = rating - full >= 0.5;
  return "★".repeat(full) + (half ? "½" : "") + "☆".repeat(5 - full - (half ? 1 : 0));
}

/**
 * Form-preview of the rating-to-utility map: K^(rating-3) * market value.
 * This is elicitation feedback only; every solved number on a results page
 * comes from the service.
 */
export function utilityPreview(K: number, rating: number, marketValue: string): string {
  const factor = Math.pow(K, rating - 3);
  const value = factor * Number(marketValue);
  if (rating === 3) return marketValue; // neutral stars mean market value, exactly
  return value.toFixed(2);
}

export function renderStarPicker(
  name: string,
  goodId: string,
  fractional: boolean,
  current?: number,
): string {
  const options = starOptions(fractional)
    .map((level) => {
      const meaning = Number.isInteger(level) ? STAR_MEANINGS[level] : "between levels";
      const checked = current === level ? " checked" : "";
      return (
        `<label class="star-option" title="${escapeHtml(meaning ?? "")}">` +
        `<input type="radio" name="${escapeHtml(name)}" value="${level}"${checked} required>` +
        `<span>${starGlyphs(level)}</span>` +
        `</label>`
      );
    })
    .join("\n");
  return `<fieldset class="stars" data-good="${escapeHtml(goodId)}">${options}</fieldset>`;
}
