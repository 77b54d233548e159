/**
 * What-if explorer: clone a case snapshot, tweak the appreciation factor, a
 * single rating or bid, or shift a whole profile by a star, re-solve through
 * the stateless endpoint, and compare against the baseline side by side.
 * Nothing here mutates a session; both solves go through /v1/solve-adhoc.
 */

import { escapeHtml, infoBadge, page, shareCell, table } from "../html.js";
import { formatMoney } from "../money.js";
import type { CasePayload, SolveResult } from "../types.js";
import { frontierSvg, resultBlocks } from "./mediator.js";

export interface Overrides {
  K?: number;
  ratings: { agent: string; good: string; value: number }[];
  bids: { agent: string; good: string; value: string }[];
  starShift?: { agent: string; delta: number };
}

export function parseOverrides(params: URLSearchParams): Overrides {
  const out: Overrides = { ratings: [], bids: [] };
  const K = params.get("K");
  if (K !== null && K.trim() !== "") out.K = Number(K);
  for (const [key, value] of params.entries()) {
    if (value.trim() === "") continue;
    const rating = /^rating_([^_]+)_(.+)$/.exec(key);
    if (rating) out.ratings.push({ agent: rating[1]!, good: rating[2]!, value: Number(value) });
    const bid = /^bid_([^_]+)_(.+)$/.exec(key);
    if (bid) out.bids.push({ agent: bid[1]!, good: bid[2]!, value: value.trim() });
  }
  const shiftAgent = params.get("shift_agent");
  const shiftDelta = params.get("shift_delta");
  if (shiftAgent && shiftDelta && shiftDelta.trim() !== "" && Number(shiftDelta) !== 0) {
    out.starShift = { agent: shiftAgent, delta: Number(shiftDelta) };
  }
  return out;
}

export function hasOverrides(o: Overrides): boolean {
  return o.K !== undefined || o.ratings.length > 0 || o.bids.length > 0 || o.starShift !== undefined;
}

/** Pure clone-and-patch; the engine re-validates everything server-side. */
export function applyOverrides(payload: CasePayload, o: Overrides): CasePayload {
  const clone: CasePayload = JSON.parse(JSON.stringify(payload));
  if (o.K !== undefined) clone.K = o.K;
  for (const r of o.ratings) {
    if (clone.ratings?.[r.agent]) clone.ratings[r.agent]![r.good] = r.value;
  }
  for (const b of o.bids) {
    if (clone.bids?.[b.agent]) clone.bids[b.agent]![b.good] = b.value;
  }
  if (o.starShift && clone.ratings?.[o.starShift.agent]) {
    const sheet = clone.ratings[o.starShift.agent]!;
    for (const good of Object.keys(sheet)) {
      sheet[good] = (sheet[good] as number) + o.starShift.delta;
    }
  }
  return clone;
}

export function maxAllocationDelta(a: SolveResult, b: SolveResult): number {
  let worst = 0;
  for (let i = 0; i < a.allocation.length; i++) {
    const rowA = a.allocation[i] ?? [];
    const rowB = b.allocation[i] ?? [];
    for (let j = 0; j < rowA.length; j++) {
      worst = Math.max(worst, Math.abs((rowA[j] ?? 0) - (rowB[j] ?? 0)));
    }
  }
  return worst;
}

function metricDeltas(base: SolveResult, variant: SolveResult): string {
  if (!base.metrics || !variant.metrics) return "";
  const rows = base.metrics.map((m, i) => {
    const v = variant.metrics![i];
    const dMv = v ? Number(v.market_value) - Number(m.market_value) : 0;
    const dGain = v && v.gain !== null && m.gain !== null ? v.gain - m.gain : null;
    return [
      escapeHtml(m.agent_id),
      formatMoney(m.market_value),
      v ? formatMoney(v.market_value) : "",
      dMv.toFixed(4),
      dGain === null ? "n/a" : dGain.toFixed(4),
    ];
  });
  return `
<h3>Bundle value and gain deltas</h3>
${table(["agent", "value (baseline)", "value (what-if)", "Δ value", "Δ gain"], rows)}`;
}

function allocationSide(result: SolveResult, title: string): string {
  const rows = result.allocation.map((row, i) => [
    escapeHtml(result.agent_ids[i] ?? String(i)),
    ...row.map(shareCell),
  ]);
  return `
<div>
<h3>${escapeHtml(title)}</h3>
${table(["agent", ...result.good_ids], rows)}
<p>${infoBadge(`${result.split_count} split good(s)`)}</p>
</div>`;
}

export function renderExplorer(
  caseId: string,
  label: string,
  payload: CasePayload,
  baseline: SolveResult,
  variant: SolveResult | null,
  overrides: Overrides,
  error = "",
): string {
  const isRating = payload.ratings !== undefined;
  const agents = payload.agents.map((a) => a.id);
  const goods = payload.goods.map((g) => g.id);
  const overrideFields = isRating
    ? agents
        .map(
          (aid) =>
            `<tr><td>${escapeHtml(aid)}</td>` +
            goods
              .map(
                (gid) =>
                  `<td><input type="number" step="0.5" min="1" max="5" name="rating_${escapeHtml(aid)}_${escapeHtml(gid)}" ` +
                  `placeholder="${payload.ratings?.[aid]?.[gid] ?? ""}"></td>`,
              )
              .join("") +
            `</tr>`,
        )
        .join("\n")
    : agents
        .map(
          (aid) =>
            `<tr><td>${escapeHtml(aid)}</td>` +
            goods
              .map(
                (gid) =>
                  `<td><input type="text" name="bid_${escapeHtml(aid)}_${escapeHtml(gid)}" ` +
                  `placeholder="${escapeHtml(payload.bids?.[aid]?.[gid] ?? "")}"></td>`,
              )
              .join("") +
            `</tr>`,
        )
        .join("\n");
  const shiftBlock = isRating
    ? `<p>Translation demo: shift every rating of
<select name="shift_agent">${agents.map((a) => `<option>${escapeHtml(a)}</option>`).join("")}</select>
by <input type="number" step="1" name="shift_delta" value="" placeholder="+1"> star(s).
Shifting a whole profile leaves the outcome unchanged.</p>`
    : "";
  const form = `
<form method="get" action="/whatif/${encodeURIComponent(caseId)}">
${isRating ? `<p>Appreciation factor K: <input type="number" step="0.01" min="1.01" max="2" name="K" value="${overrides.K ?? ""}" placeholder="${payload.K ?? 1.1}"></p>` : ""}
<table>
<thead><tr><th>agent</th>${goods.map((g) => `<th>${escapeHtml(g)}</th>`).join("")}</tr></thead>
<tbody>${overrideFields}</tbody>
</table>
${shiftBlock}
<p><button type="submit">Re-solve</button> <a href="/whatif/${encodeURIComponent(caseId)}">reset</a></p>
</form>`;

  let comparison = "";
  if (variant) {
    const delta = maxAllocationDelta(baseline, variant);
    const identical = delta <= 1e-9;
    comparison = `
<h2>Comparison</h2>
<p>${
      identical
        ? `<span class="badge ok">allocations identical (max share delta ${delta.toExponential(2)})</span>`
        : `<span class="badge info">allocations differ (max share delta ${delta.toFixed(4)})</span>`
    }
${infoBadge(`split goods: ${baseline.split_count} → ${variant.split_count}`)}</p>
<div class="columns">
${allocationSide(baseline, "Baseline")}
${allocationSide(variant, "What-if")}
</div>
${metricDeltas(baseline, variant)}
${
  baseline.frontier && variant.utilities.length === 2
    ? `<h3>Frontier (baseline marked red, what-if teal)</h3>` +
      frontierSvg(
        baseline.frontier,
        [Number(baseline.utilities[0]), Number(baseline.utilities[1])],
        [Number(variant.utilities[0]), Number(variant.utilities[1])],
      )
    : ""
}`;
  }

  const body = `
<h1>What-if: ${escapeHtml(label)}</h1>
<p>Exploration runs through the stateless solver and never changes any
stored session.</p>
${error ? `<div class="error">${escapeHtml(error)}</div>` : ""}
<h2>Adjust and re-solve</h2>
${form}
${comparison || `<h2>Baseline</h2>${resultBlocks(baseline, new Map())}`}
<p><a href="/">back to console</a></p>`;
  return page(`What-if: ${label}`, body);
}
