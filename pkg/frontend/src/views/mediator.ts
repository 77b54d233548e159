/**
 * Mediator console: case setup with the range helper, roster tracking,
 * the solve trigger, and the full solved picture (allocation, prices,
 * audit badges, metrics). The console shows everything; agent pages show
 * only their own slice.
 */

import { badge, escapeHtml, infoBadge, page, shareCell, table } from "../html.js";
import { formatMoney } from "../money.js";
import type { FrontierDoc, MediatorReport, SessionCreated, SolveResult, StatusView } from "../types.js";

const BUILDER_GOOD_ROWS = 8;
const BUILDER_AGENT_ROWS = 6;

function builderForm(): string {
  const goodRows = Array.from({ length: BUILDER_GOOD_ROWS }, (_, i) => {
    return `<tr>
<td><input type="text" name="good_id_${i}" placeholder="g${i + 1}"></td>
<td><input type="text" name="good_label_${i}"></td>
<td><input type="text" inputmode="decimal" name="good_mv_${i}"></td>
<td><input type="text" inputmode="decimal" name="range_lo_${i}"></td>
<td><input type="text" inputmode="decimal" name="range_hi_${i}"></td>
</tr>`;
  }).join("\n");
  const agentRows = Array.from({ length: BUILDER_AGENT_ROWS }, (_, i) => {
    return `<tr>
<td><input type="text" name="agent_id_${i}" placeholder="${["A", "B", "C", "D", "E", "F"][i]}"></td>
<td><input type="text" name="agent_label_${i}"></td>
<td><input type="text" name="agent_weight_${i}" placeholder="1"></td>
</tr>`;
  }).join("\n");
  // live preview of one star's worth: per-star multipliers on a 100-unit good
  const kPreview = `
<script>
(function () {
  var slider = document.getElementById("kslider");
  var out = document.getElementById("kpreview");
  function update() {
    var K = Number(slider.value);
    var cells = [];
    for (var r = 1; r <= 5; r++) {
      var v = Math.pow(K, r - 3) * 100;
      cells.push(r + "\\u2605 \\u21d2 " + (r === 3 ? "100" : v.toFixed(2)));
    }
    out.textContent = "K = " + K.toFixed(2) + " on a 100-unit good: " + cells.join("   ");
  }
  slider.addEventListener("input", update);
  update();
})();
</script>`;
  return `
<form method="post" action="/sessions/build">
<p>
<label>procedure:
<select name="procedure">
  <option value="nash">fix your own price (private bids, competitive solve)</option>
  <option value="egalitarian">price and rate (star ratings, egalitarian solve)</option>
</select></label>
</p>
<p><label>common budget (bid sessions): <input type="text" inputmode="decimal" name="budget"></label></p>
<p><label>appreciation factor K (rating sessions):
<input type="range" id="kslider" name="K" min="1.01" max="2" step="0.01" value="1.1"></label><br>
<span id="kpreview"></span></p>
<h3>Goods</h3>
<table>
<thead><tr><th>id</th><th>label</th><th>market value</th><th>range lower</th><th>range upper</th></tr></thead>
<tbody>${goodRows}</tbody>
</table>
<h3>Agents</h3>
<table>
<thead><tr><th>id</th><th>label</th><th>entitlement weight</th></tr></thead>
<tbody>${agentRows}</tbody>
</table>
<p>
<label><input type="checkbox" name="disclose_ranges" value="1"> disclose ranges to agents</label>
<label><input type="checkbox" name="fractional_ratings" value="1"> allow half-star ratings</label>
</p>
<p><button type="submit">Create session</button></p>
</form>
${kPreview}`;
}

export function renderHome(
  cases: { id: string; label: string; procedure: string }[],
  flash = "",
): string {
  const caseRows = cases
    .map(
      (c) =>
        `<tr><td>${escapeHtml(c.id)}</td><td>${escapeHtml(c.label)}</td><td>${escapeHtml(c.procedure)}</td>` +
        `<td><a href="/whatif/${encodeURIComponent(c.id)}">explore</a></td></tr>`,
    )
    .join("\n");
  const body = `
<h1>Mediation console</h1>
${flash}
<div class="columns">
<div>
<h2>Start a session</h2>
${builderForm()}
<h2>Advanced: paste a configuration</h2>
<p>Same JSON schema as a case file, without the sheets.</p>
<form method="post" action="/sessions">
<textarea name="config" rows="10" cols="60" placeholder='{"procedure": "nash", ...}'></textarea>
<p><button type="submit">Create from JSON</button></p>
</form>
</div>
<div>
<h2>Range helper</h2>
<p>Enter tentative values (comma separated) and a spread in percent to get
reasonable-offer bounds and the implied budget, computed exactly.</p>
<form method="get" action="/ranges">
<input type="text" name="values" placeholder="180, 120, 130">
<input type="number" name="spread" value="30" min="0" max="99"> %
<button type="submit">Suggest</button>
</form>
<h2>Worked cases</h2>
<table><thead><tr><th>id</th><th>label</th><th>procedure</th><th>what-if</th></tr></thead>
<tbody>${caseRows}</tbody></table>
</div>
</div>`;
  return page("Mediation console", body);
}

export function renderRangeHelper(
  values: string[],
  spread: number,
  ranges: { lower: string; upper: string }[],
  budget: string,
): string {
  const rows = values.map((v, i) => [
    formatMoney(v),
    formatMoney(ranges[i]?.lower ?? ""),
    formatMoney(ranges[i]?.upper ?? ""),
  ]);
  const body = `
<h1>Reasonable-offer helper</h1>
${table(["tentative value", `lower (-${spread}%)`, `upper (+${spread}%)`], rows)}
<p>Implied budget (sum of tentative values): <strong>${formatMoney(budget)}</strong>.
Mediators often round it and may keep only the lower bounds.</p>
<p><a href="/">back</a></p>`;
  return page("Range helper", body);
}

export function renderTokensPage(created: SessionCreated): string {
  const agentRows = Object.entries(created.agent_tokens).map(([aid, token]) => [
    escapeHtml(aid),
    `<code>/a/${escapeHtml(created.session_id)}?token=${escapeHtml(token)}</code>`,
  ]);
  const body = `
<h1>Session ${escapeHtml(created.session_id)} created</h1>
<p class="note">Hand each agent their private link; keep the mediator link
to yourself. Links carry capability tokens and are shown once.</p>
${table(["agent", "private entry link"], agentRows)}
<p>Mediator console:
<code>/m/${escapeHtml(created.session_id)}?token=${escapeHtml(created.mediator_token)}</code></p>
<p>The session starts in <strong>setup</strong>; open it for submissions from
the console.</p>`;
  return page("Session created", body);
}

function rosterBlock(view: StatusView, sessionId: string, token: string): string {
  const roster = view.roster ?? [];
  const rows = roster.map((r) => [
    escapeHtml(r.agent_id),
    escapeHtml(r.label),
    escapeHtml(r.weight),
    r.submitted ? `submitted${r.scaled ? " (scaled)" : ""}` : "waiting",
  ]);
  const missing = roster.filter((r) => !r.submitted).map((r) => r.agent_id);
  const solveButton =
    view.state === "collecting" && missing.length === 0
      ? `<form class="inline" method="post" action="/m/${escapeHtml(sessionId)}/solve?token=${encodeURIComponent(token)}">
<button type="submit">Solve now</button></form>`
      : view.state === "collecting"
        ? `<button disabled title="missing: ${escapeHtml(missing.join(", "))}">Solve (waiting for: ${escapeHtml(missing.join(", "))})</button>`
        : "";
  const openButton =
    view.state === "setup"
      ? `<form class="inline" method="post" action="/m/${escapeHtml(sessionId)}/open?token=${encodeURIComponent(token)}">
<button type="submit">Open for submissions</button></form>`
      : "";
  return `
<h2>Roster</h2>
${table(["agent", "label", "entitlement", "status"], rows)}
<p>${openButton} ${solveButton}</p>`;
}

function frontierSvg(frontier: FrontierDoc, current?: [number, number], variant?: [number, number]): string {
  const xs = frontier.vertices.map((v) => v[0]);
  const ys = frontier.vertices.map((v) => v[1]);
  const maxX = Math.max(...xs) || 1;
  const maxY = Math.max(...ys) || 1;
  const W = 360;
  const H = 280;
  const pad = 28;
  const px = (x: number) => pad + (x / maxX) * (W - 2 * pad);
  const py = (y: number) => H - pad - (y / maxY) * (H - 2 * pad);
  const points = frontier.vertices.map((v) => `${px(v[0]).toFixed(1)},${py(v[1]).toFixed(1)}`).join(" ");
  const mark = (p: [number, number] | undefined, cls: string, label: string) =>
    p
      ? `<circle class="${cls}" cx="${px(p[0]).toFixed(1)}" cy="${py(p[1]).toFixed(1)}" r="5">
<title>${escapeHtml(label)}: (${p[0].toFixed(2)}, ${p[1].toFixed(2)})</title></circle>`
      : "";
  const equal = frontier.equal_utility_point ?? undefined;
  return `
<svg width="${W}" height="${H}" role="img" aria-label="utility frontier">
<polyline class="frontier" points="${points}"/>
${mark(equal ?? undefined, "marker2", "equal utilities")}
${mark(current, "marker", "current solution")}
${mark(variant, "marker2", "what-if")}
<text x="${W - pad}" y="${H - 8}" text-anchor="end" font-size="11">${escapeHtml(frontier.agent_ids[0] ?? "")}</text>
<text x="8" y="${pad}" font-size="11">${escapeHtml(frontier.agent_ids[1] ?? "")}</text>
</svg>`;
}

export function resultBlocks(result: SolveResult, labels: Map<string, string>): string {
  const goodHeads = result.good_ids.map((g) => labels.get(g) ?? g);
  const allocationRows = result.allocation.map((row, i) => [
    escapeHtml(result.agent_ids[i] ?? String(i)),
    ...row.map(shareCell),
  ]);
  const utilityRows = result.agent_ids.map((aid, i) => [
    escapeHtml(aid),
    formatMoney(result.utilities[i] ?? ""),
    ((result.normalized_utilities[i] ?? 0) * 100).toFixed(3) + "%",
  ]);
  let pricesBlock = "";
  if (result.prices) {
    pricesBlock = `
<h2>Equilibrium prices</h2>
${table(["", ...goodHeads, "total"], [["price", ...result.prices.scaled.map((p) => formatMoney(p)), formatMoney(result.prices.total)]])}
<p>Per-agent budget share: ${formatMoney(result.prices.per_agent_budget)}.</p>`;
  }
  let metricsBlock = "";
  if (result.metrics) {
    metricsBlock = `
<h2>Bundle metrics</h2>
${table(
  ["agent", "market value", "gain", "central rating"],
  result.metrics.map((m) => [
    escapeHtml(m.agent_id),
    formatMoney(m.market_value),
    m.gain === null ? "n/a" : m.gain.toFixed(4),
    m.central_rating.toFixed(4),
  ]),
)}`;
  }
  const a = result.audit;
  const badges = [
    badge("no envy", a.envy_pass),
    badge("fair share", a.fair_share_pass),
    badge("efficient", a.efficient),
    ...(a.ordering_pass === undefined ? [] : [badge("value/gain ordering", a.ordering_pass)]),
    infoBadge(`${result.split_count} split good(s)`),
    ...(result.multiple_optima ? [infoBadge("alternate optimum exists")] : []),
  ].join(" ");
  const frontierBlock = result.frontier
    ? `<h2>Utility frontier</h2>${frontierSvg(
        result.frontier,
        [Number(result.utilities[0]), Number(result.utilities[1])],
      )}`
    : "";
  return `
<h2>Allocation</h2>
${table(["agent", ...goodHeads], allocationRows)}
<h2>Utilities</h2>
${table(["agent", "bundle value (own sheet)", "share of own total"], utilityRows)}
<p>${badges}</p>
${pricesBlock}
${metricsBlock}
${frontierBlock}`;
}

export function renderConsole(report: MediatorReport, sessionId: string, token: string, flash = ""): string {
  const labels = new Map(report.goods.map((g) => [g.id, g.label || g.id]));
  const goodsRows = report.goods.map((g) => [
    escapeHtml(g.id),
    escapeHtml(g.label),
    g.market_value ? formatMoney(g.market_value) : "",
    report.ranges?.[g.id]
      ? `${formatMoney(report.ranges[g.id]!.lower)} .. ${report.ranges[g.id]!.upper ? formatMoney(report.ranges[g.id]!.upper!) : "open"}`
      : "",
  ]);
  const header = `
<h1>Session ${escapeHtml(sessionId)} — ${escapeHtml(report.procedure)} (${escapeHtml(report.state)})</h1>
${flash}
<h2>Goods</h2>
${table(["id", "label", "market value", "range"], goodsRows)}
${report.budget ? `<p>Common budget: <strong>${formatMoney(report.budget)}</strong></p>` : ""}
${report.K ? `<p>Appreciation factor K = ${report.K}</p>` : ""}`;
  const roster = rosterBlock(report, sessionId, token);
  const result = report.result ? resultBlocks(report.result, labels) : "";
  return page("Mediator console", header + roster + result);
}

export { frontierSvg };
