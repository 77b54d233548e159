/**
 * Private agent entry: the bid form with a running budget meter and a
 * one-click scale-to-budget option, or the star-rating form, and after the
 * solve the agent's own slice of the outcome. Every solved number shown
 * here arrives verbatim from the agent's role-filtered report; the page
 * never sees other agents' inputs.
 */

import { escapeHtml, page, shareCell, table } from "../html.js";
import { formatMoney } from "../money.js";
import { renderStarPicker, starGlyphs, STAR_MEANINGS, utilityPreview } from "../stars.js";
import type { AgentReport, StatusView } from "../types.js";

function meterScript(budget: string): string {
  // live budget feedback in integer fractional units: no float display
  return `
<script>
(function () {
  var budgetText = ${JSON.stringify(budget)};
  function toUnits(text, scale) {
    var m = /^(-?)(\\d+)(?:\\.(\\d+))?$/.exec(text.trim());
    if (!m) return null;
    var frac = (m[3] || "").slice(0, scale);
    while (frac.length < scale) frac += "0";
    return BigInt(m[1] + m[2] + frac);
  }
  var SCALE = 6;
  var budgetUnits = toUnits(budgetText, SCALE);
  function update() {
    var fields = document.querySelectorAll("input[data-bid]");
    var total = 0n, bad = false;
    fields.forEach(function (f) {
      var v = f.value.trim();
      if (v === "") { return; }
      var units = toUnits(v, SCALE);
      if (units === null) { bad = true; return; }
      total += units;
    });
    var span = document.getElementById("meter");
    if (!span) return;
    var text = total.toString().padStart(SCALE + 1, "0");
    var whole = text.slice(0, -SCALE), frac = text.slice(-SCALE).replace(/0+$/, "");
    span.textContent = (bad ? "?" : whole + (frac ? "." + frac : "")) + " of " + budgetText;
    span.className = !bad && total === budgetUnits ? "exact" : "off";
  }
  document.addEventListener("input", update);
  update();
})();
</script>`;
}

export function renderBidForm(view: StatusView, sessionId: string, token: string, flash = ""): string {
  const goods = view.goods;
  const budget = view.budget ?? "0";
  const rows = goods
    .map((g) => {
      const range = view.ranges?.[g.id];
      const hint = range
        ? `at least ${formatMoney(range.lower)}${range.upper ? `, at most ${formatMoney(range.upper)}` : ""}`
        : "";
      return `<tr>
  <td>${escapeHtml(g.label || g.id)}</td>
  <td><input type="text" inputmode="decimal" name="bid_${escapeHtml(g.id)}" data-bid required></td>
  <td>${escapeHtml(hint)}</td>
</tr>`;
    })
    .join("\n");
  const body = `
<h1>Your private bids</h1>
${flash}
<p>Spread the budget of <strong>${formatMoney(budget)}</strong> over the goods.
Your bids stay private: the mediator sees submission status only, the other
parties never see your numbers.</p>
<form method="post" action="/a/${escapeHtml(sessionId)}/submit?token=${encodeURIComponent(token)}">
<table>
<thead><tr><th>good</th><th>your bid</th><th>reasonable range</th></tr></thead>
<tbody>${rows}</tbody>
</table>
<p>Budget used: <span id="meter">0 of ${escapeHtml(budget)}</span></p>
<label><input type="checkbox" name="scale_to_budget" value="1">
scale my bids to the budget automatically (keeps proportions)</label>
<p><button type="submit">Submit bids</button></p>
</form>
${meterScript(budget)}`;
  return page("Submit bids", body);
}

export function renderRatingForm(view: StatusView, sessionId: string, token: string, flash = ""): string {
  const fractional = Boolean(view.fractional_ratings);
  const K = view.K ?? 1.1;
  const rows = view.goods
    .map((g) => {
      const preview = g.market_value
        ? `3 stars ⇒ ${formatMoney(g.market_value)}; 5 stars ⇒ ${utilityPreview(K, 5, g.market_value)}`
        : "";
      return `<tr>
  <td>${escapeHtml(g.label || g.id)}</td>
  <td>${g.market_value ? formatMoney(g.market_value) : ""}</td>
  <td>${renderStarPicker(`rating_${g.id}`, g.id, fractional)}</td>
  <td>${escapeHtml(preview)}</td>
</tr>`;
    })
    .join("\n");
  const legend = Object.entries(STAR_MEANINGS)
    .map(([level, meaning]) => `<li>${starGlyphs(Number(level))} — ${escapeHtml(meaning)}</li>`)
    .join("\n");
  const body = `
<h1>Rate every good</h1>
${flash}
<p>Market values are agreed; your stars say how much each good matters to
you (appreciation factor K = ${K}).</p>
<ul>${legend}</ul>
<form method="post" action="/a/${escapeHtml(sessionId)}/submit?token=${encodeURIComponent(token)}">
<table>
<thead><tr><th>good</th><th>market value</th><th>your rating</th><th>value preview</th></tr></thead>
<tbody>${rows}</tbody>
</table>
<p><button type="submit">Submit ratings</button></p>
</form>`;
  return page("Submit ratings", body);
}

export function renderPending(report: AgentReport): string {
  const body = `
<h1>Session ${escapeHtml(report.session_id)}</h1>
<p class="note">Status: <strong>${escapeHtml(report.state)}</strong>.
${report.submitted ? "Your sheet is locked in. The result appears here once the mediator solves." : "Waiting for your submission."}</p>`;
  return page("Pending", body);
}

/** The solved outcome, restricted to the agent's own rows. */
export function renderAgentReport(report: AgentReport): string {
  const goodIds = report.good_ids ?? [];
  const goods = report.goods ?? [];
  const labels = new Map(goods.map((g) => [g.id, g.label || g.id]));
  const bundleRows = Object.entries(report.your_bundle ?? {}).map(([gid, share]) => [
    escapeHtml(labels.get(gid) ?? gid),
    shareCell(share),
  ]);
  const valuationRows = Object.entries(report.your_valuations_of_bundles ?? {}).map(
    ([aid, value]) => [
      aid === report.agent_id
        ? `<strong>your bundle</strong>`
        : `bundle of ${escapeHtml(aid)}`,
      `<strong>${formatMoney(value)}</strong>`,
    ],
  );
  let pricesBlock = "";
  if (report.prices) {
    const rows = [
      ["posted price", ...report.prices.scaled.map((p) => formatMoney(p))],
    ];
    pricesBlock = `
<h2>Posted prices</h2>
${table(["", ...report.prices.good_ids.map((g) => labels.get(g) ?? g)], rows)}
<p>Everyone shops with the same budget share of ${formatMoney(report.prices.per_agent_budget)};
the prices sum to ${formatMoney(report.prices.total)}.</p>`;
  }
  let walkBlock = "";
  if (report.your_purchase_plan) {
    const plan = report.your_purchase_plan;
    const rows = plan.lines.map((line) => [
      escapeHtml(labels.get(line.good_id) ?? line.good_id),
      formatMoney(line.posted_price),
      formatMoney(line.bid),
      line.ruled_out
        ? "ruled out (priced above your bid)"
        : `-${((line.discount ?? 0) * 100).toFixed(2)}%`,
    ]);
    const steps = plan.steps
      .map(
        (s) =>
          `<li>buy ${s.fraction === 1 ? "all" : (s.fraction * 100).toFixed(2) + "%"} of
${escapeHtml(labels.get(s.good_id) ?? s.good_id)} for ${formatMoney(s.spent)} (left ${formatMoney(s.budget_left)})</li>`,
      )
      .join("\n");
    walkBlock = `
<h2>Why this is your best deal at the posted prices</h2>
${table(["good", "price", "your bid", "discount"], rows)}
<ol>${steps}</ol>`;
  }
  let metricsBlock = "";
  if (report.your_metrics) {
    const m = report.your_metrics;
    metricsBlock = `
<h2>Your bundle in market terms</h2>
${table(
  ["bundle market value", "gain over your central rating", "central rating"],
  [[formatMoney(m.market_value), m.gain === null ? "n/a" : m.gain.toFixed(4), m.central_rating.toFixed(4)]],
)}
<p>A positive gain means the bundle sits above your own neutral level; a
larger bundle value always comes with a smaller gain, and vice versa.</p>`;
  }
  const allocationRows = (report.allocation ?? []).map((row, i) => [
    (report.agent_ids ?? [])[i] === report.agent_id
      ? `<strong>you</strong>`
      : escapeHtml((report.agent_ids ?? [])[i] ?? String(i)),
    ...row.map(shareCell),
  ]);
  const body = `
<h1>Your outcome</h1>
<h2>Your bundle</h2>
${table(["good", "share"], bundleRows)}
<p>Your valuation of it: <strong>${formatMoney(report.your_utility ?? "")}</strong>
(${(100 * (report.your_normalized_utility ?? 0)).toFixed(2)}% of what the whole
asset is worth to you).</p>
<h2>The division</h2>
${table(["agent", ...goodIds.map((g) => labels.get(g) ?? g)], allocationRows)}
<h2>How you value each bundle</h2>
${table(["bundle", "your valuation"], valuationRows)}
<p>Valuations above use only your own sheet; no other party's numbers are
ever shown to you, nor yours to them.</p>
${pricesBlock}
${walkBlock}
${metricsBlock}`;
  return page("Your outcome", body);
}

export function renderSubmissionRejected(outcome: {
  violations: { message: string }[];
  warnings: { message: string }[];
}): string {
  const items = outcome.violations.map((v) => `<li>${escapeHtml(v.message)}</li>`).join("\n");
  const warns = outcome.warnings.map((v) => `<li>${escapeHtml(v.message)}</li>`).join("\n");
  const body = `
<h1>Submission not accepted</h1>
<div class="error"><ul>${items}</ul></div>
${warns ? `<p class="note">Also noted:</p><ul>${warns}</ul>` : ""}
<p>Use the back button to adjust your sheet. The automatic scaling option
can fix a budget mismatch while preserving your proportions.</p>`;
  return page("Submission rejected", body);
}

export function renderAccepted(scaled: boolean, warnings: { message: string }[]): string {
  const warns = warnings.map((v) => `<li>${escapeHtml(v.message)}</li>`).join("\n");
  const body = `
<h1>Submission accepted</h1>
<p>${scaled ? "Your bids were scaled to the budget, proportions preserved." : "Your sheet was accepted as entered."}
It is now locked; the result will appear on this page after the mediator solves.</p>
${warns ? `<p class="note">Notes from validation:</p><ul>${warns}</ul>` : ""}`;
  return page("Accepted", body);
}
