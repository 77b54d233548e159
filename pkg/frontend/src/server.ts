/**
 * Server-rendered web console for the mediation service.
 *
 * Routes:
 *   GET  /                         console home: create session, range helper, corpus
 *   GET  /ranges                   reasonable-offer helper
 *   POST /sessions                 create a session (JSON config form)
 *   GET  /m/{sid}?token=           mediator console
 *   POST /m/{sid}/open?token=      setup -> collecting
 *   POST /m/{sid}/solve?token=     run the solver
 *   GET  /a/{sid}?token=           agent entry (form / pending / own outcome)
 *   POST /a/{sid}/submit?token=    submit a sheet
 *   GET  /whatif/{caseid}?...      what-if explorer over /v1/solve-adhoc
 *
 * All fairness numbers come from the service; the only local arithmetic is
 * exact decimal form feedback (budget meter, range helper).
 */

import * as http from "node:http";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient, ApiError } from "./api.js";
import { escapeHtml, page } from "./html.js";
import { addDecimalStrings, isDecimalString, suggestRanges } from "./money.js";
import type { AgentReport, CasePayload } from "./types.js";
import {
  renderAccepted,
  renderAgentReport,
  renderBidForm,
  renderPending,
  renderRatingForm,
  renderSubmissionRejected,
} from "./views/agent.js";
import {
  renderConsole,
  renderHome,
  renderRangeHelper,
  renderTokensPage,
} from "./views/mediator.js";
import {
  applyOverrides,
  hasOverrides,
  parseOverrides,
  renderExplorer,
} from "./views/whatif.js";

const API_BASE = process.env.FAIRDIV_API ?? "http://127.0.0.1:8470";
const PORT = Number(process.env.PORT ?? 8480);

const here = dirname(fileURLToPath(import.meta.url));

function loadLocalDemo(): { label: string; payload: CasePayload } {
  const raw = readFileSync(join(here, "..", "fixtures", "translation-demo.json"), "utf-8");
  return JSON.parse(raw);
}

function htmlResponse(res: http.ServerResponse, body: string, status = 200): void {
  res.writeHead(status, { "content-type": "text/html; charset=utf-8" });
  res.end(body);
}

function errorPage(res: http.ServerResponse, err: unknown): void {
  const message = err instanceof Error ? err.message : String(err);
  const status = err instanceof ApiError ? err.status : 500;
  htmlResponse(
    res,
    page("Error", `<h1>Something went wrong</h1><div class="error">${escapeHtml(message)}</div>
<p><a href="/">back to console</a></p>`),
    status >= 400 && status < 600 ? status : 500,
  );
}

async function readForm(req: http.IncomingMessage): Promise<URLSearchParams> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) chunks.push(chunk as Buffer);
  return new URLSearchParams(Buffer.concat(chunks).toString("utf-8"));
}

/** Assemble a session config from the structured builder form. */
export function buildConfigFromForm(form: URLSearchParams): CasePayload {
  const procedure = form.get("procedure") === "egalitarian" ? "egalitarian" : "nash";
  const goods: CasePayload["goods"] = [];
  const ranges: NonNullable<CasePayload["ranges"]> = {};
  for (let i = 0; i < 16; i++) {
    const id = (form.get(`good_id_${i}`) ?? "").trim();
    if (!id) continue;
    const mv = (form.get(`good_mv_${i}`) ?? "").trim();
    goods.push({
      id,
      label: (form.get(`good_label_${i}`) ?? "").trim(),
      ...(mv ? { market_value: mv } : {}),
    });
    const lo = (form.get(`range_lo_${i}`) ?? "").trim();
    const hi = (form.get(`range_hi_${i}`) ?? "").trim();
    if (lo) ranges[id] = { lower: lo, upper: hi || null };
  }
  const agents: CasePayload["agents"] = [];
  for (let i = 0; i < 12; i++) {
    const id = (form.get(`agent_id_${i}`) ?? "").trim();
    if (!id) continue;
    const weight = (form.get(`agent_weight_${i}`) ?? "").trim();
    agents.push({
      id,
      label: (form.get(`agent_label_${i}`) ?? "").trim(),
      ...(weight ? { weight } : {}),
    });
  }
  const budget = (form.get("budget") ?? "").trim();
  const config: CasePayload = {
    procedure,
    goods,
    agents,
    options: {
      disclose_ranges: form.get("disclose_ranges") === "1",
      fractional_ratings: form.get("fractional_ratings") === "1",
    },
  };
  if (procedure === "nash" && budget) config.budget = budget;
  if (procedure === "egalitarian") config.K = Number(form.get("K") ?? "1.1");
  if (Object.keys(ranges).length > 0) config.ranges = ranges;
  return config;
}

export function createServer(api: ApiClient): http.Server {
  return http.createServer(async (req, res) => {
    const url = new URL(req.url ?? "/", "http://localhost");
    const path = url.pathname.replace(/\/$/, "") || "/";
    const token = url.searchParams.get("token") ?? "";
    try {
      if (req.method === "GET" && path === "/") {
        const listing = await api.cases();
        const demo = loadLocalDemo();
        const cases = [
          ...listing.cases,
          { id: "translation-demo", label: demo.label, procedure: "egalitarian" },
        ];
        return htmlResponse(res, renderHome(cases));
      }

      if (req.method === "GET" && path === "/ranges") {
        const raw = url.searchParams.get("values") ?? "";
        const spread = Number(url.searchParams.get("spread") ?? "30");
        const values = raw
          .split(",")
          .map((v) => v.trim())
          .filter((v) => v !== "");
        if (values.length === 0 || values.some((v) => !isDecimalString(v))) {
          return htmlResponse(
            res,
            page("Range helper", `<div class="error">Enter comma-separated decimal values.</div>`),
            422,
          );
        }
        const ranges = suggestRanges(values, spread);
        const budget = addDecimalStrings(values);
        return htmlResponse(res, renderRangeHelper(values, spread, ranges, budget));
      }

      if (req.method === "POST" && path === "/sessions") {
        const form = await readForm(req);
        let config: CasePayload;
        try {
          config = JSON.parse(form.get("config") ?? "");
        } catch {
          return htmlResponse(
            res,
            page("Invalid", `<div class="error">The configuration must be valid JSON.</div>`),
            422,
          );
        }
        const created = await api.createSession(config);
        return htmlResponse(res, renderTokensPage(created));
      }

      if (req.method === "POST" && path === "/sessions/build") {
        const form = await readForm(req);
        const config = buildConfigFromForm(form);
        const created = await api.createSession(config);
        return htmlResponse(res, renderTokensPage(created));
      }

      let m = /^\/m\/([A-Za-z0-9_-]+)$/.exec(path);
      if (req.method === "GET" && m) {
        const report = await api.mediatorReport(m[1]!, token);
        return htmlResponse(res, renderConsole(report, m[1]!, token));
      }

      m = /^\/m\/([A-Za-z0-9_-]+)\/open$/.exec(path);
      if (req.method === "POST" && m) {
        await api.openSession(m[1]!, token);
        res.writeHead(303, { location: `/m/${m[1]}?token=${encodeURIComponent(token)}` });
        return res.end();
      }

      m = /^\/m\/([A-Za-z0-9_-]+)\/solve$/.exec(path);
      if (req.method === "POST" && m) {
        await api.solve(m[1]!, token);
        res.writeHead(303, { location: `/m/${m[1]}?token=${encodeURIComponent(token)}` });
        return res.end();
      }

      m = /^\/a\/([A-Za-z0-9_-]+)$/.exec(path);
      if (req.method === "GET" && m) {
        const report: AgentReport = await api.agentReport(m[1]!, token);
        if (report.state === "solved") {
          return htmlResponse(res, renderAgentReport(report));
        }
        if (report.submitted || report.state === "setup") {
          return htmlResponse(res, renderPending(report));
        }
        const status = await api.status(m[1]!, token);
        const form =
          status.procedure === "nash"
            ? renderBidForm(status, m[1]!, token)
            : renderRatingForm(status, m[1]!, token);
        return htmlResponse(res, form);
      }

      m = /^\/a\/([A-Za-z0-9_-]+)\/submit$/.exec(path);
      if (req.method === "POST" && m) {
        const sid = m[1]!;
        const form = await readForm(req);
        const status = await api.status(sid, token);
        let outcome;
        if (status.procedure === "nash") {
          const bids: Record<string, string> = {};
          for (const good of status.goods) {
            bids[good.id] = (form.get(`bid_${good.id}`) ?? "").trim();
          }
          outcome = await api.submit(sid, token, { bids }, form.get("scale_to_budget") === "1");
        } else {
          const ratings: Record<string, number> = {};
          for (const good of status.goods) {
            ratings[good.id] = Number(form.get(`rating_${good.id}`));
          }
          outcome = await api.submit(sid, token, { ratings });
        }
        if (!outcome.accepted) {
          return htmlResponse(
            res,
            renderSubmissionRejected(outcome.report ?? { violations: [], warnings: [] }),
            422,
          );
        }
        return htmlResponse(
          res,
          renderAccepted(Boolean(outcome.scaled), outcome.report?.warnings ?? []),
        );
      }

      m = /^\/whatif\/([A-Za-z0-9_-]+)$/.exec(path);
      if (req.method === "GET" && m) {
        const caseId = m[1]!;
        let label: string;
        let payload: CasePayload;
        if (caseId === "translation-demo") {
          const demo = loadLocalDemo();
          label = demo.label;
          payload = demo.payload;
        } else {
          const detail = await api.caseDetail(caseId);
          label = detail.label;
          payload = detail.payload;
        }
        const overrides = parseOverrides(url.searchParams);
        const baseline = await api.solveAdhoc(payload);
        let variant = null;
        let error = "";
        if (hasOverrides(overrides)) {
          try {
            variant = await api.solveAdhoc(applyOverrides(payload, overrides));
          } catch (err) {
            error = err instanceof Error ? err.message : String(err);
          }
        }
        return htmlResponse(
          res,
          renderExplorer(caseId, label, payload, baseline, variant, overrides, error),
        );
      }

      htmlResponse(res, page("Not found", `<h1>Not found</h1><p><a href="/">console</a></p>`), 404);
    } catch (err) {
      errorPage(res, err);
    }
  });
}

const entryHref = process.argv[1] ? new URL(`file://${process.argv[1]}`).href : "";
if (import.meta.url === entryHref) {
  const api = new ApiClient(API_BASE);
  createServer(api).listen(PORT, () => {
    console.log(`console on http://127.0.0.1:${PORT} -> api ${API_BASE}`);
  });
}
