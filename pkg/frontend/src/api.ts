/** Thin typed client for the mediation service's /v1 API. */

import type {
  AgentReport,
  CaseDetail,
  CaseListing,
  CasePayload,
  MediatorReport,
  SessionCreated,
  SolveResult,
  StatusView,
  SubmissionOutcome,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  const text = await response.text();
  let body: unknown = {};
  try {
    body = text ? JSON.parse(text) : {};
  } catch {
    body = { detail: text };
  }
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : text;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await fetch(this.url(path)));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    return unwrap<T>(
      await fetch(this.url(path), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  createSession(config: CasePayload): Promise<SessionCreated> {
    return this.post("/v1/sessions", config);
  }

  openSession(sessionId: string, token: string): Promise<{ state: string }> {
    return this.post(`/v1/sessions/${sessionId}/open`, { token });
  }

  status(sessionId: string, token: string): Promise<StatusView> {
    return this.get(`/v1/sessions/${sessionId}?as=${encodeURIComponent(token)}`);
  }

  submit(
    sessionId: string,
    token: string,
    sheet: { bids?: Record<string, string>; ratings?: Record<string, number> },
    scaleToBudget = false,
  ): Promise<SubmissionOutcome> {
    return this.post(`/v1/sessions/${sessionId}/submissions`, {
      token,
      ...sheet,
      scale_to_budget: scaleToBudget,
    });
  }

  solve(sessionId: string, token: string): Promise<{ state: string }> {
    return this.post(`/v1/sessions/${sessionId}/solve`, { token });
  }

  mediatorReport(sessionId: string, token: string): Promise<MediatorReport> {
    return this.get(`/v1/sessions/${sessionId}/report?as=${encodeURIComponent(token)}`);
  }

  agentReport(sessionId: string, token: string): Promise<AgentReport> {
    return this.get(`/v1/sessions/${sessionId}/report?as=${encodeURIComponent(token)}`);
  }

  cases(): Promise<CaseListing> {
    return this.get("/v1/cases");
  }

  caseDetail(caseId: string): Promise<CaseDetail> {
    return this.get(`/v1/cases/${encodeURIComponent(caseId)}`);
  }

  /** Stateless what-if solve; never touches any stored session. */
  solveAdhoc(payload: CasePayload): Promise<SolveResult> {
    return this.post("/v1/solve-adhoc", payload);
  }
}
