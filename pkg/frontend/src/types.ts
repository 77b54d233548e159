/** Mirrors of the mediation service's /v1 payloads. */

export interface GoodInfo {
  id: string;
  label: string;
  market_value?: string; // decimal string
}

export interface AgentSpec {
  id: string;
  label: string;
  weight?: string;
}

export interface RangeInfo {
  lower: string;
  upper: string | null;
}

export interface CasePayload {
  procedure: "nash" | "egalitarian";
  goods: GoodInfo[];
  agents: AgentSpec[];
  budget?: string;
  K?: number;
  ranges?: Record<string, RangeInfo>;
  bids?: Record<string, Record<string, string>>;
  ratings?: Record<string, Record<string, number>>;
  options?: { disclose_ranges?: boolean; fractional_ratings?: boolean };
}

export interface SessionCreated {
  session_id: string;
  state: string;
  mediator_token: string;
  agent_tokens: Record<string, string>;
}

export interface RosterEntry {
  agent_id: string;
  label: string;
  weight: string;
  submitted: boolean;
  received_at: string | null;
  scaled: boolean;
}

export interface StatusView {
  session_id: string;
  state: "setup" | "collecting" | "solved";
  procedure: "nash" | "egalitarian";
  goods: GoodInfo[];
  budget?: string;
  K?: number;
  roster?: RosterEntry[];
  ranges?: Record<string, RangeInfo>;
  options?: { disclose_ranges?: boolean; fractional_ratings?: boolean };
  agent_id?: string;
  submitted?: boolean;
  fractional_ratings?: boolean;
}

export interface PricesDoc {
  good_ids: string[];
  scaled: string[];
  per_agent_budget: string;
  budget: string;
  total: string;
}

export interface PurchaseLineDoc {
  good_id: string;
  posted_price: string;
  bid: string;
  ruled_out: boolean;
  discount: number | null;
}

export interface PurchaseStepDoc {
  good_id: string;
  fraction: number;
  spent: string;
  budget_left: string;
}

export interface PurchasePlanDoc {
  agent_id: string;
  budget: string;
  lines: PurchaseLineDoc[];
  steps: PurchaseStepDoc[];
  remaining: string;
}

export interface MetricsLineDoc {
  agent_id: string;
  market_value: string;
  avg_standardized_utility: number | null;
  gain: number | null;
  central_rating: number;
}

export interface AuditDoc {
  envy_matrix: string[][];
  envy_pass: boolean;
  fair_share_pass: boolean;
  efficient: boolean;
  split_count: number;
  ordering_pass?: boolean;
  mv_gain_table?: {
    agent_id: string;
    market_value: string;
    mv_per_weight: string;
    gain: number | null;
  }[];
}

export interface FrontierDoc {
  agent_ids: string[];
  vertices: [number, number][];
  equal_utility_point?: [number, number] | null;
}

export interface SolveResult {
  procedure: string;
  agent_ids: string[];
  good_ids: string[];
  allocation: number[][];
  utilities: string[];
  normalized_utilities: number[];
  split_count: number;
  prices?: PricesDoc;
  purchases?: PurchasePlanDoc[];
  metrics?: MetricsLineDoc[];
  audit: AuditDoc;
  equality?: { max_gap: number; equalized: boolean; downgraded: boolean };
  frontier?: FrontierDoc;
  multiple_optima?: boolean;
}

export interface MediatorReport extends StatusView {
  submissions?: Record<string, unknown>;
  result?: SolveResult;
}

export interface AgentReport {
  session_id: string;
  state: string;
  agent_id: string;
  status?: string;
  submitted?: boolean;
  procedure?: string;
  goods?: GoodInfo[];
  your_submission?: {
    bids?: Record<string, string>;
    ratings?: Record<string, number>;
  };
  allocation?: number[][];
  agent_ids?: string[];
  good_ids?: string[];
  your_bundle?: Record<string, number>;
  your_utility?: string;
  your_normalized_utility?: number;
  your_valuations_of_bundles?: Record<string, string>;
  split_count?: number;
  prices?: PricesDoc;
  your_purchase_plan?: PurchasePlanDoc;
  your_metrics?: MetricsLineDoc;
}

export interface SubmissionOutcome {
  accepted: boolean;
  scaled?: boolean;
  report?: {
    ok: boolean;
    violations: { code: string; message: string }[];
    warnings: { code: string; message: string }[];
  };
}

export interface CaseListing {
  cases: { id: string; label: string; procedure: string }[];
}

export interface CaseDetail {
  id: string;
  label: string;
  payload: CasePayload;
}
