// HTTP client for the mltrace service. Layout requests are latest-wins:
// starting a new one aborts the previous in-flight request.

import type { GroupingParams } from "./state.js";
import type { AccountDetail, CaseSummary, LayoutDoc } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiConfig {
  apiBaseUrl: string;
  fetchFn?: FetchLike;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

function groupingQuery(params: GroupingParams, expanded: readonly string[]): string {
  const query = new URLSearchParams();
  query.set("scenario", params.scenario);
  if (params.thresholdPct !== undefined) query.set("threshold_pct", String(params.thresholdPct));
  if (params.windowHours !== undefined) query.set("window_hours", String(params.windowHours));
  query.set("min_accounts", String(params.minAccounts));
  query.set("exclude_fraud_txns", params.excludeFraudTxns ? "true" : "false");
  for (const metaId of expanded) query.append("expanded", metaId);
  return query.toString();
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;
  private inflightLayout: AbortController | null = null;

  constructor(config: ApiConfig) {
    this.base = config.apiBaseUrl.replace(/\/+$/, "");
    this.fetchFn = config.fetchFn ?? ((input, init) => fetch(input, init));
  }

  layoutUrl(caseId: string, params: GroupingParams, expanded: readonly string[] = []): string {
    return `${this.base}/cases/${encodeURIComponent(caseId)}/layout?${groupingQuery(params, expanded)}`;
  }

  async fetchLayout(
    caseId: string,
    params: GroupingParams,
    expanded: readonly string[] = [],
  ): Promise<LayoutDoc> {
    this.inflightLayout?.abort();
    const controller = new AbortController();
    this.inflightLayout = controller;
    try {
      const response = await this.fetchFn(this.layoutUrl(caseId, params, expanded), {
        signal: controller.signal,
      });
      return (await this.decode(response)) as LayoutDoc;
    } finally {
      if (this.inflightLayout === controller) this.inflightLayout = null;
    }
  }

  async fetchAccount(caseId: string, accountId: string): Promise<AccountDetail> {
    const url = `${this.base}/cases/${encodeURIComponent(caseId)}/accounts/${encodeURIComponent(accountId)}`;
    return (await this.decode(await this.fetchFn(url))) as AccountDetail;
  }

  async listCases(): Promise<CaseSummary[]> {
    const body = (await this.decode(await this.fetchFn(`${this.base}/cases`))) as {
      cases: CaseSummary[];
    };
    return body.cases;
  }

  private async decode(response: Response): Promise<unknown> {
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: { code?: string; message?: string } };
        code = body.error?.code ?? code;
        message = body.error?.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return response.json();
  }
}
