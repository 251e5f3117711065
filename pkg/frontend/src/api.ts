/**
 * Service client. At most one table request is in flight: a newer view
 * state aborts the superseded fetch before issuing its own.
 */

import type {
  AffectingPayload,
  HistogramPayload,
  TablePayload,
  TableRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

async function readJson<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, String(body?.detail ?? response.statusText));
  }
  return body as T;
}

export class ChartTableClient {
  private inflightTable: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  /** Aborts any previous table fetch; only the newest view state resolves. */
  async fetchTable(request: TableRequest): Promise<TablePayload> {
    this.inflightTable?.abort();
    const controller = new AbortController();
    this.inflightTable = controller;
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/tables`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
      return await readJson<TablePayload>(response);
    } finally {
      if (this.inflightTable === controller) this.inflightTable = null;
    }
  }

  async fetchAffecting(
    ensembleId: string,
    caseId: string,
    direction: AffectingPayload["direction"],
  ): Promise<AffectingPayload> {
    const url =
      `${this.baseUrl}/ensembles/${encodeURIComponent(ensembleId)}` +
      `/cases/${encodeURIComponent(caseId)}/affecting?direction=${direction}`;
    return readJson<AffectingPayload>(await this.fetchImpl(url));
  }

  async fetchHistogram(ensembleId: string, binMinutes = 30): Promise<HistogramPayload> {
    const url =
      `${this.baseUrl}/ensembles/${encodeURIComponent(ensembleId)}` +
      `/histogram?bin_minutes=${binMinutes}`;
    return readJson<HistogramPayload>(await this.fetchImpl(url));
  }
}
