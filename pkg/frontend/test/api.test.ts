import { describe, expect, it } from "vitest";

import { ApiError, ChartTableClient } from "../src/api.js";
import type { TableRequest } from "../src/types.js";

const request: TableRequest = {
  ensemble_id: "e1",
  case_kind: "train",
  metric_ids: ["reactionary_caused"],
  scale_overrides: {},
  max_rows: 100,
  max_runs: 100,
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("service client", () => {
  it("a newer table request aborts the one in flight", async () => {
    let calls = 0;
    const fetchImpl: typeof fetch = (_url, init) => {
      const call = ++calls;
      return new Promise((resolve, reject) => {
        init!.signal!.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")));
        if (call === 2) resolve(jsonResponse({ case_order: [], cells: {} }));
        // the first call never resolves on its own
      });
    };
    const client = new ChartTableClient("http://svc", fetchImpl);
    const first = client.fetchTable(request);
    const second = client.fetchTable({ ...request, max_rows: 50 });
    await expect(first).rejects.toThrow(/abort/i);
    await expect(second).resolves.toMatchObject({ case_order: [] });
    expect(calls).toBe(2);
  });

  it("wraps service error bodies", async () => {
    const fetchImpl: typeof fetch = async () =>
      jsonResponse({ detail: "unknown ensemble e1" }, 404);
    const client = new ChartTableClient("http://svc", fetchImpl);
    await expect(client.fetchTable(request)).rejects.toThrow(ApiError);
    await expect(
      client.fetchAffecting("e1", "2B02", "suffers_delay_from"),
    ).rejects.toThrow(/unknown ensemble/);
  });

  it("fetches histograms with the requested bin width", async () => {
    let seenUrl = "";
    const fetchImpl: typeof fetch = async (url) => {
      seenUrl = String(url);
      return jsonResponse({ bin_minutes: 15, bins: [] });
    };
    const client = new ChartTableClient("http://svc", fetchImpl);
    const payload = await client.fetchHistogram("e1", 15);
    expect(seenUrl).toBe("http://svc/ensembles/e1/histogram?bin_minutes=15");
    expect(payload.bin_minutes).toBe(15);
  });
});
