// Thin fetch client for the audit service. Non-2xx responses carry a
// machine-readable {error, detail} body which is surfaced as ApiFailure.

import type {
  ApiError,
  DataSchema,
  DriftReport,
  FairnessReport,
  ScanReport,
  SlicePredicate,
  SliceResult,
  WhatIfResponse,
} from "./types.js";

export class ApiFailure extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiError) {
    super(body.detail || body.error);
    this.code = body.error;
    this.status = status;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    let body: ApiError = { error: `http_${response.status}`, detail: response.statusText };
    try {
      body = (await response.json()) as ApiError;
    } catch {
      // non-JSON error body; keep the status fallback
    }
    throw new ApiFailure(response.status, body);
  }
  return (await response.json()) as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  };
}

export const api = {
  report: () => request<ScanReport>("/api/report"),
  schema: () => request<DataSchema>("/api/schema"),
  fairness: () => request<FairnessReport | null>("/api/fairness"),
  drift: () => request<DriftReport | null>("/api/drift"),
  meta: () => request<Record<string, unknown>>("/api/meta"),
  whatif: (values: unknown[]) => request<WhatIfResponse>("/api/whatif", post({ values })),
  slice: (predicates: SlicePredicate[]) =>
    request<SliceResult>("/api/slice", post({ predicates })),
};
