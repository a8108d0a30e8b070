/** Thin fetch client for the prediction service. */

import type {
  FitSummary,
  LawParams,
  PredictResponse,
  ScheduleSpec,
  SweepResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public fieldErrors: { field: string; message: string }[] = [],
  ) {
    super(message);
  }
}

export interface PredictRequest {
  schedule_spec: ScheduleSpec;
  fit_id?: string;
  params?: LawParams;
  lambda?: number;
  downsample?: boolean;
  max_points?: number;
}

export type SweepKind = "cosine" | "wsd" | "anneal-fn" | "cpt";

export class ApiClient {
  constructor(private baseUrl = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { detail?: unknown }).detail;
      if (Array.isArray(detail)) {
        const fields = detail as { field: string; message: string }[];
        const summary = fields.map((d) => `${d.field}: ${d.message}`).join("; ");
        throw new ApiError(resp.status, summary || `HTTP ${resp.status}`, fields);
      }
      throw new ApiError(resp.status, String(detail ?? `HTTP ${resp.status}`));
    }
    return body as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  predict(req: PredictRequest): Promise<PredictResponse> {
    return this.post("/v1/predict", req);
  }

  sweep(kind: SweepKind, body: Record<string, unknown>): Promise<SweepResponse> {
    return this.post(`/v1/sweep/${kind}`, body);
  }

  async fits(): Promise<FitSummary[]> {
    const body = await this.request<{ fits: FitSummary[] }>("/v1/fits");
    return body.fits;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("/healthz");
  }
}
