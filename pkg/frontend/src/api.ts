// Typed client over the annotation HTTP API. The fetch implementation is
// injectable so tests (and the node integration harness) can supply their own.

import type {
  ConfidenceLevel,
  GeneralClass,
  MutationResponse,
  PatchResponse,
  ReviewResponse,
  SamplesResponse,
  SampleStatus,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const code = body && typeof body.error === "string" ? body.error : "http-error";
      const message =
        body && typeof body.message === "string" ? body.message : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, code, message);
    }
    return body as T;
  }

  listSamples(status?: SampleStatus): Promise<SamplesResponse> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request<SamplesResponse>(`/api/samples${query}`);
  }

  getPatch(sampleId: number): Promise<PatchResponse> {
    return this.request<PatchResponse>(`/api/samples/${sampleId}/patch`);
  }

  getReview(): Promise<ReviewResponse> {
    return this.request<ReviewResponse>("/api/review");
  }

  postAnnotation(record: {
    sample_id: number;
    expert_id: string;
    label: GeneralClass;
    confidence: ConfidenceLevel;
  }): Promise<MutationResponse> {
    return this.request<MutationResponse>("/api/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  postConsensus(record: {
    sample_id: number;
    label: GeneralClass;
    confidence: ConfidenceLevel;
  }): Promise<MutationResponse> {
    return this.request<MutationResponse>("/api/consensus", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }
}
