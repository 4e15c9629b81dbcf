// Typed client over the documented HTTP/JSON endpoints. Every label
// mutation in the UI flows through postAnnotation or postAdjudication;
// nothing else writes.

import type {
  AdjudicationAck,
  AgreementResponse,
  AnnotationAck,
  ApiErrorBody,
  BatchView,
  CoderStatus,
  PostView,
  QueueEntry,
  SchemaResponse,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let body: ApiErrorBody;
      try {
        body = (await resp.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${resp.status}` };
      }
      throw new ApiError(resp.status, body);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getSchema(): Promise<SchemaResponse> {
    return this.request("/schema");
  }

  nextBatch(coder: string): Promise<BatchView> {
    return this.request(`/batches/next?coder=${encodeURIComponent(coder)}`);
  }

  getPost(postId: string): Promise<PostView> {
    return this.request(`/posts/${encodeURIComponent(postId)}`);
  }

  coderStatus(coderId: string): Promise<CoderStatus> {
    return this.request(`/coders/${encodeURIComponent(coderId)}/status`);
  }

  postAnnotation(coder: string, sentence: string, labels: string[]): Promise<AnnotationAck> {
    return this.post("/annotations", { coder, sentence, labels });
  }

  adjudicationQueue(): Promise<QueueEntry[]> {
    return this.request("/adjudication/queue");
  }

  postAdjudication(
    sentence: string,
    labels: string[],
    adjudicator: string,
  ): Promise<AdjudicationAck> {
    return this.post("/adjudication", { sentence, labels, adjudicator });
  }

  agreement(batch: string): Promise<AgreementResponse> {
    return this.request(`/agreement?batch=${encodeURIComponent(batch)}`);
  }
}
