/**
 * Typed client over the refinement service's JSON API. Every mutation carries
 * the caller's last-seen revision; the service answers 409 when it is stale.
 * The client reports errors faithfully and never retries anything itself.
 */

import type {
  ApiErrorBody,
  ExportReport,
  MergeResponse,
  MetricsResponse,
  RenameResponse,
  SelectionResponse,
  SessionInfo,
  TopicResponse,
  TopicSentencesResponse,
  TopicsResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(`${status}: ${body.error}`);
    this.name = "ApiError";
    this.status = status;
    this.body = body;
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

const JSON_HEADERS = { "Content-Type": "application/json" };

export class ApiClient {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
    this.base = base.replace(/\/$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let body: ApiErrorBody;
      try {
        body = (await resp.json()) as ApiErrorBody;
      } catch {
        body = { error: resp.statusText || "request failed", revision: -1 };
      }
      throw new ApiError(resp.status, body);
    }
    return (await resp.json()) as T;
  }

  getSession(): Promise<SessionInfo> {
    return this.request<SessionInfo>("/api/session");
  }

  getTopics(): Promise<TopicsResponse> {
    return this.request<TopicsResponse>("/api/topics");
  }

  getTopic(topicId: number): Promise<TopicResponse> {
    return this.request<TopicResponse>(`/api/topics/${topicId}`);
  }

  getTopicSentences(topicId: number, limit?: number): Promise<TopicSentencesResponse> {
    const query = limit === undefined ? "" : `?limit=${limit}`;
    return this.request<TopicSentencesResponse>(`/api/topics/${topicId}/sentences${query}`);
  }

  getMetrics(): Promise<MetricsResponse> {
    return this.request<MetricsResponse>("/api/metrics");
  }

  getExport(): Promise<ExportReport> {
    return this.request<ExportReport>("/api/export");
  }

  merge(ids: number[], revision: number): Promise<MergeResponse> {
    return this.request<MergeResponse>("/api/topics/merge", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ ids, revision }),
    });
  }

  rename(topicId: number, label: string, revision: number): Promise<RenameResponse> {
    return this.request<RenameResponse>(`/api/topics/${topicId}`, {
      method: "PATCH",
      headers: JSON_HEADERS,
      body: JSON.stringify({ label, revision }),
    });
  }

  select(ids: number[], revision: number): Promise<SelectionResponse> {
    return this.request<SelectionResponse>("/api/selection", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ ids, revision }),
    });
  }
}
