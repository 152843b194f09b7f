/**
 * Client-side session state. The store holds no authoritative data: it is a
 * cache of the service's last-known state, refreshed from the wire after
 * every accepted mutation and after every conflict. Reloading the page (i.e.
 * constructing a fresh store and calling load()) reproduces the service's
 * session state exactly.
 *
 * Concurrency rules:
 *  - at most one mutation is in flight at a time (reads may overlap);
 *  - every mutation carries the last-seen revision;
 *  - a 409 is never retried automatically: the store refetches, raises the
 *    conflict banner, and waits for the researcher to act again.
 */

import { ApiClient, ApiError } from "./api.js";
import type { ExportReport, Metrics, TopicView } from "./types.js";

/** Raised when a mutation is attempted while another is still in flight. */
export class MutationPendingError extends Error {
  constructor() {
    super("another mutation is still in flight");
    this.name = "MutationPendingError";
  }
}

export interface Conflict {
  message: string;
  /** Revision the service reported; the refreshed state carries it. */
  serverRevision: number;
}

export type Listener = () => void;

export class RefineStore {
  private readonly api: ApiClient;
  private readonly listeners: Listener[] = [];

  /** Last-seen revision; sent with every mutation. */
  revision = 0;
  /** Topics as the service reported them, sorted by size (largest first). */
  topics: TopicView[] = [];
  /** Number of outlier sentences (the separate, never-mergeable pseudo-topic). */
  outliers = 0;
  metrics: Metrics | null = null;
  /** Set while a mutation is in flight; the UI disables mutating controls. */
  pending = false;
  /** Visible conflict banner state; null when no conflict is showing. */
  conflict: Conflict | null = null;
  /** Non-conflict error notice (unknown topic, bad request, network). */
  notice: string | null = null;

  constructor(api: ApiClient) {
    this.api = api;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      const i = this.listeners.indexOf(listener);
      if (i >= 0) this.listeners.splice(i, 1);
    };
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  /** ids currently flagged as part of the final selection, ascending. */
  get selectedIds(): number[] {
    return this.topics
      .filter((t) => t.selected)
      .map((t) => t.topic_id)
      .sort((a, b) => a - b);
  }

  /**
   * Merging needs at least two real topics; the outlier pseudo-topic (-1)
   * is never mergeable. Drives the merge button's disabled state.
   */
  canMerge(ids: number[]): boolean {
    return ids.length >= 2 && !ids.includes(-1) && !this.pending;
  }

  /** Fetch topics and metrics from the service. Reads may overlap freely. */
  async load(): Promise<void> {
    const [topics, metrics] = await Promise.all([this.api.getTopics(), this.api.getMetrics()]);
    this.topics = [...topics.topics].sort((a, b) => b.size - a.size);
    this.outliers = topics.outliers;
    this.revision = topics.revision;
    this.metrics = metrics.metrics;
    this.emit();
  }

  async merge(ids: number[]): Promise<void> {
    await this.mutate(() => this.api.merge(ids, this.revision));
  }

  async rename(topicId: number, label: string): Promise<void> {
    await this.mutate(() => this.api.rename(topicId, label, this.revision));
  }

  async select(ids: number[]): Promise<void> {
    await this.mutate(() => this.api.select(ids, this.revision));
  }

  /** Fetch the final report for the current selection (a read, not a mutation). */
  exportReport(): Promise<ExportReport> {
    return this.api.getExport();
  }

  dismissConflict(): void {
    this.conflict = null;
    this.emit();
  }

  dismissNotice(): void {
    this.notice = null;
    this.emit();
  }

  /**
   * Run one mutation under the single-flight gate. On success the state is
   * refetched so the metric panel reflects the accepted change. On 409 the
   * state is refetched and the conflict banner raised; the request is not
   * reissued — retrying is the researcher's call.
   */
  private async mutate(send: () => Promise<unknown>): Promise<void> {
    if (this.pending) throw new MutationPendingError();
    this.pending = true;
    this.emit();
    try {
      await send();
      this.conflict = null;
      this.notice = null;
      await this.load();
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.conflict = {
          message: err.body.error,
          serverRevision: err.body.revision,
        };
        await this.load();
      } else if (err instanceof ApiError) {
        this.notice = err.body.error;
        await this.load();
      } else {
        this.notice = err instanceof Error ? err.message : String(err);
        this.emit();
      }
    } finally {
      this.pending = false;
      this.emit();
    }
  }
}
