/**
 * In-memory stand-in for the refinement service, faithful to its observable
 * semantics: optimistic-concurrency revisions (409 on stale), fresh topic ids
 * that are never reused, an append-only audit log, replace-semantics
 * selection, and an export of the selected topics only. Exposes a FetchLike
 * so the real ApiClient runs against it unchanged.
 */

import type { FetchLike } from "../src/api.js";
import type {
  ExportReport,
  Keyword,
  Metrics,
  TopicDetail,
  TopicView,
} from "../src/types.js";

export interface AuditEntry {
  action: "merge" | "rename" | "select";
  ids?: number[];
  new_id?: number;
  id?: number;
  label?: string;
}

export interface CallRecord {
  method: string;
  path: string;
}

const clone = <T>(value: T): T => JSON.parse(JSON.stringify(value)) as T;

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class MockService {
  topics: TopicView[];
  revision = 0;
  outliers: number;
  auditLog: AuditEntry[] = [];
  calls: CallRecord[] = [];
  /** When set, mutations wait on it before being applied (for in-flight tests). */
  gate: Promise<void> | null = null;

  readonly sessionId = "mock0001";
  private readonly texts: Map<number, string>;
  private readonly baseTopics: TopicView[];

  constructor(topics: TopicView[], texts: Map<number, string>, outliers = 0) {
    this.topics = clone(topics);
    this.baseTopics = clone(topics);
    this.texts = texts;
    this.outliers = outliers;
  }

  /** Same rule as the service: smallest id never used, merged-away ids stay retired. */
  private nextTopicId(): number {
    const used = new Set(this.topics.map((t) => t.topic_id));
    for (const entry of this.auditLog) {
      if (entry.action === "merge") {
        for (const i of entry.ids ?? []) used.add(i);
        if (entry.new_id !== undefined) used.add(entry.new_id);
      }
    }
    return used.size === 0 ? 0 : Math.max(...used) + 1;
  }

  metrics(): Metrics {
    return {
      outliers: this.outliers,
      topics: this.topics.length,
      ngram_score: 0.2,
      gini: 0.0,
      coherence_cv: null,
      silhouette: 0.91,
      time_minutes: 0.001,
    };
  }

  private detail(topic: TopicView): TopicDetail {
    return {
      ...clone(topic),
      representative_sentences: topic.representatives.map((sid) => ({
        sent_id: sid,
        text: this.texts.get(sid) ?? `sentence ${sid}`,
      })),
    };
  }

  exportBody(): ExportReport {
    const selected = this.topics
      .filter((t) => t.selected)
      .sort((a, b) => b.size - a.size)
      .map((t) => this.detail(t));
    const report: ExportReport = {
      session_id: this.sessionId,
      revision: this.revision,
      topics: selected,
      metrics: this.metrics(),
    };
    if (selected.length === 0) report.warning = "no topics selected";
    return report;
  }

  private applyMerge(ids: number[]): { status: number; body: unknown } {
    if (ids.includes(-1))
      return { status: 400, body: { error: "cannot merge the outlier class", revision: this.revision } };
    const distinct = [...new Set(ids)];
    if (distinct.length < 2)
      return { status: 400, body: { error: "merge needs at least 2 distinct topic ids", revision: this.revision } };
    const byId = new Map(this.topics.map((t) => [t.topic_id, t]));
    for (const i of distinct)
      if (!byId.has(i)) return { status: 404, body: { error: "unknown topic", revision: this.revision } };

    const newId = this.nextTopicId();
    const parts = distinct.map((i) => byId.get(i)!);
    const keywords: Keyword[] = clone(parts.flatMap((p) => p.keywords))
      .sort((a, b) => b.weight - a.weight)
      .slice(0, 10);
    const merged: TopicView = {
      topic_id: newId,
      label: `topic_${newId}`,
      size: parts.reduce((acc, p) => acc + p.size, 0),
      keywords,
      representatives: parts.flatMap((p) => p.representatives).slice(0, 3),
      selected: false,
    };
    this.topics = [...this.topics.filter((t) => !distinct.includes(t.topic_id)), merged];
    this.auditLog.push({ action: "merge", ids: [...distinct].sort((a, b) => a - b), new_id: newId });
    this.revision += 1;
    return { status: 200, body: { revision: this.revision, topic: clone(merged) } };
  }

  private applyRename(id: number, label: string): { status: number; body: unknown } {
    const topic = this.topics.find((t) => t.topic_id === id);
    if (!topic) return { status: 404, body: { error: "unknown topic", revision: this.revision } };
    if (!label.trim())
      return { status: 400, body: { error: "label must not be empty", revision: this.revision } };
    topic.label = label;
    this.auditLog.push({ action: "rename", id, label });
    this.revision += 1;
    return { status: 200, body: { revision: this.revision, topic: clone(topic) } };
  }

  private applySelect(ids: number[]): { status: number; body: unknown } {
    const existing = new Set(this.topics.map((t) => t.topic_id));
    for (const i of ids)
      if (!existing.has(i)) return { status: 404, body: { error: "unknown topic", revision: this.revision } };
    const chosen = new Set(ids);
    for (const t of this.topics) t.selected = chosen.has(t.topic_id);
    this.auditLog.push({ action: "select", ids: [...chosen].sort((a, b) => a - b) });
    this.revision += 1;
    return {
      status: 200,
      body: { revision: this.revision, selected_ids: [...chosen].sort((a, b) => a - b) },
    };
  }

  /**
   * Replay the audit log against the pristine base state and return the
   * resulting topics. Fresh merge ids are recomputed by the same rule and
   * must agree with the recorded ones — that is what "replayable" means.
   */
  replayFromBase(): TopicView[] {
    const fresh = new MockService(this.baseTopics, this.texts, this.outliers);
    for (const entry of this.auditLog) {
      let result: { status: number; body: unknown };
      if (entry.action === "merge") {
        result = fresh.applyMerge(entry.ids ?? []);
        const merged = (result.body as { topic?: TopicView }).topic;
        if (merged && merged.topic_id !== entry.new_id)
          throw new Error(`replay diverged: new id ${merged.topic_id} != logged ${entry.new_id}`);
      } else if (entry.action === "rename") {
        result = fresh.applyRename(entry.id ?? -1, entry.label ?? "");
      } else {
        result = fresh.applySelect(entry.ids ?? []);
      }
      if (result.status !== 200) throw new Error(`replay step failed: ${JSON.stringify(entry)}`);
    }
    return fresh.topics;
  }

  readonly fetch: FetchLike = async (input, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    this.calls.push({ method, path });
    const payload = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (method !== "GET" && this.gate) await this.gate;

    const stale = (revision: unknown): Response | null =>
      revision !== this.revision
        ? json(409, { error: "stale revision", revision: this.revision })
        : null;

    if (method === "GET" && path === "/api/session") {
      return json(200, {
        revision: this.revision,
        session_id: this.sessionId,
        created: "2026-08-16T00:00:00+00:00",
        updated: "2026-08-16T00:00:00+00:00",
        topic_count: this.topics.length,
        outlier_count: this.outliers,
        sentence_count: this.texts.size,
        selected_ids: this.topics.filter((t) => t.selected).map((t) => t.topic_id).sort((a, b) => a - b),
      });
    }
    if (method === "GET" && path === "/api/topics") {
      return json(200, { revision: this.revision, outliers: this.outliers, topics: clone(this.topics) });
    }
    const detailMatch = path.match(/^\/api\/topics\/(-?\d+)$/);
    if (method === "GET" && detailMatch) {
      const id = Number(detailMatch[1]);
      const topic = this.topics.find((t) => t.topic_id === id);
      if (!topic) return json(404, { error: "unknown topic", revision: this.revision });
      return json(200, { revision: this.revision, topic: this.detail(topic) });
    }
    if (method === "GET" && path === "/api/metrics") {
      return json(200, { revision: this.revision, metrics: this.metrics() });
    }
    if (method === "GET" && path === "/api/export") {
      return json(200, this.exportBody());
    }
    if (method === "POST" && path === "/api/topics/merge") {
      const conflict = stale(payload.revision);
      if (conflict) return conflict;
      const { status, body } = this.applyMerge(payload.ids as number[]);
      return json(status, body);
    }
    if (method === "PATCH" && detailMatch) {
      const conflict = stale(payload.revision);
      if (conflict) return conflict;
      const { status, body } = this.applyRename(Number(detailMatch[1]), payload.label as string);
      return json(status, body);
    }
    if (method === "POST" && path === "/api/selection") {
      const conflict = stale(payload.revision);
      if (conflict) return conflict;
      const { status, body } = this.applySelect(payload.ids as number[]);
      return json(status, body);
    }
    return json(404, { error: `no route for ${method} ${path}`, revision: this.revision });
  };
}

/** A model with `n` topics of strictly decreasing size plus sentence texts. */
export function makeModel(n: number, outliers = 8): MockService {
  const texts = new Map<number, string>();
  const topics: TopicView[] = [];
  for (let i = 0; i < n; i += 1) {
    const reps = [i * 3, i * 3 + 1, i * 3 + 2];
    for (const sid of reps) texts.set(sid, `sentence ${sid} about subject ${i}`);
    topics.push({
      topic_id: i,
      label: `topic_${i}`,
      size: 10 + (n - i) * 5,
      keywords: [
        { term: [`word${i}`], weight: 3.5 - i * 0.01 },
        { term: [`word${i}`, "pair"], weight: 2.1 - i * 0.01 },
      ],
      representatives: reps,
      selected: false,
    });
  }
  return new MockService(topics, texts, outliers);
}
