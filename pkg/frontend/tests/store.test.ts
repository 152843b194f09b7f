/**
 * Store behavior against a mocked service: the refinement workflow (merge,
 * rename, select, export) and the concurrency contract (revisions, 409
 * conflicts, single-flight mutations, no automatic retry).
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { MutationPendingError, RefineStore } from "../src/store.js";
import { makeModel, MockService } from "./mock_service.js";

function storeOver(service: MockService): RefineStore {
  return new RefineStore(new ApiClient(service.fetch));
}

describe("refinement workflow", () => {
  it("merging two topics shrinks the list and decrements the metric panel's topic count", async () => {
    const service = makeModel(22);
    const store = storeOver(service);
    await store.load();
    expect(store.topics).toHaveLength(22);
    expect(store.metrics?.topics).toBe(22);

    await store.merge([20, 21]);

    expect(store.topics).toHaveLength(21);
    expect(store.metrics?.topics).toBe(21);
    expect(store.conflict).toBeNull();
    // fresh id, never one of the merged ids
    const ids = store.topics.map((t) => t.topic_id);
    expect(ids).toContain(22);
    expect(ids).not.toContain(20);
    expect(ids).not.toContain(21);
    // merged size is the sum of the parts
    const merged = store.topics.find((t) => t.topic_id === 22)!;
    expect(merged.size).toBe(10 + 2 * 5 + (10 + 1 * 5));
  });

  it("keeps the topic list sorted by size after every refresh", async () => {
    const service = makeModel(21);
    const store = storeOver(service);
    await store.load();
    await store.merge([19, 20]);
    const sizes = store.topics.map((t) => t.size);
    expect(sizes).toEqual([...sizes].sort((a, b) => b - a));
  });

  it("a rename persists across a page reload", async () => {
    const service = makeModel(20);
    const first = storeOver(service);
    await first.load();
    await first.rename(3, "winter wage disputes");
    expect(first.topics.find((t) => t.topic_id === 3)?.label).toBe("winter wage disputes");

    // a reload is a brand-new store over the same service
    const reloaded = storeOver(service);
    await reloaded.load();
    expect(reloaded.topics.find((t) => t.topic_id === 3)?.label).toBe("winter wage disputes");
    expect(reloaded.revision).toBe(service.revision);
  });

  it("selecting 15 topics exports a 15-topic report identical to the service's export", async () => {
    const service = makeModel(24);
    const store = storeOver(service);
    await store.load();

    const chosen = store.topics.slice(0, 15).map((t) => t.topic_id);
    await store.select(chosen);
    expect(store.selectedIds).toEqual([...chosen].sort((a, b) => a - b));

    const report = await store.exportReport();
    expect(report.topics).toHaveLength(15);
    expect(report.warning).toBeUndefined();
    expect(report.revision).toBe(store.revision);
    // parity with the service's own export output, field for field
    expect(report).toEqual(service.exportBody());
    // every exported topic carries its representative sentences
    for (const t of report.topics) {
      expect(t.representative_sentences.length).toBeGreaterThan(0);
      expect(t.selected).toBe(true);
    }
  });

  it("empty selection exports a warning report", async () => {
    const service = makeModel(5);
    const store = storeOver(service);
    await store.load();
    const report = await store.exportReport();
    expect(report.topics).toHaveLength(0);
    expect(report.warning).toBe("no topics selected");
  });

  it("merge button logic: fewer than two topics or the outlier row is never mergeable", async () => {
    const service = makeModel(5);
    const store = storeOver(service);
    await store.load();
    expect(store.canMerge([])).toBe(false);
    expect(store.canMerge([2])).toBe(false);
    expect(store.canMerge([2, 3])).toBe(true);
    expect(store.canMerge([-1, 2])).toBe(false);
    expect(store.canMerge([-1, 2, 3])).toBe(false);
  });

  it("an unknown topic id surfaces as a notice and the state refreshes, not crashes", async () => {
    const service = makeModel(4);
    const store = storeOver(service);
    await store.load();
    await store.rename(99, "ghost");
    expect(store.notice).toBe("unknown topic");
    expect(store.conflict).toBeNull();
    expect(store.topics).toHaveLength(4);
    expect(store.revision).toBe(service.revision);
  });
});

describe("conflict handling", () => {
  it("a stale mutation raises the 409 banner, refreshes state, and never retries", async () => {
    const service = makeModel(20);
    const sessionA = storeOver(service);
    const sessionB = storeOver(service);
    await sessionA.load();
    await sessionB.load();

    // session A moves the model forward; B is now stale
    await sessionA.merge([18, 19]);
    expect(service.revision).toBe(1);

    service.calls.length = 0;
    await sessionB.rename(5, "late to the party");

    // visible conflict banner with the service's current revision
    expect(sessionB.conflict).not.toBeNull();
    expect(sessionB.conflict?.message).toBe("stale revision");
    expect(sessionB.conflict?.serverRevision).toBe(1);

    // exactly one rename attempt went over the wire — no automatic retry
    const renames = service.calls.filter((c) => c.method === "PATCH");
    expect(renames).toHaveLength(1);

    // no state corruption: B refetched and mirrors the service exactly
    expect(sessionB.revision).toBe(service.revision);
    expect(sessionB.topics.find((t) => t.topic_id === 5)?.label).toBe("topic_5");
    const sorted = [...service.topics].sort((a, b) => b.size - a.size);
    expect(sessionB.topics).toEqual(sorted);

    // the rename was not applied anywhere
    expect(service.auditLog.filter((e) => e.action === "rename")).toHaveLength(0);

    // with the refreshed revision the researcher's manual retry succeeds
    await sessionB.rename(5, "late to the party");
    expect(sessionB.conflict).toBeNull();
    expect(sessionB.topics.find((t) => t.topic_id === 5)?.label).toBe("late to the party");
  });

  it("the audit log stays replayable across sessions and a conflict", async () => {
    const service = makeModel(21);
    const sessionA = storeOver(service);
    const sessionB = storeOver(service);
    await sessionA.load();
    await sessionB.load();

    await sessionA.merge([19, 20]);
    await sessionB.select([0, 1]); // stale → 409, refreshed
    expect(sessionB.conflict).not.toBeNull();
    await sessionB.select([0, 1]); // manual retry at the fresh revision
    await sessionA.load();
    await sessionA.rename(21, "combined minor themes");

    expect(service.auditLog.map((e) => e.action)).toEqual(["merge", "select", "rename"]);
    // replaying the log from the pristine base reproduces the live state
    expect(service.replayFromBase()).toEqual(service.topics);
  });

  it("dismissing the banner clears it without touching topics", async () => {
    const service = makeModel(6);
    const sessionA = storeOver(service);
    const sessionB = storeOver(service);
    await sessionA.load();
    await sessionB.load();
    await sessionA.merge([4, 5]);
    await sessionB.merge([0, 1]); // stale
    expect(sessionB.conflict).not.toBeNull();
    const topicsBefore = sessionB.topics;
    sessionB.dismissConflict();
    expect(sessionB.conflict).toBeNull();
    expect(sessionB.topics).toEqual(topicsBefore);
  });
});

describe("concurrency gate", () => {
  it("rejects a second mutation while one is in flight, then recovers", async () => {
    const service = makeModel(8);
    let release!: () => void;
    service.gate = new Promise((resolve) => {
      release = resolve;
    });
    const store = storeOver(service);
    await store.load();

    const inFlight = store.merge([6, 7]);
    expect(store.pending).toBe(true);
    await expect(store.rename(0, "blocked")).rejects.toThrow(MutationPendingError);

    service.gate = null;
    release();
    await inFlight;
    expect(store.pending).toBe(false);
    expect(store.topics).toHaveLength(7);

    // the gate reopens after completion
    await store.rename(0, "now fine");
    expect(store.topics.find((t) => t.topic_id === 0)?.label).toBe("now fine");
  });

  it("reads may overlap a pending mutation", async () => {
    const service = makeModel(8);
    let release!: () => void;
    service.gate = new Promise((resolve) => {
      release = resolve;
    });
    const store = storeOver(service);
    await store.load();

    const inFlight = store.merge([6, 7]);
    // a read during the mutation is fine and reflects pre-merge state
    const overlappingRead = await store.exportReport();
    expect(overlappingRead.revision).toBe(0);

    service.gate = null;
    release();
    await inFlight;
    expect(store.revision).toBe(1);
  });
});
