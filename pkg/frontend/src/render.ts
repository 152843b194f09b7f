/**
 * Pure view functions: state in, HTML string out. Keeping these free of DOM
 * access makes the browser chrome directly assertable in node tests.
 */

import type { Conflict } from "./store.js";
import type { Metrics, TopicDetail, TopicView } from "./types.js";

export const PAGE_SIZE = 50;

export function escapeHtml(raw: string): string {
  return raw
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function pageCount(topicCount: number, pageSize = PAGE_SIZE): number {
  return Math.max(1, Math.ceil(topicCount / pageSize));
}

function keywordPreview(topic: TopicView, n = 4): string {
  return topic.keywords
    .slice(0, n)
    .map((k) => k.term.join(" "))
    .join(", ");
}

/**
 * One page of the topic list (already size-sorted by the store), plus a
 * separate outlier row. The outlier pseudo-topic never gets a merge
 * checkbox: it is not a topic and cannot take part in a merge.
 */
export function renderTopicList(
  topics: TopicView[],
  outliers: number,
  page: number,
  mergePicks: Set<number>,
  pageSize = PAGE_SIZE,
): string {
  if (topics.length === 0) {
    return `<p class="empty-state">No topics in this model yet.</p>`;
  }
  const pages = pageCount(topics.length, pageSize);
  const current = Math.min(Math.max(page, 0), pages - 1);
  const start = current * pageSize;
  const rows = topics
    .slice(start, start + pageSize)
    .map((t) => {
      const checked = mergePicks.has(t.topic_id) ? " checked" : "";
      const starred = t.selected ? `<span class="selected-flag" title="in final selection">★</span>` : "";
      return (
        `<li class="topic-row" data-topic-id="${t.topic_id}">` +
        `<input type="checkbox" class="merge-pick" data-topic-id="${t.topic_id}"${checked}>` +
        `<button class="topic-open" data-topic-id="${t.topic_id}">` +
        `${escapeHtml(t.label)}</button>` +
        `<span class="topic-size">${t.size}</span>${starred}` +
        `<span class="topic-keywords">${escapeHtml(keywordPreview(t))}</span>` +
        `</li>`
      );
    })
    .join("");
  const outlierRow =
    outliers > 0
      ? `<li class="outlier-row" data-topic-id="-1">` +
        `<button class="topic-open" data-topic-id="-1">outliers</button>` +
        `<span class="topic-size">${outliers}</span>` +
        `<span class="topic-keywords">unclustered sentences; cannot be merged</span></li>`
      : "";
  const pager =
    pages > 1
      ? `<nav class="pager">page ${current + 1} of ${pages}` +
        `<button class="page-prev"${current === 0 ? " disabled" : ""}>prev</button>` +
        `<button class="page-next"${current === pages - 1 ? " disabled" : ""}>next</button></nav>`
      : "";
  return `<ul class="topic-list">${rows}</ul>${outlierRow ? `<ul class="outlier-list">${outlierRow}</ul>` : ""}${pager}`;
}

export function renderDetail(detail: TopicDetail): string {
  const keywords = detail.keywords
    .map(
      (k) =>
        `<li><span class="term">${escapeHtml(k.term.join(" "))}</span>` +
        `<span class="weight">${k.weight.toFixed(3)}</span></li>`,
    )
    .join("");
  const sentences = detail.representative_sentences
    .map((s) => `<li data-sent-id="${s.sent_id}">${escapeHtml(s.text)}</li>`)
    .join("");
  return (
    `<h2>${escapeHtml(detail.label)} <span class="topic-size">(${detail.size} sentences)</span></h2>` +
    `<form class="rename-form" data-topic-id="${detail.topic_id}">` +
    `<input name="label" value="${escapeHtml(detail.label)}" aria-label="topic label">` +
    `<button type="submit">rename</button></form>` +
    `<h3>Keywords</h3><ol class="keyword-list">${keywords}</ol>` +
    `<h3>Representative sentences</h3><ul class="rep-sentences">${sentences}</ul>`
  );
}

function metricCell(value: number | null, digits = 3): string {
  return value === null ? "n/a" : value.toFixed(digits);
}

/** Live metric panel; undefined metrics (served as null) render as "n/a". */
export function renderMetrics(metrics: Metrics | null): string {
  if (metrics === null) return `<p class="empty-state">metrics not loaded</p>`;
  const rows: [string, string][] = [
    ["topics", String(metrics.topics)],
    ["outliers", String(metrics.outliers)],
    ["ngram_score", metricCell(metrics.ngram_score)],
    ["gini", metricCell(metrics.gini)],
    ["coherence_cv", metricCell(metrics.coherence_cv)],
    ["silhouette", metricCell(metrics.silhouette)],
    ["time_minutes", metricCell(metrics.time_minutes)],
  ];
  const cells = rows
    .map(([name, value]) => `<tr><th>${name}</th><td class="metric-${name}">${value}</td></tr>`)
    .join("");
  return `<table class="metric-panel">${cells}</table>`;
}

/**
 * The 409 banner. It names the service's current revision and prompts the
 * researcher to retry by hand — the UI never reissues the request itself.
 */
export function renderConflict(conflict: Conflict | null): string {
  if (conflict === null) return "";
  return (
    `<div class="conflict-banner" role="alert">` +
    `<strong>Conflict (409):</strong> ${escapeHtml(conflict.message)} — ` +
    `another session changed this model (now at revision ${conflict.serverRevision}). ` +
    `The view has been refreshed; apply your change again if it still makes sense. ` +
    `<button class="conflict-dismiss">dismiss</button></div>`
  );
}

export function renderNotice(notice: string | null): string {
  if (notice === null) return "";
  return (
    `<div class="notice-banner" role="status">${escapeHtml(notice)} ` +
    `<button class="notice-dismiss">dismiss</button></div>`
  );
}

export function renderSelectionBar(selectedIds: number[], pending: boolean): string {
  const count = selectedIds.length;
  return (
    `<div class="selection-bar">` +
    `<span class="selection-count">${count} selected for the final set</span>` +
    `<button class="selection-save"${pending ? " disabled" : ""}>save selection</button>` +
    `<button class="export-run">export final report</button></div>`
  );
}
