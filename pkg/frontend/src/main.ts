/**
 * Browser entry point: wires the store to the page. All state lives on the
 * service; this file only routes clicks to store calls and repaints.
 */

import { ApiClient } from "./api.js";
import {
  renderConflict,
  renderDetail,
  renderMetrics,
  renderNotice,
  renderSelectionBar,
  renderTopicList,
} from "./render.js";
import { MutationPendingError, RefineStore } from "./store.js";

const api = new ApiClient();
const store = new RefineStore(api);

let page = 0;
const mergePicks = new Set<number>();
const finalPicks = new Set<number>();
let detailHtml = `<p class="empty-state">Pick a topic to inspect it.</p>`;

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
};

function repaint(): void {
  $("banner").innerHTML = renderConflict(store.conflict) + renderNotice(store.notice);
  $("topics").innerHTML = renderTopicList(store.topics, store.outliers, page, mergePicks);
  $("detail").innerHTML = detailHtml;
  $("metrics").innerHTML = renderMetrics(store.metrics);
  $("selection").innerHTML = renderSelectionBar([...finalPicks].sort((a, b) => a - b), store.pending);
  const mergeButton = $("merge-button") as HTMLButtonElement;
  mergeButton.disabled = !store.canMerge([...mergePicks]);
  mergeButton.textContent = `merge ${mergePicks.size} topics`;
}

function syncLocalPicks(): void {
  const ids = new Set(store.topics.map((t) => t.topic_id));
  for (const id of [...mergePicks]) if (!ids.has(id)) mergePicks.delete(id);
  for (const id of [...finalPicks]) if (!ids.has(id)) finalPicks.delete(id);
  for (const t of store.topics) if (t.selected) finalPicks.add(t.topic_id);
}

async function openTopic(topicId: number): Promise<void> {
  if (topicId === -1) {
    const rows = await api.getTopicSentences(-1, 50);
    const items = rows.sentences
      .map((s) => `<li>${s.text.replace(/&/g, "&amp;").replace(/</g, "&lt;")}</li>`)
      .join("");
    detailHtml = `<h2>Outliers (${rows.total})</h2><ul class="rep-sentences">${items}</ul>`;
  } else {
    const { topic } = await api.getTopic(topicId);
    detailHtml = renderDetail(topic);
  }
  repaint();
}

function guarded(action: () => Promise<void>): void {
  action().catch((err) => {
    if (err instanceof MutationPendingError) return; // buttons repaint as disabled
    store.notice = err instanceof Error ? err.message : String(err);
    repaint();
  });
}

function wireEvents(): void {
  document.body.addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    if (el.matches(".topic-open")) {
      void openTopic(Number(el.dataset.topicId));
    } else if (el.matches(".merge-pick")) {
      const id = Number(el.dataset.topicId);
      if ((el as HTMLInputElement).checked) mergePicks.add(id);
      else mergePicks.delete(id);
      repaint();
    } else if (el.matches("#merge-button")) {
      const ids = [...mergePicks];
      mergePicks.clear();
      guarded(() => store.merge(ids));
    } else if (el.matches(".selection-save")) {
      guarded(() => store.select([...finalPicks]));
    } else if (el.matches(".export-run")) {
      guarded(async () => {
        const report = await store.exportReport();
        const blob = new Blob([JSON.stringify(report, null, 2)], { type: "application/json" });
        const a = document.createElement("a");
        a.href = URL.createObjectURL(blob);
        a.download = `final_report_rev${report.revision}.json`;
        a.click();
        URL.revokeObjectURL(a.href);
      });
    } else if (el.matches(".conflict-dismiss")) {
      store.dismissConflict();
    } else if (el.matches(".notice-dismiss")) {
      store.dismissNotice();
    } else if (el.matches(".page-prev")) {
      page = Math.max(0, page - 1);
      repaint();
    } else if (el.matches(".page-next")) {
      page += 1;
      repaint();
    }
  });

  document.body.addEventListener("dblclick", (ev) => {
    const el = ev.target as HTMLElement;
    const row = el.closest<HTMLElement>(".topic-row");
    if (row) {
      const id = Number(row.dataset.topicId);
      if (finalPicks.has(id)) finalPicks.delete(id);
      else finalPicks.add(id);
      repaint();
    }
  });

  document.body.addEventListener("submit", (ev) => {
    const form = ev.target as HTMLFormElement;
    if (!form.matches(".rename-form")) return;
    ev.preventDefault();
    const id = Number(form.dataset.topicId);
    const label = (form.elements.namedItem("label") as HTMLInputElement).value.trim();
    if (label) guarded(() => store.rename(id, label).then(() => openTopic(id)));
  });
}

store.subscribe(() => {
  syncLocalPicks();
  repaint();
});

wireEvents();
void store.load().catch((err) => {
  store.notice = err instanceof Error ? err.message : String(err);
  repaint();
});
