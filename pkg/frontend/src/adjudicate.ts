// Adjudication screen: each queued sentence shows both coders' label
// sets side by side with the set difference highlighted, plus one-click
// adopt-A / adopt-B and a custom editor. Stale entries (adjudicated
// elsewhere) are dropped on the conflict response by refreshing.

import { AnnotationApi, ApiError } from "./api.js";
import { renderChips, staticChips } from "./chips.js";
import { labelDiff } from "./diff.js";
import type { QueueEntry, SchemaResponse } from "./types.js";

export function adoptBody(
  entry: QueueEntry,
  which: "a" | "b",
  adjudicator: string,
): { sentence: string; labels: string[]; adjudicator: string } {
  const labels = [...(which === "a" ? entry.coder_a : entry.coder_b)].sort();
  return { sentence: entry.sentence_id, labels, adjudicator };
}

export interface AdjudicateView {
  root: HTMLElement;
  refresh: () => Promise<void>;
}

export function renderAdjudicateView(
  api: AnnotationApi,
  schema: SchemaResponse,
  adjudicator: string,
  onResolved?: (sentenceId: string, batchStatus: string) => void,
): AdjudicateView {
  const root = document.createElement("div");
  root.className = "adjudicate";

  const tracker = document.createElement("div");
  tracker.className = "tracker";
  root.appendChild(tracker);

  const list = document.createElement("div");
  list.className = "queue";
  root.appendChild(list);

  async function resolve(entry: QueueEntry, labels: string[], row: HTMLElement): Promise<void> {
    try {
      const ack = await api.postAdjudication(entry.sentence_id, labels, adjudicator);
      row.remove();
      onResolved?.(entry.sentence_id, ack.batch_status);
      updateTracker(-1);
    } catch (err) {
      if (err instanceof ApiError) {
        await refresh(); // stale entry: reload the queue
      }
    }
  }

  let remaining = 0;
  function updateTracker(delta: number): void {
    remaining += delta;
    tracker.textContent = remaining
      ? `${remaining} sentences awaiting adjudication`
      : "queue clear";
  }

  function renderEntry(entry: QueueEntry): HTMLElement {
    const row = document.createElement("div");
    row.className = entry.agree ? "entry agree" : "entry disagree";
    row.dataset.sentenceId = entry.sentence_id;

    const text = document.createElement("p");
    text.textContent = entry.text;
    row.appendChild(text);

    const diff = labelDiff(entry.coder_a, entry.coder_b);
    const sides = document.createElement("div");
    sides.className = "sides";
    const sideA = document.createElement("div");
    sideA.className = "side";
    sideA.append("coder A", staticChips(entry.coder_a, new Set(diff.onlyA)));
    const sideB = document.createElement("div");
    sideB.className = "side";
    sideB.append("coder B", staticChips(entry.coder_b, new Set(diff.onlyB)));
    sides.append(sideA, sideB);
    row.appendChild(sides);

    const actions = document.createElement("div");
    actions.className = "actions";
    const adoptA = document.createElement("button");
    adoptA.type = "button";
    adoptA.className = "adopt-a";
    adoptA.textContent = "Adopt A";
    adoptA.addEventListener("click", () => {
      const body = adoptBody(entry, "a", adjudicator);
      void resolve(entry, body.labels, row);
    });
    const adoptB = document.createElement("button");
    adoptB.type = "button";
    adoptB.className = "adopt-b";
    adoptB.textContent = "Adopt B";
    adoptB.addEventListener("click", () => {
      const body = adoptBody(entry, "b", adjudicator);
      void resolve(entry, body.labels, row);
    });
    const custom = document.createElement("button");
    custom.type = "button";
    custom.className = "custom";
    custom.textContent = "Custom…";
    actions.append(adoptA, adoptB, custom);
    row.appendChild(actions);

    const editor = document.createElement("div");
    editor.className = "custom-editor hidden";
    const selection = new Set(diff.common);
    editor.appendChild(renderChips(schema.labels, selection, (code) => {
      if (selection.has(code)) selection.delete(code);
      else selection.add(code);
    }));
    const confirm = document.createElement("button");
    confirm.type = "button";
    confirm.className = "confirm-custom";
    confirm.textContent = "Resolve";
    confirm.addEventListener("click", () => {
      if (selection.size > 0) void resolve(entry, [...selection].sort(), row);
    });
    editor.appendChild(confirm);
    row.appendChild(editor);
    custom.addEventListener("click", () => editor.classList.toggle("hidden"));

    return row;
  }

  async function refresh(): Promise<void> {
    const entries = await api.adjudicationQueue();
    list.replaceChildren(...entries.map(renderEntry));
    remaining = entries.length;
    updateTracker(0);
  }

  return { root, refresh };
}
