// Sentence-by-sentence annotation screen: one chip row and submit button
// per sentence, keyboard shortcuts on the focused row, a batch progress
// bar, and inline error surfaces that never clear the draft.

import { AnnotationApi } from "./api.js";
import { renderChips } from "./chips.js";
import { labelIndexForKey } from "./keyboard.js";
import { SessionState } from "./state.js";
import type { PostView, SchemaResponse } from "./types.js";

export interface AnnotateView {
  root: HTMLElement;
  refreshProgress: () => void;
  submitSentence: (sentenceId: string) => Promise<void>;
}

export function renderAnnotateView(
  api: AnnotationApi,
  state: SessionState,
  schema: SchemaResponse,
  posts: PostView[],
): AnnotateView {
  const root = document.createElement("div");
  root.className = "annotate";

  const sentenceIds = posts.flatMap((p) => p.sentences.map((s) => s.sentence_id));

  const bar = document.createElement("div");
  bar.className = "progress";
  const fill = document.createElement("div");
  fill.className = "progress-fill";
  const caption = document.createElement("span");
  caption.className = "progress-caption";
  bar.append(fill, caption);
  root.appendChild(bar);

  function refreshProgress(): void {
    const { done, total } = state.progress(sentenceIds);
    const pct = total ? Math.round((100 * done) / total) : 0;
    fill.style.width = `${pct}%`;
    caption.textContent = `${done} / ${total} sentences submitted`;
  }

  const rowsById = new Map<string, HTMLElement>();

  async function submitSentence(sentenceId: string): Promise<void> {
    const row = rowsById.get(sentenceId);
    if (!row) return;
    const note = row.querySelector(".note") as HTMLElement;
    const result = await state.submit(api, sentenceId);
    if (result.kind === "submitted") {
      row.classList.add("committed");
      note.textContent = "saved";
      note.className = "note ok";
    } else {
      // refusal or network failure: draft stays, offer retry
      row.classList.remove("committed");
      note.textContent =
        result.kind === "failed" ? `${result.message} (draft kept)` : result.message;
      note.className = "note error";
    }
    refreshProgress();
  }

  for (const post of posts) {
    const section = document.createElement("section");
    section.className = "post";
    const head = document.createElement("h3");
    head.textContent = post.post_id;
    section.appendChild(head);

    for (const sentence of post.sentences) {
      const row = document.createElement("div");
      row.className = "sentence";
      row.tabIndex = 0;
      row.dataset.sentenceId = sentence.sentence_id;
      rowsById.set(sentence.sentence_id, row);

      const text = document.createElement("p");
      text.textContent = sentence.text;
      row.appendChild(text);

      const chips = renderChips(schema.labels, state.draftFor(sentence.sentence_id), (code) =>
        state.toggle(sentence.sentence_id, code),
      );
      row.appendChild(chips);

      const submit = document.createElement("button");
      submit.type = "button";
      submit.className = "submit";
      submit.textContent = "Submit";
      submit.addEventListener("click", () => void submitSentence(sentence.sentence_id));
      row.appendChild(submit);

      const note = document.createElement("span");
      note.className = "note";
      row.appendChild(note);

      row.addEventListener("keydown", (event) => {
        const idx = labelIndexForKey(event.key);
        if (idx !== null && idx < schema.labels.length) {
          const code = schema.labels[idx].code;
          state.toggle(sentence.sentence_id, code);
          const chip = chips.querySelector(`[data-code="${code}"]`);
          chip?.classList.toggle("on");
          event.preventDefault();
        } else if (event.key === "Enter") {
          void submitSentence(sentence.sentence_id);
          event.preventDefault();
        }
      });

      section.appendChild(row);
    }
    root.appendChild(section);
  }

  refreshProgress();
  return { root, refreshProgress, submitSentence };
}
