// Entry point: coder sign-in, tabbed annotate / adjudicate / agreement
// screens against the same-origin annotation service.

import { AnnotationApi, ApiError } from "./api.js";
import { renderAdjudicateView } from "./adjudicate.js";
import { renderAgreementView, renderGateIndicator } from "./agreement.js";
import { renderAnnotateView } from "./annotate.js";
import { SessionState } from "./state.js";
import type { PostView, SchemaResponse } from "./types.js";

export async function boot(container: HTMLElement, api = new AnnotationApi("")): Promise<void> {
  const schema: SchemaResponse = await api.getSchema();

  const header = document.createElement("header");
  const coderInput = document.createElement("input");
  coderInput.placeholder = "coder id";
  coderInput.id = "coder-id";
  const startButton = document.createElement("button");
  startButton.textContent = "Start session";
  const tabs = document.createElement("nav");
  const main = document.createElement("main");
  header.append(coderInput, startButton, tabs);
  container.append(header, main);

  function tabButton(name: string, render: () => Promise<HTMLElement>): void {
    const b = document.createElement("button");
    b.textContent = name;
    b.addEventListener("click", () => {
      void render().then((el) => main.replaceChildren(el));
    });
    tabs.appendChild(b);
  }

  startButton.addEventListener("click", () => {
    const coder = coderInput.value.trim();
    if (!coder) return;
    const state = new SessionState(coder);
    tabs.replaceChildren();

    tabButton("Annotate", async () => {
      try {
        const status = await api.coderStatus(coder);
        if (!status.passed) {
          const wrap = document.createElement("div");
          wrap.appendChild(renderGateIndicator(status));
          return wrap;
        }
      } catch (err) {
        if (err instanceof ApiError && err.code !== "training_incomplete") throw err;
      }
      const batch = await api.nextBatch(coder);
      const posts: PostView[] = [];
      for (const pid of batch.post_ids) {
        posts.push(await api.getPost(pid));
      }
      return renderAnnotateView(api, state, schema, posts).root;
    });

    tabButton("Adjudicate", async () => {
      const view = renderAdjudicateView(api, schema, coder);
      await view.refresh();
      return view.root;
    });

    tabButton("Agreement", async () => {
      const wrap = document.createElement("div");
      const batchInput = document.createElement("input");
      batchInput.placeholder = "batch id";
      const load = document.createElement("button");
      load.textContent = "Load";
      const slot = document.createElement("div");
      load.addEventListener("click", () => {
        void api
          .agreement(batchInput.value.trim())
          .then((payload) =>
            slot.replaceChildren(
              renderAgreementView(payload, schema.labels.map((l) => l.code)),
            ),
          )
          .catch(() => slot.replaceChildren(renderAgreementView(null, [])));
      });
      wrap.append(batchInput, load, slot);
      return Promise.resolve(wrap);
    });
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app") as HTMLElement);
}
