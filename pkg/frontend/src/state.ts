// Per-session annotation state. Drafts are local until the coder
// explicitly submits; the submitted map mirrors server acknowledgements
// and nothing else. A refused or failed submit keeps the draft intact.

import { AnnotationApi, ApiError } from "./api.js";

export type SubmitResult =
  | { kind: "submitted"; batchStatus: string | null }
  | { kind: "rejected"; message: string }
  | { kind: "failed"; message: string };

export class SessionState {
  coder: string;
  drafts = new Map<string, Set<string>>();
  submitted = new Map<string, string[]>();
  pending = new Set<string>();
  errors = new Map<string, string>();

  constructor(coder: string) {
    this.coder = coder;
  }

  draftFor(sentenceId: string): Set<string> {
    let draft = this.drafts.get(sentenceId);
    if (!draft) {
      draft = new Set(this.submitted.get(sentenceId) ?? []);
      this.drafts.set(sentenceId, draft);
    }
    return draft;
  }

  toggle(sentenceId: string, code: string): Set<string> {
    const draft = this.draftFor(sentenceId);
    if (draft.has(code)) {
      draft.delete(code);
    } else {
      draft.add(code);
    }
    this.errors.delete(sentenceId);
    return draft;
  }

  isDirty(sentenceId: string): boolean {
    const committed = this.submitted.get(sentenceId);
    const draft = this.drafts.get(sentenceId);
    if (!draft) return false;
    if (!committed) return draft.size > 0;
    const sorted = [...draft].sort();
    return JSON.stringify(sorted) !== JSON.stringify(committed);
  }

  /** Submit one sentence's draft. Empty drafts are rejected locally
   *  without any request; server refusals and network failures keep the
   *  draft so nothing the coder selected is lost. */
  async submit(api: AnnotationApi, sentenceId: string): Promise<SubmitResult> {
    const draft = this.draftFor(sentenceId);
    if (draft.size === 0) {
      const message = "labels required";
      this.errors.set(sentenceId, message);
      return { kind: "rejected", message };
    }
    const labels = [...draft].sort();
    this.pending.add(sentenceId);
    try {
      const ack = await api.postAnnotation(this.coder, sentenceId, labels);
      this.submitted.set(sentenceId, labels);
      this.errors.delete(sentenceId);
      return { kind: "submitted", batchStatus: ack.batch_status };
    } catch (err) {
      const message = err instanceof ApiError ? err.message : "network failure, retry";
      this.errors.set(sentenceId, message);
      return { kind: err instanceof ApiError ? "rejected" : "failed", message };
    } finally {
      this.pending.delete(sentenceId);
    }
  }

  progress(sentenceIds: string[]): { done: number; total: number } {
    const done = sentenceIds.filter((sid) => this.submitted.has(sid)).length;
    return { done, total: sentenceIds.length };
  }
}
