// Shared test helpers: a stateful in-memory fake of the annotation
// service, speaking the documented endpoints over a FetchLike.

import type { FetchLike } from "../src/api.js";
import type { QueueEntry, SchemaResponse } from "../src/types.js";

export const LABELS = [
  "ALTR", "DAIL", "DIAG", "FIND", "HSYS", "MISC",
  "NUTR", "PERS", "RSRC", "TEST", "TREA",
];

export const SCHEMA: SchemaResponse = {
  n: 11,
  labels: LABELS.map((code) => ({ code, description: `${code} gloss` })),
};

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export class FakeService {
  annotations = new Map<string, Map<string, string[]>>(); // sentence -> coder -> labels
  adjudications = new Map<string, string[]>();
  sentences: { sentence_id: string; text: string }[];
  agreementPayload: unknown = null;
  requests: RecordedRequest[] = [];

  constructor(sentences: { sentence_id: string; text: string }[]) {
    this.sentences = sentences;
  }

  queue(): QueueEntry[] {
    const entries: QueueEntry[] = [];
    for (const s of this.sentences) {
      if (this.adjudications.has(s.sentence_id)) continue;
      const bySentence = this.annotations.get(s.sentence_id);
      if (!bySentence || bySentence.size < 2) continue;
      const coders = [...bySentence.keys()].sort();
      const a = bySentence.get(coders[0])!;
      const b = bySentence.get(coders[1])!;
      const agree = JSON.stringify([...a].sort()) === JSON.stringify([...b].sort());
      entries.push({ sentence_id: s.sentence_id, text: s.text, coder_a: a, coder_b: b, agree });
    }
    entries.sort((x, y) => Number(x.agree) - Number(y.agree));
    return entries;
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.requests.push({ url, method, body });

    if (url.endsWith("/schema")) return json(SCHEMA);
    if (url.includes("/adjudication/queue")) return json(this.queue());
    if (url.includes("/agreement")) return json(this.agreementPayload);
    if (method === "POST" && url.endsWith("/annotations")) {
      const { coder, sentence, labels } = body as {
        coder: string; sentence: string; labels: string[];
      };
      if (!labels.length) {
        return json({ code: "labels_required", message: "labels required" }, 400);
      }
      if (!this.annotations.has(sentence)) this.annotations.set(sentence, new Map());
      this.annotations.get(sentence)!.set(coder, [...labels].sort());
      return json({ ok: true, batch_status: "open" });
    }
    if (method === "POST" && url.endsWith("/adjudication")) {
      const { sentence, labels } = body as { sentence: string; labels: string[] };
      this.adjudications.set(sentence, labels);
      return json({ ok: true, batch_status: "complete" });
    }
    return json({ code: "not_found", message: `no fake for ${url}` }, 404);
  };
}
