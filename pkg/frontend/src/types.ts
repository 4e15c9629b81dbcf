// Payload shapes, mirroring the annotation service endpoints exactly.

export interface SchemaLabel {
  code: string;
  description: string;
}

export interface SchemaResponse {
  n: number;
  labels: SchemaLabel[];
}

export interface BatchView {
  batch_id: string;
  post_ids: string[];
  coders: string[];
  status: "open" | "complete" | "adjudicated";
}

export interface SentenceView {
  sentence_id: string;
  index: number;
  text: string;
}

export interface PostView {
  post_id: string;
  author_id: string;
  text: string;
  sentences: SentenceView[];
}

export interface CoderStatus {
  coder_id: string;
  training_done: boolean;
  annotated: number;
  required: number;
  per_label: Record<string, number> | null;
  average: number | null;
  passed: boolean;
}

export interface QueueEntry {
  sentence_id: string;
  text: string;
  coder_a: string[];
  coder_b: string[];
  agree: boolean;
}

export interface AgreementResponse {
  batch: string;
  n: number;
  kappa: Record<string, number> | null;
}

export interface AnnotationAck {
  ok: boolean;
  batch_status: string | null;
}

export interface AdjudicationAck {
  ok: boolean;
  batch_status: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
