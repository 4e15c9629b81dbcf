"""Event-sourced state behind the manual-annotation workflow.

Every mutation is one JSON line appended to the event log; replaying
the log reconstructs the exact store state, and a periodic snapshot
bounds recovery time. Batch statuses are derived, never stored, so
replay cannot drift.

Workflow: coders first annotate the training sentences; the gate opens
once their average kappa against the gold training labels reaches 0.6
(and never closes again). Passed coders receive batches of 50 posts,
each batch going to exactly two distinct coders; completed batches feed
the adjudication queue, disagreements first.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from ohc_topics.corpus import Corpus
from ohc_topics.evaluation import average_kappa
from ohc_topics.schema import LABELS, LabelSet

BATCH_SIZE = 50
GATE_KAPPA = 0.6


class StoreError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass
class BatchState:
    batch_id: str
    post_ids: list[str]
    coders: list[str] = field(default_factory=list)


@dataclass
class BatchView:
    batch_id: str
    post_ids: list[str]
    coders: list[str]
    status: str  # open | complete | adjudicated


@dataclass
class CoderStatus:
    coder_id: str
    training_done: bool
    annotated: int
    required: int
    per_label: dict[str, float] | None
    average: float | None
    passed: bool


@dataclass
class QueueEntry:
    sentence_id: str
    text: str
    coder_a: list[str]
    coder_b: list[str]
    agree: bool


class AnnotationStore:
    def __init__(
        self,
        corpus: Corpus,
        gold_training: dict[str, LabelSet],
        log_path: str | os.PathLike,
        batch_size: int = BATCH_SIZE,
        snapshot_interval: int = 1000,
    ):
        self.corpus = corpus
        self.gold_training = gold_training
        self.log_path = str(log_path)
        self.batch_size = batch_size
        self.snapshot_interval = snapshot_interval
        self._lock = threading.RLock()

        self.training_sentences = [
            s.sentence_id for s in corpus.sentences if s.sentence_id in gold_training
        ]
        training_posts = {sid.rsplit(":", 1)[0] for sid in self.training_sentences}
        self.production_posts = [
            p.post_id for p in corpus.posts if p.post_id not in training_posts
        ]

        self.seq = 0
        self.batches: list[BatchState] = []
        self.batch_of_post: dict[str, str] = {}
        self.next_post_index = 0
        self.annotations: dict[tuple[str, str], list[str]] = {}
        self.annotation_history: list[dict] = []
        self.adjudications: dict[str, dict] = {}
        self.adjudication_history: list[dict] = []
        self.passed: set[str] = set()

        self._recover()

    # ------------------------------------------------------------------ events

    def _recover(self) -> None:
        snap_path = self.log_path + ".snapshot"
        if os.path.exists(snap_path):
            with open(snap_path, encoding="utf-8") as fh:
                self._load_snapshot(json.load(fh))
        if os.path.exists(self.log_path):
            with open(self.log_path, encoding="utf-8") as fh:
                for line in fh:
                    event = json.loads(line)
                    if event["seq"] > self.seq:
                        self._apply(event)
                        self.seq = event["seq"]

    def _emit(self, event: dict) -> None:
        self.seq += 1
        event = {"seq": self.seq, "ts": time.time(), **event}
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._apply(event)
        if self.snapshot_interval and self.seq % self.snapshot_interval == 0:
            self._write_snapshot()

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "batch_created":
            batch = BatchState(batch_id=event["batch_id"], post_ids=list(event["post_ids"]))
            self.batches.append(batch)
            for pid in batch.post_ids:
                self.batch_of_post[pid] = batch.batch_id
            self.next_post_index += len(batch.post_ids)
        elif kind == "batch_assigned":
            self._batch(event["batch_id"]).coders.append(event["coder"])
        elif kind == "annotation":
            key = (event["sentence"], event["coder"])
            self.annotations[key] = list(event["labels"])
            self.annotation_history.append(event)
        elif kind == "gate_passed":
            self.passed.add(event["coder"])
        elif kind == "adjudication":
            self.adjudications[event["sentence"]] = event
            self.adjudication_history.append(event)
        else:
            raise StoreError("bad_event", f"unknown event type {kind!r}")

    def _write_snapshot(self) -> None:
        snap = {
            "seq": self.seq,
            "batches": [
                {"batch_id": b.batch_id, "post_ids": b.post_ids, "coders": b.coders}
                for b in self.batches
            ],
            "annotations": [
                {"sentence": s, "coder": c, "labels": labels}
                for (s, c), labels in self.annotations.items()
            ],
            "annotation_history": self.annotation_history,
            "adjudications": list(self.adjudications.values()),
            "adjudication_history": self.adjudication_history,
            "passed": sorted(self.passed),
        }
        with open(self.log_path + ".snapshot", "w", encoding="utf-8") as fh:
            json.dump(snap, fh, ensure_ascii=False)

    def _load_snapshot(self, snap: dict) -> None:
        self.seq = snap["seq"]
        for b in snap["batches"]:
            batch = BatchState(batch_id=b["batch_id"], post_ids=list(b["post_ids"]))
            batch.coders = list(b["coders"])
            self.batches.append(batch)
            for pid in batch.post_ids:
                self.batch_of_post[pid] = batch.batch_id
            self.next_post_index += len(batch.post_ids)
        for rec in snap["annotations"]:
            self.annotations[(rec["sentence"], rec["coder"])] = list(rec["labels"])
        self.annotation_history = list(snap["annotation_history"])
        for rec in snap["adjudications"]:
            self.adjudications[rec["sentence"]] = rec
        self.adjudication_history = list(snap["adjudication_history"])
        self.passed = set(snap["passed"])

    # ------------------------------------------------------------------ helpers

    def _batch(self, batch_id: str) -> BatchState:
        for batch in self.batches:
            if batch.batch_id == batch_id:
                return batch
        raise StoreError("not_found", f"unknown batch {batch_id}")

    def _batch_sentences(self, batch: BatchState) -> list[str]:
        out = []
        for pid in batch.post_ids:
            out.extend(s.sentence_id for s in self.corpus.sentences_of(pid))
        return out

    def batch_status(self, batch: BatchState) -> str:
        if len(batch.coders) < 2:
            return "open"
        sentences = self._batch_sentences(batch)
        for coder in batch.coders:
            if any((sid, coder) not in self.annotations for sid in sentences):
                return "open"
        if all(sid in self.adjudications for sid in sentences):
            return "adjudicated"
        return "complete"

    def batch_view(self, batch: BatchState) -> BatchView:
        return BatchView(
            batch_id=batch.batch_id,
            post_ids=list(batch.post_ids),
            coders=list(batch.coders),
            status=self.batch_status(batch),
        )

    @staticmethod
    def _check_labels(labels) -> list[str]:
        if not labels:
            raise StoreError("labels_required", "labels must be a non-empty list")
        bad = [code for code in labels if code not in LABELS]
        if bad:
            raise StoreError("unknown_label", f"unknown label codes: {bad}")
        return sorted(set(labels))

    # ------------------------------------------------------------------ operations

    def training_gate(self, coder_id: str) -> CoderStatus:
        """Kappa vs the gold training set; passing at >= 0.6 is permanent."""
        with self._lock:
            required = len(self.training_sentences)
            done = [
                sid for sid in self.training_sentences if (sid, coder_id) in self.annotations
            ]
            if len(done) < required:
                raise StoreError(
                    "training_incomplete",
                    f"coder {coder_id} has annotated {len(done)} of {required} "
                    "training sentences",
                )
            coder_sets = [
                LabelSet.from_codes(self.annotations[(sid, coder_id)])
                for sid in self.training_sentences
            ]
            gold_sets = [self.gold_training[sid] for sid in self.training_sentences]
            kappa = average_kappa(coder_sets, gold_sets)
            average = kappa.pop("AVG")
            if average >= GATE_KAPPA and coder_id not in self.passed:
                self._emit({"type": "gate_passed", "coder": coder_id, "average": average})
            return CoderStatus(
                coder_id=coder_id,
                training_done=True,
                annotated=required,
                required=required,
                per_label=kappa,
                average=average,
                passed=coder_id in self.passed,
            )

    def coder_progress(self, coder_id: str) -> CoderStatus:
        """Status without the completeness requirement (for UI polling)."""
        with self._lock:
            required = len(self.training_sentences)
            done = sum(
                1 for sid in self.training_sentences if (sid, coder_id) in self.annotations
            )
            if done >= required:
                return self.training_gate(coder_id)
            return CoderStatus(
                coder_id=coder_id,
                training_done=False,
                annotated=done,
                required=required,
                per_label=None,
                average=None,
                passed=coder_id in self.passed,
            )

    def assign_batch(self, coder_id: str) -> BatchView:
        """Oldest under-assigned batch this coder is not already on, else a new one."""
        with self._lock:
            if coder_id not in self.passed:
                try:
                    self.training_gate(coder_id)  # gate may open lazily
                except StoreError:
                    pass
            if coder_id not in self.passed:
                raise StoreError(
                    "gate_not_passed",
                    f"coder {coder_id} has not passed the training gate",
                )
            for batch in self.batches:
                if len(batch.coders) < 2 and coder_id not in batch.coders:
                    self._emit(
                        {"type": "batch_assigned", "batch_id": batch.batch_id, "coder": coder_id}
                    )
                    return self.batch_view(batch)
            remaining = self.production_posts[self.next_post_index :]
            if not remaining:
                raise StoreError("exhausted", "no unassigned posts left")
            post_ids = remaining[: self.batch_size]
            batch_id = f"batch-{len(self.batches) + 1:04d}"
            self._emit({"type": "batch_created", "batch_id": batch_id, "post_ids": post_ids})
            self._emit({"type": "batch_assigned", "batch_id": batch_id, "coder": coder_id})
            return self.batch_view(self._batch(batch_id))

    def submit_annotation(self, coder_id: str, sentence_id: str, labels) -> dict:
        """Upsert one coder's labels for a sentence they may annotate."""
        with self._lock:
            codes = self._check_labels(labels)
            post_id = sentence_id.rsplit(":", 1)[0]
            if not any(s.sentence_id == sentence_id for s in self.corpus.sentences_of(post_id)):
                raise StoreError("not_found", f"unknown sentence {sentence_id}")
            if sentence_id not in self.gold_training:
                batch_id = self.batch_of_post.get(post_id)
                batch = self._batch(batch_id) if batch_id else None
                if batch is None or coder_id not in batch.coders:
                    raise StoreError(
                        "not_assigned",
                        f"sentence {sentence_id} is not in a batch assigned to {coder_id}",
                    )
            self._emit(
                {"type": "annotation", "coder": coder_id, "sentence": sentence_id, "labels": codes}
            )
            batch_id = self.batch_of_post.get(post_id)
            status = self.batch_status(self._batch(batch_id)) if batch_id else None
            return {"ok": True, "batch_status": status}

    def adjudication_queue(self) -> list[QueueEntry]:
        """Unresolved sentences of complete batches, disagreements first."""
        with self._lock:
            entries: list[tuple[int, int, QueueEntry]] = []
            order = 0
            for batch in self.batches:
                if self.batch_status(batch) != "complete":
                    continue
                coder_a, coder_b = sorted(batch.coders)
                for sid in self._batch_sentences(batch):
                    if sid in self.adjudications:
                        continue
                    a = self.annotations[(sid, coder_a)]
                    b = self.annotations[(sid, coder_b)]
                    agree = set(a) == set(b)
                    text = next(
                        s.text
                        for s in self.corpus.sentences_of(sid.rsplit(":", 1)[0])
                        if s.sentence_id == sid
                    )
                    entries.append(
                        (0 if not agree else 1, order, QueueEntry(sid, text, a, b, agree))
                    )
                    order += 1
            entries.sort(key=lambda item: (item[0], item[1]))
            return [entry for _, _, entry in entries]

    def adjudicate(self, sentence_id: str, labels, adjudicator_id: str) -> dict:
        with self._lock:
            codes = self._check_labels(labels)
            post_id = sentence_id.rsplit(":", 1)[0]
            batch_id = self.batch_of_post.get(post_id)
            if batch_id is None:
                raise StoreError("not_found", f"sentence {sentence_id} is not in any batch")
            batch = self._batch(batch_id)
            have = [c for c in batch.coders if (sentence_id, c) in self.annotations]
            if len(have) < 2:
                raise StoreError(
                    "missing_records",
                    f"sentence {sentence_id} needs records from both coders first",
                )
            self._emit(
                {
                    "type": "adjudication",
                    "sentence": sentence_id,
                    "labels": codes,
                    "adjudicator": adjudicator_id,
                }
            )
            return {"ok": True, "batch_status": self.batch_status(batch)}

    def agreement(self, batch_id: str) -> dict:
        """Live per-label kappa between a batch's two coders."""
        with self._lock:
            batch = self._batch(batch_id)
            if len(batch.coders) < 2:
                raise StoreError("not_ready", f"batch {batch_id} has fewer than two coders")
            coder_a, coder_b = sorted(batch.coders)
            a_sets, b_sets = [], []
            for sid in self._batch_sentences(batch):
                if (sid, coder_a) in self.annotations and (sid, coder_b) in self.annotations:
                    a_sets.append(LabelSet.from_codes(self.annotations[(sid, coder_a)]))
                    b_sets.append(LabelSet.from_codes(self.annotations[(sid, coder_b)]))
            if not a_sets:
                return {"batch": batch_id, "n": 0, "kappa": None}
            kappa = average_kappa(a_sets, b_sets)
            return {"batch": batch_id, "n": len(a_sets), "kappa": kappa}

    def gold_labels(self) -> dict[str, LabelSet]:
        """Adjudicated sentence labels (the classifier training data)."""
        with self._lock:
            return {
                sid: LabelSet.from_codes(rec["labels"])
                for sid, rec in self.adjudications.items()
            }
