"""HTTP/JSON surface over the annotation store.

Errors always serialize as {"code": ..., "message": ...}. Coder ids in
the adjudication queue are anonymized (slots a/b per batch).
"""

from __future__ import annotations

import os
from dataclasses import asdict

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ohc_topics.annotation.store import AnnotationStore, StoreError
from ohc_topics.schema import LABEL_DESCRIPTIONS, LABELS, N_LABELS

_STATUS_OF = {
    "labels_required": 400,
    "unknown_label": 400,
    "bad_event": 400,
    "not_found": 404,
    "gate_not_passed": 403,
    "not_assigned": 403,
    "training_incomplete": 409,
    "missing_records": 409,
    "not_ready": 409,
    "exhausted": 409,
}


class AnnotationBody(BaseModel):
    coder: str
    sentence: str
    labels: list[str]


class AdjudicationBody(BaseModel):
    sentence: str
    labels: list[str]
    adjudicator: str


def create_app(store: AnnotationStore, ui_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(title="ohc-topics annotation service")

    @app.exception_handler(StoreError)
    async def store_error_handler(request: Request, exc: StoreError):
        status = _STATUS_OF.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": exc.message})

    @app.get("/schema")
    def get_schema():
        return {
            "n": N_LABELS,
            "labels": [
                {"code": code, "description": LABEL_DESCRIPTIONS[code]} for code in LABELS
            ],
        }

    @app.get("/batches/next")
    def next_batch(coder: str = Query(...)):
        return asdict(store.assign_batch(coder))

    @app.get("/posts/{post_id}")
    def get_post(post_id: str):
        if not store.corpus.has_post(post_id):
            raise StoreError("not_found", f"unknown post {post_id}")
        post = store.corpus.post(post_id)
        return {
            "post_id": post.post_id,
            "author_id": post.author_id,
            "text": post.text,
            "sentences": [
                {"sentence_id": s.sentence_id, "index": s.index, "text": s.text}
                for s in store.corpus.sentences_of(post_id)
            ],
        }

    @app.post("/annotations")
    def post_annotation(body: AnnotationBody):
        return store.submit_annotation(body.coder, body.sentence, body.labels)

    @app.get("/coders/{coder_id}/status")
    def coder_status(coder_id: str):
        status = store.coder_progress(coder_id)
        if status.training_done:
            status = store.training_gate(coder_id)
        return asdict(status)

    @app.get("/adjudication/queue")
    def adjudication_queue():
        return [asdict(entry) for entry in store.adjudication_queue()]

    @app.post("/adjudication")
    def post_adjudication(body: AdjudicationBody):
        return store.adjudicate(body.sentence, body.labels, body.adjudicator)

    @app.get("/agreement")
    def agreement(batch: str = Query(...)):
        return store.agreement(batch)

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
