"""HTTP annotation service over an :class:`AnnotationPipeline`.

The API is deliberately small: an annotator pulls their next pair, sees the
three sentences (original plus the two rephrasings) in a randomized order
with no labels, and posts back a verdict.  The served order is encoded in
an opaque permutation token so the blind presentation can be audited later
without ever leaking which sentence is which to the client.
"""

from __future__ import annotations

import json
import random
import uuid
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from textfreq.tfpd import (
    AnnotationPipeline,
    FinalizedJobError,
    JobNotFoundError,
    UnknownAnnotatorError,
    Verdict,
)

# Served-permutation audit entries kept in memory; oldest evicted first.
_MAX_PENDING_TOKENS = 10_000


class JudgmentIn(BaseModel):
    job_id: str
    annotator: str
    verdict: Verdict
    permutation_token: str | None = None


def create_app(
    pipeline: AnnotationPipeline,
    static_dir: str | Path | None = None,
    rng: random.Random | None = None,
) -> FastAPI:
    app = FastAPI(title="textfreq annotation service")
    shuffler = rng if rng is not None else random.Random()
    pending: OrderedDict[str, tuple[str, tuple[str, ...]]] = OrderedDict()

    def remember(token: str, job_id: str, roles: tuple[str, ...]) -> None:
        pending[token] = (job_id, roles)
        while len(pending) > _MAX_PENDING_TOKENS:
            pending.popitem(last=False)

    @app.get("/api/next")
    def next_item(annotator: str = Query(min_length=1)) -> dict:
        try:
            view = pipeline.next_item(annotator)
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc
        if view is None:
            return {"done": True, "progress": pipeline.progress()}
        roles = [
            ("original", view.original),
            ("low", view.low_text),
            ("high", view.high_text),
        ]
        shuffler.shuffle(roles)
        token = uuid.uuid4().hex
        remember(token, view.job_id, tuple(name for name, _ in roles))
        return {
            "done": False,
            "job_id": view.job_id,
            "sentences": [text for _, text in roles],
            "permutation_token": token,
            "progress": pipeline.progress(),
        }

    @app.post("/api/judgments")
    def post_judgment(body: JudgmentIn) -> dict:
        permutation = None
        entry = pending.pop(body.permutation_token, None) if body.permutation_token else None
        if entry is not None and entry[0] == body.job_id:
            permutation = ",".join(entry[1])
        try:
            status = pipeline.record_judgment(
                job_id=body.job_id,
                annotator=body.annotator,
                verdict=body.verdict,
                permutation=permutation,
            )
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc
        except JobNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except FinalizedJobError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"job_id": body.job_id, "status": status.value}

    @app.get("/api/progress")
    def progress() -> dict:
        return pipeline.progress()

    @app.get("/api/export")
    def export() -> PlainTextResponse:
        records = pipeline.accepted_records()
        body = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
