"""HTTP service over a loaded archive bundle.

Every endpoint is a pure view of the library calls: the service never
mutates the bundle, so identical queries return identical responses across
restarts. Error mapping: 404 unknown shot/label, 400 malformed query,
409 checksum mismatch.
"""

from __future__ import annotations

import io
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .bundle import ArchiveBundle
from .errors import (
    ChecksumError,
    MissingSpaceError,
    UnknownLabelError,
    UnknownShotError,
)
from .model import KEYFRAMES_PER_SHOT, AnnotationKind, RankedResult, ShotRef, shot_key

DEFAULT_K = 100  # matches the top-100 evaluation convention


class SimilarRequest(BaseModel):
    shot: str | None = None
    position: int | None = Field(default=None, ge=0, lt=KEYFRAMES_PER_SHOT)
    vector: list[float] | None = None
    alpha: float = Field(default=1.0, ge=0.0, le=1.0)
    k: int = Field(default=DEFAULT_K, ge=1)
    offset: int = Field(default=0, ge=0)
    shortlist_size: int = Field(default=10_000, ge=1)


def _placeholder_jpeg() -> bytes:
    from PIL import Image, ImageDraw

    img = Image.new("RGB", (160, 90), (64, 64, 64))
    draw = ImageDraw.Draw(img)
    draw.rectangle([0, 0, 159, 89], outline=(96, 96, 96))
    draw.line([0, 0, 159, 89], fill=(96, 96, 96))
    draw.line([0, 89, 159, 0], fill=(96, 96, 96))
    buf = io.BytesIO()
    img.save(buf, format="JPEG", quality=80)
    return buf.getvalue()


def _shot_payload(shot: ShotRef, table, score: float | None = None,
                  rank: int | None = None) -> dict:
    ordinal = table.shot_ordinal(shot.video_id, shot.shot_index)
    keyframes = []
    for position in range(KEYFRAMES_PER_SHOT):
        frame = int(table.kf_frame[ordinal * KEYFRAMES_PER_SHOT + position])
        keyframes.append({
            "position": position,
            "frame_number": frame,
            "thumb_url": f"/api/thumbs/{shot.video_id}/{shot.shot_index}/{position}.jpg",
        })
    payload = {
        "shot_id": shot.shot_id,
        "video_id": shot.video_id,
        "shot_index": shot.shot_index,
        "start_frame": shot.start_frame,
        "end_frame": shot.end_frame,
        "keyframes": keyframes,
    }
    if score is not None:
        payload["score"] = score
    if rank is not None:
        payload["rank"] = rank
    return payload


def _page(result: RankedResult, table, k: int, offset: int) -> dict:
    window = result.entries[offset:offset + k]
    return {
        "query_kind": result.query_kind.value,
        "k": k,
        "offset": offset,
        "returned": len(window),
        "results": [
            _shot_payload(shot, table, score=score, rank=offset + i + 1)
            for i, (shot, score) in enumerate(window)
        ],
    }


def create_app(bundle: ArchiveBundle, thumbs_dir=None) -> FastAPI:
    app = FastAPI(title="shotsearch", version=str(bundle.metadata.get("version", 1)))
    table = bundle.table
    searcher = bundle.searcher
    thumbs = Path(thumbs_dir) if thumbs_dir else None
    placeholder = _placeholder_jpeg()

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(UnknownShotError)
    @app.exception_handler(UnknownLabelError)
    async def not_found(request: Request, exc: Exception):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    @app.exception_handler(MissingSpaceError)
    async def bad_request(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ChecksumError)
    async def conflict(request: Request, exc: Exception):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/api/health")
    def health():
        bundle.verify()  # detects post-load tampering -> 409
        return {"status": "ok", "metadata": bundle.metadata}

    @app.get("/api/shots/{video_id}/{shot_index}")
    def get_shot(video_id: str, shot_index: int):
        ordinal = table.shot_ordinal(video_id, shot_index)
        return _shot_payload(table.shot_ref(ordinal), table)

    @app.post("/api/search/similar")
    def search_similar(body: SimilarRequest):
        if (body.shot is None) == (body.vector is None):
            raise ValueError("provide exactly one of 'shot' or 'vector'")
        fetch = body.k + body.offset
        if body.shot is not None:
            video_id, shot_index = shot_key(body.shot)
            position = body.position if body.position is not None else 2
            result = searcher.query_by_shot(
                video_id, shot_index, position=position, alpha=body.alpha,
                k=fetch, shortlist_size=body.shortlist_size,
            )
        else:
            result = searcher.query_by_vector(
                bundle.hasher, body.vector, alpha=body.alpha,
                k=fetch, shortlist_size=body.shortlist_size,
            )
        return _page(result, table, body.k, body.offset)

    def _label_search(kind: AnnotationKind, label: str, k: int, offset: int):
        result = bundle.postings.concept_search(label, kind, k=k + offset)
        return _page(result, table, k, offset)

    @app.get("/api/search/concept")
    def search_concept(label: str, k: int = Query(DEFAULT_K, ge=1), offset: int = Query(0, ge=0)):
        return _label_search(AnnotationKind.CONCEPT, label, k, offset)

    @app.get("/api/search/person")
    def search_person(label: str, k: int = Query(DEFAULT_K, ge=1), offset: int = Query(0, ge=0)):
        return _label_search(AnnotationKind.PERSON, label, k, offset)

    @app.get("/api/search/text")
    def search_text(q: str, k: int = Query(DEFAULT_K, ge=1), offset: int = Query(0, ge=0)):
        result = bundle.text.text_search(q, k=k + offset)
        return _page(result, table, k, offset)

    @app.get("/api/labels")
    def labels(kind: str = Query("concept")):
        try:
            parsed = AnnotationKind(kind)
        except ValueError:
            raise ValueError(f"kind must be 'concept' or 'person', got {kind!r}") from None
        names = bundle.postings.labels(parsed)
        return {
            "kind": parsed.value,
            "labels": [
                {
                    "label": name,
                    "postings": len(bundle.postings.posting_list(name, parsed).postings),
                }
                for name in names
            ],
        }

    @app.get("/api/thumbs/{video_id}/{shot_index}/{position}.jpg")
    def thumb(video_id: str, shot_index: int, position: int):
        if thumbs is not None:
            path = thumbs / video_id / str(shot_index) / f"{position}.jpg"
            if path.exists():
                return Response(content=path.read_bytes(), media_type="image/jpeg")
        return Response(content=placeholder, media_type="image/jpeg")

    return app
