"""HTTP facade for interactive scribble segmentation.

Sessions hold one uploaded image plus a cache of (k, weights) -> (features,
graph), so repeated re-scribbling with unchanged parameters skips the graph
build (the dominant cost). Endpoints:

* ``POST /sessions`` - raw image bytes in the body -> ``{id, width, height}``
* ``POST /sessions/{id}/segment`` - JSON ``{scribbles, k?, lambda?}`` where a
  scribble is ``{class: int, points: [[x, y], ...], brush_radius: int}``;
  returns the mask as base64 PNG plus run stats
* ``GET /sessions/{id}/mask`` - last mask as raw PNG
* ``DELETE /sessions/{id}`` - drop the session

Strokes are rasterized server-side by stamping a disk of the given radius
(dx^2 + dy^2 <= r^2) at every point, clipped to the image.
"""

from __future__ import annotations

import base64
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import imgio, pipeline
from .features import N_FEATURES
from .seeds import SeedMap

DEFAULT_MAX_PIXELS = 2_000_000
DEFAULT_SESSION_TTL_S = 30 * 60


class Stroke(BaseModel):
    class_id: int = Field(alias="class", ge=1)
    points: list[tuple[int, int]]  # [x, y] pairs, x = column
    brush_radius: int = Field(default=0, ge=0)

    model_config = {"populate_by_name": True}


class SegmentRequest(BaseModel):
    scribbles: list[Stroke]
    k: int = Field(default=10, ge=1)
    lam: list[float] | None = Field(default=None, alias="lambda")

    model_config = {"populate_by_name": True}


@dataclass
class Session:
    image: np.ndarray
    created_at: float
    last_used: float
    cache: dict = field(default_factory=dict)
    last_mask: bytes | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, ttl_s: float):
        self.ttl_s = ttl_s
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def sweep(self) -> None:
        now = time.monotonic()
        with self._lock:
            stale = [sid for sid, s in self._sessions.items() if now - s.last_used > self.ttl_s]
            for sid in stale:
                del self._sessions[sid]

    def create(self, image: np.ndarray) -> str:
        self.sweep()
        sid = uuid.uuid4().hex
        now = time.monotonic()
        with self._lock:
            self._sessions[sid] = Session(image=image, created_at=now, last_used=now)
        return sid

    def get(self, sid: str) -> Session:
        self.sweep()
        with self._lock:
            session = self._sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_used = time.monotonic()
            return session

    def delete(self, sid: str) -> None:
        with self._lock:
            if sid not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            del self._sessions[sid]


def rasterize_scribbles(strokes: list[Stroke], height: int, width: int) -> SeedMap:
    """Stamp stroke disks into a seed-code image; later strokes win."""
    codes = np.zeros((height, width), dtype=np.int32)
    max_class = 0
    for stroke in strokes:
        max_class = max(max_class, stroke.class_id)
        r = stroke.brush_radius
        for x, y in stroke.points:
            if not (0 <= x < width and 0 <= y < height):
                raise HTTPException(
                    status_code=422,
                    detail=f"stroke point ({x}, {y}) outside {width}x{height} image",
                )
            r0, r1 = max(0, y - r), min(height, y + r + 1)
            c0, c1 = max(0, x - r), min(width, x + r + 1)
            dy = np.arange(r0, r1) - y
            dx = np.arange(c0, c1) - x
            disk = dy[:, None] ** 2 + dx[None, :] ** 2 <= r * r
            codes[r0:r1, c0:c1][disk] = stroke.class_id
    return SeedMap(codes=codes, class_count=max(max_class, 1))


def _quantized_key(k: int, lam: np.ndarray) -> tuple[int, bytes]:
    return k, np.round(lam * 1_000_000).astype(np.int64).tobytes()


def create_app(
    max_pixels: int = DEFAULT_MAX_PIXELS,
    session_ttl_s: float = DEFAULT_SESSION_TTL_S,
    cors_origins=None,
) -> FastAPI:
    app = FastAPI(title="lpseg", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins) if cors_origins else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl_s=session_ttl_s)
    app.state.store = store

    @app.post("/sessions")
    async def create_session(request: Request):
        data = await request.body()
        try:
            image = imgio.decode_image_bytes(data)
        except Exception:
            raise HTTPException(status_code=400, detail="could not decode image") from None
        h, w = image.shape[:2]
        if h * w > max_pixels:
            raise HTTPException(
                status_code=413,
                detail=f"image has {h * w} pixels, limit is {max_pixels}",
            )
        sid = store.create(image)
        return {"id": sid, "width": w, "height": h}

    @app.post("/sessions/{sid}/segment")
    def segment_session(sid: str, req: SegmentRequest):
        session = store.get(sid)
        h, w = session.image.shape[:2]
        seeds = rasterize_scribbles(req.scribbles, h, w)
        present = seeds.classes_present()
        if len(present) < 2:
            raise HTTPException(
                status_code=422,
                detail=f"need scribbles from at least 2 classes, got {present}",
            )
        if present != list(range(1, seeds.class_count + 1)):
            raise HTTPException(
                status_code=422,
                detail=f"class ids must be dense 1..C, got {present}",
            )
        lam = np.ones(N_FEATURES) if req.lam is None else np.asarray(req.lam, dtype=np.float64)
        try:
            params = pipeline.SegParams(k=req.k, lam=lam)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

        t0 = time.perf_counter()
        with session.lock:
            key = _quantized_key(params.k, params.lam)
            prepared = session.cache.get(key)
            if prepared is None:
                try:
                    prepared = pipeline.prepare_graph(session.image, params)
                except ValueError as exc:
                    raise HTTPException(status_code=422, detail=str(exc)) from None
                session.cache[key] = prepared
            result = pipeline.segment(session.image, seeds, params, prepared=prepared)
            mask_png = imgio.encode_mask_png(pipeline.encode_mask(result))
            session.last_mask = mask_png
        ms = (time.perf_counter() - t0) * 1000.0
        return {
            "mask_png_base64": base64.b64encode(mask_png).decode("ascii"),
            "iterations": result.iterations,
            "converged": result.converged,
            "ms": ms,
            "classes": seeds.class_count,
            "width": w,
            "height": h,
        }

    @app.get("/sessions/{sid}/mask")
    def get_mask(sid: str):
        session = store.get(sid)
        if session.last_mask is None:
            raise HTTPException(status_code=404, detail="no mask computed yet")
        return Response(content=session.last_mask, media_type="image/png")

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        store.delete(sid)

    return app
