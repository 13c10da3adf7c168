"""HTTP query service.

Endpoints:
    GET  /api/health                              liveness probe
    POST /api/query                               rank a sketch PNG
    GET  /api/objects/{id}/views/{ring}/{view}    rendered gallery view PNG

The gallery index (and, for the learned scorer, the model ensemble) is
loaded once when the app is created and never mutated afterwards; other
scorers' engines are created on first use and cached.  Malformed uploads
and blank sketches come back as 400s, unknown objects/views as 404s.
"""

from __future__ import annotations

import dataclasses

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import Response

from .config import SCORER_CHOICES, PipelineConfig
from .errors import EmptySketchError, ImageError, RingSketchError
from .imgio import decode_image, encode_png, load_image
from .pipeline import QueryEngine, renders_root
from .sketchify import crop_to_content


def _engine_for(app: FastAPI, scorer: str) -> QueryEngine:
    engines = app.state.engines
    if scorer not in engines:
        config = dataclasses.replace(app.state.config, scorer=scorer)
        try:
            engines[scorer] = QueryEngine(config)
        except RingSketchError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
    return engines[scorer]


def _thumbnail_route(config: PipelineConfig, object_id: str) -> str:
    ring = 3 if 3 in config.rings else config.rings[0]
    return f"/api/objects/{object_id}/views/{ring}/0"


def create_app(config: PipelineConfig) -> FastAPI:
    app = FastAPI(title="ringsketch query service")
    app.state.config = config
    app.state.engines = {config.scorer: QueryEngine(config)}

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/query")
    async def query(file: UploadFile = File(...),
                    top_k: int = Form(10),
                    scorer: str = Form(None)):
        scorer_name = scorer or app.state.config.scorer
        if scorer_name not in SCORER_CHOICES:
            raise HTTPException(status_code=400,
                                detail=f"scorer must be one of {SCORER_CHOICES}")
        if top_k < 1:
            raise HTTPException(status_code=400, detail="top_k must be >= 1")
        engine = _engine_for(app, scorer_name)
        data = await file.read()
        try:
            pixels = decode_image(data)
        except ImageError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            cropped = crop_to_content(pixels, out_size=app.state.config.resolution)
        except EmptySketchError:
            raise HTTPException(status_code=400, detail="empty sketch") from None
        except ImageError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        ranked = engine.rank_image(cropped, query_id="query")
        results = [
            {"object_id": oid, "score": score,
             "thumbnail": _thumbnail_route(app.state.config, oid)}
            for oid, score in ranked.ranking[:top_k]
        ]
        return {"results": results, "scorer": scorer_name,
                "top_k": top_k, "gallery_size": len(ranked.ranking)}

    @app.get("/api/objects/{object_id}/views/{ring}/{view}")
    def object_view(object_id: str, ring: int, view: int):
        path = renders_root(app.state.config) / object_id / f"ring{ring}" / f"view{view}.png"
        if not path.exists():
            raise HTTPException(status_code=404,
                                detail=f"no view ring={ring} view={view} for {object_id!r}")
        return Response(content=encode_png(load_image(path)), media_type="image/png")

    return app
