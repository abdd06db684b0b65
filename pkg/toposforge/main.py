"""FastAPI application for the forcing workbench"""
import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from toposforge.core.config import settings
from toposforge.core.errors import ConfigError, FormulaSyntaxError, ResolutionError, SortError, ToposforgeError
from toposforge.core.logging_setup import configure_logging
from toposforge.models.schemas import (
    EvalRequest, EvalResponse, HealthResponse, Report, SheafifyRequest, SheafifyResponse, SpecResponse,
    TranslateRequest, TranslateResponse, TruthResponse, VerifyRequest,
)
from toposforge.services.verify import SuiteConfig
from toposforge.services.workbench import Workbench

logger = logging.getLogger(__name__)

# Global workbench instance
workbench: Optional[Workbench] = None


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Manage application lifecycle"""
    global workbench

    configure_logging(settings.LOG_LEVEL)
    settings.validate()
    logger.info("🔄 Initializing workbench...")
    workbench = Workbench()
    workbench.initialize()

    yield

    logger.info("Shutting down...")
    workbench = None


app = FastAPI(
    title=settings.API_TITLE,
    description=settings.API_DESCRIPTION,
    version=settings.API_VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _bench() -> Workbench:
    if not workbench:
        raise HTTPException(status_code=503, detail="Workbench not initialized")
    return workbench


def _http_error(e: ToposforgeError) -> HTTPException:
    if isinstance(e, FormulaSyntaxError):
        return HTTPException(status_code=400, detail={"message": str(e), "position": e.position})
    if isinstance(e, (SortError, ConfigError)):
        return HTTPException(status_code=400, detail=str(e))
    if isinstance(e, ResolutionError):
        return HTTPException(status_code=404, detail=str(e))
    logger.error("❌ %s", e)
    return HTTPException(status_code=500, detail=str(e))


@app.get("/", tags=["General"])
async def root():
    """Root endpoint with API information"""
    return {
        "service": settings.API_TITLE,
        "version": settings.API_VERSION,
        "endpoints": {
            "eval": "/eval",
            "truth": "/truth",
            "translate": "/translate",
            "sheafify": "/sheafify",
            "spec": "/spec",
            "verify": "/verify/{suite}",
            "health": "/health",
            "docs": "/docs",
        },
    }


@app.get("/health", response_model=HealthResponse, tags=["General"])
async def health_check():
    """Check API health"""
    stats = _bench().get_stats()
    return {"status": "healthy", "version": settings.API_VERSION, "spaces_loaded": stats["spaces"]}


@app.post("/eval", response_model=EvalResponse, tags=["Forcing"])
def evaluate(request: EvalRequest):
    """
    Decide whether a formula is forced on an open

    Example formulas:
    - ~~U on sierpinski
    - forall s:O. (~inv(s)) => nilp(s) on zmod 12
    """
    bench = _bench()
    try:
        return bench.evaluate(
            request.formula, space=request.space, ring=request.ring, open=request.open,
            declare=request.declare, bind=request.bindings,
        )
    except ToposforgeError as e:
        raise _http_error(e) from None


@app.post("/truth", response_model=TruthResponse, tags=["Forcing"])
def truth(request: EvalRequest):
    """Largest open on which a formula holds"""
    bench = _bench()
    try:
        return bench.truth(
            request.formula, space=request.space, ring=request.ring,
            declare=request.declare, bind=request.bindings,
        )
    except ToposforgeError as e:
        raise _http_error(e) from None


@app.post("/translate", response_model=TranslateResponse, tags=["Forcing"])
def translate(request: TranslateRequest):
    """Box translation of a formula"""
    bench = _bench()
    try:
        return bench.translate(request.formula, request.nucleus, request.elide_gray)
    except ToposforgeError as e:
        raise _http_error(e) from None


@app.post("/sheafify", response_model=SheafifyResponse, tags=["Sheaves"])
def sheafify(request: SheafifyRequest):
    """Sheafify a sheaf given as file contents along a nucleus"""
    bench = _bench()
    try:
        space = request.space
        if "points:" in space:
            space = bench.load_text(space, "request")
        name = bench.load_text(request.sheaf, "request")
        return bench.sheafify(space, name, request.nucleus, request.plus_only)
    except ToposforgeError as e:
        raise _http_error(e) from None


@app.get("/spec", response_model=SpecResponse, tags=["Rings"])
def spec(ring: str = Query(..., min_length=1, description="Ring spec such as zmod 12")):
    """Frame, points and structure-sheaf sections of Spec(ring)"""
    bench = _bench()
    try:
        return bench.spec(ring)
    except ToposforgeError as e:
        raise _http_error(e) from None


@app.post("/verify/{suite}", response_model=Report, tags=["Verification"])
def verify(suite: str, request: Optional[VerifyRequest] = None):
    """Run a verification suite and return its report"""
    bench = _bench()
    request = request or VerifyRequest()
    try:
        config = SuiteConfig()
        for key in ("seed", "count", "max_points", "max_depth"):
            value = getattr(request, key)
            if value is not None:
                setattr(config, key, value)
        if request.space is not None:
            config.spaces = [bench.session.space(request.space)]
        if request.ring is not None:
            config.rings = [bench.session.ring(request.ring)]
        return bench.verify(suite, config)
    except ToposforgeError as e:
        raise _http_error(e) from None


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("toposforge.main:app", host="0.0.0.0", port=8000)
