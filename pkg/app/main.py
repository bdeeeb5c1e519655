"""FastAPI application: moments, error tables and spherical designs over HTTP."""

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app import __version__
from app.core.config import get_settings
from app.core.errors import HyperApproxError
from app.core.logging import get_logger, set_level
from app.routers import experiments, health

logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    settings = get_settings()
    set_level(settings.log_level)
    experiments.ensure_runtime_directories(settings)
    logger.info(
        "Service started | version=%s | designs_dir=%s | jobs=%s | reports=%s",
        __version__,
        settings.designs_dir,
        settings.jobs,
        settings.reports_folder,
    )
    yield
    logger.info("Service stopped")


async def library_error_handler(request: Request, exc: HyperApproxError) -> JSONResponse:
    """Library errors that escape a route become 400 with the failing operation."""
    logger.warning("Request failed | path=%s | operation=%s | error=%s", request.url.path, exc.operation, exc)
    return JSONResponse(status_code=400, content={"detail": str(exc), "operation": exc.operation})


def create_app() -> FastAPI:
    application = FastAPI(
        title="hyperapprox",
        description=(
            "Classical and efficient hyperinterpolation of K f on [-1, 1] and the sphere: "
            "modified moments, error tables and spherical design verification."
        ),
        version=__version__,
        lifespan=lifespan,
    )
    application.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    application.add_exception_handler(HyperApproxError, library_error_handler)

    application.include_router(health.router, tags=["Health"])
    application.include_router(experiments.router)
    return application


app = create_app()
