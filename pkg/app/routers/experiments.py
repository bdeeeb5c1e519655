"""Moment, experiment and design-upload endpoints."""

import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Literal, Optional

from fastapi import APIRouter, BackgroundTasks, File, Form, HTTPException, Query, UploadFile
from pydantic import BaseModel, Field, ValidationError

from app.core.config import Settings, get_settings
from app.core.errors import ConfigError, DesignFileError, ExactnessError, HyperApproxError
from app.core.logging import get_logger
from app.services.analysis.experiments import ErrorRow, run_configs, table_configs
from app.services.analysis.report_store import ReportStore
from app.services.kernels import KernelDescriptor, build_kernel
from app.services.moments import compute_moments
from app.services.orthopoly import RegionKind
from app.services.quadrature import design_path, load_spherical_design

router = APIRouter(tags=["experiments"])
logger = get_logger(__name__)

MAX_HTTP_MOMENT_DEGREE = 2000


class TableRequest(BaseModel):
    kernel: KernelDescriptor
    n_list: List[int] = Field(min_length=1)
    m_list: List[int] = Field(min_length=1)
    f: Optional[str] = None
    norm: Literal["L1", "L2"] = "L2"
    name: str = Field("table", pattern=r"^[A-Za-z0-9_.-]+$")


def discard_upload(file_path: str) -> None:
    """Drop a rejected design upload; a failed removal is only logged."""
    try:
        Path(file_path).unlink(missing_ok=True)
        logger.info("Discarded design upload | path=%s", file_path)
    except OSError as e:
        logger.warning("Could not discard design upload | path=%s | error=%s", file_path, e)


def ensure_runtime_directories(settings: Settings) -> None:
    """Table CSVs go to the output folder, API jobs and run_history.csv to the reports folder."""
    os.makedirs(settings.output_folder, exist_ok=True)
    os.makedirs(settings.reports_folder, exist_ok=True)


def _bad_request(e: Exception) -> HTTPException:
    status = 422 if isinstance(e, (ValidationError, ConfigError)) else 400
    return HTTPException(status_code=status, detail=str(e))


@router.get("/moments")
async def get_moments(
    kernel: str = Query(...),
    max_degree: int = Query(..., ge=0, le=MAX_HTTP_MOMENT_DEGREE),
    region: RegionKind = RegionKind.INTERVAL,
    kappa: Optional[float] = None,
    a: Optional[float] = None,
    nu: Optional[float] = None,
    nu1: Optional[float] = None,
    nu2: Optional[float] = None,
    xi: Optional[str] = Query(None, description="x,y,z"),
    lbar: Optional[int] = None,
    kbar: Optional[int] = None,
):
    """Modified moments of a kernel as rows ``{r, re, im}``.

    Bad kernel parameters give 422; numerical errors reach the application handler (400).
    """
    try:
        point = tuple(float(c) for c in xi.split(",")) if xi else None
        descriptor = build_kernel(
            kernel, region, kappa=kappa, a=a, nu=nu, nu1=nu1, nu2=nu2, xi=point, lbar=lbar, kbar=kbar
        )
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    moments = compute_moments(descriptor, max_degree, get_settings().moment_tolerance)

    return {
        "kernel": descriptor.model_dump(),
        "max_degree": max_degree,
        "rows": list(moments.rows()),
    }


async def run_table_job(configs, out_path: str, name: str, settings: Settings) -> None:
    """Background job: run the grid and persist it. Failures are logged, never raised."""
    try:
        rows: List[ErrorRow] = await run_configs(configs, settings.jobs, settings)
        ReportStore(settings).write_table(rows, out_path, name=name)
    except Exception as e:
        logger.exception("Failed table job | name=%s | out=%s: %s", name, out_path, e)


@router.post("/experiments/table")
async def schedule_table(request: TableRequest, background_tasks: BackgroundTasks):
    """Schedule an error table; the CSV lands in the reports folder."""
    settings: Settings = get_settings()
    try:
        configs = table_configs(
            request.kernel,
            request.n_list,
            request.m_list,
            f=request.f,
            norm=request.norm,
            designs_dir=settings.designs_dir,
        )
    except (HyperApproxError, ValueError) as e:
        raise _bad_request(e) from e

    ensure_runtime_directories(settings)
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    out_path = str(Path(settings.reports_folder) / f"{request.name}_{timestamp}.csv")
    background_tasks.add_task(run_table_job, configs, out_path, request.name, settings)
    logger.info("Scheduled table job | name=%s | rows=%s | out=%s", request.name, len(configs), out_path)

    return {
        "status": "accepted",
        "rows": len(configs),
        "kernel": request.kernel.label,
        "output_path": out_path,
        "message": f"Scheduled {len(configs)} experiment rows",
    }


@router.post("/designs")
async def upload_design(file: UploadFile = File(...), t: int = Form(..., ge=0)):
    """Verify a spherical t-design point file and store it under the designs directory."""
    settings: Settings = get_settings()
    if not settings.designs_dir:
        raise HTTPException(
            status_code=400,
            detail="Designs directory not configured. Please set HYPERAPPROX_DESIGNS environment variable.",
        )
    designs_dir = Path(settings.designs_dir)
    designs_dir.mkdir(parents=True, exist_ok=True)

    content = await file.read()
    with tempfile.NamedTemporaryFile("wb", dir=designs_dir, suffix=".upload", delete=False) as handle:
        handle.write(content)
        temp_path = handle.name

    stored = False
    try:
        try:
            rule = load_spherical_design(temp_path, t)
        except ExactnessError as e:
            raise HTTPException(status_code=422, detail={"error": str(e), "defect": e.defect}) from e
        except DesignFileError as e:
            raise HTTPException(status_code=422, detail=str(e)) from e

        if rule.m != (t + 1) ** 2:
            raise HTTPException(
                status_code=422,
                detail=f"design has {rule.m} points, the designs directory stores m = (t+1)^2 = {(t + 1) ** 2}",
            )

        target = design_path(designs_dir, t)
        os.replace(temp_path, target)
        stored = True
    finally:
        if not stored:
            discard_upload(temp_path)

    logger.info("Stored spherical design | file=%s | t=%s | m=%s", target, t, rule.m)
    return {
        "status": "stored",
        "filename": file.filename or "",
        "path": str(target),
        "t": t,
        "m": rule.m,
    }
